//! End-to-end pipelines producing resolution-swept evidence and reports.

mod pipeline;
mod report;
mod scenarios;

pub use pipeline::{normalize, verify_sum_interior, Normalized, ResolutionEvidence, SumEvidence, Verdict};
pub use report::{CheckResult, Summary, VerificationReport, SCHEMA_VERSION};
pub use scenarios::{
    verify_cantor_ladder, verify_covering_scenario, verify_equivalent_conditions, verify_main_scenario,
    verify_separator_suite,
};

use crate::affine::AffineError;
use crate::gallery::GalleryError;
use crate::grid::GridError;
use crate::sums::SumsError;
use thiserror::Error;

/// Resolution sweep used when the caller gives none.
pub const DEFAULT_RESOLUTIONS: [f64; 3] = [0.02, 0.01, 0.005];

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Affine(#[from] AffineError),
    #[error(transparent)]
    Sums(#[from] SumsError),
    #[error(transparent)]
    Gallery(#[from] GalleryError),
    #[error("bad input: {0}")]
    Input(String),
}

/// Tuning shared by the pipelines.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    /// Spacings in normalized coordinates, any order.
    pub resolutions: Vec<f64>,
    /// Rank tolerance; relative to the sample scale when `None`.
    pub tol: Option<f64>,
    pub seed: u64,
    /// Patch radius for nowhere-flatness tests.
    pub rho: f64,
    /// Cube half-side for the lattice-shift covering.
    pub s: u64,
    /// Random directions for projection tests.
    pub directions: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            resolutions: DEFAULT_RESOLUTIONS.to_vec(),
            tol: None,
            seed: 0,
            rho: 0.05,
            s: 1,
            directions: 100,
        }
    }
}

impl VerifyOptions {
    /// Resolutions from coarse to fine, deduplicated.
    pub fn sweep(&self) -> Result<Vec<f64>, VerifyError> {
        if self.resolutions.is_empty() {
            return Err(VerifyError::Input("no resolutions".into()));
        }
        if let Some(h) = self.resolutions.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
            return Err(VerifyError::Input(format!("resolution {h} is not positive")));
        }
        let mut r = self.resolutions.clone();
        r.sort_by(|a, b| b.total_cmp(a));
        r.dedup();
        Ok(r)
    }
}

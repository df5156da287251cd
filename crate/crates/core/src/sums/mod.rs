//! Lattice-shift covering, measure bounds, midpoint iteration and discrete
//! separator checks for sums of continua.

mod midpoint;
mod separator;
mod shift;

pub use midpoint::{midpoint_iterate, MidpointChain, MAX_MIDPOINT_STEPS};
pub use separator::{
    build_sum_separators, random_separator_instance, separators_intersect, FactorGraph, IntersectionOutcome,
    SeparatorInstance, SumSeparators, MAX_PRODUCT,
};
pub use shift::{shift_construction, verify_covering, CoveringCheck, ShiftConstruction};

use crate::affine::AffineError;
use crate::grid::{dilate, dilate_box, rasterize_covering, GridError, GridSet, RasterMode, SampledSet, Semantics};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SumsError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Affine(#[from] AffineError),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid separator instance on axis {axis}: {reason}")]
    InvalidInstance { axis: usize, reason: String },
}

/// Rasters of `K_1 + ... + K_n` at one spacing.
#[derive(Clone, Debug)]
pub struct SumRasters {
    /// Cells holding a sum of samples.
    pub sample: GridSet,
    /// Cells that may meet the true sum; contains it outright.
    pub outer: GridSet,
}

/// Rasterizes every set at spacing `h` and sums them.
///
/// A true point of `K_i` lies within `k_i = ceil(eps_i / h)` cells of a
/// sample cell, and a sum of points from cells `c_1, ..., c_n` lies in cells
/// `sum c_i + {0, ..., n-1}` per axis, so growing the sample sum by
/// `-sum k_i` below and `sum k_i + n - 1` above yields a set of cells
/// containing the true sum.
pub fn sum_rasters(sets: &[SampledSet], h: f64) -> Result<SumRasters, SumsError> {
    let first = sets.first().ok_or_else(|| SumsError::Precondition("no sets to sum".into()))?;
    let dim = first.dim;
    let mut sample: Option<GridSet> = None;
    let mut grow = 0i64;
    for s in sets {
        if s.dim != dim {
            return Err(SumsError::Precondition("sets differ in dimension".into()));
        }
        if s.is_empty() {
            return Err(SumsError::Precondition("cannot sum an empty set".into()));
        }
        let r = rasterize_covering(s, h, RasterMode::SampleCover, 0)?;
        grow += (s.density / h).ceil() as i64;
        sample = Some(match sample {
            None => r,
            Some(acc) => dilate(&acc, &r)?,
        });
    }
    let sample = sample.expect("at least one set");
    let hi = grow + sets.len() as i64 - 1;
    let outer =
        dilate_box(&sample, &vec![-grow; dim], &vec![hi; dim])?.with_semantics(Semantics::Outer { radius: 0.0 });
    Ok(SumRasters { sample, outer })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureCheck {
    pub estimate: f64,
    pub vol_p: f64,
    pub ratio: f64,
    pub passed: bool,
}

/// Compares the measure of an outer raster with a parallelotope volume.
pub fn measure_lower_bound_check(sumset: &GridSet, vol_p: f64) -> Result<MeasureCheck, SumsError> {
    if !matches!(sumset.semantics(), Semantics::Outer { .. }) {
        return Err(SumsError::Precondition(format!(
            "measure bound needs an outer raster, got {:?}",
            sumset.semantics()
        )));
    }
    if !(vol_p > 0.0) {
        return Err(SumsError::Precondition(format!("volume {vol_p} is not positive")));
    }
    let estimate = sumset.measure_estimate().value;
    let ratio = estimate / vol_p;
    Ok(MeasureCheck { estimate, vol_p, ratio, passed: ratio >= 1.0 })
}

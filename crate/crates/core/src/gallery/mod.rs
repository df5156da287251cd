//! Deterministic generators of standard continua and Cantor-ladder sets.

mod cantor;

pub use cantor::{
    cantor_function, cantor_graph, cantor_set, dyadic_lines_check, ladder_steps, DyadicHeight, DyadicLines,
};

use crate::grid::{GridError, Point, SampledSet};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GalleryError {
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

fn default_length() -> f64 {
    1.0
}
fn default_refine() -> usize {
    4
}
fn default_plateau_budget() -> usize {
    1000
}
fn default_per_plateau() -> usize {
    5
}
fn default_center() -> Vec<f64> {
    vec![0.0, 0.0]
}

/// A generator and its parameters. `budget` counts samples per piece
/// (segment, arm, edge) and is at least 2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    /// Straight segment between two points.
    Segment { start: Vec<f64>, end: Vec<f64>, budget: usize },
    /// Union of the coordinate segments `[0, length] e_i`, `i < dim`.
    LShape {
        dim: usize,
        #[serde(default = "default_length")]
        length: f64,
        budget: usize,
    },
    /// Circle of radius `r` in the plane.
    Circle {
        #[serde(default = "default_center")]
        center: Vec<f64>,
        r: f64,
        budget: usize,
    },
    /// `{(t, t^2, ..., t^dim) : t in [0, 1]}`.
    MomentCurve { dim: usize, budget: usize },
    /// Broken line through `vertices`.
    Polyline { vertices: Vec<Vec<f64>>, budget: usize },
    /// Left endpoints of the level-`depth` Cantor intervals.
    CantorSet { depth: usize },
    /// Graph of the Cantor ladder, sampled `refine` levels below `depth`;
    /// `budget` samples per unit length on plateaus.
    CantorGraph {
        depth: usize,
        #[serde(default = "default_refine")]
        refine: usize,
        #[serde(default = "default_plateau_budget")]
        budget: usize,
    },
    /// Open plateau interiors of the ladder through level `depth`.
    LadderSteps {
        depth: usize,
        #[serde(default = "default_per_plateau")]
        per_plateau: usize,
    },
}

/// Generator output. `heights` tags each sample with its exact dyadic
/// second coordinate where the generator knows it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generated {
    pub set: SampledSet,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heights: Option<Vec<DyadicHeight>>,
}

impl Generated {
    fn plain(set: SampledSet) -> Self {
        Generated { set, heights: None }
    }
}

/// Largest depth accepted by the Cantor generators.
pub const MAX_CANTOR_DEPTH: usize = 16;

fn check_budget(budget: usize) -> Result<(), GalleryError> {
    if budget < 2 {
        return Err(GalleryError::BadParameter(format!("budget {budget} is below 2")));
    }
    Ok(())
}

fn check_finite(name: &str, v: &[f64]) -> Result<(), GalleryError> {
    if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
        return Err(GalleryError::BadParameter(format!("{name} must be a non-empty finite vector")));
    }
    Ok(())
}

/// `budget` equally spaced points from `a` to `b`, endpoints included.
fn segment_points(a: &[f64], b: &[f64], budget: usize) -> Vec<Point> {
    let m = (budget - 1) as f64;
    (0..budget)
        .map(|k| {
            let t = k as f64 / m;
            Point::new(a.iter().zip(b).map(|(&x, &y)| if k + 1 == budget { y } else { x + t * (y - x) }).collect())
        })
        .collect()
}

fn sup_len(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn generate(spec: &GeneratorSpec) -> Result<Generated, GalleryError> {
    match spec {
        GeneratorSpec::Segment { start, end, budget } => {
            check_budget(*budget)?;
            check_finite("start", start)?;
            check_finite("end", end)?;
            if start.len() != end.len() {
                return Err(GalleryError::BadParameter("segment endpoints differ in dimension".into()));
            }
            let eps = sup_len(start, end) / (2.0 * (*budget - 1) as f64);
            Ok(Generated::plain(SampledSet::new(start.len(), segment_points(start, end, *budget), eps)?))
        }
        GeneratorSpec::LShape { dim, length, budget } => {
            check_budget(*budget)?;
            if *dim == 0 || !(length.is_finite() && *length > 0.0) {
                return Err(GalleryError::BadParameter("l_shape needs dim >= 1 and length > 0".into()));
            }
            let mut pts = vec![Point::zeros(*dim)];
            for axis in 0..*dim {
                let mut end = vec![0.0; *dim];
                end[axis] = *length;
                pts.extend(segment_points(&vec![0.0; *dim], &end, *budget).into_iter().skip(1));
            }
            let eps = length / (2.0 * (*budget - 1) as f64);
            Ok(Generated::plain(SampledSet::new(*dim, pts, eps)?))
        }
        GeneratorSpec::Circle { center, r, budget } => {
            check_budget(*budget)?;
            check_finite("center", center)?;
            if center.len() != 2 || !(r.is_finite() && *r > 0.0) {
                return Err(GalleryError::BadParameter("circle needs a planar center and r > 0".into()));
            }
            let pts = (0..*budget)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / *budget as f64;
                    Point::new(vec![center[0] + r * t.cos(), center[1] + r * t.sin()])
                })
                .collect();
            Ok(Generated::plain(SampledSet::new(2, pts, r * PI / *budget as f64)?))
        }
        GeneratorSpec::MomentCurve { dim, budget } => {
            check_budget(*budget)?;
            if *dim == 0 {
                return Err(GalleryError::BadParameter("moment_curve needs dim >= 1".into()));
            }
            let step = 1.0 / (*budget - 1) as f64;
            let pts = (0..*budget)
                .map(|k| {
                    let t = if k + 1 == *budget { 1.0 } else { k as f64 * step };
                    Point::new((1..=*dim as i32).map(|p| t.powi(p)).collect())
                })
                .collect();
            // each coordinate t^p is p-Lipschitz on [0, 1]
            Ok(Generated::plain(SampledSet::new(*dim, pts, *dim as f64 * step / 2.0)?))
        }
        GeneratorSpec::Polyline { vertices, budget } => {
            check_budget(*budget)?;
            let first = vertices.first().ok_or_else(|| GalleryError::BadParameter("polyline needs a vertex".into()))?;
            for v in vertices {
                check_finite("vertex", v)?;
                if v.len() != first.len() {
                    return Err(GalleryError::BadParameter("polyline vertices differ in dimension".into()));
                }
            }
            let mut pts = vec![Point::new(first.clone())];
            let mut eps = 0.0f64;
            for w in vertices.windows(2) {
                pts.extend(segment_points(&w[0], &w[1], *budget).into_iter().skip(1));
                eps = eps.max(sup_len(&w[0], &w[1]) / (2.0 * (*budget - 1) as f64));
            }
            Ok(Generated::plain(SampledSet::new(first.len(), pts, eps)?))
        }
        GeneratorSpec::CantorSet { depth } => cantor_set(*depth).map(Generated::plain),
        GeneratorSpec::CantorGraph { depth, refine, budget } => {
            cantor_graph(*depth, *refine, *budget).map(Generated::plain)
        }
        GeneratorSpec::LadderSteps { depth, per_plateau } => ladder_steps(*depth, *per_plateau),
    }
}

//! Flatness certificates: affine dimension, independent difference bases,
//! parallelotope volumes and projection ranges of sample clouds.

mod collective;

pub use collective::{collectively_nowhere_flat, transversal_basis, CollectiveCertificate, PatchPlan, PatchWitness};

use crate::grid::{Point, SampledSet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AffineError {
    #[error("no points given")]
    Empty,
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("points of mixed dimension")]
    DimensionMismatch,
    #[error("patch radius {rho} must exceed twice the sample density {density}")]
    RhoTooSmall { rho: f64, density: f64 },
    #[error("direction must be non-zero")]
    ZeroDirection,
    #[error("direction has Euclidean norm {0}, expected 1")]
    NotNormalized(f64),
    #[error("expected {expected} sets, got {got}")]
    SetCount { expected: usize, got: usize },
}

/// Relative rank tolerance: `1e-9` times the largest sup-norm among `points`.
pub fn relative_tol(points: &[Point]) -> f64 {
    let scale = points.iter().fold(0.0f64, |m, p| m.max(p.sup_norm()));
    if scale > 0.0 {
        1e-9 * scale
    } else {
        1e-9
    }
}

/// Rank of a cloud's difference vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineDimension {
    pub dim: usize,
    pub base: Point,
    /// Pivot difference vectors `p_i - base`, in pivot order.
    pub basis: Vec<Point>,
    /// Input indices of the pivot points.
    pub pivots: Vec<usize>,
}

/// Incremental row echelon form used for greedy basis extension.
#[derive(Clone, Debug, Default)]
pub(crate) struct Echelon {
    rows: Vec<(usize, Vec<f64>)>,
}

impl Echelon {
    /// Residual of `v` after eliminating the chosen pivot columns.
    pub(crate) fn reduce(&self, v: &[f64]) -> Vec<f64> {
        let mut r = v.to_vec();
        for (col, row) in &self.rows {
            let f = r[*col] / row[*col];
            if f != 0.0 {
                for (x, y) in r.iter_mut().zip(row) {
                    *x -= f * y;
                }
            }
            r[*col] = 0.0;
        }
        r
    }

    /// Largest residual entry as `(magnitude, column)`; ties take the lowest column.
    pub(crate) fn pivot(residual: &[f64]) -> (f64, usize) {
        let mut best = (0.0, 0);
        for (j, v) in residual.iter().enumerate() {
            if v.abs() > best.0 {
                best = (v.abs(), j);
            }
        }
        best
    }

    pub(crate) fn push(&mut self, residual: Vec<f64>, col: usize) {
        self.rows.push((col, residual));
    }

    pub(crate) fn len(&self) -> usize {
        self.rows.len()
    }
}

/// Affine dimension of `points` by complete-pivoting elimination on the
/// differences `p_i - p_0`.
///
/// At each step the difference with the largest residual entry becomes the
/// next pivot (ties resolved by lowest input index, then lowest column);
/// elimination stops once no residual entry exceeds `tol`.
pub fn affine_dimension(points: &[Point], tol: f64) -> Result<AffineDimension, AffineError> {
    let base = points.first().ok_or(AffineError::Empty)?.clone();
    if !(tol > 0.0) {
        return Err(AffineError::BadTolerance(tol));
    }
    let n = base.dim();
    if points.iter().any(|p| p.dim() != n) {
        return Err(AffineError::DimensionMismatch);
    }
    let mut residuals: Vec<(usize, Vec<f64>)> =
        points.iter().enumerate().skip(1).map(|(i, p)| (i, p.sub(&base).into_coords())).collect();
    let mut basis = Vec::new();
    let mut pivots = Vec::new();
    while pivots.len() < n {
        let mut best: Option<(f64, usize, usize)> = None; // (magnitude, slot, column)
        for (slot, (_, r)) in residuals.iter().enumerate() {
            let (m, col) = Echelon::pivot(r);
            if best.is_none_or(|b| m > b.0) {
                best = Some((m, slot, col));
            }
        }
        let Some((m, slot, col)) = best else { break };
        if m <= tol {
            break;
        }
        let (idx, prow) = residuals.remove(slot);
        for (_, r) in residuals.iter_mut() {
            let f = r[col] / prow[col];
            if f != 0.0 {
                for (x, y) in r.iter_mut().zip(&prow) {
                    *x -= f * y;
                }
            }
            r[col] = 0.0;
        }
        pivots.push(idx);
        basis.push(points[idx].sub(&base));
    }
    Ok(AffineDimension { dim: pivots.len(), base, basis, pivots })
}

/// `|det|` of the square matrix whose rows are `vectors`, by partial pivoting.
/// Non-square input yields `0`.
pub fn parallelotope_volume(vectors: &[Point]) -> f64 {
    let n = vectors.len();
    if n == 0 || vectors.iter().any(|v| v.dim() != n) {
        return 0.0;
    }
    let mut m: Vec<Vec<f64>> = vectors.iter().map(|v| v.coords().to_vec()).collect();
    let mut det = 1.0;
    for col in 0..n {
        let (p, pv) =
            (col..n).map(|r| (r, m[r][col].abs())).fold((col, -1.0), |best, x| if x.1 > best.1 { x } else { best });
        if pv == 0.0 {
            return 0.0;
        }
        m.swap(col, p);
        det *= m[col][col];
        let pivot = m[col].clone();
        for row in m.iter_mut().skip(col + 1) {
            let f = row[col] / pivot[col];
            if f != 0.0 {
                for (x, y) in row[col..].iter_mut().zip(&pivot[col..]) {
                    *x -= f * y;
                }
            }
        }
    }
    det.abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flatness {
    Flat,
    NonFlat,
}

/// Outcome of a non-flatness test on a sample cloud.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub affine_dim: usize,
    pub ambient_dim: usize,
    pub base: Point,
    pub basis: Vec<Point>,
    pub pivots: Vec<usize>,
    pub det_abs: Option<f64>,
    pub verdict: Flatness,
    pub tol: f64,
}

impl FlatnessReport {
    pub fn is_non_flat(&self) -> bool {
        self.verdict == Flatness::NonFlat
    }

    /// Unit normals of the affine hull when it is deficient (empty otherwise):
    /// an orthonormal basis of the complement of the basis span.
    pub fn hull_normals(&self) -> Vec<Point> {
        let n = self.ambient_dim;
        let mut ortho: Vec<Vec<f64>> = Vec::new();
        let gs = |v: &[f64], ortho: &[Vec<f64>], floor: f64| -> Option<Vec<f64>> {
            let mut r = v.to_vec();
            for q in ortho {
                let d: f64 = r.iter().zip(q).map(|(a, b)| a * b).sum();
                for (x, y) in r.iter_mut().zip(q) {
                    *x -= d * y;
                }
            }
            let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            (norm > floor).then(|| r.iter().map(|x| x / norm).collect())
        };
        for b in &self.basis {
            let scale = b.coords().iter().map(|x| x * x).sum::<f64>().sqrt();
            let unit: Vec<f64> = b.coords().iter().map(|x| x / scale).collect();
            if let Some(q) = gs(&unit, &ortho, 1e-12) {
                ortho.push(q);
            }
        }
        let mut normals = Vec::new();
        for k in 0..n {
            if ortho.len() == n {
                break;
            }
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            if let Some(q) = gs(&e, &ortho, 1e-6) {
                ortho.push(q.clone());
                normals.push(Point::new(q));
            }
        }
        normals
    }
}

/// Non-flatness certificate: translate the first sample to the origin and
/// greedily extend a maximal independent set of differences.
pub fn nonflat_certificate(samples: &SampledSet, tol: f64) -> Result<FlatnessReport, AffineError> {
    let ad = affine_dimension(&samples.points, tol)?;
    let n = samples.dim;
    let full = ad.dim == n;
    Ok(FlatnessReport {
        affine_dim: ad.dim,
        ambient_dim: n,
        det_abs: full.then(|| parallelotope_volume(&ad.basis)),
        base: ad.base,
        basis: ad.basis,
        pivots: ad.pivots,
        verdict: if full { Flatness::NonFlat } else { Flatness::Flat },
        tol,
    })
}

/// Per-patch nowhere-flatness verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NowhereFlatVerdict {
    pub nowhere_flat: bool,
    pub rho: f64,
    pub patches_checked: usize,
    /// First sample (input order) whose patch is flat.
    pub failing_center: Option<usize>,
    pub failing_patch_dim: Option<usize>,
}

/// Sample indices within sup-norm `rho` of sample `c`, in input order.
pub(crate) fn patch(samples: &SampledSet, c: usize, rho: f64) -> Vec<usize> {
    let center = &samples.points[c];
    samples.points.iter().enumerate().filter(|(_, p)| p.sup_dist(center) <= rho).map(|(i, _)| i).collect()
}

/// Checks that every sup-norm patch of radius `rho` around a sample is non-flat.
///
/// Patch points are listed with the center first, so the center is the
/// certificate's base point.
pub fn is_nowhere_flat(samples: &SampledSet, rho: f64, tol: f64) -> Result<NowhereFlatVerdict, AffineError> {
    if samples.is_empty() {
        return Err(AffineError::Empty);
    }
    if !(rho > 2.0 * samples.density) {
        return Err(AffineError::RhoTooSmall { rho, density: samples.density });
    }
    if !(tol > 0.0) {
        return Err(AffineError::BadTolerance(tol));
    }
    let dims: Vec<usize> = (0..samples.len())
        .into_par_iter()
        .map(|c| {
            let mut idx = patch(samples, c, rho);
            idx.retain(|&i| i != c);
            let mut pts = vec![samples.points[c].clone()];
            pts.extend(idx.iter().map(|&i| samples.points[i].clone()));
            affine_dimension(&pts, tol).map(|a| a.dim).unwrap_or(0)
        })
        .collect();
    let failing = dims.iter().position(|&d| d < samples.dim);
    Ok(NowhereFlatVerdict {
        nowhere_flat: failing.is_none(),
        rho,
        patches_checked: dims.len(),
        failing_center: failing,
        failing_patch_dim: failing.map(|i| dims[i]),
    })
}

/// Range of the linear functional `x -> <direction, x>` over the samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionRange {
    pub lo: f64,
    pub hi: f64,
    pub density: f64,
}

impl ProjectionRange {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    /// The sampled image certifies a non-degenerate interval.
    pub fn nondegenerate(&self) -> bool {
        self.length() > 2.0 * self.density
    }
}

pub fn projection_range(samples: &SampledSet, direction: &Point) -> Result<ProjectionRange, AffineError> {
    if samples.is_empty() {
        return Err(AffineError::Empty);
    }
    if direction.dim() != samples.dim {
        return Err(AffineError::DimensionMismatch);
    }
    let norm = direction.dot(direction).sqrt();
    if norm == 0.0 {
        return Err(AffineError::ZeroDirection);
    }
    if (norm - 1.0).abs() > 1e-12 {
        return Err(AffineError::NotNormalized(norm));
    }
    let (lo, hi) = samples.points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let v = p.dot(direction);
        (lo.min(v), hi.max(v))
    });
    // |<d, x - s>| <= |d|_1 * |x - s|_inf
    let density = samples.density * direction.coords().iter().map(|v| v.abs()).sum::<f64>();
    Ok(ProjectionRange { lo, hi, density })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[&[f64]]) -> Vec<Point> {
        v.iter().map(|c| Point::new(c.to_vec())).collect()
    }

    #[test]
    fn small_dimensions() {
        assert_eq!(affine_dimension(&pts(&[&[0., 0.], &[1., 0.], &[2., 0.]]), 1e-9).unwrap().dim, 1);
        assert_eq!(affine_dimension(&pts(&[&[0., 0.], &[1., 0.], &[0., 1.]]), 1e-9).unwrap().dim, 2);
        assert_eq!(affine_dimension(&pts(&[&[3., 4.]]), 1e-9).unwrap().dim, 0);
        assert_eq!(affine_dimension(&[], 1e-9), Err(AffineError::Empty));
        assert!(affine_dimension(&pts(&[&[0.0]]), 0.0).is_err());
    }

    #[test]
    fn volumes() {
        assert_eq!(parallelotope_volume(&pts(&[&[1., 0.], &[0., 1.]])), 1.0);
        assert_eq!(parallelotope_volume(&pts(&[&[1., 0.], &[1., 1.]])), 1.0);
        assert_eq!(parallelotope_volume(&pts(&[&[2., 0.], &[0., 3.]])), 6.0);
        assert_eq!(parallelotope_volume(&pts(&[&[1., 2.], &[2., 4.]])), 0.0);
    }

    #[test]
    fn moment_curve_certificate() {
        let s = SampledSet::new(2, pts(&[&[0., 0.], &[1., 1.], &[0.5, 0.25]]), 0.0).unwrap();
        let r = nonflat_certificate(&s, 1e-9).unwrap();
        assert!(r.is_non_flat());
        assert_eq!(r.base.coords(), &[0.0, 0.0]);
        assert!((r.det_abs.unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn segment_is_flat_with_vertical_normal() {
        let s = SampledSet::new(2, pts(&[&[0., 0.], &[0.5, 0.], &[1., 0.]]), 0.25).unwrap();
        let r = nonflat_certificate(&s, 1e-9).unwrap();
        assert_eq!(r.verdict, Flatness::Flat);
        assert_eq!(r.affine_dim, 1);
        assert!(r.det_abs.is_none());
        let normals = r.hull_normals();
        assert_eq!(normals.len(), 1);
        assert!((normals[0][1].abs() - 1.0).abs() < 1e-12);
        let pr = projection_range(&s, &normals[0]).unwrap();
        assert!(!pr.nondegenerate());
    }

    #[test]
    fn projection_errors() {
        let s = SampledSet::new(2, pts(&[&[0., 0.]]), 0.0).unwrap();
        assert_eq!(projection_range(&s, &Point::new(vec![0., 0.])), Err(AffineError::ZeroDirection));
        assert!(matches!(projection_range(&s, &Point::new(vec![1., 1.])), Err(AffineError::NotNormalized(_))));
    }

    #[test]
    fn rho_guard() {
        let s = SampledSet::new(2, pts(&[&[0., 0.], &[1., 0.]]), 0.5).unwrap();
        assert!(matches!(is_nowhere_flat(&s, 1.0, 1e-9), Err(AffineError::RhoTooSmall { .. })));
        let v = is_nowhere_flat(&s, 1.5, 1e-9).unwrap();
        assert!(!v.nowhere_flat);
        assert_eq!(v.failing_center, Some(0));
    }
}

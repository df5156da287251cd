use super::{sum_rasters, SumsError};
use crate::grid::{
    cube_coverage, dilate, eps_density_margin, rasterize_covering, Cube, GridSet, Point, RasterMode, SampledSet,
    Semantics,
};
use serde::{Deserialize, Serialize};

/// Integer lattices `Z_i = {k e_i : |k| <= l}` for sets normalized so that the
/// independent differences are the standard basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftConstruction {
    pub n: usize,
    /// Largest sup-norm of a point of any set (samples plus density).
    pub delta: f64,
    pub s: u64,
    pub l: u64,
    /// Largest sample density among the sets.
    pub density: f64,
}

impl ShiftConstruction {
    /// Checks `l > s + (n - 1) delta`.
    pub fn with_l(n: usize, delta: f64, s: u64, l: u64, density: f64) -> Result<Self, SumsError> {
        if n == 0 || s == 0 {
            return Err(SumsError::Precondition("n and s must be positive".into()));
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(SumsError::Precondition(format!("bad delta {delta}")));
        }
        let bound = s as f64 + (n - 1) as f64 * delta;
        if !(l as f64 > bound) {
            return Err(SumsError::Precondition(format!("l = {l} does not exceed s + (n-1) delta = {bound}")));
        }
        Ok(ShiftConstruction { n, delta, s, l, density })
    }

    /// `Z_i` as points.
    pub fn lattice(&self, i: usize) -> Vec<Point> {
        let l = self.l as i64;
        (-l..=l)
            .map(|k| {
                let mut c = vec![0.0; self.n];
                c[i] = k as f64;
                Point::new(c)
            })
            .collect()
    }

    /// `Z = Z_1 + ... + Z_n`, in lexicographic order.
    pub fn lattice_sum(&self) -> Vec<Point> {
        let side = 2 * self.l as usize + 1;
        let total = side.pow(self.n as u32);
        (0..total)
            .map(|mut code| {
                let mut c = vec![0.0; self.n];
                for i in (0..self.n).rev() {
                    c[i] = (code % side) as f64 - self.l as f64;
                    code /= side;
                }
                Point::new(c)
            })
            .collect()
    }

    pub fn lattice_size(&self) -> u64 {
        (2 * self.l + 1).pow(self.n as u32)
    }

    /// `(2s / (2l + 1))^n`, a lower bound on the measure of the sum.
    pub fn implied_lower_bound(&self) -> f64 {
        (2.0 * self.s as f64 / (2 * self.l + 1) as f64).powi(self.n as i32)
    }

    /// Raster of `Z_i` (or of `Z` when `axis` is `None`) on spacing `1 / cells_per_unit`.
    fn lattice_raster(&self, axis: Option<usize>, cells_per_unit: i64) -> Result<GridSet, SumsError> {
        let l = self.l as i64;
        let cells: Vec<Vec<i64>> = match axis {
            Some(i) => (-l..=l)
                .map(|k| {
                    let mut c = vec![0; self.n];
                    c[i] = k * cells_per_unit;
                    c
                })
                .collect(),
            None => self
                .lattice_sum()
                .iter()
                .map(|p| p.coords().iter().map(|&x| x as i64 * cells_per_unit).collect())
                .collect(),
        };
        let h = 1.0 / cells_per_unit as f64;
        Ok(GridSet::from_cells(h, &cells, Semantics::Outer { radius: 0.0 })?)
    }
}

/// Builds the construction with the smallest admissible `l` for the given
/// `s`. The sets must already be normalized: each contains the origin (up to
/// its density) and the certificate basis is the standard basis.
pub fn shift_construction(sets: &[SampledSet], s: u64) -> Result<ShiftConstruction, SumsError> {
    let n = sets.len();
    if n == 0 {
        return Err(SumsError::Precondition("no sets".into()));
    }
    if let Some(i) = sets.iter().position(|k| k.dim != n) {
        return Err(SumsError::Precondition(format!("set {i} is not in dimension {n}")));
    }
    for (i, k) in sets.iter().enumerate() {
        let near = k.points.iter().map(|p| p.sup_norm()).fold(f64::INFINITY, f64::min);
        if !(near <= k.density + 1e-12) {
            return Err(SumsError::Precondition(format!("set {i} has no sample within {} of the origin", k.density)));
        }
    }
    let density = sets.iter().map(|k| k.density).fold(0.0, f64::max);
    let delta = sets.iter().map(|k| k.sup_radius()).fold(0.0, f64::max) + density;
    let l = (s as f64 + (n - 1) as f64 * delta).floor() as u64 + 1;
    ShiftConstruction::with_l(n, delta, s, l, density)
}

/// Outcome of checking `[-s, s]^n` against the rasterized `K + Z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringCheck {
    pub h: f64,
    pub covered: bool,
    pub density_margin: f64,
    /// `n (eps + h)`.
    pub slack: f64,
    /// `(2s)^n`.
    pub cube_measure: f64,
    /// Outer measure of `K + Z`.
    pub outer_sum_with_lattice: f64,
    /// Outer measure of `K`.
    pub outer_sum: f64,
    pub lattice_size: u64,
    /// `(2s)^n <= outer(K + Z) <= outer(K) (2l + 1)^n`.
    pub chain_holds: bool,
    pub passed: bool,
}

/// Rasterizes each `K_i + Z_i` at spacing `h`, sums them and tests whether
/// `[-s, s]^n` is covered. `1 / h` must be an integer so the lattices land on
/// cell corners.
pub fn verify_covering(c: &ShiftConstruction, sets: &[SampledSet], h: f64) -> Result<CoveringCheck, SumsError> {
    if sets.len() != c.n || sets.iter().any(|k| k.dim != c.n) {
        return Err(SumsError::Precondition(format!("expected {} sets in dimension {}", c.n, c.n)));
    }
    let per_unit = (1.0 / h).round();
    if !(h > 0.0) || per_unit < 1.0 || (per_unit * h - 1.0).abs() > 1e-9 {
        return Err(SumsError::Precondition(format!("spacing {h} does not divide 1")));
    }
    let per_unit = per_unit as i64;
    let h = 1.0 / per_unit as f64;
    let mut sum: Option<GridSet> = None;
    for (i, k) in sets.iter().enumerate() {
        let raster = rasterize_covering(k, h, RasterMode::SampleCover, 0)?;
        let shifted = dilate(&raster, &c.lattice_raster(Some(i), per_unit)?)?
            .with_semantics(Semantics::SampleCover { density: k.density });
        sum = Some(match sum {
            None => shifted,
            Some(acc) => dilate(&acc, &shifted)?,
        });
    }
    let sum = sum.expect("n >= 1");
    let cube = Cube::new(Point::zeros(c.n), 2.0 * c.s as f64);
    let covered = cube_coverage(&sum, &cube)?;
    let density_margin = eps_density_margin(&sum, &cube)?;
    let slack = c.n as f64 * (c.density + h);

    let outer_k = sum_rasters(sets, h)?.outer;
    let outer_kz = dilate(&outer_k, &c.lattice_raster(None, per_unit)?)?;
    let outer_sum = outer_k.measure_estimate().value;
    let outer_sum_with_lattice = outer_kz.measure_estimate().value;
    let cube_measure = (2.0 * c.s as f64).powi(c.n as i32);
    let lattice_size = c.lattice_size();
    let chain_holds =
        cube_measure <= outer_sum_with_lattice && outer_sum_with_lattice <= outer_sum * lattice_size as f64;
    Ok(CoveringCheck {
        h,
        covered,
        density_margin,
        slack,
        cube_measure,
        outer_sum_with_lattice,
        outer_sum,
        lattice_size,
        chain_holds,
        passed: covered && density_margin <= slack && chain_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{generate, GeneratorSpec};

    fn axis_segment(n: usize, axis: usize, budget: usize) -> SampledSet {
        let mut end = vec![0.0; n];
        end[axis] = 1.0;
        generate(&GeneratorSpec::Segment { start: vec![0.0; n], end, budget }).unwrap().set
    }

    #[test]
    fn documented_parameters() {
        let sets = [axis_segment(2, 0, 201), axis_segment(2, 1, 201)];
        let c = shift_construction(&sets, 1).unwrap();
        assert_eq!(c.l, 3);
        assert_eq!(c.lattice_sum().len(), 49);
        assert_eq!(c.lattice(0).len(), 7);
        let one = shift_construction(&[axis_segment(1, 0, 11)], 2).unwrap();
        assert_eq!(one.l, 3);
        let three = ShiftConstruction::with_l(3, 1.0, 1, 4, 0.0).unwrap();
        assert_eq!(three.lattice_size(), 729);
        assert!(ShiftConstruction::with_l(3, 1.0, 1, 3, 0.0).is_err());
        assert!(ShiftConstruction::with_l(2, 1.0, 1, 1, 0.0).is_err());
    }

    #[test]
    fn origin_required() {
        let pts = vec![Point::new(vec![1.0, 1.0]), Point::new(vec![2.0, 1.0])];
        let k = SampledSet::new(2, pts, 0.1).unwrap();
        assert!(shift_construction(&[k.clone(), k], 1).is_err());
    }

    #[test]
    fn l_shape_covered_at_coarse_spacing() {
        let sets = [axis_segment(2, 0, 201), axis_segment(2, 1, 201)];
        let c = shift_construction(&sets, 1).unwrap();
        let r = verify_covering(&c, &sets, 0.05).unwrap();
        assert!(r.covered && r.chain_holds && r.passed, "{r:?}");
        assert_eq!(r.density_margin, 0.0);
        assert!(r.cube_measure == 4.0);
    }

    #[test]
    fn interval_covering() {
        let sets = [axis_segment(1, 0, 21)];
        let c = shift_construction(&sets, 2).unwrap();
        let r = verify_covering(&c, &sets, 0.1).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn flat_input_is_not_covered() {
        let k = axis_segment(2, 0, 201);
        let sets = [k.clone(), k];
        let c = shift_construction(&sets, 1).unwrap();
        for h in [0.1, 0.05, 0.02] {
            let r = verify_covering(&c, &sets, h).unwrap();
            assert!(!r.covered && !r.passed, "h = {h}");
        }
    }

    #[test]
    fn spacing_must_divide_one() {
        let sets = [axis_segment(1, 0, 21)];
        let c = shift_construction(&sets, 1).unwrap();
        assert!(verify_covering(&c, &sets, 0.3).is_err());
    }
}

use super::SumsError;
use crate::grid::{dilate, erode_cells, GridError, GridSet, Semantics, MAX_CELLS};
use serde::Serialize;

/// Memory guard on the number of halvings.
pub const MAX_MIDPOINT_STEPS: usize = 20;

/// `T_0, T_1, ...` with `T_{j+1} = (T_j + T_j) / 2` on spacing `h / 2^{j+1}`.
#[derive(Clone, Debug, Serialize)]
pub struct MidpointChain {
    #[serde(skip)]
    pub steps: Vec<GridSet>,
    pub spacings: Vec<f64>,
    pub counts: Vec<usize>,
    /// First step whose eroded raster is non-empty.
    pub interior_found_at: Option<usize>,
}

fn halve(s: Semantics) -> Semantics {
    match s {
        Semantics::SampleCover { density } => Semantics::SampleCover { density: density / 2.0 },
        Semantics::Outer { radius } => Semantics::Outer { radius: radius / 2.0 },
        Semantics::Eroded { radius } => Semantics::Eroded { radius: radius / 2.0 },
        Semantics::Inner => Semantics::Inner,
    }
}

/// Erosion depth that discounts the raster's uncertainty: one cell beyond
/// its slack radius, and at least one.
fn interior_depth(t: &GridSet) -> usize {
    let slack = match t.semantics() {
        Semantics::SampleCover { density } => density,
        Semantics::Outer { radius } | Semantics::Eroded { radius } => radius,
        Semantics::Inner => 0.0,
    };
    ((slack / t.spacing()).ceil() as usize + 1).max(1)
}

/// Iterates the midpoint map `k` times.
///
/// Index sums of two cells on spacing `h` land exactly on the half grid, so
/// `T_{j+1}` is the cell sum `T_j (+) T_j` read with spacing halved and the
/// same offsets.
pub fn midpoint_iterate(t: &GridSet, k: usize) -> Result<MidpointChain, SumsError> {
    if k > MAX_MIDPOINT_STEPS {
        return Err(SumsError::Precondition(format!("{k} steps exceed the guard of {MAX_MIDPOINT_STEPS}")));
    }
    let mut steps = vec![t.clone()];
    let mut interior_found_at = None;
    for j in 0..=k {
        if j > 0 {
            let prev = &steps[j - 1];
            let projected: u128 = prev.geometry().extents().iter().map(|&e| (2 * e - 1) as u128).product();
            if projected > MAX_CELLS {
                return Err(GridError::TooLarge { cells: projected, limit: MAX_CELLS }.into());
            }
            let sum = dilate(prev, prev)?;
            let semantics = halve(sum.semantics());
            let next = sum.rescaled(prev.spacing() / 2.0)?.with_semantics(semantics);
            steps.push(next);
        }
        if interior_found_at.is_none() {
            let cur = &steps[j];
            if !erode_cells(cur, interior_depth(cur)).is_empty() {
                interior_found_at = Some(j);
            }
        }
    }
    let spacings = steps.iter().map(|s| s.spacing()).collect();
    let counts = steps.iter().map(|s| s.count()).collect();
    Ok(MidpointChain { steps, spacings, counts, interior_found_at })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::affine_dimension;
    use crate::grid::Point;

    fn cells(h: f64, c: &[Vec<i64>]) -> GridSet {
        GridSet::from_cells(h, c, Semantics::SampleCover { density: 0.0 }).unwrap()
    }

    fn centers(t: &GridSet) -> Vec<Point> {
        let g = t.geometry();
        t.occupied_linear().map(|l| g.cell_center(&g.multi(l))).collect()
    }

    #[test]
    fn two_cells_gain_midpoint() {
        let t = cells(1.0, &[vec![0], vec![1]]);
        let c = midpoint_iterate(&t, 1).unwrap();
        let t1 = &c.steps[1];
        assert_eq!(t1.spacing(), 0.5);
        assert_eq!(t1.occupied_cells(), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn flat_segment_stays_flat() {
        let seg: Vec<Vec<i64>> = (0..8).map(|i| vec![i, 3]).collect();
        let t = cells(0.125, &seg);
        let c = midpoint_iterate(&t, 10).unwrap();
        assert_eq!(c.interior_found_at, None);
        let d0 = affine_dimension(&centers(&c.steps[0]), 1e-9).unwrap().dim;
        for s in &c.steps {
            assert_eq!(affine_dimension(&centers(s), 1e-9).unwrap().dim, d0);
        }
    }

    #[test]
    fn l_shape_gains_interior_after_one_step() {
        let mut l: Vec<Vec<i64>> = (0..10).map(|i| vec![i, 0]).collect();
        l.extend((1..10).map(|j| vec![0, j]));
        let c = midpoint_iterate(&cells(0.1, &l), 3).unwrap();
        assert_eq!(c.interior_found_at, Some(1));
    }

    #[test]
    fn step_guard() {
        let t = cells(1.0, &[vec![0]]);
        assert!(midpoint_iterate(&t, 21).is_err());
    }
}

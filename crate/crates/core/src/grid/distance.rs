use super::{dilate_box, erode_cells, GridError, GridSet, Point};
use serde::{Deserialize, Serialize};

/// Axis-aligned cube in length units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub center: Point,
    pub side: f64,
}

impl Cube {
    pub fn new(center: Point, side: f64) -> Self {
        Cube { center, side }
    }

    pub fn lower(&self) -> Point {
        Point::new(self.center.coords().iter().map(|c| c - self.side / 2.0).collect())
    }

    pub fn upper(&self) -> Point {
        Point::new(self.center.coords().iter().map(|c| c + self.side / 2.0).collect())
    }

    /// Absolute cells whose interior meets the cube: `(lower cell, extents)`.
    /// A degenerate cube selects the cell holding its center.
    pub fn cell_range(&self, h: f64) -> (Vec<i64>, Vec<usize>) {
        let mut lo = Vec::new();
        let mut ext = Vec::new();
        for &c in self.center.coords() {
            let (a, b) = (c - self.side / 2.0, c + self.side / 2.0);
            let first = (a / h).floor() as i64;
            let last = ((b / h).ceil() as i64 - 1).max(first);
            lo.push(first);
            ext.push((last - first + 1) as usize);
        }
        (lo, ext)
    }

    /// Sub-cube shrunk by `d` on every side, if anything is left.
    pub fn shrunk(&self, d: f64) -> Option<Cube> {
        let side = self.side - 2.0 * d;
        (side > 0.0).then(|| Cube { center: self.center.clone(), side })
    }
}

/// Exact sup-norm (chessboard) distance, in cells, from every cell to the
/// nearest occupied cell, by a forward and a backward raster scan over the
/// `3^n - 1` neighborhood. `u32::MAX` marks cells when nothing is occupied.
pub fn chessboard_distance(a: &GridSet) -> Vec<u32> {
    let g = a.geometry();
    let ext = g.extents().to_vec();
    let dim = ext.len();
    let strides = g.strides();
    let total = g.cell_count();
    let mut d: Vec<u32> = (0..total).map(|l| if a.get_linear(l) { 0 } else { u32::MAX }).collect();

    // neighbor offsets split by the sign of their linear delta
    let mut backward_offsets: Vec<Vec<i64>> = Vec::new();
    let count = 3usize.pow(dim as u32);
    for code in 0..count {
        let mut c = code;
        let off: Vec<i64> = (0..dim)
            .map(|_| {
                let v = (c % 3) as i64 - 1;
                c /= 3;
                v
            })
            .collect();
        if let Some(first) = off.iter().find(|&&v| v != 0) {
            if *first < 0 {
                backward_offsets.push(off);
            }
        }
    }
    let deltas: Vec<i64> =
        backward_offsets.iter().map(|o| o.iter().zip(&strides).map(|(v, s)| v * *s as i64).sum()).collect();

    let relax = |d: &mut [u32], lin: usize, idx: &[usize], sign: i64| {
        let interior = idx.iter().zip(&ext).all(|(&i, &e)| i > 0 && i + 1 < e);
        let mut best = d[lin];
        for (o, &delta) in backward_offsets.iter().zip(&deltas) {
            let ok = interior
                || idx.iter().zip(o).zip(&ext).all(|((&i, &v), &e)| {
                    let j = i as i64 + sign * v;
                    j >= 0 && (j as usize) < e
                });
            if ok {
                let nb = d[(lin as i64 + sign * delta) as usize];
                if nb != u32::MAX && nb + 1 < best {
                    best = nb + 1;
                }
            }
        }
        d[lin] = best;
    };

    let mut idx = vec![0usize; dim];
    for lin in 0..total {
        relax(&mut d, lin, &idx, 1);
        increment(&mut idx, &ext);
    }
    let mut idx: Vec<usize> = ext.iter().map(|e| e - 1).collect();
    for lin in (0..total).rev() {
        relax(&mut d, lin, &idx, -1);
        decrement(&mut idx, &ext);
    }
    d
}

fn increment(idx: &mut [usize], ext: &[usize]) {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < ext[k] {
            return;
        }
        idx[k] = 0;
    }
}

fn decrement(idx: &mut [usize], ext: &[usize]) {
    for k in (0..idx.len()).rev() {
        if idx[k] > 0 {
            idx[k] -= 1;
            return;
        }
        idx[k] = ext[k] - 1;
    }
}

fn check_inside(a: &GridSet, lo: &[i64], ext: &[usize]) -> Result<(), GridError> {
    let g = a.geometry();
    let inside = lo
        .iter()
        .zip(ext)
        .zip(g.offset().iter().zip(g.extents()))
        .all(|((&l, &e), (&o, &ge))| l >= o && l + e as i64 <= o + ge as i64);
    if inside {
        Ok(())
    } else {
        Err(GridError::InvalidGeometry("cube extends beyond the grid".into()))
    }
}

/// Largest sup-norm distance (length units) from a cell meeting the cube to
/// the nearest occupied cell; `0` means the cube is fully covered and
/// `f64::INFINITY` means nothing is occupied.
pub fn eps_density_margin(a: &GridSet, cube: &Cube) -> Result<f64, GridError> {
    let h = a.spacing();
    let (lo, ext) = cube.cell_range(h);
    if cube.center.dim() != a.dim() {
        return Err(GridError::IncompatibleGeometry("cube dimension".into()));
    }
    check_inside(a, &lo, &ext)?;
    if a.is_empty() {
        return Ok(f64::INFINITY);
    }
    let g = a.geometry();
    let full = g.extents().iter().copied().max().unwrap_or(1);
    // grow a window around the cube until every distance found is certified
    let mut w = ext.iter().copied().max().unwrap_or(1).max(8);
    loop {
        let clo: Vec<i64> = lo.iter().map(|l| l - w as i64).collect();
        let cext: Vec<usize> = ext.iter().map(|e| e + 2 * w).collect();
        let crop = a.crop(&clo, &cext)?;
        let d = chessboard_distance(&crop);
        let mut worst = 0u32;
        let mut idx = vec![0usize; ext.len()];
        for _ in 0..ext.iter().product::<usize>() {
            let local: Vec<usize> = idx.iter().map(|i| i + w).collect();
            worst = worst.max(d[crop.geometry().linear(&local)]);
            increment(&mut idx, &ext);
        }
        if (worst as usize) <= w || w >= full {
            return Ok(if worst == u32::MAX { f64::INFINITY } else { worst as f64 * h });
        }
        w *= 2;
    }
}

/// True iff every cell whose interior meets the cube is occupied.
pub fn cube_coverage(a: &GridSet, cube: &Cube) -> Result<bool, GridError> {
    let (lo, ext) = cube.cell_range(a.spacing());
    check_inside(a, &lo, &ext)?;
    let mut idx = vec![0usize; ext.len()];
    for _ in 0..ext.iter().product::<usize>() {
        let abs: Vec<i64> = idx.iter().zip(&lo).map(|(&i, &l)| l + i as i64).collect();
        if !a.contains_abs(&abs) {
            return Ok(false);
        }
        increment(&mut idx, &ext);
    }
    Ok(true)
}

/// Result of a cube search: the cube of cells `center ± half_width`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeHit {
    pub center_cell: Vec<i64>,
    pub half_width: usize,
    pub cube: Cube,
}

/// Largest cube of cells lying within `threshold` cells of occupied cells.
///
/// Binary search over the half-width; each probe erodes the thresholded mask.
/// The center is the first surviving cell in lexicographic order. The search
/// may be restricted to a sub-box `(lower cell, extents)`.
pub fn largest_cube(
    a: &GridSet,
    threshold: usize,
    region: Option<(&[i64], &[usize])>,
) -> Result<Option<CubeHit>, GridError> {
    if a.is_empty() {
        return Ok(None);
    }
    let t = threshold as i64;
    let g = a.geometry();
    let mask = match region {
        Some((lo, ext)) => {
            // only cells within `t` of the region can reach it
            let wlo: Vec<i64> = lo.iter().map(|l| l - t).collect();
            let wext: Vec<usize> = ext.iter().map(|e| e + 2 * threshold).collect();
            let window = a.crop(&wlo, &wext)?;
            dilate_box(&window, &vec![-t; a.dim()], &vec![t; a.dim()])?.crop(lo, ext)?
        }
        None => dilate_box(a, &vec![-t; a.dim()], &vec![t; a.dim()])?.crop(g.offset(), g.extents())?,
    };
    if mask.is_empty() {
        return Ok(None);
    }
    let (mut good, mut bad) = (0usize, mask.geometry().extents().iter().copied().min().unwrap() / 2 + 1);
    while bad - good > 1 {
        let mid = (good + bad) / 2;
        if erode_cells(&mask, mid).is_empty() {
            bad = mid;
        } else {
            good = mid;
        }
    }
    let eroded = erode_cells(&mask, good);
    let lin = eroded.occupied_linear().next().expect("probe was non-empty");
    let mg = mask.geometry();
    let center_cell = mg.absolute(&mg.multi(lin));
    let h = a.spacing();
    let center = Point::new(center_cell.iter().map(|&c| (c as f64 + 0.5) * h).collect());
    let cube = Cube::new(center, (2 * good + 1) as f64 * h);
    Ok(Some(CubeHit { center_cell, half_width: good, cube }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Semantics;

    fn brute_distance(a: &GridSet) -> Vec<u32> {
        let g = a.geometry();
        let occ: Vec<Vec<usize>> = a.occupied_linear().map(|l| g.multi(l)).collect();
        (0..g.cell_count())
            .map(|l| {
                let x = g.multi(l);
                occ.iter()
                    .map(|y| x.iter().zip(y).map(|(&p, &q)| (p as i64 - q as i64).unsigned_abs() as u32).max().unwrap())
                    .min()
                    .unwrap_or(u32::MAX)
            })
            .collect()
    }

    fn pseudo_random_set(ext: &[usize], seed: u64, keep_one_in: u64) -> GridSet {
        let g = crate::grid::GridGeometry::new(1.0, vec![0; ext.len()], ext.to_vec()).unwrap();
        let mut s = GridSet::empty(g, Semantics::Inner).unwrap();
        let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        for lin in 0..s.geometry().cell_count() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            if (x >> 33).is_multiple_of(keep_one_in) {
                s.set_linear(lin, true);
            }
        }
        s
    }

    #[test]
    fn two_pass_is_exact_in_2d_and_3d() {
        for seed in 0..20 {
            let a = pseudo_random_set(&[9, 13], seed, 17);
            assert_eq!(chessboard_distance(&a), brute_distance(&a), "2d seed {seed}");
            let b = pseudo_random_set(&[5, 6, 7], seed, 29);
            assert_eq!(chessboard_distance(&b), brute_distance(&b), "3d seed {seed}");
        }
        let c = pseudo_random_set(&[40], 3, 9);
        assert_eq!(chessboard_distance(&c), brute_distance(&c));
    }

    fn full(n: i64, hole: Option<(i64, i64)>) -> GridSet {
        let c: Vec<Vec<i64>> =
            (0..n).flat_map(|i| (0..n).map(move |j| vec![i, j])).filter(|c| Some((c[0], c[1])) != hole).collect();
        GridSet::from_cells(1.0, &c, Semantics::Inner).unwrap()
    }

    #[test]
    fn margins() {
        let cube = Cube::new(Point::new(vec![2.5, 2.5]), 3.0);
        assert_eq!(eps_density_margin(&full(5, None), &cube).unwrap(), 0.0);
        assert_eq!(eps_density_margin(&full(5, Some((2, 2))), &cube).unwrap(), 1.0);
        let checker: Vec<Vec<i64>> =
            (0..8).flat_map(|i| (0..8).map(move |j| vec![i, j])).filter(|c| (c[0] + c[1]) % 2 == 0).collect();
        let h = 0.25;
        let cb = GridSet::from_cells(h, &checker, Semantics::Inner).unwrap();
        let cube = Cube::new(Point::new(vec![1.0, 1.0]), 1.0);
        assert_eq!(eps_density_margin(&cb, &cube).unwrap(), h);
        let outside = Cube::new(Point::new(vec![10.0, 10.0]), 1.0);
        assert!(eps_density_margin(&cb, &outside).is_err());
    }

    #[test]
    fn far_gaps_need_a_wider_window() {
        // one occupied cell far from an empty cube region
        let mut c = vec![vec![0, 0], vec![59, 59]];
        c.push(vec![59, 0]);
        let a = GridSet::from_cells(1.0, &c, Semantics::Inner).unwrap();
        let cube = Cube::new(Point::new(vec![30.5, 30.5]), 1.0);
        let m = eps_density_margin(&a, &cube).unwrap();
        assert_eq!(m, 29.0);
    }

    #[test]
    fn coverage() {
        let cube = Cube::new(Point::new(vec![2.5, 2.5]), 3.0);
        assert!(cube_coverage(&full(5, None), &cube).unwrap());
        assert!(!cube_coverage(&full(5, Some((3, 1))), &cube).unwrap());
    }

    #[test]
    fn cube_search_finds_the_square() {
        let a = full(9, None);
        let hit = largest_cube(&a, 0, None).unwrap().unwrap();
        assert_eq!(hit.half_width, 4);
        assert_eq!(hit.center_cell, vec![4, 4]);
        assert_eq!(hit.cube.side, 9.0);
        // a thin line only yields a degenerate cube at threshold 0
        let line: Vec<Vec<i64>> = (0..20).map(|i| vec![i, 0]).collect();
        let l = GridSet::from_cells(1.0, &line, Semantics::Inner).unwrap();
        assert_eq!(largest_cube(&l, 0, None).unwrap().unwrap().half_width, 0);
    }
}

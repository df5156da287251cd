use super::{GridError, GridGeometry, GridSet};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Product of occupied counts below which convolution values stay exact in `f64`.
pub const FFT_EXACT_LIMIT: u128 = 1 << 52;

/// Naive cost (pairs of occupied cells) above which [`dilate`] tries the FFT path.
const NAIVE_PAIR_BUDGET: u128 = 50_000_000;
/// Largest padded FFT volume [`dilate`] is willing to allocate.
const FFT_CELL_BUDGET: u128 = 1 << 24;

fn sum_geometry(a: &GridSet, b: &GridSet) -> Result<GridGeometry, GridError> {
    a.geometry().same_spacing(b.geometry())?;
    let ga = a.geometry();
    let gb = b.geometry();
    let offset = ga.offset().iter().zip(gb.offset()).map(|(x, y)| x + y).collect();
    let extents = ga.extents().iter().zip(gb.extents()).map(|(x, y)| x + y - 1).collect();
    GridGeometry::new(ga.spacing(), offset, extents)
}

/// Maps a linear index of `source` to the linear index of the same local
/// multi-index in a box with row-major `strides`.
pub(crate) fn linear_in(strides: &[usize], source: &GridGeometry, mut lin: usize) -> usize {
    let ext = source.extents();
    let mut out = 0;
    for k in (0..ext.len()).rev() {
        out += (lin % ext[k]) * strides[k];
        lin /= ext[k];
    }
    out
}

/// Minkowski sum by a double loop over occupied cells.
pub fn dilate_naive(a: &GridSet, b: &GridSet) -> Result<GridSet, GridError> {
    let geometry = sum_geometry(a, b)?;
    let semantics = a.semantics().combine(b.semantics(), geometry.spacing());
    let mut out = GridSet::empty(geometry, semantics)?;
    let strides = out.geometry().strides();
    let la: Vec<usize> = a.occupied_linear().map(|l| linear_in(&strides, a.geometry(), l)).collect();
    let lb: Vec<usize> = b.occupied_linear().map(|l| linear_in(&strides, b.geometry(), l)).collect();
    let bits = &mut out.occupancy;
    for &i in &la {
        for &j in &lb {
            bits.set(i + j, true);
        }
    }
    Ok(out)
}

fn next_fast_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// In-place n-dimensional FFT over a row-major buffer.
fn fft_nd(buf: &mut [Complex<f64>], dims: &[usize], planner: &mut FftPlanner<f64>, inverse: bool) {
    let total: usize = dims.iter().product();
    let mut stride = total;
    for &len in dims {
        stride /= len;
        if len == 1 {
            continue;
        }
        let fft = if inverse { planner.plan_fft_inverse(len) } else { planner.plan_fft_forward(len) };
        let mut line = vec![Complex::new(0.0, 0.0); len];
        let block = stride * len;
        for base in (0..total).step_by(block) {
            for inner in 0..stride {
                let start = base + inner;
                for (t, v) in line.iter_mut().enumerate() {
                    *v = buf[start + t * stride];
                }
                fft.process(&mut line);
                for (t, v) in line.iter().enumerate() {
                    buf[start + t * stride] = *v;
                }
            }
        }
    }
}

/// Minkowski sum via FFT convolution of the 0/1 occupancy arrays.
///
/// The result is occupied where the rounded convolution is at least one.
/// Fails with [`GridError::Precision`] when `|a| * |b|` reaches
/// [`FFT_EXACT_LIMIT`]; callers then fall back to [`dilate_naive`].
pub fn dilate_fft(a: &GridSet, b: &GridSet) -> Result<GridSet, GridError> {
    let geometry = sum_geometry(a, b)?;
    let semantics = a.semantics().combine(b.semantics(), geometry.spacing());
    let (ca, cb) = (a.count(), b.count());
    if ca as u128 * cb as u128 >= FFT_EXACT_LIMIT {
        return Err(GridError::Precision { a: ca, b: cb });
    }
    let mut out = GridSet::empty(geometry, semantics)?;
    if ca == 0 || cb == 0 {
        return Ok(out);
    }
    let dims: Vec<usize> = out.geometry().extents().iter().map(|&e| next_fast_len(e)).collect();
    let total: usize = dims.iter().product();
    let padded = GridGeometry::new(out.spacing(), out.geometry().offset().to_vec(), dims.clone())?;
    let pstrides = padded.strides();
    let load = |s: &GridSet| {
        let mut buf = vec![Complex::new(0.0, 0.0); total];
        for lin in s.occupied_linear() {
            buf[linear_in(&pstrides, s.geometry(), lin)] = Complex::new(1.0, 0.0);
        }
        buf
    };
    let mut planner = FftPlanner::new();
    let mut fa = load(a);
    let mut fb = load(b);
    fft_nd(&mut fa, &dims, &mut planner, false);
    fft_nd(&mut fb, &dims, &mut planner, false);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    fft_nd(&mut fa, &dims, &mut planner, true);
    let scale = 1.0 / total as f64;
    let og = out.geometry().clone();
    for lin in 0..og.cell_count() {
        let p = linear_in(&pstrides, &og, lin);
        if (fa[p].re * scale).round() >= 1.0 {
            out.occupancy.set(lin, true);
        }
    }
    Ok(out)
}

/// Minkowski sum choosing the cheaper exact route.
pub fn dilate(a: &GridSet, b: &GridSet) -> Result<GridSet, GridError> {
    let pairs = a.count() as u128 * b.count() as u128;
    if pairs > NAIVE_PAIR_BUDGET {
        let geometry = sum_geometry(a, b)?;
        let padded: u128 = geometry.extents().iter().map(|&e| next_fast_len(e) as u128).product();
        if padded <= FFT_CELL_BUDGET {
            match dilate_fft(a, b) {
                Err(GridError::Precision { .. }) => {}
                other => return other,
            }
        }
    }
    dilate_naive(a, b)
}

/// `a (+) ... (+) a` with `n` copies, by binary decomposition.
pub fn nfold_sum(a: &GridSet, n: usize) -> Result<GridSet, GridError> {
    if n == 0 {
        return Err(GridError::InvalidGeometry("n-fold sum needs n >= 1".into()));
    }
    let mut acc: Option<GridSet> = None;
    let mut base = a.clone();
    let mut k = n;
    loop {
        if k & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(x) => dilate(&x, &base)?,
            });
        }
        k >>= 1;
        if k == 0 {
            break;
        }
        base = dilate(&base, &base)?;
    }
    Ok(acc.expect("n >= 1"))
}

/// Visits every axis-aligned line of a row-major box along `axis`,
/// passing the linear index of its first cell and its stride.
pub(crate) fn for_each_line(extents: &[usize], axis: usize, mut f: impl FnMut(usize, usize)) {
    let total: usize = extents.iter().product();
    let stride: usize = extents[axis + 1..].iter().product();
    let block = stride * extents[axis];
    for base in (0..total).step_by(block) {
        for inner in 0..stride {
            f(base + inner, stride);
        }
    }
}

/// Sum with the box `[lo, hi]` of cell offsets (per axis), computed separably.
pub fn dilate_box(a: &GridSet, lo: &[i64], hi: &[i64]) -> Result<GridSet, GridError> {
    let g = a.geometry();
    if lo.len() != g.dim() || hi.len() != g.dim() || lo.iter().zip(hi).any(|(l, h)| l > h) {
        return Err(GridError::InvalidGeometry("bad box bounds".into()));
    }
    let offset = g.offset().iter().zip(lo).map(|(o, l)| o + l).collect();
    let extents: Vec<usize> =
        g.extents().iter().zip(lo.iter().zip(hi)).map(|(&e, (l, h))| e + (h - l) as usize).collect();
    let geometry = GridGeometry::new(g.spacing(), offset, extents.clone())?;
    let mut out = GridSet::empty(geometry, a.semantics())?;
    let strides = out.geometry().strides();
    for lin in a.occupied_linear() {
        let p = linear_in(&strides, g, lin);
        out.occupancy.set(p, true);
    }
    let mut line: Vec<bool> = Vec::new();
    for axis in 0..g.dim() {
        let w = (hi[axis] - lo[axis]) as usize;
        if w == 0 {
            continue;
        }
        let len = extents[axis];
        let bits = &mut out.occupancy;
        for_each_line(&extents, axis, |start, stride| {
            line.clear();
            line.extend((0..len).map(|t| bits[start + t * stride]));
            let mut last: Option<usize> = None;
            for (t, &v) in line.iter().enumerate() {
                if v {
                    last = Some(t);
                }
                let on = last.is_some_and(|l| t - l <= w);
                if on != v {
                    bits.set(start + t * stride, on);
                }
            }
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Semantics;

    fn cells1(xs: &[i64]) -> GridSet {
        let c: Vec<Vec<i64>> = xs.iter().map(|&x| vec![x]).collect();
        GridSet::from_cells(1.0, &c, Semantics::Inner).unwrap()
    }

    fn brute(a: &GridSet, b: &GridSet) -> Vec<Vec<i64>> {
        let mut v: Vec<Vec<i64>> = Vec::new();
        for x in a.occupied_cells() {
            for y in b.occupied_cells() {
                v.push(x.iter().zip(&y).map(|(p, q)| p + q).collect());
            }
        }
        v.sort();
        v.dedup();
        v
    }

    fn sorted(mut v: Vec<Vec<i64>>) -> Vec<Vec<i64>> {
        v.sort();
        v
    }

    #[test]
    fn singleton_identity() {
        let z = cells1(&[0]);
        assert_eq!(dilate_naive(&z, &z).unwrap().occupied_cells(), vec![vec![0]]);
    }

    #[test]
    fn interval_sum() {
        let a = cells1(&[0, 1]);
        assert_eq!(dilate_naive(&a, &a).unwrap().occupied_cells(), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(nfold_sum(&a, 3).unwrap().occupied_cells().len(), 4);
        assert_eq!(nfold_sum(&a, 1).unwrap(), a);
    }

    #[test]
    fn l_shape_sum_matches_double_loop() {
        let mut c = Vec::new();
        for i in 0..10 {
            c.push(vec![i, 0]);
            c.push(vec![0, i]);
        }
        c.sort();
        c.dedup();
        let l = GridSet::from_cells(1.0, &c, Semantics::Inner).unwrap();
        let s = dilate_naive(&l, &l).unwrap();
        let expect = brute(&l, &l);
        assert_eq!(s.count(), expect.len());
        assert_eq!(sorted(s.occupied_cells()), expect);
        assert_eq!(dilate_fft(&l, &l).unwrap().occupied_cells(), s.occupied_cells());
    }

    #[test]
    fn fft_edge_cases() {
        let sq: Vec<Vec<i64>> = (0..8).flat_map(|i| (0..8).map(move |j| vec![i, j])).collect();
        let a = GridSet::from_cells(1.0, &sq, Semantics::Inner).unwrap();
        let s = dilate_fft(&a, &a).unwrap();
        assert_eq!(s.count(), 225);
        assert_eq!(s.geometry().extents(), &[15, 15]);
        let g = GridGeometry::new(1.0, vec![0, 0], vec![4, 4]).unwrap();
        let e = GridSet::empty(g, Semantics::Inner).unwrap();
        assert!(dilate_fft(&e, &a).unwrap().is_empty());
    }

    #[test]
    fn semantics_ledger() {
        let h = 0.5;
        let a = GridSet::from_cells(h, &[vec![0]], Semantics::SampleCover { density: 0.1 }).unwrap();
        let b = GridSet::from_cells(h, &[vec![0]], Semantics::SampleCover { density: 0.2 }).unwrap();
        match dilate_naive(&a, &b).unwrap().semantics() {
            Semantics::SampleCover { density } => assert!((density - 0.8).abs() < 1e-12),
            s => panic!("{s:?}"),
        }
        let o = a.clone().with_semantics(Semantics::Outer { radius: 0.25 });
        assert_eq!(dilate_naive(&o, &o).unwrap().semantics(), Semantics::Outer { radius: 1.0 });
    }

    #[test]
    fn spacing_mismatch_rejected() {
        let a = cells1(&[0]);
        let b = GridSet::from_cells(0.5, &[vec![0]], Semantics::Inner).unwrap();
        assert!(matches!(dilate_naive(&a, &b), Err(GridError::IncompatibleGeometry(_))));
    }

    #[test]
    fn box_dilation_matches_naive() {
        let a = GridSet::from_cells(1.0, &[vec![0, 0], vec![3, 1], vec![5, -2]], Semantics::Inner).unwrap();
        let bx: Vec<Vec<i64>> = (-1..=2).flat_map(|i| (0..=1).map(move |j| vec![i, j])).collect();
        let b = GridSet::from_cells(1.0, &bx, Semantics::Inner).unwrap();
        let via_box = dilate_box(&a, &[-1, 0], &[2, 1]).unwrap();
        assert_eq!(sorted(via_box.occupied_cells()), brute(&a, &b));
    }

    #[test]
    fn fast_lengths() {
        assert_eq!(next_fast_len(7), 8);
        assert_eq!(next_fast_len(11), 12);
        assert_eq!(next_fast_len(127), 128);
    }
}

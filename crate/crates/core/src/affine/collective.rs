use super::{parallelotope_volume, patch, AffineError, Echelon};
use crate::grid::{Point, SampledSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Tuples of patch centers examined by [`collectively_nowhere_flat`].
pub const MAX_TUPLES: usize = 10_000;
/// Pair budget per set for the exhaustive fallback.
pub const MAX_PAIRS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "plan", rename_all = "snake_case")]
pub enum PatchPlan {
    /// Full Cartesian product of patch centers.
    Exhaustive { tuples: usize },
    /// Uniform seeded sample of center tuples.
    Sampled { tuples: usize, seed: u64 },
}

/// Witness basis for one tuple of patches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatchWitness {
    pub centers: Vec<usize>,
    /// `(a_i, b_i)` sample indices in set `i`.
    pub pairs: Vec<(usize, usize)>,
    pub basis: Vec<Point>,
    pub det_abs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollectiveCertificate {
    pub rho: f64,
    pub tol: f64,
    pub plan: PatchPlan,
    pub verdict: bool,
    /// Witness with the smallest determinant among checked tuples.
    pub weakest: Option<PatchWitness>,
    /// First tuple (in plan order) where no basis was found.
    pub failing_tuple: Option<Vec<usize>>,
}

/// Greedy choice of one difference per set, visiting sets in `order`.
/// Candidates per set are `(a, b)` index pairs; ties go to the earliest pair.
fn greedy(
    sets: &[SampledSet],
    candidates: &[Vec<(usize, usize)>],
    order: &[usize],
    tol: f64,
) -> Option<Vec<(usize, usize)>> {
    let n = sets.len();
    let mut ech = Echelon::default();
    let mut chosen = vec![(0, 0); n];
    for &i in order {
        let mut best: Option<(f64, usize, Vec<f64>, usize)> = None;
        for (k, &(a, b)) in candidates[i].iter().enumerate() {
            let d = sets[i].points[b].sub(&sets[i].points[a]);
            let r = ech.reduce(d.coords());
            let (m, col) = Echelon::pivot(&r);
            if best.as_ref().is_none_or(|x| m > x.0) {
                best = Some((m, k, r, col));
            }
        }
        let (m, k, r, col) = best?;
        if m <= tol {
            return None;
        }
        ech.push(r, col);
        chosen[i] = candidates[i][k];
    }
    debug_assert_eq!(ech.len(), n);
    Some(chosen)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

fn witness_for(sets: &[SampledSet], patches: &[&Vec<usize>], centers: &[usize], tol: f64) -> Option<PatchWitness> {
    let n = sets.len();
    let identity: Vec<usize> = (0..n).collect();
    let star: Vec<Vec<(usize, usize)>> =
        (0..n).map(|i| patches[i].iter().map(|&b| (centers[i], b)).collect()).collect();
    let build = |pairs: Vec<(usize, usize)>| {
        let basis: Vec<Point> =
            pairs.iter().enumerate().map(|(i, &(a, b))| sets[i].points[b].sub(&sets[i].points[a])).collect();
        let det_abs = parallelotope_volume(&basis);
        (det_abs > tol).then(|| PatchWitness { centers: centers.to_vec(), pairs, basis, det_abs })
    };
    if let Some(w) = greedy(sets, &star, &identity, tol).and_then(build) {
        return Some(w);
    }
    // exhaustive fallback: all pairs inside each patch, every set order
    let all: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|i| {
            let p = patches[i];
            let mut v = Vec::new();
            'outer: for (x, &a) in p.iter().enumerate() {
                for &b in &p[x + 1..] {
                    if v.len() >= MAX_PAIRS {
                        break 'outer;
                    }
                    v.push((a, b));
                }
            }
            v
        })
        .collect();
    permutations(n).into_iter().find_map(|order| greedy(sets, &all, &order, tol).and_then(build))
}

/// Picks one sample per set so that the differences to each set's first
/// sample form a basis with pivots above `tol`. Returns the chosen indices.
///
/// Greedy per set (largest residual pivot), trying set orders until one
/// succeeds; all orders are tried for up to six sets.
pub fn transversal_basis(sets: &[SampledSet], tol: f64) -> Option<Vec<usize>> {
    let n = sets.first()?.dim;
    if sets.len() != n || sets.iter().any(|s| s.dim != n || s.is_empty()) {
        return None;
    }
    let candidates: Vec<Vec<(usize, usize)>> = sets.iter().map(|s| (0..s.len()).map(|b| (0, b)).collect()).collect();
    let orders = if n <= 6 { permutations(n) } else { vec![(0..n).collect()] };
    orders
        .into_iter()
        .find_map(|order| greedy(sets, &candidates, &order, tol))
        .map(|pairs| pairs.into_iter().map(|(_, b)| b).collect())
}

/// Searches every patch tuple for differences `b_i - a_i` (from set `i`'s
/// patch) forming a basis with `|det| > tol`.
///
/// Patches are sup-norm balls of radius `rho` around samples. The plan is the
/// full product of centers when it has at most [`MAX_TUPLES`] tuples and a
/// `seed`ed uniform sample of that many tuples otherwise.
pub fn collectively_nowhere_flat(
    sets: &[SampledSet],
    rho: f64,
    tol: f64,
    seed: u64,
) -> Result<CollectiveCertificate, AffineError> {
    let n = sets.first().ok_or(AffineError::Empty)?.dim;
    if sets.len() != n {
        return Err(AffineError::SetCount { expected: n, got: sets.len() });
    }
    if sets.iter().any(|s| s.dim != n) {
        return Err(AffineError::DimensionMismatch);
    }
    if sets.iter().any(|s| s.is_empty()) {
        return Err(AffineError::Empty);
    }
    if !(tol > 0.0) {
        return Err(AffineError::BadTolerance(tol));
    }
    if let Some(s) = sets.iter().find(|s| !(rho > 2.0 * s.density)) {
        return Err(AffineError::RhoTooSmall { rho, density: s.density });
    }
    let sizes: Vec<usize> = sets.iter().map(|s| s.len()).collect();
    let product = sizes.iter().try_fold(1usize, |acc, &m| acc.checked_mul(m));
    let (plan, tuples): (PatchPlan, Vec<Vec<usize>>) = match product {
        Some(p) if p <= MAX_TUPLES => {
            let tuples = (0..p)
                .map(|mut code| {
                    let mut t = vec![0; n];
                    for i in (0..n).rev() {
                        t[i] = code % sizes[i];
                        code /= sizes[i];
                    }
                    t
                })
                .collect();
            (PatchPlan::Exhaustive { tuples: p }, tuples)
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tuples = (0..MAX_TUPLES).map(|_| sizes.iter().map(|&m| rng.gen_range(0..m)).collect()).collect();
            (PatchPlan::Sampled { tuples: MAX_TUPLES, seed }, tuples)
        }
    };
    let patch_lists: Vec<Vec<Vec<usize>>> =
        sets.iter().map(|s| (0..s.len()).into_par_iter().map(|c| patch(s, c, rho)).collect()).collect();
    let results: Vec<Option<PatchWitness>> = tuples
        .par_iter()
        .map(|t| {
            let patches: Vec<&Vec<usize>> = (0..n).map(|i| &patch_lists[i][t[i]]).collect();
            witness_for(sets, &patches, t, tol)
        })
        .collect();
    let failing = results.iter().position(|w| w.is_none());
    let weakest = results.into_iter().flatten().fold(None::<PatchWitness>, |acc, w| match acc {
        Some(a) if a.det_abs <= w.det_abs => Some(a),
        _ => Some(w),
    });
    Ok(CollectiveCertificate {
        rho,
        tol,
        plan,
        verdict: failing.is_none(),
        weakest,
        failing_tuple: failing.map(|i| tuples[i].clone()),
    })
}

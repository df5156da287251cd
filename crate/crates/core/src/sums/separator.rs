use super::{ShiftConstruction, SumsError};
use crate::grid::{cell_coord, is_grid_continuum, rasterize_covering, GridSet, Point, RasterMode, SampledSet};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, VecDeque};

/// Cap on the number of product vertices.
pub const MAX_PRODUCT: usize = 4_000_000;

/// A connected set of grid cells under face adjacency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorGraph {
    /// Absolute cell indices, sorted.
    pub cells: Vec<Vec<i64>>,
    #[serde(skip)]
    neighbors: Vec<Vec<usize>>,
}

impl FactorGraph {
    pub fn from_cells(mut cells: Vec<Vec<i64>>) -> Result<Self, SumsError> {
        cells.sort();
        cells.dedup();
        if cells.is_empty() {
            return Err(SumsError::Precondition("empty factor".into()));
        }
        let index: HashMap<&[i64], usize> = cells.iter().enumerate().map(|(i, c)| (c.as_slice(), i)).collect();
        let mut neighbors = vec![Vec::new(); cells.len()];
        let mut probe = Vec::new();
        for (i, c) in cells.iter().enumerate() {
            for axis in 0..c.len() {
                for step in [-1, 1] {
                    probe.clear();
                    probe.extend_from_slice(c);
                    probe[axis] += step;
                    if let Some(&j) = index.get(probe.as_slice()) {
                        neighbors[i].push(j);
                    }
                }
            }
            neighbors[i].sort_unstable();
        }
        let g = FactorGraph { cells, neighbors };
        if g.distances(&[0]).iter().any(|d| d.is_none()) {
            return Err(SumsError::Precondition("factor is not connected".into()));
        }
        Ok(g)
    }

    pub fn from_grid(a: &GridSet) -> Result<Self, SumsError> {
        Self::from_cells(a.occupied_cells())
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    fn rebuild(&mut self) -> Result<(), SumsError> {
        *self = Self::from_cells(std::mem::take(&mut self.cells))?;
        Ok(())
    }

    /// Graph distance from `sources` to every cell.
    fn distances(&self, sources: &[usize]) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap() + 1;
            for &w in &self.neighbors[v] {
                if dist[w].is_none() {
                    dist[w] = Some(d);
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

/// Product of factor graphs with faces `F_k^- = {t : t_k in minus_k}`,
/// `F_k^+ = {t : t_k in plus_k}` and candidate separators `S_k`.
///
/// Vertices are tuples of factor cell ordinals, numbered in mixed radix with
/// the last factor fastest. Two tuples are adjacent when every coordinate is
/// equal or adjacent in its factor (the strong product).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparatorInstance {
    pub factors: Vec<FactorGraph>,
    pub faces: Vec<(Vec<usize>, Vec<usize>)>,
    /// Sorted vertex numbers of each `S_k`.
    pub separators: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Point>,
}

impl SeparatorInstance {
    pub fn new(
        factors: Vec<FactorGraph>,
        faces: Vec<(Vec<usize>, Vec<usize>)>,
        separators: Vec<Vec<usize>>,
    ) -> Result<Self, SumsError> {
        let n = factors.len();
        if n == 0 || faces.len() != n || separators.len() != n {
            return Err(SumsError::Precondition("need one face pair and one separator per factor".into()));
        }
        let size = product_size(&factors)?;
        for (k, (minus, plus)) in faces.iter().enumerate() {
            if minus.is_empty() || plus.is_empty() || minus.iter().chain(plus).any(|&c| c >= factors[k].len()) {
                return Err(SumsError::InvalidInstance { axis: k, reason: "bad face cells".into() });
            }
        }
        let mut separators = separators;
        for (k, s) in separators.iter_mut().enumerate() {
            s.sort_unstable();
            s.dedup();
            if s.last().is_some_and(|&v| v >= size) {
                return Err(SumsError::InvalidInstance { axis: k, reason: "separator vertex out of range".into() });
            }
        }
        Ok(SeparatorInstance { factors, faces, separators, target: None })
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.factors.iter().map(|f| f.len()).product()
    }

    fn radices(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.len()).collect()
    }

    pub fn tuple(&self, mut v: usize) -> Vec<usize> {
        let r = self.radices();
        let mut t = vec![0; r.len()];
        for i in (0..r.len()).rev() {
            t[i] = v % r[i];
            v /= r[i];
        }
        t
    }

    pub fn vertex(&self, t: &[usize]) -> usize {
        t.iter().zip(self.radices()).fold(0, |acc, (&x, r)| acc * r + x)
    }

    /// Restores adjacency lists after deserialization.
    pub fn rebuild(&mut self) -> Result<(), SumsError> {
        for f in &mut self.factors {
            f.rebuild()?;
        }
        Ok(())
    }

    fn for_each_neighbor(&self, v: usize, mut f: impl FnMut(usize)) {
        let t = self.tuple(v);
        let options: Vec<Vec<usize>> = t
            .iter()
            .zip(&self.factors)
            .map(|(&x, g)| std::iter::once(x).chain(g.neighbors[x].iter().copied()).collect())
            .collect();
        let mut pick = vec![0usize; t.len()];
        loop {
            // odometer over the choices, skipping the all-self tuple
            let mut i = t.len();
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                pick[i] += 1;
                if pick[i] < options[i].len() {
                    break;
                }
                pick[i] = 0;
            }
            let w = pick.iter().zip(&options).zip(self.radices()).fold(0, |acc, ((&p, o), r)| acc * r + o[p]);
            f(w);
        }
    }

    fn face_mask(&self, k: usize, plus: bool) -> Vec<bool> {
        let (m, p) = &self.faces[k];
        let cells = if plus { p } else { m };
        let mut in_face = vec![false; self.factors[k].len()];
        for &c in cells {
            in_face[c] = true;
        }
        (0..self.vertex_count()).map(|v| in_face[self.tuple(v)[k]]).collect()
    }

    /// Checks that `S_k` avoids both faces and meets every path between them.
    pub fn validate_separator(&self, k: usize) -> Result<(), SumsError> {
        let minus = self.face_mask(k, false);
        let plus = self.face_mask(k, true);
        let mut blocked = vec![false; self.vertex_count()];
        for &v in &self.separators[k] {
            if minus[v] || plus[v] {
                return Err(SumsError::InvalidInstance {
                    axis: k,
                    reason: format!("separator meets a face at {:?}", self.tuple(v)),
                });
            }
            blocked[v] = true;
        }
        if let Some(v) = (0..minus.len()).find(|&v| minus[v] && plus[v]) {
            return Err(SumsError::InvalidInstance {
                axis: k,
                reason: format!("faces overlap at {:?}", self.tuple(v)),
            });
        }
        let mut seen = blocked;
        let mut queue: VecDeque<usize> = (0..minus.len()).filter(|&v| minus[v]).collect();
        for &v in &queue {
            seen[v] = true;
        }
        while let Some(v) = queue.pop_front() {
            if plus[v] {
                return Err(SumsError::InvalidInstance {
                    axis: k,
                    reason: format!("path avoids the separator and reaches {:?}", self.tuple(v)),
                });
            }
            self.for_each_neighbor(v, |w| {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            });
        }
        Ok(())
    }
}

fn product_size(factors: &[FactorGraph]) -> Result<usize, SumsError> {
    let size = factors.iter().try_fold(1usize, |acc, f| acc.checked_mul(f.len()));
    match size {
        Some(s) if s <= MAX_PRODUCT => Ok(s),
        _ => Err(SumsError::Precondition(format!("product graph exceeds {MAX_PRODUCT} vertices"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntersectionOutcome {
    pub nonempty: bool,
    pub intersection_size: usize,
    /// Smallest common vertex, as a tuple of factor ordinals.
    pub witness: Option<Vec<usize>>,
}

/// Validates every separator, then intersects them.
pub fn separators_intersect(instance: &SeparatorInstance) -> Result<IntersectionOutcome, SumsError> {
    for k in 0..instance.dim() {
        instance.validate_separator(k)?;
    }
    let size = instance.vertex_count();
    let mut counts = vec![0u8; size];
    for s in &instance.separators {
        for &v in s {
            counts[v] += 1;
        }
    }
    let n = instance.dim() as u8;
    let common: Vec<usize> = counts
        .par_chunks(1 << 14)
        .enumerate()
        .flat_map_iter(|(c, chunk)| {
            chunk.iter().enumerate().filter(move |(_, &x)| x == n).map(move |(i, _)| c * (1 << 14) + i)
        })
        .collect();
    Ok(IntersectionOutcome {
        nonempty: !common.is_empty(),
        intersection_size: common.len(),
        witness: common.first().map(|&v| instance.tuple(v)),
    })
}

/// Random face-connected set of `size` cells in the plane grown from the origin.
fn random_polyomino<R: Rng>(rng: &mut R, size: usize) -> Vec<Vec<i64>> {
    let mut cells = vec![vec![0i64, 0]];
    let mut present: HashMap<Vec<i64>, ()> = HashMap::from([(vec![0, 0], ())]);
    while cells.len() < size {
        let base = cells[rng.gen_range(0..cells.len())].clone();
        let axis = rng.gen_range(0..2);
        let mut c = base;
        c[axis] += if rng.gen_bool(0.5) { 1 } else { -1 };
        if present.insert(c.clone(), ()).is_none() {
            cells.push(c);
        }
    }
    cells
}

/// Random valid instance on `n` random polyomino factors of at most
/// `max_factor` cells each.
///
/// For each axis a region is grown from `F_k^-` while keeping graph distance
/// at least 2 from `F_k^+`; `S_k` is its outer vertex boundary plus a few
/// random vertices off the faces.
pub fn random_separator_instance<R: Rng>(
    n: usize,
    max_factor: usize,
    rng: &mut R,
) -> Result<SeparatorInstance, SumsError> {
    if n == 0 || max_factor < 3 {
        return Err(SumsError::Precondition("need n >= 1 and at least 3 cells per factor".into()));
    }
    let factors = (0..n)
        .map(|_| {
            let size = rng.gen_range(3..=max_factor);
            FactorGraph::from_cells(random_polyomino(rng, size))
        })
        .collect::<Result<Vec<_>, _>>()?;
    product_size(&factors)?;
    let mut faces = Vec::new();
    for f in &factors {
        let root = rng.gen_range(0..f.len());
        let dist: Vec<usize> = f.distances(&[root]).into_iter().map(|d| d.unwrap()).collect();
        let far = *dist.iter().max().unwrap();
        // a connected set of >= 3 cells has two cells at distance >= 2 only
        // from some roots; fall back to an endpoint of a diameter
        let (dist, far) = if far >= 2 {
            (dist, far)
        } else {
            let start = dist.iter().position(|&d| d == far).unwrap();
            let d2: Vec<usize> = f.distances(&[start]).into_iter().map(|d| d.unwrap()).collect();
            let m = *d2.iter().max().unwrap();
            (d2, m)
        };
        let a = rng.gen_range(0..=(far - 2) / 2);
        let b = rng.gen_range(a + 2..=far);
        let minus = (0..f.len()).filter(|&c| dist[c] <= a).collect();
        let plus = (0..f.len()).filter(|&c| dist[c] >= b).collect();
        faces.push((minus, plus));
    }
    let mut instance = SeparatorInstance::new(factors, faces, vec![Vec::new(); n])?;
    let size = instance.vertex_count();
    for k in 0..n {
        let minus = instance.face_mask(k, false);
        let plus = instance.face_mask(k, true);
        // distance to F_k^+ only depends on the k-th coordinate
        let plus_cells = &instance.faces[k].1;
        let dk: Vec<usize> = instance.factors[k].distances(plus_cells).into_iter().map(|d| d.unwrap()).collect();
        let far_enough = |v: usize| dk[instance.tuple(v)[k]] >= 2;
        let mut region: Vec<bool> = minus.clone();
        let mut members: Vec<usize> = (0..size).filter(|&v| minus[v]).collect();
        let target = rng.gen_range(members.len()..=size);
        let mut attempts = 0;
        while members.len() < target && attempts < 8 * size {
            attempts += 1;
            let v = *members.choose(rng).unwrap();
            let mut cand = Vec::new();
            instance.for_each_neighbor(v, |w| cand.push(w));
            if let Some(&w) = cand.choose(rng) {
                if !region[w] && far_enough(w) {
                    region[w] = true;
                    members.push(w);
                }
            }
        }
        let mut sep = vec![false; size];
        for &v in &members {
            instance.for_each_neighbor(v, |w| {
                if !region[w] {
                    sep[w] = true;
                }
            });
        }
        for v in 0..size {
            if !minus[v] && !plus[v] && rng.gen_bool(0.02) {
                sep[v] = true;
            }
        }
        instance.separators[k] = (0..size).filter(|&v| sep[v]).collect();
    }
    Ok(instance)
}

/// Discrete separators for the lattice-shift covering construction.
#[derive(Clone, Debug, Serialize)]
pub struct SumSeparators {
    pub instance: SeparatorInstance,
    pub h: f64,
    /// Whether the target's cell is occupied by the rasterized sum of samples.
    pub target_in_sum: bool,
}

/// Builds the separator instance for target `y` from outer rasters of the
/// factors `K_i + Z_i` at spacing `h`.
///
/// A tuple of cells `c_1, ..., c_n` maps under the sum into the box with
/// lower corner `h * sum c_i` and side `n h`. `S_k` collects the tuples whose
/// `k`-th cell-sum coordinate `g` satisfies
/// `ceil(y_k / h) - n - 1 <= g <= floor(y_k / h) + 1`: every box that meets
/// the hyperplane `x_k = y_k`, widened by one cell on each side. One step in
/// the product changes `g` by at most `n`, so the band cannot be jumped.
pub fn build_sum_separators(
    c: &ShiftConstruction,
    sets: &[SampledSet],
    target: &Point,
    h: f64,
) -> Result<SumSeparators, SumsError> {
    let n = c.n;
    if n > 3 {
        return Err(SumsError::Precondition("separator products are limited to n <= 3".into()));
    }
    if sets.len() != n || target.dim() != n {
        return Err(SumsError::Precondition(format!("expected {n} sets and a target in dimension {n}")));
    }
    let mut factors = Vec::new();
    let mut sample_cells: Vec<Vec<Vec<i64>>> = Vec::new();
    for (i, k) in sets.iter().enumerate() {
        let shifted: Vec<Point> = c.lattice(i).iter().flat_map(|z| k.points.iter().map(move |p| p.add(z))).collect();
        let ks = SampledSet::new(n, shifted, k.density)?;
        let outer = rasterize_covering(&ks, h, RasterMode::Outer, 1)?;
        if !is_grid_continuum(&outer) {
            return Err(SumsError::Precondition(format!("factor {i} is not a grid continuum at h = {h}")));
        }
        factors.push(FactorGraph::from_grid(&outer)?);
        sample_cells.push(rasterize_covering(&ks, h, RasterMode::SampleCover, 0)?.occupied_cells());
    }
    product_size(&factors)?;
    let mut faces = Vec::new();
    for (k, f) in factors.iter().enumerate() {
        let face_cells = |sign: f64| -> Vec<usize> {
            let mut p = vec![0.0; n];
            p[k] = sign * c.l as f64;
            let cell: Vec<i64> = p.iter().map(|&x| cell_coord(x, h)).collect();
            f.cells.binary_search(&cell).into_iter().collect()
        };
        let (minus, plus) = (face_cells(-1.0), face_cells(1.0));
        if minus.is_empty() || plus.is_empty() {
            return Err(SumsError::Precondition(format!("face cells of factor {k} not found")));
        }
        faces.push((minus, plus));
    }
    let mut instance = SeparatorInstance::new(factors, faces, vec![Vec::new(); n])?;
    let size = instance.vertex_count();
    for k in 0..n {
        let y = target[k];
        let lo = (y / h).ceil() as i64 - n as i64 - 1;
        let hi = (y / h).floor() as i64 + 1;
        let axis_sums: Vec<i64> = (0..size)
            .map(|v| instance.tuple(v).iter().enumerate().map(|(i, &t)| instance.factors[i].cells[t][k]).sum())
            .collect();
        // the proof's inequality chain puts the faces strictly beyond the band
        for (v, &g) in axis_sums.iter().enumerate() {
            let t = instance.tuple(v);
            if instance.faces[k].0.contains(&t[k]) && g >= lo {
                return Err(SumsError::InvalidInstance {
                    axis: k,
                    reason: format!("negative face reaches the band at h = {h}"),
                });
            }
            if instance.faces[k].1.contains(&t[k]) && g <= hi {
                return Err(SumsError::InvalidInstance {
                    axis: k,
                    reason: format!("positive face reaches the band at h = {h}"),
                });
            }
        }
        instance.separators[k] = (0..size).filter(|&v| (lo..=hi).contains(&axis_sums[v])).collect();
    }
    instance.target = Some(target.clone());
    let target_in_sum = target_cell_covered(&sample_cells, target, h);
    Ok(SumSeparators { instance, h, target_in_sum })
}

fn target_cell_covered(factor_cells: &[Vec<Vec<i64>>], target: &Point, h: f64) -> bool {
    let goal: Vec<i64> = target.coords().iter().map(|&x| cell_coord(x, h)).collect();
    // cell sums reachable from the first factors, pruned to what the rest can still fix
    let mut partial: std::collections::HashSet<Vec<i64>> = std::collections::HashSet::from([vec![0; goal.len()]]);
    for cells in factor_cells {
        let mut next = std::collections::HashSet::new();
        for p in &partial {
            for c in cells {
                next.insert(p.iter().zip(c).map(|(a, b)| a + b).collect::<Vec<i64>>());
            }
        }
        partial = next;
    }
    partial.contains(&goal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{generate, GeneratorSpec};
    use crate::sums::shift_construction;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path(m: i64) -> FactorGraph {
        FactorGraph::from_cells((0..m).map(|i| vec![i]).collect()).unwrap()
    }

    fn band_instance(n: usize, m: i64) -> SeparatorInstance {
        let factors: Vec<FactorGraph> = (0..n).map(|_| path(m)).collect();
        let faces = (0..n).map(|_| (vec![0], vec![m as usize - 1])).collect();
        let mut inst = SeparatorInstance::new(factors, faces, vec![Vec::new(); n]).unwrap();
        let mid = m as usize / 2;
        for k in 0..n {
            inst.separators[k] = (0..inst.vertex_count()).filter(|&v| inst.tuple(v)[k] == mid).collect();
        }
        inst
    }

    #[test]
    fn middle_bands_meet_at_center() {
        let r = separators_intersect(&band_instance(2, 9)).unwrap();
        assert!(r.nonempty);
        assert_eq!(r.intersection_size, 1);
        assert_eq!(r.witness, Some(vec![4, 4]));
        let r3 = separators_intersect(&band_instance(3, 5)).unwrap();
        assert_eq!(r3.witness, Some(vec![2, 2, 2]));
    }

    #[test]
    fn single_factor_cut() {
        let r = separators_intersect(&band_instance(1, 6)).unwrap();
        assert_eq!(r.intersection_size, 1);
    }

    #[test]
    fn gap_in_separator_is_rejected() {
        let mut inst = band_instance(2, 9);
        let hole = inst.vertex(&[4, 0]);
        inst.separators[0].retain(|&v| v != hole);
        assert!(matches!(separators_intersect(&inst), Err(SumsError::InvalidInstance { axis: 0, .. })));
    }

    #[test]
    fn diagonal_steps_cross_a_staircase() {
        // a staircase blocks face paths but not king moves
        let factors = vec![path(4), path(4)];
        let mut inst =
            SeparatorInstance::new(factors, vec![(vec![0], vec![3]), (vec![0], vec![3])], vec![vec![], vec![]])
                .unwrap();
        inst.separators[0] = [[1, 0], [1, 1], [2, 2], [2, 3]].iter().map(|t| inst.vertex(t)).collect();
        assert!(inst.validate_separator(0).is_err());
    }

    #[test]
    fn random_instances_intersect() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let inst = random_separator_instance(2, 31, &mut rng).unwrap();
            let r = separators_intersect(&inst).unwrap();
            assert!(r.nonempty, "{}", serde_json::to_string(&inst).unwrap());
        }
        for _ in 0..3 {
            let inst = random_separator_instance(3, 12, &mut rng).unwrap();
            assert!(separators_intersect(&inst).unwrap().nonempty);
        }
    }

    #[test]
    fn serde_round_trip_restores_adjacency() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let inst = random_separator_instance(2, 10, &mut rng).unwrap();
        let mut back: SeparatorInstance = serde_json::from_str(&serde_json::to_string(&inst).unwrap()).unwrap();
        back.rebuild().unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn l_shape_covering_separators() {
        let seg = |axis: usize| {
            let mut end = vec![0.0; 2];
            end[axis] = 1.0;
            generate(&GeneratorSpec::Segment { start: vec![0.0; 2], end, budget: 41 }).unwrap().set
        };
        let sets = [seg(0), seg(1)];
        let c = shift_construction(&sets, 1).unwrap();
        let y = Point::new(vec![0.3, -0.55]);
        let built = build_sum_separators(&c, &sets, &y, 0.25).unwrap();
        assert!(built.target_in_sum);
        for s in &built.instance.separators {
            assert!(!s.is_empty());
        }
        let r = separators_intersect(&built.instance).unwrap();
        assert!(r.nonempty);
        // the witness tuple sums to a box near y
        let t = r.witness.unwrap();
        for k in 0..2 {
            let g: i64 = t.iter().enumerate().map(|(i, &x)| built.instance.factors[i].cells[x][k]).sum();
            let lo = g as f64 * 0.25;
            assert!(lo - 0.25 <= y[k] + 1e-12 && y[k] <= lo + 3.0 * 0.25 + 1e-12);
        }
    }
}

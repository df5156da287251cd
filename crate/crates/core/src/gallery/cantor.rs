use super::{GalleryError, Generated, MAX_CANTOR_DEPTH};
use crate::grid::{Point, SampledSet};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// `numerator / 2^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicHeight {
    pub numerator: u64,
    pub exponent: u32,
}

impl DyadicHeight {
    pub fn value(self) -> f64 {
        self.numerator as f64 / (1u64 << self.exponent) as f64
    }
}

fn check_depth(depth: usize) -> Result<(), GalleryError> {
    if depth > MAX_CANTOR_DEPTH {
        return Err(GalleryError::BadParameter(format!("depth {depth} exceeds {MAX_CANTOR_DEPTH}")));
    }
    Ok(())
}

/// Left endpoint of the level-`len` interval selected by `bits`
/// (most significant bit first), as an integer over `3^len`.
fn ternary_numerator(bits: u64, len: usize) -> u64 {
    (0..len).fold(0, |acc, i| 3 * acc + 2 * ((bits >> (len - 1 - i)) & 1))
}

/// Value of the Cantor ladder at `x`, reading at most `digits` ternary digits.
pub fn cantor_function(x: f64, digits: usize) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let (mut x, mut y, mut w) = (x, 0.0, 0.5);
    for _ in 0..digits {
        x *= 3.0;
        let d = x.floor();
        x -= d;
        match d as u8 {
            0 => {}
            1 => return y + w,
            _ => y += w,
        }
        w /= 2.0;
    }
    y
}

/// The `2^depth` left endpoints of the level-`depth` Cantor intervals, with
/// density `3^-depth`.
pub fn cantor_set(depth: usize) -> Result<SampledSet, GalleryError> {
    check_depth(depth)?;
    let den = 3f64.powi(depth as i32);
    let pts = (0..1u64 << depth).map(|b| Point::new(vec![ternary_numerator(b, depth) as f64 / den])).collect();
    Ok(SampledSet::new(1, pts, 1.0 / den)?)
}

/// Samples of the ladder graph: all endpoints of the level `depth + refine`
/// Cantor intervals, points on every plateau of level at most
/// `depth + refine` at roughly `1 / budget` spacing, and the periodic Cantor
/// points of period 2 to 4 (whose heights are not dyadic).
pub fn cantor_graph(depth: usize, refine: usize, budget: usize) -> Result<SampledSet, GalleryError> {
    let level = depth + refine;
    check_depth(level)?;
    if budget < 2 {
        return Err(GalleryError::BadParameter(format!("budget {budget} is below 2")));
    }
    let den3 = 3f64.powi(level as i32);
    let den2 = (1u64 << level) as f64;
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for b in 0..1u64 << level {
        let x = ternary_numerator(b, level) as f64;
        pts.push((x / den3, b as f64 / den2));
        pts.push(((x + 1.0) / den3, (b + 1) as f64 / den2));
    }
    let mut half_step = 0.0f64;
    for j in 1..=level {
        let len = 3f64.powi(-(j as i32));
        let pieces = ((len * budget as f64).ceil() as usize).max(1);
        half_step = half_step.max(len / (2.0 * pieces as f64));
        for prefix in 0..1u64 << (j - 1) {
            let a = ternary_numerator(prefix, j - 1) as f64 / 3f64.powi(j as i32 - 1);
            let y = (2 * prefix + 1) as f64 / (1u64 << j) as f64;
            for k in 1..pieces {
                pts.push((a + len * (1.0 + k as f64 / pieces as f64), y));
            }
        }
    }
    for period in 2..=4usize {
        for bits in 1..(1u64 << period) - 1 {
            let x = ternary_numerator(bits, period) as f64 / (3f64.powi(period as i32) - 1.0);
            let y = bits as f64 / ((1u64 << period) - 1) as f64;
            pts.push((x, y));
        }
    }
    pts.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
    pts.dedup();
    // inside a level interval the nearer endpoint in height is within
    // 2^-(level+1) vertically and 3^-level horizontally
    let eps = (0.5 / den2).max(1.0 / den3).max(half_step);
    let points = pts.into_iter().map(|(x, y)| Point::new(vec![x, y])).collect();
    Ok(SampledSet::new(2, points, eps)?)
}

/// Samples of the open plateau interiors of levels `1..=depth`, inset by 10%
/// of the plateau length, tagged with their exact heights. Depth 0 has no
/// plateaus and yields no samples.
pub fn ladder_steps(depth: usize, per_plateau: usize) -> Result<Generated, GalleryError> {
    check_depth(depth)?;
    if per_plateau < 2 {
        return Err(GalleryError::BadParameter(format!("per_plateau {per_plateau} is below 2")));
    }
    let mut pts = Vec::new();
    let mut heights = Vec::new();
    for j in 1..=depth {
        let len = 3f64.powi(-(j as i32));
        for prefix in 0..1u64 << (j - 1) {
            let a = ternary_numerator(prefix, j - 1) as f64 / 3f64.powi(j as i32 - 1) + len;
            let tag = DyadicHeight { numerator: 2 * prefix + 1, exponent: j as u32 };
            for k in 0..per_plateau {
                let t = 0.1 + 0.8 * k as f64 / (per_plateau - 1) as f64;
                pts.push(Point::new(vec![a + t * len, tag.value()]));
                heights.push(tag);
            }
        }
    }
    // the widest plateau has length 1/3; the inset ends are the worst gaps
    let eps = (0.1f64 / 3.0).max(0.4 / (3.0 * (per_plateau - 1) as f64));
    Ok(Generated { set: SampledSet::new(2, pts, eps)?, heights: Some(heights) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicLines {
    pub all_dyadic: bool,
    /// Distinct second coordinates.
    pub lines: usize,
    pub first_failure: Option<Point>,
}

/// True iff every sample's second coordinate is `p / 2^q` with `q <= max_exponent`.
pub fn dyadic_lines_check(samples: &SampledSet, max_exponent: u32) -> Result<DyadicLines, GalleryError> {
    if samples.dim != 2 {
        return Err(GalleryError::BadParameter(format!(
            "dyadic_lines_check needs planar samples, got dimension {}",
            samples.dim
        )));
    }
    if max_exponent > 60 {
        return Err(GalleryError::BadParameter("max_exponent above 60".into()));
    }
    let scale = (1u64 << max_exponent) as f64;
    let mut lines = BTreeSet::new();
    let mut first_failure = None;
    for p in &samples.points {
        let y = p[1];
        lines.insert(y.to_bits());
        // multiplying by a power of two is exact
        if first_failure.is_none() && (y * scale).fract() != 0.0 {
            first_failure = Some(p.clone());
        }
    }
    Ok(DyadicLines { all_dyadic: first_failure.is_none(), lines: lines.len(), first_failure })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Ladder value at `p/q` by exact long division in base 3.
    fn ladder_exact(p: u64, q: u64, digits: usize) -> (u64, u32) {
        let (mut r, mut num, mut exp) = (p, 0u64, 0u32);
        for _ in 0..digits {
            r *= 3;
            let d = r / q;
            r %= q;
            num *= 2;
            exp += 1;
            match d {
                0 => {}
                1 => return (num + 1, exp),
                _ => num += 1,
            }
        }
        (num, exp)
    }

    #[test]
    fn cantor_set_level_one() {
        let s = cantor_set(1).unwrap();
        assert_eq!(s.points, vec![Point::new(vec![0.0]), Point::new(vec![2.0 / 3.0])]);
        assert!((s.density - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(cantor_set(4).unwrap().len(), 16);
        assert_eq!(cantor_set(0).unwrap().len(), 1);
    }

    #[test]
    fn ladder_at_one_third() {
        assert_eq!(cantor_function(1.0 / 3.0, 40), 0.5);
        assert_eq!(ladder_exact(1, 3, 40), (1, 1));
    }

    #[test]
    fn ladder_matches_exact_digit_map() {
        for q in [7u64, 9, 13, 27, 81, 100] {
            for p in 0..q {
                let (num, exp) = ladder_exact(p, q, 30);
                let want = num as f64 / (1u64 << exp) as f64;
                let got = cantor_function(p as f64 / q as f64, 30);
                assert!((got - want).abs() < 1e-8, "{p}/{q}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn graph_samples_lie_on_the_ladder() {
        let s = cantor_graph(3, 2, 100).unwrap();
        for p in &s.points {
            assert!((cantor_function(p[0], 50) - p[1]).abs() < 1e-9, "{p}");
        }
        // periodic point 1/4 = 0.(02) in base 3 maps to 1/3
        assert!(s.points.iter().any(|p| (p[0] - 0.25).abs() < 1e-15 && (p[1] - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn graph_is_monotone() {
        let s = cantor_graph(6, 4, 1000).unwrap();
        for w in s.points.windows(2) {
            assert!(w[0][0] <= w[1][0] && w[0][1] <= w[1][1]);
        }
        assert_eq!(s.points.first().unwrap().coords(), &[0.0, 0.0]);
        assert_eq!(s.points.last().unwrap().coords(), &[1.0, 1.0]);
    }

    #[test]
    fn graph_density_is_honest() {
        // every ladder point at a fine parameter grid is within eps of a sample
        let s = cantor_graph(2, 2, 60).unwrap();
        for k in 0..=3000 {
            let x = k as f64 / 3000.0;
            let q = Point::new(vec![x, cantor_function(x, 60)]);
            let d = s.points.iter().map(|p| p.sup_dist(&q)).fold(f64::INFINITY, f64::min);
            assert!(d <= s.density + 1e-12, "x = {x}: {d} > {}", s.density);
        }
    }

    #[test]
    fn ladder_heights_are_dyadic() {
        let g = ladder_steps(3, 4).unwrap();
        let tags = g.heights.unwrap();
        assert_eq!(tags.len(), 7 * 4);
        for (p, t) in g.set.points.iter().zip(&tags) {
            assert!(t.exponent <= 3 && t.numerator % 2 == 1);
            assert_eq!(p[1], t.value());
            assert_eq!(cantor_function(p[0], 60), p[1]);
        }
    }

    fn pairwise_sum(a: &SampledSet, b: &SampledSet) -> SampledSet {
        let pts = a.points.iter().flat_map(|p| b.points.iter().map(move |q| p.add(q))).collect();
        SampledSet::new(2, pts, a.density + b.density).unwrap()
    }

    #[test]
    fn ladder_sum_lies_on_dyadic_lines() {
        let a = ladder_steps(3, 3).unwrap().set;
        let r = dyadic_lines_check(&pairwise_sum(&a, &a), 3).unwrap();
        assert!(r.all_dyadic);
        // the seven heights are k/8, k = 1..7, so the sums are k/8, k = 2..14
        assert_eq!(r.lines, 13);
        assert!(r.lines <= 49);
    }

    #[test]
    fn graph_sum_is_not_dyadic() {
        let g = cantor_graph(3, 1, 20).unwrap();
        let r = dyadic_lines_check(&pairwise_sum(&g, &g), 20).unwrap();
        assert!(!r.all_dyadic);
        let empty = SampledSet::new(2, vec![], 0.0).unwrap();
        assert_eq!(
            dyadic_lines_check(&empty, 3).unwrap(),
            DyadicLines { all_dyadic: true, lines: 0, first_failure: None }
        );
    }
}

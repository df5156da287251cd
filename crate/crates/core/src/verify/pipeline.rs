use super::{VerifyError, VerifyOptions};
use crate::affine::{nonflat_certificate, parallelotope_volume, relative_tol, transversal_basis, FlatnessReport};
use crate::grid::{
    eps_density_margin, is_grid_continuum, largest_cube, rasterize_covering, Cube, GridSet, Point, RasterMode,
    SampledSet,
};
use crate::sums::sum_rasters;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Supported,
    Refuted,
    Inconclusive,
}

/// Sets mapped by `x -> B^-1 (x - a_i)`, where `a_i` is the first sample of
/// set `i` and the columns of `B` are one difference from each set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalized {
    #[serde(skip)]
    pub sets: Vec<SampledSet>,
    /// Columns of `B`, in original coordinates.
    pub basis: Vec<Point>,
    /// Sample index of each basis vector in its set.
    pub chosen: Vec<usize>,
    /// `a_1 + ... + a_n`.
    pub shift: Point,
    pub det_abs: f64,
}

impl Normalized {
    /// Maps a point of the normalized sum back to original coordinates.
    pub fn to_original(&self, p: &Point) -> Point {
        let mut out = self.shift.clone();
        for (b, &c) in self.basis.iter().zip(p.coords()) {
            out = out.add(&b.scale(c));
        }
        out
    }
}

fn invert(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[p][col] == 0.0 {
            return None;
        }
        a.swap(col, p);
        let d = a[col][col];
        for v in a[col].iter_mut() {
            *v /= d;
        }
        let pivot = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            let f = row[col];
            if r != col && f != 0.0 {
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x -= f * y;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

fn translated(sets: &[SampledSet]) -> Vec<SampledSet> {
    sets.iter()
        .map(|s| {
            let base = s.points[0].clone();
            let points = s.points.iter().map(|p| p.sub(&base)).collect();
            SampledSet { dim: s.dim, points, density: s.density, exact: s.exact }
        })
        .collect()
}

/// Finds a basis with one difference from each set and maps the sets so it
/// becomes the standard basis. Returns the reason when no well-conditioned
/// basis exists.
pub fn normalize(sets: &[SampledSet], tol: f64) -> Result<Normalized, String> {
    let n = sets.len();
    let moved = translated(sets);
    let chosen = transversal_basis(&moved, tol).ok_or("no basis with one difference from each set")?;
    let basis: Vec<Point> = chosen.iter().zip(&moved).map(|(&b, s)| s.points[b].clone()).collect();
    let det_abs = parallelotope_volume(&basis);
    let scale = moved.iter().map(|s| s.sup_radius()).fold(0.0, f64::max);
    if !(det_abs >= 1e-6 * scale.powi(n as i32)) {
        return Err(format!("basis determinant {det_abs:e} is too small for sample scale {scale}"));
    }
    let b: Vec<Vec<f64>> = (0..n).map(|r| basis.iter().map(|v| v[r]).collect()).collect();
    let inv = invert(&b).ok_or("basis matrix is singular")?;
    let normalized = sets.iter().map(|s| s.affine_image(&inv, &s.points[0])).collect();
    let shift = sets.iter().fold(Point::zeros(n), |acc, s| acc.add(&s.points[0]));
    Ok(Normalized { sets: normalized, basis, chosen, shift, det_abs })
}

/// Findings at one spacing. Lengths and cubes are in normalized coordinates;
/// measures are in original units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolutionEvidence {
    pub h: f64,
    /// Density slack `sum (eps_i + h)`.
    pub threshold: f64,
    pub interior_cube: Option<Cube>,
    /// Margin over the finest interior cube found.
    pub density_margin: Option<f64>,
    pub sample_cells: usize,
    pub outer_cells: usize,
    pub sample_measure: f64,
    pub outer_measure: f64,
    pub vol_p: f64,
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumEvidence {
    pub n_copies: usize,
    pub tol: f64,
    /// Certificate of the union of the sets, each translated to the origin.
    pub certificate: FlatnessReport,
    pub normalization: Option<Normalized>,
    pub resolutions: Vec<ResolutionEvidence>,
    pub margins_monotone: bool,
    pub cube_sides_monotone: bool,
    pub ratios_ok: bool,
    pub verdict: Verdict,
    pub reason: String,
}

impl SumEvidence {
    pub fn finest(&self) -> Option<&ResolutionEvidence> {
        self.resolutions.last()
    }
}

/// Non-increasing over `(h, value)` pairs up to grid quantization: a length
/// measured on a grid of spacing `h` is within `h` of its limit, so two
/// levels may disagree by the sum of their spacings.
fn non_increasing(v: &[(f64, f64)]) -> bool {
    v.windows(2).all(|w| w[1].1 <= w[0].1 + w[0].0 + w[1].0 + 1e-12)
}

fn check_inputs(sets: &[SampledSet]) -> Result<usize, VerifyError> {
    let n = sets.len();
    if n == 0 {
        return Err(VerifyError::Input("no sets".into()));
    }
    if let Some(i) = sets.iter().position(|s| s.dim != n) {
        return Err(VerifyError::Input(format!("set {i} has dimension {} but {n} sets were given", sets[i].dim)));
    }
    if let Some(i) = sets.iter().position(|s| s.is_empty()) {
        return Err(VerifyError::Input(format!("set {i} has no samples")));
    }
    Ok(n)
}

/// Evidence that `K_1 + ... + K_n` has interior and measure at least the
/// volume of the parallelotope spanned by one difference from each set.
pub fn verify_sum_interior(sets: &[SampledSet], opts: &VerifyOptions) -> Result<SumEvidence, VerifyError> {
    let n = check_inputs(sets)?;
    let sweep = opts.sweep()?;
    let moved = translated(sets);
    let all: Vec<Point> = moved.iter().flat_map(|s| s.points.iter().cloned()).collect();
    let tol = opts.tol.unwrap_or_else(|| relative_tol(&all));
    let density = sets.iter().map(|s| s.density).fold(0.0, f64::max);
    let union = SampledSet { dim: n, points: all, density, exact: true };
    let certificate = nonflat_certificate(&union, tol)?;
    let normalization =
        if certificate.is_non_flat() { normalize(sets, tol) } else { Err("the union of the sets is flat".into()) };
    let (work, vol_p, det, mut reason) = match &normalization {
        Ok(norm) => (norm.sets.clone(), 1.0, norm.det_abs, String::new()),
        Err(why) => (moved, 0.0, 1.0, why.clone()),
    };
    let refuted = normalization.is_err();

    if !refuted {
        let finest = *sweep.last().unwrap();
        for (i, s) in work.iter().enumerate() {
            let outer = rasterize_covering(s, finest, RasterMode::Outer, 1)?;
            if !is_grid_continuum(&outer) {
                return Ok(SumEvidence {
                    n_copies: n,
                    tol,
                    certificate,
                    normalization: normalization.ok(),
                    resolutions: Vec::new(),
                    margins_monotone: false,
                    cube_sides_monotone: false,
                    ratios_ok: false,
                    verdict: Verdict::Inconclusive,
                    reason: format!("set {i} is not a grid continuum at h = {finest}"),
                });
            }
        }
    }

    let mut resolutions = Vec::new();
    let mut samples = Vec::new();
    let mut search: Option<Cube> = None; // unshrunk hit of the previous level
    for &h in &sweep {
        let rasters = sum_rasters(&work, h)?;
        let threshold: f64 = work.iter().map(|s| s.density + h).sum();
        let slack = threshold + (n + 1) as f64 * h;
        let cells = (threshold / h).floor() as usize;
        let region = search.as_ref().map(|c| c.cell_range(h));
        let hit = largest_cube(&rasters.sample, cells, region.as_ref().map(|(l, e)| (l.as_slice(), e.as_slice())))?;
        let interior = hit.as_ref().and_then(|c| c.cube.shrunk(slack));
        if let Some(c) = &hit {
            search = Some(c.cube.clone());
        }
        let cell_volume = h.powi(n as i32) * det;
        let measure = |g: &GridSet| g.count() as f64 * cell_volume;
        let outer_measure = measure(&rasters.outer);
        resolutions.push(ResolutionEvidence {
            h,
            threshold,
            interior_cube: interior,
            density_margin: None,
            sample_cells: rasters.sample.count(),
            outer_cells: rasters.outer.count(),
            sample_measure: measure(&rasters.sample),
            outer_measure,
            vol_p: vol_p * det,
            ratio: (!refuted).then(|| outer_measure / (vol_p * det)),
        });
        samples.push(rasters.sample);
    }
    // Margins of every level are taken over one cube, the finest interior
    // cube found, so that they are comparable across spacings.
    let reference = resolutions.iter().rev().find_map(|r| r.interior_cube.clone());
    if let Some(cube) = &reference {
        for (r, sample) in resolutions.iter_mut().zip(&samples) {
            r.density_margin = Some(eps_density_margin(sample, cube)?);
        }
    }
    drop(samples);

    let margins: Vec<(f64, f64)> = resolutions.iter().filter_map(|r| r.density_margin.map(|m| (r.h, m))).collect();
    let sides: Vec<(f64, f64)> =
        resolutions.iter().filter_map(|r| r.interior_cube.as_ref().map(|c| (r.h, -c.side))).collect();
    let margins_monotone = non_increasing(&margins);
    let cube_sides_monotone = non_increasing(&sides);
    let ratios_ok = !refuted && resolutions.iter().all(|r| r.ratio.is_some_and(|x| x >= 1.0));
    let verdict = if refuted {
        Verdict::Refuted
    } else {
        let last = resolutions.last().unwrap();
        let covered = last.interior_cube.is_some() && last.density_margin.is_some_and(|m| m <= last.threshold);
        if !last.interior_cube.is_some() {
            reason = "no interior cube at the finest resolution".into();
        } else if !covered {
            reason = "density margin exceeds the slack at the finest resolution".into();
        } else if !ratios_ok {
            reason = "outer measure below the parallelotope volume".into();
        } else if !margins_monotone {
            reason = "density margins increase as h decreases".into();
        }
        if covered && ratios_ok && margins_monotone {
            Verdict::Supported
        } else {
            Verdict::Inconclusive
        }
    };
    Ok(SumEvidence {
        n_copies: n,
        tol,
        certificate,
        normalization: normalization.ok(),
        resolutions,
        margins_monotone,
        cube_sides_monotone,
        ratios_ok,
        verdict,
        reason,
    })
}

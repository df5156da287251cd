use super::pipeline::{normalize, verify_sum_interior, SumEvidence, Verdict};
use super::{CheckResult, VerificationReport, VerifyError, VerifyOptions};
use crate::affine::{is_nowhere_flat, nonflat_certificate, projection_range, relative_tol};
use crate::gallery::{cantor_graph, dyadic_lines_check, generate, ladder_steps, GeneratorSpec};
use crate::grid::{Point, SampledSet};
use crate::sums::{
    build_sum_separators, random_separator_instance, separators_intersect, shift_construction, verify_covering,
    SeparatorInstance,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::time::Instant;

/// Pair budget for sampled sums in the Cantor scenario.
const MAX_SUM_PAIRS: usize = 1_000_000;

fn options_echo(opts: &VerifyOptions) -> Value {
    json!({
        "resolutions": opts.resolutions,
        "tol": opts.tol,
        "seed": opts.seed,
        "rho": opts.rho,
        "s": opts.s,
        "directions": opts.directions,
    })
}

fn evidence_check(name: &str, ev: &SumEvidence) -> CheckResult {
    CheckResult::required(
        name,
        ev.verdict == Verdict::Supported,
        serde_json::to_value(ev).expect("evidence serializes"),
    )
}

/// Interior and measure pipeline on `n` sets.
pub fn verify_main_scenario(sets: &[SampledSet], opts: &VerifyOptions) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let ev = verify_sum_interior(sets, opts)?;
    let checks = vec![evidence_check("interior_and_measure", &ev)];
    Ok(VerificationReport::new("main", json!({ "options": options_echo(opts) }), checks, start.elapsed().as_secs_f64()))
}

/// Lattice-shift covering check for the construction at every resolution.
pub fn verify_covering_scenario(sets: &[SampledSet], opts: &VerifyOptions) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let sweep = opts.sweep()?;
    let moved: Vec<Point> = sets.iter().flat_map(|s| s.points.iter().map(|p| p.sub(&s.points[0]))).collect();
    let tol = opts.tol.unwrap_or_else(|| relative_tol(&moved));
    let inputs = json!({ "options": options_echo(opts) });
    let norm = match normalize(sets, tol) {
        Ok(n) => n,
        Err(why) => {
            let checks = vec![CheckResult::required("normalization", false, json!({ "reason": why }))];
            return Ok(VerificationReport::new("claim", inputs, checks, start.elapsed().as_secs_f64()));
        }
    };
    let construction = shift_construction(&norm.sets, opts.s)?;
    let mut checks = vec![CheckResult::info(
        "construction",
        true,
        json!({
            "construction": construction,
            "lattice_size": construction.lattice_size(),
            "implied_lower_bound": construction.implied_lower_bound(),
            "normalization": norm,
        }),
    )];
    for h in sweep {
        let r = verify_covering(&construction, &norm.sets, h)?;
        checks.push(CheckResult::required(&format!("covering_h_{h}"), r.passed, serde_json::to_value(&r).unwrap()));
    }
    Ok(VerificationReport::new("claim", inputs, checks, start.elapsed().as_secs_f64()))
}

fn random_directions(n: usize, m: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(m);
    while out.len() < m {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 && norm <= 1.0 {
            out.push(Point::new(v.iter().map(|x| x / norm).collect()));
        }
    }
    out
}

/// Consistency of the testable equivalent conditions for one continuum:
/// non-flatness, non-degenerate projections, interior and positive measure
/// of the `n`-fold sum.
pub fn verify_equivalent_conditions(k: &SampledSet, opts: &VerifyOptions) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    if k.is_empty() {
        return Err(VerifyError::Input("empty set".into()));
    }
    let n = k.dim;
    let tol = opts.tol.unwrap_or_else(|| relative_tol(&k.points));
    let cert = nonflat_certificate(k, tol)?;
    let non_flat = cert.is_non_flat();

    let mut directions = random_directions(n, opts.directions, opts.seed);
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        directions.push(Point::new(e));
    }
    directions.extend(cert.hull_normals());
    let mut degenerate = None;
    for d in &directions {
        let r = projection_range(k, d)?;
        if !r.nondegenerate() {
            degenerate = Some((d.clone(), r));
            break;
        }
    }
    let projections_ok = degenerate.is_none();

    let copies = vec![k.clone(); n];
    let ev = verify_sum_interior(&copies, &VerifyOptions { tol: Some(tol), ..opts.clone() })?;
    let interior = ev.verdict == Verdict::Supported;
    let measure = ev.ratios_ok && ev.normalization.as_ref().is_some_and(|m| m.det_abs > 0.0);

    let conditions = [non_flat, projections_ok, interior, measure];
    let consistent = conditions.iter().all(|&c| c == conditions[0]);
    let checks = vec![
        CheckResult::info("not_flat", non_flat, serde_json::to_value(&cert).unwrap()),
        CheckResult::info(
            "projections_nondegenerate",
            projections_ok,
            json!({
                "directions_tested": directions.len(),
                "first_degenerate": degenerate.map(|(d, r)| json!({ "direction": d, "range": r })),
            }),
        ),
        CheckResult::info("sum_has_interior", interior, serde_json::to_value(&ev).unwrap()),
        CheckResult::info("sum_has_positive_measure", measure, json!({ "ratios_ok": ev.ratios_ok })),
        CheckResult::required("conditions_agree", consistent, json!({ "values": conditions })),
    ];
    Ok(VerificationReport::new("c1", json!({ "options": options_echo(opts) }), checks, start.elapsed().as_secs_f64()))
}

fn pair_sums(a: &SampledSet, b: &SampledSet, seed: u64) -> (SampledSet, bool) {
    let total = a.len().saturating_mul(b.len());
    let points: Vec<Point> = if total <= MAX_SUM_PAIRS {
        a.points.iter().flat_map(|p| b.points.iter().map(move |q| p.add(q))).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..MAX_SUM_PAIRS)
            .map(|_| a.points[rng.gen_range(0..a.len())].add(&b.points[rng.gen_range(0..b.len())]))
            .collect()
    };
    let exhaustive = total <= MAX_SUM_PAIRS;
    (SampledSet { dim: a.dim, points, density: a.density + b.density, exact: true }, exhaustive)
}

/// The Cantor ladder at truncation depth `depth`: the graph sum has
/// interior, the plateau sum lies on finitely many dyadic lines, and the
/// graph is non-flat without being nowhere flat.
pub fn verify_cantor_ladder(depth: usize, opts: &VerifyOptions) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    if depth > 12 {
        return Err(VerifyError::Input(format!("depth {depth} is outside 0..=12")));
    }
    let graph = cantor_graph(depth, 4, 1000)?;
    let ev = verify_sum_interior(&[graph.clone(), graph.clone()], opts)?;

    let steps = ladder_steps(depth, 5)?.set;
    let (step_sum, exhaustive) = pair_sums(&steps, &steps, opts.seed);
    let lines = dyadic_lines_check(&step_sum, depth as u32)?;
    let bound = ((1usize << depth) + 1).pow(2);

    let (graph_sum, _) = pair_sums(&graph, &graph, opts.seed);
    let graph_lines = dyadic_lines_check(&graph_sum, 60)?;

    let tol = opts.tol.unwrap_or_else(|| relative_tol(&graph.points));
    let cert = nonflat_certificate(&graph, tol)?;
    let nowhere = is_nowhere_flat(&graph, opts.rho, tol)?;

    let checks = vec![
        evidence_check("graph_sum_has_interior", &ev),
        CheckResult::required(
            "step_sum_on_dyadic_lines",
            lines.all_dyadic && lines.lines <= bound,
            json!({
                "max_exponent": depth,
                "line_bound": bound,
                "steps": steps.len(),
                "pairs_exhaustive": exhaustive,
                "result": lines,
            }),
        ),
        CheckResult::info(
            "graph_sum_off_dyadic_lines",
            !graph_lines.all_dyadic,
            serde_json::to_value(&graph_lines).unwrap(),
        ),
        CheckResult::required(
            "graph_not_flat_but_not_nowhere_flat",
            cert.is_non_flat() && !nowhere.nowhere_flat,
            json!({ "certificate": cert, "nowhere_flat": nowhere }),
        ),
    ];
    let inputs = json!({ "depth": depth, "options": options_echo(opts) });
    Ok(VerificationReport::new("cantor", inputs, checks, start.elapsed().as_secs_f64()))
}

fn separator_trials(label: &str, n: usize, trials: usize, rng: &mut ChaCha8Rng) -> CheckResult {
    let mut failure: Option<Value> = None;
    let mut vertices = 0usize;
    for t in 0..trials {
        let outcome = random_separator_instance(n, 31, rng).and_then(|inst| {
            vertices = vertices.max(inst.vertex_count());
            separators_intersect(&inst).map(|r| (r, inst))
        });
        match outcome {
            Ok((r, _)) if r.nonempty => {}
            Ok((_, inst)) => {
                failure = Some(json!({ "trial": t, "reason": "empty intersection", "instance": inst }));
                break;
            }
            Err(e) => {
                failure = Some(json!({ "trial": t, "reason": e.to_string() }));
                break;
            }
        }
    }
    CheckResult::required(
        label,
        failure.is_none(),
        json!({ "n": n, "trials": trials, "largest_product": vertices, "failure": failure }),
    )
}

fn covering_separator_check(seed: u64) -> Result<CheckResult, VerifyError> {
    let seg = |axis: usize| -> Result<SampledSet, VerifyError> {
        let mut end = vec![0.0; 2];
        end[axis] = 1.0;
        Ok(generate(&GeneratorSpec::Segment { start: vec![0.0; 2], end, budget: 41 })?.set)
    };
    let sets = [seg(0)?, seg(1)?];
    let c = shift_construction(&sets, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut targets = vec![Point::zeros(2)];
    targets.extend((0..4).map(|_| Point::new(vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])));
    let mut results = Vec::new();
    let mut ok = true;
    for y in &targets {
        let built = build_sum_separators(&c, &sets, y, 0.25)?;
        let r = separators_intersect(&built.instance)?;
        ok &= r.nonempty;
        let failed: Option<&SeparatorInstance> = (!r.nonempty).then_some(&built.instance);
        results.push(json!({
            "target": y,
            "target_in_sum": built.target_in_sum,
            "product_vertices": built.instance.vertex_count(),
            "outcome": r,
            "failed_instance": failed,
        }));
    }
    Ok(CheckResult::required("covering_separators_l_shape", ok, json!({ "h": 0.25, "cases": results })))
}

/// Random separator instances in products of 2 and 3 factors plus the
/// separators built from the lattice-shift covering; every intersection must be
/// non-empty.
pub fn verify_separator_suite(trials: usize, seed: u64) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    if trials == 0 {
        return Err(VerifyError::Input("trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = vec![
        separator_trials("random_n2", 2, trials, &mut rng),
        separator_trials("random_n3", 3, (trials / 10).max(1), &mut rng),
        covering_separator_check(seed)?,
    ];
    let inputs = json!({ "trials": trials, "seed": seed });
    Ok(VerificationReport::new("hl", inputs, checks, start.elapsed().as_secs_f64()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(resolutions: &[f64]) -> VerifyOptions {
        VerifyOptions { resolutions: resolutions.to_vec(), ..VerifyOptions::default() }
    }

    #[test]
    fn directions_are_unit() {
        for d in random_directions(3, 50, 9) {
            assert!((d.dot(&d) - 1.0).abs() < 1e-12);
        }
        assert_eq!(random_directions(2, 5, 1), random_directions(2, 5, 1));
    }

    #[test]
    fn horizontal_segment_is_a_consistent_negative() {
        let k =
            generate(&GeneratorSpec::Segment { start: vec![0.0, 0.0], end: vec![1.0, 0.0], budget: 101 }).unwrap().set;
        let r = verify_equivalent_conditions(&k, &opts(&[0.05])).unwrap();
        assert!(r.passed());
        assert!(!r.check("not_flat").unwrap().passed);
        assert!(!r.check("projections_nondegenerate").unwrap().passed);
    }

    #[test]
    fn small_hl_suite() {
        let r = verify_separator_suite(20, 7).unwrap();
        assert!(r.passed(), "{}", r.to_json());
    }

    #[test]
    fn covering_scenario_on_l_shape() {
        let k = generate(&GeneratorSpec::LShape { dim: 2, length: 1.0, budget: 101 }).unwrap().set;
        let r = verify_covering_scenario(&[k.clone(), k], &opts(&[0.1, 0.05])).unwrap();
        assert!(r.passed(), "{}", r.to_json());
    }

    #[test]
    fn cantor_depth_three() {
        let r = verify_cantor_ladder(3, &opts(&[0.04, 0.02])).unwrap();
        assert!(r.passed(), "{:?}", r.summary);
    }
}

use continuum_sums::affine::affine_dimension;
use continuum_sums::gallery::{cantor_function, generate, GeneratorSpec};
use continuum_sums::grid::{
    dilate, dilate_fft, dilate_naive, eps_density_margin, is_grid_continuum, rasterize_covering, Cube, GridGeometry,
    GridSet, Point, RasterMode, SampledSet, Semantics,
};
use continuum_sums::sums::{midpoint_iterate, sum_rasters};
use proptest::prelude::*;

fn grid_from(offset: Vec<i64>, extents: Vec<usize>, bits: &[bool]) -> GridSet {
    let geom = GridGeometry::new(1.0, offset, extents).unwrap();
    let mut g = GridSet::empty(geom, Semantics::SampleCover { density: 0.0 }).unwrap();
    for (lin, &b) in bits.iter().enumerate().take(g.geometry().cell_count()) {
        if b {
            g.set_linear(lin, true);
        }
    }
    g
}

fn grid_2d(max_side: usize) -> impl Strategy<Value = GridSet> {
    (1..=max_side, 1..=max_side, -8i64..8, -8i64..8, 0.05f64..0.95).prop_flat_map(|(w, h, ox, oy, fill)| {
        proptest::collection::vec(proptest::bool::weighted(fill), w * h)
            .prop_map(move |bits| grid_from(vec![ox, oy], vec![w, h], &bits))
    })
}

/// Face-connected cell set grown by a random walk from the origin.
fn walk(steps: Vec<u8>) -> GridSet {
    let mut pos = [0i64, 0];
    let mut cells = vec![pos.to_vec()];
    for s in steps {
        match s % 4 {
            0 => pos[0] += 1,
            1 => pos[0] -= 1,
            2 => pos[1] += 1,
            _ => pos[1] -= 1,
        }
        cells.push(pos.to_vec());
    }
    GridSet::from_cells(1.0, &cells, Semantics::Inner).unwrap()
}

fn cells(g: &GridSet) -> Vec<Vec<i64>> {
    g.occupied_cells()
}

fn centers(g: &GridSet) -> Vec<Point> {
    let geom = g.geometry();
    g.occupied_linear().map(|l| geom.cell_center(&geom.multi(l))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn fft_matches_naive(a in grid_2d(24), b in grid_2d(24)) {
        let f = dilate_fft(&a, &b).unwrap();
        let n = dilate_naive(&a, &b).unwrap();
        prop_assert_eq!(f.geometry(), n.geometry());
        prop_assert_eq!(cells(&f), cells(&n));
    }
}

proptest! {
    #[test]
    fn dilation_commutes(a in grid_2d(12), b in grid_2d(12)) {
        prop_assert_eq!(cells(&dilate(&a, &b).unwrap()), cells(&dilate(&b, &a).unwrap()));
    }

    #[test]
    fn dilation_associates(a in grid_2d(8), b in grid_2d(8), c in grid_2d(8)) {
        let left = dilate(&dilate(&a, &b).unwrap(), &c).unwrap();
        let right = dilate(&a, &dilate(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(cells(&left), cells(&right));
    }

    #[test]
    fn connected_sums_are_connected(s in proptest::collection::vec(any::<u8>(), 0..40),
                                    t in proptest::collection::vec(any::<u8>(), 0..40)) {
        let (a, b) = (walk(s), walk(t));
        prop_assert!(is_grid_continuum(&a) && is_grid_continuum(&b));
        prop_assert!(is_grid_continuum(&dilate(&a, &b).unwrap()));
    }

    #[test]
    fn margin_shrinks_as_cells_are_added(g in grid_2d(16), extra in proptest::collection::vec(any::<bool>(), 256),
                                         side in 0.0f64..6.0) {
        prop_assume!(!g.is_empty());
        let ext = g.geometry().extents().to_vec();
        let off = g.geometry().offset().to_vec();
        let center = Point::new(vec![
            off[0] as f64 + ext[0] as f64 / 2.0,
            off[1] as f64 + ext[1] as f64 / 2.0,
        ]);
        let side = side.min(ext[0] as f64).min(ext[1] as f64);
        let cube = Cube { center, side };
        let mut more = g.clone();
        for (lin, &b) in extra.iter().enumerate().take(g.geometry().cell_count()) {
            if b {
                more.set_linear(lin, true);
            }
        }
        let before = eps_density_margin(&g, &cube).unwrap();
        let after = eps_density_margin(&more, &cube).unwrap();
        prop_assert!(after <= before, "{} > {}", after, before);
    }

    #[test]
    fn affine_dimension_is_invariant(pts in proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, 3), 1..12),
                                     shift in proptest::collection::vec(-10.0f64..10.0, 3),
                                     scale in 0.5f64..4.0,
                                     rotate in 0usize..12) {
        let base: Vec<Point> = pts.iter().cloned().map(Point::new).collect();
        let d = affine_dimension(&base, 1e-9).unwrap().dim;
        let mut perm = base.clone();
        let k = rotate % perm.len();
        perm.rotate_left(k);
        let last = perm.len() - 1;
        perm.swap(0, last);
        prop_assert_eq!(affine_dimension(&perm, 1e-9).unwrap().dim, d);
        let shift = Point::new(shift);
        let moved: Vec<Point> = base.iter().map(|p| p.add(&shift)).collect();
        prop_assert_eq!(affine_dimension(&moved, 1e-9).unwrap().dim, d);
        let scaled: Vec<Point> = base.iter().map(|p| p.scale(scale)).collect();
        prop_assert_eq!(affine_dimension(&scaled, 1e-9 * scale).unwrap().dim, d);
    }

    #[test]
    fn flat_rows_stay_flat_under_midpoints(start in -5i64..5, len in 1i64..12, row in -3i64..3, steps in 1usize..6) {
        let row: Vec<Vec<i64>> = (start..start + len).map(|i| vec![i, row]).collect();
        let t = GridSet::from_cells(0.5, &row, Semantics::SampleCover { density: 0.0 }).unwrap();
        let chain = midpoint_iterate(&t, steps).unwrap();
        prop_assert_eq!(chain.interior_found_at, None);
        let d0 = affine_dimension(&centers(&chain.steps[0]), 1e-9).unwrap().dim;
        for s in &chain.steps {
            prop_assert_eq!(affine_dimension(&centers(s), 1e-9).unwrap().dim, d0);
        }
    }

    #[test]
    fn outer_sum_contains_sample_sum(r in 0.2f64..1.5, budget in 8usize..200, h in 0.02f64..0.2) {
        let c = generate(&GeneratorSpec::Circle { center: vec![0.0, 0.0], r, budget }).unwrap().set;
        let s = sum_rasters(&[c.clone(), c], h).unwrap();
        for cell in s.sample.occupied_cells() {
            prop_assert!(s.outer.contains_abs(&cell));
        }
    }

    #[test]
    fn samples_land_in_their_cells(pts in proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, 2), 1..30),
                                   h in 0.01f64..1.0) {
        let set = SampledSet::new(2, pts.into_iter().map(Point::new).collect(), 0.0).unwrap();
        let g = rasterize_covering(&set, h, RasterMode::SampleCover, 0).unwrap();
        for p in &set.points {
            let idx = g.geometry().locate(p).unwrap();
            prop_assert!(g.get(&idx));
            let lo = g.geometry().cell_lower(&idx);
            for k in 0..2 {
                prop_assert!(p[k] >= lo[k] - 1e-9 * h && p[k] <= lo[k] + h * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn cantor_function_is_monotone(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(cantor_function(lo, 40) <= cantor_function(hi, 40));
    }

    #[test]
    fn generator_specs_round_trip(depth in 0usize..8, budget in 2usize..500, r in 0.1f64..10.0) {
        for spec in [
            GeneratorSpec::CantorGraph { depth, refine: 2, budget },
            GeneratorSpec::Circle { center: vec![0.5, -0.25], r, budget },
            GeneratorSpec::LShape { dim: 3, length: r, budget },
        ] {
            let text = serde_json::to_string(&spec).unwrap();
            prop_assert_eq!(serde_json::from_str::<GeneratorSpec>(&text).unwrap(), spec);
        }
    }
}

mod common;

use adawass::curves::dyadic_grid;
use adawass::{aw_distance, geodesic, io, path_law, quantize_paths, FlowOptions, GridCurve};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn plan_round_trip() {
    let (x, y) = common::eps_pair(0.1);
    let (_, plan) = aw_distance(&x, &y, 2.0).unwrap();
    let s = io::plan_to_json(&plan);
    let back = io::plan_from_json(&s).unwrap().into_plan(x, y).unwrap();
    assert_eq!(back.leaf_pairs(), plan.leaf_pairs());
    assert_eq!(back.value().to_bits(), plan.value().to_bits());
    assert_eq!(io::plan_to_json(&back), s);
}

#[test]
fn flow_round_trip() {
    let fam = common::seeded_family(21, 2, 3, 2, 2);
    let f = geodesic(&fam[0], &fam[1], 2.0, &dyadic_grid(2), FlowOptions::default()).unwrap();
    let s = io::flow_to_json(&f);
    let g = io::flow_from_json(&s).unwrap();
    assert_eq!(g.grid(), f.grid());
    for k in 0..f.grid().len() {
        assert_eq!(g.labels(k), f.labels(k));
    }
    assert_eq!(io::flow_to_json(&g), s);
}

#[test]
fn curve_round_trip() {
    let fam = common::seeded_family(5, 3, 2, 1, 3);
    let plans = vec![aw_distance(&fam[0], &fam[1], 2.0).unwrap().1, aw_distance(&fam[1], &fam[2], 2.0).unwrap().1];
    let c = GridCurve::new(vec![0.0, 0.3, 1.0], fam, 2.0).unwrap().with_plans(plans).unwrap();
    let s = io::curve_to_json(&c);
    let d = io::curve_from_json(&s, 1.0).unwrap();
    assert_eq!(d.p(), 2.0);
    assert_eq!(d.processes(), c.processes());
    assert_eq!(io::curve_to_json(&d), s);
    assert!(io::curve_from_json("{\"grid\":[0,1],\"processes\":[]}", 2.0).is_err());
}

/// Best 2-partition of sorted 1D points into a prefix and a suffix.
fn exhaustive_two_means(xs: &[f64]) -> f64 {
    let sse = |s: &[f64]| {
        let m = s.iter().sum::<f64>() / s.len() as f64;
        s.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
    };
    (1..xs.len()).map(|c| sse(&xs[..c]) + sse(&xs[c..])).fold(f64::INFINITY, f64::min)
}

#[test]
fn one_step_quantizer_matches_exhaustive_two_means() {
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut xs: Vec<f64> = (0..100)
            .map(|i| if i % 3 == 0 { rng.gen::<f64>() } else { 2.0 + rng.gen::<f64>() * 1.5 })
            .collect();
        let samples: Vec<Vec<Vec<f64>>> = xs.iter().map(|&v| vec![vec![v]]).collect();
        let t = quantize_paths(&samples, &[2], seed).unwrap();
        let law = path_law(&t);
        assert_eq!(law.atoms.len(), 2);
        // within-cluster SSE from the tree: total SSE minus between-cluster part
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let total: f64 = xs.iter().map(|v| (v - mean) * (v - mean)).sum();
        let between: f64 =
            law.atoms.iter().map(|a| a.mass * n * (a.path[0][0] - mean).powi(2)).sum();
        xs.sort_by(f64::total_cmp);
        let best = exhaustive_two_means(&xs);
        assert!((total - between - best).abs() <= 1e-9 * total, "seed {seed}");
    }
}

#[test]
fn quantizer_is_seed_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let samples: Vec<Vec<Vec<f64>>> =
        (0..80).map(|_| vec![vec![rng.gen()], vec![rng.gen(), rng.gen()]]).collect();
    let a = io::tree_to_json(&quantize_paths(&samples, &[2, 3], 4).unwrap());
    let b = io::tree_to_json(&quantize_paths(&samples, &[2, 3], 4).unwrap());
    assert_eq!(a, b);
}

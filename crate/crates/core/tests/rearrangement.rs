mod common;

use common::{random_function, random_pl, rng};
use graphnls::graph::lp_norm;
use graphnls::rearrangement::{
    level_measure, pl_kinetic, pl_lp_norm, polya_szego_holds, read_pl_csv, rearrange, report, tent, write_pl_csv,
    PLEdge, PLGraphFunction,
};
use graphnls::{GridSpec, StarGraphParams};
use num_complex::Complex64;
use proptest::prelude::*;

fn pl(edges: Vec<(Vec<f64>, Vec<f64>)>) -> PLGraphFunction {
    PLGraphFunction::new(edges.into_iter().map(|(x, y)| PLEdge::new(x, y).unwrap()).collect()).unwrap()
}

fn on_edge_zero(n: usize, x: Vec<f64>, y: Vec<f64>) -> PLGraphFunction {
    let mut edges = vec![(x, y)];
    edges.extend((1..n).map(|_| (vec![0.0], vec![0.0])));
    pl(edges)
}

#[test]
fn tent_level_measure() {
    let f = on_edge_zero(3, vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0]);
    assert_eq!(level_measure(&f, 0.5).unwrap().lambda, 1.0);
    let z = pl(vec![(vec![0.0], vec![0.0]); 3]);
    let m = level_measure(&z, 0.3).unwrap();
    assert_eq!((m.lambda, m.mu_strict), (0.0, 0.0));
    assert!(level_measure(&f, -1.0).is_err());
}

#[test]
fn plateau_level_measure() {
    let f = on_edge_zero(2, vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 1.0, 1.0, 0.0]);
    let m = level_measure(&f, 1.0).unwrap();
    assert_eq!(m.lambda, 1.0);
    assert_eq!(m.mu_strict, 0.0);
}

#[test]
fn tent_profile_and_sharpness() {
    for n in [2, 3, 5] {
        let f = tent(n);
        let star = rearrange(&f).unwrap();
        let nf = n as f64;
        for e in &star.edges {
            assert_eq!(e, &star.edges[0]);
        }
        for k in 0..=20 {
            let x = k as f64 / 20.0 * 2.0 / nf;
            assert!((star.edges[0].eval(x) - (1.0 - nf / 2.0 * x)).abs() < 1e-15);
        }
        assert_eq!(star.edges[0].eval(2.0 / nf + 0.1), 0.0);
        assert_eq!(pl_kinetic(&f), 2.0);
        assert!((pl_kinetic(&star) - nf * nf / 2.0).abs() < 1e-12);
        assert!(polya_szego_holds(pl_kinetic(&f), pl_kinetic(&star), n));
    }
}

#[test]
fn symmetric_decreasing_is_fixed() {
    let e = (vec![0.0, 0.5, 1.25, 3.0], vec![2.0, 1.5, 0.25, 0.0]);
    let f = pl(vec![e.clone(), e.clone(), e]);
    let star = rearrange(&f).unwrap();
    assert_eq!(star, f);
    assert_eq!(pl_kinetic(&star), pl_kinetic(&f));
}

#[test]
fn two_tents() {
    let f = pl(vec![
        (vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0]),
        (vec![0.0, 0.5, 1.5, 2.5], vec![0.0, 0.0, 2.0, 0.0]),
        (vec![0.0], vec![0.0]),
    ]);
    let star = rearrange(&f).unwrap();
    assert_eq!(star.edges[0].y[0], 2.0);
    for k in 0..20 {
        let s = 0.05 + 0.1 * k as f64;
        let (a, b) = (level_measure(&f, s).unwrap(), level_measure(&star, s).unwrap());
        assert!((a.lambda - b.lambda).abs() < 1e-14, "s = {s}");
    }
    // λ(s) = 2(1 − s) + 2(1 − s/2) on (0, 1) and 2 − s on [1, 2]
    let g = &star.edges[0];
    for k in 1..10 {
        let s = 0.1 * k as f64;
        let lam = 2.0 * (1.0 - s) + 2.0 * (1.0 - s / 2.0);
        assert!((g.eval(lam / 3.0) - s).abs() < 1e-14);
    }
}

#[test]
fn lp_norm_examples() {
    let f = on_edge_zero(3, vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0]);
    assert!((pl_lp_norm(&f, 2.0).unwrap().powi(2) - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(pl_lp_norm(&pl(vec![(vec![0.0], vec![0.0]); 2]), 3.0).unwrap(), 0.0);
    assert!(pl_lp_norm(&f, 0.5).is_err());
}

#[test]
fn report_and_csv() {
    let f = tent(3);
    let star = rearrange(&f).unwrap();
    let r = report(&f, &star).unwrap();
    assert_eq!(r.kinetic_after, 4.5);
    assert!(r.n_over_2_bound_satisfied);
    let mut buf = Vec::new();
    write_pl_csv(&star, &mut buf).unwrap();
    assert_eq!(read_pl_csv(buf.as_slice()).unwrap(), star);
}

#[test]
fn sign_changes_use_the_modulus() {
    let f = on_edge_zero(2, vec![0.0, 1.0, 2.0, 3.0], vec![1.0, -1.0, 0.5, 0.0]);
    let star = rearrange(&f).unwrap();
    for p in [1.0, 2.0, 4.0] {
        assert!((pl_lp_norm(&f, p).unwrap() - pl_lp_norm(&star, p).unwrap()).abs() < 1e-14);
    }
    assert!(star.edges[0].y.iter().all(|&y| y >= 0.0));
}

/// `μ(g(t)) ≤ N t ≤ λ(g(t))` for `0 ≤ N t ≤ μ(0)`.
fn sandwich_holds(f: &PLGraphFunction, star: &PLGraphFunction, samples: usize) -> bool {
    let n = f.n_edges() as f64;
    let top = level_measure(f, 0.0).unwrap().mu_strict;
    (0..samples).all(|k| {
        let t = top / n * k as f64 / samples as f64;
        let g = star.edges[0].eval(t);
        let m = level_measure(f, g).unwrap();
        let slack = 1e-12 * (1.0 + top);
        m.mu_strict <= n * t + slack && n * t <= m.lambda + slack
    })
}

#[test]
fn level_sandwich_on_corpus() {
    let mut r = rng(41);
    for i in 0..100 {
        let f = random_pl(&mut r, [2, 3, 5][i % 3]);
        let star = rearrange(&f).unwrap();
        assert!(sandwich_holds(&f, &star, 50), "sample {i}");
    }
}

#[test]
fn level_measures_of_converging_sequence() {
    // f has a plateau at height 1 on [1, 2]; f_n tilts it by 1/n
    let f = on_edge_zero(3, vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 1.0, 1.0, 0.0]);
    let fs = |n: f64| on_edge_zero(3, vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 1.0, 1.0 + 1.0 / n, 0.0]);
    let eps = 1e-12;
    for s in [0.25, 0.5, 0.999, 1.0, 1.001] {
        let m = level_measure(&f, s).unwrap();
        for n in [1e4, 1e6] {
            let lam = level_measure(&fs(n), s).unwrap().lambda;
            assert!(m.mu_strict - eps <= lam && lam <= m.lambda + 1.0 / n + eps, "s {s} n {n}: {lam} vs {m:?}");
        }
    }
}

#[test]
fn complex_sampled_function() {
    let p = StarGraphParams::new(3, -1.0, 1.0).unwrap();
    let mut r = rng(9);
    for dx in [0.02, 0.01] {
        let f = random_function(&mut r, p, GridSpec::with_spacing(12.0, dx).unwrap());
        let modulus = PLGraphFunction::from_samples(&f);
        let star = rearrange(&modulus).unwrap();
        let l2 = lp_norm(&f, 2.0).unwrap();
        assert!((pl_lp_norm(&star, 2.0).unwrap() - l2).abs() < 1e-3 * l2);
        assert!(pl_kinetic(&star) <= 9.0 / 4.0 * f.kinetic() * (1.0 + 1e-12));
        assert!(pl_kinetic(&modulus) <= f.kinetic() * (1.0 + 1e-12));
    }
    let phase = random_function(&mut r, p, GridSpec::new(8.0, 400).unwrap());
    let twisted = phase.map(|z| z * Complex64::from_polar(1.0, 3.0 * z.re));
    let (a, b) = (PLGraphFunction::from_samples(&twisted), PLGraphFunction::from_samples(&phase));
    for (ea, eb) in a.edges.iter().zip(&b.edges) {
        assert_eq!(ea.x, eb.x);
        assert!(ea.y.iter().zip(&eb.y).all(|(u, v)| (u - v).abs() <= 1e-15 * (1.0 + v.abs())));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]
    #[test]
    fn corpus_properties(seed in any::<u64>(), which in 0usize..3) {
        let n = [2, 3, 5][which];
        let f = random_pl(&mut rng(seed), n);
        let star = rearrange(&f).unwrap();
        for p in [1.0, 2.0, 4.0] {
            let (a, b) = (pl_lp_norm(&f, p).unwrap(), pl_lp_norm(&star, p).unwrap());
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
        for s in f.levels() {
            let (a, b) = (level_measure(&f, s).unwrap(), level_measure(&star, s).unwrap());
            prop_assert!((a.lambda - b.lambda).abs() <= 1e-12 * a.lambda.max(1.0));
        }
        prop_assert!(polya_szego_holds(pl_kinetic(&f), pl_kinetic(&star), n));
        let g = &star.edges[0];
        prop_assert!(g.y.windows(2).all(|w| w[1] <= w[0]));
    }
}

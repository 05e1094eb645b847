mod common;

use common::{simpson, soliton};
use graphnls::functionals::{d0, evaluate};
use graphnls::graph::lp_norm;
use graphnls::stationary::{
    build_state, escape_demo, kirchhoff_state, residual, residual_parts, soliton_profile, state_action, state_l2sq,
    vk_slope, StationarySpec,
};
use graphnls::{Error, GraphFunction, GridSpec, StarGraphParams};

fn params(n: usize, alpha: f64, mu: f64) -> StarGraphParams {
    StarGraphParams::new(n, alpha, mu).unwrap()
}

/// `∫_{±a}^∞ φ^q` by Simpson quadrature; `sign = +1` for a bump edge.
fn edge_integral(q: f64, omega: f64, mu: f64, a: f64, bump: bool) -> f64 {
    let from = if bump { -a } else { a };
    simpson(|x| soliton(x, omega, mu).powf(q), from, from + 60.0 / omega.sqrt(), 300_000)
}

/// `S = μ/(2μ+2)·‖Ψ‖_{2μ+2}^{2μ+2}` on the Nehari manifold, assembled edge by edge.
fn action_oracle(s: &StationarySpec) -> f64 {
    let mu = s.params.mu;
    let q = 2.0 * mu + 2.0;
    let bump = edge_integral(q, s.omega, mu, s.shift, true);
    let tail = edge_integral(q, s.omega, mu, s.shift, false);
    let (j, n) = (s.j as f64, s.params.edges as f64);
    mu / q * (j * bump + (n - j) * tail)
}

#[test]
fn soliton_profile_values() {
    assert!((soliton_profile(0.0, 1.0, 1.0) - 2f64.sqrt()).abs() < 1e-15);
    assert!((soliton_profile(0.0, 4.0, 2.0) - 12f64.powf(0.25)).abs() < 1e-14);
    for x in [0.3, 1.7, 5.0] {
        assert_eq!(soliton_profile(x, 1.3, 0.7), soliton_profile(-x, 1.3, 0.7));
    }
    let tail: Vec<f64> = (0..40).map(|k| soliton_profile(k as f64 * 0.5, 1.0, 1.0)).collect();
    assert!(tail.windows(2).all(|w| w[1] < w[0]));
    assert!(soliton_profile(60.0, 1.0, 1.0) < 1e-20);
}

#[test]
fn ground_state_shape() {
    let s = StationarySpec::ground(params(3, -1.0, 1.0), 1.0).unwrap();
    assert!((s.shift - (1.0f64 / 3.0).atanh()).abs() < 1e-14);
    assert!(s.vertex_equation_defect().abs() < 1e-12);
    let f = build_state(&s, &s.fitted_grid(0.01, 0.0).unwrap()).unwrap();
    assert_eq!(f.edge(0), f.edge(1));
    assert_eq!(f.edge(1), f.edge(2));
    assert!(f.edge(0).windows(2).all(|w| w[1].re <= w[0].re));
}

#[test]
fn excited_state_shape() {
    let s = StationarySpec::new(params(5, -1.0, 1.0), 1, 1.0).unwrap();
    assert!((s.shift - (1.0f64 / 3.0).atanh()).abs() < 1e-14);
    assert_eq!(s.signs, vec![1, -1, -1, -1, -1]);
    let f = build_state(&s, &s.fitted_grid(0.01, 0.0).unwrap()).unwrap();
    // the bump rises to the soliton peak at x = a
    let k = (s.shift / 0.01).round() as usize;
    let peak = f.edge(0).iter().map(|z| z.re).fold(0.0, f64::max);
    assert!((f.edge(0)[k].re - peak).abs() < 1e-4);
    assert!(f.edge(0)[1].re > f.edge(0)[0].re && f.edge(1)[1].re < f.edge(1)[0].re);
}

#[test]
fn admissibility_errors_name_the_bound() {
    let err = StationarySpec::new(params(3, -1.0, 1.0), 1, 0.5).unwrap_err();
    assert!(matches!(err, Error::Admissibility { j: 1, bound, .. } if bound == 1.0));
    assert!(err.to_string().contains("alpha^2/(N-2j)^2 = 1"), "{err}");
    assert!(StationarySpec::new(params(3, -1.0, 1.0), 1, 1.0).is_err());
    assert!(StationarySpec::new(params(4, -1.0, 1.0), 2, 5.0).is_err());
}

#[test]
fn closed_form_actions_match_quadrature() {
    let cases = [
        (3, -1.0, 1.0, 1.0, 0),
        (3, -1.0, 1.0, 1.21, 1),
        (5, -1.0, 0.5, 2.0, 2),
        (4, -0.5, 2.0, 0.8, 1),
        (3, 0.7, 1.5, 1.0, 2),
    ];
    for (n, alpha, mu, omega, j) in cases {
        let s = StationarySpec::new(params(n, alpha, mu), j, omega).unwrap();
        let oracle = action_oracle(&s);
        assert!((state_action(&s) - oracle).abs() < 1e-9 * oracle, "{n} {alpha} {mu} {omega} {j}");
        let l2 = edge_integral(2.0, omega, mu, s.shift, true) * j as f64
            + edge_integral(2.0, omega, mu, s.shift, false) * (n - j) as f64;
        assert!((state_l2sq(&s) - l2).abs() < 1e-9 * l2);
    }
    let s = StationarySpec::ground(params(3, -1.0, 1.0), 1.0).unwrap();
    assert!((state_action(&s) - 28.0 / 27.0).abs() < 1e-12);
    assert!((state_l2sq(&s) - 4.0).abs() < 1e-12);
}

#[test]
fn sampled_action_converges_quadratically() {
    let s = StationarySpec::new(params(4, -1.0, 1.0), 1, 1.5).unwrap();
    let exact = state_action(&s);
    let err: Vec<f64> = [0.04, 0.02, 0.01]
        .iter()
        .map(|&dx| {
            (evaluate(&build_state(&s, &s.fitted_grid(dx, 0.0).unwrap()).unwrap(), 1.5).unwrap().action - exact).abs()
        })
        .collect();
    for w in err.windows(2) {
        assert!((3.5..=4.5).contains(&(w[0] / w[1])), "{err:?}");
    }
}

#[test]
fn ordering_at_larger_frequency() {
    let p = params(3, -1.0, 1.0);
    let s0 = StationarySpec::new(p, 0, 1.21).unwrap();
    let s1 = StationarySpec::new(p, 1, 1.21).unwrap();
    assert!(state_action(&s0) < state_action(&s1));
    let grid = s1.fitted_grid(0.005, 0.0).unwrap();
    let a0 = evaluate(&build_state(&s0, &grid).unwrap(), 1.21).unwrap().action;
    let a1 = evaluate(&build_state(&s1, &grid).unwrap(), 1.21).unwrap().action;
    assert!(a0 < a1);
}

#[test]
fn action_increases_with_bumps() {
    for n in [3, 4, 5, 7] {
        for mu in [0.5, 1.0, 2.0] {
            let p = params(n, -1.0, mu);
            for j in 0..(n - 1) / 2 {
                let room = (n - 2 * j - 2) as f64;
                for omega in [1.05 / (room * room), 1.0, 3.0] {
                    let (Ok(a), Ok(b)) = (StationarySpec::new(p, j, omega), StationarySpec::new(p, j + 1, omega))
                    else {
                        continue;
                    };
                    assert!(state_action(&a) < state_action(&b), "N {n} mu {mu} j {j} omega {omega}");
                }
            }
        }
    }
}

#[test]
fn every_admissible_state_is_on_the_nehari_manifold() {
    for (n, alpha, mu, omega, j) in [
        (3, -1.0, 1.0, 1.0, 0),
        (5, -1.0, 1.0, 1.0, 1),
        (5, -1.0, 2.0, 2.0, 2),
        (4, 1.0, 1.0, 1.0, 3),
        (3, 0.5, 0.5, 1.0, 3),
    ] {
        let s = StationarySpec::new(params(n, alpha, mu), j, omega).unwrap();
        let f = build_state(&s, &s.fitted_grid(1e-3, 0.0).unwrap()).unwrap();
        let r = evaluate(&f, omega).unwrap();
        assert!(r.nehari.abs() < 1e-5, "{n} {alpha} {mu} {omega} {j}: {}", r.nehari);
    }
}

#[test]
fn kirchhoff_states() {
    let grid = GridSpec::with_spacing(30.0, 1e-3).unwrap();
    let odd = kirchhoff_state(3, 1.0, 1.0, 0.0, &grid).unwrap();
    let r = evaluate(&odd, 1.0).unwrap();
    assert!((r.kirchhoff_action - 2.0).abs() < 1e-5, "{}", r.kirchhoff_action);
    assert!((odd.vertex().re - 2f64.sqrt()).abs() < 1e-15);
    let err = kirchhoff_state(3, 1.0, 1.0, 0.4, &grid).unwrap_err();
    assert!(err.to_string().contains("unique"), "{err}");

    let four = kirchhoff_state(4, 1.0, 1.0, 1.5, &grid).unwrap();
    assert!(evaluate(&four, 1.0).unwrap().kirchhoff_nehari.abs() < 1e-6);
    assert!((four.edge(0)[1500].re - 2f64.sqrt()).abs() < 1e-12);

    let coarse = GridSpec::with_spacing(30.0, 0.01).unwrap();
    let actions: Vec<f64> = [0.0, 0.7, 2.3]
        .iter()
        .map(|&a| evaluate(&kirchhoff_state(2, 1.0, 1.0, a, &coarse).unwrap(), 1.0).unwrap().kirchhoff_action)
        .collect();
    assert!(actions.iter().all(|a| (a - actions[0]).abs() < 1e-8), "{actions:?}");
}

#[test]
fn ground_branch_bifurcates_from_zero() {
    let p = params(3, -1.0, 1.0);
    let bound = p.omega_threshold();
    let norms: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&e| state_l2sq(&StationarySpec::ground(p, bound * (1.0 + e)).unwrap()))
        .collect();
    assert!(norms.windows(2).all(|w| w[1] < w[0]), "{norms:?}");
    assert!(norms[3] < 1e-2);
}

#[test]
fn repulsive_vertex() {
    assert!(StationarySpec::ground(params(3, 1.0, 1.0), 1.0).is_err());
    assert!(StationarySpec::new(params(4, 1.0, 1.0), 2, 1.0).is_err());
    for (n, j) in [(3, 2), (3, 3), (4, 3), (4, 4), (5, 3)] {
        let s = StationarySpec::new(params(n, 1.0, 1.0), j, 2.0).unwrap();
        assert!(s.shift > 0.0);
        assert!(s.signs.iter().map(|&e| e as i64).sum::<i64>() > 0);
        assert!(s.vertex_equation_defect().abs() < 1e-12);
        let f = build_state(&s, &s.fitted_grid(1e-3, 0.0).unwrap()).unwrap();
        assert!(evaluate(&f, 2.0).unwrap().nehari.abs() < 1e-5);
    }
}

#[test]
fn vk_slope_values() {
    assert!((vk_slope(1.0, &params(3, -1.0, 1.0)).unwrap() - 3.0).abs() < 1e-12);
    for (n, alpha, omega) in [(3, -1.0, 0.2), (4, -2.0, 0.3), (5, -0.3, 4.0), (3, -2.9, 1.0)] {
        assert!(vk_slope(omega, &params(n, alpha, 1.0)).unwrap() > 0.0);
    }
    let p = params(3, -1.0, 3.0);
    assert!(vk_slope(0.3, &p).unwrap() > 0.0 && vk_slope(2.0, &p).unwrap() < 0.0);
    assert!(matches!(vk_slope(0.1, &params(3, -1.0, 1.0)), Err(Error::Admissibility { .. })));
}

#[test]
fn vk_slope_matches_discrete_mass_derivative() {
    for (n, alpha, mu, omega) in [(3, -1.0, 1.0, 1.0), (4, -1.0, 2.0, 0.8), (5, -2.0, 0.5, 1.5)] {
        let p = params(n, alpha, mu);
        let grid = GridSpec::with_spacing(40.0, 0.005).unwrap();
        let dw = 1e-3;
        let mass = |w: f64| {
            lp_norm(&build_state(&StationarySpec::ground(p, w).unwrap(), &grid).unwrap(), 2.0).unwrap().powi(2)
        };
        let numeric = (mass(omega + dw) - mass(omega - dw)) / (2.0 * dw);
        let analytic = vk_slope(omega, &p).unwrap();
        assert!(((numeric - analytic) / analytic).abs() < 1e-5, "{numeric} vs {analytic}");
    }
}

#[test]
fn residual_examples() {
    let s = StationarySpec::ground(params(3, -1.0, 1.0), 1.0).unwrap();
    let r1 = residual(&build_state(&s, &s.fitted_grid(0.01, 0.0).unwrap()).unwrap(), 1.0);
    let r2 = residual(&build_state(&s, &s.fitted_grid(0.005, 0.0).unwrap()).unwrap(), 1.0);
    assert!(r1 < 5e-3);
    assert!((3.5..=4.5).contains(&(r1 / r2)), "{r1} {r2}");
    let z = GraphFunction::zeros(params(3, -1.0, 1.0), GridSpec::new(10.0, 100).unwrap());
    assert_eq!(residual(&z, 1.0), 0.0);
    // unit-mass Gaussian on one edge, away from the vertex
    let norm = (2.0 / std::f64::consts::PI).powf(0.25);
    let bump = GraphFunction::from_real_fn(params(3, -1.0, 1.0), GridSpec::new(20.0, 2000).unwrap(), |j, x| {
        if j == 0 {
            norm * (-(x - 8.0).powi(2)).exp()
        } else {
            0.0
        }
    })
    .unwrap();
    assert!(residual(&bump, 1.0) > 0.1);
    assert!(residual_parts(&bump, 1.0).vertex < 1e-12);
}

#[test]
fn escaping_sequence() {
    let grid = GridSpec::with_spacing(30.0, 0.005).unwrap();
    let target = d0(1.0, 1.0).unwrap();
    let e10 = escape_demo(10, 1.0, 1.0, 3, &grid).unwrap();
    assert!((e10.reduced_action - target).abs() < 1e-4);
    assert!((e10.delta - 1.0).abs() < 1e-4);
    let gap = |n| (escape_demo(n, 1.0, 1.0, 3, &grid).unwrap().reduced_action - target).abs();
    assert!(gap(6) < gap(2));
    assert!(escape_demo(25, 1.0, 1.0, 3, &grid).is_err());
    // the Kirchhoff functionals ignore the edge count beyond the carrying edge
    let five = escape_demo(10, 1.0, 1.0, 5, &grid).unwrap();
    assert_eq!(five.reduced_action, e10.reduced_action);
}

#![allow(dead_code)]

use std::io::Write;

use graphnls::rearrangement::{PLEdge, PLGraphFunction};
use graphnls::{GraphFunction, GridSpec, StarGraphParams};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One line per check on the uncaptured stderr handle, so it shows up in every run.
pub fn verdict(label: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "{label}: {tag} {detail}");
}

pub fn exp_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", items.join(", "))
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

/// `[(μ+1)ω]^{1/(2μ)} sech^{1/μ}(μ√ω x)`, written out independently of the library.
pub fn soliton(x: f64, omega: f64, mu: f64) -> f64 {
    ((mu + 1.0) * omega).powf(0.5 / mu) * (1.0 / (mu * omega.sqrt() * x).cosh()).powf(1.0 / mu)
}

/// Real root of `c³ − 3c + 2/3` in `(0, 1)` by Newton from `c = 0`.
pub fn cubic_root() -> f64 {
    let mut c: f64 = 0.0;
    for _ in 0..60 {
        c -= (c * c * c - 3.0 * c + 2.0 / 3.0) / (3.0 * c * c - 3.0);
    }
    c
}

/// Random vertex-continuous PL function with support in `[0, 4]` on every edge.
pub fn random_pl(rng: &mut ChaCha8Rng, edges: usize) -> PLGraphFunction {
    let v: f64 = rng.random_range(-1.0..1.0);
    let list = (0..edges)
        .map(|_| {
            let k = rng.random_range(1..7usize);
            let mut x: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..4.0)).collect();
            x.push(0.0);
            x.sort_by(f64::total_cmp);
            x.dedup();
            let end = x.last().unwrap() + rng.random_range(0.05..1.0);
            x.push(end);
            let mut y: Vec<f64> = x.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
            y[0] = v;
            *y.last_mut().unwrap() = 0.0;
            PLEdge::new(x, y).unwrap()
        })
        .collect();
    PLGraphFunction::new(list).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `v e^{−b₀x} + Σ_k c_{jk} x e^{−b_k x}` with complex coefficients.
pub fn random_function(r: &mut ChaCha8Rng, p: StarGraphParams, grid: GridSpec) -> GraphFunction {
    let v = Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
    let b0 = r.random_range(0.5..3.0);
    let terms: Vec<Vec<(Complex64, f64)>> = (0..p.edges)
        .map(|_| {
            (0..3)
                .map(|_| {
                    (Complex64::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0)), r.random_range(0.5..4.0))
                })
                .collect()
        })
        .collect();
    GraphFunction::from_fn(p, grid, |j, x| {
        v * (-b0 * x).exp() + terms[j].iter().map(|&(a, b)| a * (x * (-b * x).exp())).sum::<Complex64>()
    })
    .unwrap()
}

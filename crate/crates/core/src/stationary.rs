//! Closed-form standing waves of the δ-vertex and Kirchhoff star graph.
//!
//! Every stationary state is built from the half-line soliton
//! `φ_s(x) = [(μ+1)ω]^{1/(2μ)} sech^{1/μ}(μ√ω x)`. A state with `j` bumps puts
//! `φ_s(x − a)` on edges `0..j` and `φ_s(x + a)` on the remaining `N − j` edges
//! (tails); the shift solves `tanh(μ√ω a)·(2j − N) = α/√ω`.

use num_complex::Complex64;
use serde::Serialize;

use crate::discrete::{stiffness, weight_vector};
use crate::functionals::{pieces, pow_modsq, project, Coupling};
use crate::graph::{GraphFunction, GridSpec, StarGraphParams};
use crate::quad::{bisect, sech_tail};
use crate::starmatrix::StarMatrix;
use crate::{Error, Result};

/// Largest admissible `φ_s` value at the truncation point.
pub const TRUNCATION_TOL: f64 = 1e-10;

pub fn soliton_profile(x: f64, omega: f64, mu: f64) -> f64 {
    let amp = ((mu + 1.0) * omega).powf(0.5 / mu);
    let z = (mu * omega.sqrt() * x).abs();
    // sech^{1/μ}(z) = (2e^{-z}/(1 + e^{-2z}))^{1/μ}, overflow-free
    let e = (-z).exp();
    amp * (2.0 * e / (1.0 + e * e)).powf(1.0 / mu)
}

/// Derivative of [`soliton_profile`] in `x`.
pub fn soliton_slope(x: f64, omega: f64, mu: f64) -> f64 {
    -omega.sqrt() * (mu * omega.sqrt() * x).tanh() * soliton_profile(x, omega, mu)
}

/// One branch of stationary states: `j` bumps at frequency `ω`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationarySpec {
    pub j: usize,
    pub omega: f64,
    /// Vertex shift `a_j`; bumps sit at `x = a_j`, tails at `x = −a_j`.
    pub shift: f64,
    /// `ε_i = +1` on bump edges, `−1` on tail edges.
    pub signs: Vec<i8>,
    pub params: StarGraphParams,
}

impl StationarySpec {
    /// Resolves the shift of the `j`-bump branch.
    ///
    /// For `α < 0` the admissible range is `0 ≤ j ≤ ⌊(N−1)/2⌋`; for `α > 0`
    /// it is `⌊N/2⌋ + 1 ≤ j ≤ N` (more bumps than tails, positive shift).
    /// For `α = 0` every `j` gives the unshifted state of half-solitons.
    pub fn new(params: StarGraphParams, j: usize, omega: f64) -> Result<Self> {
        params.validate()?;
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::domain(format!("omega must be positive, got {omega}")));
        }
        let n = params.edges;
        let alpha = params.alpha;
        if j > n {
            return Err(Error::domain(format!("j = {j} exceeds N = {n}")));
        }
        let imbalance = 2 * j as i64 - n as i64;
        if alpha < 0.0 && imbalance >= 0 {
            return Err(Error::domain(format!(
                "attractive vertex needs more tails than bumps: j <= {} for N = {n}",
                (n - 1) / 2
            )));
        }
        if alpha > 0.0 && imbalance <= 0 {
            return Err(Error::domain(format!(
                "repulsive vertex needs more bumps than tails: j >= {} for N = {n}",
                n / 2 + 1
            )));
        }
        let signs: Vec<i8> = (0..n).map(|i| if i < j { 1 } else { -1 }).collect();
        let shift = if alpha == 0.0 {
            0.0
        } else {
            let bound = alpha * alpha / (imbalance * imbalance) as f64;
            if omega <= bound {
                return Err(Error::Admissibility { j, omega, bound });
            }
            let target = alpha / (omega.sqrt() * imbalance as f64);
            let rate = params.mu * omega.sqrt();
            if target.abs() < 1.0 - 1e-12 {
                target.atanh() / rate
            } else {
                // near the admissibility boundary: solve tanh(rate·a) = target directly
                let hi = 40.0 / rate;
                bisect(|a| (rate * a).tanh() - target, 0.0, hi, 1e-15 * hi).ok_or(Error::Admissibility {
                    j,
                    omega,
                    bound,
                })?
            }
        };
        Ok(StationarySpec { j, omega, shift, signs, params })
    }

    /// The `j = 0` branch.
    pub fn ground(params: StarGraphParams, omega: f64) -> Result<Self> {
        StationarySpec::new(params, 0, omega)
    }

    /// `tanh(μ√ω a)`, the lower limit of the tail integrals.
    pub fn tanh_shift(&self) -> f64 {
        (self.params.mu * self.omega.sqrt() * self.shift).tanh()
    }

    /// Defect of the vertex equation `tanh(μ√ω a)·Σε − α/√ω`.
    pub fn vertex_equation_defect(&self) -> f64 {
        let sum: i64 = self.signs.iter().map(|&s| s as i64).sum();
        self.tanh_shift() * sum as f64 - self.params.alpha / self.omega.sqrt()
    }

    /// Edge length beyond which every edge profile is below `tol`.
    pub fn required_length(&self, tol: f64) -> f64 {
        let (omega, mu) = (self.omega, self.params.mu);
        let amp = ((mu + 1.0) * omega).powf(0.5 / mu) * 2f64.powf(1.0 / mu);
        let decay = (amp / tol).ln().max(0.0) / omega.sqrt();
        let bump = if self.j > 0 { self.shift.max(0.0) } else { 0.0 };
        decay + bump
    }

    pub fn fitted_grid(&self, dx: f64, min_length: f64) -> Result<GridSpec> {
        let length = min_length.max(self.required_length(TRUNCATION_TOL)).ceil();
        GridSpec::with_spacing(length, dx)
    }
}

fn sampled(params: StarGraphParams, grid: GridSpec, omega: f64, bump_shift: &[f64]) -> Result<GraphFunction> {
    let mu = params.mu;
    let vertex = soliton_profile(bump_shift[0], omega, mu);
    GraphFunction::from_fn_with_vertex(params, grid, Complex64::new(vertex, 0.0), |j, x| {
        Complex64::new(soliton_profile(x - bump_shift[j], omega, mu), 0.0)
    })
}

/// Samples the stationary state of `spec` on `grid`.
pub fn build_state(spec: &StationarySpec, grid: &GridSpec) -> Result<GraphFunction> {
    grid.validate()?;
    let need = spec.required_length(TRUNCATION_TOL);
    if grid.length < need {
        return Err(Error::domain(format!(
            "grid length {} too short: profile exceeds {TRUNCATION_TOL:e} up to x = {need:.3}",
            grid.length
        )));
    }
    let offsets: Vec<f64> = spec.signs.iter().map(|&s| s as f64 * spec.shift).collect();
    sampled(spec.params, *grid, spec.omega, &offsets)
}

fn soliton_constant(omega: f64, mu: f64) -> f64 {
    (mu + 1.0).powf(1.0 + 1.0 / mu) / mu * omega.powf(1.0 / mu + 0.5)
}

/// `‖Ψ‖_{2μ+2}^{2μ+2}` of the state in closed form.
pub fn state_power(spec: &StationarySpec) -> f64 {
    let mu = spec.params.mu;
    let t = spec.tanh_shift();
    let p = 1.0 / mu;
    let (bumps, tails) = (spec.j as f64, (spec.params.edges - spec.j) as f64);
    soliton_constant(spec.omega, mu) * (bumps * sech_tail(-t, p) + tails * sech_tail(t, p))
}

/// Action `S_ω[Ψ_{ω,j}] = μ/(2μ+2)·‖Ψ‖_{2μ+2}^{2μ+2}` in closed form.
pub fn state_action(spec: &StationarySpec) -> f64 {
    let mu = spec.params.mu;
    mu / (2.0 * mu + 2.0) * state_power(spec)
}

/// `‖Ψ_{ω,j}‖²` in closed form.
pub fn state_l2sq(spec: &StationarySpec) -> f64 {
    let (omega, mu) = (spec.omega, spec.params.mu);
    let t = spec.tanh_shift();
    let p = 1.0 / mu - 1.0;
    let c = ((mu + 1.0) * omega).powf(1.0 / mu) / (mu * omega.sqrt());
    let (bumps, tails) = (spec.j as f64, (spec.params.edges - spec.j) as f64);
    c * (bumps * sech_tail(-t, p) + tails * sech_tail(t, p))
}

/// Critical points of the Kirchhoff action: `N` odd forces `a = 0` (half-solitons
/// glued at the vertex); for `N` even, `N/2` bumps at `x = a` and `N/2` tails
/// form a one-parameter family.
pub fn kirchhoff_state(edges: usize, omega: f64, mu: f64, shift: f64, grid: &GridSpec) -> Result<GraphFunction> {
    let params = StarGraphParams::new(edges, 0.0, mu)?;
    if !(omega > 0.0) {
        return Err(Error::domain(format!("omega must be positive, got {omega}")));
    }
    if !(shift >= 0.0 && shift.is_finite()) {
        return Err(Error::domain(format!("shift must be nonnegative, got {shift}")));
    }
    if edges % 2 == 1 && shift != 0.0 {
        return Err(Error::domain(format!(
            "for odd N = {edges} the Kirchhoff critical point is unique and unshifted (a = 0)"
        )));
    }
    let offsets: Vec<f64> = (0..edges).map(|i| if edges % 2 == 0 && i < edges / 2 { shift } else { -shift }).collect();
    let spec = StationarySpec { j: edges / 2, omega, shift, signs: vec![1; edges], params };
    let need = spec.required_length(TRUNCATION_TOL);
    if grid.length < need {
        return Err(Error::domain(format!("grid length {} too short, need {need:.3}", grid.length)));
    }
    sampled(params, *grid, omega, &offsets)
}

/// `d/dω ‖Ψ_{ω,0}‖²`, the Vakhitov–Kolokolov slope of the `j = 0` branch.
pub fn vk_slope(omega: f64, params: &StarGraphParams) -> Result<f64> {
    params.validate()?;
    let bound = params.omega_threshold();
    if !(omega > bound) {
        return Err(Error::Admissibility { j: 0, omega, bound });
    }
    let (n, mu) = (params.edges as f64, params.mu);
    // lower limit tanh(μ√ω a_0) = −α/(N√ω)
    let t = -params.alpha / (n * omega.sqrt());
    let c = n * (mu + 1.0).powf(1.0 / mu) / mu * omega.powf(1.0 / mu - 1.5);
    let p = 1.0 / mu - 1.0;
    Ok(c * ((1.0 / mu - 0.5) * sech_tail(t, p) + 0.5 * t * (1.0 - t * t).powf(p)))
}

/// Parts of the stationary-equation residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    /// Discrete `L²` norm of `−ψ'' − |ψ|^{2μ}ψ + ωψ` over interior nodes.
    pub interior: f64,
    /// `|Σψ_i'(0) − αψ(0)|` with one-sided second-order derivatives.
    pub vertex: f64,
}

impl Residual {
    pub fn combined(&self) -> f64 {
        self.interior.hypot(self.vertex)
    }
}

pub fn residual_parts(f: &GraphFunction, omega: f64) -> Residual {
    let params = f.params();
    let h = f.grid().dx();
    let mu = params.mu;
    let mut interior = 0.0;
    let mut flux = Complex64::new(0.0, 0.0);
    for e in f.values() {
        for k in 1..e.len() - 1 {
            let lap = (e[k + 1] - 2.0 * e[k] + e[k - 1]) / (h * h);
            let r = -lap - e[k] * pow_modsq(e[k].norm_sqr(), mu) + omega * e[k];
            interior += r.norm_sqr() * h;
        }
        flux += (-3.0 * e[0] + 4.0 * e[1] - e[2]) / (2.0 * h);
    }
    Residual { interior: interior.sqrt(), vertex: (flux - params.alpha * f.vertex()).norm() }
}

/// Combined stationary residual `√(interior² + vertex²)`.
pub fn residual(f: &GraphFunction, omega: f64) -> f64 {
    residual_parts(f, omega).combined()
}

/// Result of the escaping-soliton construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EscapeDemo {
    pub reduced_action: f64,
    pub delta: f64,
}

/// Smooth cutoff: `0` on `[0, 1]`, `1` on `[2, ∞)`, `C^∞` in between.
pub fn cutoff(x: f64) -> f64 {
    let bump = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let (a, b) = (bump(x - 1.0), bump(2.0 - x));
    if a == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Puts `φ_s(x − n)χ(x)` on edge `0` (zero elsewhere), scales it onto the
/// Kirchhoff Nehari manifold by `δ_n` and returns `S̃[δ_nΦ_n]` with `δ_n`.
pub fn escape_demo(n: usize, omega: f64, mu: f64, edges: usize, grid: &GridSpec) -> Result<EscapeDemo> {
    if n == 0 {
        return Err(Error::domain("escape index n must be positive"));
    }
    if !(omega > 0.0) {
        return Err(Error::domain(format!("omega must be positive, got {omega}")));
    }
    let need = n as f64 + 10.0 / omega.sqrt();
    if !(grid.length > need) {
        return Err(Error::domain(format!("grid length {} must exceed n + 10/sqrt(omega) = {need}", grid.length)));
    }
    let params = StarGraphParams::new(edges, 0.0, mu)?;
    let center = n as f64;
    let phi = GraphFunction::from_fn_with_vertex(params, *grid, Complex64::new(0.0, 0.0), |j, x| {
        if j == 0 {
            Complex64::new(soliton_profile(x - center, omega, mu) * cutoff(x), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })?;
    let (scaled, delta) = project(&phi, omega, Coupling::Kirchhoff)?;
    let reduced_action = mu / (2.0 * mu + 2.0) * pieces(&scaled).power;
    Ok(EscapeDemo { reduced_action, delta })
}

/// Newton refinement of a real stationary state to the exact solution of the
/// discrete equation `Kψ + W(ω − |ψ|^{2μ})ψ = 0`.
///
/// Returns the refined state and the number of Newton steps taken.
pub fn refine_discrete(f: &GraphFunction, omega: f64, tol: f64) -> Result<(GraphFunction, usize)> {
    let params = *f.params();
    let grid = *f.grid();
    if f.values().iter().flatten().any(|z| z.im != 0.0) {
        return Err(Error::Precondition("refinement expects a real state".into()));
    }
    let k = stiffness(&params, &grid);
    let w = weight_vector(&params, &grid);
    let mu = params.mu;
    let mut x: Vec<f64> = crate::discrete::to_unknowns(f).iter().map(|z| z.re).collect();
    let scale = crate::starmatrix::norm(&x).max(1e-300);
    for it in 0..30 {
        let kx = k.matvec(&x);
        let res: Vec<f64> = (0..x.len()).map(|i| kx[i] + w[i] * (omega - pow_modsq(x[i] * x[i], mu)) * x[i]).collect();
        let rn = crate::starmatrix::norm(&res);
        let mut jac: StarMatrix<f64> = k.clone();
        let pot = |i: usize| w[i] * (omega - (2.0 * mu + 1.0) * pow_modsq(x[i] * x[i], mu));
        jac.vertex_diag += pot(0);
        for j in 0..params.edges {
            for kk in 0..jac.chain() {
                let i = jac.index(j, kk);
                jac.diag[j][kk] += pot(i);
            }
        }
        let step = jac.solve_shifted(0.0, &res)?;
        let sn = crate::starmatrix::norm(&step);
        for (xi, si) in x.iter_mut().zip(&step) {
            *xi -= si;
        }
        if sn <= tol * scale || rn == 0.0 {
            let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            return Ok((crate::discrete::from_unknowns(params, grid, &z), it + 1));
        }
    }
    Err(Error::Solver { iterations: 30, residual: f64::NAN })
}

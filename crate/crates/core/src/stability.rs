//! Linearization around the ground state.
//!
//! Writing `Ψ_t = (Ψ + h + iz)e^{iωt}` splits the second variation of the
//! action into two real operators on a single field:
//!
//! ```text
//! L₊ = −Δ_α + ω − |Ψ|^{2μ}          (kernel spanned by Ψ)
//! L₋ = −Δ_α + ω − (2μ+1)|Ψ|^{2μ}    (one negative direction)
//! ```
//!
//! Both are discretized in the symmetric form `W^{-1/2}(K + W·V)W^{-1/2}`,
//! with the same stiffness `K` and lumped mass `W` as the time stepper.

use serde::Serialize;

use crate::discrete::{symmetric_hamiltonian, to_unknowns, weight_vector};
use crate::functionals::pow_modsq;
use crate::graph::{GraphFunction, GridSpec};
use crate::quad::bisect;
use crate::starmatrix::{norm, StarMatrix};
use crate::stationary::{build_state, state_l2sq, vk_slope, StationarySpec};
use crate::{Error, Result};

pub const DEFAULT_EIGENPAIRS: usize = 6;
/// An eigenvalue below `−MARGIN` outside the computed window makes a report inconclusive.
pub const MARGIN: f64 = 1e-6;
/// Eigenvalues in `(−ZERO_BAND, 0)` are treated as discretized kernel, not as negative directions.
pub const ZERO_BAND: f64 = 1e-3;
const MAX_EIGENPAIRS: usize = 96;

/// Discrete `L₊`/`L₋` with their lowest eigenpairs.
#[derive(Debug, Clone)]
pub struct LinearizationPair {
    pub spec: StationarySpec,
    pub grid: GridSpec,
    pub state: GraphFunction,
    pub l_plus: StarMatrix<f64>,
    pub l_minus: StarMatrix<f64>,
    /// `(eigenvalue, unit eigenvector)` in increasing order.
    pub low_spectrum_plus: Vec<(f64, Vec<f64>)>,
    pub low_spectrum_minus: Vec<(f64, Vec<f64>)>,
}

fn with_potential(base: &StarMatrix<f64>, pot: &[f64]) -> StarMatrix<f64> {
    let mut a = base.clone();
    a.vertex_diag += pot[0];
    for j in 0..a.edges() {
        for k in 0..a.chain() {
            let i = a.index(j, k);
            a.diag[j][k] += pot[i];
        }
    }
    a
}

/// Discrete `L₊` and `L₋` for a real state `psi` at frequency `omega`.
pub fn operators(psi: &GraphFunction, omega: f64) -> (StarMatrix<f64>, StarMatrix<f64>) {
    let params = psi.params();
    let mu = params.mu;
    let base = symmetric_hamiltonian(params, psi.grid());
    let dens: Vec<f64> = to_unknowns(psi).iter().map(|z| pow_modsq(z.norm_sqr(), mu)).collect();
    let plus: Vec<f64> = dens.iter().map(|d| omega - d).collect();
    let minus: Vec<f64> = dens.iter().map(|d| omega - (2.0 * mu + 1.0) * d).collect();
    (with_potential(&base, &plus), with_potential(&base, &minus))
}

/// Builds `L±` around the sampled ground state and computes `k` low eigenpairs of each.
pub fn assemble(spec: &StationarySpec, grid: &GridSpec, k: usize) -> Result<LinearizationPair> {
    if spec.j != 0 {
        return Err(Error::Precondition(format!(
            "linearization is defined for the ground state only, got j = {}",
            spec.j
        )));
    }
    if k == 0 {
        return Err(Error::domain("need at least one eigenpair"));
    }
    let state = build_state(spec, grid)?;
    let (l_plus, l_minus) = operators(&state, spec.omega);
    Ok(LinearizationPair {
        low_spectrum_plus: l_plus.lowest_eigenpairs(k)?,
        low_spectrum_minus: l_minus.lowest_eigenpairs(k)?,
        spec: spec.clone(),
        grid: *grid,
        state,
        l_plus,
        l_minus,
    })
}

impl LinearizationPair {
    /// The state in the symmetric frame, `y = W^{1/2}Ψ`.
    pub fn weighted_state(&self) -> Vec<f64> {
        let w = weight_vector(self.state.params(), &self.grid);
        to_unknowns(&self.state).iter().zip(&w).map(|(z, w)| z.re * w.sqrt()).collect()
    }

    fn ensure_window(&mut self) -> Result<usize> {
        // grow k until every eigenvalue below −MARGIN of both operators is inside the window
        let need = self.l_plus.count_below(-MARGIN).max(self.l_minus.count_below(-MARGIN)) + 1;
        let k = self.low_spectrum_plus.len();
        if need <= k {
            return Ok(k);
        }
        if need > MAX_EIGENPAIRS {
            return Err(Error::Inconclusive(format!(
                "{} eigenvalues lie below -{MARGIN:e}; more than the {MAX_EIGENPAIRS} supported",
                need - 1
            )));
        }
        let k = need.max(2 * k).min(MAX_EIGENPAIRS);
        self.low_spectrum_plus = self.l_plus.lowest_eigenpairs(k)?;
        self.low_spectrum_minus = self.l_minus.lowest_eigenpairs(k)?;
        Ok(k)
    }
}

/// Morse data of the linearization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MorseReport {
    pub neg_plus: usize,
    pub neg_minus: usize,
    pub low_spectrum_plus: Vec<f64>,
    pub low_spectrum_minus: Vec<f64>,
    /// `‖L₊Ψ‖/‖Ψ‖` in the discrete `L²` norm.
    pub kernel_residual_plus: f64,
    /// Cosine between the lowest `L₊` eigenvector and `Ψ`.
    pub kernel_cosine: f64,
    /// `(L₋Ψ, Ψ)` and `−2μ‖Ψ‖_{2μ+2}^{2μ+2}`.
    pub minus_form: f64,
    pub minus_form_expected: f64,
    pub eigenpairs_used: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Negative counts (eigenvalues below `−ZERO_BAND`), kernel residual and the
/// quadratic-form identity. Raises `k` when an eigenvalue below `−MARGIN` lies
/// outside the computed window.
pub fn morse_report(pair: &mut LinearizationPair) -> Result<MorseReport> {
    let used = pair.ensure_window()?;
    let y = pair.weighted_state();
    let ny = norm(&y);
    if ny == 0.0 {
        return Err(Error::domain("zero state"));
    }
    let ly = pair.l_plus.matvec(&y);
    let lower = pair.low_spectrum_plus.first().ok_or_else(|| Error::Inconclusive("empty spectrum".into()))?;
    let kernel_cosine = dot(&lower.1, &y).abs() / ny;
    let mu = pair.spec.params.mu;
    let w = weight_vector(pair.state.params(), &pair.grid);
    let power: f64 = to_unknowns(&pair.state).iter().zip(&w).map(|(z, w)| w * pow_modsq(z.norm_sqr(), mu + 1.0)).sum();
    let count = |s: &[(f64, Vec<f64>)]| s.iter().filter(|(l, _)| *l < -ZERO_BAND).count();
    Ok(MorseReport {
        neg_plus: count(&pair.low_spectrum_plus),
        neg_minus: count(&pair.low_spectrum_minus),
        low_spectrum_plus: pair.low_spectrum_plus.iter().map(|p| p.0).collect(),
        low_spectrum_minus: pair.low_spectrum_minus.iter().map(|p| p.0).collect(),
        kernel_residual_plus: norm(&ly) / ny,
        kernel_cosine,
        minus_form: dot(&pair.l_minus.matvec(&y), &y),
        minus_form_expected: -2.0 * mu * power,
        eigenpairs_used: used,
    })
}

/// Analytic and finite-difference VK slopes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VkCheck {
    pub analytic: f64,
    pub numeric: f64,
}

/// Central difference of the closed-form `‖Ψ_{ω,0}‖²` over `ω ± d_omega` next to the analytic slope.
pub fn vk_check(params: &crate::StarGraphParams, omega: f64, d_omega: f64) -> Result<VkCheck> {
    if !(d_omega > 0.0 && d_omega < omega) {
        return Err(Error::domain(format!("d_omega must lie in (0, omega), got {d_omega}")));
    }
    let l2 = |w: f64| StationarySpec::ground(*params, w).map(|s| state_l2sq(&s));
    let numeric = (l2(omega + d_omega)? - l2(omega - d_omega)?) / (2.0 * d_omega);
    Ok(VkCheck { analytic: vk_slope(omega, params)?, numeric })
}

/// Frequency in `(lo, hi)` where the VK slope changes sign, found to `tol`.
pub fn vk_threshold(params: &crate::StarGraphParams, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (a, b) = (vk_slope(lo, params)?, vk_slope(hi, params)?);
    if a.signum() == b.signum() {
        return Err(Error::domain(format!("VK slope has the same sign at {lo} ({a:e}) and {hi} ({b:e})")));
    }
    bisect(|w| vk_slope(w, params).unwrap_or(f64::NAN), lo, hi, tol)
        .ok_or_else(|| Error::Inconclusive("bisection for the VK threshold failed".into()))
}

//! Variational quantities of the δ-vertex and Kirchhoff problems.
//!
//! With `K = ‖Ψ'‖²`, `P = ‖Ψ‖_{2μ+2}^{2μ+2}` and `v = |ψ₁(0)|²`:
//!
//! ```text
//! M   = ½‖Ψ‖²
//! E   = ½K − P/(2μ+2) + (α/2)v        E⁰ = E without the vertex term
//! S_ω = E + ωM                         I_ω = K − P + ω‖Ψ‖² + αv
//! S̃   = μ/(2μ+2)·P = S_ω − ½I_ω
//! ```

use num_complex::Complex64;
use serde::Serialize;

use crate::graph::{GraphFunction, VERTEX_TOL};
use crate::quad::{bisect, sech_tail};
use crate::{Error, Result};

/// All functionals of one graph function at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalReport {
    pub omega: f64,
    pub mass: f64,
    pub energy: f64,
    pub kirchhoff_energy: f64,
    pub action: f64,
    pub kirchhoff_action: f64,
    pub nehari: f64,
    pub kirchhoff_nehari: f64,
    pub reduced_action: f64,
}

/// Which vertex coupling a functional refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    /// δ-vertex with the strength stored in the function's parameters.
    Delta,
    /// Free (Kirchhoff) vertex, α = 0.
    Kirchhoff,
}

/// `|z|^{2e}` from `|z|²`, with `0^{2e} = 0`.
#[inline]
pub(crate) fn pow_modsq(r2: f64, e: f64) -> f64 {
    if r2 == 0.0 {
        0.0
    } else if e == 1.0 {
        r2
    } else if e == 2.0 {
        r2 * r2
    } else {
        (e * r2.ln()).exp()
    }
}

/// The four building blocks `(‖Ψ‖², ‖Ψ'‖², ‖Ψ‖_{2μ+2}^{2μ+2}, |ψ(0)|²)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Pieces {
    pub l2sq: f64,
    pub kinetic: f64,
    pub power: f64,
    pub vertex_sq: f64,
}

pub(crate) fn pieces(f: &GraphFunction) -> Pieces {
    let mu = f.params().mu;
    Pieces {
        l2sq: f.integrate(|z| z.norm_sqr()),
        kinetic: f.kinetic(),
        power: f.integrate(|z| pow_modsq(z.norm_sqr(), mu + 1.0)),
        vertex_sq: f.vertex().norm_sqr(),
    }
}

fn check_vertex(f: &GraphFunction) -> Result<()> {
    let v0 = f.vertex();
    let worst = f.values().iter().map(|e| (e[0] - v0).norm()).fold(0.0, f64::max);
    if worst > VERTEX_TOL * v0.norm().max(1.0) {
        return Err(Error::Precondition(format!("function is discontinuous at the vertex ({worst:e})")));
    }
    Ok(())
}

pub fn evaluate(f: &GraphFunction, omega: f64) -> Result<FunctionalReport> {
    check_vertex(f)?;
    let p = f.params();
    let Pieces { l2sq, kinetic, power, vertex_sq } = pieces(f);
    let mu = p.mu;
    let vertex_term = p.alpha * vertex_sq;
    let mass = 0.5 * l2sq;
    let kirchhoff_energy = 0.5 * kinetic - power / (2.0 * mu + 2.0);
    let energy = kirchhoff_energy + 0.5 * vertex_term;
    let kirchhoff_nehari = kinetic - power + omega * l2sq;
    Ok(FunctionalReport {
        omega,
        mass,
        energy,
        kirchhoff_energy,
        action: energy + omega * mass,
        kirchhoff_action: kirchhoff_energy + omega * mass,
        nehari: kirchhoff_nehari + vertex_term,
        kirchhoff_nehari,
        reduced_action: mu / (2.0 * mu + 2.0) * power,
    })
}

/// Scales `f` onto the Nehari manifold: returns `(βf, β)` with `I_ω[βf] = 0`,
/// `β = (numerator / ‖f‖_{2μ+2}^{2μ+2})^{1/(2μ)}`.
pub fn nehari_project(f: &GraphFunction, omega: f64) -> Result<(GraphFunction, f64)> {
    project(f, omega, Coupling::Delta)
}

/// Nehari projection for either coupling.
pub fn project(f: &GraphFunction, omega: f64, coupling: Coupling) -> Result<(GraphFunction, f64)> {
    check_vertex(f)?;
    let pc = pieces(f);
    if pc.power == 0.0 {
        return Err(Error::domain("cannot project the zero function onto the Nehari manifold"));
    }
    let p = f.params();
    let vertex_term = match coupling {
        Coupling::Delta => p.alpha * pc.vertex_sq,
        Coupling::Kirchhoff => 0.0,
    };
    let numerator = pc.kinetic + vertex_term + omega * pc.l2sq;
    if !(numerator > 0.0) {
        return Err(Error::domain(format!(
            "Nehari numerator {numerator:e} is not positive; omega = {omega} may be at or below alpha^2/N^2 = {}",
            p.omega_threshold()
        )));
    }
    let beta = (numerator / pc.power).powf(0.5 / p.mu);
    Ok((f.scale(Complex64::new(beta, 0.0)), beta))
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive, got {v}")))
    }
}

/// Kirchhoff infimum `d⁰(ω) = (μ+1)^{1/μ} ω^{1/μ+1/2} ∫₀¹(1−t²)^{1/μ}dt`,
/// the action of the line soliton.
pub fn d0(omega: f64, mu: f64) -> Result<f64> {
    check_positive("omega", omega)?;
    check_positive("mu", mu)?;
    Ok((mu + 1.0).powf(1.0 / mu) * omega.powf(1.0 / mu + 0.5) * sech_tail(0.0, 1.0 / mu))
}

/// Infimum of the action on the line; numerically identical to [`d0`].
pub fn d_line(omega: f64, mu: f64) -> Result<f64> {
    check_positive("omega", omega)?;
    check_positive("mu", mu)?;
    Ok((mu + 1.0).powf(1.0 / mu) * omega.powf(1.0 / mu + 0.5) * sech_tail(0.0, 1.0 / mu))
}

/// Threshold vertex strength below which the ground state beats the escaping soliton.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaStar {
    pub alpha: f64,
    /// `N = 2`: the defining equation holds at `α = 0`.
    pub degenerate: bool,
}

/// Bracket tolerance for `α*`.
pub const ALPHA_STAR_TOL: f64 = 1e-10;

/// Solves `∫₀¹(1−t²)^{1/μ}dt = (N/2)∫_{|α|/(N√ω)}^1(1−t²)^{1/μ}dt` for `α* ∈ (−N√ω, 0)`.
pub fn alpha_star(omega: f64, mu: f64, edges: usize) -> Result<AlphaStar> {
    check_positive("omega", omega)?;
    check_positive("mu", mu)?;
    if edges < 2 {
        return Err(Error::domain(format!("need N >= 2, got {edges}")));
    }
    if edges == 2 {
        return Ok(AlphaStar { alpha: 0.0, degenerate: true });
    }
    let n = edges as f64;
    let scale = n * omega.sqrt();
    let p = 1.0 / mu;
    let whole = sech_tail(0.0, p);
    let gap = |u: f64| 0.5 * n * sech_tail(u, p) - whole;
    let u = bisect(gap, 0.0, 1.0, ALPHA_STAR_TOL / scale)
        .ok_or_else(|| Error::domain("alpha* equation has no sign change"))?;
    Ok(AlphaStar { alpha: -scale * u, degenerate: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GridSpec, StarGraphParams};

    #[test]
    fn zero_function_report() {
        let f = GraphFunction::zeros(StarGraphParams::new(3, -1.0, 1.0).unwrap(), GridSpec::new(5.0, 50).unwrap());
        let r = evaluate(&f, 1.0).unwrap();
        assert_eq!([r.mass, r.energy, r.kirchhoff_energy, r.action, r.nehari, r.reduced_action], [0.0; 6]);
        assert!(matches!(nehari_project(&f, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn d0_values() {
        assert!((d0(1.0, 1.0).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        assert!((d0(4.0, 1.0).unwrap() - 32.0 / 3.0).abs() < 1e-11);
        let expect = 3f64.sqrt() * std::f64::consts::PI / 4.0;
        assert!((d0(1.0, 2.0).unwrap() - expect).abs() < 1e-12);
        assert!((d_line(0.25, 1.0).unwrap() - 1.0 / 6.0).abs() < 1e-13);
        assert!(d0(0.0, 1.0).is_err());
        assert!(d0(1.0, -1.0).is_err());
    }

    #[test]
    fn alpha_star_degenerate_for_two_edges() {
        let a = alpha_star(1.0, 1.0, 2).unwrap();
        assert!(a.degenerate);
        assert_eq!(a.alpha, 0.0);
    }

    #[test]
    fn nonpositive_numerator_rejected() {
        // strongly attractive vertex, tiny omega, mass concentrated at the vertex
        let params = StarGraphParams::new(3, -50.0, 1.0).unwrap();
        let grid = GridSpec::new(5.0, 500).unwrap();
        let f = GraphFunction::from_real_fn(params, grid, |_, x| (-10.0 * x).exp()).unwrap();
        let err = nehari_project(&f, 0.01).unwrap_err();
        assert!(err.to_string().contains("alpha^2/N^2"), "{err}");
    }
}

//! Time evolution of `i ψ_t = Hψ − |ψ|^{2μ}ψ` with the δ-vertex.
//!
//! Strang splitting: a half step of the exact nonlinear phase rotation
//! `ψ ← e^{i|ψ|^{2μ}dt/2}ψ`, a full Crank–Nicolson step
//! `(W + i dt/2 K)ψ⁺ = (W − i dt/2 K)ψ`, another half phase step.
//! `K` and `W` are the stiffness and lumped mass of [`crate::discrete`], so the
//! linear step is unitary in the discrete `L²` product.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discrete::{complexify, from_unknowns, stiffness, to_unknowns, weight_vector};
use crate::functionals::{evaluate, pow_modsq};
use crate::graph::{h1_norm, lp_norm, orbital_distance, Exponent, GraphFunction, GridSpec, StarGraphParams};
use crate::starmatrix::StarMatrix;
use crate::{Error, Result};

/// Largest admissible `|dt|`.
pub const MAX_DT: f64 = 0.1;
/// Largest admissible nonlinear phase increment `|dt|·‖ψ‖_∞^{2μ}`.
pub const MAX_PHASE_STEP: f64 = 0.5;
/// Sup norm beyond which a run is declared blown up.
pub const BLOW_UP_SUP: f64 = 1e6;
/// Amplitude near `x = L` above which the boundary monitor warns.
pub const BOUNDARY_WARN: f64 = 1e-8;

fn default_record_every() -> usize {
    1
}

fn default_solver_tol() -> f64 {
    1e-13
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorFlags {
    #[serde(default = "yes")]
    pub orbital_distance: bool,
    /// Keep a copy of the state at every record time.
    #[serde(default)]
    pub snapshots: bool,
}

impl Default for MonitorFlags {
    fn default() -> Self {
        MonitorFlags { orbital_distance: true, snapshots: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    /// Time step; negative values run backwards.
    pub dt: f64,
    #[serde(rename = "T")]
    pub final_time: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    /// Relative residual accepted from each linear solve.
    #[serde(default = "default_solver_tol")]
    pub solver_tol: f64,
    #[serde(default)]
    pub monitor: MonitorFlags,
}

impl EvolutionConfig {
    pub fn new(dt: f64, final_time: f64) -> Self {
        EvolutionConfig {
            dt,
            final_time,
            record_every: 1,
            solver_tol: default_solver_tol(),
            monitor: MonitorFlags::default(),
        }
    }

    pub fn recording(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt != 0.0 && self.dt.abs() <= MAX_DT) {
            return Err(Error::domain(format!("dt must be nonzero with |dt| <= {MAX_DT}, got {}", self.dt)));
        }
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return Err(Error::domain(format!("T must be positive, got {}", self.final_time)));
        }
        if self.record_every == 0 {
            return Err(Error::domain("record_every must be positive"));
        }
        if !(self.solver_tol > 0.0 && self.solver_tol < 1.0) {
            return Err(Error::domain(format!("solver_tol must lie in (0, 1), got {}", self.solver_tol)));
        }
        Ok(())
    }

    /// Number of steps, `round(T/|dt|)`.
    pub fn steps(&self) -> usize {
        (self.final_time / self.dt.abs()).round() as usize
    }

    /// Checks the phase-step guard against the initial amplitude.
    pub fn check_phase_guard(&self, f: &GraphFunction) -> Result<()> {
        let sup = f.sup_norm();
        let phase = self.dt.abs() * pow_modsq(sup * sup, f.params().mu);
        if phase > MAX_PHASE_STEP {
            return Err(Error::domain(format!("dt*sup|psi|^(2mu) = {phase:.3e} exceeds {MAX_PHASE_STEP}; reduce dt")));
        }
        Ok(())
    }
}

/// Recorded monitors of one run; all arrays have one entry per record time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    pub hinorm: Vec<f64>,
    pub orbital_distance: Option<Vec<f64>>,
    /// Largest modulus over the outer 5% of every edge.
    pub boundary_amplitude: Vec<f64>,
    #[serde(skip)]
    pub snapshots: Option<Vec<GraphFunction>>,
    pub warnings: Vec<String>,
}

impl TrajectoryRecord {
    /// `max_t |q(t) − q(0)| / |q(0)|`.
    pub fn max_relative_drift(series: &[f64]) -> f64 {
        let q0 = series[0];
        let scale = if q0 != 0.0 { q0.abs() } else { 1.0 };
        series.iter().map(|q| (q - q0).abs() / scale).fold(0.0, f64::max)
    }

    pub fn final_state(&self) -> Option<&GraphFunction> {
        self.snapshots.as_ref().and_then(|s| s.last())
    }
}

/// Crank–Nicolson system for a fixed grid and time step.
#[derive(Debug, Clone)]
pub struct Stepper {
    params: StarGraphParams,
    grid: GridSpec,
    dt: f64,
    tol: f64,
    lhs: StarMatrix<Complex64>,
    rhs: StarMatrix<Complex64>,
}

fn cn_matrix(k: &StarMatrix<f64>, w: &[f64], c: Complex64) -> StarMatrix<Complex64> {
    // W + c·K
    let mut a = complexify(k);
    a.vertex_diag = a.vertex_diag * c + w[0];
    for z in a.coupling.iter_mut() {
        *z *= c;
    }
    for (j, (d, o)) in a.diag.iter_mut().zip(a.off.iter_mut()).enumerate() {
        for (kk, z) in d.iter_mut().enumerate() {
            *z = *z * c + w[1 + j * k.chain() + kk];
        }
        o.iter_mut().for_each(|z| *z *= c);
    }
    a
}

impl Stepper {
    pub fn new(params: StarGraphParams, grid: GridSpec, dt: f64, solver_tol: f64) -> Result<Self> {
        params.validate()?;
        grid.validate()?;
        if !(dt.is_finite() && dt != 0.0) {
            return Err(Error::domain(format!("dt must be finite and nonzero, got {dt}")));
        }
        let k = stiffness(&params, &grid);
        let w = weight_vector(&params, &grid);
        let half = Complex64::new(0.0, 0.5 * dt);
        Ok(Stepper { params, grid, dt, tol: solver_tol, lhs: cn_matrix(&k, &w, half), rhs: cn_matrix(&k, &w, -half) })
    }

    fn rotate(&self, x: &mut [Complex64], tau: f64) {
        let mu = self.params.mu;
        for z in x.iter_mut() {
            let theta = tau * pow_modsq(z.norm_sqr(), mu);
            *z *= Complex64::from_polar(1.0, theta);
        }
    }

    /// Advances the unknown vector by one step in place.
    pub fn advance(&self, x: &mut Vec<Complex64>) -> Result<()> {
        self.rotate(x, 0.5 * self.dt);
        let b = self.rhs.matvec(x);
        *x = self.lhs.solve_refined(&b, self.tol)?;
        self.rotate(x, 0.5 * self.dt);
        Ok(())
    }

    pub fn apply(&self, f: &GraphFunction) -> Result<GraphFunction> {
        if f.edges() != self.params.edges || *f.grid() != self.grid {
            return Err(Error::Shape(format!("stepper built for {:?}, state lives on {:?}", self.grid, f.grid())));
        }
        let mut x = to_unknowns(f);
        self.advance(&mut x)?;
        Ok(from_unknowns(self.params, self.grid, &x))
    }
}

/// One Strang step of size `dt` (negative `dt` steps backwards).
pub fn step(f: &GraphFunction, dt: f64, solver_tol: f64) -> Result<GraphFunction> {
    Stepper::new(*f.params(), *f.grid(), dt, solver_tol)?.apply(f)
}

fn boundary_amplitude(f: &GraphFunction) -> f64 {
    let m = f.grid().intervals;
    let start = m - (m / 20).max(1);
    f.values().iter().flat_map(|e| e[start..].iter()).map(|z| z.norm()).fold(0.0, f64::max)
}

/// Evolves `f0` to time `cfg.T`, recording the monitors every `record_every` steps.
pub fn evolve(
    f0: &GraphFunction,
    cfg: &EvolutionConfig,
    reference: Option<&GraphFunction>,
) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    cfg.check_phase_guard(f0)?;
    if let Some(r) = reference {
        f0.check_same_grid(r)?;
    }
    let params = *f0.params();
    let grid = *f0.grid();
    let stepper = Stepper::new(params, grid, cfg.dt, cfg.solver_tol)?;
    let steps = cfg.steps();
    let capacity = steps / cfg.record_every + 1;
    let track_orbit = cfg.monitor.orbital_distance && reference.is_some();
    let mut rec = TrajectoryRecord {
        times: Vec::with_capacity(capacity),
        mass: Vec::with_capacity(capacity),
        energy: Vec::with_capacity(capacity),
        hinorm: Vec::with_capacity(capacity),
        orbital_distance: track_orbit.then(|| Vec::with_capacity(capacity)),
        boundary_amplitude: Vec::with_capacity(capacity),
        snapshots: cfg.monitor.snapshots.then(|| Vec::with_capacity(capacity)),
        warnings: Vec::new(),
    };
    let record = |rec: &mut TrajectoryRecord, t: f64, f: GraphFunction| -> Result<()> {
        let fr = evaluate(&f, 0.0)?;
        rec.times.push(t);
        rec.mass.push(fr.mass);
        rec.energy.push(fr.energy);
        rec.hinorm.push(h1_norm(&f));
        if let (Some(d), Some(r)) = (rec.orbital_distance.as_mut(), reference) {
            d.push(orbital_distance(&f, r)?);
        }
        let b = boundary_amplitude(&f);
        if b > BOUNDARY_WARN && rec.boundary_amplitude.iter().all(|&v| v <= BOUNDARY_WARN) {
            rec.warnings.push(format!("boundary amplitude {b:.3e} exceeds {BOUNDARY_WARN:e} at t = {t}"));
        }
        rec.boundary_amplitude.push(b);
        if let Some(s) = rec.snapshots.as_mut() {
            s.push(f);
        }
        Ok(())
    };
    record(&mut rec, 0.0, f0.clone())?;
    let mut x = to_unknowns(f0);
    for n in 1..=steps {
        stepper.advance(&mut x)?;
        let t = n as f64 * cfg.dt;
        let sup = x.iter().map(|z| z.norm()).fold(0.0, |a: f64, b| if b.is_nan() { f64::NAN } else { a.max(b) });
        if !(sup <= BLOW_UP_SUP) {
            return Err(Error::BlowUp { time: t, sup_norm: sup });
        }
        if n % cfg.record_every == 0 {
            record(&mut rec, t, from_unknowns(params, grid, &x))?;
        }
    }
    Ok(rec)
}

/// Gagliardo–Nirenberg ratio `‖f‖_∞ / (‖f'‖^{1/2}‖f‖^{1/2})`.
pub fn gn_monitor(f: &GraphFunction) -> Result<f64> {
    if f.is_zero() {
        return Err(Error::domain("Gagliardo-Nirenberg ratio undefined for the zero function"));
    }
    let sup = lp_norm(f, Exponent::Infinity)?;
    let l2 = f.integrate(|z| z.norm_sqr()).sqrt();
    let grad = f.kinetic().sqrt();
    Ok(sup / (grad * l2).sqrt())
}

//! Star-graph discretization: parameters, uniform edge grids, sampled graph
//! functions and the norms built on them.
//!
//! Every half-line is truncated to `[0, L]` with a homogeneous Dirichlet
//! condition at `x = L`. Sample `k` of an edge sits at `x = k·dx`; sample `0`
//! of every edge is the (shared) vertex value.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Absolute tolerance (scaled by the vertex magnitude) for vertex continuity.
pub const VERTEX_TOL: f64 = 1e-12;

/// The physical problem: edge count, vertex strength and nonlinearity power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarGraphParams {
    #[serde(rename = "N")]
    pub edges: usize,
    pub alpha: f64,
    pub mu: f64,
}

impl StarGraphParams {
    pub fn new(edges: usize, alpha: f64, mu: f64) -> Result<Self> {
        let p = StarGraphParams { edges, alpha, mu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.edges < 2 {
            return Err(Error::domain(format!("need N >= 2 edges, got {}", self.edges)));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::domain(format!("need mu > 0, got {}", self.mu)));
        }
        if !self.alpha.is_finite() {
            return Err(Error::domain("alpha must be finite"));
        }
        Ok(())
    }

    /// Linear ground-state threshold `α²/N²`: standing waves of the `j = 0`
    /// family exist for `ω` strictly above it.
    pub fn omega_threshold(&self) -> f64 {
        let n = self.edges as f64;
        self.alpha * self.alpha / (n * n)
    }
}

/// Uniform grid on every truncated edge `[0, length]` with `intervals` cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "M")]
    pub intervals: usize,
}

impl GridSpec {
    pub const MIN_INTERVALS: usize = 8;

    pub fn new(length: f64, intervals: usize) -> Result<Self> {
        let g = GridSpec { length, intervals };
        g.validate()?;
        Ok(g)
    }

    /// Grid with the requested spacing (rounded so that `L` is a whole number of cells).
    pub fn with_spacing(length: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(Error::domain("grid spacing must be positive"));
        }
        GridSpec::new(length, (length / dx).round() as usize)
    }

    /// Desk-scale grid for functionals: `L = 30`, `dx = 0.01`.
    pub fn functionals_default() -> Self {
        GridSpec { length: 30.0, intervals: 3000 }
    }

    /// Desk-scale grid for eigen-solves and dynamics: `L = 20`, `dx = 0.02`.
    pub fn eigen_default() -> Self {
        GridSpec { length: 20.0, intervals: 1000 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::domain(format!("grid length must be positive, got {}", self.length)));
        }
        if self.intervals < Self::MIN_INTERVALS {
            return Err(Error::domain(format!(
                "need at least {} intervals per edge, got {}",
                Self::MIN_INTERVALS,
                self.intervals
            )));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.length / self.intervals as f64
    }

    /// Number of samples per edge (`M + 1`).
    pub fn samples(&self) -> usize {
        self.intervals + 1
    }

    pub fn x(&self, k: usize) -> f64 {
        k as f64 * self.dx()
    }

    /// Same length, half the spacing.
    pub fn refined(&self) -> Self {
        GridSpec { length: self.length, intervals: 2 * self.intervals }
    }
}

/// Complex samples `values[j][k] ≈ ψ_j(k·dx)` of a function on the star graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFunction {
    params: StarGraphParams,
    grid: GridSpec,
    values: Vec<Vec<Complex64>>,
}

/// Real and imaginary parts of a [`GraphFunction`], `Ψ = U + iV`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPair {
    pub params: StarGraphParams,
    pub grid: GridSpec,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl RealPair {
    pub fn join(&self) -> GraphFunction {
        let values = self
            .u
            .iter()
            .zip(&self.v)
            .map(|(u, v)| u.iter().zip(v).map(|(&a, &b)| Complex64::new(a, b)).collect())
            .collect();
        GraphFunction { params: self.params, grid: self.grid, values }
    }
}

fn vertex_mismatch(values: &[Vec<Complex64>]) -> f64 {
    let v0 = values[0][0];
    values.iter().map(|e| (e[0] - v0).norm()).fold(0.0, f64::max)
}

impl GraphFunction {
    pub fn zeros(params: StarGraphParams, grid: GridSpec) -> Self {
        let values = vec![vec![Complex64::new(0.0, 0.0); grid.samples()]; params.edges];
        GraphFunction { params, grid, values }
    }

    /// Wraps raw samples, checking shape, vertex continuity and the
    /// Dirichlet sample at `x = L`.
    pub fn from_values(params: StarGraphParams, grid: GridSpec, mut values: Vec<Vec<Complex64>>) -> Result<Self> {
        params.validate()?;
        grid.validate()?;
        if values.len() != params.edges {
            return Err(Error::Shape(format!("expected {} edges, got {}", params.edges, values.len())));
        }
        if let Some(bad) = values.iter().position(|e| e.len() != grid.samples()) {
            return Err(Error::Shape(format!(
                "edge {bad} has {} samples, expected {}",
                values[bad].len(),
                grid.samples()
            )));
        }
        let scale = values[0][0].norm().max(1.0);
        let mismatch = vertex_mismatch(&values);
        if mismatch > VERTEX_TOL * scale {
            return Err(Error::Precondition(format!("vertex samples differ across edges by {mismatch:e}")));
        }
        let v0 = values[0][0];
        for e in values.iter_mut() {
            e[0] = v0;
        }
        Ok(GraphFunction { params, grid, values })
    }

    /// Samples `f(edge, x)` on every edge. The vertex samples must agree to
    /// [`VERTEX_TOL`]; the sample at `x = L` is forced to zero.
    pub fn from_fn<F>(params: StarGraphParams, grid: GridSpec, f: F) -> Result<Self>
    where
        F: Fn(usize, f64) -> Complex64,
    {
        let values = (0..params.edges)
            .map(|j| {
                let mut e: Vec<Complex64> = (0..grid.samples()).map(|k| f(j, grid.x(k))).collect();
                e[grid.intervals] = Complex64::new(0.0, 0.0);
                e
            })
            .collect();
        Self::from_values(params, grid, values)
    }

    /// Like [`from_fn`](Self::from_fn) with an explicitly prescribed vertex value.
    pub fn from_fn_with_vertex<F>(params: StarGraphParams, grid: GridSpec, vertex: Complex64, f: F) -> Result<Self>
    where
        F: Fn(usize, f64) -> Complex64,
    {
        Self::from_fn(params, grid, |j, x| if x == 0.0 { vertex } else { f(j, x) })
    }

    /// Real-valued convenience wrapper around [`from_fn`](Self::from_fn).
    pub fn from_real_fn<F>(params: StarGraphParams, grid: GridSpec, f: F) -> Result<Self>
    where
        F: Fn(usize, f64) -> f64,
    {
        Self::from_fn(params, grid, |j, x| Complex64::new(f(j, x), 0.0))
    }

    pub fn params(&self) -> &StarGraphParams {
        &self.params
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn edges(&self) -> usize {
        self.values.len()
    }

    pub fn edge(&self, j: usize) -> &[Complex64] {
        &self.values[j]
    }

    pub fn values(&self) -> &[Vec<Complex64>] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Vec<Complex64>] {
        &mut self.values
    }

    pub fn vertex(&self) -> Complex64 {
        self.values[0][0]
    }

    /// Same samples, different physical parameters (edge count must match).
    pub fn with_params(&self, params: StarGraphParams) -> Result<Self> {
        if params.edges != self.params.edges {
            return Err(Error::Shape("edge count differs".into()));
        }
        Ok(GraphFunction { params, ..self.clone() })
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().flatten().all(|z| *z == Complex64::new(0.0, 0.0))
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        let values = self.values.iter().map(|e| e.iter().map(|&z| f(z)).collect()).collect();
        GraphFunction { params: self.params, grid: self.grid, values }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|z| z * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.map(|z| z * c)
    }

    fn zip_with<F: Fn(Complex64, Complex64) -> Complex64>(&self, other: &Self, f: F) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect())
            .collect();
        Ok(GraphFunction { params: self.params, grid: self.grid, values })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.values.len() != other.values.len() || self.grid != other.grid {
            return Err(Error::Shape(format!(
                "grids differ: {} edges {:?} vs {} edges {:?}",
                self.values.len(),
                self.grid,
                other.values.len(),
                other.grid
            )));
        }
        Ok(())
    }

    pub fn split(&self) -> RealPair {
        RealPair {
            params: self.params,
            grid: self.grid,
            u: self.values.iter().map(|e| e.iter().map(|z| z.re).collect()).collect(),
            v: self.values.iter().map(|e| e.iter().map(|z| z.im).collect()).collect(),
        }
    }

    /// Trapezoid-rule sum of `g(ψ_j(x))` over all edges.
    pub fn integrate<F: Fn(Complex64) -> f64>(&self, g: F) -> f64 {
        let dx = self.grid.dx();
        self.values.iter().map(|e| trapezoid(e, dx, &g)).sum()
    }

    /// Discrete Dirichlet energy `‖Ψ'‖²` of the piecewise-linear interpolant.
    pub fn kinetic(&self) -> f64 {
        let dx = self.grid.dx();
        self.values.iter().map(|e| e.windows(2).map(|w| (w[1] - w[0]).norm_sqr()).sum::<f64>() / dx).sum()
    }

    /// Discrete `H¹` inner product `⟨self, other⟩` (antilinear in `self`).
    pub fn h1_inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same_grid(other)?;
        let dx = self.grid.dx();
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in self.values.iter().zip(&other.values) {
            let last = a.len() - 1;
            for k in 0..a.len() {
                let w = if k == 0 || k == last { 0.5 * dx } else { dx };
                acc += a[k].conj() * b[k] * w;
            }
            for k in 0..last {
                acc += (a[k + 1] - a[k]).conj() * (b[k + 1] - b[k]) / dx;
            }
        }
        Ok(acc)
    }

    /// Largest sample modulus.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn trapezoid<F: Fn(Complex64) -> f64>(e: &[Complex64], dx: f64, g: &F) -> f64 {
    let last = e.len() - 1;
    let inner: f64 = e[1..last].iter().map(|&z| g(z)).sum();
    dx * (inner + 0.5 * (g(e[0]) + g(e[last])))
}

/// Exponent of a graph `L^p` norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl From<f64> for Exponent {
    fn from(p: f64) -> Self {
        if p.is_infinite() && p > 0.0 {
            Exponent::Infinity
        } else {
            Exponent::Finite(p)
        }
    }
}

/// `‖Ψ‖_p = (Σ_j ‖ψ_j‖_p^p)^{1/p}` by the trapezoid rule on every edge; `p = ∞`
/// gives the largest sample modulus.
pub fn lp_norm(f: &GraphFunction, p: impl Into<Exponent>) -> Result<f64> {
    match p.into() {
        Exponent::Infinity => Ok(f.sup_norm()),
        Exponent::Finite(p) => {
            if !(p >= 1.0) {
                return Err(Error::domain(format!("L^p norm needs p >= 1, got {p}")));
            }
            let s = if p == 2.0 { f.integrate(|z| z.norm_sqr()) } else { f.integrate(|z| z.norm().powf(p)) };
            Ok(s.powf(1.0 / p))
        }
    }
}

/// `‖Ψ‖_{H¹} = (‖Ψ‖² + ‖Ψ'‖²)^{1/2}` with the cell-based derivative.
pub fn h1_norm(f: &GraphFunction) -> f64 {
    (f.integrate(|z| z.norm_sqr()) + f.kinetic()).sqrt()
}

/// `min_θ ‖f − e^{iθ} g‖_{H¹}`, the `H¹` distance from `f` to the phase orbit of `g`.
///
/// The minimizing phase is `θ* = arg⟨g, f⟩_{H¹}`.
pub fn orbital_distance(f: &GraphFunction, g: &GraphFunction) -> Result<f64> {
    let z = g.h1_inner(f)?;
    let phase = if z.norm() > 0.0 { z / z.norm() } else { Complex64::new(1.0, 0.0) };
    let diff = f.sub(&g.scale(phase))?;
    Ok(h1_norm(&diff))
}

/// Plain `H¹` distance without phase minimization.
pub fn h1_distance(f: &GraphFunction, g: &GraphFunction) -> Result<f64> {
    Ok(h1_norm(&f.sub(g)?))
}

/// Writes `edge,x,re,im` rows sorted by `(edge, x)`; the vertex row appears once per edge.
pub fn write_csv<W: Write>(f: &GraphFunction, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["edge", "x", "re", "im"]).map_err(csv_io)?;
    for (j, e) in f.values.iter().enumerate() {
        for (k, z) in e.iter().enumerate() {
            w.write_record([j.to_string(), fmt_f64(f.grid.x(k)), fmt_f64(z.re), fmt_f64(z.im)]).map_err(csv_io)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads the `edge,x,re,im` format. The grid is inferred from the `x` column and
/// must be uniform, start at `0` and be identical on every edge; vertex samples
/// must agree to [`VERTEX_TOL`].
pub fn read_csv<R: Read>(input: R, params: StarGraphParams) -> Result<GraphFunction> {
    let edges = read_rows(input)?;
    if edges.len() != params.edges {
        return Err(Error::Shape(format!("file has {} edges, parameters say N = {}", edges.len(), params.edges)));
    }
    from_rows(edges, params)
}

/// Like [`read_csv`], with `N` taken from the file and the remaining parameters from `params`.
pub fn read_csv_any(input: impl Read, alpha: f64, mu: f64) -> Result<GraphFunction> {
    let edges = read_rows(input)?;
    let params = StarGraphParams::new(edges.len(), alpha, mu)?;
    from_rows(edges, params)
}

type Rows = Vec<Vec<(f64, Complex64)>>;

fn read_rows<R: Read>(input: R) -> Result<Rows> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let header = rdr.headers().map_err(|e| Error::parse(1, e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != ["edge", "x", "re", "im"] {
        return Err(Error::parse(1, "expected header edge,x,re,im"));
    }
    let mut edges: Vec<Vec<(f64, Complex64)>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::parse(line, e.to_string()))?;
        if rec.len() != 4 {
            return Err(Error::parse(line, "expected 4 fields"));
        }
        let edge: usize = rec[0].parse().map_err(|_| Error::parse(line, "bad edge index"))?;
        let num = |s: &str| -> Result<f64> {
            let v: f64 = s.parse().map_err(|_| Error::parse(line, format!("bad number {s:?}")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::parse(line, "non-finite value"))
            }
        };
        let (x, re, im) = (num(&rec[1])?, num(&rec[2])?, num(&rec[3])?);
        if edge == edges.len() {
            edges.push(Vec::new());
        } else if edge + 1 != edges.len() {
            return Err(Error::parse(line, "rows must be sorted by edge, starting at 0"));
        }
        let cur = edges.last_mut().expect("pushed above");
        if let Some(&(prev, _)) = cur.last() {
            if !(x > prev) {
                return Err(Error::parse(line, "x must be strictly increasing within an edge"));
            }
        }
        cur.push((x, Complex64::new(re, im)));
    }
    Ok(edges)
}

fn from_rows(edges: Rows, params: StarGraphParams) -> Result<GraphFunction> {
    if edges.is_empty() {
        return Err(Error::parse(1, "no data rows"));
    }
    let samples = edges[0].len();
    if samples < GridSpec::MIN_INTERVALS + 1 {
        return Err(Error::Shape(format!("too few samples per edge: {samples}")));
    }
    let length = edges[0][samples - 1].0;
    let grid = GridSpec::new(length, samples - 1)?;
    let dx = grid.dx();
    for (j, e) in edges.iter().enumerate() {
        if e.len() != samples {
            return Err(Error::Shape(format!("edge {j} has {} samples, expected {samples}", e.len())));
        }
        for (k, &(x, _)) in e.iter().enumerate() {
            if (x - grid.x(k)).abs() > 1e-9 * dx.max(length) {
                return Err(Error::Shape(format!("edge {j} sample {k}: x = {x} is off the uniform grid")));
            }
        }
        if e[samples - 1].1.norm() > VERTEX_TOL {
            return Err(Error::Precondition(format!("edge {j} does not vanish at x = L")));
        }
    }
    let values = edges.into_iter().map(|e| e.into_iter().map(|(_, z)| z).collect()).collect();
    GraphFunction::from_values(params, grid, values)
}

/// 17 significant digits, round-trip exact.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

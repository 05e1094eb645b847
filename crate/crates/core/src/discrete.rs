//! The discrete δ-vertex Hamiltonian.
//!
//! The quadratic form `‖ψ'‖² + α|ψ(0)|²` of the piecewise-linear interpolant
//! gives the stiffness matrix `K`; the trapezoid rule gives the lumped mass
//! `W` (weight `N·dx/2` at the vertex, `dx` at interior nodes). The discrete
//! Hamiltonian is `H = W⁻¹K`, self-adjoint in the `W` inner product. The
//! Dirichlet sample at `x = L` is not an unknown.

use num_complex::Complex64;

use crate::graph::{GraphFunction, GridSpec, StarGraphParams};
use crate::starmatrix::StarMatrix;

/// Stiffness matrix of `‖ψ'‖² + α|ψ(0)|²` on the interior unknowns.
pub fn stiffness(params: &StarGraphParams, grid: &GridSpec) -> StarMatrix<f64> {
    let n = grid.intervals - 1;
    let h = grid.dx();
    let edges = params.edges;
    StarMatrix {
        vertex_diag: edges as f64 / h + params.alpha,
        coupling: vec![-1.0 / h; edges],
        diag: vec![vec![2.0 / h; n]; edges],
        off: vec![vec![-1.0 / h; n - 1]; edges],
    }
}

/// Lumped mass weights `(vertex, interior)`.
pub fn mass_weights(params: &StarGraphParams, grid: &GridSpec) -> (f64, f64) {
    let h = grid.dx();
    (0.5 * params.edges as f64 * h, h)
}

/// `W^{-1/2} K W^{-1/2}`: the discrete Hamiltonian in symmetric form.
pub fn symmetric_hamiltonian(params: &StarGraphParams, grid: &GridSpec) -> StarMatrix<f64> {
    let mut k = stiffness(params, grid);
    let (wv, wi) = mass_weights(params, grid);
    k.vertex_diag /= wv;
    let c = 1.0 / (wv * wi).sqrt();
    k.coupling.iter_mut().for_each(|x| *x *= c);
    for (d, o) in k.diag.iter_mut().zip(k.off.iter_mut()) {
        d.iter_mut().for_each(|x| *x /= wi);
        o.iter_mut().for_each(|x| *x /= wi);
    }
    k
}

/// Diagonal of `W` in unknown order.
pub fn weight_vector(params: &StarGraphParams, grid: &GridSpec) -> Vec<f64> {
    let (wv, wi) = mass_weights(params, grid);
    let mut w = vec![wi; 1 + params.edges * (grid.intervals - 1)];
    w[0] = wv;
    w
}

/// Unknown vector of a graph function (vertex first, then each edge's interior).
pub fn to_unknowns(f: &GraphFunction) -> Vec<Complex64> {
    let m = f.grid().intervals;
    let mut out = Vec::with_capacity(1 + f.edges() * (m - 1));
    out.push(f.vertex());
    for e in f.values() {
        out.extend_from_slice(&e[1..m]);
    }
    out
}

/// Inverse of [`to_unknowns`]; the sample at `x = L` is zero.
pub fn from_unknowns(params: StarGraphParams, grid: GridSpec, x: &[Complex64]) -> GraphFunction {
    let m = grid.intervals;
    let mut f = GraphFunction::zeros(params, grid);
    for (j, e) in f.values_mut().iter_mut().enumerate() {
        e[0] = x[0];
        e[1..m].copy_from_slice(&x[1 + j * (m - 1)..1 + (j + 1) * (m - 1)]);
        e[m] = Complex64::new(0.0, 0.0);
    }
    f
}

/// Applies `H = W⁻¹K` to a graph function.
pub fn apply_hamiltonian(f: &GraphFunction) -> GraphFunction {
    let params = *f.params();
    let grid = *f.grid();
    let k = complexify(&stiffness(&params, &grid));
    let w = weight_vector(&params, &grid);
    let mut y = k.matvec(&to_unknowns(f));
    for (yi, wi) in y.iter_mut().zip(&w) {
        *yi /= wi;
    }
    from_unknowns(params, grid, &y)
}

pub(crate) fn complexify(a: &StarMatrix<f64>) -> StarMatrix<Complex64> {
    let c = |x: f64| Complex64::new(x, 0.0);
    StarMatrix {
        vertex_diag: c(a.vertex_diag),
        coupling: a.coupling.iter().map(|&x| c(x)).collect(),
        diag: a.diag.iter().map(|d| d.iter().map(|&x| c(x)).collect()).collect(),
        off: a.off.iter().map(|d| d.iter().map(|&x| c(x)).collect()).collect(),
    }
}

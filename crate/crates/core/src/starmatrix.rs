//! Symmetric matrices with the sparsity of a discretized star graph.
//!
//! Unknown `0` is the vertex; edge `j` contributes a tridiagonal chain of
//! `chain` unknowns whose first entry couples to the vertex. Gaussian
//! elimination from the far end of every chain towards the vertex produces
//! no fill-in, so solves, inertia counts and matrix-vector products are all
//! linear in the dimension.

use num_complex::Complex64;
use num_traits::NumAssign;

use crate::{Error, Result};

/// Scalar types a [`StarMatrix`] can hold.
pub trait Scalar: NumAssign + Copy + std::fmt::Debug + Send + Sync + 'static {
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Complex-symmetric (not Hermitian) or real-symmetric star-structured matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StarMatrix<T> {
    pub vertex_diag: T,
    /// `coupling[j]`: entry between the vertex and the first unknown of chain `j`.
    pub coupling: Vec<T>,
    /// `diag[j][k]`: diagonal of chain `j`.
    pub diag: Vec<Vec<T>>,
    /// `off[j][k]`: entry between unknowns `k` and `k + 1` of chain `j`.
    pub off: Vec<Vec<T>>,
}

impl<T: Scalar> StarMatrix<T> {
    pub fn edges(&self) -> usize {
        self.diag.len()
    }

    pub fn chain(&self) -> usize {
        self.diag.first().map_or(0, Vec::len)
    }

    pub fn dim(&self) -> usize {
        1 + self.edges() * self.chain()
    }

    #[inline]
    pub fn index(&self, edge: usize, k: usize) -> usize {
        1 + edge * self.chain() + k
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let n = self.chain();
        let mut y = vec![T::zero(); self.dim()];
        y[0] = self.vertex_diag * x[0];
        for j in 0..self.edges() {
            let base = 1 + j * n;
            let (d, o) = (&self.diag[j], &self.off[j]);
            y[0] += self.coupling[j] * x[base];
            for k in 0..n {
                let mut acc = d[k] * x[base + k];
                if k == 0 {
                    acc += self.coupling[j] * x[0];
                } else {
                    acc += o[k - 1] * x[base + k - 1];
                }
                if k + 1 < n {
                    acc += o[k] * x[base + k + 1];
                }
                y[base + k] = acc;
            }
        }
        y
    }

    /// Direct solve of `(A − shift·I) x = b`.
    pub fn solve_shifted(&self, shift: T, b: &[T]) -> Result<Vec<T>> {
        let n = self.chain();
        let edges = self.edges();
        // pivots[j][k] and the eliminated right-hand side, chain by chain
        let mut piv = vec![vec![T::zero(); n]; edges];
        let mut y = vec![vec![T::zero(); n]; edges];
        let mut vpiv = self.vertex_diag - shift;
        let mut vy = b[0];
        for j in 0..edges {
            let base = 1 + j * n;
            let (d, o, p, yy) = (&self.diag[j], &self.off[j], &mut piv[j], &mut y[j]);
            p[n - 1] = d[n - 1] - shift;
            yy[n - 1] = b[base + n - 1];
            for k in (0..n - 1).rev() {
                let m = o[k] / nonzero(p[k + 1])?;
                p[k] = d[k] - shift - m * o[k];
                yy[k] = b[base + k] - m * yy[k + 1];
            }
            let m = self.coupling[j] / nonzero(p[0])?;
            vpiv -= m * self.coupling[j];
            vy -= m * yy[0];
        }
        let mut x = vec![T::zero(); self.dim()];
        x[0] = vy / nonzero(vpiv)?;
        for j in 0..edges {
            let base = 1 + j * n;
            let (o, p, yy) = (&self.off[j], &piv[j], &y[j]);
            x[base] = (yy[0] - self.coupling[j] * x[0]) / p[0];
            for k in 1..n {
                x[base + k] = (yy[k] - o[k - 1] * x[base + k - 1]) / p[k];
            }
        }
        Ok(x)
    }

    /// Solve with iterative refinement until `‖b − Ax‖ ≤ tol·‖b‖`.
    pub fn solve_refined(&self, b: &[T], tol: f64) -> Result<Vec<T>> {
        let bnorm = norm(b);
        let mut x = self.solve_shifted(T::zero(), b)?;
        if bnorm == 0.0 {
            return Ok(x);
        }
        const MAX_REFINE: usize = 3;
        for it in 0..=MAX_REFINE {
            let ax = self.matvec(&x);
            let r: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
            let rel = norm(&r) / bnorm;
            if !rel.is_finite() {
                return Err(Error::Solver { iterations: it, residual: rel });
            }
            if rel <= tol {
                return Ok(x);
            }
            if it == MAX_REFINE {
                return Err(Error::Solver { iterations: it, residual: rel });
            }
            let dx = self.solve_shifted(T::zero(), &r)?;
            for (xi, di) in x.iter_mut().zip(dx) {
                *xi += di;
            }
        }
        unreachable!()
    }
}

fn nonzero<T: Scalar>(p: T) -> Result<T> {
    if p.modulus() == 0.0 || !p.modulus().is_finite() {
        Err(Error::Solver { iterations: 0, residual: f64::INFINITY })
    } else {
        Ok(p)
    }
}

pub fn norm<T: Scalar>(v: &[T]) -> f64 {
    v.iter().map(|z| z.modulus() * z.modulus()).sum::<f64>().sqrt()
}

impl StarMatrix<f64> {
    /// Number of eigenvalues strictly below `sigma` (Sylvester's law of inertia
    /// applied to the fill-free LDLᵀ factorization).
    pub fn count_below(&self, sigma: f64) -> usize {
        let n = self.chain();
        let tiny = f64::EPSILON * self.gershgorin().1.abs().max(1.0);
        let fix = |p: f64| if p == 0.0 { -tiny } else { p };
        let mut count = 0;
        let mut vpiv = self.vertex_diag - sigma;
        for j in 0..self.edges() {
            let (d, o) = (&self.diag[j], &self.off[j]);
            let mut p = fix(d[n - 1] - sigma);
            if p < 0.0 {
                count += 1;
            }
            for k in (0..n - 1).rev() {
                p = fix(d[k] - sigma - o[k] * o[k] / p);
                if p < 0.0 {
                    count += 1;
                }
            }
            vpiv -= self.coupling[j] * self.coupling[j] / p;
        }
        if fix(vpiv) < 0.0 {
            count += 1;
        }
        count
    }

    /// Gershgorin bounds `(lo, hi)` on the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.chain();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let vr: f64 = self.coupling.iter().map(|c| c.abs()).sum();
        lo = lo.min(self.vertex_diag - vr);
        hi = hi.max(self.vertex_diag + vr);
        for j in 0..self.edges() {
            for k in 0..n {
                let mut r = if k == 0 { self.coupling[j].abs() } else { self.off[j][k - 1].abs() };
                if k + 1 < n {
                    r += self.off[j][k].abs();
                }
                lo = lo.min(self.diag[j][k] - r);
                hi = hi.max(self.diag[j][k] + r);
            }
        }
        (lo, hi)
    }

    /// The `count` smallest eigenvalues by bisection on [`count_below`](Self::count_below).
    pub fn lowest_eigenvalues(&self, count: usize) -> Vec<f64> {
        let (lo, hi) = self.gershgorin();
        let tol = 1e-13 * lo.abs().max(hi.abs()).max(1.0);
        let count = count.min(self.dim());
        (0..count)
            .map(|i| {
                let (mut a, mut b) = (lo, hi);
                while b - a > tol {
                    let m = 0.5 * (a + b);
                    if self.count_below(m) > i {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                0.5 * (a + b)
            })
            .collect()
    }

    /// Eigenpairs for the `count` smallest eigenvalues; vectors have unit
    /// Euclidean norm. Clustered eigenvalues get mutually orthogonal vectors.
    pub fn lowest_eigenpairs(&self, count: usize) -> Result<Vec<(f64, Vec<f64>)>> {
        let values = self.lowest_eigenvalues(count);
        let (lo, hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs()).max(1.0);
        let mut pairs: Vec<(f64, Vec<f64>)> = Vec::with_capacity(values.len());
        for (i, &lam) in values.iter().enumerate() {
            let cluster: Vec<usize> = (0..i).filter(|&p| (values[p] - lam).abs() < 1e-9 * scale).collect();
            let shift = lam - 1e-10 * scale;
            // deterministic start vector with components in every direction
            let mut v: Vec<f64> = (0..self.dim()).map(|k| 1.0 + 0.5 * ((k * 7 + i * 13) % 17) as f64 / 17.0).collect();
            for _ in 0..6 {
                for &p in &cluster {
                    orthogonalize(&mut v, &pairs[p].1);
                }
                let nv = norm(&v);
                v.iter_mut().for_each(|x| *x /= nv);
                v = self.solve_shifted(shift, &v)?;
            }
            for &p in &cluster {
                orthogonalize(&mut v, &pairs[p].1);
            }
            let nv = norm(&v);
            if !(nv > 0.0 && nv.is_finite()) {
                return Err(Error::Inconclusive(format!("inverse iteration broke down at eigenvalue {lam}")));
            }
            v.iter_mut().for_each(|x| *x /= nv);
            pairs.push((lam, v));
        }
        Ok(pairs)
    }

    /// Row-major dense copy, for cross-checks on small problems.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let dim = self.dim();
        let mut a = vec![vec![0.0; dim]; dim];
        a[0][0] = self.vertex_diag;
        for j in 0..self.edges() {
            let first = self.index(j, 0);
            a[0][first] = self.coupling[j];
            a[first][0] = self.coupling[j];
            for k in 0..self.chain() {
                let i = self.index(j, k);
                a[i][i] = self.diag[j][k];
                if k + 1 < self.chain() {
                    a[i][i + 1] = self.off[j][k];
                    a[i + 1][i] = self.off[j][k];
                }
            }
        }
        a
    }
}

fn orthogonalize(v: &mut [f64], against: &[f64]) {
    let d: f64 = v.iter().zip(against).map(|(a, b)| a * b).sum();
    for (x, y) in v.iter_mut().zip(against) {
        *x -= d * y;
    }
}

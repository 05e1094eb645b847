//! Numerical workbench for the focusing nonlinear Schrödinger equation on a
//! star graph with a δ-coupling at the vertex.
//!
//! The star graph has `N` half-lines joined at one vertex. Functions on it are
//! `N`-tuples of half-line functions, continuous at the vertex, and the
//! Hamiltonian acts as `-d²/dx²` on each edge with the vertex condition
//! `ψ₁(0) = … = ψ_N(0)`, `Σ ψᵢ'(0) = α ψ₁(0)`.
//!
//! Modules:
//! - [`graph`]: grids, sampled graph functions, norms, orbital distance, CSV I/O.
//! - [`functionals`]: mass, energy, action, Nehari functional and closed-form infima.
//! - [`stationary`]: closed-form standing waves, their actions and the VK slope.
//! - [`rearrangement`]: exact symmetric rearrangement of piecewise-linear functions.
//! - [`dynamics`]: Strang-split Crank–Nicolson time stepping with conservation monitors.
//! - [`stability`]: linearized operators around the ground state and their low spectra.

pub mod discrete;
pub mod dynamics;
mod error;
pub mod functionals;
pub mod graph;
pub mod quad;
pub mod rearrangement;
pub mod stability;
pub mod starmatrix;
pub mod stationary;

pub use error::{Error, Result};
pub use graph::{GraphFunction, GridSpec, RealPair, StarGraphParams};

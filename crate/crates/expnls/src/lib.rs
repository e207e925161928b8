//! Fourier pseudospectral solvers for nonlinear Schrödinger / Gross-Pitaevskii
//! equations on periodic domains.
//!
//! The crate provides three families of time steppers for equations of the form
//! `∂_t ψ = iν Δψ − i(w(t,x) + g(|ψ|²)) ψ` on a periodic tensor grid:
//!
//! * exponential Runge-Kutta collocation methods ([`integrators::erk_step`]),
//!   with operator-valued coefficients evaluated per Fourier mode,
//! * Lawson (integrating factor) methods over any Butcher tableau
//!   ([`integrators::lawson_step`]),
//! * splitting methods of orders 1, 2, 4 and 6 ([`integrators::splitting_step`]).
//!
//! Supporting modules: [`spectral`] (grids, transforms, discrete calculus),
//! [`coefficients`] (collocation nodes, φ-functions, contour quadrature and
//! per-mode coefficient tables), [`problems`] (benchmark Cauchy problems with
//! exact solutions), [`diagnostics`] (phase/mass/energy error functionals and
//! convergence-order estimation) and [`driver`] (the CLI entry points).
//!
//! With the default `parallel` feature, coefficient precomputation, 2-D
//! transforms and parameter sweeps run data-parallel on rayon; disabling the
//! feature yields a bit-identical sequential build.

// index-based loops over stage/mode tables mirror the stepping formulas
#![allow(clippy::needless_range_loop)]

pub mod coefficients;
pub mod config;
pub mod diagnostics;
pub mod driver;
mod error;
pub mod integrators;
pub mod par;
pub mod problems;
pub mod spectral;
pub mod tableau;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

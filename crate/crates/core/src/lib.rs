//! Finite-difference engine for weakly coupled fully nonlinear parabolic
//! systems
//!
//!   d/dt u1 + F1(x, D^2 u1) = |u2|^(p-1) u2
//!   d/dt u2 + F2(x, D^2 u2) = |u1|^(q-1) u1
//!
//! where F1, F2 are uniformly elliptic, positively 1-homogeneous operators
//! sandwiched between the Pucci extremal operators. The crate provides
//!
//! * [`operators`]: symmetric matrices, eigenvalue routines, Pucci extremal
//!   operators and the shipped elliptic operator kinds;
//! * [`grid`]: uniform box grids, fields, finite-difference stencils;
//! * [`evolve`]: explicit stepping for single equations and coupled systems,
//!   blow-up detection, Duhamel fixed-point iteration, comparison and
//!   exponential-rescale cross-checks;
//! * [`selfsim`]: self-similar eigenpairs (alpha(F), psi) by renormalized
//!   power iteration on the rescaled flow, Gaussian envelope fits;
//! * [`barrier`]: admissibility checks, supersolution certificates and
//!   certified global runs;
//! * [`field_io`]: binary and CSV codecs for grid fields.

pub mod barrier;
pub mod error;
pub mod evolve;
pub mod field_io;
pub mod grid;
pub mod operators;
pub mod selfsim;

pub use error::{Error, Result};

//! Variational solvers for the singular Schrödinger equation
//! −Δu + (a/r²)u = f(x,u) on cylindrically symmetric profiles, and its
//! curl-curl counterpart ∇×∇×U = h(x,U) for azimuthal vector fields.

pub mod band;
pub mod conformal;
pub mod config;
pub mod dump;
pub mod manifest;
pub mod error;
pub mod form;
pub mod functionals;
pub mod grid;
pub mod interp;
pub mod nonlinearity;
pub mod operators;
pub mod par;
pub mod run;
pub mod solvers;
pub mod suites;

pub use error::{Error, Result};

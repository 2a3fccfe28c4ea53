//! Phase-driven nonlinear collapse dynamics for two-state quantum systems.
//!
//! The crate covers the model algebra ([`model`]), the coupled ODE system and
//! its RK4 integrator ([`dynamics`]), Born-rule ensembles ([`ensemble`]), the
//! derived experimental predictions ([`experiments`]) and deterministic
//! CSV/SVG/config I/O ([`io`]).

pub mod chaos;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod experiments;
pub mod io;
pub mod model;

pub use error::{Error, Result};

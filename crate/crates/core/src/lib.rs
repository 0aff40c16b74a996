//! Pseudo-spectral laboratory for the two-dimensional viscous rotating
//! shallow-water system with capillarity.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral_core`]: periodic grids, Fourier fields, the radial cutoffs
//!   and dyadic blocks, multipliers, Friedrichs projections and the Hodge
//!   split of a velocity field.
//! * [`besov_norms`]: homogeneous and hybrid Besov norms, Chemin-Lerner
//!   accumulators, the `E^s` functional and empirical inequality checkers.
//! * [`swe_model`]: parameters, state, nonlinear sources and the linear
//!   symbol of the system written in Hodge variables `(h, c, d)`.
//! * [`time_integrator`]: exact linear propagators and Strang splitting.
//! * [`energy_diagnostics`]: per-band energy functionals, coercivity
//!   windows, decay-rate fits and the advection weight `V(t)`.

pub mod besov_norms;
pub mod energy_diagnostics;
mod error;
pub mod random;
pub mod spectral_core;
pub mod swe_model;
pub mod time_integrator;

pub use error::{Error, Result};

//! Fourier infrastructure on the periodic square `[0, L)^2`.
//!
//! Fields are stored as complex amplitudes `c_m` on the lattice
//! `xi = (2 pi / L) m`, `m in [-N/2, N/2)^2`, normalised so that
//! `f(x) = mean + sum_m c_m exp(i xi . x)`. With this convention Parseval
//! reads `(1/L^2) int |f|^2 = mean^2 + sum |c_m|^2`, so every `L^2` norm in
//! this crate is a mean-square norm independent of the grid size.
//!
//! The Nyquist row and column (`m_i = -N/2`) have no Hermitian partner and
//! are kept at zero by every operation.

mod cutoff;
mod field;
mod grid;
mod hodge;
mod transform;

pub use cutoff::{eval_cutoffs, partition_residual, partition_residual_with, smooth_step, BumpCutoff, CutoffProfile};
pub use field::{dyadic_block, friedrichs_project, lambda_pow, SpectralField, VectorField};
pub use grid::{build_grid, BandSupport, Grid};
pub use hodge::{gradient, hodge_assemble, hodge_split, perp_gradient};
pub use transform::{Transform, PhysicalField};

use super::grid::Grid;
use crate::{Error, Result};

const INNER: f64 = 3.0 / 4.0;
const OUTER: f64 = 4.0 / 3.0;

fn bump(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// C-infinity step on `[0, 1]`: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    let a = bump(t);
    let b = bump(1.0 - t);
    a / (a + b)
}

/// Radial low-pass profile `psi` and the derived annulus profile `phi`.
pub trait CutoffProfile {
    /// Identifier written into run metadata.
    fn id(&self) -> &str;

    fn psi(&self, r: f64) -> f64;

    fn phi(&self, r: f64) -> f64 {
        self.psi(0.5 * r) - self.psi(r)
    }
}

/// `psi(r) = e((4/3 - r)/delta) / (e((4/3 - r)/delta) + e((r - 3/4)/delta))`
/// with `e(t) = exp(-1/t)` for positive `t` and `delta = 4/3 - 3/4`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BumpCutoff;

impl BumpCutoff {
    pub const ID: &'static str = "bump-ratio-exp-inv";
}

impl CutoffProfile for BumpCutoff {
    fn id(&self) -> &str {
        Self::ID
    }

    fn psi(&self, r: f64) -> f64 {
        let delta = OUTER - INNER;
        let a = bump((OUTER - r) / delta);
        let b = bump((r - INNER) / delta);
        a / (a + b)
    }
}

/// Returns `(psi(r), phi(r))` for the default profile.
pub fn eval_cutoffs(xi_norm: f64) -> Result<(f64, f64)> {
    if !(xi_norm >= 0.0) {
        return Err(Error::NegativeFrequency(xi_norm));
    }
    let p = BumpCutoff;
    Ok((p.psi(xi_norm), p.phi(xi_norm)))
}

/// `max |sum_{k=k_min}^{k_max} phi(2^-k xi) - 1|` over the nonzero lattice.
pub fn partition_residual(grid: &Grid) -> f64 {
    partition_residual_with(grid, &BumpCutoff)
}

pub fn partition_residual_with<P: CutoffProfile + ?Sized>(grid: &Grid, profile: &P) -> f64 {
    let mut worst = 0.0f64;
    for r in grid.lattice_radii() {
        let mut sum = 0.0;
        for k in grid.k_min()..=grid.k_max() {
            sum += profile.phi(r * 2f64.powi(-k));
        }
        worst = worst.max((sum - 1.0).abs());
    }
    worst
}

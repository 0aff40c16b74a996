//! Seeded random fields.
//!
//! Modes are drawn in a canonical half-plane order `(m1, m2)` that does not
//! depend on the grid size, so two grids sharing a period produce the same
//! amplitudes on the lattice points they have in common.

use num_complex::Complex64;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::spectral_core::{Grid, SpectralField};

pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn seeded(seed: u64) -> Rng {
        Rng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.0.random_range(lo..hi)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.0.random_range(0..n)
    }

    pub fn complex_normal(&mut self) -> Complex64 {
        Complex64::new(self.normal(), self.normal())
    }
}

/// Half-plane representatives of the active lattice in canonical order.
fn canonical_modes(grid: &Grid) -> impl Iterator<Item = (i64, i64)> {
    let half = (grid.n() / 2) as i64;
    (0..half).flat_map(move |m1| {
        let start = if m1 == 0 { 1 } else { 1 - half };
        (start..half).map(move |m2| (m1, m2))
    })
}

/// Random real field with amplitude `amp(m1, m2, |xi|)` times a complex
/// Gaussian on each mode (modes with zero amplitude consume no draws).
pub fn random_field_with<F>(grid: &Grid, rng: &mut Rng, amp: F) -> SpectralField
where
    F: Fn(i64, i64, f64) -> f64,
{
    let mut f = SpectralField::zeros(grid);
    let kappa = grid.kappa();
    for (m1, m2) in canonical_modes(grid) {
        let r = kappa * ((m1 * m1 + m2 * m2) as f64).sqrt();
        let a = amp(m1, m2, r);
        if a != 0.0 {
            f.set_mode(m1, m2, rng.complex_normal() * a);
        }
    }
    f
}

/// White random field with standard deviation `scale` per component.
pub fn random_field(grid: &Grid, rng: &mut Rng, scale: f64) -> SpectralField {
    random_field_with(grid, rng, |_, _, _| scale)
}

/// Random field with spectrum `(1 + |xi|^2)^(-slope/2)`, unit rms.
pub fn random_smooth(grid: &Grid, rng: &mut Rng, slope: f64) -> SpectralField {
    let mut f = random_field_with(grid, rng, |_, _, r| (1.0 + r * r).powf(-0.5 * slope));
    let n = f.norm_l2();
    if n > 0.0 {
        f.scale(1.0 / n);
    }
    f
}

/// Random field supported on the band annulus `3/4 2^k <= |xi| <= 8/3 2^k`.
pub fn random_band_field(grid: &Grid, rng: &mut Rng, k: i32) -> SpectralField {
    let lo = 0.75 * 2f64.powi(k);
    let hi = 8.0 / 3.0 * 2f64.powi(k);
    random_field_with(grid, rng, |_, _, r| if r > lo && r < hi { 1.0 } else { 0.0 })
}

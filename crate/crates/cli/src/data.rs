//! Seeded initial data.

use swlab_core::random::{random_band_field, random_smooth, Rng};
use swlab_core::spectral_core::{gradient, perp_gradient, Grid, SpectralField, VectorField};
use swlab_core::swe_model::SweState;

use crate::config::{DataConfig, Recipe};
use crate::Result;

fn normalized(f: SpectralField, target: f64) -> SpectralField {
    let n = f.norm_l2();
    if n > 0.0 {
        f.scaled(target / n)
    } else {
        f
    }
}

fn normalized_vec(u: VectorField, target: f64) -> VectorField {
    let n = u.norm_l2();
    if n > 0.0 {
        VectorField {
            u1: u.u1.scaled(target / n),
            u2: u.u2.scaled(target / n),
        }
    } else {
        u
    }
}

/// Height and velocity before any Friedrichs projection. The mean-square
/// norms of `h` and of `u` both equal the amplitude.
pub fn height_velocity(grid: &Grid, cfg: &DataConfig, seed: u64) -> Result<(SpectralField, VectorField)> {
    let mut rng = Rng::seeded(seed);
    let a = cfg.amplitude;
    let (h, u) = match cfg.recipe {
        Recipe::RandomSmooth => {
            let h = random_smooth(grid, &mut rng, cfg.slope);
            let u1 = random_smooth(grid, &mut rng, cfg.slope);
            let u2 = random_smooth(grid, &mut rng, cfg.slope);
            (h, VectorField::new(u1, u2)?)
        }
        Recipe::SingleBand => {
            let h = random_band_field(grid, &mut rng, cfg.band);
            let u1 = random_band_field(grid, &mut rng, cfg.band);
            let u2 = random_band_field(grid, &mut rng, cfg.band);
            (h, VectorField::new(u1, u2)?)
        }
        Recipe::GradientOnly => {
            let h = random_smooth(grid, &mut rng, cfg.slope);
            let phi = random_smooth(grid, &mut rng, cfg.slope + 1.0);
            (h, gradient(&phi))
        }
        Recipe::DivergenceFreeOnly => {
            let h = random_smooth(grid, &mut rng, cfg.slope);
            let psi = random_smooth(grid, &mut rng, cfg.slope + 1.0);
            (h, perp_gradient(&psi))
        }
    };
    Ok((normalized(h, a), normalized_vec(u, a)))
}

pub fn initial_state(grid: &Grid, cfg: &DataConfig, seed: u64, n_fried: Option<u32>) -> Result<SweState> {
    let (h, u) = height_velocity(grid, cfg, seed)?;
    Ok(SweState::from_height_velocity(&h, &u, n_fried)?)
}

/// Random `h`, `c`, `d` on the lattice shell `shell` only.
pub fn single_shell_state(grid: &Grid, shell: usize, seed: u64) -> SweState {
    let mut rng = Rng::seeded(seed);
    let mut fields = [SpectralField::zeros(grid), SpectralField::zeros(grid), SpectralField::zeros(grid)];
    for idx in 0..grid.len() {
        let Some(p) = grid.partner(idx) else { continue };
        if idx < p && grid.shell_of(idx) == shell {
            let (m1, m2) = grid.mode(idx);
            for f in fields.iter_mut() {
                f.set_mode(m1, m2, rng.complex_normal());
            }
        }
    }
    let [h, c, d] = fields;
    SweState { h, c, d, u_mean: [0.0; 2], time: 0.0 }
}

/// Active shell closest to `radius` among those inside `(lo, hi)`.
pub fn nearest_shell(grid: &Grid, radius: f64, lo: f64, hi: f64) -> Option<usize> {
    let mut active = vec![false; grid.num_shells()];
    for idx in 0..grid.len() {
        if grid.is_active(idx) {
            active[grid.shell_of(idx)] = true;
        }
    }
    (0..grid.num_shells())
        .filter(|&s| active[s])
        .filter(|&s| {
            let r = grid.shell_radius(s);
            r > lo && r < hi && r > 0.0
        })
        .min_by(|&a, &b| (grid.shell_radius(a) - radius).abs().total_cmp(&(grid.shell_radius(b) - radius).abs()))
}

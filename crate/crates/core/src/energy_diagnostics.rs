//! Per-band energy functionals of the linearised system and the
//! quantities derived from them.
//!
//! For `k > 0` (high regime)
//! `alpha_k^2 = g/hbar0 |h_k|^2 + beta/hbar0 |Lambda h_k|^2 + |c_k|^2 + |d_k|^2 - 2 K1 (Lambda h_k, c_k)`,
//! and for `k <= 0` (low regime) the cross term is `-2 K2 (Lambda^3 h_k, c_k)`.
//! `theta_k^2 = g/hbar0 |h_k|^2 + |c_k|^2 + |d_k|^2`.

use serde::Serialize;

use crate::random::{random_band_field, Rng};
use crate::spectral_core::{lambda_pow, Grid, SpectralField};
use crate::swe_model::{SweParams, SweState};
use crate::time_integrator::Trajectory;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    High,
    Low,
}

impl Regime {
    pub fn of(k: i32) -> Regime {
        if k > 0 {
            Regime::High
        } else {
            Regime::Low
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::High => "high",
            Regime::Low => "low",
        }
    }
}

/// Open upper bound of the coupling window and the auxiliary constants
/// `(M1, M2, M3)` or `(M4, M5, M6)` evaluated at `K = upper / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingWindow {
    pub upper: f64,
    pub m: [f64; 3],
}

pub fn admissible_k(params: &SweParams, regime: Regime) -> Result<CouplingWindow> {
    params.validate()?;
    let SweParams { hbar0, mu, f_cor: f, grav: g, beta, .. } = *params;
    let root = (beta / hbar0).sqrt();
    let visc = 4.0 * mu * beta / (hbar0 * beta + 5.0 * mu * mu);
    match regime {
        Regime::High => {
            let mut upper = visc.min(2.0 / 3.0 * root);
            if f > 0.0 {
                upper = upper.min(9.0 * mu * g / (4.0 * f * f));
            }
            let k = 0.5 * upper;
            let m2 = if f > 0.0 { f / (4.0 * g) + 9.0 * mu / (16.0 * f * k) } else { f64::INFINITY };
            Ok(CouplingWindow {
                upper,
                m: [5.0 * mu / (2.0 * beta), m2, 2.0 / 3.0 * root],
            })
        }
        Regime::Low => {
            let mut upper = (9.0 / 64.0 * visc).min(9.0 / 64.0 * root);
            if f > 0.0 {
                upper = upper.min(4.0 * mu * g / (f * f));
            }
            let k = 0.5 * upper;
            let m5 = if f > 0.0 { f / (4.0 * g) + mu / (f * k) } else { f64::INFINITY };
            Ok(CouplingWindow {
                upper,
                m: [5.0 * mu / (2.0 * beta), m5, 9.0 / 64.0 * root],
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyWeights {
    pub regime: Regime,
    pub coupling: f64,
    pub params: SweParams,
}

impl EnergyWeights {
    /// `0 <= K < upper` is required.
    pub fn new(params: &SweParams, regime: Regime, coupling: f64) -> Result<EnergyWeights> {
        let win = admissible_k(params, regime)?;
        if !(coupling >= 0.0 && coupling < win.upper) {
            return Err(Error::InadmissibleCoupling { k: coupling, bound: win.upper });
        }
        Ok(EnergyWeights { regime, coupling, params: *params })
    }

    /// `K` at half the upper bound.
    pub fn midpoint(params: &SweParams, regime: Regime) -> Result<EnergyWeights> {
        let win = admissible_k(params, regime)?;
        EnergyWeights::new(params, regime, 0.5 * win.upper)
    }

    pub fn for_band(params: &SweParams, k: i32) -> Result<EnergyWeights> {
        EnergyWeights::midpoint(params, Regime::of(k))
    }
}

/// Quadratic band quantities of `(Delta_k h, Delta_k c, Delta_k d)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BandQuadratics {
    pub h: f64,
    pub lambda_h: f64,
    pub c: f64,
    pub d: f64,
    /// `(Lambda h_k, c_k)`.
    pub cross1: f64,
    /// `(Lambda^3 h_k, c_k)`.
    pub cross3: f64,
}

impl BandQuadratics {
    /// `|h_k|^2 + |Lambda h_k|^2 + |c_k|^2 + |d_k|^2`.
    pub fn reference(&self) -> f64 {
        self.h + self.lambda_h + self.c + self.d
    }
}

pub fn band_quadratics(h: &SpectralField, c: &SpectralField, d: &SpectralField, k: i32) -> BandQuadratics {
    let grid = h.grid();
    let mut q = BandQuadratics::default();
    let Some(band) = grid.band(k) else {
        return q;
    };
    let (hc, cc, dc) = (h.coeffs(), c.coeffs(), d.coeffs());
    for (&i, &w) in band.indices.iter().zip(&band.weights) {
        let i = i as usize;
        let w2 = w * w;
        let r = grid.xi_norm(i);
        let hh = hc[i].norm_sqr();
        let hcr = hc[i].re * cc[i].re + hc[i].im * cc[i].im;
        q.h += w2 * hh;
        q.lambda_h += w2 * r * r * hh;
        q.c += w2 * cc[i].norm_sqr();
        q.d += w2 * dc[i].norm_sqr();
        q.cross1 += w2 * r * hcr;
        q.cross3 += w2 * r * r * r * hcr;
    }
    q
}

fn alpha_from(q: &BandQuadratics, w: &EnergyWeights) -> f64 {
    let p = &w.params;
    let base = p.grav / p.hbar0 * q.h + p.beta / p.hbar0 * q.lambda_h + q.c + q.d;
    let cross = match w.regime {
        Regime::High => q.cross1,
        Regime::Low => q.cross3,
    };
    base - 2.0 * w.coupling * cross
}

pub fn alpha_k_energy(state: &SweState, k: i32, w: &EnergyWeights) -> Result<f64> {
    if Regime::of(k) != w.regime {
        return Err(Error::RegimeMismatch { band: k, regime: w.regime.name() });
    }
    let win = admissible_k(&w.params, w.regime)?;
    if !(w.coupling >= 0.0 && w.coupling < win.upper) {
        return Err(Error::InadmissibleCoupling { k: w.coupling, bound: win.upper });
    }
    Ok(alpha_from(&band_quadratics(&state.h, &state.c, &state.d, k), w))
}

pub fn theta_k_energy(state: &SweState, k: i32, params: &SweParams) -> f64 {
    let q = band_quadratics(&state.h, &state.c, &state.d, k);
    params.grav / params.hbar0 * q.h + q.c + q.d
}

/// Measured constants `c_lo <= alpha_k^2 / reference <= c_hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coercivity {
    pub c_lo: f64,
    pub c_hi: f64,
    pub min_alpha_sq: f64,
    pub trials: usize,
}

/// Random states on band `k` whose velocity potential is partly aligned
/// with `Lambda h` (the direction the cross term rewards), with random
/// relative magnitudes of the three components.
pub fn random_band_state(grid: &Grid, rng: &mut Rng, k: i32) -> SweState {
    let sh = rng.normal().exp();
    let sc = rng.normal().exp();
    let sd = rng.normal().exp();
    let angle = rng.uniform(0.0, std::f64::consts::TAU);
    let h = random_band_field(grid, rng, k);
    let noise = random_band_field(grid, rng, k);
    let d = random_band_field(grid, rng, k);
    let lh = lambda_pow(&h, 1.0).expect("positive power");
    let unit = |f: &SpectralField| {
        let n = f.norm_l2();
        if n > 0.0 {
            f.scaled(1.0 / n)
        } else {
            f.clone()
        }
    };
    let mut c = unit(&lh).scaled(angle.cos());
    c.axpy(angle.sin(), &unit(&noise));
    SweState {
        h: unit(&h).scaled(sh),
        c: c.scaled(sc),
        d: unit(&d).scaled(sd),
        u_mean: [0.0; 2],
        time: 0.0,
    }
}

pub fn measure_coercivity(grid: &Grid, k: i32, w: &EnergyWeights, trials: usize, seed: u64) -> Result<Coercivity> {
    let mut rng = Rng::seeded(seed);
    let mut out = Coercivity {
        c_lo: f64::INFINITY,
        c_hi: 0.0,
        min_alpha_sq: f64::INFINITY,
        trials: 0,
    };
    for _ in 0..trials {
        let s = random_band_state(grid, &mut rng, k);
        let q = band_quadratics(&s.h, &s.c, &s.d, k);
        let reference = q.reference();
        if reference == 0.0 {
            return Err(Error::ZeroBandEnergy(k));
        }
        let a = alpha_k_energy(&s, k, w)?;
        out.c_lo = out.c_lo.min(a / reference);
        out.c_hi = out.c_hi.max(a / reference);
        out.min_alpha_sq = out.min_alpha_sq.min(a);
        out.trials += 1;
    }
    Ok(out)
}

/// Fraction of leading samples ignored by the decay fits.
pub const TRANSIENT_FRACTION: f64 = 0.1;
/// Samples at or below this energy are not fitted.
pub const ENERGY_FLOOR: f64 = 1e-20;

/// Least-squares decay rate of `values(t)`: `-slope` of `log values` over
/// the longest prefix above [`ENERGY_FLOOR`], after dropping the first
/// [`TRANSIENT_FRACTION`] of that prefix.
pub fn fit_decay_rate_series(times: &[f64], values: &[f64], k: i32) -> Result<f64> {
    let prefix = values.iter().take_while(|v| **v > ENERGY_FLOOR).count();
    if prefix == 0 {
        return Err(Error::ZeroBandEnergy(k));
    }
    let skip = (TRANSIENT_FRACTION * prefix as f64).floor() as usize;
    let (t, v) = (&times[skip..prefix], &values[skip..prefix]);
    if t.len() < 2 {
        return Err(Error::InvalidParameter(format!("band {k}: fewer than two samples to fit")));
    }
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = v.iter().map(|x| x.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (ti, vi) in t.iter().zip(v) {
        sxy += (ti - tm) * (vi.ln() - ym);
        sxx += (ti - tm) * (ti - tm);
    }
    Ok(-sxy / sxx)
}

/// Decay rate of `alpha_k^2` along the stored snapshots.
pub fn fit_decay_rate(traj: &Trajectory, k: i32, w: &EnergyWeights) -> Result<f64> {
    let mut times = Vec::with_capacity(traj.snapshots.len());
    let mut values = Vec::with_capacity(traj.snapshots.len());
    for s in &traj.snapshots {
        times.push(s.time());
        values.push(alpha_k_energy(&s.state, k, w)?);
    }
    fit_decay_rate_series(&times, &values, k)
}

/// `2^{2k} min(1, 2^{2k})`.
pub fn rate_scale(k: i32) -> f64 {
    let a = 4f64.powi(k);
    a * a.min(1.0)
}

/// `V(t) = int_0^t ||u||_{B^2}`, left-endpoint rule on the step history.
pub fn weight_v(traj: &Trajectory, t: f64) -> Result<f64> {
    let (start, end) = (traj.start_time(), traj.end_time());
    let tol = 1e-12 * end.abs().max(1.0);
    if !(t >= start - tol && t <= end + tol) {
        return Err(Error::TimeOutOfRange { t, start, end });
    }
    let mut v = 0.0;
    for s in &traj.steps {
        if s.time >= t {
            break;
        }
        v += s.u_besov2 * s.dt.min(t - s.time);
    }
    Ok(v)
}

/// One CSV row of a band energy report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandEnergyReport {
    pub k: i32,
    pub regime: Regime,
    #[serde(rename = "K")]
    pub coupling: f64,
    pub alpha_sq_initial: f64,
    pub theta_sq_initial: f64,
    pub decay_rate: f64,
    pub rate_over_scale: f64,
    pub c_lo: f64,
    pub c_hi: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_core::build_grid;
    use crate::time_integrator::{integrate, Probes, StepControl};
    use num_complex::Complex64;
    use proptest::prelude::{prop_assert, proptest};
    use std::f64::consts::PI;

    fn unit() -> SweParams {
        SweParams::default()
    }

    #[test]
    fn reference_windows() {
        let hi = admissible_k(&unit(), Regime::High).unwrap();
        assert!((hi.upper - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(hi.m[0], 2.5);
        assert!((hi.m[2] - 2.0 / 3.0).abs() < 1e-15);
        assert!((hi.m[1] - (0.25 + 9.0 / (16.0 / 3.0))).abs() < 1e-14);
        let lo = admissible_k(&unit(), Regime::Low).unwrap();
        assert!((lo.upper - 0.09375).abs() < 1e-15);
        let p0 = SweParams { f_cor: 0.0, ..unit() };
        let hi0 = admissible_k(&p0, Regime::High).unwrap();
        assert!((hi0.upper - 2.0 / 3.0).abs() < 1e-15);
        assert!(hi0.m[1].is_infinite());
        let p = SweParams { f_cor: 3.0, ..unit() };
        assert!((admissible_k(&p, Regime::High).unwrap().upper - 0.25).abs() < 1e-15);
        assert!(admissible_k(&SweParams { mu: -1.0, ..unit() }, Regime::Low).is_err());
    }

    /// The sufficient inequalities behind the windows hold at `K = upper/2`.
    #[test]
    fn windows_satisfy_sufficient_conditions() {
        let mut rng = Rng::seeded(3);
        for _ in 0..200 {
            let p = SweParams {
                hbar0: rng.uniform(0.1, 5.0),
                mu: rng.uniform(0.1, 5.0),
                f_cor: rng.uniform(0.01, 5.0),
                grav: rng.uniform(0.1, 5.0),
                beta: rng.uniform(0.1, 5.0),
                ..unit()
            };
            let (h0, mu, f, g, b) = (p.hbar0, p.mu, p.f_cor, p.grav, p.beta);
            let w = admissible_k(&p, Regime::High).unwrap();
            let k = 0.5 * w.upper;
            let [m1, m2, m3] = w.m;
            assert!(4.0 * mu - h0 * k - 4.0 * mu * k * m1 / 2.0 > 0.0);
            assert!(b - 4.0 * mu / (2.0 * m1) > 0.0);
            assert!(g - f / (2.0 * m2) > 0.0);
            assert!(mu - 8.0 * f * k * m2 / 9.0 > 0.0);
            assert!(b / h0 - k * m3 > 0.0 && 1.0 - k / m3 > 0.0);
            let w = admissible_k(&p, Regime::Low).unwrap();
            let k = 0.5 * w.upper;
            let [m4, m5, m6] = w.m;
            let r = 64.0 / 9.0;
            assert!(4.0 * mu - r * h0 * k - 4.0 * mu * k * r * m4 / 2.0 > 0.0);
            assert!(b - 4.0 * mu / (2.0 * m4) > 0.0);
            assert!(g - f / (2.0 * m5) > 0.0);
            assert!(mu - f * k * m5 / 2.0 > 0.0);
            assert!(b / h0 - 4096.0 / 162.0 * k * m6 > 0.0 && 1.0 - k / m6 > 0.0);
        }
    }

    #[test]
    fn weights_validate_coupling() {
        assert!(matches!(EnergyWeights::new(&unit(), Regime::High, 0.7), Err(Error::InadmissibleCoupling { .. })));
        assert!(matches!(EnergyWeights::new(&unit(), Regime::Low, -0.01), Err(Error::InadmissibleCoupling { .. })));
        let g = build_grid(32, 16.0 * PI).unwrap();
        let s = SweState::zeros(&g);
        let w = EnergyWeights::midpoint(&unit(), Regime::High).unwrap();
        assert!(matches!(alpha_k_energy(&s, 0, &w), Err(Error::RegimeMismatch { .. })));
        assert_eq!(alpha_k_energy(&s, 1, &w).unwrap(), 0.0);
        let bad = EnergyWeights { coupling: 1.0, ..w };
        assert!(alpha_k_energy(&s, 1, &bad).is_err());
    }

    #[test]
    fn regimes_agree_without_coupling() {
        let g = build_grid(64, 16.0 * PI).unwrap();
        let mut rng = Rng::seeded(4);
        for k in [-2, 1] {
            let s = random_band_state(&g, &mut rng, k);
            let hi = EnergyWeights { regime: Regime::High, coupling: 0.0, params: unit() };
            let lo = EnergyWeights { regime: Regime::Low, coupling: 0.0, params: unit() };
            let q = band_quadratics(&s.h, &s.c, &s.d, k);
            assert_eq!(alpha_from(&q, &hi), alpha_from(&q, &lo));
            let theta = theta_k_energy(&s, k, &unit());
            assert!(theta <= alpha_from(&q, &hi));
            assert_eq!(theta + q.lambda_h, alpha_from(&q, &hi));
        }
    }

    #[test]
    fn theta_examples() {
        let g = build_grid(32, 16.0 * PI).unwrap();
        let mut s = SweState::zeros(&g);
        assert_eq!(theta_k_energy(&s, 1, &unit()), 0.0);
        s.d.set_mode(11, 0, Complex64::new(0.3, 0.4));
        // phi = 1 on this mode for k = 0
        assert!((theta_k_energy(&s, 0, &unit()) - 0.5).abs() < 1e-15);
        let s2 = SweState { d: s.d.scaled(3.0), ..s.clone() };
        assert!((theta_k_energy(&s2, 0, &unit()) - 9.0 * 0.5).abs() < 1e-14);
    }

    #[test]
    fn coercivity_on_random_states() {
        let g = build_grid(64, 16.0 * PI).unwrap();
        for k in -3..=2 {
            let w = EnergyWeights::for_band(&unit(), k).unwrap();
            let c = measure_coercivity(&g, k, &w, 100, 9).unwrap();
            assert!(c.min_alpha_sq >= 0.0 && c.c_lo > 0.0 && c.c_hi.is_finite(), "k={k}: {c:?}");
        }
    }

    #[test]
    fn heat_decay_of_rotational_mode() {
        let g = build_grid(32, 16.0 * PI).unwrap();
        let p = SweParams { f_cor: 0.0, ..unit() }.linear();
        let mut s = SweState::zeros(&g);
        s.d.set_mode(11, 0, Complex64::new(0.2, 0.0));
        let r = 11.0 * g.kappa();
        let traj = integrate(&s, &StepControl::new(0.05, 3.0), &p, &Probes::Every(1)).unwrap();
        let w = EnergyWeights::for_band(&p, 0).unwrap();
        let rate = fit_decay_rate(&traj, 0, &w).unwrap();
        let exact = 2.0 * p.mu * r * r;
        assert!((rate - exact).abs() <= 1e-9 * exact, "{rate} vs {exact}");
        assert!(matches!(fit_decay_rate(&traj, 2, &EnergyWeights::for_band(&p, 2).unwrap()), Err(Error::ZeroBandEnergy(2))));
    }

    #[test]
    fn linear_band_energy_is_nonincreasing() {
        let g = build_grid(64, 16.0 * PI).unwrap();
        let p = unit().linear();
        let mut rng = Rng::seeded(5);
        for k in [-2, 0, 2] {
            let s = random_band_state(&g, &mut rng, k);
            let w = EnergyWeights::for_band(&p, k).unwrap();
            let traj = integrate(&s, &StepControl::new(0.02, 1.0), &p, &Probes::Every(1)).unwrap();
            let mut prev = f64::INFINITY;
            for snap in &traj.snapshots {
                let a = alpha_k_energy(&snap.state, k, &w).unwrap();
                assert!(a <= prev * (1.0 + 1e-12), "k={k}");
                prev = a;
            }
        }
    }

    #[test]
    fn weight_v_examples() {
        let g = build_grid(32, 16.0 * PI).unwrap();
        let p = unit().linear();
        let zero = integrate(&SweState::zeros(&g), &StepControl::new(0.1, 1.0), &p, &Probes::Endpoints).unwrap();
        assert_eq!(weight_v(&zero, 1.0).unwrap(), 0.0);
        assert!(matches!(weight_v(&zero, 1.5), Err(Error::TimeOutOfRange { .. })));
        let mut s = SweState::zeros(&g);
        s.c.set_mode(3, 4, Complex64::new(0.1, 0.0));
        let traj = integrate(&s, &StepControl::new(0.1, 2.0), &p, &Probes::Endpoints).unwrap();
        let mut prev = 0.0;
        for i in 0..=40 {
            let v = weight_v(&traj, i as f64 * 0.05).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    proptest! {
        #[test]
        fn theta_scales_quadratically(seed in 0u64..1000, lam in 0.1f64..10.0) {
            let g = build_grid(32, 16.0 * PI).unwrap();
            let s = random_band_state(&g, &mut Rng::seeded(seed), 1);
            let t = SweState { h: s.h.scaled(lam), c: s.c.scaled(lam), d: s.d.scaled(lam), ..s.clone() };
            let a = theta_k_energy(&s, 1, &unit());
            let b = theta_k_energy(&t, 1, &unit());
            prop_assert!((b - lam * lam * a).abs() <= 1e-12 * b);
        }

        #[test]
        fn alpha_nonnegative_at_midpoint(seed in 0u64..1000, k in -3i32..=2) {
            let g = build_grid(32, 16.0 * PI).unwrap();
            let s = random_band_state(&g, &mut Rng::seeded(seed), k);
            let w = EnergyWeights::for_band(&unit(), k).unwrap();
            prop_assert!(alpha_k_energy(&s, k, &w).unwrap() >= 0.0);
        }
    }
}

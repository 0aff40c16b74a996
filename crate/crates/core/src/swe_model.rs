//! The rotating viscous shallow-water system with capillarity in Hodge
//! variables:
//!
//! ```text
//! h_t + u.grad h + hbar0 Lambda c                      = F
//! c_t + u.grad c - 4 mu Lap c - f d - g Lambda h - beta Lambda^3 h = G
//! d_t - mu Lap d + f c                                  = Lambda^-1 div_perp H
//! ```
//!
//! with `F = -h div u`, `G = u.grad c + Lambda^-1 div H` and
//! `H = -u.grad u + 2 mu (grad h . D(u) + grad h div u) / zeta(h + hbar0)`.
//! When a Friedrichs index `n` is set every source is projected by `J_n`.

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::spectral_core::{friedrichs_project, hodge_assemble, hodge_split, smooth_step, Grid, PhysicalField, SpectralField, VectorField};
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Physical constants in dimensionless units (lengths in units of the
/// torus scale, time in units of the inertial period).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweParams {
    pub hbar0: f64,
    pub mu: f64,
    pub f_cor: f64,
    pub grav: f64,
    pub beta: f64,
    /// Friedrichs index `n`; `None` keeps the full lattice.
    pub n_fried: Option<u32>,
    /// Switches the quadratic sources on or off.
    #[serde(default = "default_true")]
    pub nonlinear: bool,
}

fn default_true() -> bool {
    true
}

impl Default for SweParams {
    fn default() -> SweParams {
        SweParams {
            hbar0: 1.0,
            mu: 1.0,
            f_cor: 1.0,
            grav: 1.0,
            beta: 1.0,
            n_fried: None,
            nonlinear: true,
        }
    }
}

impl SweParams {
    pub fn validate(&self) -> Result<()> {
        let pos = [("hbar0", self.hbar0), ("mu", self.mu), ("grav", self.grav), ("beta", self.beta)];
        for (name, v) in pos {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.f_cor >= 0.0 && self.f_cor.is_finite()) {
            return Err(Error::InvalidParameter(format!("f_cor must be nonnegative, got {}", self.f_cor)));
        }
        if self.n_fried == Some(0) {
            return Err(Error::ZeroFriedrichsIndex);
        }
        Ok(())
    }

    pub fn linear(mut self) -> SweParams {
        self.nonlinear = false;
        self
    }

    pub fn with_friedrichs(mut self, n: Option<u32>) -> SweParams {
        self.n_fried = n;
        self
    }

    /// Stable identifier of the physical block, used for propagator caching.
    pub fn bits(&self) -> [u64; 5] {
        [self.hbar0, self.mu, self.f_cor, self.grav, self.beta].map(f64::to_bits)
    }

    fn project(&self, f: SpectralField) -> SpectralField {
        match self.n_fried {
            Some(n) => friedrichs_project(&f, n).expect("validated index"),
            None => f.without_mean(),
        }
    }
}

/// Height perturbation `h` and velocity `u = -Lambda^-1 grad c -
/// Lambda^-1 grad_perp d + u_mean`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweState {
    pub h: SpectralField,
    pub c: SpectralField,
    pub d: SpectralField,
    pub u_mean: [f64; 2],
    pub time: f64,
}

impl SweState {
    pub fn zeros(grid: &Grid) -> SweState {
        SweState {
            h: SpectralField::zeros(grid),
            c: SpectralField::zeros(grid),
            d: SpectralField::zeros(grid),
            u_mean: [0.0; 2],
            time: 0.0,
        }
    }

    /// Builds the state from `(h, u)`; the means of `u` go to `u_mean` and
    /// the mean of `h` is dropped. With a Friedrichs index everything is
    /// projected, which also removes `u_mean`.
    pub fn from_height_velocity(h: &SpectralField, u: &VectorField, n_fried: Option<u32>) -> Result<SweState> {
        h.check_grid(&u.u1)?;
        let u_mean = [u.u1.mean(), u.u2.mean()];
        let um = VectorField::new(u.u1.without_mean(), u.u2.without_mean())?;
        let (c, d) = hodge_split(&um)?;
        SweState::from_potentials(h.without_mean(), c, d, u_mean, n_fried)
    }

    pub fn from_potentials(h: SpectralField, c: SpectralField, d: SpectralField, u_mean: [f64; 2], n_fried: Option<u32>) -> Result<SweState> {
        h.check_grid(&c)?;
        h.check_grid(&d)?;
        let mut s = SweState {
            h: h.without_mean(),
            c: c.without_mean(),
            d: d.without_mean(),
            u_mean,
            time: 0.0,
        };
        if let Some(n) = n_fried {
            s.h = friedrichs_project(&s.h, n)?;
            s.c = friedrichs_project(&s.c, n)?;
            s.d = friedrichs_project(&s.d, n)?;
            s.u_mean = [0.0; 2];
        }
        Ok(s)
    }

    pub fn grid(&self) -> &Grid {
        self.h.grid()
    }

    pub fn velocity(&self) -> VectorField {
        let mut u = hodge_assemble(&self.c, &self.d).expect("state fields share a grid and are mean-free");
        u.u1.set_mean(self.u_mean[0]);
        u.u2.set_mean(self.u_mean[1]);
        u
    }

    pub fn is_finite(&self) -> bool {
        self.h.is_finite() && self.c.is_finite() && self.d.is_finite() && self.u_mean.iter().all(|v| v.is_finite())
    }

    pub fn max_coeff_abs(&self) -> f64 {
        self.h
            .max_coeff_abs()
            .max(self.c.max_coeff_abs())
            .max(self.d.max_coeff_abs())
            .max(self.u_mean[0].abs())
            .max(self.u_mean[1].abs())
    }

    /// `sqrt(|h|^2 + |c|^2 + |d|^2 + |u_mean|^2)`.
    pub fn norm_l2(&self) -> f64 {
        (self.h.norm_l2_sq() + self.c.norm_l2_sq() + self.d.norm_l2_sq() + self.u_mean[0].powi(2) + self.u_mean[1].powi(2)).sqrt()
    }

    pub fn distance(&self, other: &SweState) -> f64 {
        let a = self.h.distance(&other.h);
        let b = self.c.distance(&other.c);
        let c = self.d.distance(&other.d);
        let m0 = self.u_mean[0] - other.u_mean[0];
        let m1 = self.u_mean[1] - other.u_mean[1];
        (a * a + b * b + c * c + m0 * m0 + m1 * m1).sqrt()
    }

    /// `self += a * t` on the spectral fields and the mean velocity.
    pub fn axpy(&mut self, a: f64, t: &Tendency) {
        self.h.axpy(a, &t.dh);
        self.c.axpy(a, &t.dc);
        self.d.axpy(a, &t.dd);
        self.u_mean[0] += a * t.du_mean[0];
        self.u_mean[1] += a * t.du_mean[1];
    }

    /// True when every field is unchanged by `J_n`.
    pub fn is_friedrichs_invariant(&self, n: u32) -> bool {
        [&self.h, &self.c, &self.d]
            .iter()
            .all(|f| friedrichs_project(f, n).map(|p| &p == *f).unwrap_or(false))
            && self.u_mean == [0.0; 2]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tendency {
    pub dh: SpectralField,
    pub dc: SpectralField,
    pub dd: SpectralField,
    pub du_mean: [f64; 2],
}

impl Tendency {
    pub fn zeros(grid: &Grid) -> Tendency {
        Tendency {
            dh: SpectralField::zeros(grid),
            dc: SpectralField::zeros(grid),
            dd: SpectralField::zeros(grid),
            du_mean: [0.0; 2],
        }
    }

    pub fn norm_l2(&self) -> f64 {
        (self.dh.norm_l2_sq() + self.dc.norm_l2_sq() + self.dd.norm_l2_sq() + self.du_mean[0].powi(2) + self.du_mean[1].powi(2)).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.dh.is_finite() && self.dc.is_finite() && self.dd.is_finite() && self.du_mean.iter().all(|v| v.is_finite())
    }
}

/// Truncated depth: `hbar0/4` below `hbar0/4`, identity on
/// `[hbar0/2, 3 hbar0/2]`, `7 hbar0/4` above `7 hbar0/4`, in `|x|`, with
/// monotone C-infinity joins in between.
pub fn zeta(x: f64, hbar0: f64) -> f64 {
    let a = x.abs();
    let q = 0.25 * hbar0;
    if a <= q {
        q
    } else if a < 2.0 * q {
        q + (a - q) * smooth_step((a - q) / q)
    } else if a <= 6.0 * q {
        a
    } else if a < 7.0 * q {
        a + (7.0 * q - a) * smooth_step((a - 6.0 * q) / q)
    } else {
        7.0 * q
    }
}

/// Sources of the regularised system, each mean-free and `J_n`-projected.
#[derive(Debug, Clone)]
pub struct NonlinearTerms {
    /// `F = -J_n(h div u)`.
    pub f: SpectralField,
    /// `G = J_n(u.grad c) + J_n Lambda^-1 div H`.
    pub g: SpectralField,
    /// `J_n Lambda^-1 div_perp H`.
    pub pperp: SpectralField,
    /// `J_n(u.grad h)`.
    pub adv_h: SpectralField,
    /// `J_n(u.grad c)`.
    pub adv_c: SpectralField,
    /// Set when `h + hbar0` left `[hbar0/2, 3 hbar0/2]` at a collocation point.
    pub zeta_active: bool,
    /// Collocation mean of `div(h u)`, which the continuity equation drops.
    pub mass_defect: f64,
    /// `max |u|` over the collocation points.
    pub u_max: f64,
}

struct Samples {
    u1: PhysicalField,
    u2: PhysicalField,
    grads: [PhysicalField; 8],
}

fn derivative(f: &SpectralField, axis: usize) -> SpectralField {
    if axis == 0 {
        f.map_symbol(|x1, _, _| I * x1)
    } else {
        f.map_symbol(|_, x2, _| I * x2)
    }
}

/// Dealiased evaluation of the quadratic sources on the 3/2-padded grid.
pub fn nonlinear_terms(state: &SweState, params: &SweParams) -> Result<NonlinearTerms> {
    let grid = state.grid();
    let t = grid.padded();
    let u = state.velocity();
    let s = Samples {
        u1: t.synthesize(&u.u1),
        u2: t.synthesize(&u.u2),
        grads: [
            t.synthesize(&derivative(&u.u1, 0)),
            t.synthesize(&derivative(&u.u1, 1)),
            t.synthesize(&derivative(&u.u2, 0)),
            t.synthesize(&derivative(&u.u2, 1)),
            t.synthesize(&derivative(&state.h, 0)),
            t.synthesize(&derivative(&state.h, 1)),
            t.synthesize(&derivative(&state.c, 0)),
            t.synthesize(&derivative(&state.c, 1)),
        ],
    };
    let h = t.synthesize(&state.h);
    let [u11, u12, u21, u22, h1, h2, c1, c2] = &s.grads;
    let len = h.values.len();
    let mut adv_h = vec![0.0; len];
    let mut adv_c = vec![0.0; len];
    let mut fsrc = vec![0.0; len];
    let mut hh1 = vec![0.0; len];
    let mut hh2 = vec![0.0; len];
    let hb = params.hbar0;
    let (lo, hi) = (0.5 * hb, 1.5 * hb);
    let mut zeta_active = false;
    let mut u_max = 0.0f64;
    let two_mu = 2.0 * params.mu;
    for j in 0..len {
        let (v1, v2) = (s.u1.values[j], s.u2.values[j]);
        u_max = u_max.max((v1 * v1 + v2 * v2).sqrt());
        let (a11, a12, a21, a22) = (u11.values[j], u12.values[j], u21.values[j], u22.values[j]);
        let (g1, g2) = (h1.values[j], h2.values[j]);
        let div = a11 + a22;
        adv_h[j] = v1 * g1 + v2 * g2;
        adv_c[j] = v1 * c1.values[j] + v2 * c2.values[j];
        fsrc[j] = -h.values[j] * div;
        let depth = h.values[j] + hb;
        if !(lo..=hi).contains(&depth) {
            zeta_active = true;
        }
        let z = zeta(depth, hb);
        let d12 = 0.5 * (a12 + a21);
        hh1[j] = -(v1 * a11 + v2 * a12) + two_mu * (g1 * a11 + g2 * d12 + g1 * div) / z;
        hh2[j] = -(v1 * a21 + v2 * a22) + two_mu * (g1 * d12 + g2 * a22 + g2 * div) / z;
    }
    let size = t.size();
    let field = |values: Vec<f64>| t.analyze(&PhysicalField { size, values });
    let adv_h = field(adv_h);
    let f_full = field(fsrc);
    let mass_defect = adv_h.mean() - f_full.mean();
    let adv_c = params.project(field(adv_c));
    let hv = VectorField::new(field(hh1).without_mean(), field(hh2).without_mean())?;
    let (div_h, divp_h) = hodge_split(&hv)?;
    let mut g = adv_c.clone();
    g.axpy(1.0, &params.project(div_h));
    let out = NonlinearTerms {
        f: params.project(f_full),
        g,
        pperp: params.project(divp_h),
        adv_h: params.project(adv_h),
        adv_c,
        zeta_active,
        mass_defect,
        u_max,
    };
    let finite = out.f.is_finite() && out.g.is_finite() && out.pperp.is_finite() && out.adv_h.is_finite();
    if !finite {
        return Err(Error::NonFinite("nonlinear terms"));
    }
    Ok(out)
}

/// `A(r)` acting on `(h, c, d)`.
pub fn linear_symbol(xi_norm: f64, params: &SweParams) -> Matrix3<f64> {
    let r = xi_norm;
    let r2 = r * r;
    Matrix3::new(
        0.0,
        -params.hbar0 * r,
        0.0,
        params.grav * r + params.beta * r2 * r,
        -4.0 * params.mu * r2,
        params.f_cor,
        0.0,
        -params.f_cor,
        -params.mu * r2,
    )
}

/// `-max Re spec A(r)`: the decay rate of the slowest mode on the shell `|xi| = r`.
pub fn slowest_rate(xi_norm: f64, params: &SweParams) -> f64 {
    let top = linear_symbol(xi_norm, params).complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    -top
}

/// `A(|xi|) (h, c, d)` coefficient by coefficient, plus the Coriolis
/// rotation of the mean velocity.
pub fn linear_tendency(state: &SweState, params: &SweParams) -> Tendency {
    let grid = state.grid();
    let mut out = Tendency::zeros(grid);
    let (h, c, d) = (state.h.coeffs(), state.c.coeffs(), state.d.coeffs());
    let shells: Vec<Matrix3<f64>> = (0..grid.num_shells()).map(|s| linear_symbol(grid.shell_radius(s), params)).collect();
    let mut dh = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut dc = dh.clone();
    let mut dd = dh.clone();
    for i in 0..grid.len() {
        if !grid.is_active(i) {
            continue;
        }
        let a = &shells[grid.shell_of(i)];
        dh[i] = h[i] * a[(0, 0)] + c[i] * a[(0, 1)] + d[i] * a[(0, 2)];
        dc[i] = h[i] * a[(1, 0)] + c[i] * a[(1, 1)] + d[i] * a[(1, 2)];
        dd[i] = h[i] * a[(2, 0)] + c[i] * a[(2, 1)] + d[i] * a[(2, 2)];
    }
    out.dh = SpectralField::from_coeffs(grid, dh, 0.0);
    out.dc = SpectralField::from_coeffs(grid, dc, 0.0);
    out.dd = SpectralField::from_coeffs(grid, dd, 0.0);
    out.du_mean = [params.f_cor * state.u_mean[1], -params.f_cor * state.u_mean[0]];
    out
}

/// Nonlinear part of the tendency: `(-J_n(u.grad h) + F, -J_n(u.grad c) + G, P)`.
pub fn nonlinear_tendency(state: &SweState, params: &SweParams) -> Result<(Tendency, NonlinearTerms)> {
    let nl = nonlinear_terms(state, params)?;
    let mut dh = nl.f.clone();
    dh.axpy(-1.0, &nl.adv_h);
    let mut dc = nl.g.clone();
    dc.axpy(-1.0, &nl.adv_c);
    let t = Tendency {
        dh,
        dc,
        dd: nl.pperp.clone(),
        du_mean: [0.0; 2],
    };
    Ok((t, nl))
}

/// Full right-hand side of the regularised system.
pub fn full_rhs(state: &SweState, params: &SweParams) -> Result<Tendency> {
    let mut t = linear_tendency(state, params);
    if params.nonlinear {
        let (n, _) = nonlinear_tendency(state, params)?;
        t.dh.axpy(1.0, &n.dh);
        t.dc.axpy(1.0, &n.dc);
        t.dd.axpy(1.0, &n.dd);
    }
    if !t.is_finite() {
        return Err(Error::NonFinite("tendency"));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_field_with, Rng};
    use crate::spectral_core::{build_grid, gradient, perp_gradient, Transform};
    use std::f64::consts::PI;

    fn smooth_state(grid: &Grid, rng: &mut Rng, amp: f64, rmax: f64) -> SweState {
        let spec = |_: i64, _: i64, r: f64| if r <= rmax { amp * (-r * r / 4.0).exp() } else { 0.0 };
        let h = random_field_with(grid, rng, spec);
        let c = random_field_with(grid, rng, spec);
        let d = random_field_with(grid, rng, spec);
        SweState::from_potentials(h, c, d, [0.0; 2], None).unwrap()
    }

    #[test]
    fn zeta_branches() {
        for &hb in &[1.0, 0.3, 7.0] {
            assert_eq!(zeta(hb, hb), hb);
            assert_eq!(zeta(0.0, hb), hb / 4.0);
            assert_eq!(zeta(10.0 * hb, hb), 1.75 * hb);
            assert_eq!(zeta(-hb, hb), hb);
            let mut prev = 0.0;
            for i in 0..=4000 {
                let x = 2.5 * hb * i as f64 / 4000.0;
                let z = zeta(x, hb);
                assert!(z >= hb / 4.0 && z >= prev - 1e-15 * hb);
                prev = z;
                if (0.5 * hb..=1.5 * hb).contains(&x) {
                    assert_eq!(z, x);
                }
            }
        }
    }

    #[test]
    fn slowest_rate_without_rotation() {
        // (h, c) block: lambda^2 + 4 lambda + 2 = 0; d decays at rate 1
        let p = SweParams { f_cor: 0.0, ..SweParams::default() };
        assert!((slowest_rate(1.0, &p) - (2.0 - 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn symbol_eigenvalues() {
        let p = SweParams::default();
        let ev = linear_symbol(0.0, &p).complex_eigenvalues();
        let mut im: Vec<f64> = ev.iter().map(|z| z.im).collect();
        im.sort_by(f64::total_cmp);
        assert!((im[0] + 1.0).abs() < 1e-14 && im[1].abs() < 1e-14 && (im[2] - 1.0).abs() < 1e-14);
        assert!(ev.iter().all(|z| z.re.abs() < 1e-14));
        let slowest = |r: f64| {
            linear_symbol(r, &p)
                .complex_eigenvalues()
                .iter()
                .map(|z| z.re)
                .fold(f64::NEG_INFINITY, f64::max)
        };
        for &r in &[0.125, 1.0, 8.0] {
            assert!(slowest(r) < 0.0);
        }
        let slope = |r1: f64, r2: f64| (slowest(r2) / slowest(r1)).ln() / (r2 / r1).ln();
        assert!((slope(0.01, 0.02) - 4.0).abs() < 0.05);
        assert!((slope(50.0, 100.0) - 2.0).abs() < 0.05);
        let a = linear_symbol(2.0, &SweParams { f_cor: 0.0, ..p });
        assert_eq!((a[(0, 2)], a[(1, 2)], a[(2, 0)], a[(2, 1)]), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(a[(2, 2)], -4.0);
    }

    #[test]
    fn zero_state_has_zero_tendency() {
        let g = build_grid(16, 4.0 * PI).unwrap();
        let s = SweState::zeros(&g);
        let t = full_rhs(&s, &SweParams::default()).unwrap();
        assert!(t.dh.is_zero() && t.dc.is_zero() && t.dd.is_zero());
        let nl = nonlinear_terms(&s, &SweParams::default()).unwrap();
        assert!(nl.f.is_zero() && nl.g.is_zero() && nl.pperp.is_zero());
    }

    #[test]
    fn single_mode_linear_action() {
        let g = build_grid(16, 4.0 * PI).unwrap();
        let p = SweParams { f_cor: 0.7, ..SweParams::default() }.linear();
        let mut s = SweState::zeros(&g);
        let (a, b, c) = (Complex64::new(0.3, -0.1), Complex64::new(-0.2, 0.5), Complex64::new(0.05, 0.4));
        s.h.set_mode(2, 3, a);
        s.c.set_mode(2, 3, b);
        s.d.set_mode(2, 3, c);
        s.u_mean = [0.4, -0.3];
        let t = full_rhs(&s, &p).unwrap();
        let m = linear_symbol(g.kappa() * 13f64.sqrt(), &p);
        let i = g.index(2, 3).unwrap();
        assert_eq!(t.dh.coeffs()[i], a * m[(0, 0)] + b * m[(0, 1)] + c * m[(0, 2)]);
        assert_eq!(t.dc.coeffs()[i], a * m[(1, 0)] + b * m[(1, 1)] + c * m[(1, 2)]);
        assert_eq!(t.dd.coeffs()[i], a * m[(2, 0)] + b * m[(2, 1)] + c * m[(2, 2)]);
        assert_eq!(t.du_mean, [0.7 * -0.3, -0.7 * 0.4]);
        assert_eq!(t.dh.hermitian_defect(), 0.0);
    }

    #[test]
    fn divergence_free_plane_wave_sources() {
        let g = build_grid(32, 2.0 * PI).unwrap();
        let p = SweParams::default();
        let mut psi = SpectralField::zeros(&g);
        psi.set_mode(1, 2, Complex64::new(0.3, 0.2));
        psi.set_mode(3, -1, Complex64::new(-0.1, 0.25));
        let u = perp_gradient(&psi);
        let s = SweState::from_height_velocity(&SpectralField::zeros(&g), &u, None).unwrap();
        assert!(s.c.max_coeff_abs() < 1e-16);
        let nl = nonlinear_terms(&s, &p).unwrap();
        assert!(nl.f.max_coeff_abs() < 1e-16);
        // -u.grad u computed independently with spectral products
        let t = g.padded();
        let uu = s.velocity();
        let (a, b) = (t.synthesize(&uu.u1), t.synthesize(&uu.u2));
        let mut adv = [Vec::new(), Vec::new()];
        for (k, comp) in [&uu.u1, &uu.u2].into_iter().enumerate() {
            let d1 = t.synthesize(&derivative(comp, 0));
            let d2 = t.synthesize(&derivative(comp, 1));
            adv[k] = (0..a.values.len()).map(|j| -(a.values[j] * d1.values[j] + b.values[j] * d2.values[j])).collect();
        }
        let [x, y] = adv;
        let hv = VectorField::new(
            t.analyze(&PhysicalField { size: t.size(), values: x }).without_mean(),
            t.analyze(&PhysicalField { size: t.size(), values: y }).without_mean(),
        )
        .unwrap();
        let (dv, dp) = hodge_split(&hv).unwrap();
        assert!(nl.pperp.distance(&dp) <= 1e-15);
        let expect_g = dv.add(&nl.adv_c).unwrap();
        assert!(nl.g.distance(&expect_g) <= 1e-15);
    }

    /// Eighth-order centred difference along one axis of a periodic sample grid.
    fn fd(v: &[f64], m: usize, dx: f64, axis: usize) -> Vec<f64> {
        const W: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
        let mut out = vec![0.0; v.len()];
        for i in 0..m {
            for j in 0..m {
                let mut acc = 0.0;
                for (s, w) in W.iter().enumerate() {
                    let o = s + 1;
                    let (p, q) = if axis == 0 {
                        (((i + o) % m) * m + j, ((i + m - o) % m) * m + j)
                    } else {
                        (i * m + (j + o) % m, i * m + (j + m - o) % m)
                    };
                    acc += w * (v[p] - v[q]);
                }
                out[i * m + j] = acc / dx;
            }
        }
        out
    }

    #[test]
    fn sources_match_finite_difference_oracle() {
        let g = build_grid(32, 2.0 * PI).unwrap();
        let p = SweParams { mu: 0.7, f_cor: 0.4, ..SweParams::default() };
        let s = smooth_state(&g, &mut Rng::seeded(11), 0.01, 3.2);
        let nl = nonlinear_terms(&s, &p).unwrap();
        assert!(!nl.zeta_active);

        let m = 4 * g.n();
        let t = Transform::new(g.clone(), m);
        let dx = g.length() / m as f64;
        let u = s.velocity();
        let (u1, u2, h, c) = (t.synthesize(&u.u1).values, t.synthesize(&u.u2).values, t.synthesize(&s.h).values, t.synthesize(&s.c).values);
        let d = |v: &[f64], a| fd(v, m, dx, a);
        let (u11, u12, u21, u22) = (d(&u1, 0), d(&u1, 1), d(&u2, 0), d(&u2, 1));
        let (h1, h2, c1, c2) = (d(&h, 0), d(&h, 1), d(&c, 0), d(&c, 1));
        let len = m * m;
        let mut out: [Vec<f64>; 5] = Default::default();
        for o in &mut out {
            o.resize(len, 0.0);
        }
        for j in 0..len {
            let div = u11[j] + u22[j];
            let z = zeta(h[j] + p.hbar0, p.hbar0);
            let d12 = 0.5 * (u12[j] + u21[j]);
            out[0][j] = -h[j] * div;
            out[1][j] = u1[j] * h1[j] + u2[j] * h2[j];
            out[2][j] = u1[j] * c1[j] + u2[j] * c2[j];
            out[3][j] = -(u1[j] * u11[j] + u2[j] * u12[j]) + 2.0 * p.mu * (h1[j] * u11[j] + h2[j] * d12 + h1[j] * div) / z;
            out[4][j] = -(u1[j] * u21[j] + u2[j] * u22[j]) + 2.0 * p.mu * (h1[j] * d12 + h2[j] * u22[j] + h2[j] * div) / z;
        }
        let [fo, ah, ac, x, y] = out.map(|values| t.analyze(&PhysicalField { size: m, values }).without_mean());
        let (dv, dp) = hodge_split(&VectorField::new(x, y).unwrap()).unwrap();
        let go = ac.add(&dv).unwrap();
        let rel = |a: &SpectralField, b: &SpectralField| a.distance(b) / b.norm_l2();
        assert!(rel(&nl.f, &fo) <= 1e-6, "F {}", rel(&nl.f, &fo));
        assert!(rel(&nl.adv_h, &ah) <= 1e-6);
        assert!(rel(&nl.g, &go) <= 1e-6, "G {}", rel(&nl.g, &go));
        assert!(rel(&nl.pperp, &dp) <= 1e-6, "P {}", rel(&nl.pperp, &dp));
        assert!(nl.mass_defect.abs() < 1e-15);
    }

    #[test]
    fn quadratic_start() {
        let g = build_grid(32, 4.0 * PI).unwrap();
        let p = SweParams::default();
        let x = smooth_state(&g, &mut Rng::seeded(12), 1.0, 4.0);
        let lin = linear_tendency(&x, &p);
        let defect = |eps: f64| {
            let mut s = x.clone();
            s.h.scale(eps);
            s.c.scale(eps);
            s.d.scale(eps);
            let t = full_rhs(&s, &p).unwrap();
            let r = |a: &SpectralField, b: &SpectralField| a.sub(&b.scaled(eps)).unwrap().norm_l2_sq();
            (r(&t.dh, &lin.dh) + r(&t.dc, &lin.dc) + r(&t.dd, &lin.dd)).sqrt()
        };
        let eps = [1e-2, 5e-3, 2.5e-3];
        let e: Vec<f64> = eps.iter().map(|&e| defect(e)).collect();
        for w in e.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 1.9, "order {order}");
        }
    }

    #[test]
    fn friedrichs_closure() {
        let g = build_grid(32, 8.0 * PI).unwrap();
        let p = SweParams { n_fried: Some(2), ..SweParams::default() };
        let raw = smooth_state(&g, &mut Rng::seeded(13), 0.1, 10.0);
        let s = SweState::from_potentials(raw.h, raw.c, raw.d, [0.3, 0.1], Some(2)).unwrap();
        assert!(s.is_friedrichs_invariant(2));
        let t = full_rhs(&s, &p).unwrap();
        for f in [&t.dh, &t.dc, &t.dd] {
            assert_eq!(&friedrichs_project(f, 2).unwrap(), f);
        }
    }

    #[test]
    fn gradient_velocity_has_no_rotational_part() {
        let g = build_grid(32, 4.0 * PI).unwrap();
        let phi = smooth_state(&g, &mut Rng::seeded(14), 1.0, 3.0).h;
        let s = SweState::from_height_velocity(&SpectralField::zeros(&g), &gradient(&phi), None).unwrap();
        assert!(s.d.norm_l2() <= 1e-15 * s.c.norm_l2());
    }

    #[test]
    fn large_height_triggers_truncation_flag() {
        let g = build_grid(16, 2.0 * PI).unwrap();
        let mut s = SweState::zeros(&g);
        s.h.set_mode(1, 0, Complex64::new(0.4, 0.0));
        s.c.set_mode(0, 1, Complex64::new(0.1, 0.0));
        let nl = nonlinear_terms(&s, &SweParams::default()).unwrap();
        assert!(nl.zeta_active);
        assert!(nl.g.is_finite());
    }
}

//! Homogeneous and hybrid Besov norms on the `(2, 1)` scale, Chemin-Lerner
//! time norms, the `E^s_T` functional and empirical inequality probes.
//!
//! All norms are assembled from per-band `L^2` norms `||Delta_k f||` over
//! the grid's band range `[k_min, k_max]`. The zero mode never contributes.

use serde::{Deserialize, Serialize};

use crate::spectral_core::{Grid, SpectralField};
use crate::time_integrator::Trajectory;
use crate::{Error, Result};

/// Regularity pair: weight `2^{ks}` for `k <= 0` and `2^{kt}` for `k > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HybridIndex {
    pub s: f64,
    pub t: f64,
}

impl HybridIndex {
    pub fn new(s: f64, t: f64) -> HybridIndex {
        HybridIndex { s, t }
    }

    pub fn homogeneous(s: f64) -> HybridIndex {
        HybridIndex { s, t: s }
    }

    pub fn weight(&self, k: i32) -> f64 {
        let e = if k <= 0 { self.s } else { self.t };
        2f64.powf(k as f64 * e)
    }
}

/// Per-band values indexed from `k_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandProfile {
    pub k_min: i32,
    pub values: Vec<f64>,
}

impl BandProfile {
    pub fn zeros(grid: &Grid) -> BandProfile {
        BandProfile {
            k_min: grid.k_min(),
            values: vec![0.0; grid.num_bands()],
        }
    }

    pub fn bands(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.values.iter().enumerate().map(move |(i, v)| (self.k_min + i as i32, *v))
    }

    pub fn get(&self, k: i32) -> f64 {
        let i = k - self.k_min;
        if i < 0 || i as usize >= self.values.len() {
            0.0
        } else {
            self.values[i as usize]
        }
    }

    /// `sum_k weight(k) * value_k`, summed in increasing `k`.
    pub fn weighted_sum(&self, idx: HybridIndex) -> f64 {
        self.bands().map(|(k, v)| idx.weight(k) * v).sum()
    }
}

/// Squared band norms `||Delta_k f||^2` without forming the blocks.
pub fn band_norms_sq(f: &SpectralField) -> BandProfile {
    let grid = f.grid();
    let c = f.coeffs();
    let mut out = BandProfile::zeros(grid);
    for (slot, k) in grid.bands().enumerate() {
        let band = grid.band(k).expect("band in range");
        let mut acc = 0.0;
        for (&i, &w) in band.indices.iter().zip(&band.weights) {
            acc += w * w * c[i as usize].norm_sqr();
        }
        out.values[slot] = acc;
    }
    out
}

/// `||Delta_k f||_{L^2}` for every band.
pub fn band_norms(f: &SpectralField) -> BandProfile {
    let mut p = band_norms_sq(f);
    for v in &mut p.values {
        *v = v.sqrt();
    }
    p
}

/// Band norms of a planar vector field given by its components (or by its
/// Hodge potentials, which have the same band norms).
pub fn vector_band_norms(a: &SpectralField, b: &SpectralField) -> BandProfile {
    let mut p = band_norms_sq(a);
    let q = band_norms_sq(b);
    for (v, w) in p.values.iter_mut().zip(&q.values) {
        *v = (*v + w).sqrt();
    }
    p
}

pub fn besov_norm(f: &SpectralField, s: f64) -> f64 {
    hybrid_norm(f, HybridIndex::homogeneous(s))
}

pub fn hybrid_norm(f: &SpectralField, idx: HybridIndex) -> f64 {
    band_norms(f).weighted_sum(idx)
}

/// Time exponent of a Chemin-Lerner norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TimeExponent {
    Finite(f64),
    Infinite,
}

impl TimeExponent {
    pub fn from_f64(p: f64) -> Result<TimeExponent> {
        if p == f64::INFINITY {
            Ok(TimeExponent::Infinite)
        } else if p >= 1.0 && p.is_finite() {
            Ok(TimeExponent::Finite(p))
        } else {
            Err(Error::InvalidParameter(format!("time exponent {p} outside [1, inf]")))
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            TimeExponent::Finite(p) => p,
            TimeExponent::Infinite => f64::INFINITY,
        }
    }
}

/// Running per-band `L^p(0, T; L^2)` accumulator (left-endpoint rule for
/// finite `p`, running maximum for `p = inf`).
#[derive(Debug, Clone, PartialEq)]
pub struct ClAccumulator {
    p: TimeExponent,
    grid: Grid,
    acc: Vec<f64>,
    time: f64,
    snapshots: usize,
}

impl ClAccumulator {
    pub fn new(grid: &Grid, p: TimeExponent) -> ClAccumulator {
        ClAccumulator {
            p,
            grid: grid.clone(),
            acc: vec![0.0; grid.num_bands()],
            time: 0.0,
            snapshots: 0,
        }
    }

    pub fn exponent(&self) -> TimeExponent {
        self.p
    }

    pub fn elapsed(&self) -> f64 {
        self.time
    }

    pub fn snapshots(&self) -> usize {
        self.snapshots
    }

    /// Adds a snapshot held over `[t, t + dt)`. `dt = 0` is allowed for the
    /// closing snapshot, which then only affects `p = inf`.
    pub fn accumulate(&mut self, f: &SpectralField, dt: f64) -> Result<()> {
        if !f.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        self.accumulate_profile(&band_norms(f), dt)
    }

    pub fn accumulate_profile(&mut self, norms: &BandProfile, dt: f64) -> Result<()> {
        if !(dt >= 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!("time step {dt}")));
        }
        if norms.values.len() != self.acc.len() || norms.k_min != self.grid.k_min() {
            return Err(Error::GridMismatch);
        }
        match self.p {
            TimeExponent::Infinite => {
                for (a, v) in self.acc.iter_mut().zip(&norms.values) {
                    *a = a.max(*v);
                }
            }
            TimeExponent::Finite(p) => {
                for (a, v) in self.acc.iter_mut().zip(&norms.values) {
                    *a += if p == 1.0 { v * dt } else { v.powf(p) * dt };
                }
            }
        }
        self.time += dt;
        self.snapshots += 1;
        Ok(())
    }

    /// `||Delta_k f||_{L^p_T(L^2)}` per band.
    pub fn band_values(&self) -> Result<BandProfile> {
        if self.snapshots == 0 {
            return Err(Error::EmptyAccumulator);
        }
        let values = match self.p {
            TimeExponent::Infinite => self.acc.clone(),
            TimeExponent::Finite(p) if p == 1.0 => self.acc.clone(),
            TimeExponent::Finite(p) => self.acc.iter().map(|a| a.powf(1.0 / p)).collect(),
        };
        Ok(BandProfile {
            k_min: self.grid.k_min(),
            values,
        })
    }

    pub fn finalize(&self, idx: HybridIndex) -> Result<f64> {
        Ok(self.band_values()?.weighted_sum(idx))
    }
}

/// Functional form of [`ClAccumulator::accumulate`].
pub fn cl_accumulate(mut acc: ClAccumulator, f: &SpectralField, dt: f64) -> Result<ClAccumulator> {
    acc.accumulate(f, dt)?;
    Ok(acc)
}

pub fn cl_finalize(acc: &ClAccumulator, idx: HybridIndex) -> Result<f64> {
    acc.finalize(idx)
}

/// Band-resolved accumulators behind the `E^s_T` functional: sup and
/// time-integral norms of the height and of the velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct EsAccumulator {
    pub h_sup: ClAccumulator,
    pub h_int: ClAccumulator,
    pub u_sup: ClAccumulator,
    pub u_int: ClAccumulator,
}

impl EsAccumulator {
    pub fn new(grid: &Grid) -> EsAccumulator {
        EsAccumulator {
            h_sup: ClAccumulator::new(grid, TimeExponent::Infinite),
            h_int: ClAccumulator::new(grid, TimeExponent::Finite(1.0)),
            u_sup: ClAccumulator::new(grid, TimeExponent::Infinite),
            u_int: ClAccumulator::new(grid, TimeExponent::Finite(1.0)),
        }
    }

    /// Records `(h, u)` with `u` given through its Hodge potentials.
    pub fn record(&mut self, h: &SpectralField, c: &SpectralField, d: &SpectralField, dt: f64) -> Result<()> {
        let hb = band_norms(h);
        let ub = vector_band_norms(c, d);
        self.h_sup.accumulate_profile(&hb, dt)?;
        self.h_int.accumulate_profile(&hb, dt)?;
        self.u_sup.accumulate_profile(&ub, dt)?;
        self.u_int.accumulate_profile(&ub, dt)?;
        Ok(())
    }

    /// `||h||_{L~inf(B^{s-1,s})} + ||u||_{L~inf(B^{s-1})}
    ///  + ||h||_{L^1(B^{s+3,s+2})} + ||u||_{L^1(B^{s+1})}`.
    pub fn value(&self, s: f64) -> Result<f64> {
        Ok(self.h_sup.finalize(HybridIndex::new(s - 1.0, s))?
            + self.u_sup.finalize(HybridIndex::homogeneous(s - 1.0))?
            + self.h_int.finalize(HybridIndex::new(s + 3.0, s + 2.0))?
            + self.u_int.finalize(HybridIndex::homogeneous(s + 1.0))?)
    }
}

/// `E^s_T` norm of a trajectory over its full span.
pub fn es_norm(traj: &Trajectory, s: f64) -> Result<f64> {
    traj.es_accumulator().ok_or(Error::EmptyTrajectory)?.value(s)
}

/// Timed samples of a scalar field; sample `i` is held over `[t_i, t_{i+1})`.
#[derive(Debug, Clone, Default)]
pub struct FieldSeries {
    pub times: Vec<f64>,
    pub fields: Vec<SpectralField>,
}

impl FieldSeries {
    pub fn push(&mut self, t: f64, f: SpectralField) {
        self.times.push(t);
        self.fields.push(f);
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    fn accumulator(&self, p: TimeExponent) -> Result<ClAccumulator> {
        let first = self.fields.first().ok_or(Error::EmptyTrajectory)?;
        let mut acc = ClAccumulator::new(first.grid(), p);
        for (i, f) in self.fields.iter().enumerate() {
            let dt = if i + 1 < self.times.len() { self.times[i + 1] - self.times[i] } else { 0.0 };
            acc.accumulate(f, dt)?;
        }
        Ok(acc)
    }

    /// `||f||_{L~^p_T(B^{s,t})}`.
    pub fn chemin_lerner(&self, p: TimeExponent, idx: HybridIndex) -> Result<f64> {
        self.accumulator(p)?.finalize(idx)
    }

    /// `||f||_{L^p_T(B^{s,t})}`: time norm of instantaneous hybrid norms.
    pub fn time_lp(&self, p: TimeExponent, idx: HybridIndex) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        let norms: Vec<f64> = self.fields.iter().map(|f| hybrid_norm(f, idx)).collect();
        Ok(match p {
            TimeExponent::Infinite => norms.iter().copied().fold(0.0, f64::max),
            TimeExponent::Finite(q) => {
                let mut acc = 0.0;
                for (i, v) in norms.iter().enumerate() {
                    let dt = if i + 1 < self.times.len() { self.times[i + 1] - self.times[i] } else { 0.0 };
                    acc += v.powf(q) * dt;
                }
                acc.powf(1.0 / q)
            }
        })
    }
}

/// Ratio `||fg|| / (||f||_inf ||g|| + ||f|| ||g||_inf)` in `B^{s1,s2}`.
///
/// The product is formed exactly on the doubled lattice; sup norms are
/// collocation maxima on the 3/2-padded grid.
pub fn check_product_estimate(f: &SpectralField, g: &SpectralField, idx: HybridIndex) -> Result<f64> {
    f.check_grid(g)?;
    if !(idx.s > 0.0 && idx.t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "product estimate needs positive indices, got ({}, {})",
            idx.s, idx.t
        )));
    }
    let grid = f.grid();
    let pad = grid.padded();
    let f_inf = pad.synthesize(f).max_abs();
    let g_inf = pad.synthesize(g).max_abs();
    let denom = f_inf * hybrid_norm(g, idx) + hybrid_norm(f, idx) * g_inf;
    if denom == 0.0 {
        return Err(Error::ZeroDenominator("product estimate"));
    }
    let fine = grid.refined();
    let up_f = prolong(f, fine);
    let up_g = prolong(g, fine);
    let t = fine.padded();
    // both factors are band-limited to |m| < N/2, so the product fits the 2N lattice
    let mut pf = t.synthesize(&up_f);
    let pg = t.synthesize(&up_g);
    for (a, b) in pf.values.iter_mut().zip(&pg.values) {
        *a *= b;
    }
    let fg = t.analyze(&pf);
    Ok(hybrid_norm(&fg, idx) / denom)
}

/// Copies a field onto a finer lattice with the same period.
pub fn prolong(f: &SpectralField, fine: &Grid) -> SpectralField {
    let mut out = SpectralField::zeros(fine);
    let grid = f.grid();
    for idx in 0..grid.len() {
        if let Some(p) = grid.partner(idx) {
            if idx < p {
                let (m1, m2) = grid.mode(idx);
                out.set_mode(m1, m2, f.coeffs()[idx]);
            }
        }
    }
    out.set_mean(f.mean());
    out
}

/// One Chemin-Lerner norm specification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClNorm {
    pub idx: HybridIndex,
    pub p: f64,
}

/// Ratio `||f||_{L~^p(B^{s,t})} / (||f||_{L~^p1}^theta ||f||_{L~^p2}^{1-theta})`.
pub fn check_interpolation(series: &FieldSeries, theta: f64, first: ClNorm, second: ClNorm, target: ClNorm) -> Result<f64> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::ExponentRelation(format!("theta = {theta} outside [0, 1]")));
    }
    let inv = |p: f64| if p == f64::INFINITY { 0.0 } else { 1.0 / p };
    let tol = 1e-12;
    let check = |name: &str, lhs: f64, rhs: f64| {
        if (lhs - rhs).abs() > tol * (1.0 + lhs.abs()) {
            Err(Error::ExponentRelation(format!("{name}: {lhs} != {rhs}")))
        } else {
            Ok(())
        }
    };
    check("1/p", inv(target.p), theta * inv(first.p) + (1.0 - theta) * inv(second.p))?;
    check("s", target.idx.s, theta * first.idx.s + (1.0 - theta) * second.idx.s)?;
    check("t", target.idx.t, theta * first.idx.t + (1.0 - theta) * second.idx.t)?;
    let lhs = series.chemin_lerner(TimeExponent::from_f64(target.p)?, target.idx)?;
    let a = series.chemin_lerner(TimeExponent::from_f64(first.p)?, first.idx)?;
    let b = series.chemin_lerner(TimeExponent::from_f64(second.p)?, second.idx)?;
    let rhs = a.powf(theta) * b.powf(1.0 - theta);
    if rhs == 0.0 {
        return Err(Error::ZeroDenominator("interpolation"));
    }
    Ok(lhs / rhs)
}

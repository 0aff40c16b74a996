use num_complex::Complex64;

use super::cutoff::{BumpCutoff, CutoffProfile};
use super::grid::Grid;
use crate::{Error, Result};

/// Fourier coefficients of a real scalar field on a periodic grid.
///
/// The zero mode is kept in a separate `mean` register; the coefficient
/// slot at `xi = 0` is always zero.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
    mean: f64,
}

impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        self.grid.same_as(&other.grid) && self.mean.to_bits() == other.mean.to_bits() && self.coeffs == other.coeffs
    }
}

impl SpectralField {
    pub fn zeros(grid: &Grid) -> SpectralField {
        SpectralField {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
            mean: 0.0,
        }
    }

    pub fn constant(grid: &Grid, mean: f64) -> SpectralField {
        let mut f = Self::zeros(grid);
        f.mean = mean;
        f
    }

    /// Wraps a coefficient vector in lattice order. The caller guarantees
    /// Hermitian symmetry.
    pub(crate) fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>, mean: f64) -> SpectralField {
        assert_eq!(coeffs.len(), grid.len());
        SpectralField {
            grid: grid.clone(),
            coeffs,
            mean,
        }
    }

    /// Builds a real field from `gen(m1, m2)`, evaluated once per
    /// Hermitian pair; the partner receives the conjugate.
    pub fn from_fn<F>(grid: &Grid, mut gen: F) -> SpectralField
    where
        F: FnMut(i64, i64) -> Complex64,
    {
        let mut f = Self::zeros(grid);
        for idx in 0..grid.len() {
            if let Some(p) = grid.partner(idx) {
                if idx < p {
                    let (m1, m2) = grid.mode(idx);
                    let z = gen(m1, m2);
                    f.coeffs[idx] = z;
                    f.coeffs[p] = z.conj();
                }
            }
        }
        f
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn set_mean(&mut self, mean: f64) {
        self.mean = mean;
    }

    pub fn coeff(&self, m1: i64, m2: i64) -> Complex64 {
        match self.grid.index(m1, m2) {
            Some(i) => self.coeffs[i],
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Sets the amplitude of `m` and its conjugate at `-m`.
    ///
    /// Panics if `m` is the origin or lies on a Nyquist line.
    pub fn set_mode(&mut self, m1: i64, m2: i64, z: Complex64) {
        let idx = self.grid.index(m1, m2).expect("mode outside lattice");
        let p = self.grid.partner(idx).expect("mode has no Hermitian partner");
        self.coeffs[idx] = z;
        self.coeffs[p] = z.conj();
    }

    pub fn check_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn is_mean_free(&self) -> bool {
        self.mean == 0.0
    }

    pub fn is_zero(&self) -> bool {
        self.mean == 0.0 && self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// Mean-square `L^2` norm, mean included.
    pub fn norm_l2(&self) -> f64 {
        self.norm_l2_sq().sqrt()
    }

    pub fn norm_l2_sq(&self) -> f64 {
        self.mean * self.mean + self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Real `L^2` pairing `(1/L^2) int f g`.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        self.mean * other.mean
            + self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.re * b.re + a.im * b.im)
                .sum::<f64>()
    }

    /// `L^2` distance, mean included.
    pub fn distance(&self, other: &SpectralField) -> f64 {
        let dm = self.mean - other.mean;
        (dm * dm
            + self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>())
        .sqrt()
    }

    pub fn max_coeff_abs(&self) -> f64 {
        self.coeffs.iter().fold(self.mean.abs(), |m, c| m.max(c.norm()))
    }

    pub fn max_coeff_diff(&self, other: &SpectralField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold((self.mean - other.mean).abs(), |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.mean.is_finite() && self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `max |c(-m) - conj(c(m))|`; zero for a real field.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for idx in 0..self.grid.len() {
            match self.grid.partner(idx) {
                Some(p) => worst = worst.max((self.coeffs[p] - self.coeffs[idx].conj()).norm()),
                None => worst = worst.max(self.coeffs[idx].norm()),
            }
        }
        worst
    }

    /// Projects onto real fields: averages each pair, clears unpaired slots.
    pub fn symmetrize(&mut self) {
        for idx in 0..self.grid.len() {
            match self.grid.partner(idx) {
                Some(p) if idx < p => {
                    let z = 0.5 * (self.coeffs[idx] + self.coeffs[p].conj());
                    self.coeffs[idx] = z;
                    self.coeffs[p] = z.conj();
                }
                Some(_) => {}
                None => self.coeffs[idx] = Complex64::new(0.0, 0.0),
            }
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.mean *= a;
        for c in &mut self.coeffs {
            *c *= a;
        }
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        let mut f = self.clone();
        f.scale(a);
        f
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &SpectralField) {
        debug_assert!(self.grid.same_as(&x.grid));
        self.mean += a * x.mean;
        for (c, d) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *c += d * a;
        }
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.check_grid(other)?;
        let mut f = self.clone();
        f.axpy(1.0, other);
        Ok(f)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.check_grid(other)?;
        let mut f = self.clone();
        f.axpy(-1.0, other);
        Ok(f)
    }

    pub fn without_mean(&self) -> SpectralField {
        let mut f = self.clone();
        f.mean = 0.0;
        f
    }

    /// Coefficient-wise multiplication by a real radial symbol `g(|xi|)`.
    /// The mean register is left untouched.
    pub fn map_radial<F: Fn(f64) -> f64>(&self, g: F) -> SpectralField {
        let r = self.grid.xi_norms();
        let mut f = self.clone();
        for (i, c) in f.coeffs.iter_mut().enumerate() {
            if c.re != 0.0 || c.im != 0.0 {
                *c *= g(r[i]);
            }
        }
        f
    }

    /// Coefficient-wise multiplication by a complex symbol of `(xi1, xi2, |xi|)`.
    /// Odd symbols must be imaginary and even ones real to preserve realness.
    pub fn map_symbol<F: Fn(f64, f64, f64) -> Complex64>(&self, g: F) -> SpectralField {
        let (x1, x2) = self.grid.xi_components();
        let r = self.grid.xi_norms();
        let mut f = self.clone();
        f.mean = 0.0;
        for (i, c) in f.coeffs.iter_mut().enumerate() {
            if c.re != 0.0 || c.im != 0.0 {
                *c *= g(x1[i], x2[i], r[i]);
            }
        }
        f
    }

    /// Keeps the coefficients where `keep(idx)` holds; the mean is dropped.
    pub(crate) fn masked<F: Fn(usize) -> bool>(&self, keep: F) -> SpectralField {
        let mut f = SpectralField::zeros(&self.grid);
        for (i, c) in self.coeffs.iter().enumerate() {
            if keep(i) {
                f.coeffs[i] = *c;
            }
        }
        f
    }
}

/// Pair of scalar components of a real planar vector field.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub u1: SpectralField,
    pub u2: SpectralField,
}

impl VectorField {
    pub fn new(u1: SpectralField, u2: SpectralField) -> Result<VectorField> {
        u1.check_grid(&u2)?;
        Ok(VectorField { u1, u2 })
    }

    pub fn grid(&self) -> &Grid {
        self.u1.grid()
    }

    pub fn norm_l2(&self) -> f64 {
        (self.u1.norm_l2_sq() + self.u2.norm_l2_sq()).sqrt()
    }

    pub fn distance(&self, other: &VectorField) -> f64 {
        let a = self.u1.distance(&other.u1);
        let b = self.u2.distance(&other.u2);
        (a * a + b * b).sqrt()
    }
}

/// `Delta_k f`: multiplication by `phi(2^-k |xi|)`. Bands outside the
/// lattice range give the zero field.
pub fn dyadic_block(f: &SpectralField, k: i32) -> SpectralField {
    let grid = f.grid();
    let mut out = SpectralField::zeros(grid);
    if let Some(band) = grid.band(k) {
        for (&i, &w) in band.indices.iter().zip(&band.weights) {
            out.coeffs[i as usize] = f.coeffs[i as usize] * w;
        }
    } else {
        let scale = 2f64.powi(-k);
        let profile = BumpCutoff;
        for i in 0..grid.len() {
            if grid.is_active(i) {
                let w = profile.phi(grid.xi_norm(i) * scale);
                if w > 0.0 {
                    out.coeffs[i] = f.coeffs[i] * w;
                }
            }
        }
    }
    out
}

/// `J_n f`: sharp truncation to `1/n <= |xi| <= n`; the mean is dropped.
pub fn friedrichs_project(f: &SpectralField, n: u32) -> Result<SpectralField> {
    if n == 0 {
        return Err(Error::ZeroFriedrichsIndex);
    }
    let lo = 1.0 / n as f64;
    let hi = n as f64;
    let r = f.grid().xi_norms();
    Ok(f.masked(|i| r[i] >= lo && r[i] <= hi))
}

/// `Lambda^s f`, the multiplier `|xi|^s`. For `s <= 0` the field must be
/// mean-free; for `s > 0` the mean is annihilated.
pub fn lambda_pow(f: &SpectralField, s: f64) -> Result<SpectralField> {
    if s <= 0.0 && f.mean() != 0.0 {
        return Err(Error::MeanWithNegativePower(s, f.mean()));
    }
    let mut out = if s == 1.0 {
        f.map_radial(|r| r)
    } else if s == 2.0 {
        f.map_radial(|r| r * r)
    } else if s == -1.0 {
        f.map_radial(|r| 1.0 / r)
    } else {
        f.map_radial(|r| r.powf(s))
    };
    out.set_mean(0.0);
    Ok(out)
}

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::field::SpectralField;
use super::grid::{slot, Grid};

/// Real samples on an `M x M` collocation grid, row-major in `(x1, x2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    pub size: usize,
    pub values: Vec<f64>,
}

impl PhysicalField {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Synthesis/analysis between a spectral lattice and an `M x M` sample grid
/// (`M >= N`). Zero-padding in frequency gives exact samples of the
/// band-limited field; analysis truncates back to the lattice.
pub struct Transform {
    grid: Grid,
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Transform {
    pub fn new(grid: Grid, size: usize) -> Transform {
        assert!(size >= grid.n());
        let mut planner = FftPlanner::new();
        Transform {
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
            grid,
            size,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn fft2(&self, buf: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let m = self.size;
        fft.process(buf);
        let mut t = vec![Complex64::new(0.0, 0.0); m * m];
        transpose(buf, &mut t, m);
        fft.process(&mut t);
        transpose(&t, buf, m);
    }

    /// Samples of `mean + sum_m coeff(m) e^{i xi.x}` at `x_j = j L / M`.
    pub fn synthesize_with<F>(&self, mean: f64, mut coeff: F) -> PhysicalField
    where
        F: FnMut(usize) -> Complex64,
    {
        let m = self.size;
        let mut buf = vec![Complex64::new(0.0, 0.0); m * m];
        for idx in 0..self.grid.len() {
            if !self.grid.is_active(idx) {
                continue;
            }
            let c = coeff(idx);
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            let (m1, m2) = self.grid.mode(idx);
            buf[slot(m1, m) * m + slot(m2, m)] = c;
        }
        buf[0] = Complex64::new(mean, 0.0);
        self.fft2(&mut buf, &self.inverse);
        PhysicalField {
            size: m,
            values: buf.into_iter().map(|z| z.re).collect(),
        }
    }

    pub fn synthesize(&self, f: &SpectralField) -> PhysicalField {
        debug_assert!(f.grid().same_as(&self.grid));
        let c = f.coeffs();
        self.synthesize_with(f.mean(), |i| c[i])
    }

    /// Fourier analysis followed by truncation to the active lattice.
    /// The result is symmetrised so that Hermitian symmetry holds exactly.
    pub fn analyze(&self, samples: &PhysicalField) -> SpectralField {
        assert_eq!(samples.size, self.size);
        let m = self.size;
        let mut buf: Vec<Complex64> = samples.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft2(&mut buf, &self.forward);
        let scale = 1.0 / (m * m) as f64;
        let mut out = SpectralField::zeros(&self.grid);
        let mean = buf[0].re * scale;
        let coeffs = out.coeffs_mut();
        for idx in 0..self.grid.len() {
            if !self.grid.is_active(idx) {
                continue;
            }
            let (m1, m2) = self.grid.mode(idx);
            coeffs[idx] = buf[slot(m1, m) * m + slot(m2, m)] * scale;
        }
        out.set_mean(mean);
        out.symmetrize();
        out
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], m: usize) {
    const B: usize = 32;
    for ib in (0..m).step_by(B) {
        for jb in (0..m).step_by(B) {
            for i in ib..(ib + B).min(m) {
                for j in jb..(jb + B).min(m) {
                    dst[j * m + i] = src[i * m + j];
                }
            }
        }
    }
}

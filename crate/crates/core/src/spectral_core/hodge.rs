use num_complex::Complex64;

use super::field::{SpectralField, VectorField};
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `(c, d) = (Lambda^-1 div u, Lambda^-1 div_perp u)` with
/// `div_perp u = -d_2 u^1 + d_1 u^2`.
pub fn hodge_split(u: &VectorField) -> Result<(SpectralField, SpectralField)> {
    u.u1.check_grid(&u.u2)?;
    if !u.u1.is_mean_free() {
        return Err(Error::NonzeroMean("u^1", u.u1.mean()));
    }
    if !u.u2.is_mean_free() {
        return Err(Error::NonzeroMean("u^2", u.u2.mean()));
    }
    let grid = u.grid();
    let (x1, x2) = grid.xi_components();
    let r = grid.xi_norms();
    let mut c = SpectralField::zeros(grid);
    let mut d = SpectralField::zeros(grid);
    let (a, b) = (u.u1.coeffs(), u.u2.coeffs());
    {
        let cc = c.coeffs_mut();
        for i in 0..a.len() {
            if r[i] > 0.0 {
                let e1 = x1[i] / r[i];
                let e2 = x2[i] / r[i];
                cc[i] = I * (a[i] * e1 + b[i] * e2);
            }
        }
    }
    {
        let dc = d.coeffs_mut();
        for i in 0..a.len() {
            if r[i] > 0.0 {
                let e1 = x1[i] / r[i];
                let e2 = x2[i] / r[i];
                dc[i] = I * (b[i] * e1 - a[i] * e2);
            }
        }
    }
    Ok((c, d))
}

/// `u = -Lambda^-1 grad c - Lambda^-1 grad_perp d`, `grad_perp = (-d_2, d_1)`.
pub fn hodge_assemble(c: &SpectralField, d: &SpectralField) -> Result<VectorField> {
    c.check_grid(d)?;
    if !c.is_mean_free() {
        return Err(Error::NonzeroMean("c", c.mean()));
    }
    if !d.is_mean_free() {
        return Err(Error::NonzeroMean("d", d.mean()));
    }
    let grid = c.grid();
    let (x1, x2) = grid.xi_components();
    let r = grid.xi_norms();
    let mut u1 = SpectralField::zeros(grid);
    let mut u2 = SpectralField::zeros(grid);
    let (cc, dc) = (c.coeffs(), d.coeffs());
    {
        let out = u1.coeffs_mut();
        for i in 0..cc.len() {
            if r[i] > 0.0 {
                let e1 = x1[i] / r[i];
                let e2 = x2[i] / r[i];
                out[i] = -I * (cc[i] * e1 - dc[i] * e2);
            }
        }
    }
    {
        let out = u2.coeffs_mut();
        for i in 0..cc.len() {
            if r[i] > 0.0 {
                let e1 = x1[i] / r[i];
                let e2 = x2[i] / r[i];
                out[i] = -I * (cc[i] * e2 + dc[i] * e1);
            }
        }
    }
    Ok(VectorField { u1, u2 })
}

/// Spectral gradient `(d_1 h, d_2 h)`.
pub fn gradient(h: &SpectralField) -> VectorField {
    VectorField {
        u1: h.map_symbol(|x1, _, _| I * x1),
        u2: h.map_symbol(|_, x2, _| I * x2),
    }
}

/// Spectral `grad_perp h = (-d_2 h, d_1 h)`.
pub fn perp_gradient(h: &SpectralField) -> VectorField {
    VectorField {
        u1: h.map_symbol(|_, x2, _| -I * x2),
        u2: h.map_symbol(|x1, _, _| I * x1),
    }
}

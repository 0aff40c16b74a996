//! Run-directory writers. Nothing written here depends on the clock or on
//! thread scheduling, so identical configurations give identical files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use swlab_core::besov_norms::{band_norms, vector_band_norms};
use swlab_core::swe_model::SweState;

use crate::Result;

pub fn ensure_dir(path: &Path) -> Result<PathBuf> {
    fs::create_dir_all(path)?;
    Ok(path.to_path_buf())
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// One line of `norms.csv`.
#[derive(Debug, Clone, Serialize)]
pub struct NormRow {
    pub quantity: String,
    pub s: f64,
    pub t: f64,
    /// Time exponent; `inf` for sup norms, 0 for instantaneous norms.
    pub p: String,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub value: f64,
    #[serde(rename = "grid_N")]
    pub grid_n: usize,
    #[serde(rename = "grid_L")]
    pub grid_l: f64,
    pub psi_profile_id: String,
}

#[derive(Serialize)]
struct BandRow {
    time: f64,
    k: i32,
    h: f64,
    u: f64,
}

#[derive(Serialize)]
struct CoeffRow {
    m1: i64,
    m2: i64,
    h_re: f64,
    h_im: f64,
    c_re: f64,
    c_im: f64,
    d_re: f64,
    d_im: f64,
}

/// Dyadic band norms of `h` and `u` for each state, one row per band.
pub fn write_band_dump(path: &Path, states: &[&SweState]) -> Result<()> {
    let mut rows = Vec::new();
    for s in states {
        let hb = band_norms(&s.h);
        let ub = vector_band_norms(&s.c, &s.d);
        for ((k, h), (_, u)) in hb.bands().zip(ub.bands()) {
            rows.push(BandRow { time: s.time, k, h, u });
        }
    }
    write_csv(path, &rows)
}

/// Nonzero Fourier amplitudes of a state, one half-plane representative per pair.
pub fn write_state_dump(path: &Path, s: &SweState) -> Result<()> {
    let grid = s.grid();
    let (h, c, d) = (s.h.coeffs(), s.c.coeffs(), s.d.coeffs());
    let mut rows = Vec::new();
    for idx in 0..grid.len() {
        let Some(p) = grid.partner(idx) else { continue };
        if idx >= p {
            continue;
        }
        if h[idx].norm_sqr() + c[idx].norm_sqr() + d[idx].norm_sqr() == 0.0 {
            continue;
        }
        let (m1, m2) = grid.mode(idx);
        rows.push(CoeffRow {
            m1,
            m2,
            h_re: h[idx].re,
            h_im: h[idx].im,
            c_re: c[idx].re,
            c_im: c[idx].im,
            d_re: d[idx].re,
            d_im: d[idx].im,
        });
    }
    rows.sort_by_key(|r| (r.m1, r.m2));
    write_csv(path, &rows)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

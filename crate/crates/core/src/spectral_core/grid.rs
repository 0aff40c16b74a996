use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use super::cutoff::{BumpCutoff, CutoffProfile};
use super::transform::Transform;
use crate::{Error, Result};

/// Lattice points carrying a nonzero `phi(2^-k xi)` weight for one band.
#[derive(Debug, Clone)]
pub struct BandSupport {
    pub k: i32,
    pub indices: Vec<u32>,
    pub weights: Vec<f64>,
}

struct GridData {
    n: usize,
    length: f64,
    kappa: f64,
    k_min: i32,
    k_max: i32,
    xi1: Vec<f64>,
    xi2: Vec<f64>,
    xi_norm: Vec<f64>,
    shell: Vec<u32>,
    shell_keys: Vec<u64>,
    partner: Vec<u32>,
    bands: Vec<BandSupport>,
    padded: OnceLock<Transform>,
    doubled: OnceLock<Transform>,
    refined: OnceLock<Grid>,
}

/// Periodic square grid with `N` points per side and period `L`.
///
/// Cheap to clone; all lattice tables are shared.
#[derive(Clone)]
pub struct Grid(Arc<GridData>);

pub(crate) const NO_PARTNER: u32 = u32::MAX;

/// Lattice index of an FFT slot: `i < N/2` maps to `i`, the rest wraps negative.
#[inline]
pub(crate) fn wave_number(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

#[inline]
pub(crate) fn slot(m: i64, n: usize) -> usize {
    m.rem_euclid(n as i64) as usize
}

pub fn build_grid(n: usize, length: f64) -> Result<Grid> {
    Grid::new(n, length)
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Grid> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGridSize(n));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidGridLength(length));
        }
        let kappa = 2.0 * PI / length;
        let total = n * n;
        let half = (n / 2) as i64;
        let mut xi1 = vec![0.0; total];
        let mut xi2 = vec![0.0; total];
        let mut xi_norm = vec![0.0; total];
        let mut keys = vec![0u64; total];
        let mut partner = vec![NO_PARTNER; total];
        let mut r_min = f64::INFINITY;
        let mut r_max = 0.0f64;
        for i1 in 0..n {
            let m1 = wave_number(i1, n);
            for i2 in 0..n {
                let m2 = wave_number(i2, n);
                let idx = i1 * n + i2;
                xi1[idx] = kappa * m1 as f64;
                xi2[idx] = kappa * m2 as f64;
                let key = (m1 * m1 + m2 * m2) as u64;
                keys[idx] = key;
                xi_norm[idx] = kappa * (key as f64).sqrt();
                if key > 0 {
                    r_min = r_min.min(xi_norm[idx]);
                    r_max = r_max.max(xi_norm[idx]);
                }
                if key > 0 && m1 != -half && m2 != -half {
                    partner[idx] = (slot(-m1, n) * n + slot(-m2, n)) as u32;
                }
            }
        }

        // Closed annulus [3/4 2^k, 8/3 2^k] must meet the nonzero lattice.
        let mut k_min = (r_min / (8.0 / 3.0)).log2().ceil() as i32;
        while 8.0 / 3.0 * 2f64.powi(k_min - 1) >= r_min {
            k_min -= 1;
        }
        while 8.0 / 3.0 * 2f64.powi(k_min) < r_min {
            k_min += 1;
        }
        let mut k_max = (r_max / 0.75).log2().floor() as i32;
        while 0.75 * 2f64.powi(k_max + 1) <= r_max {
            k_max += 1;
        }
        while 0.75 * 2f64.powi(k_max) > r_max {
            k_max -= 1;
        }

        let mut shell_keys: Vec<u64> = keys.clone();
        shell_keys.sort_unstable();
        shell_keys.dedup();
        let shell = keys
            .iter()
            .map(|k| shell_keys.binary_search(k).unwrap() as u32)
            .collect();

        let profile = BumpCutoff;
        let bands = (k_min..=k_max)
            .map(|k| {
                let scale = 2f64.powi(-k);
                let mut indices = Vec::new();
                let mut weights = Vec::new();
                for idx in 0..total {
                    if partner[idx] == NO_PARTNER {
                        continue;
                    }
                    let w = profile.phi(xi_norm[idx] * scale);
                    if w > 0.0 {
                        indices.push(idx as u32);
                        weights.push(w);
                    }
                }
                BandSupport { k, indices, weights }
            })
            .collect();

        Ok(Grid(Arc::new(GridData {
            n,
            length,
            kappa,
            k_min,
            k_max,
            xi1,
            xi2,
            xi_norm,
            shell,
            shell_keys,
            partner,
            bands,
            padded: OnceLock::new(),
            doubled: OnceLock::new(),
            refined: OnceLock::new(),
        })))
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn length(&self) -> f64 {
        self.0.length
    }

    /// Lattice spacing `2 pi / L`.
    pub fn kappa(&self) -> f64 {
        self.0.kappa
    }

    pub fn k_min(&self) -> i32 {
        self.0.k_min
    }

    pub fn k_max(&self) -> i32 {
        self.0.k_max
    }

    pub fn bands(&self) -> impl Iterator<Item = i32> {
        self.0.k_min..=self.0.k_max
    }

    pub fn num_bands(&self) -> usize {
        (self.0.k_max - self.0.k_min + 1) as usize
    }

    pub fn len(&self) -> usize {
        self.0.n * self.0.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn xi(&self, idx: usize) -> (f64, f64) {
        (self.0.xi1[idx], self.0.xi2[idx])
    }

    pub fn xi_norm(&self, idx: usize) -> f64 {
        self.0.xi_norm[idx]
    }

    pub(crate) fn xi_norms(&self) -> &[f64] {
        &self.0.xi_norm
    }

    pub(crate) fn xi_components(&self) -> (&[f64], &[f64]) {
        (&self.0.xi1, &self.0.xi2)
    }

    /// Integer lattice coordinates of a storage index.
    pub fn mode(&self, idx: usize) -> (i64, i64) {
        let n = self.0.n;
        (wave_number(idx / n, n), wave_number(idx % n, n))
    }

    /// Storage index of lattice point `m`, or `None` when out of range.
    pub fn index(&self, m1: i64, m2: i64) -> Option<usize> {
        let n = self.0.n;
        let half = (n / 2) as i64;
        if m1 < -half || m1 >= half || m2 < -half || m2 >= half {
            return None;
        }
        Some(slot(m1, n) * n + slot(m2, n))
    }

    /// Index of `-m`; `None` at the origin and on the Nyquist lines.
    pub fn partner(&self, idx: usize) -> Option<usize> {
        match self.0.partner[idx] {
            NO_PARTNER => None,
            p => Some(p as usize),
        }
    }

    /// True for lattice points that may carry a nonzero amplitude.
    pub fn is_active(&self, idx: usize) -> bool {
        self.0.partner[idx] != NO_PARTNER
    }

    /// Shell id of each lattice point; points on one shell share `|xi|`.
    pub fn shell_of(&self, idx: usize) -> usize {
        self.0.shell[idx] as usize
    }

    pub fn num_shells(&self) -> usize {
        self.0.shell_keys.len()
    }

    /// `|xi|` of a shell.
    pub fn shell_radius(&self, shell: usize) -> f64 {
        self.0.kappa * (self.0.shell_keys[shell] as f64).sqrt()
    }

    /// `m1^2 + m2^2` of a shell.
    pub fn shell_key(&self, shell: usize) -> u64 {
        self.0.shell_keys[shell]
    }

    /// Radii of every nonzero lattice point, Nyquist lines included.
    pub fn lattice_radii(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.xi_norm.iter().copied().filter(|r| *r > 0.0)
    }

    /// Largest `|xi|` among points that can carry amplitude.
    pub fn max_active_radius(&self) -> f64 {
        (0..self.len())
            .filter(|&i| self.is_active(i))
            .map(|i| self.0.xi_norm[i])
            .fold(0.0, f64::max)
    }

    pub fn band(&self, k: i32) -> Option<&BandSupport> {
        if k < self.0.k_min || k > self.0.k_max {
            None
        } else {
            Some(&self.0.bands[(k - self.0.k_min) as usize])
        }
    }

    /// 3/2-padded transform used for dealiased products.
    pub fn padded(&self) -> &Transform {
        self.0
            .padded
            .get_or_init(|| Transform::new(self.clone(), 3 * self.0.n / 2))
    }

    /// Transform on a `2N` collocation grid.
    pub fn doubled(&self) -> &Transform {
        self.0
            .doubled
            .get_or_init(|| Transform::new(self.clone(), 2 * self.0.n))
    }

    /// Grid with the same period and twice the resolution.
    pub fn refined(&self) -> &Grid {
        self.0
            .refined
            .get_or_init(|| Grid::new(2 * self.0.n, self.0.length).expect("refinement of a valid grid"))
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.n == other.0.n && self.0.length.to_bits() == other.0.length.to_bits())
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.0.n)
            .field("length", &self.0.length)
            .field("k_min", &self.0.k_min)
            .field("k_max", &self.0.k_max)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force band range: every k whose closed annulus contains a
    /// nonzero lattice radius.
    fn band_range_oracle(n: usize, length: f64) -> (i32, i32) {
        let kappa = 2.0 * PI / length;
        let half = (n / 2) as i64;
        let mut hit = Vec::new();
        for k in -40..40 {
            let lo = 0.75 * 2f64.powi(k);
            let hi = 8.0 / 3.0 * 2f64.powi(k);
            let mut any = false;
            for m1 in -half..half {
                for m2 in -half..half {
                    if m1 == 0 && m2 == 0 {
                        continue;
                    }
                    let r = kappa * ((m1 * m1 + m2 * m2) as f64).sqrt();
                    if r >= lo && r <= hi {
                        any = true;
                    }
                }
            }
            if any {
                hit.push(k);
            }
        }
        (*hit.first().unwrap(), *hit.last().unwrap())
    }

    #[test]
    fn band_range_matches_enumeration() {
        for &(n, l) in &[(8, 2.0 * PI), (16, 4.0 * PI), (32, 16.0 * PI), (64, 3.0), (128, 16.0 * PI)] {
            let g = build_grid(n, l).unwrap();
            assert_eq!((g.k_min(), g.k_max()), band_range_oracle(n, l), "n={n} l={l}");
        }
    }

    #[test]
    fn reference_grids() {
        let g = build_grid(8, 2.0 * PI).unwrap();
        assert!(g.k_min() <= 0);
        assert_eq!(g.kappa(), 1.0);
        let g = build_grid(128, 16.0 * PI).unwrap();
        assert_eq!(g.k_min(), -4);
        assert!((g.kappa() - 0.125).abs() < 1e-15);
        assert_eq!(g.k_max(), 3);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(build_grid(7, 1.0), Err(Error::InvalidGridSize(7))));
        assert!(matches!(build_grid(4, 1.0), Err(Error::InvalidGridSize(4))));
        assert!(matches!(build_grid(24, 1.0), Err(Error::InvalidGridSize(24))));
        assert!(build_grid(16, 0.0).is_err());
        assert!(build_grid(16, -1.0).is_err());
        assert!(build_grid(16, f64::NAN).is_err());
    }

    #[test]
    fn unit_annulus_resolvable_on_large_tori() {
        for &n in &[8usize, 16, 64] {
            for &l in &[4.0 * PI, 6.0 * PI, 16.0 * PI] {
                let g = build_grid(n, l).unwrap();
                if g.max_active_radius() < 0.75 {
                    assert!(g.k_max() < 0, "n={n} l={l}");
                    continue;
                }
                assert!(g.k_min() <= 0 && 0 <= g.k_max(), "n={n} l={l}");
            }
        }
    }

    #[test]
    fn lattice_inside_band_envelope() {
        let g = build_grid(64, 16.0 * PI).unwrap();
        let lo = 0.75 * 2f64.powi(g.k_min());
        let hi = 8.0 / 3.0 * 2f64.powi(g.k_max());
        for r in g.lattice_radii() {
            assert!(lo <= r && r <= hi);
        }
    }

    #[test]
    fn partners_are_involutive() {
        let g = build_grid(16, 2.0 * PI).unwrap();
        for idx in 0..g.len() {
            if let Some(p) = g.partner(idx) {
                assert_eq!(g.partner(p), Some(idx));
                let (a, b) = g.mode(idx);
                assert_eq!(g.mode(p), (-a, -b));
                assert_eq!(g.xi_norm(p), g.xi_norm(idx));
            }
        }
    }
}

//! Strang splitting of the regularised system: the stiff linear part is
//! advanced exactly with per-shell matrix exponentials, the quadratic
//! sources with the explicit midpoint rule.

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::besov_norms::{vector_band_norms, EsAccumulator, HybridIndex};
use crate::spectral_core::{Grid, SpectralField};
use crate::swe_model::{linear_symbol, nonlinear_tendency, SweParams, SweState};
use crate::{Error, Result};

/// Coefficient magnitude treated as blow-up.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;

/// `exp(dt A(r))` for every lattice shell of one grid.
#[derive(Debug, Clone)]
pub struct Propagator {
    grid: Grid,
    params: SweParams,
    dt: f64,
    mats: Vec<Matrix3<f64>>,
    rotation: [f64; 2],
}

impl Propagator {
    pub fn new(grid: &Grid, params: &SweParams, dt: f64) -> Result<Propagator> {
        params.validate()?;
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("time step {dt}")));
        }
        let mats = (0..grid.num_shells())
            .map(|s| (linear_symbol(grid.shell_radius(s), params) * dt).exp())
            .collect();
        let angle = params.f_cor * dt;
        Ok(Propagator {
            grid: grid.clone(),
            params: *params,
            dt,
            mats,
            rotation: [angle.cos(), angle.sin()],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn params(&self) -> &SweParams {
        &self.params
    }

    /// Cached exponential for a shell.
    pub fn shell_matrix(&self, shell: usize) -> &Matrix3<f64> {
        &self.mats[shell]
    }

    pub fn matches(&self, grid: &Grid, params: &SweParams, dt: f64) -> bool {
        self.grid.same_as(grid) && self.params.bits() == params.bits() && self.dt.to_bits() == dt.to_bits()
    }

    /// Rebuilds the cache if the grid, parameters or step changed.
    pub fn ensure(&mut self, grid: &Grid, params: &SweParams, dt: f64) -> Result<()> {
        if !self.matches(grid, params, dt) {
            *self = Propagator::new(grid, params, dt)?;
        }
        Ok(())
    }
}

/// Step size, horizon and CFL safety factor for the explicit part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub dt: f64,
    pub t_end: f64,
    pub safety: f64,
    pub max_steps: usize,
}

impl StepControl {
    pub fn new(dt: f64, t_end: f64) -> StepControl {
        StepControl {
            dt,
            t_end,
            safety: 0.5,
            max_steps: 1_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_end must be nonnegative, got {}", self.t_end)));
        }
        if !(self.safety > 0.0) {
            return Err(Error::InvalidParameter(format!("safety must be positive, got {}", self.safety)));
        }
        let n = self.num_steps();
        if n > self.max_steps {
            return Err(Error::InvalidParameter(format!("{n} steps exceed max_steps = {}", self.max_steps)));
        }
        Ok(())
    }

    /// `ceil(t_end / dt)`, ignoring a round-off excess.
    pub fn num_steps(&self) -> usize {
        let q = self.t_end / self.dt;
        let n = q.ceil();
        if n - q > 1.0 - 1e-9 {
            (n - 1.0).max(0.0) as usize
        } else {
            n as usize
        }
    }

    /// Step that divides the horizon evenly.
    pub fn effective_dt(&self) -> f64 {
        match self.num_steps() {
            0 => self.dt,
            n => self.t_end / n as f64,
        }
    }

    /// `safety / (max|u| max|xi|)`.
    pub fn cfl_limit(&self, u_max: f64, xi_max: f64) -> f64 {
        let denom = u_max * xi_max;
        if denom > 0.0 {
            self.safety / denom
        } else {
            f64::INFINITY
        }
    }
}

fn apply(grid: &Grid, prop: &Propagator, h: &mut SpectralField, c: &mut SpectralField, d: &mut SpectralField) {
    let (hc, cc, dc) = (h.coeffs_mut(), c.coeffs_mut(), d.coeffs_mut());
    for i in 0..grid.len() {
        let (x, y, z) = (hc[i], cc[i], dc[i]);
        if x == Complex64::ZERO && y == Complex64::ZERO && z == Complex64::ZERO {
            continue;
        }
        let m = &prop.mats[grid.shell_of(i)];
        hc[i] = x * m[(0, 0)] + y * m[(0, 1)] + z * m[(0, 2)];
        cc[i] = x * m[(1, 0)] + y * m[(1, 1)] + z * m[(1, 2)];
        dc[i] = x * m[(2, 0)] + y * m[(2, 1)] + z * m[(2, 2)];
    }
}

/// Exact linear flow over `dt`; the mean velocity turns clockwise by `f dt`.
pub fn linear_step(state: &SweState, dt: f64, prop: &Propagator) -> Result<SweState> {
    if !prop.matches(state.grid(), &prop.params, dt) {
        return Err(Error::PropagatorMismatch);
    }
    let mut out = state.clone();
    apply(state.grid(), prop, &mut out.h, &mut out.c, &mut out.d);
    let [co, si] = prop.rotation;
    let [a, b] = state.u_mean;
    out.u_mean = [co * a + si * b, -si * a + co * b];
    out.time = state.time + dt;
    Ok(out)
}

/// Diagnostics gathered during one step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepInfo {
    pub zeta_active: bool,
    pub mass_defect: f64,
    pub u_max: f64,
}

/// One Strang step of size `ctrl.dt`; `half` must be built for `ctrl.dt / 2`.
pub fn step(state: &SweState, ctrl: &StepControl, half: &Propagator) -> Result<(SweState, StepInfo)> {
    let dt = ctrl.dt;
    let params = *half.params();
    if half.dt().to_bits() != (0.5 * dt).to_bits() || !half.grid.same_as(state.grid()) {
        return Err(Error::PropagatorMismatch);
    }
    let mut s = linear_step(state, 0.5 * dt, half)?;
    let mut info = StepInfo::default();
    if params.nonlinear {
        let (k1, nl1) = nonlinear_tendency(&s, &params)?;
        let limit = ctrl.cfl_limit(nl1.u_max, state.grid().max_active_radius());
        if dt > limit {
            return Err(Error::CflViolation { dt, limit });
        }
        let mut mid = s.clone();
        mid.axpy(0.5 * dt, &k1);
        let (k2, nl2) = nonlinear_tendency(&mid, &params)?;
        s.axpy(dt, &k2);
        info = StepInfo {
            zeta_active: nl1.zeta_active || nl2.zeta_active,
            mass_defect: nl1.mass_defect.abs().max(nl2.mass_defect.abs()),
            u_max: nl1.u_max,
        };
    }
    let mut out = linear_step(&s, 0.5 * dt, half)?;
    out.time = state.time + dt;
    Ok((out, info))
}

/// When snapshots are stored; the initial and final states are always kept.
#[derive(Debug, Clone, PartialEq)]
pub enum Probes {
    Endpoints,
    Times(Vec<f64>),
    Every(usize),
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub state: SweState,
    /// Accumulators over `[0, state.time]`.
    pub es: EsAccumulator,
}

impl Snapshot {
    pub fn time(&self) -> f64 {
        self.state.time
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    /// Start of the step.
    pub time: f64,
    pub dt: f64,
    /// `||u(time)||_{B^2}`.
    pub u_besov2: f64,
    pub info: StepInfo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowUp {
    /// Time of the last valid state.
    pub time: f64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: SweParams,
    pub snapshots: Vec<Snapshot>,
    pub steps: Vec<StepRecord>,
    es: EsAccumulator,
    /// Last valid state.
    pub final_state: SweState,
    pub blow_up: Option<BlowUp>,
}

impl Trajectory {
    pub fn es_accumulator(&self) -> Option<&EsAccumulator> {
        if self.es.h_sup.snapshots() == 0 {
            None
        } else {
            Some(&self.es)
        }
    }

    pub fn start_time(&self) -> f64 {
        self.snapshots.first().map_or(0.0, |s| s.time())
    }

    pub fn end_time(&self) -> f64 {
        self.final_state.time
    }

    pub fn zeta_triggered(&self) -> bool {
        self.steps.iter().any(|s| s.info.zeta_active)
    }

    pub fn max_mass_defect(&self) -> f64 {
        self.steps.iter().fold(0.0, |m, s| m.max(s.info.mass_defect))
    }

    /// Turns a blow-up into an error.
    pub fn into_result(self) -> Result<Trajectory> {
        match self.blow_up {
            Some(b) => Err(Error::BlowUp { time: b.time, reason: b.reason }),
            None => Ok(self),
        }
    }
}

/// Why `state` counts as blown up, if it does.
pub fn blow_up_reason(state: &SweState) -> Option<String> {
    if !state.is_finite() {
        Some("non-finite coefficient".to_string())
    } else if state.max_coeff_abs() > BLOW_UP_THRESHOLD {
        Some(format!("coefficient above {BLOW_UP_THRESHOLD:e}"))
    } else {
        None
    }
}

/// Step errors that end a run instead of rejecting its input.
pub fn failure_reason(e: &Error) -> Option<String> {
    match e {
        Error::NonFinite(what) => Some(format!("non-finite {what}")),
        Error::CflViolation { dt, limit } => Some(format!("step {dt} above CFL limit {limit}")),
        _ => None,
    }
}

fn u_besov2(state: &SweState) -> f64 {
    vector_band_norms(&state.c, &state.d).weighted_sum(HybridIndex::homogeneous(2.0))
}

fn check_initial(initial: &SweState, params: &SweParams) -> Result<()> {
    params.validate()?;
    if !initial.is_finite() {
        return Err(Error::NonFinite("initial state"));
    }
    for (name, f) in [("h", &initial.h), ("c", &initial.c), ("d", &initial.d)] {
        if !f.is_mean_free() {
            return Err(Error::NonzeroMean(name, f.mean()));
        }
    }
    initial.h.check_grid(&initial.c)?;
    initial.h.check_grid(&initial.d)?;
    if let Some(n) = params.n_fried {
        if !initial.is_friedrichs_invariant(n) {
            return Err(Error::InvalidParameter(format!("initial state is not invariant under J_{n}")));
        }
    }
    Ok(())
}

/// Integrates to `ctrl.t_end` with the step `t_end / ceil(t_end / dt)`.
pub fn integrate(initial: &SweState, ctrl: &StepControl, params: &SweParams, probes: &Probes) -> Result<Trajectory> {
    integrate_with(initial, ctrl, params, probes, |_| {})
}

/// As [`integrate`], calling `observer` on every state at a step boundary.
/// A blow-up or CFL failure ends the run early and is reported in
/// [`Trajectory::blow_up`] together with the last valid state.
pub fn integrate_with<O>(initial: &SweState, ctrl: &StepControl, params: &SweParams, probes: &Probes, mut observer: O) -> Result<Trajectory>
where
    O: FnMut(&SweState),
{
    check_initial(initial, params)?;
    ctrl.validate()?;
    let grid = initial.grid().clone();
    let n = ctrl.num_steps();
    let dt = ctrl.effective_dt();
    let eff = StepControl { dt, ..*ctrl };
    let half = Propagator::new(&grid, params, 0.5 * dt)?;
    let t0 = initial.time;
    let mut probe_times: Vec<f64> = match probes {
        Probes::Times(t) => t.iter().map(|x| t0 + x).collect(),
        _ => Vec::new(),
    };
    probe_times.sort_by(f64::total_cmp);
    let mut next_probe = 0usize;

    let mut es = EsAccumulator::new(&grid);
    let mut snapshots = Vec::new();
    let mut steps = Vec::with_capacity(n);
    let mut state = initial.clone();
    let mut blow_up = None;
    let snap = |state: &SweState, es: &EsAccumulator| -> Result<Snapshot> {
        let mut es = es.clone();
        es.record(&state.h, &state.c, &state.d, 0.0)?;
        Ok(Snapshot { state: state.clone(), es })
    };
    observer(&state);
    snapshots.push(snap(&state, &es)?);
    while next_probe < probe_times.len() && probe_times[next_probe] <= t0 + 1e-9 * dt {
        next_probe += 1;
    }
    for i in 0..n {
        es.record(&state.h, &state.c, &state.d, dt)?;
        let v = u_besov2(&state);
        let next = match step(&state, &eff, &half) {
            Ok((next, info)) => match blow_up_reason(&next) {
                Some(reason) => Err((reason, info)),
                None => Ok((next, info)),
            },
            Err(e) => match failure_reason(&e) {
                Some(reason) => Err((reason, StepInfo::default())),
                None => return Err(e),
            },
        };
        match next {
            Ok((mut next, info)) => {
                steps.push(StepRecord { time: state.time, dt, u_besov2: v, info });
                next.time = t0 + (i + 1) as f64 * dt;
                state = next;
            }
            Err((reason, info)) => {
                steps.push(StepRecord { time: state.time, dt, u_besov2: v, info });
                blow_up = Some(BlowUp { time: state.time, reason });
                break;
            }
        }
        observer(&state);
        let last = i + 1 == n;
        let take = match probes {
            Probes::Endpoints => false,
            Probes::Every(k) => (i + 1) % (*k).max(1) == 0,
            Probes::Times(_) => {
                let mut hit = false;
                while next_probe < probe_times.len() && probe_times[next_probe] <= state.time + 1e-9 * dt {
                    hit = true;
                    next_probe += 1;
                }
                hit
            }
        };
        if take || last {
            snapshots.push(snap(&state, &es)?);
        }
    }
    if blow_up.is_some() || n == 0 {
        // the loop did not push a closing snapshot
        if snapshots.last().map(|s| s.time()) != Some(state.time) {
            snapshots.push(snap(&state, &es)?);
        }
    }
    es.record(&state.h, &state.c, &state.d, 0.0)?;
    Ok(Trajectory {
        params: *params,
        snapshots,
        steps,
        es,
        final_state: state,
        blow_up,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_field_with, Rng};
    use crate::spectral_core::{build_grid, friedrichs_project};
    use std::f64::consts::PI;

    fn smooth_state(grid: &Grid, seed: u64, amp: f64, n_fried: Option<u32>) -> SweState {
        let mut rng = Rng::seeded(seed);
        let spec = |_: i64, _: i64, r: f64| amp * (-r * r / 2.0).exp();
        let h = random_field_with(grid, &mut rng, spec);
        let c = random_field_with(grid, &mut rng, spec);
        let d = random_field_with(grid, &mut rng, spec);
        SweState::from_potentials(h, c, d, [0.0; 2], n_fried).unwrap()
    }

    #[test]
    fn zero_step_is_identity() {
        let g = build_grid(16, 4.0 * PI).unwrap();
        let p = SweParams::default();
        let mut s = smooth_state(&g, 1, 0.1, None);
        s.u_mean = [0.2, -0.1];
        let prop = Propagator::new(&g, &p, 0.0).unwrap();
        let out = linear_step(&s, 0.0, &prop).unwrap();
        assert_eq!(out, s);
        assert!(matches!(linear_step(&s, 0.1, &prop), Err(Error::PropagatorMismatch)));
    }

    #[test]
    fn mean_velocity_rotation_period() {
        let g = build_grid(16, 4.0 * PI).unwrap();
        let p = SweParams { f_cor: 0.5, ..SweParams::default() };
        let dt = 2.0 * PI / p.f_cor;
        let mut s = SweState::zeros(&g);
        s.u_mean = [0.3, 0.7];
        let prop = Propagator::new(&g, &p, dt).unwrap();
        let out = linear_step(&s, dt, &prop).unwrap();
        assert!((out.u_mean[0] - 0.3).abs() < 1e-12 && (out.u_mean[1] - 0.7).abs() < 1e-12);
        let q = Propagator::new(&g, &p, dt / 4.0).unwrap();
        let out = linear_step(&s, dt / 4.0, &q).unwrap();
        // clockwise quarter turn: (a, b) -> (b, -a)
        assert!((out.u_mean[0] - 0.7).abs() < 1e-12 && (out.u_mean[1] + 0.3).abs() < 1e-12);
    }

    #[test]
    fn propagator_semigroup_and_decoupling() {
        let g = build_grid(32, 8.0 * PI).unwrap();
        let p = SweParams::default();
        let a = Propagator::new(&g, &p, 0.05).unwrap();
        let b = Propagator::new(&g, &p, 0.1).unwrap();
        for s in 0..g.num_shells() {
            let m = a.shell_matrix(s) * a.shell_matrix(s);
            assert!((m - b.shell_matrix(s)).amax() <= 1e-12 * b.shell_matrix(s).amax().max(1.0));
        }
        let p0 = SweParams { f_cor: 0.0, ..p };
        let c = Propagator::new(&g, &p0, 0.3).unwrap();
        for s in 0..g.num_shells() {
            let m = c.shell_matrix(s);
            let r = g.shell_radius(s);
            assert_eq!((m[(0, 2)], m[(1, 2)], m[(2, 0)], m[(2, 1)]), (0.0, 0.0, 0.0, 0.0));
            let exact = (-p0.mu * r * r * 0.3).exp();
            assert!((m[(2, 2)] - exact).abs() <= 1e-14 * exact.max(1e-300) + 1e-300);
        }
    }

    #[test]
    fn single_mode_decay_matches_eigenvalues() {
        let g = build_grid(32, 8.0 * PI).unwrap();
        let p = SweParams::default();
        for &(m1, m2) in &[(1i64, 0i64), (3, 2), (9, 4)] {
            let r = g.kappa() * ((m1 * m1 + m2 * m2) as f64).sqrt();
            let lam = linear_symbol(r, &p).complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
            let mut s = SweState::zeros(&g);
            s.h.set_mode(m1, m2, Complex64::new(1.0, 0.0));
            s.c.set_mode(m1, m2, Complex64::new(0.2, 0.1));
            s.d.set_mode(m1, m2, Complex64::new(-0.3, 0.0));
            // long horizon: the slow mode dominates
            let t_long = 40.0 / lam.abs();
            let t1 = 0.8 * t_long;
            let prop = Propagator::new(&g, &p, t1).unwrap();
            let prop2 = Propagator::new(&g, &p, t_long - t1).unwrap();
            let a = linear_step(&s, t1, &prop).unwrap();
            let b = linear_step(&a, t_long - t1, &prop2).unwrap();
            let rate = (b.norm_l2() / a.norm_l2()).ln() / (t_long - t1);
            assert!((rate - lam).abs() <= 0.01 * lam.abs(), "m=({m1},{m2}) {rate} vs {lam}");
        }
    }

    #[test]
    fn linear_runs_match_linear_steps() {
        let g = build_grid(16, 4.0 * PI).unwrap();
        let p = SweParams::default().linear();
        let s = smooth_state(&g, 2, 0.5, None);
        let ctrl = StepControl::new(0.1, 0.1);
        let half = Propagator::new(&g, &p, 0.05).unwrap();
        let (out, _) = step(&s, &ctrl, &half).unwrap();
        let two = linear_step(&linear_step(&s, 0.05, &half).unwrap(), 0.05, &half).unwrap();
        assert_eq!(out.h, two.h);
        let full = Propagator::new(&g, &p, 0.1).unwrap();
        let one = linear_step(&s, 0.1, &full).unwrap();
        assert!(out.distance(&one) <= 1e-14 * s.norm_l2());
    }

    fn run(s: &SweState, p: &SweParams, dt: f64, t: f64) -> SweState {
        integrate(s, &StepControl::new(dt, t), p, &Probes::Endpoints).unwrap().final_state
    }

    #[test]
    fn second_order_convergence() {
        let g = build_grid(32, 4.0 * PI).unwrap();
        let p = SweParams { mu: 0.05, f_cor: 1.0, beta: 0.05, ..SweParams::default() };
        let s = smooth_state(&g, 3, 0.05, None);
        let t = 0.5;
        let probe = integrate(&s, &StepControl::new(0.05, t), &p, &Probes::Endpoints).unwrap();
        assert!(probe.blow_up.is_none());
        let a = run(&s, &p, 0.05, t);
        let b = run(&s, &p, 0.025, t);
        let c = run(&s, &p, 0.0125, t);
        let order = (a.distance(&b) / b.distance(&c)).log2();
        assert!((1.8..=2.2).contains(&order), "order {order}");
    }

    #[test]
    fn runs_are_bitwise_deterministic() {
        let g = build_grid(32, 8.0 * PI).unwrap();
        let p = SweParams::default();
        let s = smooth_state(&g, 4, 0.05, None);
        let ctrl = StepControl::new(0.05, 1.0);
        let a = integrate(&s, &ctrl, &p, &Probes::Every(5)).unwrap();
        let b = integrate(&s, &ctrl, &p, &Probes::Every(5)).unwrap();
        assert_eq!(a.snapshots.len(), b.snapshots.len());
        for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
            assert_eq!(x.state, y.state);
        }
        assert_eq!(a.steps, b.steps);
    }

    #[test]
    fn friedrichs_support_and_mass() {
        let g = build_grid(32, 8.0 * PI).unwrap();
        let p = SweParams { n_fried: Some(2), ..SweParams::default() };
        let s = smooth_state(&g, 5, 0.05, Some(2));
        let traj = integrate(&s, &StepControl::new(0.05, 1.0), &p, &Probes::Every(4)).unwrap();
        assert!(traj.blow_up.is_none());
        for snap in &traj.snapshots {
            for f in [&snap.state.h, &snap.state.c, &snap.state.d] {
                assert_eq!(&friedrichs_project(f, 2).unwrap(), f);
                assert_eq!(f.mean(), 0.0);
            }
        }
        assert!(traj.max_mass_defect() <= 1e-12);
        assert!(matches!(
            integrate(&smooth_state(&g, 5, 0.05, None), &StepControl::new(0.05, 1.0), &p, &Probes::Endpoints),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn zero_horizon_and_probes() {
        let g = build_grid(16, 4.0 * PI).unwrap();
        let p = SweParams::default();
        let s = smooth_state(&g, 6, 0.05, None);
        let t = integrate(&s, &StepControl::new(0.1, 0.0), &p, &Probes::Endpoints).unwrap();
        assert_eq!(t.snapshots.len(), 1);
        assert!(t.steps.is_empty());
        let t = integrate(&s, &StepControl::new(0.1, 1.0), &p, &Probes::Times(vec![0.25, 0.5])).unwrap();
        let times: Vec<f64> = t.snapshots.iter().map(|s| s.time()).collect();
        assert_eq!(times.len(), 4);
        assert!((times[1] - 0.3).abs() < 1e-12 && (times[2] - 0.5).abs() < 1e-12 && (times[3] - 1.0).abs() < 1e-12);
        let st = StepControl::new(0.3, 1.0);
        assert_eq!(st.num_steps(), 4);
        assert_eq!(StepControl::new(0.1, 1.0).num_steps(), 10);
    }

    #[test]
    fn large_data_blows_up_with_partial_trajectory() {
        let g = build_grid(16, 2.0 * PI).unwrap();
        let p = SweParams { mu: 0.01, beta: 0.01, ..SweParams::default() };
        let s = smooth_state(&g, 7, 40.0, None);
        let ctrl = StepControl { safety: 1e9, ..StepControl::new(0.05, 5.0) };
        let t = integrate(&s, &ctrl, &p, &Probes::Endpoints).unwrap();
        let b = t.blow_up.clone().expect("run should blow up");
        assert_eq!(b.time, t.final_state.time);
        assert!(t.final_state.is_finite());
        assert!(matches!(t.into_result(), Err(Error::BlowUp { .. })));
        let t = integrate(&s, &StepControl::new(0.05, 5.0), &p, &Probes::Endpoints).unwrap();
        assert!(t.blow_up.unwrap().reason.contains("CFL"));
    }

    #[test]
    fn es_accumulators_on_snapshots_grow() {
        let g = build_grid(16, 4.0 * PI).unwrap();
        let p = SweParams::default();
        let s = smooth_state(&g, 8, 0.01, None);
        let t = integrate(&s, &StepControl::new(0.1, 1.0), &p, &Probes::Every(2)).unwrap();
        let mut prev = 0.0;
        for snap in &t.snapshots {
            let e = snap.es.value(1.0).unwrap();
            assert!(e >= prev);
            prev = e;
        }
        assert_eq!(t.es_accumulator().unwrap().value(1.0).unwrap(), prev);
    }
}

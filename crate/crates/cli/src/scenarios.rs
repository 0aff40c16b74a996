//! The four experiment scenarios and their run directories.
//!
//! Every run writes `config.toml` (canonical form of the configuration),
//! `manifest.json` and scenario-specific CSV files plus a gnuplot script.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use swlab_core::besov_norms::HybridIndex;
use swlab_core::energy_diagnostics::{
    alpha_k_energy, fit_decay_rate_series, measure_coercivity, rate_scale, theta_k_energy, weight_v, Coercivity, EnergyWeights, Regime,
};
use swlab_core::spectral_core::{BumpCutoff, Grid};
use swlab_core::swe_model::{slowest_rate, SweParams, SweState};
use swlab_core::time_integrator::{integrate, integrate_with, BlowUp, Probes, StepControl, Trajectory};

use crate::config::{RunConfig, Scenario};
use crate::data::{initial_state, nearest_shell, single_shell_state};
use crate::output::{ensure_dir, write_band_dump, write_csv, write_json, write_state_dump, write_text, NormRow};
use crate::study::convergence_study;
use crate::{CliError, Result, CODE_VERSION};

#[derive(Debug, Clone, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub bound: f64,
}

impl Assertion {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Assertion {
        Assertion { name: name.into(), passed: value <= bound, value, bound }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Assertion {
        Assertion { name: name.into(), passed: value >= bound, value, bound }
    }

    pub fn holds(name: impl Into<String>, passed: bool) -> Assertion {
        Assertion {
            name: name.into(),
            passed,
            value: if passed { 1.0 } else { 0.0 },
            bound: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowUpRecord {
    pub time: f64,
    pub reason: String,
}

impl From<&BlowUp> for BlowUpRecord {
    fn from(b: &BlowUp) -> Self {
        BlowUpRecord { time: b.time, reason: b.reason.clone() }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub scenario: Scenario,
    pub dir: PathBuf,
    pub assertions: Vec<Assertion>,
    pub blow_up: Option<BlowUpRecord>,
    pub summary: serde_json::Value,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.blow_up.is_none() && self.assertions.iter().all(|a| a.passed)
    }

    pub fn status(&self) -> &'static str {
        if self.blow_up.is_some() {
            "blow-up"
        } else if self.assertions.iter().all(|a| a.passed) {
            "pass"
        } else {
            "assertion-failure"
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.status() {
            "pass" => 0,
            "blow-up" => 3,
            _ => 1,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| !a.passed)
    }
}

struct Outcome {
    assertions: Vec<Assertion>,
    blow_up: Option<BlowUpRecord>,
    summary: serde_json::Value,
    files: Vec<String>,
    step: serde_json::Value,
}

#[derive(Serialize)]
struct Manifest<'a> {
    code_version: &'a str,
    psi_profile_id: &'a str,
    config_hash: String,
    scenario: String,
    seed: u64,
    grid: serde_json::Value,
    params: SweParams,
    step: &'a serde_json::Value,
    probes: String,
    status: &'a str,
    assertions: &'a [Assertion],
    blow_up: &'a Option<BlowUpRecord>,
    summary: &'a serde_json::Value,
    files: &'a [String],
}

/// `E^s` rows of one snapshot; `p` is "mixed" for the four-term functional.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct EnergySample {
    pub time: f64,
    pub e_s: f64,
    pub e_s_eps: f64,
    pub e: f64,
    pub ratio: f64,
}

/// Seed of band `k` derived from the run seed.
pub fn band_seed(seed: u64, k: i32) -> u64 {
    seed ^ (k as i64 as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Validates the configuration and runs its scenario into `cfg.output`.
pub fn run_scenario(cfg: &RunConfig) -> Result<RunReport> {
    let grid = cfg.validate()?;
    let dir = ensure_dir(&cfg.output)?;
    write_text(&dir.join("config.toml"), &cfg.to_toml())?;
    let out = match cfg.scenario {
        Scenario::LinearSpectroscopy => run_spectroscopy(cfg, &grid, &dir)?,
        Scenario::Coercivity => run_coercivity(cfg, &grid, &dir)?,
        Scenario::Smalldata => run_smalldata(cfg, &grid, &dir)?,
        Scenario::FriedrichsConvergence => run_convergence(cfg, &cfg.study.n_list, &grid, &dir)?,
    };
    finish(cfg, &grid, dir, out)
}

/// Runs the convergence study for an explicit list of Friedrichs indices.
pub fn run_study(cfg: &RunConfig, n_list: &[u32]) -> Result<RunReport> {
    let mut cfg = cfg.clone();
    cfg.scenario = Scenario::FriedrichsConvergence;
    cfg.study.n_list = n_list.to_vec();
    let grid = cfg.validate()?;
    let dir = ensure_dir(&cfg.output)?;
    write_text(&dir.join("config.toml"), &cfg.to_toml())?;
    let out = run_convergence(&cfg, n_list, &grid, &dir)?;
    finish(&cfg, &grid, dir, out)
}

fn finish(cfg: &RunConfig, grid: &Grid, dir: PathBuf, out: Outcome) -> Result<RunReport> {
    let report = RunReport {
        scenario: cfg.scenario,
        dir,
        assertions: out.assertions,
        blow_up: out.blow_up,
        summary: out.summary,
    };
    let mut files = vec!["config.toml".to_string(), "manifest.json".to_string()];
    files.extend(out.files);
    let manifest = Manifest {
        code_version: CODE_VERSION,
        psi_profile_id: BumpCutoff::ID,
        config_hash: cfg.hash(),
        scenario: cfg.scenario.to_string(),
        seed: cfg.seed,
        grid: json!({
            "n": grid.n(),
            "length": grid.length(),
            "kappa": grid.kappa(),
            "k_min": grid.k_min(),
            "k_max": grid.k_max(),
        }),
        params: cfg.params(),
        step: &out.step,
        probes: format!("{:?}", cfg.probes.probes()),
        status: report.status(),
        assertions: &report.assertions,
        blow_up: &report.blow_up,
        summary: &report.summary,
        files: &files,
    };
    write_json(&report.dir.join("manifest.json"), &manifest)?;
    Ok(report)
}

fn norm_row(quantity: &str, s: f64, t: f64, p: &str, horizon: f64, value: f64, grid: &Grid) -> NormRow {
    NormRow {
        quantity: quantity.to_string(),
        s,
        t,
        p: p.to_string(),
        horizon,
        value,
        grid_n: grid.n(),
        grid_l: grid.length(),
        psi_profile_id: BumpCutoff::ID.to_string(),
    }
}

/// One row of `energy.csv`.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyRow {
    pub k: i32,
    pub regime: &'static str,
    #[serde(rename = "K")]
    pub coupling: f64,
    pub alpha_sq_initial: f64,
    pub decay_rate: Option<f64>,
    pub rate_over_scale: Option<f64>,
    pub c_lo: Option<f64>,
    pub c_hi: Option<f64>,
    pub theta_sq_initial: Option<f64>,
    pub shell_radius: Option<f64>,
    pub oracle_rate: Option<f64>,
    pub rel_error: Option<f64>,
}

// ---------------------------------------------------------------------------
// linear spectroscopy

/// Decay measurement of one band from data on a single lattice shell.
#[derive(Debug, Clone)]
pub struct BandSpectrum {
    pub k: i32,
    pub weights: EnergyWeights,
    pub shell_radius: f64,
    /// `2 |max Re spec A(r)|`, the asymptotic decay rate of `alpha_k^2`.
    pub oracle_rate: f64,
    pub decay_rate: f64,
    pub rel_error: f64,
    pub rate_over_scale: f64,
    pub alpha_sq_initial: f64,
    pub theta_sq_initial: f64,
    pub nonincreasing: bool,
    pub coercivity: Coercivity,
    pub times: Vec<f64>,
    pub alpha_sq: Vec<f64>,
}

/// Runs the linear system on random data carried by the shell nearest
/// `1.4 * 2^k` and fits the decay rate of `alpha_k^2`.
pub fn spectroscopy_band(grid: &Grid, params: &SweParams, k: i32, decay: f64, samples: usize, trials: usize, seed: u64) -> Result<BandSpectrum> {
    let params = params.linear().with_friedrichs(None);
    let w = EnergyWeights::for_band(&params, k)?;
    let scale = 2f64.powi(k);
    let shell = nearest_shell(grid, 1.4 * scale, 0.75 * scale, 8.0 / 3.0 * scale)
        .ok_or_else(|| CliError::Config(format!("band {k} contains no lattice shell")))?;
    let r = grid.shell_radius(shell);
    let oracle = 2.0 * slowest_rate(r, &params);
    let horizon = decay / oracle;
    let ctrl = StepControl {
        max_steps: samples + 1,
        ..StepControl::new(horizon / samples as f64, horizon)
    };
    let state = single_shell_state(grid, shell, seed);
    let alpha0 = alpha_k_energy(&state, k, &w)?;
    let mut times = Vec::with_capacity(samples + 1);
    let mut alpha = Vec::with_capacity(samples + 1);
    let traj = integrate_with(&state, &ctrl, &params, &Probes::Endpoints, |s| {
        times.push(s.time);
        alpha.push(alpha_k_energy(s, k, &w).unwrap_or(f64::NAN));
    })?;
    if let Some(b) = traj.blow_up {
        return Err(CliError::BlowUp { time: b.time, reason: b.reason });
    }
    let rate = fit_decay_rate_series(&times, &alpha, k)?;
    let nonincreasing = alpha.windows(2).all(|p| p[1] <= p[0] * (1.0 + 1e-12));
    let coercivity = measure_coercivity(grid, k, &w, trials, seed)?;
    Ok(BandSpectrum {
        k,
        weights: w,
        shell_radius: r,
        oracle_rate: oracle,
        decay_rate: rate,
        rel_error: (rate - oracle).abs() / oracle,
        rate_over_scale: rate / rate_scale(k),
        alpha_sq_initial: alpha0,
        theta_sq_initial: theta_k_energy(&state, k, &params),
        nonincreasing,
        coercivity,
        times,
        alpha_sq: alpha,
    })
}

#[derive(Serialize)]
struct DecayRow {
    time: f64,
    alpha_sq: f64,
}

fn run_spectroscopy(cfg: &RunConfig, grid: &Grid, dir: &Path) -> Result<Outcome> {
    let sp = &cfg.spectroscopy;
    let params = cfg.params();
    let bands: Vec<BandSpectrum> = sp
        .bands
        .par_iter()
        .map(|&k| spectroscopy_band(grid, &params, k, sp.decay, sp.samples, cfg.coercivity.trials, band_seed(cfg.seed, k)))
        .collect::<Result<_>>()?;
    let dumps = ensure_dir(&dir.join("dumps"))?;
    let mut files = Vec::new();
    let mut energy = Vec::new();
    let mut norms = Vec::new();
    let mut assertions = Vec::new();
    for b in &bands {
        let rows: Vec<DecayRow> = b.times.iter().zip(&b.alpha_sq).map(|(&time, &alpha_sq)| DecayRow { time, alpha_sq }).collect();
        let name = format!("dumps/alpha_k{}.csv", b.k);
        write_csv(&dumps.join(format!("alpha_k{}.csv", b.k)), &rows)?;
        files.push(name);
        energy.push(EnergyRow {
            k: b.k,
            regime: b.weights.regime.name(),
            coupling: b.weights.coupling,
            alpha_sq_initial: b.alpha_sq_initial,
            decay_rate: Some(b.decay_rate),
            rate_over_scale: Some(b.rate_over_scale),
            c_lo: Some(b.coercivity.c_lo),
            c_hi: Some(b.coercivity.c_hi),
            theta_sq_initial: Some(b.theta_sq_initial),
            shell_radius: Some(b.shell_radius),
            oracle_rate: Some(b.oracle_rate),
            rel_error: Some(b.rel_error),
        });
        let horizon = b.times.last().copied().unwrap_or(0.0);
        norms.push(norm_row(&format!("alpha_sq_k{}", b.k), 0.0, 0.0, "0", 0.0, b.alpha_sq_initial, grid));
        norms.push(norm_row(&format!("alpha_sq_k{}", b.k), 0.0, 0.0, "0", horizon, *b.alpha_sq.last().unwrap_or(&0.0), grid));
        assertions.push(Assertion::at_most(format!("rate_vs_oracle_k{}", b.k), b.rel_error, sp.tolerance));
        assertions.push(Assertion::holds(format!("alpha_nonincreasing_k{}", b.k), b.nonincreasing));
        assertions.push(Assertion::at_least(format!("coercive_k{}", b.k), b.coercivity.min_alpha_sq, 0.0));
    }
    let c_hat = bands.iter().map(|b| b.rate_over_scale).fold(f64::INFINITY, f64::min);
    if !bands.is_empty() {
        assertions.push(Assertion::at_least("global_rate_constant", c_hat, f64::MIN_POSITIVE));
    }
    write_csv(&dir.join("energy.csv"), &energy)?;
    write_csv(&dir.join("norms.csv"), &norms)?;
    write_text(&dir.join("plot.gp"), PLOT_SPECTROSCOPY)?;
    files.extend(["energy.csv", "norms.csv", "plot.gp"].map(String::from));
    Ok(Outcome {
        assertions,
        blow_up: None,
        summary: json!({
            "c_hat": c_hat,
            "max_rel_error": bands.iter().map(|b| b.rel_error).fold(0.0, f64::max),
            "samples": sp.samples,
            "decay": sp.decay,
        }),
        files,
        step: json!({ "integrator": "exact linear propagator", "samples_per_band": sp.samples }),
    })
}

const PLOT_SPECTROSCOPY: &str = "set datafile separator ','
set key autotitle columnhead
set logscale y
set xlabel 'k'
set ylabel 'rate / 2^{2k} min(1, 2^{2k})'
set terminal pngcairo size 800,600
set output 'rates.png'
plot 'energy.csv' using 1:6 with linespoints title 'fitted', \\
     'energy.csv' using 1:($11/(4**$1*(4**$1<1 ? 4**$1 : 1))) with points title 'oracle'
";

// ---------------------------------------------------------------------------
// coercivity

/// Coercivity constants of every requested band with `K` at the midpoint
/// of its window.
pub fn coercivity_bands(grid: &Grid, params: &SweParams, bands: &[i32], trials: usize, seed: u64) -> Result<Vec<(i32, EnergyWeights, Coercivity)>> {
    bands
        .par_iter()
        .map(|&k| {
            let w = EnergyWeights::for_band(params, k)?;
            let c = measure_coercivity(grid, k, &w, trials, band_seed(seed, k))?;
            Ok((k, w, c))
        })
        .collect()
}

fn run_coercivity(cfg: &RunConfig, grid: &Grid, dir: &Path) -> Result<Outcome> {
    let bands: Vec<i32> = if cfg.coercivity.bands.is_empty() { grid.bands().collect() } else { cfg.coercivity.bands.clone() };
    let params = cfg.params();
    let measured = coercivity_bands(grid, &params, &bands, cfg.coercivity.trials, cfg.seed)?;
    let mut energy = Vec::new();
    let mut assertions = Vec::new();
    for (k, w, c) in &measured {
        energy.push(EnergyRow {
            k: *k,
            regime: w.regime.name(),
            coupling: w.coupling,
            alpha_sq_initial: c.min_alpha_sq,
            decay_rate: None,
            rate_over_scale: None,
            c_lo: Some(c.c_lo),
            c_hi: Some(c.c_hi),
            theta_sq_initial: None,
            shell_radius: None,
            oracle_rate: None,
            rel_error: None,
        });
        assertions.push(Assertion::at_least(format!("alpha_nonnegative_k{k}"), c.min_alpha_sq, 0.0));
        assertions.push(Assertion::holds(
            format!("constants_positive_finite_k{k}"),
            c.c_lo > 0.0 && c.c_lo <= c.c_hi && c.c_hi.is_finite(),
        ));
    }
    write_csv(&dir.join("energy.csv"), &energy)?;
    write_text(&dir.join("plot.gp"), PLOT_COERCIVITY)?;
    Ok(Outcome {
        assertions,
        blow_up: None,
        summary: json!({
            "trials": cfg.coercivity.trials,
            "bands": bands,
            "window_high": EnergyWeights::midpoint(&params, Regime::High)?.coupling * 2.0,
            "window_low": EnergyWeights::midpoint(&params, Regime::Low)?.coupling * 2.0,
        }),
        files: vec!["energy.csv".into(), "plot.gp".into()],
        step: json!(null),
    })
}

const PLOT_COERCIVITY: &str = "set datafile separator ','
set key autotitle columnhead
set xlabel 'k'
set ylabel 'alpha_k^2 / (|h|^2 + |Lambda h|^2 + |c|^2 + |d|^2)'
set terminal pngcairo size 800,600
set output 'coercivity.png'
plot 'energy.csv' using 1:7 with linespoints title 'c_lo', 'energy.csv' using 1:8 with linespoints title 'c_hi'
";

// ---------------------------------------------------------------------------
// small data

/// `E(t) = E^s_t + E^{s+eps}_t` at every snapshot, with `E(t) / E(0)`.
pub fn energy_series(traj: &Trajectory, s: f64, eps: f64) -> Result<Vec<EnergySample>> {
    let mut out: Vec<EnergySample> = Vec::with_capacity(traj.snapshots.len());
    for snap in &traj.snapshots {
        let e_s = snap.es.value(s)?;
        let e_s_eps = snap.es.value(s + eps)?;
        let e = e_s + e_s_eps;
        let e0 = out.first().map_or(e, |f| f.e);
        let ratio = if e0 > 0.0 { e / e0 } else { 1.0 };
        out.push(EnergySample { time: snap.time(), e_s, e_s_eps, e, ratio });
    }
    Ok(out)
}

/// Integrates the configured small-data problem.
pub fn smalldata_trajectory(cfg: &RunConfig, grid: &Grid) -> Result<(SweState, Trajectory)> {
    let params = cfg.params();
    let s0 = initial_state(grid, &cfg.data, cfg.seed, params.n_fried)?;
    let traj = integrate(&s0, &cfg.step.control(), &params, &cfg.probes.probes())?;
    Ok((s0, traj))
}

#[derive(Serialize)]
struct SeriesRow {
    time: f64,
    #[serde(rename = "E")]
    e: f64,
    ratio: f64,
    h_l2: f64,
    u_l2: f64,
    #[serde(rename = "V")]
    v: f64,
}

#[derive(Serialize)]
struct StepRow {
    time: f64,
    dt: f64,
    u_besov2: f64,
    u_max: f64,
    mass_defect: f64,
    zeta_active: bool,
}

fn run_smalldata(cfg: &RunConfig, grid: &Grid, dir: &Path) -> Result<Outcome> {
    let (s, eps) = (cfg.norms.s, cfg.norms.eps);
    let (s0, traj) = smalldata_trajectory(cfg, grid)?;
    let series = energy_series(&traj, s, eps)?;
    let dumps = ensure_dir(&dir.join("dumps"))?;
    let mut files = vec!["dumps/bands.csv".to_string()];
    let states: Vec<&SweState> = traj.snapshots.iter().map(|x| &x.state).collect();
    write_band_dump(&dumps.join("bands.csv"), &states)?;
    if cfg.smalldata.dump_states {
        for (i, st) in states.iter().enumerate() {
            write_state_dump(&dumps.join(format!("state_{i:04}.csv")), st)?;
            files.push(format!("dumps/state_{i:04}.csv"));
        }
    }

    let mut rows = Vec::new();
    let mut norms = Vec::new();
    for (snap, e) in traj.snapshots.iter().zip(&series) {
        let v = weight_v(&traj, e.time)?;
        let st = &snap.state;
        rows.push(SeriesRow {
            time: e.time,
            e: e.e,
            ratio: e.ratio,
            h_l2: st.h.norm_l2(),
            u_l2: st.velocity().norm_l2(),
            v,
        });
        let es = &snap.es;
        for sv in [s, s + eps] {
            norms.push(norm_row("E", sv, sv, "mixed", e.time, es.value(sv)?, grid));
            norms.push(norm_row("h_sup", sv - 1.0, sv, "inf", e.time, es.h_sup.finalize(HybridIndex::new(sv - 1.0, sv))?, grid));
            norms.push(norm_row("h_int", sv + 3.0, sv + 2.0, "1", e.time, es.h_int.finalize(HybridIndex::new(sv + 3.0, sv + 2.0))?, grid));
            norms.push(norm_row("u_sup", sv - 1.0, sv - 1.0, "inf", e.time, es.u_sup.finalize(HybridIndex::homogeneous(sv - 1.0))?, grid));
            norms.push(norm_row("u_int", sv + 1.0, sv + 1.0, "1", e.time, es.u_int.finalize(HybridIndex::homogeneous(sv + 1.0))?, grid));
        }
        norms.push(norm_row("V", 2.0, 2.0, "1", e.time, v, grid));
    }
    let steps: Vec<StepRow> = traj
        .steps
        .iter()
        .map(|r| StepRow {
            time: r.time,
            dt: r.dt,
            u_besov2: r.u_besov2,
            u_max: r.info.u_max,
            mass_defect: r.info.mass_defect,
            zeta_active: r.info.zeta_active,
        })
        .collect();

    let params = cfg.params();
    let mut energy = Vec::new();
    for k in grid.bands() {
        let w = EnergyWeights::for_band(&params, k)?;
        energy.push(EnergyRow {
            k,
            regime: w.regime.name(),
            coupling: w.coupling,
            alpha_sq_initial: alpha_k_energy(&s0, k, &w)?,
            decay_rate: None,
            rate_over_scale: None,
            c_lo: None,
            c_hi: None,
            theta_sq_initial: Some(theta_k_energy(&s0, k, &params)),
            shell_radius: None,
            oracle_rate: None,
            rel_error: None,
        });
    }
    write_csv(&dir.join("series.csv"), &rows)?;
    write_csv(&dir.join("norms.csv"), &norms)?;
    write_csv(&dir.join("steps.csv"), &steps)?;
    write_csv(&dir.join("energy.csv"), &energy)?;
    write_text(&dir.join("plot.gp"), PLOT_SMALLDATA)?;
    files.extend(["series.csv", "norms.csv", "steps.csv", "energy.csv", "plot.gp"].map(String::from));

    let max_ratio = series.iter().map(|e| e.ratio).fold(0.0, f64::max);
    let mass = traj.final_state.h.mean().abs().max(traj.max_mass_defect());
    let assertions = vec![
        Assertion::at_most("energy_ratio", max_ratio, cfg.smalldata.max_ratio),
        Assertion::at_most("mass_conservation", mass, cfg.smalldata.mass_tolerance),
        Assertion::holds("no_blow_up", traj.blow_up.is_none()),
        Assertion::holds("depth_cutoff_inactive", !traj.zeta_triggered()),
    ];
    let ctrl = cfg.step.control();
    Ok(Outcome {
        assertions,
        blow_up: traj.blow_up.as_ref().map(BlowUpRecord::from),
        summary: json!({
            "E0": series.first().map(|e| e.e),
            "E_final": series.last().map(|e| e.e),
            "max_ratio": max_ratio,
            "mass": mass,
            "V_final": weight_v(&traj, traj.end_time())?,
            "end_time": traj.end_time(),
        }),
        files,
        step: json!({
            "dt_requested": ctrl.dt,
            "dt_effective": ctrl.effective_dt(),
            "steps": ctrl.num_steps(),
            "t_end": ctrl.t_end,
            "safety": ctrl.safety,
            "scheme": "Strang: exact linear half steps around an explicit midpoint step",
        }),
    })
}

const PLOT_SMALLDATA: &str = "set datafile separator ','
set key autotitle columnhead
set xlabel 't'
set terminal pngcairo size 800,600
set output 'energy.png'
plot 'series.csv' using 1:3 with lines title 'E(t)/E(0)', 'series.csv' using 1:6 with lines title 'V(t)'
";

// ---------------------------------------------------------------------------
// Friedrichs convergence

fn run_convergence(cfg: &RunConfig, n_list: &[u32], grid: &Grid, dir: &Path) -> Result<Outcome> {
    let table = convergence_study(cfg, n_list)?;
    write_csv(&dir.join("study.csv"), &table.rows)?;
    let ctrl = cfg.step.control();
    let norms: Vec<NormRow> = table
        .rows
        .iter()
        .map(|r| norm_row(&format!("distance_n{}_n{}", r.n_a, r.n_b), cfg.norms.s, cfg.norms.s, "mixed", ctrl.t_end, r.distance, grid))
        .collect();
    write_csv(&dir.join("norms.csv"), &norms)?;
    let dumps = ensure_dir(&dir.join("dumps"))?;
    let finals: Vec<&SweState> = table.outcome.members.iter().map(|m| &m.final_state).collect();
    write_band_dump(&dumps.join("final_bands.csv"), &finals)?;
    write_text(&dir.join("plot.gp"), PLOT_CONVERGENCE)?;

    let d = table.distances();
    let mut assertions = vec![Assertion::holds("no_flagged_member", !table.any_flagged())];
    if d.len() >= 2 {
        assertions.push(Assertion::holds("distances_nonincreasing", d.windows(2).all(|w| w[1] <= w[0])));
        assertions.push(Assertion::at_most("last_over_first", d[d.len() - 1] / d[0], 0.25));
    }
    let blow_up = table.outcome.members.iter().find_map(|m| m.blow_up.as_ref()).map(BlowUpRecord::from);
    Ok(Outcome {
        assertions,
        blow_up,
        summary: json!({ "n_list": n_list, "distances": d }),
        files: ["study.csv", "norms.csv", "dumps/final_bands.csv", "plot.gp"].map(String::from).to_vec(),
        step: json!({
            "dt_requested": ctrl.dt,
            "dt_effective": ctrl.effective_dt(),
            "steps": ctrl.num_steps(),
            "t_end": ctrl.t_end,
        }),
    })
}

const PLOT_CONVERGENCE: &str = "set datafile separator ','
set key autotitle columnhead
set logscale y
set xlabel 'n'
set ylabel 'distance'
set terminal pngcairo size 800,600
set output 'convergence.png'
plot 'study.csv' using 1:3 with linespoints title 'E distance between consecutive n'
";

//! Built-in quick property suite behind `swlab check`.

use std::f64::consts::PI;

use swlab_core::energy_diagnostics::{measure_coercivity, EnergyWeights};
use swlab_core::random::{random_band_field, random_smooth, Rng};
use swlab_core::spectral_core::{build_grid, gradient, hodge_assemble, hodge_split, lambda_pow, partition_residual, VectorField};
use swlab_core::swe_model::{SweParams, SweState};
use swlab_core::time_integrator::{integrate, Probes, StepControl};

use crate::config::RunConfig;
use crate::CliError;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn() -> Result<String, String>;

fn partition() -> Result<String, String> {
    let mut worst = 0.0f64;
    for (n, l) in [(32, 2.0 * PI), (64, 16.0 * PI), (128, 16.0 * PI)] {
        worst = worst.max(partition_residual(&build_grid(n, l).map_err(|e| e.to_string())?));
    }
    if worst <= 1e-12 {
        Ok(format!("max residual {worst:.2e}"))
    } else {
        Err(format!("max residual {worst:.2e} > 1e-12"))
    }
}

fn bernstein() -> Result<String, String> {
    let g = build_grid(64, 16.0 * PI).map_err(|e| e.to_string())?;
    let mut rng = Rng::seeded(11);
    let mut violations = 0;
    let mut trials = 0;
    for k in -3..=1 {
        for _ in 0..20 {
            let f = random_band_field(&g, &mut rng, k);
            let lf = lambda_pow(&f, 1.0).map_err(|e| e.to_string())?;
            let (a, b) = (f.norm_l2(), lf.norm_l2());
            let s = 2f64.powi(k);
            if a > 4.0 / 3.0 / s * b || b > 8.0 / 3.0 * s * a {
                violations += 1;
            }
            trials += 1;
        }
    }
    if violations == 0 {
        Ok(format!("{trials} band-limited fields"))
    } else {
        Err(format!("{violations} of {trials} fields violate the pair"))
    }
}

fn hodge() -> Result<String, String> {
    let g = build_grid(32, 4.0 * PI).map_err(|e| e.to_string())?;
    let mut rng = Rng::seeded(5);
    let u = VectorField::new(random_smooth(&g, &mut rng, 1.0), random_smooth(&g, &mut rng, 1.0)).map_err(|e| e.to_string())?;
    let (c, d) = hodge_split(&u).map_err(|e| e.to_string())?;
    let back = hodge_assemble(&c, &d).map_err(|e| e.to_string())?;
    let err = back.distance(&u);
    let (_, d_grad) = hodge_split(&gradient(&random_smooth(&g, &mut rng, 2.0))).map_err(|e| e.to_string())?;
    let dg = d_grad.max_coeff_abs();
    if err <= 1e-12 && dg <= 1e-14 {
        Ok(format!("round trip {err:.1e}, curl part of a gradient {dg:.1e}"))
    } else {
        Err(format!("round trip {err:.1e}, curl part of a gradient {dg:.1e}"))
    }
}

fn coercivity() -> Result<String, String> {
    let g = build_grid(64, 16.0 * PI).map_err(|e| e.to_string())?;
    let p = SweParams::default();
    let mut lo = f64::INFINITY;
    for k in g.bands() {
        let w = EnergyWeights::for_band(&p, k).map_err(|e| e.to_string())?;
        let c = measure_coercivity(&g, k, &w, 20, 3).map_err(|e| e.to_string())?;
        if !(c.min_alpha_sq >= 0.0 && c.c_lo > 0.0) {
            return Err(format!("band {k}: c_lo = {:.3e}", c.c_lo));
        }
        lo = lo.min(c.c_lo);
    }
    Ok(format!("smallest c_lo {lo:.3e}"))
}

fn determinism() -> Result<String, String> {
    let g = build_grid(32, 8.0 * PI).map_err(|e| e.to_string())?;
    let mut rng = Rng::seeded(2);
    let a = 1e-3;
    let s0 = SweState::from_potentials(
        random_smooth(&g, &mut rng, 2.0).scaled(a),
        random_smooth(&g, &mut rng, 2.0).scaled(a),
        random_smooth(&g, &mut rng, 2.0).scaled(a),
        [0.0; 2],
        None,
    )
    .map_err(|e| e.to_string())?;
    let ctrl = StepControl::new(0.1, 1.0);
    let p = SweParams::default();
    let x = integrate(&s0, &ctrl, &p, &Probes::Endpoints).map_err(|e| e.to_string())?;
    let y = integrate(&s0, &ctrl, &p, &Probes::Endpoints).map_err(|e| e.to_string())?;
    if x.final_state == y.final_state {
        Ok("two runs agree bit for bit".into())
    } else {
        Err("two identical runs differ".into())
    }
}

fn config_validation() -> Result<String, String> {
    let cfg = RunConfig::from_toml("grid.n = 7").map_err(|e| e.to_string())?;
    match cfg.validate() {
        Err(CliError::Config(m)) => Ok(format!("N = 7 rejected ({m})")),
        other => Err(format!("N = 7 not rejected: {other:?}")),
    }
}

const CHECKS: [(&str, Check); 6] = [
    ("partition of unity", partition),
    ("Bernstein pair", bernstein),
    ("Hodge round trip", hodge),
    ("band energy coercivity", coercivity),
    ("determinism", determinism),
    ("config validation", config_validation),
];

pub fn run_checks() -> Vec<CheckResult> {
    CHECKS
        .iter()
        .map(|(name, f)| match f() {
            Ok(detail) => CheckResult { name, passed: true, detail },
            Err(detail) => CheckResult { name, passed: false, detail },
        })
        .collect()
}

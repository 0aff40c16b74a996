//! Lockstep integration of several members on one time grid, with the
//! `E^s_T` distance between chosen pairs accumulated on the fly.

use rayon::prelude::*;
use serde::Serialize;
use swlab_core::besov_norms::EsAccumulator;
use swlab_core::spectral_core::SpectralField;
use swlab_core::swe_model::{SweParams, SweState};
use swlab_core::time_integrator::{blow_up_reason, failure_reason, step, BlowUp, Propagator, StepControl};

use crate::config::{validate_n_list, RunConfig};
use crate::data::initial_state;
use crate::{CliError, Result};

#[derive(Debug, Clone)]
pub struct Member {
    pub label: String,
    pub state: SweState,
    pub params: SweParams,
}

#[derive(Debug, Clone)]
pub struct MemberOutcome {
    pub label: String,
    pub final_state: SweState,
    pub blow_up: Option<BlowUp>,
    pub zeta_triggered: bool,
    pub max_mass_defect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairDistance {
    pub a: usize,
    pub b: usize,
    /// `E^s_T` norm of the difference.
    pub es: f64,
    /// `sup_t ||difference||_{L^2}`.
    pub sup_l2: f64,
    /// One of the two members blew up; the distance covers the common span only.
    pub flagged: bool,
}

#[derive(Debug, Clone)]
pub struct Lockstep {
    pub members: Vec<MemberOutcome>,
    pub pairs: Vec<PairDistance>,
    pub steps: usize,
    pub dt: f64,
}

struct Live {
    state: SweState,
    t0: f64,
    half: Propagator,
    blow_up: Option<BlowUp>,
    zeta: bool,
    mass: f64,
}

fn difference(a: &SweState, b: &SweState) -> Result<[SpectralField; 3]> {
    Ok([a.h.sub(&b.h)?, a.c.sub(&b.c)?, a.d.sub(&b.d)?])
}

/// Steps every member with the same effective step and records the
/// distance of each pair in `pairs` at every step boundary.
pub fn lockstep(members: Vec<Member>, ctrl: &StepControl, pairs: &[(usize, usize)], s: f64) -> Result<Lockstep> {
    ctrl.validate()?;
    if let Some(&(a, b)) = pairs.iter().find(|(a, b)| *a >= members.len() || *b >= members.len()) {
        return Err(CliError::Config(format!("pair ({a}, {b}) refers to a missing member")));
    }
    let n = ctrl.num_steps();
    let dt = ctrl.effective_dt();
    let eff = StepControl { dt, ..*ctrl };
    let labels: Vec<String> = members.iter().map(|m| m.label.clone()).collect();
    let mut live = Vec::with_capacity(members.len());
    for m in members {
        m.params.validate()?;
        let half = Propagator::new(m.state.grid(), &m.params, 0.5 * dt)?;
        live.push(Live {
            t0: m.state.time,
            state: m.state,
            half,
            blow_up: None,
            zeta: false,
            mass: 0.0,
        });
    }
    let grid = match live.first() {
        Some(l) => l.state.grid().clone(),
        None => return Err(CliError::Config("no members to integrate".into())),
    };
    let mut acc: Vec<EsAccumulator> = pairs.iter().map(|_| EsAccumulator::new(&grid)).collect();
    let mut sup = vec![0.0f64; pairs.len()];
    let mut open = vec![true; pairs.len()];

    let record = |live: &[Live], acc: &mut [EsAccumulator], sup: &mut [f64], open: &mut [bool], dt: f64| -> Result<()> {
        for (j, &(a, b)) in pairs.iter().enumerate() {
            if !open[j] {
                continue;
            }
            let [h, c, d] = difference(&live[a].state, &live[b].state)?;
            sup[j] = sup[j].max((h.norm_l2_sq() + c.norm_l2_sq() + d.norm_l2_sq()).sqrt());
            acc[j].record(&h, &c, &d, dt)?;
        }
        Ok(())
    };

    for i in 0..n {
        record(&live, &mut acc, &mut sup, &mut open, dt)?;
        let t_next = (i + 1) as f64 * dt;
        let results: Vec<Result<()>> = live
            .par_iter_mut()
            .map(|m| {
                if m.blow_up.is_some() {
                    return Ok(());
                }
                match step(&m.state, &eff, &m.half) {
                    Ok((mut next, info)) => {
                        m.zeta |= info.zeta_active;
                        m.mass = m.mass.max(info.mass_defect);
                        match blow_up_reason(&next) {
                            Some(reason) => m.blow_up = Some(BlowUp { time: m.state.time, reason }),
                            None => {
                                next.time = m.t0 + t_next;
                                m.state = next;
                            }
                        }
                        Ok(())
                    }
                    Err(e) => match failure_reason(&e) {
                        Some(reason) => {
                            m.blow_up = Some(BlowUp { time: m.state.time, reason });
                            Ok(())
                        }
                        None => Err(e.into()),
                    },
                }
            })
            .collect();
        results.into_iter().collect::<Result<()>>()?;
        for (j, &(a, b)) in pairs.iter().enumerate() {
            if open[j] && (live[a].blow_up.is_some() || live[b].blow_up.is_some()) {
                open[j] = false;
            }
        }
        if live.iter().all(|m| m.blow_up.is_some()) {
            break;
        }
    }
    record(&live, &mut acc, &mut sup, &mut open, 0.0)?;

    let mut out_pairs = Vec::with_capacity(pairs.len());
    for (j, &(a, b)) in pairs.iter().enumerate() {
        out_pairs.push(PairDistance {
            a,
            b,
            es: acc[j].value(s)?,
            sup_l2: sup[j],
            flagged: !open[j],
        });
    }
    let members = live
        .into_iter()
        .zip(labels)
        .map(|(m, label)| MemberOutcome {
            label,
            final_state: m.state,
            blow_up: m.blow_up,
            zeta_triggered: m.zeta,
            max_mass_defect: m.mass,
        })
        .collect();
    Ok(Lockstep { members, pairs: out_pairs, steps: n, dt })
}

/// One row of the convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StudyRow {
    pub n_a: u32,
    pub n_b: u32,
    pub distance: f64,
    pub sup_l2: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub rows: Vec<StudyRow>,
    pub outcome: Lockstep,
}

impl ConvergenceTable {
    pub fn distances(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.distance).collect()
    }

    pub fn any_flagged(&self) -> bool {
        self.rows.iter().any(|r| r.flagged)
    }
}

/// Runs the configured data under `J_n` for each `n` and measures the
/// `E^s_T` distance between consecutive members.
pub fn convergence_study(cfg: &RunConfig, n_list: &[u32]) -> Result<ConvergenceTable> {
    validate_n_list(n_list)?;
    let grid = cfg.grid()?;
    let base = cfg.params();
    let mut members = Vec::with_capacity(n_list.len());
    for &n in n_list {
        members.push(Member {
            label: format!("n={n}"),
            state: initial_state(&grid, &cfg.data, cfg.seed, Some(n))?,
            params: base.with_friedrichs(Some(n)),
        });
    }
    let pairs: Vec<(usize, usize)> = (1..n_list.len()).map(|i| (i - 1, i)).collect();
    let outcome = lockstep(members, &cfg.step.control(), &pairs, cfg.norms.s)?;
    let rows = outcome
        .pairs
        .iter()
        .map(|p| StudyRow {
            n_a: n_list[p.a],
            n_b: n_list[p.b],
            distance: p.es,
            sup_l2: p.sup_l2,
            flagged: p.flagged,
        })
        .collect();
    Ok(ConvergenceTable { rows, outcome })
}

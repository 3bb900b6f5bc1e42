//! Global-best particle swarm optimisation over a box.
//!
//! Objective evaluations within an iteration run in parallel; all random
//! draws happen in the sequential update step, so a fixed seed reproduces
//! the same trace regardless of thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub max_iterations: usize,
    /// Stop once the best objective improves by less than this over
    /// `stall_window` iterations.
    pub stall_tolerance: f64,
    pub stall_window: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Maximum speed per dimension as a fraction of its range.
    pub velocity_clamp: f64,
    pub rng_seed: u64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        PsoConfig {
            swarm_size: 50,
            max_iterations: 100,
            stall_tolerance: 0.05,
            stall_window: 10,
            inertia: 0.7298,
            cognitive: 1.49618,
            social: 1.49618,
            velocity_clamp: 0.2,
            rng_seed: 0,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size < 2 {
            return Err(Error::InvalidConfig("swarm_size must be >= 2".into()));
        }
        if self.max_iterations < 1 || self.stall_window < 1 {
            return Err(Error::InvalidConfig(
                "max_iterations and stall_window must be >= 1".into(),
            ));
        }
        if !(self.stall_tolerance >= 0.0) {
            return Err(Error::InvalidConfig("stall_tolerance must be >= 0".into()));
        }
        if !(self.velocity_clamp > 0.0 && self.velocity_clamp <= 1.0) {
            return Err(Error::InvalidConfig("velocity_clamp must be in (0, 1]".into()));
        }
        Ok(())
    }
}

/// One objective value with its two components.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub f: f64,
    pub m_total: f64,
    pub m_diff: f64,
}

impl Evaluation {
    pub fn scalar(f: f64) -> Evaluation {
        Evaluation {
            f,
            m_total: f,
            m_diff: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ToleranceStall,
    MaxIterations,
    ZeroObjective,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::ToleranceStall => "tolerance_stall",
            StopReason::MaxIterations => "max_iterations",
            StopReason::ZeroObjective => "zero_objective",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    /// Best objective so far.
    pub f: f64,
    pub m_total: f64,
    pub m_diff: f64,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsoTrace {
    pub rows: Vec<TraceRow>,
    pub best: Vec<f64>,
    pub stop_reason: StopReason,
    /// Candidates whose objective came back NaN (scored as +inf).
    pub nan_evaluations: usize,
    /// Candidates found outside the bounds (always 0 unless there is a bug).
    pub bound_violations: usize,
}

impl PsoTrace {
    pub fn iterations(&self) -> usize {
        self.rows.len()
    }

    pub fn initial_f(&self) -> f64 {
        self.rows.first().map_or(f64::INFINITY, |r| r.f)
    }

    pub fn final_f(&self) -> f64 {
        self.rows.last().map_or(f64::INFINITY, |r| r.f)
    }
}

#[derive(Clone, Debug)]
pub struct Swarm {
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
}

impl Swarm {
    /// Uniform positions inside the bounds, zero velocities.
    pub fn init<R: Rng>(bounds: &[(f64, f64)], size: usize, rng: &mut R) -> Swarm {
        let positions = (0..size)
            .map(|_| bounds.iter().map(|&(lo, hi)| lo + rng.gen::<f64>() * (hi - lo)).collect())
            .collect();
        Swarm {
            positions,
            velocities: vec![vec![0.0; bounds.len()]; size],
        }
    }
}

pub fn validate_bounds(bounds: &[(f64, f64)]) -> Result<()> {
    if bounds.is_empty() {
        return Err(Error::InvalidBounds("no dimensions".into()));
    }
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidBounds(format!("dimension {i}: [{lo}, {hi}]")));
        }
    }
    Ok(())
}

fn within(x: &[f64], bounds: &[(f64, f64)]) -> bool {
    x.len() == bounds.len() && x.iter().zip(bounds).all(|(v, &(lo, hi))| (lo..=hi).contains(v))
}

/// Pins particle 0 to `identity`, which must lie inside the bounds.
pub fn seed_identity_particle(swarm: &mut Swarm, identity: &[f64], bounds: &[(f64, f64)]) -> Result<()> {
    if !within(identity, bounds) {
        return Err(Error::InvalidBounds(
            "identity parameters lie outside the bounds".into(),
        ));
    }
    if let Some(p) = swarm.positions.first_mut() {
        p.copy_from_slice(identity);
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct PsoOutcome {
    pub best: Vec<f64>,
    pub best_eval: Evaluation,
    pub trace: PsoTrace,
}

pub fn optimize<F>(eval: F, bounds: &[(f64, f64)], cfg: &PsoConfig) -> Result<PsoOutcome>
where
    F: Fn(&[f64]) -> Evaluation + Sync,
{
    optimize_seeded(eval, bounds, cfg, None)
}

/// Runs the swarm, optionally with particle 0 starting at `identity`.
pub fn optimize_seeded<F>(
    eval: F,
    bounds: &[(f64, f64)],
    cfg: &PsoConfig,
    identity: Option<&[f64]>,
) -> Result<PsoOutcome>
where
    F: Fn(&[f64]) -> Evaluation + Sync,
{
    validate_bounds(bounds)?;
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut swarm = Swarm::init(bounds, cfg.swarm_size, &mut rng);
    if let Some(id) = identity {
        seed_identity_particle(&mut swarm, id, bounds)?;
    }

    let mut nan_evaluations = 0;
    let mut bound_violations = 0;
    let mut evaluations = 0;
    let first = score(&eval, bounds, &swarm.positions, &mut nan_evaluations, &mut bound_violations, &mut evaluations);
    let mut pbest_pos = swarm.positions.clone();
    let mut pbest = first.clone();
    let mut g = 0;
    for (i, e) in first.iter().enumerate() {
        if e.f < pbest[g].f {
            g = i;
        }
    }
    let mut gbest_pos = pbest_pos[g].clone();
    let mut gbest = pbest[g];
    let mut rows = vec![TraceRow {
        iteration: 1,
        f: gbest.f,
        m_total: gbest.m_total,
        m_diff: gbest.m_diff,
        evaluations: cfg.swarm_size,
    }];

    let vmax: Vec<f64> = bounds.iter().map(|&(lo, hi)| cfg.velocity_clamp * (hi - lo)).collect();
    let stop_reason = loop {
        let it = rows.len();
        if gbest.f == 0.0 {
            break StopReason::ZeroObjective;
        }
        if it > cfg.stall_window && rows[it - 1 - cfg.stall_window].f - rows[it - 1].f < cfg.stall_tolerance {
            break StopReason::ToleranceStall;
        }
        if it >= cfg.max_iterations {
            break StopReason::MaxIterations;
        }

        for (i, (x, v)) in swarm.positions.iter_mut().zip(&mut swarm.velocities).enumerate() {
            for d in 0..bounds.len() {
                let (lo, hi) = bounds[d];
                let r1: f64 = rng.gen();
                let r2: f64 = rng.gen();
                let mut vd = cfg.inertia * v[d]
                    + cfg.cognitive * r1 * (pbest_pos[i][d] - x[d])
                    + cfg.social * r2 * (gbest_pos[d] - x[d]);
                vd = vd.clamp(-vmax[d], vmax[d]);
                let mut xd = x[d] + vd;
                if xd > hi {
                    xd = hi - (xd - hi);
                    vd = -vd;
                } else if xd < lo {
                    xd = lo + (lo - xd);
                    vd = -vd;
                }
                x[d] = xd.clamp(lo, hi);
                v[d] = vd;
            }
        }

        let evals = score(&eval, bounds, &swarm.positions, &mut nan_evaluations, &mut bound_violations, &mut evaluations);
        for (i, e) in evals.into_iter().enumerate() {
            if e.f < pbest[i].f {
                pbest[i] = e;
                pbest_pos[i].copy_from_slice(&swarm.positions[i]);
                if e.f < gbest.f {
                    gbest = e;
                    gbest_pos.copy_from_slice(&swarm.positions[i]);
                }
            }
        }
        rows.push(TraceRow {
            iteration: it + 1,
            f: gbest.f,
            m_total: gbest.m_total,
            m_diff: gbest.m_diff,
            evaluations,
        });
    };

    Ok(PsoOutcome {
        best: gbest_pos.clone(),
        best_eval: gbest,
        trace: PsoTrace {
            rows,
            best: gbest_pos,
            stop_reason,
            nan_evaluations,
            bound_violations,
        },
    })
}

fn score<F>(
    eval: &F,
    bounds: &[(f64, f64)],
    positions: &[Vec<f64>],
    nan: &mut usize,
    violations: &mut usize,
    evaluations: &mut usize,
) -> Vec<Evaluation>
where
    F: Fn(&[f64]) -> Evaluation + Sync,
{
    *violations += positions.iter().filter(|p| !within(p, bounds)).count();
    let evals: Vec<Evaluation> = positions.par_iter().map(|p| eval(p)).collect();
    *evaluations += evals.len();
    evals
        .into_iter()
        .map(|mut e| {
            if e.f.is_nan() {
                *nan += 1;
                e.f = f64::INFINITY;
            }
            e
        })
        .collect()
}

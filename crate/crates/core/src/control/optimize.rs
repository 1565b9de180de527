use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{nelder_mead, ControlPulse, CrabProblem, NelderMeadResult, OptimizerConfig, Termination};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct OptimizedPulse {
    pub pulse: ControlPulse,
    pub cost: f64,
    /// Best cost of every restart, in restart order.
    pub restart_costs: Vec<f64>,
    pub restart_index: usize,
    pub evals: usize,
}

/// Starting point of restart `index`: the zero pulse plus a uniform
/// perturbation of half-width `scale`, drawn from a stream keyed by
/// `(seed, index)`.
pub fn restart_start(dim: usize, scale: f64, seed: u64, index: usize) -> Vec<f64> {
    let stream = seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut rng = ChaCha8Rng::seed_from_u64(stream);
    (0..dim).map(|_| rng.random_range(-scale..=scale)).collect()
}

/// One restart: Nelder-Mead from `x0`, rebuilding the simplex around the
/// incumbent every `rebuild_evals` evaluations (or on convergence) until
/// the budget is spent or a rebuilt simplex converges without improving.
fn search(problem: &CrabProblem, x0: Vec<f64>, config: &OptimizerConfig) -> NelderMeadResult {
    let mut best = NelderMeadResult { f: problem.cost(&x0), x: x0, evals: 1, termination: Termination::MaxEvals };
    let mut scale = config.initial_simplex_scale;
    while best.evals < config.max_evals {
        let stage = OptimizerConfig {
            max_evals: config.rebuild_evals.max(1).min(config.max_evals - best.evals),
            initial_simplex_scale: scale,
            ..config.clone()
        };
        let run = nelder_mead(|x| problem.cost(x), &best.x, &stage);
        let improved = run.f < best.f;
        let converged = run.termination != Termination::MaxEvals;
        best.evals += run.evals;
        best.termination = run.termination;
        if improved {
            best.x = run.x;
            best.f = run.f;
        }
        if converged {
            if !improved || best.f <= config.ftol {
                break;
            }
            // tighter simplex around a point that the last stage settled on
            scale *= 0.5;
        }
    }
    best
}

/// Minimizes the CRAB cost with `config.restarts` independent searches
/// and returns the lowest-cost pulse. Restarts run in parallel; results do
/// not depend on scheduling.
pub fn optimize_pulse(problem: &CrabProblem, config: &OptimizerConfig) -> Result<OptimizedPulse> {
    if config.restarts == 0 || config.max_evals == 0 {
        return Err(Error::InvalidParameter("restarts and max_evals must be at least 1".into()));
    }
    let dim = problem.dimension();
    let runs: Vec<NelderMeadResult> = (0..config.restarts)
        .into_par_iter()
        .map(|i| {
            let x0 = restart_start(dim, config.initial_simplex_scale, config.rng_seed, i);
            let r = search(problem, x0, config);
            log::info!("restart {i}: cost {:.3e} after {} evals", r.f, r.evals);
            r
        })
        .collect();

    let (restart_index, winner) = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.f.total_cmp(&b.1.f))
        .expect("at least one restart");
    let pulse = problem.pulse(&winner.x)?;
    if let Ok(fine) = problem.refined() {
        let refined = fine.cost(&winner.x);
        if (refined - winner.f).abs() > 1e-6 {
            log::warn!("pulse cost changes from {:.3e} to {refined:.3e} at half the step", winner.f);
        }
    }
    Ok(OptimizedPulse {
        pulse,
        cost: winner.f,
        restart_costs: runs.iter().map(|r| r.f).collect(),
        restart_index,
        evals: runs.iter().map(|r| r.evals).sum(),
    })
}

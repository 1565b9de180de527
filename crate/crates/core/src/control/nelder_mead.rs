//! Derivative-free simplex minimization.

/// Settings for [`nelder_mead`] and the restarted pulse search.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    /// Objective evaluations allowed per search (per restart for pulse
    /// optimization).
    pub max_evals: usize,
    /// Stop once every vertex lies within `xtol` (max-norm) of the best.
    pub xtol: f64,
    /// Stop once the objective spread over the simplex is at most `ftol`.
    pub ftol: f64,
    /// Edge length of the initial simplex, also the scale of the seeded
    /// starting-point perturbations.
    pub initial_simplex_scale: f64,
    pub restarts: usize,
    pub rng_seed: u64,
    /// Evaluations after which a stalled simplex is rebuilt around the
    /// incumbent during pulse optimization.
    pub rebuild_evals: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_evals: 40_000,
            xtol: 1e-10,
            ftol: 1e-14,
            initial_simplex_scale: 0.5,
            restarts: 5,
            rng_seed: 0,
            rebuild_evals: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Ftol,
    Xtol,
    MaxEvals,
}

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub termination: Termination,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Nelder-Mead with reflection, expansion, contraction and shrink
/// coefficients `(1, 2, 0.5, 0.5)`, starting from the right-angled simplex
/// `x0 + scale·e_i`. Returns the best point seen.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], config: &OptimizerConfig) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    let budget = config.max_evals.max(1);
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() { f64::INFINITY } else { v }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let f0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), f0));
    for i in 0..dim {
        if evals >= budget {
            break;
        }
        let mut x = x0.to_vec();
        x[i] += config.initial_simplex_scale;
        let fx = eval(&x, &mut evals);
        simplex.push((x, fx));
    }
    if simplex.len() < dim + 1 {
        return best_of(simplex, evals, Termination::MaxEvals);
    }

    let termination = loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best_f, worst_f) = (simplex[0].1, simplex[dim].1);
        if worst_f - best_f <= config.ftol {
            break Termination::Ftol;
        }
        let spread = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= config.xtol {
            break Termination::Xtol;
        }
        if evals >= budget {
            break Termination::MaxEvals;
        }

        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / dim as f64;
            }
        }
        let toward = |coef: f64, from: &[f64]| -> Vec<f64> {
            centroid.iter().zip(from).map(|(c, x)| c + coef * (x - c)).collect()
        };

        let worst = simplex[dim].0.clone();
        let xr = toward(-REFLECT, &worst);
        let fr = eval(&xr, &mut evals);
        let second_worst = simplex[dim - 1].1;

        if fr < best_f {
            let xe = toward(-REFLECT * EXPAND, &worst);
            let fe = eval(&xe, &mut evals);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < second_worst {
            simplex[dim] = (xr, fr);
            continue;
        }
        // contraction: outside when the reflection improved on the worst
        let (xc, fc, accept) = if fr < worst_f {
            let xc = toward(-REFLECT * CONTRACT, &worst);
            let fc = eval(&xc, &mut evals);
            (xc, fc, fc <= fr)
        } else {
            let xc = toward(CONTRACT, &worst);
            let fc = eval(&xc, &mut evals);
            (xc, fc, fc < worst_f)
        };
        if accept {
            simplex[dim] = (xc, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            if evals >= budget {
                break;
            }
            let x: Vec<f64> = anchor.iter().zip(&vertex.0).map(|(b, v)| b + SHRINK * (v - b)).collect();
            let fx = eval(&x, &mut evals);
            *vertex = (x, fx);
        }
    };
    best_of(simplex, evals, termination)
}

fn best_of(simplex: Vec<(Vec<f64>, f64)>, evals: usize, termination: Termination) -> NelderMeadResult {
    let (x, f) = simplex
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("simplex has at least one vertex");
    NelderMeadResult { x, f, evals, termination }
}

//! Projective spin measurements and the two cooling protocols: the
//! concatenated scheme (repeated Rabi-timed evolutions, each followed by a
//! projection onto `|g⟩`) and the single-shot scheme (one shaped evolution
//! followed by a single projection). Measurements are post-selected on `g`.

use crate::control::ControlPulse;
use crate::dynamics::{
    apply_unitary, evolve_lindblad, evolve_unitary_td, Generator, NoiseParams, PropagationConfig, UnitaryPropagator,
};
use crate::error::{Error, Result};
use crate::fock::{FockSpace, JointState, Operator, Spin, C64};
use crate::model::{build_hamiltonian, exact_ground_state, GroundStateResult, SystemParams};
use crate::observables::{fidelity_to_gs, mean_occupation, non_gaussianity};

/// Outcomes less likely than this cannot be renormalized.
pub const MIN_OUTCOME_PROBABILITY: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct MeasurementOutcome {
    pub outcome: Spin,
    pub probability: f64,
    pub post_state: JointState,
}

/// `M_x ρ M_x / Tr[M_x ρ M_x]` with `M_x = |x⟩⟨x| ⊗ 1`.
pub fn project_spin(state: &JointState, outcome: Spin) -> Result<MeasurementOutcome> {
    let space = state.space();
    let n = space.n_max();
    let off = outcome.index() * n;
    let rho = state.rho();
    let probability: f64 = (0..n).map(|k| rho[(off + k, off + k)].re).sum();
    if !(probability >= MIN_OUTCOME_PROBABILITY) {
        return Err(Error::MeasurementUnreachable { probability });
    }
    let mut post = Operator::zeros(rho.nrows(), rho.ncols());
    let scale = C64::from(1.0 / probability);
    for j in 0..n {
        for i in 0..n {
            post[(off + i, off + j)] = rho[(off + i, off + j)] * scale;
        }
    }
    Ok(MeasurementOutcome {
        outcome,
        probability: probability.min(1.0),
        post_state: JointState::from_density_unchecked(post, space)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsConfig {
    pub n_reps: usize,
    pub noise: Option<NoiseParams>,
    pub propagation: PropagationConfig,
    /// Observation points inside each evolution block; 0 disables the dense
    /// trajectory.
    pub dense_samples: usize,
}

impl CsConfig {
    pub fn new(n_reps: usize) -> Self {
        Self { n_reps, noise: None, propagation: PropagationConfig::default(), dense_samples: 20 }
    }

    pub fn with_noise(self, noise: NoiseParams) -> Self {
        Self { noise: Some(noise), ..self }
    }

    pub fn sparse(self) -> Self {
        Self { dense_samples: 0, ..self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsConfig {
    pub pulse: ControlPulse,
    pub noise: Option<NoiseParams>,
    pub propagation: PropagationConfig,
}

impl SsConfig {
    pub fn new(pulse: ControlPulse) -> Self {
        let propagation = PropagationConfig::for_pulse(pulse.tau());
        Self { pulse, noise: None, propagation }
    }
}

/// Observables at one point of a dense trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub time: f64,
    /// Index of the evolution block the point belongs to.
    pub block: usize,
    pub mean_n: f64,
    pub fidelity: f64,
    pub non_gaussianity: f64,
}

/// Observables before the protocol (entry 0) and after every measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct CoolingRecord {
    pub n_th: f64,
    pub lambda: f64,
    /// Measurements performed before each entry.
    pub steps: Vec<usize>,
    pub times: Vec<f64>,
    pub mean_n: Vec<f64>,
    pub fidelity: Vec<f64>,
    pub non_gaussianity: Vec<f64>,
    /// Reduced resonator populations `P(n)`.
    pub populations: Vec<Vec<f64>>,
    /// `p_{g;k}` of measurement `k`.
    pub step_success_probs: Vec<f64>,
    /// Running product of `step_success_probs`, one per entry.
    pub cumulative_probs: Vec<f64>,
    pub cumulative_success_prob: f64,
    pub trajectory: Vec<TrajectoryPoint>,
    pub final_state: JointState,
}

impl CoolingRecord {
    fn start(n_th: f64, lambda: f64, state: &JointState, gs: &GroundStateResult) -> Result<Self> {
        let mut rec = Self {
            n_th,
            lambda,
            steps: Vec::new(),
            times: Vec::new(),
            mean_n: Vec::new(),
            fidelity: Vec::new(),
            non_gaussianity: Vec::new(),
            populations: Vec::new(),
            step_success_probs: Vec::new(),
            cumulative_probs: Vec::new(),
            cumulative_success_prob: 1.0,
            trajectory: Vec::new(),
            final_state: state.clone(),
        };
        rec.push(0.0, state, gs)?;
        Ok(rec)
    }

    fn push(&mut self, time: f64, state: &JointState, gs: &GroundStateResult) -> Result<()> {
        let r = state.reduced();
        self.steps.push(self.step_success_probs.len());
        self.times.push(time);
        self.mean_n.push(mean_occupation(&r));
        self.fidelity.push(fidelity_to_gs(&r, gs));
        self.non_gaussianity.push(non_gaussianity(&r)?);
        self.populations.push(r.diagonal().iter().map(|z| z.re).collect());
        self.cumulative_probs.push(self.cumulative_success_prob);
        self.final_state = state.clone();
        Ok(())
    }

    fn measure(&mut self, time: f64, state: &JointState, gs: &GroundStateResult) -> Result<JointState> {
        let m = project_spin(state, Spin::G)?;
        self.step_success_probs.push(m.probability);
        self.cumulative_success_prob *= m.probability;
        self.push(time, &m.post_state, gs)?;
        Ok(m.post_state)
    }

    fn observe(&mut self, time: f64, block: usize, state: &JointState, gs: &GroundStateResult) -> Result<()> {
        let r = state.reduced();
        self.trajectory.push(TrajectoryPoint {
            time,
            block,
            mean_n: mean_occupation(&r),
            fidelity: fidelity_to_gs(&r, gs),
            non_gaussianity: non_gaussianity(&r)?,
        });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn total_time(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn final_mean_n(&self) -> f64 {
        *self.mean_n.last().unwrap_or(&f64::NAN)
    }

    pub fn final_fidelity(&self) -> f64 {
        *self.fidelity.last().unwrap_or(&f64::NAN)
    }

    /// `1/(1 + n_th)`.
    pub fn success_lower_bound(&self) -> f64 {
        1.0 / (1.0 + self.n_th)
    }
}

/// Minimum of `mean_n` over the record and the entry where it occurs.
pub fn min_occupation(record: &CoolingRecord) -> (f64, usize) {
    record
        .mean_n
        .iter()
        .copied()
        .enumerate()
        .fold((f64::INFINITY, 0), |(best, at), (i, v)| if v < best { (v, i) } else { (best, at) })
}

fn initial_state(n_th: f64, space: FockSpace) -> Result<JointState> {
    if !(n_th >= 0.0 && n_th.is_finite()) {
        return Err(Error::InvalidParameter(format!("n_th must be >= 0, got {n_th}")));
    }
    JointState::thermal_ground_spin(n_th, space)
}

/// Concatenated scheme from `|g⟩⟨g| ⊗ ρ_th`: `n_reps` blocks of duration
/// `T_n = π/(2λ√(n+1))`, each followed by projection onto `g`.
pub fn run_concatenated(params: &SystemParams, n_th: f64, cs: &CsConfig, space: FockSpace) -> Result<CoolingRecord> {
    params.validate()?;
    if cs.n_reps == 0 {
        return Err(Error::InvalidParameter("n_reps must be at least 1".into()));
    }
    if params.lambda <= 0.0 {
        return Err(Error::InvalidParameter("the concatenated scheme needs lambda > 0".into()));
    }
    let gs = exact_ground_state(params, space)?;
    let h = build_hamiltonian(params, space)?;
    let mut state = initial_state(n_th, space)?;
    let mut record = CoolingRecord::start(n_th, params.lambda, &state, &gs)?;
    let closed = match cs.noise {
        None => Some(UnitaryPropagator::new(&h)?),
        Some(n) if n.gamma_d == 0.0 => Some(UnitaryPropagator::new(&h)?),
        Some(_) => None,
    };
    let chunks = cs.dense_samples.max(1);
    let mut time = 0.0;
    for n in 0..cs.n_reps {
        let t_n = params.rabi_time(n);
        let piece = t_n / chunks as f64;
        if cs.dense_samples > 0 {
            record.observe(time, n, &state, &gs)?;
        }
        let step = closed.as_ref().map(|u| u.unitary(piece));
        for k in 0..chunks {
            state = match (&step, cs.noise) {
                (Some(u), _) => apply_unitary(&state, u)?,
                (None, Some(noise)) => evolve_lindblad(&state, Generator::Static(&h), &noise, piece, &cs.propagation)?,
                (None, None) => unreachable!(),
            };
            if cs.dense_samples > 0 {
                let t = if k + 1 == chunks { time + t_n } else { time + (k + 1) as f64 * piece };
                record.observe(t, n, &state, &gs)?;
            }
        }
        time += t_n;
        state = record.measure(time, &state, &gs)?;
    }
    Ok(record)
}

/// Single-shot scheme: evolution under the shaped spin frequency for the
/// pulse duration, then one projection onto `g`.
pub fn run_single_shot(params: &SystemParams, n_th: f64, ss: &SsConfig, space: FockSpace) -> Result<CoolingRecord> {
    params.validate()?;
    if params.lambda <= 0.0 {
        return Err(Error::InvalidParameter("the single-shot scheme needs lambda > 0".into()));
    }
    let qsl = params.speed_limit();
    if ss.pulse.tau() < qsl * (1.0 - 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "pulse duration {} is below the quantum speed limit {qsl}",
            ss.pulse.tau()
        )));
    }
    let gs = exact_ground_state(params, space)?;
    let state = initial_state(n_th, space)?;
    let mut record = CoolingRecord::start(n_th, params.lambda, &state, &gs)?;
    let evolved = match ss.noise {
        Some(noise) if noise.gamma_d > 0.0 => evolve_lindblad(
            &state,
            Generator::Driven { params, pulse: &ss.pulse },
            &noise,
            ss.pulse.tau(),
            &ss.propagation,
        )?,
        _ => evolve_unitary_td(&state, params, &ss.pulse, &ss.propagation)?,
    };
    record.measure(ss.pulse.tau(), &evolved, &gs)?;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::thermal_populations;
    use crate::linalg::max_abs;

    fn sp(n: usize) -> FockSpace {
        FockSpace::new(n).unwrap()
    }

    #[test]
    fn projection_examples() {
        let space = sp(6);
        let g0 = JointState::basis(Spin::G, 0, space).unwrap();
        let m = project_spin(&g0, Spin::G).unwrap();
        assert_eq!(m.probability, 1.0);
        assert!(max_abs(&(m.post_state.rho() - g0.rho())) < 1e-15);

        let e0 = JointState::basis(Spin::E, 0, space).unwrap();
        assert!(matches!(project_spin(&e0, Spin::G), Err(Error::MeasurementUnreachable { .. })));

        let mix = JointState::from_density((g0.rho() + e0.rho()) * C64::from(0.5), space).unwrap();
        let m = project_spin(&mix, Spin::G).unwrap();
        assert!((m.probability - 0.5).abs() < 1e-15);
        assert!(max_abs(&(m.post_state.rho() - g0.rho())) < 1e-15);
    }

    #[test]
    fn outcome_probabilities_sum_to_one() {
        let space = sp(8);
        let p = SystemParams::resonant(0.1, 1e-2);
        let h = build_hamiltonian(&p, space).unwrap();
        let st = UnitaryPropagator::new(&h).unwrap().evolve(&JointState::thermal_ground_spin(0.4, space).unwrap(), 7.0).unwrap();
        let g = project_spin(&st, Spin::G).unwrap();
        let e = project_spin(&st, Spin::E).unwrap();
        assert!((g.probability + e.probability - 1.0).abs() < 1e-10);
        assert!((g.post_state.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn records_and_timing() {
        let p = SystemParams::resonant(0.05, 0.0);
        let space = sp(30);
        let cs = CsConfig::new(6);
        let rec = run_concatenated(&p, 0.5, &cs, space).unwrap();
        assert_eq!(rec.len(), 7);
        assert_eq!(rec.steps, (0..7).collect::<Vec<_>>());
        let t_f: f64 = (0..6).map(|n| p.rabi_time(n)).sum();
        assert!((rec.total_time() - t_f).abs() < 1e-12);
        let product: f64 = rec.step_success_probs.iter().product();
        assert!((rec.cumulative_success_prob - product).abs() < 1e-12);
        assert!(rec.cumulative_success_prob >= rec.success_lower_bound() - 1e-9);
        assert_eq!(rec.trajectory.len(), 6 * 21);
        assert!(rec.trajectory.windows(2).all(|w| w[1].time >= w[0].time));
        // noiseless cooling is monotone, so the minimum sits at the end
        assert_eq!(min_occupation(&rec).1, 6);
    }

    #[test]
    fn ladder_emptied_in_order() {
        let p = SystemParams::resonant(0.05, 0.0);
        let space = sp(40);
        let rec = run_concatenated(&p, 1.0, &CsConfig::new(5).sparse(), space).unwrap();
        for k in 1..=5 {
            for n in 1..=k {
                assert!(rec.populations[k][n] <= 1e-8, "P({n}) after {k}: {}", rec.populations[k][n]);
            }
            assert!(rec.populations[k][0] >= rec.populations[k - 1][0] - 1e-9);
        }
        assert!(rec.trajectory.is_empty());
    }

    #[test]
    fn final_fidelity_bound() {
        let p = SystemParams::resonant(0.05, 0.0);
        let space = sp(40);
        let n_reps = 4;
        let rec = run_concatenated(&p, 1.0, &CsConfig::new(n_reps).sparse(), space).unwrap();
        // the first measurement removes |g,0⟩ from nothing; the residue is the
        // untouched tail above the emptied rungs
        let (pops, _) = thermal_populations(1.0, space).unwrap();
        let tail: f64 = pops[n_reps + 1..].iter().sum();
        assert!(rec.final_fidelity() > 1.0 - tail - 1e-6);
    }

    #[test]
    fn single_shot_zero_pulse_is_one_block() {
        let p = SystemParams::resonant(0.05, 0.0);
        let space = sp(30);
        let pulse = ControlPulse::zero(p.rabi_time(0), 4).unwrap();
        let ss = SsConfig::new(pulse);
        let a = run_single_shot(&p, 0.3, &ss, space).unwrap();
        let b = run_concatenated(&p, 0.3, &CsConfig::new(1).sparse(), space).unwrap();
        assert!((a.final_mean_n() - b.final_mean_n()).abs() < 1e-8);
        assert!((a.cumulative_success_prob - b.cumulative_success_prob).abs() < 1e-8);
        assert!(max_abs(&(a.final_state.rho() - b.final_state.rho())) < 1e-8);
    }

    #[test]
    fn single_shot_rejects_fast_pulse() {
        let p = SystemParams::resonant(0.05, 0.0);
        let pulse = ControlPulse::zero(0.9 * p.speed_limit(), 2).unwrap();
        assert!(run_single_shot(&p, 0.3, &SsConfig::new(pulse), sp(20)).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = SystemParams::resonant(0.05, 0.0);
        assert!(run_concatenated(&p, 0.3, &CsConfig::new(0), sp(20)).is_err());
        assert!(run_concatenated(&p, -0.3, &CsConfig::new(2), sp(20)).is_err());
        assert!(run_concatenated(&SystemParams::resonant(0.0, 0.0), 0.3, &CsConfig::new(2), sp(20)).is_err());
    }

    #[test]
    fn noisy_minimum_is_interior() {
        let p = SystemParams::resonant(0.1, 0.0);
        let space = sp(20);
        let cs = CsConfig::new(20).with_noise(NoiseParams::new(1e-2, 1.0).unwrap()).sparse();
        let rec = run_concatenated(&p, 1.0, &cs, space).unwrap();
        let (n_min, at) = min_occupation(&rec);
        assert!(at < 20, "minimum at {at}");
        assert!(n_min < rec.final_mean_n());
    }

    #[test]
    fn min_occupation_of_decreasing_series() {
        let space = sp(4);
        let st = JointState::basis(Spin::G, 0, space).unwrap();
        let gs = exact_ground_state(&SystemParams::resonant(0.05, 0.0), space).unwrap();
        let mut rec = CoolingRecord::start(0.0, 0.05, &st, &gs).unwrap();
        rec.mean_n = vec![3.0, 2.0, 1.0, 0.5];
        assert_eq!(min_occupation(&rec), (0.5, 3));
    }
}

//! Hamiltonians of the Duffing resonator coupled to a spin, and the
//! resonator ground state (exact and first order in the Duffing strength).
//!
//! Energies are measured in units of the resonator frequency `ω`, times in
//! units of `1/ω`. The quartic term is built by multiplying the truncated
//! `(a + a†)` four times, which distorts the top four Fock levels; keep at
//! least eight levels of headroom above any populated state.

use nalgebra::DVector;

use crate::control::ControlPulse;
use crate::error::{Error, Result};
use crate::fock::{annihilation, pauli_operators, tensor, FockSpace, Operator, C64};
use crate::linalg::hermitian_eig;

/// Physical constants of the joint model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Resonator frequency.
    pub omega: f64,
    /// Spin Bohr frequency.
    pub omega_a: f64,
    /// Jaynes-Cummings coupling.
    pub lambda: f64,
    /// Duffing strength.
    pub epsilon: f64,
    /// Include `λ(a†σ⁺ + aσ⁻)`.
    pub counter_rotating: bool,
}

impl SystemParams {
    /// Resonant spin (`ω_A = ω = 1`) without counter-rotating terms.
    pub fn resonant(lambda: f64, epsilon: f64) -> Self {
        Self { omega: 1.0, omega_a: 1.0, lambda, epsilon, counter_rotating: false }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.omega, self.omega_a, self.lambda, self.epsilon]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("system parameters must be finite".into()));
        }
        if self.omega <= 0.0 || self.omega_a <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "frequencies must be positive (omega = {}, omega_a = {})",
                self.omega, self.omega_a
            )));
        }
        if self.lambda < 0.0 || self.lambda > self.omega {
            return Err(Error::InvalidParameter(format!(
                "coupling lambda = {} must lie in [0, omega]",
                self.lambda
            )));
        }
        if self.epsilon < 0.0 || self.epsilon > 0.5 * self.omega {
            return Err(Error::InvalidParameter(format!(
                "Duffing strength epsilon = {} must lie in [0, omega/2]",
                self.epsilon
            )));
        }
        if self.lambda > 0.2 * self.omega {
            log::warn!("lambda/omega = {} is outside the weak-coupling regime", self.lambda / self.omega);
        }
        if self.epsilon > 0.1 * self.omega {
            log::warn!("epsilon/omega = {} is not a small perturbation", self.epsilon / self.omega);
        }
        Ok(())
    }

    /// Duration of the resonant Rabi half-cycle `|g, n+1⟩ → |e, n⟩`,
    /// `T_n = π / (2 λ √(n+1))`.
    pub fn rabi_time(&self, n: usize) -> f64 {
        std::f64::consts::PI / (2.0 * self.lambda * ((n + 1) as f64).sqrt())
    }

    /// Quantum speed limit `π / (2 λ)` of the full-ladder transfer.
    pub fn speed_limit(&self) -> f64 {
        self.rabi_time(0)
    }
}

/// `(a + a†)⁴` by repeated multiplication inside the truncated space.
pub fn quartic(space: FockSpace) -> Operator {
    let a = annihilation(space);
    let x = &a + a.adjoint();
    let x2 = &x * &x;
    &x2 * &x2
}

/// `H_r = ω a†a + (ε/16)(a + a†)⁴`.
pub fn resonator_hamiltonian(params: &SystemParams, space: FockSpace) -> Result<Operator> {
    params.validate()?;
    Ok(space.number() * C64::from(params.omega) + quartic(space) * C64::from(params.epsilon / 16.0))
}

/// The joint Hamiltonian split as `H = rest + ω_A · spin_half`, where
/// `spin_half = σ_z/2 ⊗ 1`. Time-dependent Hamiltonians only vary `ω_A`.
#[derive(Debug, Clone)]
pub struct HamiltonianParts {
    pub rest: Operator,
    pub spin_half: Operator,
}

impl HamiltonianParts {
    pub fn new(params: &SystemParams, space: FockSpace) -> Result<Self> {
        let h_r = resonator_hamiltonian(params, space)?;
        let (sz, sp, sm) = pauli_operators();
        let a = annihilation(space);
        let ad = a.adjoint();
        let lam = C64::from(params.lambda);

        let mut rest = tensor(&Operator::identity(2, 2), &h_r);
        rest += (tensor(&sp, &a) + tensor(&sm, &ad)) * lam;
        if params.counter_rotating {
            rest += (tensor(&sp, &ad) + tensor(&sm, &a)) * lam;
        }
        let spin_half = tensor(&(sz * C64::from(0.5)), &space.identity());
        Ok(Self { rest, spin_half })
    }

    pub fn at(&self, omega_a: f64) -> Operator {
        &self.rest + &self.spin_half * C64::from(omega_a)
    }
}

/// Static joint Hamiltonian.
pub fn build_hamiltonian(params: &SystemParams, space: FockSpace) -> Result<Operator> {
    Ok(HamiltonianParts::new(params, space)?.at(params.omega_a))
}

/// Joint Hamiltonian at time `t` with `ω_A(t)` taken from `pulse`.
pub fn build_time_dependent_hamiltonian(
    params: &SystemParams,
    pulse: &ControlPulse,
    t: f64,
    space: FockSpace,
) -> Result<Operator> {
    let omega_a = params.omega * pulse.eval(t)?;
    if omega_a <= 0.0 {
        return Err(Error::NonPositiveFrequency { t, value: omega_a });
    }
    Ok(HamiltonianParts::new(params, space)?.at(omega_a))
}

/// Joint excitation number `N_e = a†a + σ⁺σ⁻`.
pub fn excitation_number(space: FockSpace) -> Operator {
    let (_, sp, sm) = pauli_operators();
    tensor(&Operator::identity(2, 2), &space.number()) + tensor(&(sp * sm), &space.identity())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroundStateMethod {
    ExactDiagonalization,
    FirstOrderPerturbation,
}

#[derive(Debug, Clone)]
pub struct GroundStateResult {
    pub state: DVector<C64>,
    pub energy: f64,
    pub occupation: f64,
    pub method: GroundStateMethod,
}

impl GroundStateResult {
    /// `|⟨self|other⟩|²`.
    pub fn fidelity_with(&self, other: &GroundStateResult) -> f64 {
        self.state.dotc(&other.state).norm_sqr()
    }

    pub fn density(&self) -> Operator {
        &self.state * self.state.adjoint()
    }
}

fn occupation_of(state: &DVector<C64>) -> f64 {
    state
        .iter()
        .enumerate()
        .map(|(n, z)| n as f64 * z.norm_sqr())
        .sum()
}

/// Lowest eigenvector of `H_r`, phased so that `⟨0|gs⟩ ≥ 0`.
pub fn exact_ground_state(params: &SystemParams, space: FockSpace) -> Result<GroundStateResult> {
    let h_r = resonator_hamiltonian(params, space)?;
    let eig = hermitian_eig(&h_r)?;
    let gap = eig.values[1] - eig.values[0];
    if gap < 1e-10 {
        return Err(Error::DegenerateGroundState { gap });
    }
    let mut state: DVector<C64> = eig.vectors.column(0).into_owned();
    let lead = state[0];
    if lead.norm() > 0.0 {
        state *= lead.conj() / lead.norm();
    }
    state /= C64::from(state.norm());
    Ok(GroundStateResult {
        occupation: occupation_of(&state),
        state,
        energy: eig.values[0],
        method: GroundStateMethod::ExactDiagonalization,
    })
}

/// First-order perturbative ground state
/// `N (|0⟩ - 3ε/(8√2 ω)|2⟩ - √3 ε/(16√2 ω)|4⟩)`.
pub fn perturbative_ground_state(
    params: &SystemParams,
    space: FockSpace,
) -> Result<GroundStateResult> {
    params.validate()?;
    if space.n_max() < 5 {
        return Err(Error::InvalidParameter(
            "perturbative ground state needs at least 5 Fock levels".into(),
        ));
    }
    let r = params.epsilon / params.omega;
    let sqrt2 = std::f64::consts::SQRT_2;
    let c2 = -3.0 * r / (8.0 * sqrt2);
    let c4 = -(3.0f64).sqrt() * r / (16.0 * sqrt2);
    let norm = 1.0 / (1.0 + 39.0 * r * r / 512.0).sqrt();

    let mut state = DVector::zeros(space.n_max());
    state[0] = C64::from(norm);
    state[2] = C64::from(norm * c2);
    state[4] = C64::from(norm * c4);
    Ok(GroundStateResult {
        state,
        energy: 3.0 * params.epsilon / 16.0,
        occupation: perturbative_occupation(params.epsilon / params.omega),
        method: GroundStateMethod::FirstOrderPerturbation,
    })
}

/// `21 r² / (128 (1 + 39 r²/512))` with `r = ε/ω`.
pub fn perturbative_occupation(r: f64) -> f64 {
    21.0 * r * r / (128.0 * (1.0 + 39.0 * r * r / 512.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, hermiticity_deviation, hermitian_eigenvalues, max_abs};

    fn sp(n: usize) -> FockSpace {
        FockSpace::new(n).unwrap()
    }

    /// Matrix element `⟨m|(a+a†)⁴|n⟩` by expanding all 16 ladder words on
    /// basis vectors of an untruncated ladder.
    fn quartic_element(m: usize, n: usize) -> f64 {
        let mut total = 0.0;
        for word in 0..16u32 {
            let mut level = n as i64;
            let mut amp = 1.0;
            for bit in 0..4 {
                if word >> bit & 1 == 1 {
                    level += 1;
                    amp *= (level as f64).sqrt();
                } else {
                    if level == 0 {
                        amp = 0.0;
                        break;
                    }
                    amp *= (level as f64).sqrt();
                    level -= 1;
                }
            }
            if level == m as i64 {
                total += amp;
            }
        }
        total
    }

    #[test]
    fn quartic_matches_ladder_expansion_below_headroom() {
        let q = quartic(sp(16));
        for m in 0..12 {
            for n in 0..12 {
                assert!((q[(m, n)].re - quartic_element(m, n)).abs() < 1e-12, "{m} {n}");
            }
        }
        assert!((quartic_element(0, 0) - 3.0).abs() < 1e-14);
        assert!((quartic_element(0, 2) - 6.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn resonator_examples() {
        let p = SystemParams::resonant(0.02, 0.0);
        let h = resonator_hamiltonian(&p, sp(6)).unwrap();
        assert_eq!(h, sp(6).number());

        let eps = 0.013;
        let p = SystemParams::resonant(0.02, eps);
        let h = resonator_hamiltonian(&p, sp(12)).unwrap();
        assert!((h[(0, 2)].re - eps / 16.0 * 6.0 * 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(h[(0, 1)], C64::from(0.0));
    }

    #[test]
    fn decoupled_spectrum() {
        let p = SystemParams { omega: 1.0, omega_a: 1.3, lambda: 0.0, epsilon: 0.0, counter_rotating: false };
        let h = build_hamiltonian(&p, sp(5)).unwrap();
        let ev = hermitian_eigenvalues(&h).unwrap();
        let mut expected: Vec<f64> = (0..5)
            .flat_map(|n| [n as f64 - 0.65, n as f64 + 0.65])
            .collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn resonant_doublet_gap() {
        let p = SystemParams::resonant(0.02, 0.0);
        let space = sp(8);
        let h = build_hamiltonian(&p, space).unwrap();
        // block {|e,0>, |g,1>} sits at energy 1/2 with splitting 2λ
        let g1 = space.joint_index(crate::fock::Spin::G, 1);
        let e0 = space.joint_index(crate::fock::Spin::E, 0);
        let block = Operator::from_fn(2, 2, |i, j| {
            let idx = [e0, g1];
            h[(idx[i], idx[j])]
        });
        let ev = hermitian_eigenvalues(&block).unwrap();
        assert!((ev[1] - ev[0] - 0.04).abs() < 1e-14);
    }

    #[test]
    fn first_order_energy_shift() {
        let eps = 1e-2;
        let p = SystemParams { omega: 1.0, omega_a: 1.0, lambda: 0.0, epsilon: eps, counter_rotating: false };
        let gs = exact_ground_state(&p, sp(40)).unwrap();
        // second-order correction is O(ε²), well below ε·1e-2
        assert!((gs.energy - 3.0 * eps / 16.0).abs() < 1e-2 * eps);
    }

    #[test]
    fn hamiltonians_are_hermitian() {
        for crt in [false, true] {
            let p = SystemParams { omega: 1.0, omega_a: 0.9, lambda: 0.1, epsilon: 0.05, counter_rotating: crt };
            let h = build_hamiltonian(&p, sp(20)).unwrap();
            assert!(hermiticity_deviation(&h) <= 1e-12);
        }
    }

    #[test]
    fn excitation_number_conservation() {
        let space = sp(12);
        let ne = excitation_number(space);
        let h0 = build_hamiltonian(&SystemParams::resonant(0.05, 0.0), space).unwrap();
        assert!(max_abs(&commutator(&h0, &ne)) <= 1e-12);
        let h1 = build_hamiltonian(&SystemParams::resonant(0.05, 1e-3), space).unwrap();
        assert!(max_abs(&commutator(&h1, &ne)) > 1e-6);
        let mut crt = SystemParams::resonant(0.05, 0.0);
        crt.counter_rotating = true;
        let h2 = build_hamiltonian(&crt, space).unwrap();
        assert!(max_abs(&commutator(&h2, &ne)) > 1e-3);
    }

    #[test]
    fn time_dependent_boundaries() {
        let p = SystemParams::resonant(0.1, 1e-3);
        let space = sp(10);
        let h_static = build_hamiltonian(&p, space).unwrap();
        let pulse = ControlPulse::new(40.0, vec![0.3, -0.2], vec![0.1, 0.4]).unwrap();
        for t in [0.0, 40.0] {
            let h = build_time_dependent_hamiltonian(&p, &pulse, t, space).unwrap();
            assert!(max_abs(&(h - &h_static)) < 1e-15);
        }
        let zero = ControlPulse::zero(40.0, 3).unwrap();
        let h = build_time_dependent_hamiltonian(&p, &zero, 17.3, space).unwrap();
        assert_eq!(h, h_static);
        assert!(matches!(
            build_time_dependent_hamiltonian(&p, &pulse, 40.5, space),
            Err(Error::TimeOutOfRange { .. })
        ));
    }

    #[test]
    fn exact_ground_state_examples() {
        let gs = exact_ground_state(&SystemParams::resonant(0.02, 0.0), sp(20)).unwrap();
        assert!((gs.state[0].re - 1.0).abs() < 1e-12);
        assert!(gs.occupation.abs() < 1e-20);

        let p = SystemParams::resonant(0.02, 1e-2);
        let gs = exact_ground_state(&p, sp(30)).unwrap();
        let formula = 21.0 * 1e-4 / 128.0;
        assert!((gs.occupation - formula).abs() < 0.2 * formula);
        assert!((gs.state.norm() - 1.0).abs() < 1e-12);
        assert!(gs.state[0].im == 0.0 && gs.state[0].re > 0.0);
        for n in (1..30).step_by(2) {
            assert!(gs.state[n].norm() <= 1e-10);
        }

        let p = SystemParams::resonant(0.02, 0.1);
        let exact = exact_ground_state(&p, sp(40)).unwrap();
        let pert = perturbative_ground_state(&p, sp(40)).unwrap();
        assert!(1.0 - exact.fidelity_with(&pert) <= 1e-4);
    }

    #[test]
    fn perturbative_examples() {
        let g = perturbative_ground_state(&SystemParams::resonant(0.02, 0.0), sp(8)).unwrap();
        assert_eq!(g.state[0], C64::from(1.0));
        assert_eq!(g.occupation, 0.0);

        let p = SystemParams::resonant(0.02, 0.1);
        let g = perturbative_ground_state(&p, sp(8)).unwrap();
        let norm = (1.0f64 + 39.0 * 0.01 / 512.0).sqrt();
        assert!((g.state[2].re * norm + 0.3 / (8.0 * 2f64.sqrt())).abs() < 1e-15);
        assert!((g.state[2].re * norm + 0.02652).abs() < 1e-5);
        let direct: f64 = g.state.iter().enumerate().map(|(n, z)| n as f64 * z.norm_sqr()).sum();
        assert!((direct - g.occupation).abs() < 1e-15);

        let g = perturbative_ground_state(&SystemParams::resonant(0.02, 1e-3), sp(8)).unwrap();
        assert!((g.occupation - 1.640625e-7).abs() < 1e-12);
    }

    #[test]
    fn exact_occupation_monotone_in_epsilon() {
        let occ: Vec<f64> = [0.0, 1e-4, 1e-3, 1e-2, 1e-1]
            .iter()
            .map(|&e| exact_ground_state(&SystemParams::resonant(0.02, e), sp(40)).unwrap().occupation)
            .collect();
        assert!(occ.windows(2).all(|w| w[1] > w[0]), "{occ:?}");
    }

    #[test]
    fn exact_vs_perturbative_fidelity_bound() {
        for &r in &[1e-4, 1e-3, 1e-2, 3e-2, 1e-1] {
            let p = SystemParams::resonant(0.02, r);
            let exact = exact_ground_state(&p, sp(40)).unwrap();
            let pert = perturbative_ground_state(&p, sp(40)).unwrap();
            assert!(exact.fidelity_with(&pert) >= 1.0 - 10.0 * r.powi(4) - 1e-8, "{r}");
        }
    }

    #[test]
    fn parameter_validation() {
        let mut p = SystemParams::resonant(0.02, 0.6);
        assert!(p.validate().is_err());
        p.epsilon = -1e-3;
        assert!(p.validate().is_err());
        p.epsilon = 0.0;
        p.lambda = 1.5;
        assert!(p.validate().is_err());
        p.lambda = 0.02;
        p.omega_a = 0.0;
        assert!(p.validate().is_err());
    }
}

//! Landau-Zener block propagation and the CRAB cost.
//!
//! At `ε = 0` and without counter-rotating terms the Jaynes-Cummings
//! Hamiltonian is block diagonal in `{|e,n⟩, |g,n+1⟩}` with
//! `H_n(t) = (ω_A(t) - ω)/2 σ̃_z + λ√(n+1) σ̃_x`. Block amplitudes are
//! ordered `(e, g)`.

use std::f64::consts::PI;

use crate::control::ControlPulse;
use crate::error::{Error, Result};
use crate::fock::C64;

/// One step `exp(-i h (hz σ_z + hx σ_x))` applied to `(e, g)` amplitudes.
#[inline]
fn lz_step(amp: [C64; 2], hz: f64, hx: f64, h: f64) -> [C64; 2] {
    let r = (hz * hz + hx * hx).sqrt();
    let (s, c) = (r * h).sin_cos();
    let sinc = if r > 0.0 { s / r } else { h };
    let diag_e = C64::new(c, -sinc * hz);
    let diag_g = C64::new(c, sinc * hz);
    let off = C64::new(0.0, -sinc * hx);
    [diag_e * amp[0] + off * amp[1], off * amp[0] + diag_g * amp[1]]
}

/// Propagates `|g, n+1⟩` through block `n` for piecewise-constant
/// detunings `δ_k = ω_A - ω` held for `h` each.
pub fn propagate_block(n: usize, detunings: &[f64], lambda: f64, h: f64) -> [C64; 2] {
    let hx = lambda * ((n + 1) as f64).sqrt();
    detunings.iter().fold([C64::from(0.0), C64::from(1.0)], |amp, &d| lz_step(amp, 0.5 * d, hx, h))
}

/// Evolves `|g, n+1⟩` under `H_n(t)` over `[0, τ]` with midpoint sampling
/// of the pulse at step `≤ dt`. Returns `(⟨e,n|φ⟩, ⟨g,n+1|φ⟩)`. The
/// resonator frequency is the unit.
pub fn landau_zener_propagate(n: usize, pulse: &ControlPulse, lambda: f64, dt: f64) -> [C64; 2] {
    let (h, times) = pulse.midpoints(dt);
    let detunings: Vec<f64> = times.iter().map(|&t| pulse.eval_unchecked(t) - 1.0).collect();
    propagate_block(n, &detunings, lambda, h)
}

/// Setup of a CRAB optimization over the first `n_c` Jaynes-Cummings
/// subspaces with `n_omega` harmonics.
#[derive(Debug, Clone)]
pub struct CrabProblem {
    n_c: usize,
    lambda: f64,
    tau: f64,
    n_omega: usize,
    dt: f64,
    h: f64,
    envelope: Vec<f64>,
    // basis[k * n_omega + j] = (cos, sin) of ω_{j+1} t_k
    basis: Vec<(f64, f64)>,
}

impl CrabProblem {
    pub fn new(n_c: usize, lambda: f64, tau: f64, n_omega: usize, dt: f64) -> Result<Self> {
        if n_c == 0 || n_omega == 0 {
            return Err(Error::InvalidParameter("N_c and N_omega must be at least 1".into()));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
        }
        let qsl = PI / (2.0 * lambda);
        if !(tau >= qsl * (1.0 - 1e-12)) || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "tau = {tau} is below the quantum speed limit {qsl}"
            )));
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        let probe = ControlPulse::zero(tau, n_omega)?;
        let (h, times) = probe.midpoints(dt);
        let envelope = times.iter().map(|t| t * (tau - t) / (tau * tau)).collect();
        let mut basis = Vec::with_capacity(times.len() * n_omega);
        for &t in &times {
            for j in 1..=n_omega {
                let (s, c) = (probe.frequency(j) * t).sin_cos();
                basis.push((c, s));
            }
        }
        Ok(Self { n_c, lambda, tau, n_omega, dt, h, envelope, basis })
    }

    /// Default propagation step `τ/4000`.
    pub fn with_default_dt(n_c: usize, lambda: f64, tau: f64, n_omega: usize) -> Result<Self> {
        Self::new(n_c, lambda, tau, n_omega, tau / 4000.0)
    }

    /// Same problem at half the step, for convergence checks.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.n_c, self.lambda, self.tau, self.n_omega, self.dt / 2.0)
    }

    pub fn n_c(&self) -> usize {
        self.n_c
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn n_omega(&self) -> usize {
        self.n_omega
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn dimension(&self) -> usize {
        2 * self.n_omega
    }

    pub fn pulse(&self, coeffs: &[f64]) -> Result<ControlPulse> {
        ControlPulse::from_vector(self.tau, coeffs)
    }

    /// Detunings `ω_A(t_k)/ω - 1` at the grid midpoints, or `None` if any
    /// sample has a nonpositive spin frequency.
    fn detunings(&self, coeffs: &[f64]) -> Option<Vec<f64>> {
        assert_eq!(coeffs.len(), self.dimension(), "coefficient vector length");
        let (ca, cb) = coeffs.split_at(self.n_omega);
        let mut out = Vec::with_capacity(self.envelope.len());
        for (k, env) in self.envelope.iter().enumerate() {
            let row = &self.basis[k * self.n_omega..(k + 1) * self.n_omega];
            let series: f64 = row
                .iter()
                .zip(ca.iter().zip(cb))
                .map(|(&(c, s), (&a, &b))| a * c + b * s)
                .sum();
            let d = env * series;
            if 1.0 + d <= 0.0 {
                return None;
            }
            out.push(d);
        }
        Some(out)
    }

    /// `|⟨e,n|φ_n(τ)⟩|²` for `n = 0..len`.
    pub fn transfer_probabilities(&self, coeffs: &[f64], len: usize) -> Vec<f64> {
        match self.detunings(coeffs) {
            Some(d) => (0..len)
                .map(|n| propagate_block(n, &d, self.lambda, self.h)[0].norm_sqr())
                .collect(),
            None => vec![0.0; len],
        }
    }

    /// `C = 1 - (1/N_c) Σ_{n<N_c} |⟨e,n|φ_n(τ)⟩|²`. Pulses with a
    /// nonpositive spin frequency anywhere on the grid cost 1.
    pub fn cost(&self, coeffs: &[f64]) -> f64 {
        let probs = self.transfer_probabilities(coeffs, self.n_c);
        let mean = probs.iter().sum::<f64>() / self.n_c as f64;
        (1.0 - mean).clamp(0.0, 1.0)
    }
}

pub fn crab_cost(coeffs: &[f64], problem: &CrabProblem) -> f64 {
    problem.cost(coeffs)
}

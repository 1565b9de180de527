use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// CRAB spin-frequency protocol
/// `ω_A(t)/ω = 1 + t(τ-t)/τ² Σ_n [ĉa_n cos(ω_n t) + ĉb_n sin(ω_n t)]`
/// with `ω_n = 2πn/τ`.
///
/// Coefficients are stored dimensionless; the raw series coefficients are
/// `a_n = ĉa_n / τ²` (see [`ControlPulse::raw_a`]).
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPulse {
    tau: f64,
    coeffs_a: Vec<f64>,
    coeffs_b: Vec<f64>,
}

impl ControlPulse {
    pub fn new(tau: f64, coeffs_a: Vec<f64>, coeffs_b: Vec<f64>) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!("pulse duration must be positive, got {tau}")));
        }
        if coeffs_a.is_empty() || coeffs_a.len() != coeffs_b.len() {
            return Err(Error::InvalidParameter(format!(
                "pulse needs N_omega >= 1 cosine and sine coefficients, got {} and {}",
                coeffs_a.len(),
                coeffs_b.len()
            )));
        }
        if coeffs_a.iter().chain(&coeffs_b).any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("pulse coefficients must be finite".into()));
        }
        Ok(Self { tau, coeffs_a, coeffs_b })
    }

    /// All-zero coefficients: `ω_A(t) = ω`.
    pub fn zero(tau: f64, n_omega: usize) -> Result<Self> {
        Self::new(tau, vec![0.0; n_omega], vec![0.0; n_omega])
    }

    /// Builds a pulse from the raw series coefficients `a_n`, `b_n`.
    pub fn from_raw(tau: f64, raw_a: &[f64], raw_b: &[f64]) -> Result<Self> {
        let s = tau * tau;
        Self::new(tau, raw_a.iter().map(|a| a * s).collect(), raw_b.iter().map(|b| b * s).collect())
    }

    /// Cosine coefficients followed by sine coefficients.
    pub fn from_vector(tau: f64, coeffs: &[f64]) -> Result<Self> {
        if !coeffs.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter("coefficient vector must have even length".into()));
        }
        let (a, b) = coeffs.split_at(coeffs.len() / 2);
        Self::new(tau, a.to_vec(), b.to_vec())
    }

    pub fn to_vector(&self) -> Vec<f64> {
        self.coeffs_a.iter().chain(&self.coeffs_b).copied().collect()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn n_omega(&self) -> usize {
        self.coeffs_a.len()
    }

    pub fn coeffs_a(&self) -> &[f64] {
        &self.coeffs_a
    }

    pub fn coeffs_b(&self) -> &[f64] {
        &self.coeffs_b
    }

    pub fn raw_a(&self) -> Vec<f64> {
        self.coeffs_a.iter().map(|c| c / (self.tau * self.tau)).collect()
    }

    pub fn raw_b(&self) -> Vec<f64> {
        self.coeffs_b.iter().map(|c| c / (self.tau * self.tau)).collect()
    }

    /// `ω_n = 2πn/τ`, `n = 1..=N_ω`.
    pub fn frequency(&self, n: usize) -> f64 {
        2.0 * PI * n as f64 / self.tau
    }

    /// `ω_A(t)/ω` for `t ∈ [0, τ]`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.tau).contains(&t) {
            return Err(Error::TimeOutOfRange { t, tau: self.tau });
        }
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> f64 {
        let envelope = t * (self.tau - t) / (self.tau * self.tau);
        let series: f64 = (0..self.n_omega())
            .map(|k| {
                let w = self.frequency(k + 1) * t;
                self.coeffs_a[k] * w.cos() + self.coeffs_b[k] * w.sin()
            })
            .sum();
        1.0 + envelope * series
    }

    /// Midpoint sample times of a piecewise-constant grid over `[0, τ]`
    /// with step at most `dt`.
    pub fn midpoints(&self, dt: f64) -> (f64, Vec<f64>) {
        let steps = (self.tau / dt).ceil().max(1.0) as usize;
        let h = self.tau / steps as f64;
        (h, (0..steps).map(|k| (k as f64 + 0.5) * h).collect())
    }

    /// Rejects pulses whose spin frequency dips to zero or below on the
    /// grid used for propagation.
    pub fn check_positive(&self, dt: f64) -> Result<()> {
        let (_, times) = self.midpoints(dt);
        for t in times {
            let value = self.eval_unchecked(t);
            if value <= 0.0 {
                return Err(Error::NonPositiveFrequency { t, value });
            }
        }
        Ok(())
    }

    /// Largest `ω_A(t)/ω` on the grid.
    pub fn max_value(&self, dt: f64) -> f64 {
        let (_, times) = self.midpoints(dt);
        times.into_iter().map(|t| self.eval_unchecked(t)).fold(1.0, f64::max)
    }
}

/// An optimized pulse together with the metadata persisted in pulse files.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseFile {
    pub pulse: ControlPulse,
    pub lambda: f64,
    pub cost: f64,
    pub seed: u64,
}

const HEADER_KEYS: [&str; 5] = ["tau_over_tqsl", "lambda_over_omega", "n_omega", "cost", "seed"];

impl PulseFile {
    /// Line-oriented text form: five `key=value` header lines followed by
    /// `<n> <a_n> <b_n>` rows of dimensionless coefficients.
    pub fn render(&self) -> String {
        let tqsl = PI / (2.0 * self.lambda);
        let mut out = String::new();
        let _ = writeln!(out, "tau_over_tqsl={}", self.pulse.tau() / tqsl);
        let _ = writeln!(out, "lambda_over_omega={}", self.lambda);
        let _ = writeln!(out, "n_omega={}", self.pulse.n_omega());
        let _ = writeln!(out, "cost={}", self.cost);
        let _ = writeln!(out, "seed={}", self.seed);
        for k in 0..self.pulse.n_omega() {
            let _ = writeln!(out, "{} {} {}", k + 1, self.pulse.coeffs_a()[k], self.pulse.coeffs_b()[k]);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::PulseFormat(msg);
        let mut header: [Option<&str>; 5] = [None; 5];
        let mut rows: Vec<(usize, f64, f64)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some((key, value)) = line.split_once('=') {
                let key = key.trim();
                let slot = HEADER_KEYS
                    .iter()
                    .position(|k| *k == key)
                    .ok_or_else(|| bad(format!("line {}: unknown header key `{key}`", lineno + 1)))?;
                if header[slot].replace(value.trim()).is_some() {
                    return Err(bad(format!("line {}: duplicate header key `{key}`", lineno + 1)));
                }
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(bad(format!("line {}: expected `<n> <a_n> <b_n>`", lineno + 1)));
            }
            let n = fields[0]
                .parse::<usize>()
                .map_err(|e| bad(format!("line {}: {e}", lineno + 1)))?;
            let a = parse_f64(fields[1], lineno)?;
            let b = parse_f64(fields[2], lineno)?;
            rows.push((n, a, b));
        }
        let get = |i: usize| header[i].ok_or_else(|| bad(format!("missing header `{}`", HEADER_KEYS[i])));
        let tau_mult = parse_f64(get(0)?, 0)?;
        let lambda = parse_f64(get(1)?, 0)?;
        let n_omega = get(2)?
            .parse::<usize>()
            .map_err(|e| bad(format!("n_omega: {e}")))?;
        let cost = parse_f64(get(3)?, 0)?;
        let seed = get(4)?.parse::<u64>().map_err(|e| bad(format!("seed: {e}")))?;
        if !(lambda > 0.0) {
            return Err(bad(format!("lambda_over_omega must be positive, got {lambda}")));
        }
        if rows.len() != n_omega {
            return Err(bad(format!("expected {n_omega} coefficient rows, found {}", rows.len())));
        }
        rows.sort_by_key(|r| r.0);
        if rows.iter().enumerate().any(|(k, r)| r.0 != k + 1) {
            return Err(bad("coefficient rows must be numbered 1..=n_omega".into()));
        }
        let tau = tau_mult * PI / (2.0 * lambda);
        let pulse = ControlPulse::new(
            tau,
            rows.iter().map(|r| r.1).collect(),
            rows.iter().map(|r| r.2).collect(),
        )?;
        Ok(Self { pulse, lambda, cost, seed })
    }
}

fn parse_f64(s: &str, lineno: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::PulseFormat(format!("line {}: `{s}`: {e}", lineno + 1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_pulse_is_resonant() {
        let p = ControlPulse::zero(12.0, 4).unwrap();
        for t in [0.0, 1.0, 6.0, 11.9, 12.0] {
            assert_eq!(p.eval(t).unwrap(), 1.0);
        }
    }

    #[test]
    fn single_cosine_at_midpoint() {
        let tau = 7.5;
        let c = 0.013;
        let p = ControlPulse::from_raw(tau, &[c], &[0.0]).unwrap();
        let expected = 1.0 - c * tau * tau / 4.0;
        assert!((p.eval(tau / 2.0).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn out_of_window_rejected() {
        let p = ControlPulse::zero(3.0, 1).unwrap();
        assert!(matches!(p.eval(-0.1), Err(Error::TimeOutOfRange { .. })));
        assert!(matches!(p.eval(3.1), Err(Error::TimeOutOfRange { .. })));
    }

    #[test]
    fn negative_frequency_rejected() {
        let p = ControlPulse::new(10.0, vec![-20.0], vec![0.0]).unwrap();
        assert!(matches!(p.check_positive(0.01), Err(Error::NonPositiveFrequency { .. })));
        assert!(ControlPulse::new(10.0, vec![0.5], vec![0.2]).unwrap().check_positive(0.01).is_ok());
    }

    #[test]
    fn construction_errors() {
        assert!(ControlPulse::new(0.0, vec![0.0], vec![0.0]).is_err());
        assert!(ControlPulse::new(1.0, vec![], vec![]).is_err());
        assert!(ControlPulse::new(1.0, vec![0.0], vec![0.0, 1.0]).is_err());
        assert!(ControlPulse::from_vector(1.0, &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn parse_rejects_malformed() {
        let good = PulseFile {
            pulse: ControlPulse::new(PI / 0.2 * 3.0, vec![0.1, 0.2], vec![-0.3, 0.4]).unwrap(),
            lambda: 0.1,
            cost: 1e-4,
            seed: 7,
        }
        .render();
        assert!(PulseFile::parse(&good).is_ok());
        assert!(PulseFile::parse(&good.replace("seed=7", "seed=7\nbogus=1")).is_err());
        assert!(PulseFile::parse(&good.replace("n_omega=2", "n_omega=3")).is_err());
        assert!(PulseFile::parse(&good.replace("cost=", "cst=")).is_err());
        assert!(PulseFile::parse(&good.replace("2 0.2 0.4", "2 0.2")).is_err());
        assert!(PulseFile::parse(&good.replace("2 0.2 0.4", "3 0.2 0.4")).is_err());
    }

    proptest! {
        #[test]
        fn boundaries_pinned(coeffs in prop::collection::vec(-5.0f64..5.0, 2..24), tau in 1.0f64..100.0) {
            let n = coeffs.len() / 2;
            let p = ControlPulse::from_vector(tau, &coeffs[..2 * n]).unwrap();
            prop_assert_eq!(p.eval(0.0).unwrap(), 1.0);
            prop_assert!((p.eval(tau).unwrap() - 1.0).abs() < 1e-15);
        }

        #[test]
        fn pulse_file_roundtrip(coeffs in prop::collection::vec(-5.0f64..5.0, 1..12),
                                lambda in 0.01f64..0.5, mult in 1.0f64..5.0, seed: u64) {
            let mut v = coeffs.clone();
            v.extend(coeffs.iter().map(|c| -0.5 * c));
            let tau = mult * PI / (2.0 * lambda);
            let file = PulseFile { pulse: ControlPulse::from_vector(tau, &v).unwrap(), lambda, cost: 0.25, seed };
            let back = PulseFile::parse(&file.render()).unwrap();
            prop_assert_eq!(back.pulse.coeffs_a(), file.pulse.coeffs_a());
            prop_assert_eq!(back.pulse.coeffs_b(), file.pulse.coeffs_b());
            prop_assert!((back.pulse.tau() - tau).abs() <= 1e-12 * tau);
            prop_assert_eq!(back.seed, seed);
        }
    }
}

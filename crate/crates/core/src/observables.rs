//! Resonator observables: occupation, ground-state fidelity, phase-space
//! covariance, von Neumann entropy and the relative-entropy
//! non-Gaussianity. Logarithms are natural.

use crate::error::{Error, Result};
use crate::fock::{Operator, C64};
use crate::linalg::hermitian_eigenvalues;
use crate::model::GroundStateResult;

/// Eigenvalues below this are treated as exact zeros in entropies.
pub const ENTROPY_CUTOFF: f64 = 1e-14;

/// `Tr[a†a ρ]`.
pub fn mean_occupation(rho_r: &Operator) -> f64 {
    rho_r.diagonal().iter().enumerate().map(|(n, z)| n as f64 * z.re).sum()
}

/// `⟨ψ_gs|ρ|ψ_gs⟩`, clamped to `[0, 1]`.
pub fn fidelity_to_gs(rho_r: &Operator, gs: &GroundStateResult) -> f64 {
    let psi = &gs.state;
    let value = (psi.adjoint() * rho_r * psi)[(0, 0)].re;
    value.clamp(0.0, 1.0)
}

/// First moments and symmetrized second moments of
/// `q = (a + a†)/√2`, `p = i(a† − a)/√2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceData {
    pub mean_q: f64,
    pub mean_p: f64,
    pub s_qq: f64,
    pub s_pp: f64,
    pub s_qp: f64,
}

impl CovarianceData {
    pub fn det(&self) -> f64 {
        self.s_qq * self.s_pp - self.s_qp * self.s_qp
    }
}

/// Moments from `⟨a⟩`, `⟨a²⟩` and `⟨a†a⟩`, using `[a, a†] = 1`.
pub fn covariance(rho_r: &Operator) -> CovarianceData {
    let n = rho_r.nrows();
    let mut a1 = C64::from(0.0);
    let mut a2 = C64::from(0.0);
    for k in 0..n {
        if k + 1 < n {
            a1 += rho_r[(k + 1, k)] * ((k + 1) as f64).sqrt();
        }
        if k + 2 < n {
            a2 += rho_r[(k + 2, k)] * (((k + 1) * (k + 2)) as f64).sqrt();
        }
    }
    let number = mean_occupation(rho_r);
    let mean_q = std::f64::consts::SQRT_2 * a1.re;
    let mean_p = std::f64::consts::SQRT_2 * a1.im;
    let qq = number + 0.5 + a2.re;
    let pp = number + 0.5 - a2.re;
    let qp = a2.im;
    CovarianceData {
        mean_q,
        mean_p,
        s_qq: qq - mean_q * mean_q,
        s_pp: pp - mean_p * mean_p,
        s_qp: qp - mean_q * mean_p,
    }
}

/// `−Σ λ ln λ` over eigenvalues above [`ENTROPY_CUTOFF`].
pub fn von_neumann_entropy(rho: &Operator) -> Result<f64> {
    let values = hermitian_eigenvalues(rho)?;
    Ok(values
        .into_iter()
        .filter(|&l| l > ENTROPY_CUTOFF)
        .map(|l| -l * l.ln())
        .sum::<f64>()
        .max(0.0))
}

/// Entropy of a single-mode Gaussian state with symplectic eigenvalue `x`:
/// `h(x) = (x+½)ln(x+½) − (x−½)ln(x−½)`, with the second term taken as its
/// limit 0 at `x = ½`.
pub fn gaussian_entropy(x: f64) -> f64 {
    let upper = x + 0.5;
    let lower = x - 0.5;
    let lower_term = if lower > 0.0 { lower * lower.ln() } else { 0.0 };
    upper * upper.ln() - lower_term
}

/// `δ_G = h(√det s) − S(ρ)`, floored at 0.
pub fn non_gaussianity(rho_r: &Operator) -> Result<f64> {
    let cov = covariance(rho_r);
    let det = cov.det();
    if det < 0.25 - 1e-6 {
        return Err(Error::UnphysicalCovariance { det });
    }
    let value = gaussian_entropy(det.max(0.25).sqrt()) - von_neumann_entropy(rho_r)?;
    if value < 0.0 {
        log::debug!("non-Gaussianity clamped from {value:e}");
    }
    Ok(value.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableSet {
    pub mean_n: f64,
    pub fidelity_gs: f64,
    pub delta_g: f64,
    pub purity: f64,
}

pub fn measure(rho_r: &Operator, gs: &GroundStateResult) -> Result<ObservableSet> {
    Ok(ObservableSet {
        mean_n: mean_occupation(rho_r),
        fidelity_gs: fidelity_to_gs(rho_r, gs),
        delta_g: non_gaussianity(rho_r)?,
        purity: rho_r.iter().map(|z| z.norm_sqr()).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{thermal_state, FockSpace};
    use crate::model::{exact_ground_state, perturbative_occupation, SystemParams};
    use nalgebra::DVector;

    fn fock(n: usize, dim: usize) -> Operator {
        let mut m = Operator::zeros(dim, dim);
        m[(n, n)] = C64::from(1.0);
        m
    }

    fn sp(n: usize) -> FockSpace {
        FockSpace::new(n).unwrap()
    }

    #[test]
    fn occupation_examples() {
        assert_eq!(mean_occupation(&fock(0, 8)), 0.0);
        let th = thermal_state(10.0, sp(300)).unwrap();
        assert!((mean_occupation(&th) - 10.0).abs() < 1e-6);
        let gs = exact_ground_state(&SystemParams::resonant(0.02, 1e-2), sp(30)).unwrap();
        let occ = mean_occupation(&gs.density());
        assert!((occ - gs.occupation).abs() < 1e-12);
        assert!((occ - perturbative_occupation(1e-2)).abs() < 0.05 * occ);
    }

    #[test]
    fn fidelity_examples() {
        let space = sp(20);
        let vac = exact_ground_state(&SystemParams::resonant(0.02, 0.0), space).unwrap();
        assert!((fidelity_to_gs(&vac.density(), &vac) - 1.0).abs() < 1e-14);
        assert!(fidelity_to_gs(&fock(1, 20), &vac).abs() < 1e-14);
        let th = thermal_state(1.0, sp(60)).unwrap();
        let vac60 = exact_ground_state(&SystemParams::resonant(0.02, 0.0), sp(60)).unwrap();
        assert!((fidelity_to_gs(&th, &vac60) - 0.5).abs() < 1e-12);

        let gs = exact_ground_state(&SystemParams::resonant(0.02, 0.05), space).unwrap();
        assert!((fidelity_to_gs(&gs.density(), &gs) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn covariance_examples() {
        let c = covariance(&fock(0, 10));
        assert_eq!((c.s_qq, c.s_pp, c.s_qp, c.mean_q, c.mean_p), (0.5, 0.5, 0.0, 0.0, 0.0));
        let c = covariance(&fock(1, 10));
        assert!((c.s_qq - 1.5).abs() < 1e-15 && (c.s_pp - 1.5).abs() < 1e-15);
        for nth in [0.5, 2.0, 4.0] {
            let c = covariance(&thermal_state(nth, sp(200)).unwrap());
            assert!((c.s_qq - nth - 0.5).abs() < 1e-9);
            assert!((c.s_pp - nth - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn covariance_matches_matrix_moments() {
        // coherent superposition with a squeezed-like component
        let dim = 12;
        let mut v = DVector::<C64>::zeros(dim);
        v[0] = C64::new(0.7, 0.0);
        v[1] = C64::new(0.3, 0.2);
        v[2] = C64::new(-0.4, 0.1);
        v[3] = C64::new(0.1, -0.3);
        v /= C64::from(v.norm());
        let rho = &v * v.adjoint();

        let a = crate::fock::annihilation(sp(dim));
        let s2 = C64::from(std::f64::consts::FRAC_1_SQRT_2);
        let q = (&a + a.adjoint()) * s2;
        let p = (a.adjoint() - &a) * C64::new(0.0, 1.0) * s2;
        let ev = |m: &Operator| crate::linalg::trace(&(m * &rho)).re;
        let (mq, mp) = (ev(&q), ev(&p));
        let c = covariance(&rho);
        assert!((c.mean_q - mq).abs() < 1e-14);
        assert!((c.mean_p - mp).abs() < 1e-14);
        assert!((c.s_qq - (ev(&(&q * &q)) - mq * mq)).abs() < 1e-13);
        assert!((c.s_pp - (ev(&(&p * &p)) - mp * mp)).abs() < 1e-13);
        let sym = (&q * &p + &p * &q) * C64::from(0.5);
        assert!((c.s_qp - (ev(&sym) - mq * mp)).abs() < 1e-13);
        assert!(c.det() >= 0.25 - 1e-9);
    }

    #[test]
    fn entropy_examples() {
        assert!(von_neumann_entropy(&fock(3, 6)).unwrap().abs() < 1e-9);
        let mut mix = Operator::zeros(6, 6);
        mix[(0, 0)] = C64::from(0.5);
        mix[(1, 1)] = C64::from(0.5);
        assert!((von_neumann_entropy(&mix).unwrap() - 2f64.ln()).abs() < 1e-14);
        let th = thermal_state(1.0, sp(80)).unwrap();
        assert!((von_neumann_entropy(&th).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn gaussian_entropy_boundary() {
        assert_eq!(gaussian_entropy(0.5), 0.0);
        assert!(gaussian_entropy(0.5 + 1e-9).is_finite());
        assert!((gaussian_entropy(1.5) - 2.0 * 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn non_gaussianity_examples() {
        assert_eq!(non_gaussianity(&fock(0, 10)).unwrap(), 0.0);
        assert!((non_gaussianity(&fock(1, 10)).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-6);
        for (nth, n_max) in [(0.0, 30), (0.5, 100), (1.0, 120), (10.0, 400)] {
            let th = thermal_state(nth, sp(n_max)).unwrap();
            assert!(non_gaussianity(&th).unwrap() <= 1e-8, "n_th = {nth}");
        }
    }

    #[test]
    fn unphysical_covariance_rejected() {
        // trace-one diagonal matrix violating the uncertainty relation only
        // through a forged coherence
        let mut rho = fock(0, 6);
        rho[(2, 0)] = C64::from(0.6);
        rho[(0, 2)] = C64::from(0.6);
        assert!(matches!(non_gaussianity(&rho), Err(Error::UnphysicalCovariance { .. })));
    }
}

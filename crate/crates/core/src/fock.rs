//! Truncated Fock space, spin operators and joint spin-resonator states.
//!
//! Joint operators use the basis ordering spin ⊗ Fock with `g = 0`, `e = 1`:
//! the joint index of `|s, n⟩` is `s * n_max + n`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, hermiticity_deviation, trace};

pub use nalgebra::Complex;
pub type C64 = Complex<f64>;
pub type Operator = DMatrix<C64>;

/// Tail mass above which a truncated thermal state is rejected.
pub const THERMAL_TAIL_MAX: f64 = 1e-3;
/// Tail mass above which a truncated thermal state triggers a warning.
pub const THERMAL_TAIL_WARN: f64 = 1e-6;

/// Truncated bosonic Hilbert space spanned by `|0⟩ … |n_max - 1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockSpace {
    n_max: usize,
}

impl FockSpace {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::InvalidParameter(format!(
                "Fock truncation must be at least 2, got {n_max}"
            )));
        }
        Ok(Self { n_max })
    }

    /// Default truncation `max(30, ceil(10 (n_th + 1)))`.
    pub fn auto(n_th: f64) -> Self {
        let guess = (10.0 * (n_th.max(0.0) + 1.0)).ceil() as usize;
        Self { n_max: guess.max(30) }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Dimension of the joint spin ⊗ resonator space.
    pub fn joint_dim(&self) -> usize {
        2 * self.n_max
    }

    /// Same space with `extra` additional levels.
    pub fn enlarged(&self, extra: usize) -> Self {
        Self { n_max: self.n_max + extra }
    }

    pub fn identity(&self) -> Operator {
        Operator::identity(self.n_max, self.n_max)
    }

    pub fn number(&self) -> Operator {
        Operator::from_diagonal(&nalgebra::DVector::from_fn(self.n_max, |n, _| C64::from(n as f64)))
    }

    /// Joint index of `|spin, n⟩`.
    pub fn joint_index(&self, spin: Spin, n: usize) -> usize {
        spin.index() * self.n_max + n
    }
}

/// Evaluates `observable` at `space` and at `space` enlarged by 20 levels and
/// reports whether the two agree within `1e-6`. Returns both values.
pub fn truncation_converged<F>(space: FockSpace, mut observable: F) -> Result<(bool, f64, f64)>
where
    F: FnMut(FockSpace) -> Result<f64>,
{
    let base = observable(space)?;
    let bigger = observable(space.enlarged(20))?;
    Ok(((base - bigger).abs() <= 1e-6, base, bigger))
}

/// Spin basis labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    G,
    E,
}

impl Spin {
    pub fn index(self) -> usize {
        match self {
            Spin::G => 0,
            Spin::E => 1,
        }
    }

    pub fn projector(self) -> Operator {
        let mut p = Operator::zeros(2, 2);
        p[(self.index(), self.index())] = C64::from(1.0);
        p
    }
}

impl std::fmt::Display for Spin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Spin::G => "g",
            Spin::E => "e",
        })
    }
}

/// Annihilation operator with `⟨n-1|a|n⟩ = √n`.
pub fn annihilation(space: FockSpace) -> Operator {
    let n = space.n_max;
    let mut a = Operator::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = C64::from((k as f64).sqrt());
    }
    a
}

/// Spin operators `(σ_z, σ⁺, σ⁻)` in `(g, e)` ordering.
pub fn pauli_operators() -> (Operator, Operator, Operator) {
    let one = C64::from(1.0);
    let mut sz = Operator::zeros(2, 2);
    sz[(0, 0)] = -one;
    sz[(1, 1)] = one;
    let mut sp = Operator::zeros(2, 2);
    sp[(1, 0)] = one;
    let sm = sp.adjoint();
    (sz, sp, sm)
}

/// Kronecker product, first factor outermost.
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    a.kronecker(b)
}

/// Thermal occupation probabilities `p_k = n^k / (1 + n)^(k+1)` over the
/// truncated space, renormalized, together with the discarded tail mass.
pub fn thermal_populations(n_th: f64, space: FockSpace) -> Result<(Vec<f64>, f64)> {
    if !(n_th >= 0.0) || !n_th.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "thermal occupation must be finite and nonnegative, got {n_th}"
        )));
    }
    let ratio = n_th / (1.0 + n_th);
    let mut pops = Vec::with_capacity(space.n_max);
    let mut p = 1.0 / (1.0 + n_th);
    for _ in 0..space.n_max {
        pops.push(p);
        p *= ratio;
    }
    let tail = ratio.powi(space.n_max as i32);
    if tail > THERMAL_TAIL_MAX {
        return Err(Error::TruncationTooSmall { n_max: space.n_max, tail });
    }
    if tail > THERMAL_TAIL_WARN {
        log::warn!(
            "thermal state with n_th = {n_th} loses tail mass {tail:e} at n_max = {}",
            space.n_max
        );
    }
    let total: f64 = pops.iter().sum();
    pops.iter_mut().for_each(|p| *p /= total);
    Ok((pops, tail))
}

/// Resonator thermal density matrix.
pub fn thermal_state(n_th: f64, space: FockSpace) -> Result<Operator> {
    let (pops, _) = thermal_populations(n_th, space)?;
    Ok(Operator::from_diagonal(&nalgebra::DVector::from_iterator(
        space.n_max,
        pops.into_iter().map(C64::from),
    )))
}

/// Traces out the spin of a joint operator.
pub fn partial_trace_spin(rho: &JointState) -> Operator {
    let n = rho.n_max;
    let m = &rho.rho;
    Operator::from_fn(n, n, |i, j| m[(i, j)] + m[(n + i, n + j)])
}

/// Density matrix on spin ⊗ truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    rho: Operator,
    n_max: usize,
}

/// Tolerances for [`JointState`] validation.
pub const STATE_HERMITIAN_TOL: f64 = 1e-10;
pub const STATE_TRACE_TOL: f64 = 1e-10;
pub const STATE_POSITIVITY_TOL: f64 = 1e-9;

impl JointState {
    /// Wraps and validates a joint density matrix.
    pub fn from_density(rho: Operator, space: FockSpace) -> Result<Self> {
        let state = Self::from_density_unchecked(rho, space)?;
        state.validate()?;
        Ok(state)
    }

    pub(crate) fn from_density_unchecked(rho: Operator, space: FockSpace) -> Result<Self> {
        if rho.nrows() != space.joint_dim() || rho.ncols() != space.joint_dim() {
            return Err(Error::DimensionMismatch {
                expected: space.joint_dim(),
                found: rho.nrows(),
            });
        }
        Ok(Self { rho, n_max: space.n_max })
    }

    /// `ρ_spin ⊗ ρ_resonator`.
    pub fn product(spin: &Operator, resonator: &Operator) -> Result<Self> {
        if spin.nrows() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: spin.nrows() });
        }
        let space = FockSpace::new(resonator.nrows())?;
        Self::from_density(tensor(spin, resonator), space)
    }

    /// `|g⟩⟨g| ⊗ ρ_th`.
    pub fn thermal_ground_spin(n_th: f64, space: FockSpace) -> Result<Self> {
        let rho_r = thermal_state(n_th, space)?;
        Self::from_density_unchecked(tensor(&Spin::G.projector(), &rho_r), space)
    }

    /// Pure basis state `|spin, n⟩⟨spin, n|`.
    pub fn basis(spin: Spin, n: usize, space: FockSpace) -> Result<Self> {
        if n >= space.n_max {
            return Err(Error::InvalidParameter(format!(
                "Fock level {n} outside truncation {}",
                space.n_max
            )));
        }
        let k = space.joint_index(spin, n);
        let mut rho = Operator::zeros(space.joint_dim(), space.joint_dim());
        rho[(k, k)] = C64::from(1.0);
        Self::from_density_unchecked(rho, space)
    }

    pub fn rho(&self) -> &Operator {
        &self.rho
    }

    pub fn into_inner(self) -> Operator {
        self.rho
    }

    pub fn space(&self) -> FockSpace {
        FockSpace { n_max: self.n_max }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn trace(&self) -> C64 {
        trace(&self.rho)
    }

    pub fn reduced(&self) -> Operator {
        partial_trace_spin(self)
    }

    /// Population of `|spin, n⟩`.
    pub fn population(&self, spin: Spin, n: usize) -> f64 {
        let k = self.space().joint_index(spin, n);
        self.rho[(k, k)].re
    }

    /// Purity `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.rho.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(hermitian_eigenvalues(&self.rho)?[0])
    }

    /// Checks Hermiticity, unit trace and positivity.
    pub fn validate(&self) -> Result<()> {
        let dev = hermiticity_deviation(&self.rho);
        if dev > STATE_HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {dev:e})")));
        }
        let tr = self.trace();
        if (tr - C64::from(1.0)).norm() > STATE_TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = self.min_eigenvalue()?;
        if min < -STATE_POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub(crate) fn map(self, f: impl FnOnce(Operator) -> Operator) -> Self {
        Self { rho: f(self.rho), n_max: self.n_max }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    fn space(n: usize) -> FockSpace {
        FockSpace::new(n).unwrap()
    }

    #[test]
    fn truncation_below_two_rejected() {
        assert!(FockSpace::new(1).is_err());
        assert!(FockSpace::new(2).is_ok());
    }

    #[test]
    fn auto_truncation_heuristic() {
        assert_eq!(FockSpace::auto(0.0).n_max(), 30);
        assert_eq!(FockSpace::auto(10.0).n_max(), 110);
        assert_eq!(FockSpace::auto(4.05).n_max(), 51);
    }

    #[test]
    fn annihilation_elements() {
        let a = annihilation(space(2));
        assert_eq!(a[(0, 1)], C64::from(1.0));
        assert_eq!(a[(0, 0)] + a[(1, 0)] + a[(1, 1)], C64::from(0.0));

        let a = annihilation(space(3));
        assert!((a[(1, 2)].re - std::f64::consts::SQRT_2).abs() < 1e-14);

        let a = annihilation(space(4));
        let n = a.adjoint() * &a;
        assert!(crate::linalg::max_abs(&(n - space(4).number())) < 1e-14);
    }

    #[test]
    fn pauli_algebra() {
        let (sz, sp, sm) = pauli_operators();
        let g = nalgebra::DVector::from_vec(vec![C64::from(1.0), C64::from(0.0)]);
        let e = nalgebra::DVector::from_vec(vec![C64::from(0.0), C64::from(1.0)]);
        assert_eq!(&sz * &g, -&g);
        assert_eq!(&sp * &g, e);
        assert_eq!(&sp * &e, nalgebra::DVector::zeros(2));
        assert_eq!(&sp * &sm - &sm * &sp, sz);
    }

    #[test]
    fn thermal_examples() {
        let rho = thermal_state(0.0, space(10)).unwrap();
        assert_eq!(rho[(0, 0)], C64::from(1.0));
        assert!((trace(&rho) - C64::from(1.0)).norm() < 1e-15);

        let rho = thermal_state(1.0, space(60)).unwrap();
        for (k, p) in [0.5, 0.25, 0.125].iter().enumerate() {
            assert!((rho[(k, k)].re - p).abs() < 1e-15);
        }

        // direct sum of k p_k; at n_max = 150 the tail mass is (10/11)^150 ~ 6e-7
        let sp = space(150);
        let rho = thermal_state(10.0, sp).unwrap();
        let mean = trace(&(sp.number() * rho)).re;
        assert!((mean - 10.0).abs() < 1e-6 * 10.0f64.max(1.0) * 20.0, "{mean}");
    }

    #[test]
    fn thermal_truncation_errors() {
        assert!(matches!(
            thermal_state(10.0, space(30)),
            Err(Error::TruncationTooSmall { .. })
        ));
        assert!(thermal_state(-1.0, space(30)).is_err());
        assert!(thermal_state(f64::NAN, space(30)).is_err());
    }

    #[test]
    fn thermal_monotone_and_normalized() {
        for &nth in &[0.1, 0.5, 1.0, 3.0, 7.5] {
            let sp = FockSpace::auto(nth);
            let rho = thermal_state(nth, sp).unwrap();
            let d: Vec<f64> = rho.diagonal().iter().map(|z| z.re).collect();
            assert!(d.windows(2).all(|w| w[1] < w[0]));
            assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn tensor_properties() {
        let sp = space(5);
        let i2 = Operator::identity(2, 2);
        assert_eq!(tensor(&i2, &sp.identity()), Operator::identity(10, 10));

        let (sz, _, _) = pauli_operators();
        let a = annihilation(sp);
        let lhs = tensor(&sz, &sp.identity()) * tensor(&i2, &a);
        assert_eq!(lhs, tensor(&sz, &a));
        assert_eq!(tensor(&sz, &a).nrows(), 10);

        let b = annihilation(space(3));
        let assoc_l = tensor(&tensor(&sz, &a), &b);
        let assoc_r = tensor(&sz, &tensor(&a, &b));
        assert_eq!(assoc_l, assoc_r);
    }

    #[test]
    fn partial_trace_examples() {
        let sp = space(4);
        let mut rho_r = Operator::from_diagonal(&nalgebra::DVector::from_vec(
            [0.4, 0.3, 0.2, 0.1].map(C64::from).to_vec(),
        ));
        rho_r[(0, 1)] = C64::new(0.1, 0.05);
        rho_r[(1, 0)] = C64::new(0.1, -0.05);
        let st = JointState::product(&Spin::G.projector(), &rho_r).unwrap();
        assert!(max_abs(&(st.reduced() - &rho_r)) < 1e-15);

        let st = JointState::basis(Spin::E, 0, sp).unwrap();
        let mut vac = Operator::zeros(4, 4);
        vac[(0, 0)] = C64::from(1.0);
        assert_eq!(st.reduced(), vac);

        let mix = (JointState::basis(Spin::G, 0, sp).unwrap().into_inner()
            + JointState::basis(Spin::E, 1, sp).unwrap().into_inner())
            * C64::from(0.5);
        let st = JointState::from_density(mix, sp).unwrap();
        let red = st.reduced();
        assert_eq!(red[(0, 0)].re, 0.5);
        assert_eq!(red[(1, 1)].re, 0.5);
        assert_eq!(red[(2, 2)].re + red[(3, 3)].re, 0.0);
    }

    #[test]
    fn validation_rejects_bad_states() {
        let sp = space(3);
        let mut rho = Operator::zeros(6, 6);
        rho[(0, 0)] = C64::from(0.9);
        assert!(JointState::from_density(rho.clone(), sp).is_err());
        rho[(0, 0)] = C64::from(1.2);
        rho[(1, 1)] = C64::from(-0.2);
        assert!(JointState::from_density(rho, sp).is_err());
        assert!(JointState::from_density(Operator::identity(4, 4), sp).is_err());
    }
}

//! Propagation of joint states: exact unitary evolution under static
//! Hamiltonians, piecewise-constant evolution under driven Hamiltonians,
//! and fixed-step RK4 integration of the Lindblad master equation with
//! thermal resonator dissipators `D_a` and `D_a†`.

use crate::control::ControlPulse;
use crate::error::{Error, Result};
use crate::fock::{annihilation, tensor, FockSpace, JointState, Operator, C64};
use crate::linalg::{hermitian_eig, hermitian_eigenvalues, hermiticity_deviation, max_abs, HermitianEig};
use crate::model::{HamiltonianParts, SystemParams};

/// Negative eigenvalues down to this magnitude are clipped.
pub const CLIP_TOL: f64 = 1e-9;
/// Negative eigenvalues beyond this magnitude abort propagation.
pub const POSITIVITY_TOL: f64 = 1e-7;
/// Largest `h · (E_max − E_min)` accepted by the RK4 integrator.
const RK4_STABILITY: f64 = 2.5;

/// Resonator damping at rate `γ_d` into a bath of occupation `n_th`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub gamma_d: f64,
    pub n_th_bath: f64,
}

impl NoiseParams {
    pub fn new(gamma_d: f64, n_th_bath: f64) -> Result<Self> {
        let p = Self { gamma_d, n_th_bath };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_d >= 0.0 && self.gamma_d.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma_d must be >= 0, got {}", self.gamma_d)));
        }
        if !(self.n_th_bath >= 0.0 && self.n_th_bath.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bath occupation must be >= 0, got {}",
                self.n_th_bath
            )));
        }
        Ok(())
    }

    /// `(Γ_a, Γ_a†) = (γ_d (n_th + 1), γ_d n_th)`.
    pub fn rates(&self) -> (f64, f64) {
        (self.gamma_d * (self.n_th_bath + 1.0), self.gamma_d * self.n_th_bath)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Piecewise-constant exact exponentials.
    EigExpm,
    /// Fourth-order Runge-Kutta on the density matrix.
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConfig {
    /// Step, in units of `1/ω`. Driven Hamiltonians are sampled once per step
    /// at its midpoint.
    pub dt: f64,
    /// Integrator for driven closed-system runs; Lindblad runs always use RK4.
    pub method: Method,
    /// RK4 substeps per pulse sample.
    pub substeps_per_pulse_sample: usize,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self { dt: 0.01, method: Method::EigExpm, substeps_per_pulse_sample: 1 }
    }
}

impl PropagationConfig {
    /// Default step `min(0.01, τ/2000)` for a pulse of duration `tau`.
    pub fn for_pulse(tau: f64) -> Self {
        Self { dt: (0.01f64).min(tau / 2000.0), ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if self.substeps_per_pulse_sample == 0 {
            return Err(Error::InvalidParameter("substeps_per_pulse_sample must be >= 1".into()));
        }
        Ok(())
    }
}

/// Cached spectral decomposition of a static Hamiltonian.
#[derive(Debug, Clone)]
pub struct UnitaryPropagator {
    eig: HermitianEig,
}

impl UnitaryPropagator {
    pub fn new(h: &Operator) -> Result<Self> {
        Ok(Self { eig: hermitian_eig(h)? })
    }

    pub fn unitary(&self, t: f64) -> Operator {
        self.eig.unitary(t)
    }

    /// `U(t) ρ U(t)†` with `U(t) = exp(−iHt)`.
    pub fn evolve(&self, state: &JointState, t: f64) -> Result<JointState> {
        if !(t >= 0.0) {
            return Err(Error::InvalidParameter(format!("evolution time must be >= 0, got {t}")));
        }
        check_dim(state, self.eig.values.len())?;
        if t == 0.0 {
            return Ok(state.clone());
        }
        let u = self.unitary(t);
        Ok(state.clone().map(|rho| conjugate(&u, &rho)))
    }
}

fn check_dim(state: &JointState, dim: usize) -> Result<()> {
    if state.rho().nrows() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: state.rho().nrows() });
    }
    Ok(())
}

/// `U ρ U†` for a precomputed unitary.
pub fn apply_unitary(state: &JointState, u: &Operator) -> Result<JointState> {
    check_dim(state, u.nrows())?;
    Ok(state.clone().map(|rho| conjugate(u, &rho)))
}

/// `U ρ U†`, re-symmetrized.
fn conjugate(u: &Operator, rho: &Operator) -> Operator {
    let out = u * rho * u.adjoint();
    hermitize(out)
}

fn hermitize(m: Operator) -> Operator {
    (&m + m.adjoint()) * C64::from(0.5)
}

/// Exact evolution for time `t` under a static Hamiltonian.
pub fn evolve_unitary(state: &JointState, h: &Operator, t: f64) -> Result<JointState> {
    UnitaryPropagator::new(h)?.evolve(state, t)
}

/// Time-ordered propagator `T exp(−i ∫ H(t) dt)` over `[0, τ]` as a product
/// of exact exponentials of the Hamiltonian sampled at step midpoints.
pub fn driven_propagator(
    params: &SystemParams,
    pulse: &ControlPulse,
    space: FockSpace,
    config: &PropagationConfig,
) -> Result<Operator> {
    config.validate()?;
    pulse.check_positive(config.dt)?;
    let parts = HamiltonianParts::new(params, space)?;
    let (h, times) = pulse.midpoints(config.dt);
    let mut total = Operator::identity(space.joint_dim(), space.joint_dim());
    for t in times {
        let step = hermitian_eig(&parts.at(params.omega * pulse.eval_unchecked(t)))?.unitary(h);
        total = step * total;
    }
    Ok(total)
}

/// Closed-system evolution over the full pulse.
pub fn evolve_unitary_td(
    state: &JointState,
    params: &SystemParams,
    pulse: &ControlPulse,
    config: &PropagationConfig,
) -> Result<JointState> {
    match config.method {
        Method::EigExpm => {
            let u = driven_propagator(params, pulse, state.space(), config)?;
            Ok(state.clone().map(|rho| conjugate(&u, &rho)))
        }
        Method::Rk4 => evolve_lindblad(
            state,
            Generator::Driven { params, pulse },
            &NoiseParams { gamma_d: 0.0, n_th_bath: 0.0 },
            pulse.tau(),
            config,
        ),
    }
}

/// Source of the coherent part of the master equation.
#[derive(Debug, Clone, Copy)]
pub enum Generator<'a> {
    Static(&'a Operator),
    Driven { params: &'a SystemParams, pulse: &'a ControlPulse },
}

/// Nonzero entries of a dense operator.
#[derive(Debug, Clone)]
struct Sparse {
    entries: Vec<(usize, usize, C64)>,
}

impl Sparse {
    fn from_dense(m: &Operator) -> Self {
        let mut entries = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let v = m[(i, j)];
                if v != C64::from(0.0) {
                    entries.push((i, j, v));
                }
            }
        }
        Self { entries }
    }

    /// `out += scale · S X`.
    fn mul_add(&self, x: &Operator, scale: C64, out: &mut Operator) {
        let n = x.nrows();
        let xs = x.as_slice();
        let os = out.as_mut_slice();
        for col in 0..x.ncols() {
            let base = col * n;
            for &(r, c, v) in &self.entries {
                os[base + r] += scale * v * xs[base + c];
            }
        }
    }
}

/// Right-hand side `L(ρ) = −i(H_eff ρ − ρ H_eff†) + Σ Γ_k A_k ρ A_k†` with
/// `H_eff = H − (i/2) Σ Γ_k A_k† A_k`.
struct Liouvillian {
    heff: Sparse,
    spin_half: Vec<f64>,
    jumps: Vec<(f64, Sparse)>,
    span_bound: f64,
}

impl Liouvillian {
    fn new(h_rest: &Operator, spin_half: Option<&Operator>, noise: &NoiseParams, space: FockSpace) -> Self {
        let (g_down, g_up) = noise.rates();
        let a = tensor(&Operator::identity(2, 2), &annihilation(space));
        let ad = a.adjoint();
        let mut heff = h_rest.clone();
        let mut jumps = Vec::new();
        let mut decay = 0.0;
        for (rate, op) in [(g_down, &a), (g_up, &ad)] {
            if rate > 0.0 {
                heff -= op.adjoint() * op * C64::new(0.0, 0.5 * rate);
                decay += rate * space.n_max() as f64;
                jumps.push((rate, Sparse::from_dense(op)));
            }
        }
        let diag: Vec<f64> = spin_half
            .map(|s| s.diagonal().iter().map(|z| z.re).collect())
            .unwrap_or_else(|| vec![0.0; h_rest.nrows()]);
        Self { heff: Sparse::from_dense(&heff), spin_half: diag, jumps, span_bound: decay + gershgorin_span(h_rest) }
    }

    fn apply(&self, rho: &Operator, omega_a: f64, out: &mut Operator) {
        let n = rho.nrows();
        let mut x = Operator::zeros(n, n);
        self.heff.mul_add(rho, C64::new(0.0, -1.0), &mut x);
        if omega_a != 0.0 {
            for j in 0..n {
                for i in 0..n {
                    x[(i, j)] += C64::new(0.0, -omega_a * self.spin_half[i]) * rho[(i, j)];
                }
            }
        }
        out.copy_from(&x);
        *out += x.adjoint();
        for (rate, op) in &self.jumps {
            let mut y = Operator::zeros(n, n);
            op.mul_add(rho, C64::from(1.0), &mut y);
            let y_dag = y.adjoint();
            let mut w = Operator::zeros(n, n);
            op.mul_add(&y_dag, C64::from(*rate), &mut w);
            *out += w.adjoint();
        }
    }

    fn rk4_step(&self, rho: &Operator, h: f64, omega_a: f64) -> Operator {
        let n = rho.nrows();
        let mut k1 = Operator::zeros(n, n);
        let mut k2 = Operator::zeros(n, n);
        let mut k3 = Operator::zeros(n, n);
        let mut k4 = Operator::zeros(n, n);
        let half = C64::from(0.5 * h);
        self.apply(rho, omega_a, &mut k1);
        self.apply(&(rho + &k1 * half), omega_a, &mut k2);
        self.apply(&(rho + &k2 * half), omega_a, &mut k3);
        self.apply(&(rho + &k3 * C64::from(h)), omega_a, &mut k4);
        let sixth = C64::from(h / 6.0);
        rho + (k1 + (k2 + k3) * C64::from(2.0) + k4) * sixth
    }
}

/// Upper bound on `E_max − E_min` from Gershgorin discs.
fn gershgorin_span(h: &Operator) -> f64 {
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for i in 0..h.nrows() {
        let radius: f64 = (0..h.ncols()).filter(|&j| j != i).map(|j| h[(i, j)].norm()).sum();
        hi = hi.max(h[(i, i)].re + radius);
        lo = lo.min(h[(i, i)].re - radius);
    }
    (hi - lo).max(0.0)
}

fn check_rk4_step(h: f64, omega_max: f64, span: f64) -> Result<()> {
    if h > 0.1 / omega_max.max(1.0) * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge {
            dt: h,
            reason: format!("RK4 requires dt <= 0.1/max(omega, omega_A) = {}", 0.1 / omega_max.max(1.0)),
        });
    }
    if h * span > RK4_STABILITY {
        return Err(Error::StepTooLarge {
            dt: h,
            reason: format!(
                "spectral span {span:.1} of the generator needs dt <= {:.4}",
                RK4_STABILITY / span
            ),
        });
    }
    Ok(())
}

/// Integrates the master equation for `t_final` (static generator) or over
/// `[0, t_final]` of the pulse (driven generator, `t_final ≤ τ`).
pub fn evolve_lindblad(
    state: &JointState,
    generator: Generator<'_>,
    noise: &NoiseParams,
    t_final: f64,
    config: &PropagationConfig,
) -> Result<JointState> {
    noise.validate()?;
    config.validate()?;
    if !(t_final >= 0.0) {
        return Err(Error::InvalidParameter(format!("evolution time must be >= 0, got {t_final}")));
    }
    let space = state.space();
    let rho = match generator {
        Generator::Static(h) => {
            check_dim(state, h.nrows())?;
            let dev = hermiticity_deviation(h);
            if dev > crate::linalg::HERMITIAN_TOL * max_abs(h).max(1.0) {
                return Err(Error::NonHermitian { deviation: dev });
            }
            if t_final == 0.0 {
                return Ok(state.clone());
            }
            let liou = Liouvillian::new(h, None, noise, space);
            let steps = (t_final / config.dt).ceil().max(1.0) as usize;
            let step = t_final / steps as f64;
            check_rk4_step(step, 1.0, liou.span_bound)?;
            let mut rho = state.rho().clone();
            for _ in 0..steps {
                rho = liou.rk4_step(&rho, step, 0.0);
            }
            rho
        }
        Generator::Driven { params, pulse } => {
            if t_final > pulse.tau() * (1.0 + 1e-12) {
                return Err(Error::TimeOutOfRange { t: t_final, tau: pulse.tau() });
            }
            pulse.check_positive(config.dt)?;
            let parts = HamiltonianParts::new(params, space)?;
            let liou = Liouvillian::new(&parts.rest, Some(&parts.spin_half), noise, space);
            let (h, times) = pulse.midpoints(config.dt);
            let sub = config.substeps_per_pulse_sample;
            let step = h / sub as f64;
            let omega_max = params.omega.max(params.omega * pulse.max_value(config.dt));
            let span = liou.span_bound + omega_max;
            check_rk4_step(step, omega_max, span)?;
            let mut rho = state.rho().clone();
            for t in times {
                if t - 0.5 * h >= t_final - 1e-12 * pulse.tau() {
                    break;
                }
                let omega_a = params.omega * pulse.eval_unchecked(t);
                // a partial step when t_final falls inside this sample
                let remaining = (t_final - (t - 0.5 * h)).min(h);
                let this_step = remaining / sub as f64;
                for _ in 0..sub {
                    rho = liou.rk4_step(&rho, this_step, omega_a);
                }
            }
            rho
        }
    };
    let rho = hermitize(rho);
    let out = JointState::from_density_unchecked(rho, space)?;
    enforce_positivity(out)
}

/// Clips negative eigenvalues no larger than [`CLIP_TOL`], accepts those up
/// to [`POSITIVITY_TOL`] unchanged and rejects anything beyond.
pub fn enforce_positivity(state: JointState) -> Result<JointState> {
    let min = hermitian_eigenvalues(state.rho())?[0];
    if min >= 0.0 {
        return Ok(state);
    }
    if min < -POSITIVITY_TOL {
        return Err(Error::PositivityViolation { min_eig: min });
    }
    if min < -CLIP_TOL {
        log::debug!("leaving negative eigenvalue {min:e} unclipped");
        return Ok(state);
    }
    let eig = hermitian_eig(state.rho())?;
    let space = state.space();
    let mut clipped = eig.clone();
    clipped.values.iter_mut().for_each(|v| *v = v.max(0.0));
    let total: f64 = clipped.values.iter().sum();
    clipped.values.iter_mut().for_each(|v| *v /= total);
    JointState::from_density_unchecked(hermitize(clipped.reconstruct()), space)
}

//! Time evolution on a uniform output grid.
//!
//! Pure states are propagated substep by substep with the fourth-order
//! Magnus unitary built from the Hamiltonian at the two Gauss points.
//! Density matrices are integrated with fixed-step RK4 on the Lindblad
//! equation over the same substeps, the Hamiltonian sampled at each
//! substep midpoint.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, ComplexMatrix, ComplexVector, EigenSystem, C64};
use crate::model::{build_h_frame, Basis, SystemConfig};

/// Substeps per period of the fastest frequency for the default step.
pub const STEPS_PER_PERIOD: f64 = 200.0;

/// Tolerance on the initial density matrix (Hermiticity, trace, positivity).
pub const RHO_TOL: f64 = 1e-10;

/// Trace drift beyond which a Lindblad run is rejected.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;

/// `(1/200)·2π/ω_fast`, or `None` when nothing moves.
pub fn default_dt_max(omega_fast: f64) -> Option<f64> {
    (omega_fast > 0.0).then(|| 2.0 * PI / (STEPS_PER_PERIOD * omega_fast))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_points: usize,
    /// Longest piecewise-constant substep.
    pub dt_max: f64,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_points: usize, dt_max: f64) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::InvalidParameter(format!(
                "time grid needs at least 2 points, got {n_points}"
            )));
        }
        if !(t_start.is_finite() && t_end.is_finite() && t_end > t_start) {
            return Err(Error::InvalidParameter(format!(
                "time grid needs t_start < t_end, got [{t_start}, {t_end}]"
            )));
        }
        if !(dt_max.is_finite() && dt_max > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt_max must be > 0, got {dt_max}"
            )));
        }
        Ok(Self {
            t_start,
            t_end,
            n_points,
            dt_max,
        })
    }

    /// Grid whose `dt_max` follows [`default_dt_max`] for the Hamiltonian's
    /// fastest scale over the interval.
    pub fn for_hamiltonian(h: &dyn Hamiltonian, t_start: f64, t_end: f64, n_points: usize) -> Result<Self> {
        let omega = fastest_frequency(h, t_start, t_end)?;
        let dt = default_dt_max(omega).unwrap_or(t_end - t_start);
        Self::new(t_start, t_end, n_points, dt)
    }

    pub fn with_dt_max(mut self, dt_max: f64) -> Result<Self> {
        self.dt_max = dt_max;
        Self::new(self.t_start, self.t_end, self.n_points, self.dt_max)
    }

    pub fn spacing(&self) -> f64 {
        (self.t_end - self.t_start) / (self.n_points - 1) as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k + 1 == self.n_points {
            self.t_end
        } else {
            self.t_start + k as f64 * self.spacing()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.time(k)).collect()
    }
}

/// A possibly time-dependent Hamiltonian.
pub trait Hamiltonian: Sync {
    fn dim(&self) -> usize;

    fn at(&self, t: f64) -> Result<ComplexMatrix>;

    fn is_static(&self) -> bool {
        false
    }

    /// Times where the Hamiltonian jumps or kinks; substeps never straddle them.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl Hamiltonian for ComplexMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn at(&self, _t: f64) -> Result<ComplexMatrix> {
        Ok(self.clone())
    }

    fn is_static(&self) -> bool {
        true
    }
}

/// Closure-backed Hamiltonian.
pub struct FnHamiltonian<F> {
    dim: usize,
    f: F,
    breakpoints: Vec<f64>,
}

impl<F> FnHamiltonian<F>
where
    F: Fn(f64) -> Result<ComplexMatrix> + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self {
            dim,
            f,
            breakpoints: Vec::new(),
        }
    }

    pub fn with_breakpoints(mut self, breakpoints: Vec<f64>) -> Self {
        self.breakpoints = breakpoints;
        self
    }
}

impl<F> Hamiltonian for FnHamiltonian<F>
where
    F: Fn(f64) -> Result<ComplexMatrix> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn at(&self, t: f64) -> Result<ComplexMatrix> {
        (self.f)(t)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.breakpoints.clone()
    }
}

/// RWA Hamiltonian of a configuration in the frame rotating at `omega_ref`,
/// following its schedule.
pub struct ConfigHamiltonian<'a> {
    pub cfg: &'a SystemConfig,
    pub omega_ref: f64,
}

impl<'a> ConfigHamiltonian<'a> {
    pub fn new(cfg: &'a SystemConfig, omega_ref: f64) -> Self {
        Self { cfg, omega_ref }
    }
}

impl Hamiltonian for ConfigHamiltonian<'_> {
    fn dim(&self) -> usize {
        self.cfg.dim()
    }

    fn at(&self, t: f64) -> Result<ComplexMatrix> {
        build_h_frame(self.cfg, t, self.omega_ref)
    }

    fn is_static(&self) -> bool {
        self.cfg.is_static()
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.cfg
            .schedule
            .as_ref()
            .map(|s| s.breakpoints())
            .unwrap_or_default()
    }
}

/// Largest |eigenvalue| over the start, end, breakpoints and midpoints of
/// the interval.
pub fn fastest_frequency(h: &dyn Hamiltonian, t_start: f64, t_end: f64) -> Result<f64> {
    let mut samples = vec![t_start];
    if !h.is_static() {
        let mut edges = vec![t_start];
        edges.extend(h.breakpoints().into_iter().filter(|&b| b > t_start && b < t_end));
        edges.push(t_end);
        for w in edges.windows(2) {
            samples.push(0.5 * (w[0] + w[1]));
            samples.push(w[1]);
        }
    }
    let mut omega = 0.0_f64;
    for t in samples {
        let e = eig_hermitian(&h.at(t)?)?;
        for v in e.values {
            omega = omega.max(v.abs());
        }
    }
    Ok(omega)
}

/// Substeps `(t_mid, dt)` covering `[a, b]`, split at breakpoints and no
/// longer than `dt_max`.
fn substeps(a: f64, b: f64, breakpoints: &[f64], dt_max: f64) -> Vec<(f64, f64)> {
    let mut edges = vec![a];
    edges.extend(breakpoints.iter().copied().filter(|&p| p > a && p < b));
    edges.push(b);
    let mut out = Vec::new();
    for w in edges.windows(2) {
        let len = w[1] - w[0];
        if len <= 0.0 {
            continue;
        }
        let n = (len / dt_max).ceil().max(1.0) as usize;
        let dt = len / n as f64;
        for k in 0..n {
            out.push((w[0] + (k as f64 + 0.5) * dt, dt));
        }
    }
    out
}

/// Borrowed state at one grid point.
#[derive(Debug, Clone, Copy)]
pub enum StateRef<'a> {
    Pure(&'a ComplexVector),
    Mixed(&'a ComplexMatrix),
}

impl StateRef<'_> {
    pub fn dim(&self) -> usize {
        match self {
            StateRef::Pure(v) => v.dim(),
            StateRef::Mixed(r) => r.rows(),
        }
    }

    /// `|⟨t|ψ⟩|²` or `⟨t|ρ|t⟩`.
    pub fn overlap(&self, target: &ComplexVector) -> Result<f64> {
        if target.dim() != self.dim() {
            return Err(Error::Dimension(format!(
                "target of dim {} against state of dim {}",
                target.dim(),
                self.dim()
            )));
        }
        match self {
            StateRef::Pure(v) => Ok(target.inner(v)?.norm_sqr()),
            StateRef::Mixed(r) => Ok(target.inner(&r.apply(target)?)?.re),
        }
    }

    /// Norm for pure states, trace for density matrices.
    pub fn weight(&self) -> f64 {
        match self {
            StateRef::Pure(v) => v.norm(),
            StateRef::Mixed(r) => r.trace().re,
        }
    }

    /// Diagonal of the state in the computational basis.
    pub fn populations(&self) -> Vec<f64> {
        match self {
            StateRef::Pure(v) => v.as_slice().iter().map(|z| z.norm_sqr()).collect(),
            StateRef::Mixed(r) => (0..r.rows()).map(|i| r[(i, i)].re).collect(),
        }
    }
}

/// `⟨ψ|O|ψ⟩` or `Tr(ρO)` for Hermitian `O`.
pub fn expectation(state: StateRef<'_>, op: &ComplexMatrix) -> Result<f64> {
    if op.rows() != state.dim() || op.cols() != state.dim() {
        return Err(Error::Dimension(format!(
            "{}x{} operator on state of dim {}",
            op.rows(),
            op.cols(),
            state.dim()
        )));
    }
    op.check_hermitian()?;
    let z = match state {
        StateRef::Pure(v) => v.inner(&op.apply(v)?)?,
        StateRef::Mixed(r) => (r * op).trace(),
    };
    if z.im.abs() > 1e-10 {
        return Err(Error::Numerical(format!(
            "expectation has imaginary part {:e}",
            z.im
        )));
    }
    Ok(z.re)
}

#[derive(Debug, Clone, PartialEq)]
pub enum States {
    Pure(Vec<ComplexVector>),
    Mixed(Vec<ComplexMatrix>),
}

/// Derived observables at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub t: f64,
    /// Norm (pure) or trace (mixed).
    pub norm: f64,
    /// Excitation populations of (C, M, NVE).
    pub populations: Option<[f64; 3]>,
    pub fidelity: Option<f64>,
}

/// One state per output time, plus derived records.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: States,
    pub records: Vec<Record>,
}

impl Trajectory {
    /// Wraps externally computed pure states, one per time.
    pub fn from_pure_states(times: &[f64], states: Vec<ComplexVector>) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::Dimension(format!(
                "{} times for {} states",
                times.len(),
                states.len()
            )));
        }
        Ok(Self::from_pure(times, states))
    }

    fn from_pure(times: &[f64], states: Vec<ComplexVector>) -> Self {
        let records = times
            .iter()
            .zip(&states)
            .map(|(&t, s)| Record {
                t,
                norm: s.norm(),
                populations: None,
                fidelity: None,
            })
            .collect();
        Self {
            states: States::Pure(states),
            records,
        }
    }

    fn from_mixed(times: &[f64], states: Vec<ComplexMatrix>) -> Self {
        let records = times
            .iter()
            .zip(&states)
            .map(|(&t, s)| Record {
                t,
                norm: s.trace().re,
                populations: None,
                fidelity: None,
            })
            .collect();
        Self {
            states: States::Mixed(states),
            records,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn state(&self, k: usize) -> StateRef<'_> {
        match &self.states {
            States::Pure(v) => StateRef::Pure(&v[k]),
            States::Mixed(v) => StateRef::Mixed(&v[k]),
        }
    }

    pub fn last_state(&self) -> StateRef<'_> {
        self.state(self.len() - 1)
    }

    /// Fills the fidelity column against `target`, clamped at 0 from below.
    pub fn with_fidelity(mut self, target: &ComplexVector) -> Result<Self> {
        for k in 0..self.len() {
            let f = self.state(k).overlap(target)?.max(0.0);
            self.records[k].fidelity = Some(f);
        }
        Ok(self)
    }

    /// Fills the (C, M, NVE) excitation populations.
    pub fn with_populations(mut self, basis: &Basis) -> Result<Self> {
        if basis.dim() != self.state(0).dim() {
            return Err(Error::Dimension(format!(
                "basis of dim {} for states of dim {}",
                basis.dim(),
                self.state(0).dim()
            )));
        }
        for k in 0..self.len() {
            let diag = self.state(k).populations();
            let mut pops = [0.0; 3];
            for (i, p) in diag.iter().enumerate() {
                let (c, m, n) = basis.decompose(i);
                pops[0] += c as f64 * p;
                pops[1] += m as f64 * p;
                pops[2] += n as f64 * p;
            }
            self.records[k].populations = Some(pops);
        }
        Ok(self)
    }

    pub fn fidelities(&self) -> Option<Vec<f64>> {
        self.records.iter().map(|r| r.fidelity).collect()
    }

    /// (t, F) of the first maximum of the fidelity column.
    pub fn peak(&self) -> Option<(f64, f64)> {
        let mut best: Option<(f64, f64)> = None;
        for r in &self.records {
            let f = r.fidelity?;
            if best.is_none_or(|(_, b)| f > b) {
                best = Some((r.t, f));
            }
        }
        best
    }

    /// Appends `next`, dropping its first point when it repeats our last time.
    pub fn concat(mut self, next: Trajectory) -> Result<Self> {
        let skip = match (self.records.last(), next.records.first()) {
            (Some(a), Some(b)) if a.t == b.t => 1,
            _ => 0,
        };
        match (&mut self.states, next.states) {
            (States::Pure(a), States::Pure(b)) => a.extend(b.into_iter().skip(skip)),
            (States::Mixed(a), States::Mixed(b)) => a.extend(b.into_iter().skip(skip)),
            _ => {
                return Err(Error::InvalidState(
                    "cannot join pure and mixed trajectories".into(),
                ))
            }
        }
        self.records.extend(next.records.into_iter().skip(skip));
        Ok(self)
    }
}

/// Exact evolution `ψ(t) = e^{−iH(t−t₀)}ψ₀` under a static Hamiltonian,
/// evaluable at any time after one diagonalisation.
#[derive(Debug, Clone)]
pub struct StaticPropagator {
    eig: EigenSystem,
    coeffs: Vec<C64>,
    t0: f64,
}

impl StaticPropagator {
    pub fn new(h: &ComplexMatrix, psi0: &ComplexVector, t0: f64) -> Result<Self> {
        if h.rows() != psi0.dim() {
            return Err(Error::Dimension(format!(
                "Hamiltonian of dim {} for state of dim {}",
                h.rows(),
                psi0.dim()
            )));
        }
        let eig = eig_hermitian(h)?;
        let coeffs = eig.vectors.dagger().apply(psi0)?.as_slice().to_vec();
        Ok(Self { eig, coeffs, t0 })
    }

    pub fn state(&self, t: f64) -> ComplexVector {
        let dt = t - self.t0;
        let v = &self.eig.vectors;
        let n = self.coeffs.len();
        let rotated: Vec<C64> = self
            .coeffs
            .iter()
            .zip(&self.eig.values)
            .map(|(c, &l)| c * C64::new(0.0, -l * dt).exp())
            .collect();
        let mut out = ComplexVector::zeros(n);
        for i in 0..n {
            out[i] = (0..n).map(|k| v[(i, k)] * rotated[k]).sum();
        }
        out
    }

    pub fn start_time(&self) -> f64 {
        self.t0
    }

    /// The overlap amplitude `⟨target|ψ(t)⟩` as a sum over eigenmodes.
    pub fn overlap(&self, target: &ComplexVector) -> Result<StaticOverlap> {
        if target.dim() != self.coeffs.len() {
            return Err(Error::Dimension(format!(
                "target of dim {} for state of dim {}",
                target.dim(),
                self.coeffs.len()
            )));
        }
        let proj = self.eig.vectors.dagger().apply(target)?;
        let weights = proj
            .as_slice()
            .iter()
            .zip(&self.coeffs)
            .map(|(p, c)| p.conj() * c)
            .collect();
        Ok(StaticOverlap {
            weights,
            values: self.eig.values.clone(),
            t0: self.t0,
        })
    }
}

/// `a(t) = Σ_k w_k exp(−iλ_k (t − t₀))`, the target overlap of a static evolution.
#[derive(Debug, Clone)]
pub struct StaticOverlap {
    weights: Vec<C64>,
    values: Vec<f64>,
    t0: f64,
}

impl StaticOverlap {
    fn amplitude_and_rate(&self, t: f64) -> (C64, C64) {
        let dt = t - self.t0;
        self.weights.iter().zip(&self.values).fold(
            (C64::new(0.0, 0.0), C64::new(0.0, 0.0)),
            |(a, da), (w, &l)| {
                let term = w * C64::new(0.0, -l * dt).exp();
                (a + term, da + term * C64::new(0.0, -l))
            },
        )
    }

    /// `|a(t)|²`.
    pub fn fidelity(&self, t: f64) -> f64 {
        self.amplitude_and_rate(t).0.norm_sqr()
    }

    /// `d|a|²/dt = 2 Re(a* da/dt)`.
    pub fn slope(&self, t: f64) -> f64 {
        let (a, da) = self.amplitude_and_rate(t);
        2.0 * (a.conj() * da).re
    }
}

fn check_dims(h: &dyn Hamiltonian, dim: usize) -> Result<()> {
    if h.dim() != dim {
        return Err(Error::Dimension(format!(
            "Hamiltonian of dim {} for state of dim {dim}",
            h.dim()
        )));
    }
    Ok(())
}

/// Solves `i dψ/dt = H(t)ψ` from `psi0` at `grid.t_start`.
///
/// A static Hamiltonian is diagonalised once and every output point is an
/// exact propagation from the start. Otherwise each substep applies
/// `exp(−i dt H̄)` with `H̄ = (H₁ + H₂)/2 − i(√3/12) dt [H₂, H₁]`, `H₁, H₂`
/// taken at the Gauss points `t_mid ∓ (√3/6) dt`.
pub fn evolve_pure(h: &dyn Hamiltonian, psi0: &ComplexVector, grid: &TimeGrid) -> Result<Trajectory> {
    psi0.check_normalized()?;
    check_dims(h, psi0.dim())?;
    let times = grid.times();
    let mut states = Vec::with_capacity(times.len());
    if h.is_static() {
        let prop = StaticPropagator::new(&h.at(grid.t_start)?, psi0, grid.t_start)?;
        for &t in &times {
            states.push(prop.state(t));
        }
    } else {
        let breakpoints = h.breakpoints();
        let mut psi = psi0.clone();
        states.push(psi.clone());
        for w in times.windows(2) {
            for (t_mid, dt) in substeps(w[0], w[1], &breakpoints, grid.dt_max) {
                let u = eig_hermitian(&magnus4(h, t_mid, dt)?)?.propagator(dt);
                psi = u.apply(&psi)?;
            }
            states.push(psi.clone());
        }
    }
    Ok(Trajectory::from_pure(&times, states))
}

fn magnus4(h: &dyn Hamiltonian, t_mid: f64, dt: f64) -> Result<ComplexMatrix> {
    let off = 3f64.sqrt() / 6.0 * dt;
    let h1 = h.at(t_mid - off)?;
    let h2 = h.at(t_mid + off)?;
    h1.check_hermitian()?;
    h2.check_hermitian()?;
    let corr = h2.commutator(&h1)?.scale(C64::new(0.0, -3f64.sqrt() / 12.0 * dt));
    let h_bar = &(&h1 + &h2).scale_real(0.5) + &corr;
    Ok((&h_bar + &h_bar.dagger()).scale_real(0.5))
}

fn check_density(rho: &ComplexMatrix, dim: usize) -> Result<()> {
    if rho.rows() != dim || rho.cols() != dim {
        return Err(Error::Dimension(format!(
            "{}x{} density matrix for dimension {dim}",
            rho.rows(),
            rho.cols()
        )));
    }
    let asym = rho.hermiticity_error();
    if asym > RHO_TOL {
        return Err(Error::InvalidState(format!(
            "density matrix not Hermitian (max asymmetry {asym:e})"
        )));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > RHO_TOL || tr.im.abs() > RHO_TOL {
        return Err(Error::InvalidState(format!("density matrix trace {tr} != 1")));
    }
    let sym = (rho + &rho.dagger()).scale_real(0.5);
    let min = eig_hermitian(&sym)?.values.first().copied().unwrap_or(0.0);
    if min < -RHO_TOL {
        return Err(Error::InvalidState(format!(
            "density matrix has negative eigenvalue {min:e}"
        )));
    }
    Ok(())
}

/// Lindblad generator with the non-Hermitian part folded into
/// `K = H − (i/2)Σ L†L`: `ρ̇ = −i(Kρ − ρK†) + Σ LρL†`.
struct Generator<'a> {
    k: ComplexMatrix,
    k_dag: ComplexMatrix,
    jumps: &'a [(ComplexMatrix, ComplexMatrix)],
}

impl<'a> Generator<'a> {
    fn new(h: &ComplexMatrix, decay: &ComplexMatrix, jumps: &'a [(ComplexMatrix, ComplexMatrix)]) -> Self {
        let k = h - &decay.scale(C64::new(0.0, 0.5));
        let k_dag = k.dagger();
        Self { k, k_dag, jumps }
    }

    fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = (&(&self.k * rho) - &(rho * &self.k_dag)).scale(C64::new(0.0, -1.0));
        for (l, l_dag) in self.jumps {
            out = &out + &(&(l * rho) * l_dag);
        }
        out
    }

    fn rk4(&self, rho: &ComplexMatrix, dt: f64) -> ComplexMatrix {
        let k1 = self.apply(rho);
        let k2 = self.apply(&(rho + &k1.scale_real(0.5 * dt)));
        let k3 = self.apply(&(rho + &k2.scale_real(0.5 * dt)));
        let k4 = self.apply(&(rho + &k3.scale_real(dt)));
        let incr = &(&k1 + &k2.scale_real(2.0)) + &(&k3.scale_real(2.0) + &k4);
        rho + &incr.scale_real(dt / 6.0)
    }
}

/// Integrates `ρ̇ = −i[H,ρ] + Σ_j (L_j ρ L_j† − ½{L_j†L_j, ρ})` from `rho0`.
///
/// `ρ` is re-symmetrised after every step; a run whose trace drifts by more
/// than [`TRACE_DRIFT_LIMIT`] is rejected.
pub fn evolve_lindblad(
    h: &dyn Hamiltonian,
    collapse: &[ComplexMatrix],
    rho0: &ComplexMatrix,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    let dim = rho0.rows();
    check_dims(h, dim)?;
    check_density(rho0, dim)?;
    let mut decay = ComplexMatrix::zeros(dim, dim);
    let mut jumps = Vec::with_capacity(collapse.len());
    for l in collapse {
        if l.rows() != dim || l.cols() != dim {
            return Err(Error::Dimension(format!(
                "{}x{} collapse operator for dimension {dim}",
                l.rows(),
                l.cols()
            )));
        }
        let l_dag = l.dagger();
        decay = &decay + &(&l_dag * l);
        jumps.push((l.clone(), l_dag));
    }

    let times = grid.times();
    let breakpoints = h.breakpoints();
    let static_gen = if h.is_static() {
        let h0 = h.at(grid.t_start)?;
        h0.check_hermitian()?;
        Some(Generator::new(&h0, &decay, &jumps))
    } else {
        None
    };
    let mut rho = rho0.clone();
    let mut states = Vec::with_capacity(times.len());
    states.push(rho.clone());
    for w in times.windows(2) {
        for (t_mid, dt) in substeps(w[0], w[1], &breakpoints, grid.dt_max) {
            let next = match &static_gen {
                Some(g) => g.rk4(&rho, dt),
                None => {
                    let ht = h.at(t_mid)?;
                    ht.check_hermitian()?;
                    Generator::new(&ht, &decay, &jumps).rk4(&rho, dt)
                }
            };
            rho = (&next + &next.dagger()).scale_real(0.5);
        }
        if !rho.is_finite() {
            return Err(Error::Numerical("density matrix became non-finite".into()));
        }
        if rho.max_abs() > 1.0 + TRACE_DRIFT_LIMIT {
            return Err(Error::Numerical(format!(
                "integration unstable at t = {}; reduce dt_max (currently {})",
                w[1], grid.dt_max
            )));
        }
        let drift = (rho.trace().re - 1.0).abs();
        if drift > TRACE_DRIFT_LIMIT {
            return Err(Error::Numerical(format!(
                "trace drifted by {drift:e} at t = {}; reduce dt_max (currently {})",
                w[1], grid.dt_max
            )));
        }
        states.push(rho.clone());
    }
    Ok(Trajectory::from_mixed(&times, states))
}

/// Pure-state density matrix `|ψ⟩⟨ψ|`, normalisation checked.
pub fn density_from_pure(psi: &ComplexVector) -> Result<ComplexMatrix> {
    psi.check_normalized()?;
    Ok(psi.projector())
}

/// Norm deviation used by the trajectory invariants.
pub fn max_norm_error(traj: &Trajectory) -> f64 {
    traj.records
        .iter()
        .map(|r| (r.norm - 1.0).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::resonant_transfer_time;
    use crate::linalg::pauli;
    use crate::linalg::unitary_from_hamiltonian;
    use crate::model::{build_h_resonant, RampShape, Schedule};

    fn grid(t_end: f64, n: usize) -> TimeGrid {
        TimeGrid::new(0.0, t_end, n, 1e-3).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(0.0, 1.0, 1, 0.1).is_err());
        assert!(TimeGrid::new(1.0, 1.0, 5, 0.1).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 5, 0.0).is_err());
        let g = TimeGrid::new(0.0, 1.0, 5, 0.1).unwrap();
        assert_eq!(g.times(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn time_dependent_stepper_is_fourth_order() {
        let h = FnHamiltonian::new(2, |t: f64| {
            Ok(&pauli::sigma_z().scale_real(0.5 * (3.0 * t - 2.0)) + &pauli::sigma_x().scale_real(0.7))
        });
        let psi0 = ComplexVector::basis(2, 0);
        let end = |dt: f64| {
            let g = TimeGrid::new(0.0, 2.0, 2, dt).unwrap();
            match evolve_pure(&h, &psi0, &g).unwrap().last_state() {
                StateRef::Pure(v) => v.clone(),
                StateRef::Mixed(_) => unreachable!(),
            }
        };
        let exact = end(1e-4);
        let e1 = end(0.1).max_abs_diff(&exact);
        let e2 = end(0.05).max_abs_diff(&exact);
        assert!(e1 / e2 > 14.0 && e1 / e2 < 18.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn substeps_respect_breakpoints() {
        let s = substeps(0.0, 1.0, &[0.3], 0.2);
        let total: f64 = s.iter().map(|&(_, dt)| dt).sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert!(
            s.iter()
                .all(|&(m, dt)| dt <= 0.2 + 1e-15
                    && !(m - dt / 2.0 < 0.3 - 1e-12 && m + dt / 2.0 > 0.3 + 1e-12))
        );
    }

    #[test]
    fn zero_hamiltonian_is_stationary() {
        let h = ComplexMatrix::zeros(8, 8);
        let psi = Basis::new(2).ket(1, 0, 0);
        let tr = evolve_pure(&h, &psi, &grid(3.0, 7)).unwrap();
        for k in 0..tr.len() {
            match tr.state(k) {
                StateRef::Pure(v) => assert_eq!(v.max_abs_diff(&psi), 0.0),
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn resonant_transfer_completes() {
        let basis = Basis::new(2);
        let h = build_h_resonant(1.0, 1.0, 2);
        let t_star = resonant_transfer_time(1.0, 0).unwrap();
        let tr = evolve_pure(&h, &basis.ket(1, 0, 0), &grid(t_star, 2)).unwrap();
        let pops = tr.last_state().populations();
        assert!((pops[basis.phi3()] - 1.0).abs() < 1e-12);

        let vac = basis.ket(0, 0, 0);
        let tr = evolve_pure(&h, &vac, &grid(t_star, 5)).unwrap();
        assert!((tr.last_state().overlap(&vac).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_normalised_start_rejected() {
        let h = ComplexMatrix::zeros(8, 8);
        let psi = ComplexVector::zeros(8);
        assert!(evolve_pure(&h, &psi, &grid(1.0, 2)).is_err());
    }

    #[test]
    fn non_hermitian_sample_rejected() {
        let mut bad = ComplexMatrix::zeros(2, 2);
        bad[(0, 1)] = C64::new(1.0, 0.0);
        let h = FnHamiltonian::new(2, move |_| Ok(bad.clone()));
        assert!(matches!(
            evolve_pure(&h, &ComplexVector::basis(2, 0), &grid(1.0, 2)),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn static_matches_single_shot() {
        let h = build_h_resonant(0.7, 1.3, 2);
        let psi = Basis::new(2).ket(1, 0, 0);
        let tr = evolve_pure(&h, &psi, &grid(4.0, 9)).unwrap();
        let want = unitary_from_hamiltonian(&h, 4.0).unwrap().apply(&psi).unwrap();
        match tr.last_state() {
            StateRef::Pure(v) => assert!(v.max_abs_diff(&want) < 1e-12),
            _ => unreachable!(),
        }
    }

    #[test]
    fn stepped_engine_matches_static_engine() {
        let h = build_h_resonant(1.0, 0.6, 2);
        let h2 = h.clone();
        let wrapped = FnHamiltonian::new(8, move |_| Ok(h2.clone()));
        let psi = Basis::new(2).ket(1, 0, 0);
        let g = TimeGrid::new(0.0, 3.0, 4, 0.05).unwrap();
        let a = evolve_pure(&h, &psi, &g).unwrap();
        let b = evolve_pure(&wrapped, &psi, &g).unwrap();
        if let (States::Pure(a), States::Pure(b)) = (&a.states, &b.states) {
            for (x, y) in a.iter().zip(b) {
                assert!(x.max_abs_diff(y) < 1e-12);
            }
        }
    }

    #[test]
    fn config_hamiltonian_breakpoints() {
        let mut cfg = SystemConfig::ideal(10.0, 1.0, 1.0);
        cfg.schedule = Some(Schedule::ramp(20.0, 10.0, 0.5, RampShape::Linear));
        let h = ConfigHamiltonian::new(&cfg, 10.0);
        assert!(!h.is_static());
        assert_eq!(h.breakpoints(), vec![0.5]);
        assert!(fastest_frequency(&h, 0.0, 1.0).unwrap() >= 10.0);
    }

    #[test]
    fn expectation_examples() {
        let basis = Basis::new(2);
        let a = 1.0 / 3.0_f64.sqrt();
        let b = (2.0 / 3.0_f64).sqrt();
        let mut psi = ComplexVector::zeros(8);
        psi[0] = C64::new(a, 0.0);
        psi[basis.phi1()] = C64::new(b, 0.0);
        let one = expectation(StateRef::Pure(&psi), &basis.identity()).unwrap();
        assert!((one - 1.0).abs() < 1e-15);
        let nc = expectation(StateRef::Pure(&psi), &basis.number_c()).unwrap();
        assert!((nc - 2.0 / 3.0).abs() < 1e-15);
        let rho = psi.projector();
        let nc = expectation(StateRef::Mixed(&rho), &basis.number_c()).unwrap();
        assert!((nc - 2.0 / 3.0).abs() < 1e-15);
        assert!(expectation(StateRef::Pure(&psi), &ComplexMatrix::identity(4)).is_err());
    }

    #[test]
    fn excitation_number_conserved() {
        let basis = Basis::new(2);
        let h = build_h_resonant(1.0, 1.0, 2);
        let n_op = basis.excitation_number();
        let mut psi = ComplexVector::zeros(8);
        psi[0] = C64::new(0.6, 0.0);
        psi[basis.phi1()] = C64::new(0.8, 0.0);
        let tr = evolve_pure(&h, &psi, &grid(5.0, 21)).unwrap();
        for k in 0..tr.len() {
            let n = expectation(tr.state(k), &n_op).unwrap();
            assert!((n - 0.64).abs() < 1e-9);
        }
    }

    #[test]
    fn single_qubit_decay() {
        let gamma: f64 = 0.7;
        let h = ComplexMatrix::zeros(2, 2);
        let l = crate::linalg::pauli::sigma_minus().scale_real(gamma.sqrt());
        let rho0 = ComplexVector::basis(2, 1).projector();
        let g = TimeGrid::new(0.0, 3.0, 31, 1e-2).unwrap();
        let tr = evolve_lindblad(&h, &[l], &rho0, &g).unwrap();
        if let States::Mixed(rs) = &tr.states {
            for (r, rec) in rs.iter().zip(&tr.records) {
                assert!((r[(1, 1)].re - (-gamma * rec.t).exp()).abs() < 1e-7);
                assert!((rec.norm - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lindblad_without_jumps_matches_pure() {
        let basis = Basis::new(2);
        let h = build_h_resonant(1.0, 1.0, 2);
        let psi = basis.ket(1, 0, 0);
        let g = TimeGrid::new(0.0, 4.0, 9, 2.0 * PI / (1000.0 * 2.0)).unwrap();
        let p = evolve_pure(&h, &psi, &g).unwrap();
        let m = evolve_lindblad(&h, &[], &psi.projector(), &g).unwrap();
        if let (States::Pure(a), States::Mixed(b)) = (&p.states, &m.states) {
            for (v, r) in a.iter().zip(b) {
                assert!(v.projector().max_abs_diff(r) < 1e-8);
            }
        }
    }

    #[test]
    fn invalid_density_rejected() {
        let h = ComplexMatrix::zeros(2, 2);
        let g = grid(1.0, 2);
        let mut r = ComplexMatrix::identity(2);
        assert!(evolve_lindblad(&h, &[], &r, &g).is_err());
        r = ComplexMatrix::diagonal(&[1.5, -0.5]);
        assert!(evolve_lindblad(&h, &[], &r, &g).is_err());
        r = ComplexMatrix::diagonal(&[0.5, 0.5]);
        r[(0, 1)] = C64::new(0.1, 0.0);
        assert!(evolve_lindblad(&h, &[], &r, &g).is_err());
    }

    #[test]
    fn huge_step_is_rejected() {
        let l = crate::linalg::pauli::sigma_minus().scale_real(50.0);
        let rho0 = ComplexVector::basis(2, 1).projector();
        let g = TimeGrid::new(0.0, 1.0, 2, 1.0).unwrap();
        let h = ComplexMatrix::zeros(2, 2);
        assert!(matches!(
            evolve_lindblad(&h, &[l], &rho0, &g),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn peak_and_concat() {
        let basis = Basis::new(2);
        let h = build_h_resonant(1.0, 1.0, 2);
        let target = basis.ket(0, 0, 1);
        let psi = basis.ket(1, 0, 0);
        let t_star = resonant_transfer_time(1.0, 0).unwrap();
        let a = evolve_pure(&h, &psi, &grid(t_star, 5)).unwrap();
        let last = match a.last_state() {
            StateRef::Pure(v) => v.clone(),
            _ => unreachable!(),
        };
        let b = evolve_pure(&h, &last, &TimeGrid::new(t_star, 2.0 * t_star, 5, 1e-3).unwrap()).unwrap();
        let both = a.concat(b).unwrap().with_fidelity(&target).unwrap();
        assert_eq!(both.len(), 9);
        let (t, f) = both.peak().unwrap();
        assert!((t - t_star).abs() < 1e-12 && (f - 1.0).abs() < 1e-12);
        let both = both.with_populations(&basis).unwrap();
        let pops = both.records[4].populations.unwrap();
        assert!((pops[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn static_overlap_slope_matches_finite_difference() {
        let basis = Basis::new(2);
        let h = build_h_resonant(0.7, 1.3, 2);
        let prop = StaticPropagator::new(&h, &basis.ket(1, 0, 0), 0.5).unwrap();
        let target = basis.ket(0, 0, 1);
        let a = prop.overlap(&target).unwrap();
        for t in [0.9, 1.7, 3.2] {
            let psi = prop.state(t);
            assert!((a.fidelity(t) - psi[basis.phi3()].norm_sqr()).abs() < 1e-14);
            let fd = (a.fidelity(t + 1e-5) - a.fidelity(t - 1e-5)) / 2e-5;
            assert!((a.slope(t) - fd).abs() < 1e-8);
        }
    }
}

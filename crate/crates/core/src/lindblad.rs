//! Markov master equations of Lindblad form.
//!
//! Units: ħ = 1, energies are angular frequencies and rates share the same
//! inverse-time unit. The generator is
//!
//! ```text
//! Lρ = −i[H, ρ] + Σ_j (R_j ρ R_j† − ½ R_j†R_j ρ − ½ ρ R_j†R_j)
//! ```
//!
//! and is integrated with the classical fixed-step fourth-order Runge–Kutta
//! scheme. Positivity is checked at every recorded time, never enforced.

use std::fmt;
use std::str::FromStr;

use crate::channel::KrausChannel;
use crate::eigen::{hermitian_eigenvalues, HERMITIAN_TOL};
use crate::error::{Error, Result};
use crate::matrix::{pauli, ComplexMatrix, C64, ONE};
use crate::state::{dephased_qubit, DensityMatrix, StateReport, STATE_TOL};

const MINUS_I: C64 = C64::new(0.0, -1.0);

/// Hamiltonian plus relaxation operators.
#[derive(Clone, Debug)]
pub struct Lindbladian {
    hamiltonian: ComplexMatrix,
    relaxation_ops: Vec<ComplexMatrix>,
    relaxation_adj: Vec<ComplexMatrix>,
    /// `−iH − ½ Σ R†R`, so that `Lρ = Gρ + ρG† + Σ RρR†`.
    effective: ComplexMatrix,
}

impl Lindbladian {
    pub fn new(hamiltonian: ComplexMatrix, relaxation_ops: Vec<ComplexMatrix>) -> Result<Self> {
        hamiltonian.require_square("Hamiltonian")?;
        let defect = hamiltonian.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian { defect });
        }
        let dim = hamiltonian.rows();
        if let Some(r) = relaxation_ops
            .iter()
            .find(|r| r.rows() != dim || r.cols() != dim)
        {
            return Err(Error::Shape(format!(
                "relaxation operator is {}x{}, Hamiltonian is {dim}x{dim}",
                r.rows(),
                r.cols()
            )));
        }
        let relaxation_adj: Vec<_> = relaxation_ops.iter().map(ComplexMatrix::adjoint).collect();
        let mut effective = hamiltonian.scale(MINUS_I);
        for (r, rd) in relaxation_ops.iter().zip(&relaxation_adj) {
            effective = &effective - &(rd * r).scale(C64::new(0.5, 0.0));
        }
        Ok(Self {
            hamiltonian,
            relaxation_ops,
            relaxation_adj,
            effective,
        })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.rows()
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn relaxation_ops(&self) -> &[ComplexMatrix] {
        &self.relaxation_ops
    }

    /// `Lρ` for any square matrix of matching dimension.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.rows() != self.dim() || rho.cols() != self.dim() {
            return Err(Error::Shape(format!(
                "generator of dimension {} applied to {}x{} matrix",
                self.dim(),
                rho.rows(),
                rho.cols()
            )));
        }
        Ok(self.apply_general(rho))
    }

    /// Largest single-channel rate, `max_j ‖R_j†R_j‖`, and the smallest
    /// nonzero one.
    fn rate_bounds(&self) -> (f64, Option<f64>) {
        let rates: Vec<f64> = self
            .relaxation_ops
            .iter()
            .zip(&self.relaxation_adj)
            .map(|(r, rd)| {
                let vals = hermitian_eigenvalues(&(rd * r), HERMITIAN_TOL).unwrap();
                *vals.last().unwrap()
            })
            .collect();
        let max = rates.iter().copied().fold(0.0, f64::max);
        let min = rates.iter().copied().filter(|&x| x > 0.0).reduce(f64::min);
        (max, min)
    }
}

/// `Lρ`.
pub fn liouvillian_apply(l: &Lindbladian, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    l.apply(rho)
}

/// A quantity recorded along a trajectory.
#[derive(Clone, Debug)]
pub enum Observable {
    /// `ρ_ii`.
    Population(usize),
    /// `|ρ_ij|`.
    Coherence(usize, usize),
    /// `tr(ρ n)` with `n = diag(0, 1, ..., dim−1)`.
    MeanOccupation,
    Purity,
    /// `Re tr(ρA)` under a caller-chosen column name.
    Expectation(String, ComplexMatrix),
}

impl Observable {
    pub fn name(&self) -> String {
        match self {
            Observable::Population(i) => format!("p{i}"),
            Observable::Coherence(i, j) => format!("coherence_{i}{j}"),
            Observable::MeanOccupation => "n_mean".into(),
            Observable::Purity => "purity".into(),
            Observable::Expectation(name, _) => name.clone(),
        }
    }

    pub fn evaluate(&self, rho: &DensityMatrix) -> Result<f64> {
        let m = rho.matrix();
        let check = |i: usize| {
            if i < rho.dim() {
                Ok(())
            } else {
                Err(Error::Shape(format!(
                    "index {i} outside dimension {}",
                    rho.dim()
                )))
            }
        };
        Ok(match self {
            Observable::Population(i) => {
                check(*i)?;
                m[(*i, *i)].re
            }
            Observable::Coherence(i, j) => {
                check(*i)?;
                check(*j)?;
                m[(*i, *j)].norm()
            }
            Observable::MeanOccupation => (0..rho.dim()).map(|n| n as f64 * m[(n, n)].re).sum(),
            Observable::Purity => rho.purity(),
            Observable::Expectation(_, a) => rho.expectation(a)?.re,
        })
    }
}

/// Observables with fixed CSV names for two-level runs.
pub fn qubit_observables() -> Vec<Observable> {
    vec![
        Observable::Expectation("p_up".into(), ComplexMatrix::projector(&pauli::up())),
        Observable::Expectation("p_down".into(), ComplexMatrix::projector(&pauli::down())),
        Observable::Coherence(0, 1),
    ]
}

/// Fixed-step time grid. The step actually taken is `t_final / n` with the
/// smallest `n` for which it does not exceed `dt`.
#[derive(Clone, Copy, Debug)]
pub struct Schedule {
    pub t_final: f64,
    pub dt: f64,
    /// Record one state every this many steps; the final time is always kept.
    pub record_every: usize,
    /// Tolerance for trace, Hermiticity and positivity at recorded times.
    pub validation_tol: f64,
}

impl Schedule {
    pub fn new(t_final: f64, dt: f64) -> Self {
        Self {
            t_final,
            dt,
            record_every: 1,
            validation_tol: STATE_TOL,
        }
    }

    pub fn record_every(mut self, stride: usize) -> Self {
        self.record_every = stride;
        self
    }

    fn steps(&self) -> Result<(usize, f64)> {
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::Domain(format!(
                "t_final must be positive, got {}",
                self.t_final
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Domain(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.record_every == 0 {
            return Err(Error::Domain("record_every must be at least 1".into()));
        }
        let n = (self.t_final / self.dt * (1.0 - 1e-12)).ceil().max(1.0);
        if n > 1e9 {
            return Err(Error::Domain(format!("{n} steps requested")));
        }
        let n = n as usize;
        Ok((n, self.t_final / n as f64))
    }
}

#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// `(name, series)`, one value per recorded time.
    pub observables: Vec<(String, Vec<f64>)>,
}

impl EvolutionResult {
    pub fn final_state(&self) -> &DensityMatrix {
        self.states
            .last()
            .expect("at least the initial state is recorded")
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.observables
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| s.as_slice())
    }

    /// `t,<names...>` header, one row per recorded time, 15 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for (name, _) in &self.observables {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (k, t) in self.times.iter().enumerate() {
            out.push_str(&format_sig(*t));
            for (_, series) in &self.observables {
                out.push(',');
                out.push_str(&format_sig(series[k]));
            }
            out.push('\n');
        }
        out
    }
}

/// Scientific notation with 15 significant digits.
pub fn format_sig(x: f64) -> String {
    format!("{x:.14e}")
}

/// Integrates `ρ̇ = Lρ` from `rho0` over `schedule`.
pub fn evolve(
    l: &Lindbladian,
    rho0: &DensityMatrix,
    schedule: &Schedule,
    record: &[Observable],
) -> Result<EvolutionResult> {
    if rho0.dim() != l.dim() {
        return Err(Error::Shape(format!(
            "state of dimension {} for a generator of dimension {}",
            rho0.dim(),
            l.dim()
        )));
    }
    let (n, h) = schedule.steps()?;
    let mut result = EvolutionResult {
        times: Vec::new(),
        states: Vec::new(),
        observables: record.iter().map(|o| (o.name(), Vec::new())).collect(),
    };
    let push = |t: f64, state: DensityMatrix, result: &mut EvolutionResult| -> Result<()> {
        for (obs, (_, series)) in record.iter().zip(result.observables.iter_mut()) {
            series.push(obs.evaluate(&state)?);
        }
        result.times.push(t);
        result.states.push(state);
        Ok(())
    };
    push(0.0, rho0.clone(), &mut result)?;

    let mut rho = rho0.matrix().clone();
    for step in 1..=n {
        rho = rk4_step(l, &rho, h);
        let t = step as f64 * h;
        if !rho.is_finite() {
            return Err(Error::Divergence { time: t });
        }
        if step % schedule.record_every == 0 || step == n {
            let report = StateReport::inspect(&rho.hermitian_part())?;
            let state = report
                .check(schedule.validation_tol)
                .and_then(|_| {
                    DensityMatrix::with_tolerance(rho.hermitian_part(), schedule.validation_tol)
                })
                .map_err(|e| Error::Integration {
                    time: t,
                    reason: e.to_string(),
                })?;
            push(t, state, &mut result)?;
        }
    }
    Ok(result)
}

fn rk4_step(l: &Lindbladian, rho: &ComplexMatrix, h: f64) -> ComplexMatrix {
    let half = C64::new(h / 2.0, 0.0);
    let full = C64::new(h, 0.0);
    let k1 = l.apply_general(rho);
    let k2 = l.apply_general(&(rho + &k1.scale(half)));
    let k3 = l.apply_general(&(rho + &k2.scale(half)));
    let k4 = l.apply_general(&(rho + &k3.scale(full)));
    let mut incr = &k1 + &k4;
    incr = &incr + &(&k2 + &k3).scale(C64::new(2.0, 0.0));
    rho + &incr.scale(C64::new(h / 6.0, 0.0))
}

impl Lindbladian {
    /// `Gρ + ρG† + Σ RρR†` without assuming ρ Hermitian.
    fn apply_general(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let eff_adj = self.effective.adjoint();
        let mut out = &(&self.effective * rho) + &(rho * &eff_adj);
        for (r, rd) in self.relaxation_ops.iter().zip(&self.relaxation_adj) {
            out = &out + &(&(r * rho) * rd);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    PureDephasing,
    AmplitudeDecay,
    Thermal,
    Bloch,
    DampedOscillator,
    /// The frozen-coherence decay ansatz; not of Lindblad form, see
    /// [`naive_decay_map`].
    NaiveDecay,
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "pure_dephasing" => ModelKind::PureDephasing,
            "amplitude_decay" => ModelKind::AmplitudeDecay,
            "thermal" => ModelKind::Thermal,
            "bloch" => ModelKind::Bloch,
            "damped_oscillator" => ModelKind::DampedOscillator,
            "naive_decay" => ModelKind::NaiveDecay,
            other => return Err(Error::Domain(format!("unknown model kind {other:?}"))),
        })
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::PureDephasing => "pure_dephasing",
            ModelKind::AmplitudeDecay => "amplitude_decay",
            ModelKind::Thermal => "thermal",
            ModelKind::Bloch => "bloch",
            ModelKind::DampedOscillator => "damped_oscillator",
            ModelKind::NaiveDecay => "naive_decay",
        })
    }
}

/// Parameters of a prebuilt model. Unused fields are ignored by a kind.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub gamma_phi: f64,
    pub gamma: f64,
    pub gamma_up: f64,
    pub eps_up: f64,
    pub eps_down: f64,
    pub omega: f64,
    /// Number of Fock states kept, `|0⟩ … |cutoff−1⟩`.
    pub fock_cutoff: usize,
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            gamma_phi: 0.0,
            gamma: 0.0,
            gamma_up: 0.0,
            eps_up: 0.0,
            eps_down: 0.0,
            omega: 0.0,
            fock_cutoff: 20,
        }
    }

    pub fn pure_dephasing(gamma_phi: f64) -> Self {
        Self {
            gamma_phi,
            ..Self::new(ModelKind::PureDephasing)
        }
    }

    pub fn amplitude_decay(gamma: f64) -> Self {
        Self {
            gamma,
            ..Self::new(ModelKind::AmplitudeDecay)
        }
    }

    pub fn bloch(gamma: f64, gamma_up: f64, gamma_phi: f64) -> Self {
        Self {
            gamma,
            gamma_up,
            gamma_phi,
            ..Self::new(ModelKind::Bloch)
        }
    }

    pub fn damped_oscillator(gamma: f64, omega: f64, fock_cutoff: usize) -> Self {
        Self {
            gamma,
            omega,
            fock_cutoff,
            ..Self::new(ModelKind::DampedOscillator)
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [
            ("gamma_phi", self.gamma_phi),
            ("gamma", self.gamma),
            ("gamma_up", self.gamma_up),
        ] {
            if !(x.is_finite() && x >= 0.0) {
                return Err(Error::Domain(format!(
                    "{name} must be a nonnegative rate, got {x}"
                )));
            }
        }
        for (name, x) in [
            ("eps_up", self.eps_up),
            ("eps_down", self.eps_down),
            ("omega", self.omega),
        ] {
            if !x.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite")));
            }
        }
        if self.kind == ModelKind::DampedOscillator && self.fock_cutoff < 2 {
            return Err(Error::Domain(format!(
                "fock_cutoff must be at least 2, got {}",
                self.fock_cutoff
            )));
        }
        Ok(())
    }
}

/// Annihilation operator on the Fock space truncated to `cutoff` states.
pub fn annihilation(cutoff: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(cutoff, cutoff, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub fn number_operator(cutoff: usize) -> ComplexMatrix {
    ComplexMatrix::from_diag(
        &(0..cutoff)
            .map(|n| C64::new(n as f64, 0.0))
            .collect::<Vec<_>>(),
    )
}

pub fn build_model(spec: &ModelSpec) -> Result<Lindbladian> {
    spec.validate()?;
    let scaled = |m: ComplexMatrix, rate: f64| m.scale(C64::new(rate.sqrt(), 0.0));
    let qubit_h =
        || ComplexMatrix::from_diag(&[C64::new(spec.eps_up, 0.0), C64::new(spec.eps_down, 0.0)]);
    let mut ops = Vec::new();
    let mut push = |rate: f64, m: fn() -> ComplexMatrix| {
        if rate > 0.0 {
            ops.push(scaled(m(), rate));
        }
    };
    let hamiltonian = match spec.kind {
        ModelKind::PureDephasing => {
            push(spec.gamma_phi / 2.0, pauli::sigma_z);
            qubit_h()
        }
        ModelKind::AmplitudeDecay => {
            push(spec.gamma, pauli::sigma_minus);
            qubit_h()
        }
        ModelKind::Thermal => {
            push(spec.gamma, pauli::sigma_minus);
            push(spec.gamma_up, pauli::sigma_plus);
            qubit_h()
        }
        ModelKind::Bloch => {
            push(spec.gamma, pauli::sigma_minus);
            push(spec.gamma_up, pauli::sigma_plus);
            push(spec.gamma_phi / 2.0, pauli::sigma_z);
            qubit_h()
        }
        ModelKind::DampedOscillator => {
            if spec.gamma > 0.0 {
                ops.push(scaled(annihilation(spec.fock_cutoff), spec.gamma));
            }
            number_operator(spec.fock_cutoff).scale(C64::new(spec.omega, 0.0))
        }
        ModelKind::NaiveDecay => {
            return Err(Error::Domain(
                "naive_decay is not a Lindblad generator; use naive_decay_map".into(),
            ))
        }
    };
    Lindbladian::new(hamiltonian, ops)
}

/// Integration settings for [`coherence_decay_rate`].
#[derive(Clone, Copy, Debug)]
pub struct DecayProbe {
    pub t_final: f64,
    pub dt: f64,
    /// Largest tolerated residual of `ln|ρ↑↓|` about the fitted line.
    pub fit_tol: f64,
}

impl Default for DecayProbe {
    fn default() -> Self {
        Self {
            t_final: 10.0,
            dt: 1e-3,
            fit_tol: 1e-6,
        }
    }
}

/// Exponential decay rate of `|ρ↑↓|` starting from `(|↑⟩+|↓⟩)/√2`, by
/// log-linear least squares over the window where `|ρ↑↓| > 1e-6`.
pub fn coherence_decay_rate(l: &Lindbladian, probe: &DecayProbe) -> Result<f64> {
    if l.dim() != 2 {
        return Err(Error::Shape(format!(
            "coherence decay needs a qubit generator, got dimension {}",
            l.dim()
        )));
    }
    let rho0 = dephased_qubit(0.5, ONE, ONE)?;
    let stride = ((probe.t_final / probe.dt) / 1000.0).ceil().max(1.0) as usize;
    let run = evolve(
        l,
        &rho0,
        &Schedule::new(probe.t_final, probe.dt).record_every(stride),
        &[Observable::Coherence(0, 1)],
    )?;
    let coherence = run.series("coherence_01").unwrap();
    let (ts, logs): (Vec<f64>, Vec<f64>) = run
        .times
        .iter()
        .zip(coherence)
        .filter(|(_, &c)| c > 1e-6)
        .map(|(&t, &c)| (t, c.ln()))
        .unzip();
    let fit = fit_line(&ts, &logs)?;
    if fit.max_residual > probe.fit_tol {
        return Err(Error::Fit(format!(
            "coherence decay is not exponential (max log residual {:e})",
            fit.max_residual
        )));
    }
    Ok(-fit.slope)
}

#[derive(Clone, Copy, Debug)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 points, got {}",
            x.len().min(y.len())
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("abscissae are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - slope * a - intercept).abs())
        .fold(0.0, f64::max);
    Ok(LineFit {
        slope,
        intercept,
        max_residual,
    })
}

/// First-order Kraus set of `e^{Lδt}` and its completeness defect, which is
/// `O(δt²)`.
#[derive(Clone, Debug)]
pub struct FirstOrderKraus {
    pub channel: KrausChannel,
    pub defect: f64,
}

/// `K₀ = 1 + (−iH + A)δt` with `A = −½ Σ R†R`, and `K_j = R_j √δt`.
pub fn kraus_first_order(l: &Lindbladian, delta_t: f64) -> Result<FirstOrderKraus> {
    if !(delta_t.is_finite() && delta_t > 0.0) {
        return Err(Error::Domain(format!(
            "delta_t must be positive, got {delta_t}"
        )));
    }
    let k0 = &ComplexMatrix::identity(l.dim()) + &l.effective.scale(C64::new(delta_t, 0.0));
    let mut ops = vec![k0];
    ops.extend(
        l.relaxation_ops
            .iter()
            .map(|r| r.scale(C64::new(delta_t.sqrt(), 0.0))),
    );
    let channel = KrausChannel::unchecked(ops)?;
    let defect = channel.completeness_defect();
    Ok(FirstOrderKraus { channel, defect })
}

/// Output of the frozen-coherence decay ansatz.
#[derive(Clone, Debug)]
pub struct NaiveDecay {
    /// Raw output; may be indefinite.
    pub matrix: ComplexMatrix,
    pub min_eigenvalue: f64,
}

/// `ρ↑↑ ↦ e^{−Γt}ρ↑↑`, `ρ↓↓ ↦ 1 − e^{−Γt}ρ↑↑`, coherences untouched.
///
/// `t = ∞` is accepted and gives the long-time limit.
pub fn naive_decay_map(gamma: f64, t: f64, rho0: &DensityMatrix) -> Result<NaiveDecay> {
    if rho0.dim() != 2 {
        return Err(Error::Shape("naive decay acts on qubits".into()));
    }
    if !(gamma >= 0.0 && t >= 0.0) || gamma.is_nan() || t.is_nan() {
        return Err(Error::Domain(format!(
            "need gamma >= 0 and t >= 0, got {gamma}, {t}"
        )));
    }
    let factor = if gamma == 0.0 {
        1.0
    } else {
        (-gamma * t).exp()
    };
    let mut m = rho0.matrix().clone();
    let up = m[(0, 0)].re * factor;
    m[(0, 0)] = C64::new(up, 0.0);
    m[(1, 1)] = C64::new(1.0 - up, 0.0);
    let min_eigenvalue = hermitian_eigenvalues(&m, HERMITIAN_TOL)?[0];
    Ok(NaiveDecay {
        matrix: m,
        min_eigenvalue,
    })
}

/// Long-time state, evolving for `20 / (smallest nonzero rate)`.
pub fn steady_state(l: &Lindbladian, rho0: &DensityMatrix, dt: f64) -> Result<DensityMatrix> {
    let (_, min_rate) = l.rate_bounds();
    let min_rate = min_rate
        .ok_or_else(|| Error::Domain("generator has no relaxation; no steady state".into()))?;
    let schedule = Schedule::new(20.0 / min_rate, dt).record_every(usize::MAX);
    let run = evolve(l, rho0, &schedule, &[])?;
    Ok(run.final_state().clone())
}

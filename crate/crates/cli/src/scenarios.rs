//! Named scenarios driven by a [`Config`].

use std::fs;
use std::str::FromStr;

use decoherence::channel::{
    choi_distance, choi_to_kraus, inspect_kraus, KrausChannel, CANONICAL_TOL,
};
use decoherence::io::{parse_density, parse_kraus_ops};
use decoherence::lindblad::{
    build_model, evolve, naive_decay_map, qubit_observables, ModelKind, ModelSpec, Observable,
    Schedule,
};
use decoherence::matrix::{pauli, BipartiteIndex, ComplexMatrix, C64};
use decoherence::noise::{monte_carlo_visibility, NoiseProcess, TrajectoryConfig};
use decoherence::random::{random_kraus_ops, rng_for};
use decoherence::state::DensityMatrix;
use serde_json::{json, Value};

use crate::config::Config;
use crate::error::{CliError, CliResult};

const COMMON_KEYS: &[&str] = &["scenario", "seed", "output"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    DephaseMc,
    Lindblad,
    PptCheck,
    ChannelCheck,
    NaiveAnsatz,
    KrausRoundtrip,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::DephaseMc => "dephase-mc",
            Scenario::Lindblad => "lindblad",
            Scenario::PptCheck => "ppt-check",
            Scenario::ChannelCheck => "channel-check",
            Scenario::NaiveAnsatz => "naive-ansatz",
            Scenario::KrausRoundtrip => "kraus-roundtrip",
        }
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            Scenario::DephaseMc => &[
                "process",
                "gamma_phi",
                "variance",
                "correlation_time",
                "dt",
                "t_final",
                "trials",
                "sigma_tol",
            ],
            Scenario::Lindblad => &[
                "kind",
                "gamma",
                "gamma_up",
                "gamma_phi",
                "eps_up",
                "eps_down",
                "omega",
                "cutoff",
                "t_final",
                "dt",
                "record_every",
                "initial",
                "initial_file",
            ],
            Scenario::PptCheck => &["matrix_file", "dims", "tol", "expect_ppt"],
            Scenario::ChannelCheck => &["channel_file", "tol"],
            Scenario::NaiveAnsatz => &["gamma", "t", "p", "coherence"],
            Scenario::KrausRoundtrip => &["channel_file", "dim", "count", "tol"],
        }
    }

    /// Whether the scenario emits a CSV time series besides its verdict.
    pub fn has_csv(self) -> bool {
        matches!(self, Scenario::DephaseMc | Scenario::Lindblad)
    }
}

impl FromStr for Scenario {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Ok(match s {
            "dephase-mc" => Scenario::DephaseMc,
            "lindblad" => Scenario::Lindblad,
            "ppt-check" => Scenario::PptCheck,
            "channel-check" => Scenario::ChannelCheck,
            "naive-ansatz" => Scenario::NaiveAnsatz,
            "kraus-roundtrip" => Scenario::KrausRoundtrip,
            other => return Err(CliError::validation(format!("unknown scenario {other:?}"))),
        })
    }
}

#[derive(Clone, Debug)]
pub struct Artifacts {
    pub scenario: Scenario,
    /// JSON object with at least `scenario` and `pass`.
    pub verdict: Value,
    pub csv: Option<String>,
}

pub fn run_scenario(cfg: &Config) -> CliResult<Artifacts> {
    let scenario: Scenario = cfg.require_str("scenario")?.parse()?;
    let allowed: Vec<&str> = COMMON_KEYS.iter().chain(scenario.keys()).copied().collect();
    cfg.check_keys(&allowed)?;
    let (mut verdict, csv) = match scenario {
        Scenario::DephaseMc => dephase_mc(cfg)?,
        Scenario::Lindblad => lindblad(cfg)?,
        Scenario::PptCheck => (ppt_check(cfg)?, None),
        Scenario::ChannelCheck => (
            channel_report(
                &read(cfg.require_str("channel_file")?)?,
                cfg.get_or("tol", 1e-10)?,
            )?,
            None,
        ),
        Scenario::NaiveAnsatz => (naive_ansatz(cfg)?, None),
        Scenario::KrausRoundtrip => (kraus_roundtrip(cfg)?, None),
    };
    verdict["scenario"] = json!(scenario.name());
    Ok(Artifacts {
        scenario,
        verdict,
        csv,
    })
}

pub fn read(path: &str) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::parse(format!("cannot read {path}: {e}")))
}

fn dephase_mc(cfg: &Config) -> CliResult<(Value, Option<String>)> {
    let process = match cfg.raw("process").unwrap_or("white") {
        "white" => NoiseProcess::white(cfg.require("gamma_phi")?)?,
        "ou" | "ornstein_uhlenbeck" => NoiseProcess::ornstein_uhlenbeck(
            cfg.require("variance")?,
            cfg.require("correlation_time")?,
        )?,
        other => {
            return Err(CliError::validation(format!(
                "unknown noise process {other:?}"
            )))
        }
    };
    let dt: f64 = cfg.require("dt")?;
    let t_final: f64 = cfg.require("t_final")?;
    let n_steps = whole_steps(t_final, dt)?;
    let trials: usize = cfg.get_or("trials", 10_000)?;
    let seed: u64 = cfg.get_or("seed", 0)?;
    let sigma_tol: f64 = cfg.get_or("sigma_tol", 5.0)?;
    let curve =
        monte_carlo_visibility(&process, &TrajectoryConfig::new(dt, n_steps, trials, seed))?;

    let mut worst: f64 = 0.0;
    let mut pass = true;
    for k in 0..curve.times.len() {
        let dev = (curve.v_mc[k] - curve.v_analytic[k]).norm();
        let se = curve.stderr[k];
        pass &= dev <= sigma_tol * se;
        if se > 0.0 {
            worst = worst.max(dev / se);
        }
    }
    let max_stderr = curve.stderr.iter().copied().fold(0.0, f64::max);
    let verdict = json!({
        "pass": pass,
        "trials": trials,
        "points": curve.times.len(),
        "seed": seed,
        "max_deviation_in_stderr": worst,
        "sigma_tol": sigma_tol,
        "max_stderr": max_stderr,
    });
    Ok((verdict, Some(curve.to_csv())))
}

fn whole_steps(t_final: f64, dt: f64) -> CliResult<usize> {
    if !(t_final > 0.0 && dt > 0.0 && t_final.is_finite() && dt.is_finite()) {
        return Err(CliError::validation("t_final and dt must be positive"));
    }
    let n = (t_final / dt).round();
    if n < 1.0 || n > 1e8 || (n * dt - t_final).abs() > 1e-9 * t_final {
        return Err(CliError::validation(format!(
            "t_final = {t_final} is not a whole number of steps dt = {dt}"
        )));
    }
    Ok(n as usize)
}

fn lindblad(cfg: &Config) -> CliResult<(Value, Option<String>)> {
    let kind: ModelKind = cfg.require_str("kind")?.parse()?;
    if kind == ModelKind::NaiveDecay {
        return Err(CliError::validation(
            "naive_decay is not a Lindblad generator; use the naive-ansatz scenario",
        ));
    }
    let spec = ModelSpec {
        kind,
        gamma: cfg.get_or("gamma", 0.0)?,
        gamma_up: cfg.get_or("gamma_up", 0.0)?,
        gamma_phi: cfg.get_or("gamma_phi", 0.0)?,
        eps_up: cfg.get_or("eps_up", 0.0)?,
        eps_down: cfg.get_or("eps_down", 0.0)?,
        omega: cfg.get_or("omega", 0.0)?,
        fock_cutoff: cfg.get_or("cutoff", 20)?,
    };
    let l = build_model(&spec)?;
    let oscillator = kind == ModelKind::DampedOscillator;
    let rho0 = initial_state(cfg, l.dim(), oscillator)?;
    let schedule = Schedule::new(cfg.require("t_final")?, cfg.require("dt")?)
        .record_every(cfg.get_or("record_every", 1)?);
    let observables = if oscillator {
        vec![Observable::MeanOccupation]
    } else {
        qubit_observables()
    };
    let mut run = evolve(&l, &rho0, &schedule, &observables)?;
    for (name, _) in run.observables.iter_mut() {
        if name == "coherence_01" {
            *name = "coherence".into();
        }
    }
    let mut max_trace_error: f64 = 0.0;
    let mut min_eigenvalue = f64::INFINITY;
    for s in &run.states {
        max_trace_error = max_trace_error.max((s.matrix().trace()? - C64::new(1.0, 0.0)).norm());
        min_eigenvalue = min_eigenvalue.min(s.min_eigenvalue());
    }
    let verdict = json!({
        "pass": max_trace_error <= 1e-9 && min_eigenvalue >= -1e-8,
        "kind": kind.to_string(),
        "dim": l.dim(),
        "recorded": run.times.len(),
        "t_final": run.times.last(),
        "max_trace_error": max_trace_error,
        "min_eigenvalue": min_eigenvalue,
    });
    Ok((verdict, Some(run.to_csv())))
}

fn initial_state(cfg: &Config, dim: usize, oscillator: bool) -> CliResult<DensityMatrix> {
    if let Some(path) = cfg.raw("initial_file") {
        if cfg.raw("initial").is_some() {
            return Err(CliError::validation(
                "give either initial or initial_file, not both",
            ));
        }
        let rho = parse_density(&read(path)?).map_err(|e| CliError::from(e).context(path))?;
        if rho.dim() != dim {
            return Err(CliError::validation(format!(
                "{path}: dimension {} but the model has {dim}",
                rho.dim()
            )));
        }
        return Ok(rho);
    }
    let spec = match cfg.raw("initial") {
        Some(s) => s,
        None if oscillator => {
            return Err(CliError::validation(
                "oscillator runs need initial = fock:N or initial_file",
            ))
        }
        None => "plus",
    };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let psi: Vec<C64> = match (spec, oscillator) {
        ("up", false) => pauli::up(),
        ("down", false) => pauli::down(),
        ("plus", false) => vec![C64::new(s, 0.0), C64::new(s, 0.0)],
        ("minus", false) => vec![C64::new(s, 0.0), C64::new(-s, 0.0)],
        (other, true) if other.starts_with("fock:") => {
            let n: usize = other[5..]
                .parse()
                .map_err(|_| CliError::validation(format!("invalid Fock state {other:?}")))?;
            if n >= dim {
                return Err(CliError::validation(format!(
                    "Fock state {n} is outside the cutoff {dim}"
                )));
            }
            (0..dim)
                .map(|k| C64::new(if k == n { 1.0 } else { 0.0 }, 0.0))
                .collect()
        }
        (other, _) => {
            return Err(CliError::validation(format!(
                "invalid initial state {other:?}"
            )))
        }
    };
    Ok(DensityMatrix::pure(&psi)?)
}

fn parse_dims(s: &str) -> CliResult<BipartiteIndex> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| CliError::validation(format!("dims must look like 2x2, got {s:?}")))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| CliError::validation(format!("invalid dimension {t:?}")))
    };
    Ok(BipartiteIndex::new(parse(a)?, parse(b)?)?)
}

/// State diagnostics, plus the PPT test when `dims` is given.
pub fn state_report(text: &str, dims: Option<&str>, tol: f64) -> CliResult<Value> {
    let rho = parse_density(text)?;
    let mut report = json!({
        "dim": rho.dim(),
        "trace": rho.matrix().trace()?.re,
        "purity": rho.purity(),
        "state_min_eigenvalue": rho.min_eigenvalue(),
        "pass": true,
    });
    if let Some(dims) = dims {
        let idx = parse_dims(dims)?;
        let verdict = rho.is_ppt(idx, tol)?;
        report["ppt"] = json!(verdict.ppt);
        report["min_eigenvalue"] = json!(verdict.min_eigenvalue);
        report["separability"] = json!(verdict.separability.as_str());
    }
    Ok(report)
}

fn ppt_check(cfg: &Config) -> CliResult<Value> {
    let path = cfg.require_str("matrix_file")?;
    let dims = cfg.raw("dims").unwrap_or("2x2");
    let mut report = state_report(&read(path)?, Some(dims), cfg.get_or("tol", 1e-10)?)
        .map_err(|e| e.context(path))?;
    if let Some(expect) = cfg.get::<bool>("expect_ppt")? {
        report["pass"] = json!(report["ppt"] == json!(expect));
        report["expect_ppt"] = json!(expect);
    }
    Ok(report)
}

/// Completeness and complete positivity of a channel file.
pub fn channel_report(text: &str, tol: f64) -> CliResult<Value> {
    let r = inspect_kraus(parse_kraus_ops(text)?)?;
    let tp = r.completeness_defect <= tol;
    let cp = r.choi_min_eigenvalue >= -tol;
    Ok(json!({
        "pass": tp && cp,
        "dim": r.dim,
        "kraus_count": r.count,
        "completeness_defect": r.completeness_defect,
        "trace_preserving": tp,
        "choi_min_eigenvalue": r.choi_min_eigenvalue,
        "completely_positive": cp,
        "tol": tol,
    }))
}

fn naive_ansatz(cfg: &Config) -> CliResult<Value> {
    let gamma: f64 = cfg.get_or("gamma", 1.0)?;
    let t: f64 = cfg.require("t")?;
    let p: f64 = cfg.get_or("p", 0.5)?;
    let coherence: f64 = cfg.get_or("coherence", 0.5)?;
    let m = ComplexMatrix::from_real(2, 2, &[p, coherence, coherence, 1.0 - p])?;
    let rho0 = DensityMatrix::new(m)?;
    let out = naive_decay_map(gamma, t, &rho0)?;
    let a = out.matrix[(0, 0)].re;
    let predicted_negative = a * (1.0 - a) < coherence * coherence;
    let negative = out.min_eigenvalue < 0.0;
    Ok(json!({
        "pass": negative == predicted_negative,
        "gamma_t": gamma * t,
        "min_eigenvalue": out.min_eigenvalue,
        "negative": negative,
        "predicted_negative": predicted_negative,
    }))
}

fn kraus_roundtrip(cfg: &Config) -> CliResult<Value> {
    let tol: f64 = cfg.get_or("tol", 1e-10)?;
    let ch = match cfg.raw("channel_file") {
        Some(path) => {
            if cfg.raw("dim").is_some() || cfg.raw("count").is_some() {
                return Err(CliError::validation(
                    "give either channel_file or dim/count, not both",
                ));
            }
            KrausChannel::new(parse_kraus_ops(&read(path)?)?)
                .map_err(|e| CliError::from(e).context(path))?
        }
        None => {
            let dim: usize = cfg.require("dim")?;
            let count: usize = cfg.require("count")?;
            if dim == 0 || count == 0 || dim > 16 || count > 64 {
                return Err(CliError::validation(
                    "need 1 <= dim <= 16 and 1 <= count <= 64",
                ));
            }
            let mut rng = rng_for(cfg.get_or("seed", 0)?, 0);
            KrausChannel::new(random_kraus_ops(&mut rng, dim, count))?
        }
    };
    let back = choi_to_kraus(&ch.choi(), CANONICAL_TOL)?;
    let distance = choi_distance(&ch, &back)?;
    Ok(json!({
        "pass": distance <= tol && back.len() <= ch.dim() * ch.dim(),
        "dim": ch.dim(),
        "kraus_in": ch.len(),
        "kraus_out": back.len(),
        "choi_distance": distance,
        "tol": tol,
    }))
}

//! Pure dephasing of a qubit by a classical, zero-mean Gaussian level shift
//! `ε(t)`.
//!
//! The accumulated phase is `φ(t) = −∫₀ᵗ ε(t′) dt′` and the visibility is
//! `v(t) = ⟨e^{iφ(t)}⟩`. Two processes are provided: white noise, fixed by
//! `⟨φ²(t)⟩ = 2Γφ t`, and Ornstein–Uhlenbeck noise with covariance
//! `⟨ε(t)ε(t′)⟩ = c·e^{−|t−t′|/τ}`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lindblad::format_sig;
use crate::matrix::C64;
use crate::random::rng_for;

/// Trials per parallel work unit. Fixed so that the reduction order, and
/// with it every output bit, is independent of the thread count.
const CHUNK: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseProcess {
    White {
        dephasing_rate: f64,
    },
    OrnsteinUhlenbeck {
        variance: f64,
        correlation_time: f64,
    },
}

impl NoiseProcess {
    pub fn white(dephasing_rate: f64) -> Result<Self> {
        let p = NoiseProcess::White { dephasing_rate };
        p.validate()?;
        Ok(p)
    }

    pub fn ornstein_uhlenbeck(variance: f64, correlation_time: f64) -> Result<Self> {
        let p = NoiseProcess::OrnsteinUhlenbeck {
            variance,
            correlation_time,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseProcess::White { dephasing_rate } => {
                if !(dephasing_rate.is_finite() && dephasing_rate >= 0.0) {
                    return Err(Error::Domain(format!(
                        "dephasing rate must be nonnegative, got {dephasing_rate}"
                    )));
                }
            }
            NoiseProcess::OrnsteinUhlenbeck {
                variance,
                correlation_time,
            } => {
                if !(variance.is_finite() && variance >= 0.0) {
                    return Err(Error::Domain(format!(
                        "variance must be nonnegative, got {variance}"
                    )));
                }
                if !(correlation_time.is_finite() && correlation_time > 0.0) {
                    return Err(Error::Domain(format!(
                        "correlation time must be positive, got {correlation_time}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `⟨φ²(t)⟩`.
    pub fn phase_variance(&self, t: f64) -> f64 {
        match *self {
            NoiseProcess::White { dephasing_rate } => 2.0 * dephasing_rate * t,
            NoiseProcess::OrnsteinUhlenbeck {
                variance: c,
                correlation_time: tau,
            } => 2.0 * c * tau * (t + tau * (-t / tau).exp_m1()),
        }
    }
}

/// Time grid `t_k = k·dt`, `k = 0..=n_steps`, and the trial count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub n_trials: usize,
    pub seed: u64,
}

impl TrajectoryConfig {
    pub fn new(dt: f64, n_steps: usize, n_trials: usize, seed: u64) -> Self {
        Self {
            dt,
            n_steps,
            n_trials,
            seed,
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|k| k as f64 * self.dt).collect()
    }

    pub fn validate(&self, p: &NoiseProcess) -> Result<()> {
        p.validate()?;
        let dt = self.dt;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Domain(format!("dt must be positive, got {dt}")));
        }
        if self.n_steps == 0 || self.n_trials == 0 {
            return Err(Error::Domain(
                "n_steps and n_trials must be positive".into(),
            ));
        }
        if let NoiseProcess::OrnsteinUhlenbeck {
            correlation_time, ..
        } = *p
        {
            if dt > correlation_time / 10.0 {
                return Err(Error::Domain(format!(
                    "dt = {dt} exceeds a tenth of the correlation time {correlation_time}"
                )));
            }
        }
        Ok(())
    }
}

/// `φ(t_k)` for one trial, `n_steps + 1` values starting at `φ(0) = 0`.
pub fn sample_phase_trajectory(
    p: &NoiseProcess,
    cfg: &TrajectoryConfig,
    trial: u64,
) -> Result<Vec<f64>> {
    cfg.validate(p)?;
    let mut out = Vec::with_capacity(cfg.n_steps + 1);
    fill_trajectory(p, cfg, trial, &mut out);
    Ok(out)
}

fn fill_trajectory(p: &NoiseProcess, cfg: &TrajectoryConfig, trial: u64, out: &mut Vec<f64>) {
    out.clear();
    let mut rng = rng_for(cfg.seed, trial);
    let dt = cfg.dt;
    let mut phi = 0.0;
    out.push(phi);
    match *p {
        NoiseProcess::White { dephasing_rate } => {
            let sigma = (2.0 * dephasing_rate * dt).sqrt();
            for _ in 0..cfg.n_steps {
                phi += sigma * normal(&mut rng);
                out.push(phi);
            }
        }
        NoiseProcess::OrnsteinUhlenbeck {
            variance: c,
            correlation_time: tau,
        } => {
            let decay = (-dt / tau).exp();
            let kick = (c * -(-2.0 * dt / tau).exp_m1()).sqrt();
            let mut eps = c.sqrt() * normal(&mut rng);
            for _ in 0..cfg.n_steps {
                let next = eps * decay + kick * normal(&mut rng);
                phi -= 0.5 * dt * (eps + next);
                eps = next;
                out.push(phi);
            }
        }
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

#[derive(Clone, Debug)]
pub struct VisibilityCurve {
    pub times: Vec<f64>,
    pub v_mc: Vec<C64>,
    /// `√(s²_re + s²_im) / √N` with per-component sample variances.
    pub stderr: Vec<f64>,
    pub v_analytic: Vec<C64>,
}

impl VisibilityCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,re_v_mc,im_v_mc,stderr,re_v_analytic,im_v_analytic\n");
        for k in 0..self.times.len() {
            let row = [
                self.times[k],
                self.v_mc[k].re,
                self.v_mc[k].im,
                self.stderr[k],
                self.v_analytic[k].re,
                self.v_analytic[k].im,
            ];
            let cells: Vec<String> = row.iter().map(|&x| format_sig(x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone)]
struct Sums {
    re: Vec<f64>,
    im: Vec<f64>,
    re2: Vec<f64>,
    im2: Vec<f64>,
}

impl Sums {
    fn zeros(n: usize) -> Self {
        Self {
            re: vec![0.0; n],
            im: vec![0.0; n],
            re2: vec![0.0; n],
            im2: vec![0.0; n],
        }
    }

    fn absorb(&mut self, other: &Sums) {
        for k in 0..self.re.len() {
            self.re[k] += other.re[k];
            self.im[k] += other.im[k];
            self.re2[k] += other.re2[k];
            self.im2[k] += other.im2[k];
        }
    }
}

/// Sample mean of `e^{iφ(t_k)}` over `n_trials` trials, trial `j` using RNG
/// stream `j`. Runs in parallel; the result does not depend on the number
/// of threads.
pub fn monte_carlo_visibility(p: &NoiseProcess, cfg: &TrajectoryConfig) -> Result<VisibilityCurve> {
    cfg.validate(p)?;
    let len = cfg.n_steps + 1;
    let n_chunks = cfg.n_trials.div_ceil(CHUNK);
    let partial: Vec<Sums> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut sums = Sums::zeros(len);
            let mut phi = Vec::with_capacity(len);
            let end = ((chunk + 1) * CHUNK).min(cfg.n_trials);
            for trial in chunk * CHUNK..end {
                fill_trajectory(p, cfg, trial as u64, &mut phi);
                for (k, &x) in phi.iter().enumerate() {
                    let (s, c) = x.sin_cos();
                    sums.re[k] += c;
                    sums.im[k] += s;
                    sums.re2[k] += c * c;
                    sums.im2[k] += s * s;
                }
            }
            sums
        })
        .collect();
    let mut total = Sums::zeros(len);
    for s in &partial {
        total.absorb(s);
    }

    let n = cfg.n_trials as f64;
    let times = cfg.times();
    let mut v_mc = Vec::with_capacity(len);
    let mut stderr = Vec::with_capacity(len);
    for k in 0..len {
        let (mr, mi) = (total.re[k] / n, total.im[k] / n);
        v_mc.push(C64::new(mr, mi));
        let spread = if cfg.n_trials > 1 {
            let var_re = (total.re2[k] - n * mr * mr).max(0.0) / (n - 1.0);
            let var_im = (total.im2[k] - n * mi * mi).max(0.0) / (n - 1.0);
            ((var_re + var_im) / n).sqrt()
        } else {
            0.0
        };
        stderr.push(spread);
    }
    // φ(0) = 0 in every trial, so this is exact anyway; pin it against roundoff
    v_mc[0] = C64::new(1.0, 0.0);
    stderr[0] = 0.0;
    let v_analytic = analytic_visibility(p, &times)?;
    Ok(VisibilityCurve {
        times,
        v_mc,
        stderr,
        v_analytic,
    })
}

/// `e^{−⟨φ²(t)⟩/2}`, exact for zero-mean Gaussian noise.
pub fn analytic_visibility(p: &NoiseProcess, times: &[f64]) -> Result<Vec<C64>> {
    p.validate()?;
    times
        .iter()
        .map(|&t| {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
            }
            Ok(C64::new(
                visibility_from_variance(p.phase_variance(t))?,
                0.0,
            ))
        })
        .collect()
}

pub fn visibility_from_variance(var_phi: f64) -> Result<f64> {
    if !(var_phi >= 0.0) {
        return Err(Error::Domain(format!(
            "phase variance must be nonnegative, got {var_phi}"
        )));
    }
    Ok((-var_phi / 2.0).exp())
}

//! Density matrices, ensembles and the quantities read off them.

use crate::eigen::{hermitian_eigenvalues, HERMITIAN_TOL};
use crate::error::{Error, Result};
use crate::matrix::{BipartiteIndex, ComplexMatrix, Subsystem, C64};

/// Tolerance on trace, Hermiticity and the smallest eigenvalue.
pub const STATE_TOL: f64 = 1e-10;

/// Tolerance on ensemble weights and state-vector norms.
pub const ENSEMBLE_TOL: f64 = 1e-12;

/// The three numbers that decide whether a matrix is a valid state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateReport {
    pub trace: C64,
    pub hermiticity_defect: f64,
    /// `None` when the matrix is too far from Hermitian to have a real spectrum.
    pub min_eigenvalue: Option<f64>,
}

impl StateReport {
    pub fn inspect(m: &ComplexMatrix) -> Result<Self> {
        m.require_square("density matrix")?;
        let hermiticity_defect = m.hermiticity_defect();
        let min_eigenvalue = if hermiticity_defect <= HERMITIAN_TOL {
            Some(hermitian_eigenvalues(m, HERMITIAN_TOL)?[0])
        } else {
            None
        };
        Ok(Self {
            trace: m.trace()?,
            hermiticity_defect,
            min_eigenvalue,
        })
    }

    pub fn check(&self, tol: f64) -> Result<()> {
        if self.hermiticity_defect > tol {
            return Err(Error::NotHermitian {
                defect: self.hermiticity_defect,
            });
        }
        if (self.trace - C64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::NotNormalized {
                trace: self.trace.re,
            });
        }
        match self.min_eigenvalue {
            Some(min) if min >= -tol => Ok(()),
            Some(min) => Err(Error::NotPositive {
                min_eigenvalue: min,
            }),
            None => Err(Error::NotHermitian {
                defect: self.hermiticity_defect,
            }),
        }
    }
}

/// A validated state: unit trace, Hermitian and positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, STATE_TOL)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        StateReport::inspect(&matrix)?.check(tol)?;
        Ok(Self { matrix })
    }

    /// `|psi⟩⟨psi|` for a unit vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        require_unit(psi, ENSEMBLE_TOL)?;
        Self::new(ComplexMatrix::projector(psi))
    }

    /// `1/n`.
    pub fn maximally_mixed(n: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(n).scale(C64::new(1.0 / n as f64, 0.0)),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// `⟨A⟩ = tr(ρA)`.
    pub fn expectation(&self, a: &ComplexMatrix) -> Result<C64> {
        if a.rows() != self.dim() || a.cols() != self.dim() {
            return Err(Error::Shape(format!(
                "observable is {}x{}, state has dimension {}",
                a.rows(),
                a.cols(),
                self.dim()
            )));
        }
        // tr(ρA) without forming the product
        let n = self.dim();
        Ok((0..n)
            .flat_map(|i| (0..n).map(move |k| (i, k)))
            .map(|(i, k)| self.matrix[(i, k)] * a[(k, i)])
            .sum())
    }

    /// `⟨φ|ρ|φ⟩` for a unit vector `φ`.
    pub fn measure_probability(&self, phi: &[C64]) -> Result<f64> {
        if phi.len() != self.dim() {
            return Err(Error::Shape(format!(
                "vector of length {} against dimension {}",
                phi.len(),
                self.dim()
            )));
        }
        require_unit(phi, ENSEMBLE_TOL)?;
        let rho_phi = self.matrix.apply_vec(phi)?;
        Ok(phi
            .iter()
            .zip(&rho_phi)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .re)
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> f64 {
        // ρ is Hermitian, so tr ρ² = Σ |ρ_ij|²
        self.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.matrix, HERMITIAN_TOL).expect("validated state is Hermitian")[0]
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix, HERMITIAN_TOL).expect("validated state is Hermitian")
    }

    /// Reduced state of one factor; revalidated.
    pub fn reduce(&self, idx: BipartiteIndex, keep: Subsystem) -> Result<Self> {
        Self::new(self.matrix.partial_trace(idx, keep)?)
    }

    /// Positivity of the partial transpose on subsystem A.
    pub fn is_ppt(&self, idx: BipartiteIndex, tol: f64) -> Result<PptVerdict> {
        let pt = self.matrix.partial_transpose(idx)?;
        let min_eigenvalue = hermitian_eigenvalues(&pt, HERMITIAN_TOL)?[0];
        let ppt = min_eigenvalue >= -tol;
        let decided = matches!((idx.dim_a, idx.dim_b), (2, 2) | (2, 3) | (3, 2));
        let separability = match (ppt, decided) {
            (false, _) => Separability::Entangled,
            (true, true) => Separability::Separable,
            (true, false) => Separability::Inconclusive,
        };
        Ok(PptVerdict {
            ppt,
            min_eigenvalue,
            separability,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Separability {
    Separable,
    Entangled,
    /// Positive partial transpose in dimensions where that does not settle
    /// separability.
    Inconclusive,
}

impl Separability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Separability::Separable => "separable",
            Separability::Entangled => "entangled",
            Separability::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PptVerdict {
    pub ppt: bool,
    /// Smallest eigenvalue of the partial transpose.
    pub min_eigenvalue: f64,
    pub separability: Separability,
}

/// Probabilistic mixture of pure states.
#[derive(Clone, Debug)]
pub struct Ensemble {
    weights: Vec<f64>,
    states: Vec<Vec<C64>>,
}

impl Ensemble {
    pub fn new(weights: Vec<f64>, states: Vec<Vec<C64>>) -> Result<Self> {
        if weights.is_empty() || weights.len() != states.len() {
            return Err(Error::Shape(format!(
                "{} weights for {} states",
                weights.len(),
                states.len()
            )));
        }
        require_probabilities(&weights)?;
        let dim = states[0].len();
        for psi in &states {
            if psi.len() != dim || dim == 0 {
                return Err(Error::Shape("ensemble states differ in dimension".into()));
            }
            require_unit(psi, ENSEMBLE_TOL)?;
        }
        Ok(Self { weights, states })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[Vec<C64>] {
        &self.states
    }
}

/// `ρ = Σ_j w_j |ψ_j⟩⟨ψ_j|`.
pub fn from_ensemble(e: &Ensemble) -> Result<DensityMatrix> {
    let dim = e.states[0].len();
    let mut rho = ComplexMatrix::zeros(dim, dim);
    for (&w, psi) in e.weights.iter().zip(&e.states) {
        rho = &rho + &ComplexMatrix::projector(psi).scale(C64::new(w, 0.0));
    }
    DensityMatrix::new(rho)
}

/// A qubit whose coherence has been scaled by the visibility `v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitDephasingState {
    /// Population of `|↑⟩`.
    pub p: f64,
    /// Unit-modulus phase of `ψ↑ψ↓*`.
    pub coherence_phase: C64,
    pub v: C64,
}

impl QubitDephasingState {
    pub fn new(p: f64, coherence_phase: C64, v: C64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("population {p} outside [0, 1]")));
        }
        if (coherence_phase.norm() - 1.0).abs() > ENSEMBLE_TOL {
            return Err(Error::Domain(format!(
                "coherence phase has modulus {}",
                coherence_phase.norm()
            )));
        }
        if !v.is_finite() || v.norm() > 1.0 + ENSEMBLE_TOL {
            return Err(Error::Domain(format!(
                "visibility modulus {} exceeds 1",
                v.norm()
            )));
        }
        Ok(Self {
            p,
            coherence_phase,
            v,
        })
    }

    /// Off-diagonal element `ρ↑↓`.
    pub fn coherence(&self) -> C64 {
        self.coherence_phase * self.v * (self.p * (1.0 - self.p)).sqrt()
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        let c = self.coherence();
        let m = ComplexMatrix::new(
            2,
            2,
            vec![
                C64::new(self.p, 0.0),
                c,
                c.conj(),
                C64::new(1.0 - self.p, 0.0),
            ],
        )?;
        DensityMatrix::new(m)
    }
}

/// `[[p, √(p(1−p))·phase·v], [c.c., 1−p]]`.
pub fn dephased_qubit(p: f64, phase: C64, v: C64) -> Result<DensityMatrix> {
    QubitDephasingState::new(p, phase, v)?.to_density()
}

pub(crate) fn require_unit(psi: &[C64], tol: f64) -> Result<()> {
    let norm_sqr: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if (norm_sqr - 1.0).abs() > tol || !norm_sqr.is_finite() {
        return Err(Error::Domain(format!(
            "vector has squared norm {norm_sqr}, expected 1"
        )));
    }
    Ok(())
}

pub(crate) fn require_probabilities(w: &[f64]) -> Result<()> {
    if let Some(bad) = w.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::Domain(format!("weight {bad} is not a probability")));
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > ENSEMBLE_TOL {
        return Err(Error::Domain(format!("weights sum to {total}, expected 1")));
    }
    Ok(())
}

//! Quantum channels in Kraus form and their Choi matrices.
//!
//! A channel is stored as the list of Kraus operators the caller supplied;
//! only [`choi_to_kraus`] and [`compose`] rewrite that list into the canonical
//! spectral form. Equality of channels is decided on Choi matrices, which are
//! unique even though Kraus sets are not.

use std::fmt;
use std::str::FromStr;

use crate::eigen::{hermitian_eigen, hermitian_eigenvalues, HERMITIAN_TOL};
use crate::error::{Error, Result};
use crate::matrix::{pauli, BipartiteIndex, ComplexMatrix, Subsystem, C64, ONE, ZERO};
use crate::state::{require_probabilities, require_unit, DensityMatrix, ENSEMBLE_TOL};

/// Max-entry tolerance on `Σ K†K − 1` for a trace-preserving channel.
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// Spectral weight below which canonicalization drops a Kraus operator.
pub const CANONICAL_TOL: f64 = 1e-12;

/// Unitarity tolerance for user-supplied unitaries.
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct KrausChannel {
    dim: usize,
    ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Trace-preserving channel from Kraus operators.
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        Self::with_tolerance(ops, COMPLETENESS_TOL)
    }

    pub(crate) fn with_tolerance(ops: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let ch = Self::unchecked(ops)?;
        let defect = ch.completeness_defect();
        if defect > tol {
            return Err(Error::NotTracePreserving { defect });
        }
        Ok(ch)
    }

    /// Shape checks only; the result may fail `Σ K†K = 1`.
    pub(crate) fn unchecked(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::Shape("channel needs at least one Kraus operator".into()))?;
        first.require_square("Kraus operator")?;
        let dim = first.rows();
        if let Some(bad) = ops.iter().find(|k| k.rows() != dim || k.cols() != dim) {
            return Err(Error::Shape(format!(
                "Kraus operator is {}x{}, expected {dim}x{dim}",
                bad.rows(),
                bad.cols()
            )));
        }
        Ok(Self { dim, ops })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            ops: vec![ComplexMatrix::identity(dim)],
        }
    }

    /// Single Kraus operator `U`.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        require_unitary(&u)?;
        Self::new(vec![u])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// `Σ_j K_j ρ K_j†`, revalidated as a state.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::new(self.apply_matrix(rho.matrix())?)
    }

    /// `Σ_j K_j m K_j†` on an arbitrary square matrix.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.rows() != self.dim || m.cols() != self.dim {
            return Err(Error::Shape(format!(
                "channel of dimension {} applied to {}x{} matrix",
                self.dim,
                m.rows(),
                m.cols()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for k in &self.ops {
            out = &out + &(&(k * m) * &k.adjoint());
        }
        Ok(out)
    }

    /// `max |Σ_j K_j†K_j − 1|`.
    pub fn completeness_defect(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.dim, self.dim);
        for k in &self.ops {
            sum = &sum + &(&k.adjoint() * k);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(self.dim))
            .unwrap()
    }

    /// `(Φ ⊗ id)(|Ω⟩⟨Ω|)` with `|Ω⟩ = Σ_i |ii⟩/√d`.
    pub fn choi(&self) -> ChoiMatrix {
        let d = self.dim;
        let mut c = ComplexMatrix::zeros(d * d, d * d);
        for k in &self.ops {
            // vec(K)[(a, i)] = K[a, i]
            c = &c + &ComplexMatrix::projector(k.as_slice());
        }
        ChoiMatrix {
            dim: d,
            matrix: c.scale(C64::new(1.0 / d as f64, 0.0)),
        }
    }
}

/// `(Φ ⊗ id)` applied to the normalized maximally entangled projector.
#[derive(Clone, Debug)]
pub struct ChoiMatrix {
    dim: usize,
    matrix: ComplexMatrix,
}

impl ChoiMatrix {
    /// Wraps an existing `dim² × dim²` matrix; it must be Hermitian with unit trace.
    pub fn new(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        if dim == 0 || !matrix.is_square() || matrix.rows() != dim * dim {
            return Err(Error::Shape(format!(
                "Choi matrix for dimension {dim} must be {0}x{0}",
                dim * dim
            )));
        }
        let defect = matrix.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian { defect });
        }
        let tr = matrix.trace()?;
        if (tr - ONE).norm() > HERMITIAN_TOL {
            return Err(Error::NotNormalized { trace: tr.re });
        }
        Ok(Self { dim, matrix })
    }

    /// Choi matrix of an arbitrary linear map on `dim × dim` matrices.
    pub fn of_map(dim: usize, map: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Result<Self> {
        let mut c = ComplexMatrix::zeros(dim * dim, dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let mut e = ComplexMatrix::zeros(dim, dim);
                e[(i, j)] = ONE;
                let image = map(&e);
                if image.rows() != dim || image.cols() != dim {
                    return Err(Error::Shape("map changes the matrix dimension".into()));
                }
                for a in 0..dim {
                    for b in 0..dim {
                        c[(a * dim + i, b * dim + j)] = image[(a, b)] / dim as f64;
                    }
                }
            }
        }
        Self::new(dim, c)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// CP iff the smallest eigenvalue is at least `−tol`.
    pub fn is_completely_positive(&self, tol: f64) -> Result<CpVerdict> {
        let min_eigenvalue = hermitian_eigenvalues(&self.matrix, HERMITIAN_TOL)?[0];
        Ok(CpVerdict {
            cp: min_eigenvalue >= -tol,
            min_eigenvalue,
        })
    }

    /// `max |d · tr_A(C) − 1|`, zero for trace-preserving maps (the output
    /// factor is A).
    pub fn trace_preservation_defect(&self) -> f64 {
        let idx = BipartiteIndex {
            dim_a: self.dim,
            dim_b: self.dim,
        };
        let reduced = self.matrix.partial_trace(idx, Subsystem::B).unwrap();
        reduced
            .scale(C64::new(self.dim as f64, 0.0))
            .max_abs_diff(&ComplexMatrix::identity(self.dim))
            .unwrap()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CpVerdict {
    pub cp: bool,
    pub min_eigenvalue: f64,
}

/// Kraus operators from the spectral decomposition of a Choi matrix,
/// dropping eigenvalues at or below `tol`.
pub fn choi_to_kraus(c: &ChoiMatrix, tol: f64) -> Result<KrausChannel> {
    let d = c.dim;
    let tp_defect = c.trace_preservation_defect();
    let eig = hermitian_eigen(&c.matrix, HERMITIAN_TOL)?;
    if eig.values[0] < -tol {
        return Err(Error::NotCompletelyPositive {
            min_eigenvalue: eig.values[0],
        });
    }
    if tp_defect > tol.max(CANONICAL_TOL) {
        return Err(Error::NotTracePreserving { defect: tp_defect });
    }
    let mut ops = Vec::new();
    for (k, &lambda) in eig.values.iter().enumerate().rev() {
        if lambda <= tol {
            continue;
        }
        let scale = (d as f64 * lambda).sqrt();
        let v = eig.vector(k);
        ops.push(ComplexMatrix::from_fn(d, d, |a, i| v[a * d + i] * scale));
    }
    if ops.is_empty() {
        return Err(Error::NotTracePreserving { defect: 1.0 });
    }
    KrausChannel::with_tolerance(ops, tol.max(COMPLETENESS_TOL))
}

/// Diagnostics for a Kraus set that may fail to be a channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrausReport {
    pub dim: usize,
    pub count: usize,
    /// `max |Σ K†K − 1|`.
    pub completeness_defect: f64,
    pub choi_min_eigenvalue: f64,
}

pub fn inspect_kraus(ops: Vec<ComplexMatrix>) -> Result<KrausReport> {
    let ch = KrausChannel::unchecked(ops)?;
    let choi = ch.choi();
    Ok(KrausReport {
        dim: ch.dim,
        count: ch.len(),
        completeness_defect: ch.completeness_defect(),
        choi_min_eigenvalue: hermitian_eigenvalues(&choi.matrix, HERMITIAN_TOL)?[0],
    })
}

/// Max-entry distance between Choi matrices.
pub fn choi_distance(a: &KrausChannel, b: &KrausChannel) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::Shape(format!(
            "channels act on dimensions {} and {}",
            a.dim, b.dim
        )));
    }
    a.choi().matrix.max_abs_diff(&b.choi().matrix)
}

pub fn channels_equal(a: &KrausChannel, b: &KrausChannel, tol: f64) -> Result<bool> {
    Ok(choi_distance(a, b)? <= tol)
}

/// `outer ∘ inner`, canonicalized to at most `dim²` operators.
pub fn compose(outer: &KrausChannel, inner: &KrausChannel) -> Result<KrausChannel> {
    if outer.dim != inner.dim {
        return Err(Error::Shape(format!(
            "cannot compose channels on dimensions {} and {}",
            outer.dim, inner.dim
        )));
    }
    let products = outer
        .ops
        .iter()
        .flat_map(|ko| inner.ops.iter().map(move |ki| ko * ki))
        .collect();
    let raw = KrausChannel::unchecked(products)?;
    choi_to_kraus(&raw.choi(), CANONICAL_TOL)
}

/// `{√w_j U_j}`.
pub fn random_unitary_channel(
    weights: &[f64],
    unitaries: &[ComplexMatrix],
) -> Result<KrausChannel> {
    if weights.len() != unitaries.len() || weights.is_empty() {
        return Err(Error::Shape(format!(
            "{} weights for {} unitaries",
            weights.len(),
            unitaries.len()
        )));
    }
    require_probabilities(weights)?;
    for u in unitaries {
        require_unitary(u)?;
    }
    let ops = weights
        .iter()
        .zip(unitaries)
        .map(|(&w, u)| u.scale(C64::new(w.sqrt(), 0.0)))
        .collect();
    KrausChannel::new(ops)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub fn matrix(&self) -> ComplexMatrix {
        match self {
            PauliAxis::X => pauli::sigma_x(),
            PauliAxis::Y => pauli::sigma_y(),
            PauliAxis::Z => pauli::sigma_z(),
        }
    }
}

impl FromStr for PauliAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(PauliAxis::X),
            "y" => Ok(PauliAxis::Y),
            "z" => Ok(PauliAxis::Z),
            other => Err(Error::Domain(format!("unknown Pauli axis {other:?}"))),
        }
    }
}

impl fmt::Display for PauliAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PauliAxis::X => "x",
            PauliAxis::Y => "y",
            PauliAxis::Z => "z",
        })
    }
}

/// `{√(1−p)·1, √p·σ_axis}`: phase flip (z), bit flip (x) or both (y).
pub fn pauli_flip_channel(axis: PauliAxis, flip_probability: f64) -> Result<KrausChannel> {
    let p = flip_probability;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "flip probability {p} outside [0, 1]"
        )));
    }
    KrausChannel::new(vec![
        ComplexMatrix::identity(2).scale(C64::new((1.0 - p).sqrt(), 0.0)),
        axis.matrix().scale(C64::new(p.sqrt(), 0.0)),
    ])
}

/// Qubit channel that multiplies `ρ↑↓` by `v` and leaves populations alone.
///
/// Real `v` uses the pair `1·√((1+v)/2)`, `σz·√((1−v)/2)`; complex `v` uses
/// `diag(1, v*)` and `diag(0, √(1−|v|²))`.
pub fn dephasing_channel(v: C64) -> Result<KrausChannel> {
    if !v.is_finite() || v.norm() > 1.0 + ENSEMBLE_TOL {
        return Err(Error::Domain(format!(
            "visibility modulus {} exceeds 1",
            v.norm()
        )));
    }
    let ops = if v.im == 0.0 {
        let v = v.re.clamp(-1.0, 1.0);
        vec![
            ComplexMatrix::identity(2).scale(C64::new(((1.0 + v) / 2.0).sqrt(), 0.0)),
            pauli::sigma_z().scale(C64::new(((1.0 - v) / 2.0).sqrt(), 0.0)),
        ]
    } else {
        let rest = (1.0 - v.norm_sqr()).max(0.0).sqrt();
        vec![
            ComplexMatrix::from_diag(&[ONE, v.conj()]),
            ComplexMatrix::from_diag(&[ZERO, C64::new(rest, 0.0)]),
        ]
    };
    KrausChannel::new(ops)
}

/// Non-selective projective measurement in an orthonormal basis.
pub fn measurement_channel(basis: &[Vec<C64>]) -> Result<KrausChannel> {
    for phi in basis {
        require_unit(phi, ENSEMBLE_TOL)?;
    }
    KrausChannel::new(
        basis
            .iter()
            .map(|phi| ComplexMatrix::projector(phi))
            .collect(),
    )
}

/// `tr(ρ K†K)`.
pub fn povm_probability(rho: &DensityMatrix, k: &ComplexMatrix) -> Result<f64> {
    if k.rows() != rho.dim() || k.cols() != rho.dim() {
        return Err(Error::Shape(format!(
            "{}x{} measurement operator on dimension {}",
            k.rows(),
            k.cols(),
            rho.dim()
        )));
    }
    Ok(rho.expectation(&(&k.adjoint() * k))?.re)
}

/// Initial bath state: a pure vector, or a mixture of bath basis states.
#[derive(Clone, Debug)]
pub enum BathState {
    Pure(Vec<C64>),
    Mixed(Vec<f64>),
}

/// System coupled to a bath through a joint unitary, bath initially uncorrelated.
#[derive(Clone, Debug)]
pub struct SystemBathModel {
    idx: BipartiteIndex,
    u_sb: ComplexMatrix,
    bath: BathState,
}

impl SystemBathModel {
    pub fn new(dim_s: usize, dim_b: usize, u_sb: ComplexMatrix, bath: BathState) -> Result<Self> {
        let idx = BipartiteIndex::new(dim_s, dim_b)?;
        idx.check(&u_sb)?;
        require_unitary(&u_sb)?;
        match &bath {
            BathState::Pure(chi) => {
                if chi.len() != dim_b {
                    return Err(Error::Shape(format!(
                        "bath vector has length {}, bath dimension is {dim_b}",
                        chi.len()
                    )));
                }
                require_unit(chi, ENSEMBLE_TOL)?;
            }
            BathState::Mixed(w) => {
                if w.len() != dim_b {
                    return Err(Error::Shape(format!(
                        "{} bath weights for bath dimension {dim_b}",
                        w.len()
                    )));
                }
                require_probabilities(w)?;
            }
        }
        Ok(Self { idx, u_sb, bath })
    }

    /// Qubit dephasing: `U|↑⟩|χ_j⟩ = e^{iφ_j}|↑⟩|χ_j⟩`, `U|↓⟩|χ_j⟩ = |↓⟩|χ_j⟩`.
    pub fn dephasing(phases: &[f64], bath: BathState) -> Result<Self> {
        let dim_b = phases.len();
        let mut diag = Vec::with_capacity(2 * dim_b);
        diag.extend(phases.iter().map(|&f| C64::from_polar(1.0, f)));
        diag.extend(std::iter::repeat_n(ONE, dim_b));
        Self::new(2, dim_b, ComplexMatrix::from_diag(&diag), bath)
    }

    pub fn index(&self) -> BipartiteIndex {
        self.idx
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.u_sb
    }

    pub fn bath(&self) -> &BathState {
        &self.bath
    }

    pub fn bath_density(&self) -> ComplexMatrix {
        match &self.bath {
            BathState::Pure(chi) => ComplexMatrix::projector(chi),
            BathState::Mixed(w) => {
                ComplexMatrix::from_diag(&w.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>())
            }
        }
    }

    /// `tr_B[U (ρ_S ⊗ ρ_B) U†]` computed on the full space.
    pub fn evolve_reduced(&self, rho_s: &DensityMatrix) -> Result<DensityMatrix> {
        if rho_s.dim() != self.idx.dim_a {
            return Err(Error::Shape("system state has the wrong dimension".into()));
        }
        let joint = rho_s.matrix().kron(&self.bath_density());
        let evolved = &(&self.u_sb * &joint) * &self.u_sb.adjoint();
        DensityMatrix::new(evolved.partial_trace(self.idx, Subsystem::A)?)
    }

    /// `⟨χ_j|U|χ⟩` as a system operator.
    fn bath_element(&self, j: usize, chi: &[C64]) -> ComplexMatrix {
        let (ds, db) = (self.idx.dim_a, self.idx.dim_b);
        ComplexMatrix::from_fn(ds, ds, |a, b| {
            chi.iter()
                .enumerate()
                .map(|(k, &x)| self.u_sb[(a * db + j, b * db + k)] * x)
                .sum()
        })
    }
}

/// `K_j = ⟨χ_j|U_SB|χ(0)⟩`; a mixed bath contributes each basis state's set
/// scaled by `√w`.
pub fn kraus_from_system_bath(m: &SystemBathModel) -> Result<KrausChannel> {
    let db = m.idx.dim_b;
    let ops = match &m.bath {
        BathState::Pure(chi) => (0..db).map(|j| m.bath_element(j, chi)).collect(),
        BathState::Mixed(w) => {
            let mut ops = Vec::new();
            for (k, &wk) in w.iter().enumerate() {
                if wk == 0.0 {
                    continue;
                }
                let mut basis = vec![ZERO; db];
                basis[k] = ONE;
                for j in 0..db {
                    ops.push(m.bath_element(j, &basis).scale(C64::new(wk.sqrt(), 0.0)));
                }
            }
            ops
        }
    };
    KrausChannel::new(ops)
}

/// `⟨χ↓|χ↑⟩`.
pub fn pointer_overlap(chi_up: &[C64], chi_down: &[C64]) -> Result<C64> {
    if chi_up.len() != chi_down.len() {
        return Err(Error::Shape(format!(
            "pointer states have lengths {} and {}",
            chi_up.len(),
            chi_down.len()
        )));
    }
    require_unit(chi_up, ENSEMBLE_TOL)?;
    require_unit(chi_down, ENSEMBLE_TOL)?;
    Ok(chi_down.iter().zip(chi_up).map(|(d, u)| d.conj() * u).sum())
}

pub(crate) fn require_unitary(u: &ComplexMatrix) -> Result<()> {
    u.require_square("unitary")?;
    let defect = (&u.adjoint() * u)
        .max_abs_diff(&ComplexMatrix::identity(u.rows()))
        .unwrap();
    if defect > UNITARY_TOL {
        return Err(Error::Domain(format!(
            "matrix is not unitary (defect {defect:e})"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::pauli::{down, sigma_minus, sigma_x, sigma_z, up};
    use crate::random::{random_density, random_kraus_ops, random_unitary, rng_for};
    use crate::state::dephased_qubit;

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        a.max_abs_diff(b).unwrap() <= tol
    }

    fn deph(v: f64) -> KrausChannel {
        dephasing_channel(c(v)).unwrap()
    }

    #[test]
    fn apply_unitary_and_dephasing() {
        let mut rng = rng_for(3, 0);
        let u = random_unitary(&mut rng, 3);
        let rho = DensityMatrix::new(random_density(&mut rng, 3)).unwrap();
        let out = KrausChannel::unitary(u.clone())
            .unwrap()
            .apply(&rho)
            .unwrap();
        assert!(close(
            out.matrix(),
            &(&(&u * rho.matrix()) * &u.adjoint()),
            1e-14
        ));

        let phase = C64::from_polar(1.0, 0.9);
        for v in [0.0, 0.3, -0.4, 1.0] {
            let out = deph(v)
                .apply(&dephased_qubit(0.3, phase, c(1.0)).unwrap())
                .unwrap();
            let expected = dephased_qubit(0.3, phase, c(v)).unwrap();
            assert!(close(out.matrix(), expected.matrix(), 1e-15));
        }
        let v = C64::from_polar(0.6, -1.3);
        let out = dephasing_channel(v)
            .unwrap()
            .apply(&dephased_qubit(0.7, phase, c(1.0)).unwrap())
            .unwrap();
        assert!(close(
            out.matrix(),
            dephased_qubit(0.7, phase, v).unwrap().matrix(),
            1e-15
        ));
    }

    #[test]
    fn measurement_kraus() {
        let plus = vec![c(S), c(S)];
        let minus = vec![c(S), c(-S)];
        let ch = measurement_channel(&[plus.clone(), minus.clone()]).unwrap();
        let rho = dephased_qubit(0.8, c(1.0), c(0.5)).unwrap();
        let p_plus = rho.measure_probability(&plus).unwrap();
        let p_minus = rho.measure_probability(&minus).unwrap();
        let expected = &ComplexMatrix::projector(&plus).scale(c(p_plus))
            + &ComplexMatrix::projector(&minus).scale(c(p_minus));
        assert!(close(ch.apply(&rho).unwrap().matrix(), &expected, 1e-15));
    }

    #[test]
    fn completeness_defects() {
        let v: f64 = 0.5;
        let pair = KrausChannel::new(vec![
            ComplexMatrix::identity(2).scale(c(((1.0 + v) / 2.0).sqrt())),
            sigma_z().scale(c(((1.0 - v) / 2.0).sqrt())),
        ])
        .unwrap();
        assert!(pair.completeness_defect() < 1e-15);

        let half = KrausChannel::unchecked(vec![ComplexMatrix::identity(2).scale(c(0.5))]).unwrap();
        assert!((half.completeness_defect() - 0.75).abs() < 1e-15);
        assert!(matches!(
            KrausChannel::new(vec![ComplexMatrix::identity(2).scale(c(0.5))]),
            Err(Error::NotTracePreserving { .. })
        ));

        let mut rng = rng_for(4, 0);
        let us: Vec<_> = (0..3).map(|_| random_unitary(&mut rng, 2)).collect();
        let ru = random_unitary_channel(&[0.2, 0.5, 0.3], &us).unwrap();
        assert!(ru.completeness_defect() < 1e-14);
    }

    #[test]
    fn choi_examples() {
        let bell = ComplexMatrix::projector(&[c(S), c(0.0), c(0.0), c(S)]);
        assert!(close(
            KrausChannel::identity(2).choi().matrix(),
            &bell,
            1e-15
        ));

        let flip = KrausChannel::new(vec![sigma_z()]).unwrap();
        let anti = ComplexMatrix::projector(&[c(S), c(0.0), c(0.0), c(-S)]);
        assert!(close(flip.choi().matrix(), &anti, 1e-15));

        let mut classical = ComplexMatrix::zeros(4, 4);
        classical[(0, 0)] = c(0.5);
        classical[(3, 3)] = c(0.5);
        assert!(close(deph(0.0).choi().matrix(), &classical, 1e-15));
    }

    #[test]
    fn choi_of_map_matches_kraus_choi() {
        let mut rng = rng_for(5, 0);
        let ch = KrausChannel::new(random_kraus_ops(&mut rng, 3, 4)).unwrap();
        let via_map = ChoiMatrix::of_map(3, |m| ch.apply_matrix(m).unwrap()).unwrap();
        assert!(close(via_map.matrix(), ch.choi().matrix(), 1e-14));
        assert!(via_map.trace_preservation_defect() < 1e-14);
    }

    #[test]
    fn complete_positivity_verdicts() {
        let transpose = ChoiMatrix::of_map(2, |m| m.transpose()).unwrap();
        let v = transpose.is_completely_positive(1e-10).unwrap();
        assert!(!v.cp);
        assert!((v.min_eigenvalue + 0.5).abs() < 1e-14);

        let id = KrausChannel::identity(2)
            .choi()
            .is_completely_positive(1e-10)
            .unwrap();
        assert!(id.cp);
        assert!(id.min_eigenvalue.abs() < 1e-14);

        let mut rng = rng_for(6, 0);
        let ch = KrausChannel::new(random_kraus_ops(&mut rng, 2, 3)).unwrap();
        assert!(ch.choi().is_completely_positive(1e-10).unwrap().cp);
    }

    #[test]
    fn choi_to_kraus_examples() {
        let id = choi_to_kraus(&KrausChannel::identity(2).choi(), CANONICAL_TOL).unwrap();
        assert_eq!(id.len(), 1);
        // single operator is the identity up to a global phase
        let k = &id.ops()[0];
        let phase = k[(0, 0)];
        assert!((phase.norm() - 1.0).abs() < 1e-14);
        assert!(close(k, &ComplexMatrix::identity(2).scale(phase), 1e-14));

        let d = deph(0.5);
        let back = choi_to_kraus(&d.choi(), CANONICAL_TOL).unwrap();
        assert_eq!(back.len(), 2);
        assert!(channels_equal(&back, &d, 1e-14).unwrap());

        let mut rng = rng_for(7, 0);
        let us: Vec<_> = (0..3).map(|_| random_unitary(&mut rng, 2)).collect();
        let ru = random_unitary_channel(&[0.3, 0.3, 0.4], &us).unwrap();
        let back = choi_to_kraus(&ru.choi(), CANONICAL_TOL).unwrap();
        assert!(back.len() <= 4);
        assert!(channels_equal(&back, &ru, 1e-12).unwrap());
    }

    #[test]
    fn inspect_reports_defects() {
        let r = inspect_kraus(vec![ComplexMatrix::identity(2).scale(c(2.0))]).unwrap();
        assert_eq!((r.dim, r.count), (2, 1));
        assert!((r.completeness_defect - 3.0).abs() < 1e-15);
        assert!(r.choi_min_eigenvalue.abs() < 1e-15);
        let ok = inspect_kraus(dephasing_channel(c(0.4)).unwrap().ops().to_vec()).unwrap();
        assert!(ok.completeness_defect < 1e-15);
        assert!(inspect_kraus(vec![]).is_err());
    }

    #[test]
    fn choi_to_kraus_errors() {
        let transpose = ChoiMatrix::of_map(2, |m| m.transpose()).unwrap();
        assert!(matches!(
            choi_to_kraus(&transpose, 1e-10),
            Err(Error::NotCompletelyPositive { .. })
        ));
        // ρ ↦ ⟨↑|ρ|↑⟩ · 1 doubles the trace of |↑⟩⟨↑|
        let not_tp = ChoiMatrix::new(
            2,
            ComplexMatrix::identity(2)
                .scale(c(0.5))
                .kron(&ComplexMatrix::projector(&up())),
        )
        .unwrap();
        assert!(matches!(
            choi_to_kraus(&not_tp, 1e-10),
            Err(Error::NotTracePreserving { .. })
        ));
    }

    #[test]
    fn unitary_freedom() {
        let mut rng = rng_for(8, 0);
        let ops = random_kraus_ops(&mut rng, 2, 3);
        let ch = KrausChannel::new(ops.clone()).unwrap();

        let phased: Vec<_> = ops
            .iter()
            .enumerate()
            .map(|(j, k)| k.scale(C64::from_polar(1.0, 0.7 * j as f64 + 0.1)))
            .collect();
        assert!(channels_equal(&ch, &KrausChannel::new(phased).unwrap(), 1e-13).unwrap());

        let u = random_unitary(&mut rng, 3);
        let mixed: Vec<_> = (0..3)
            .map(|jp| {
                let mut acc = ComplexMatrix::zeros(2, 2);
                for (j, k) in ops.iter().enumerate() {
                    acc = &acc + &k.scale(u[(j, jp)]);
                }
                acc
            })
            .collect();
        assert!(channels_equal(&ch, &KrausChannel::new(mixed).unwrap(), 1e-13).unwrap());
        assert!(!channels_equal(&deph(0.3), &deph(0.5), 1e-3).unwrap());
        assert!((choi_distance(&deph(0.3), &deph(0.5)).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn composition() {
        let d = deph(0.4);
        assert!(
            channels_equal(&compose(&KrausChannel::identity(2), &d).unwrap(), &d, 1e-13).unwrap()
        );
        assert!(channels_equal(
            &compose(&deph(0.5), &deph(0.3)).unwrap(),
            &deph(0.15),
            1e-13
        )
        .unwrap());
        let flip = KrausChannel::new(vec![sigma_z()]).unwrap();
        assert!(channels_equal(
            &compose(&flip, &flip).unwrap(),
            &KrausChannel::identity(2),
            1e-13
        )
        .unwrap());

        let mut rng = rng_for(9, 0);
        let a = KrausChannel::new(random_kraus_ops(&mut rng, 2, 4)).unwrap();
        let b = KrausChannel::new(random_kraus_ops(&mut rng, 2, 4)).unwrap();
        let ab = compose(&a, &b).unwrap();
        assert!(ab.len() <= 4);
        let rho = DensityMatrix::new(random_density(&mut rng, 2)).unwrap();
        let direct = a.apply(&b.apply(&rho).unwrap()).unwrap();
        assert!(close(
            ab.apply(&rho).unwrap().matrix(),
            direct.matrix(),
            1e-13
        ));
        assert!(compose(&a, &KrausChannel::identity(3)).is_err());
    }

    #[test]
    fn random_unitary_examples() {
        let mut rng = rng_for(10, 0);
        let u = random_unitary(&mut rng, 2);
        let single = random_unitary_channel(&[1.0], &[u.clone()]).unwrap();
        assert!(channels_equal(&single, &KrausChannel::unitary(u).unwrap(), 1e-14).unwrap());

        let id = ComplexMatrix::identity(2);
        let half = random_unitary_channel(&[0.5, 0.5], &[id.clone(), sigma_z()]).unwrap();
        assert!(channels_equal(&half, &deph(0.0), 1e-15).unwrap());

        let v = 0.35;
        let pair = random_unitary_channel(
            &[(1.0 + v) / 2.0, (1.0 - v) / 2.0],
            &[id.clone(), sigma_z()],
        )
        .unwrap();
        assert!(channels_equal(&pair, &deph(v), 1e-15).unwrap());

        assert!(matches!(
            random_unitary_channel(&[1.0], &[sigma_minus()]),
            Err(Error::Domain(_))
        ));
        assert!(random_unitary_channel(&[0.5, 0.6], &[id.clone(), id]).is_err());
    }

    #[test]
    fn pauli_flips() {
        let v = 0.2;
        let z = pauli_flip_channel(PauliAxis::Z, (1.0 - v) / 2.0).unwrap();
        assert!(channels_equal(&z, &deph(v), 1e-15).unwrap());

        let x = pauli_flip_channel(PauliAxis::X, 1.0).unwrap();
        let out = x.apply(&DensityMatrix::pure(&up()).unwrap()).unwrap();
        assert!(close(
            out.matrix(),
            &ComplexMatrix::projector(&down()),
            1e-15
        ));

        for axis in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
            let ch = pauli_flip_channel(axis, 0.0).unwrap();
            assert!(channels_equal(&ch, &KrausChannel::identity(2), 1e-15).unwrap());
            assert_eq!(axis.to_string().parse::<PauliAxis>().unwrap(), axis);
        }
        assert!(pauli_flip_channel(PauliAxis::Y, 1.5).is_err());
        assert!("w".parse::<PauliAxis>().is_err());
    }

    #[test]
    fn povm_probabilities() {
        let rho = dephased_qubit(0.3, C64::from_polar(1.0, 0.2), c(0.8)).unwrap();
        let phi = vec![c(0.6), C64::new(0.0, 0.8)];
        let proj = ComplexMatrix::projector(&phi);
        assert!(
            (povm_probability(&rho, &proj).unwrap() - rho.measure_probability(&phi).unwrap()).abs()
                < 1e-15
        );
        assert!((povm_probability(&rho, &ComplexMatrix::identity(2)).unwrap() - 1.0).abs() < 1e-15);
        let gdt: f64 = 1e-3;
        let k = sigma_minus().scale(c(gdt.sqrt()));
        let up_state = DensityMatrix::pure(&up()).unwrap();
        assert!((povm_probability(&up_state, &k).unwrap() - gdt).abs() < 1e-18);
        assert!(povm_probability(&up_state, &ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn system_bath_kraus() {
        let mut rng = rng_for(11, 0);
        let us = random_unitary(&mut rng, 2);
        let chi = crate::random::random_state_vector(&mut rng, 3);
        let m = SystemBathModel::new(
            2,
            3,
            us.kron(&ComplexMatrix::identity(3)),
            BathState::Pure(chi),
        )
        .unwrap();
        let ch = kraus_from_system_bath(&m).unwrap();
        assert!(channels_equal(&ch, &KrausChannel::unitary(us).unwrap(), 1e-14).unwrap());

        let w = [0.2, 0.5, 0.3];
        let phases = [0.4, -2.0, 1.3];
        let v: C64 = w
            .iter()
            .zip(&phases)
            .map(|(&w, &f)| C64::from_polar(w, f))
            .sum();
        let mixed = SystemBathModel::dephasing(&phases, BathState::Mixed(w.to_vec())).unwrap();
        let ch = kraus_from_system_bath(&mixed).unwrap();
        assert!(channels_equal(&ch, &dephasing_channel(v).unwrap(), 1e-14).unwrap());

        let superposed: Vec<C64> = w.iter().map(|x| c(x.sqrt())).collect();
        let pure = SystemBathModel::dephasing(&phases, BathState::Pure(superposed)).unwrap();
        let ch = kraus_from_system_bath(&pure).unwrap();
        assert!(channels_equal(&ch, &dephasing_channel(v).unwrap(), 1e-14).unwrap());

        let cancel = SystemBathModel::dephasing(
            &[0.0, std::f64::consts::PI],
            BathState::Mixed(vec![0.5, 0.5]),
        )
        .unwrap();
        assert!(
            channels_equal(&kraus_from_system_bath(&cancel).unwrap(), &deph(0.0), 1e-15).unwrap()
        );

        assert!(SystemBathModel::new(
            2,
            2,
            sigma_minus().kron(&ComplexMatrix::identity(2)),
            BathState::Mixed(vec![1.0, 0.0])
        )
        .is_err());
        assert!(SystemBathModel::dephasing(&[0.0, 1.0], BathState::Mixed(vec![0.6, 0.6])).is_err());
    }

    #[test]
    fn system_bath_channel_matches_full_evolution() {
        let mut rng = rng_for(12, 0);
        let u = random_unitary(&mut rng, 6);
        let chi = crate::random::random_state_vector(&mut rng, 3);
        let rho = DensityMatrix::new(random_density(&mut rng, 2)).unwrap();
        for bath in [BathState::Pure(chi), BathState::Mixed(vec![0.1, 0.6, 0.3])] {
            let m = SystemBathModel::new(2, 3, u.clone(), bath).unwrap();
            let via_kraus = kraus_from_system_bath(&m).unwrap().apply(&rho).unwrap();
            let via_trace = m.evolve_reduced(&rho).unwrap();
            assert!(close(via_kraus.matrix(), via_trace.matrix(), 1e-14));
        }
    }

    #[test]
    fn pointer_overlaps() {
        let chi = vec![c(0.6), C64::new(0.0, 0.8)];
        assert!((pointer_overlap(&chi, &chi).unwrap() - c(1.0)).norm() < 1e-15);
        assert_eq!(pointer_overlap(&up(), &down()).unwrap(), c(0.0));

        let w: [f64; 3] = [0.5, 0.25, 0.25];
        let phases = [1.0, -0.5, 2.5];
        let up_state: Vec<C64> = w
            .iter()
            .zip(&phases)
            .map(|(&w, &f)| C64::from_polar(w.sqrt(), f))
            .collect();
        let down_state: Vec<C64> = w.iter().map(|x| c(x.sqrt())).collect();
        let expected: C64 = w
            .iter()
            .zip(&phases)
            .map(|(&w, &f)| C64::from_polar(w, f))
            .sum();
        assert!((pointer_overlap(&up_state, &down_state).unwrap() - expected).norm() < 1e-15);
        assert!(pointer_overlap(&[c(1.0), c(1.0)], &up()).is_err());
        assert!(pointer_overlap(&up(), &[c(1.0)]).is_err());
    }

    #[test]
    fn transpose_map_is_positive_on_sample() {
        let mut rng = rng_for(13, 0);
        for _ in 0..50 {
            let rho = random_density(&mut rng, 2);
            let vals = hermitian_eigenvalues(&rho.transpose(), HERMITIAN_TOL).unwrap();
            assert!(vals[0] >= -1e-12);
        }
        assert_eq!(sigma_x().transpose(), sigma_x());
    }
}

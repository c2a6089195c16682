//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.
//!
//! Sized for the matrices this crate produces (dimension up to ~64). Input is
//! symmetrized as `(m + m†)/2` before rotating.

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};

/// Default max-entry tolerance on `m − m†`.
pub const HERMITIAN_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues ascending; column `k` of `vectors` belongs to `values[k]`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        (0..self.vectors.rows())
            .map(|i| self.vectors[(i, k)])
            .collect()
    }
}

pub fn hermitian_eigenvalues(m: &ComplexMatrix, tol: f64) -> Result<Vec<f64>> {
    hermitian_eigen(m, tol).map(|e| e.values)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &ComplexMatrix, tol: f64) -> Result<f64> {
    Ok(hermitian_eigenvalues(m, tol)?[0])
}

pub fn hermitian_eigen(m: &ComplexMatrix, tol: f64) -> Result<HermitianEigen> {
    m.require_square("eigendecomposition")?;
    let defect = m.hermiticity_defect();
    if defect > tol {
        return Err(Error::NotHermitian { defect });
    }
    let n = m.rows();
    let mut a: Vec<C64> = m.hermitian_part().as_slice().to_vec();
    let mut v: Vec<C64> = ComplexMatrix::identity(n).as_slice().to_vec();
    for i in 0..n {
        a[i * n + i].im = 0.0;
    }

    let total: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let target = (f64::EPSILON * f64::EPSILON * total).max(f64::MIN_POSITIVE);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q].norm_sqr())
            .sum();
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let values = order.iter().map(|&k| a[k * n + k].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, k| v[i * n + order[k]]);
    Ok(HermitianEigen { values, vectors })
}

/// Zeroes `a[p][q]` with `a ← J† a J`, `v ← v J`, where `J = D R` combines a
/// phase `D = diag(1, e^{-iθ})` on `q` and a real Jacobi rotation `R`.
fn rotate(a: &mut [C64], v: &mut [C64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let w = apq / r;
    let wc = w.conj();
    let tau = (a[q * n + q].re - a[p * n + p].re) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * c - akq * wc * s;
        a[k * n + q] = akp * s + akq * wc * c;
    }
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = apk * c - aqk * w * s;
        a[q * n + k] = apk * s + aqk * w * c;
    }
    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = vkp * c - vkq * wc * s;
        v[k * n + q] = vkp * s + vkq * wc * c;
    }
    a[p * n + q] = C64::new(0.0, 0.0);
    a[q * n + p] = C64::new(0.0, 0.0);
    a[p * n + p].im = 0.0;
    a[q * n + q].im = 0.0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{pauli, BipartiteIndex};
    use crate::random::{random_hermitian, rng_for};

    fn assert_close(actual: &[f64], expected: &[f64], tol: f64) {
        assert_eq!(actual.len(), expected.len());
        for (a, e) in actual.iter().zip(expected) {
            assert!((a - e).abs() <= tol, "{actual:?} vs {expected:?}");
        }
    }

    #[test]
    fn small_spectra() {
        assert_close(
            &hermitian_eigenvalues(&pauli::sigma_z(), HERMITIAN_TOL).unwrap(),
            &[-1.0, 1.0],
            1e-15,
        );
        assert_close(
            &hermitian_eigenvalues(&ComplexMatrix::identity(3), HERMITIAN_TOL).unwrap(),
            &[1.0, 1.0, 1.0],
            1e-15,
        );
        assert_close(
            &hermitian_eigenvalues(&pauli::sigma_y(), HERMITIAN_TOL).unwrap(),
            &[-1.0, 1.0],
            1e-15,
        );
    }

    #[test]
    fn bell_partial_transpose_spectrum() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        let bell = ComplexMatrix::projector(&[C64::new(s, 0.0), z, z, C64::new(s, 0.0)]);
        let pt = bell
            .partial_transpose(BipartiteIndex::new(2, 2).unwrap())
            .unwrap();
        assert_close(
            &hermitian_eigenvalues(&pt, HERMITIAN_TOL).unwrap(),
            &[-0.5, 0.5, 0.5, 0.5],
            1e-14,
        );
    }

    #[test]
    fn rejects_non_hermitian() {
        let err = hermitian_eigenvalues(&pauli::sigma_minus(), HERMITIAN_TOL).unwrap_err();
        assert!(matches!(err, Error::NotHermitian { .. }));
    }

    #[test]
    fn tiny_asymmetry_is_absorbed() {
        let mut m = pauli::sigma_x();
        m[(0, 1)] += C64::new(1e-13, 0.0);
        let vals = hermitian_eigenvalues(&m, HERMITIAN_TOL).unwrap();
        assert_close(&vals, &[-1.0, 1.0], 1e-12);
    }

    fn nalgebra_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
        let n = m.rows();
        let na = nalgebra::DMatrix::from_fn(n, n, |i, j| m[(i, j)]);
        let mut vals: Vec<f64> = na.symmetric_eigen().eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        vals
    }

    #[test]
    fn agrees_with_independent_solver_up_to_dim_64() {
        let mut rng = rng_for(11, 0);
        for n in [1usize, 2, 3, 5, 8, 16, 33, 64] {
            let m = random_hermitian(&mut rng, n);
            let ours = hermitian_eigenvalues(&m, HERMITIAN_TOL).unwrap();
            let oracle = nalgebra_eigenvalues(&m);
            assert_close(&ours, &oracle, 1e-10);
        }
    }

    #[test]
    fn eigenvectors_reconstruct_the_matrix() {
        let mut rng = rng_for(12, 0);
        for n in [2usize, 4, 9, 20] {
            let m = random_hermitian(&mut rng, n);
            let e = hermitian_eigen(&m, HERMITIAN_TOL).unwrap();
            let lambda = ComplexMatrix::from_diag(
                &e.values
                    .iter()
                    .map(|&x| C64::new(x, 0.0))
                    .collect::<Vec<_>>(),
            );
            let rebuilt = &(&e.vectors * &lambda) * &e.vectors.adjoint();
            assert!(rebuilt.max_abs_diff(&m).unwrap() < 1e-12);
            let gram = &e.vectors.adjoint() * &e.vectors;
            assert!(gram.max_abs_diff(&ComplexMatrix::identity(n)).unwrap() < 1e-12);
        }
    }

    #[test]
    fn degenerate_spectrum() {
        let mut rng = rng_for(13, 0);
        let u = crate::random::random_unitary(&mut rng, 4);
        let d = ComplexMatrix::from_diag(&[1.0, 1.0, 1.0, -2.0].map(|x| C64::new(x, 0.0)));
        let m = &(&u * &d) * &u.adjoint();
        assert_close(
            &hermitian_eigenvalues(&m, HERMITIAN_TOL).unwrap(),
            &[-2.0, 1.0, 1.0, 1.0],
            1e-13,
        );
    }
}

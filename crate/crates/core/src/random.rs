//! Seeded random states, unitaries and channels.
//!
//! Every generator here takes an explicit RNG; [`rng_for`] derives an
//! independent ChaCha stream from a `(seed, stream)` pair so that callers can
//! split work across threads and still reproduce results bit for bit.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::matrix::{ComplexMatrix, C64};

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    ginibre(rng, n, n).hermitian_part()
}

/// Unit vector, uniformly distributed on the complex sphere.
pub fn random_state_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    let mut v: Vec<C64> = (0..n).map(|_| complex_normal(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

/// Full-rank density matrix `W W† / tr(W W†)` with Ginibre `W`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let w = ginibre(rng, n, n);
    let p = &w * &w.adjoint();
    let tr = p.trace().unwrap();
    p.scale(tr.inv()).hermitian_part()
}

/// Probability vector drawn uniformly from the simplex.
pub fn random_probabilities<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// `rows × cols` matrix with orthonormal columns (`rows ≥ cols`).
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let mut m = ginibre(rng, rows, cols);
    for j in 0..cols {
        for k in 0..j {
            let overlap: C64 = (0..rows).map(|i| m[(i, k)].conj() * m[(i, j)]).sum();
            for i in 0..rows {
                let sub = overlap * m[(i, k)];
                m[(i, j)] -= sub;
            }
        }
        let norm = (0..rows).map(|i| m[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..rows {
            m[(i, j)] /= norm;
        }
    }
    m
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    random_isometry(rng, n, n)
}

/// Kraus operators obtained by slicing a random `(count·dim) × dim` isometry
/// into `count` blocks, so they satisfy `Σ K†K = 1` by construction.
pub fn random_kraus_ops<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    count: usize,
) -> Vec<ComplexMatrix> {
    let v = random_isometry(rng, dim * count, dim);
    (0..count)
        .map(|b| ComplexMatrix::from_fn(dim, dim, |i, j| v[(b * dim + i, j)]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| rng_for(7, 3).random()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let x: u64 = rng_for(7, 3).random();
        let y: u64 = rng_for(7, 4).random();
        assert_ne!(x, y);
    }

    #[test]
    fn isometry_and_kraus_completeness() {
        let mut rng = rng_for(1, 0);
        let u = random_unitary(&mut rng, 5);
        assert!(
            (&u.adjoint() * &u)
                .max_abs_diff(&ComplexMatrix::identity(5))
                .unwrap()
                < 1e-13
        );
        let ops = random_kraus_ops(&mut rng, 3, 4);
        let mut sum = ComplexMatrix::zeros(3, 3);
        for k in &ops {
            sum = &sum + &(&k.adjoint() * k);
        }
        assert!(sum.max_abs_diff(&ComplexMatrix::identity(3)).unwrap() < 1e-13);
    }

    #[test]
    fn density_has_unit_trace() {
        let mut rng = rng_for(2, 0);
        let rho = random_density(&mut rng, 4);
        assert!((rho.trace().unwrap() - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert_eq!(rho.hermiticity_defect(), 0.0);
    }
}

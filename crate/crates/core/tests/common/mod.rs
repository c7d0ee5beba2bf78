#![allow(dead_code)]

use qcharge::quantum::{ComplexMatrix, DensityMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn ginibre(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// GUE sample.
pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let a = ginibre(rng, n);
    (&a + &a.adjoint()).scale_real(0.5)
}

/// Eigenvectors of a GUE matrix: Haar distributed up to column phases.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    random_hermitian(rng, n).eigh().unwrap().1
}

/// ρ = AA†/Tr with A Ginibre; full rank almost surely.
pub fn random_state_matrix(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let a = ginibre(rng, n);
    let m = a.dot(&a.adjoint());
    let t = m.trace().re;
    m.scale_real(1.0 / t)
}

pub fn random_state(rng: &mut impl Rng, dims: Vec<usize>) -> DensityMatrix {
    let n = dims.iter().product();
    DensityMatrix::new(random_state_matrix(rng, n), dims).unwrap()
}

/// A random state of rank `k`.
pub fn random_low_rank(rng: &mut impl Rng, n: usize, k: usize) -> ComplexMatrix {
    let a = ComplexMatrix::from_fn(n, k, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let m = a.dot(&a.adjoint());
    let t = m.trace().re;
    m.scale_real(1.0 / t)
}

/// Kronecker product written out directly (independent of the library's).
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac, br, bc) = (a.rows(), a.cols(), b.rows(), b.cols());
    ComplexMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Superoperator of ρ ↦ AρB on column-stacked vectors: Bᵀ ⊗ A.
pub fn sandwich(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    kron(&b.transpose(), a)
}

/// γ𝒟[A] as a matrix.
pub fn dissipator_matrix(rate: f64, a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    let id = ComplexMatrix::identity(n);
    let ada = a.adjoint().dot(a);
    let mut m = sandwich(a, &a.adjoint());
    m -= &sandwich(&ada, &id).scale_real(0.5);
    m -= &sandwich(&id, &ada).scale_real(0.5);
    m.scale_real(rate)
}

/// −i[H, ·] as a matrix.
pub fn hamiltonian_matrix(h: &ComplexMatrix) -> ComplexMatrix {
    let id = ComplexMatrix::identity(h.rows());
    let m = &sandwich(h, &id) - &sandwich(&id, h);
    m.scale(C64::new(0.0, -1.0))
}

pub fn vec_cols(m: &ComplexMatrix) -> Vec<C64> {
    let n = m.rows();
    (0..n * n).map(|k| m[(k % n, k / n)]).collect()
}

pub fn unvec_cols(v: &[C64], n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |i, j| v[i + j * n])
}

pub fn mat_vec(m: &ComplexMatrix, v: &[C64]) -> Vec<C64> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

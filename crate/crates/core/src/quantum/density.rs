use super::matrix::{ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Default absolute tolerance for Hermiticity, trace and positivity checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// A validated quantum state: Hermitian, unit trace, positive semidefinite.
///
/// `dims` records the subsystem structure, charger first
/// (e.g. `[2, d]` for the charger–battery space).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        Self::with_tolerance(matrix, dims, DEFAULT_TOLERANCE)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, dims: Vec<usize>, tol: f64) -> Result<Self> {
        matrix.require_square()?;
        let total: usize = dims.iter().product();
        if dims.is_empty() || total != matrix.rows() {
            return Err(Error::DimensionMismatch(format!(
                "subsystem dims {dims:?} do not multiply to {}",
                matrix.rows()
            )));
        }
        if !matrix.is_hermitian(tol) {
            return Err(Error::InvalidState("matrix is not Hermitian".into()));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > tol {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min = matrix.eigvalsh()?.first().copied().unwrap_or(0.0);
        if min < -tol {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { matrix, dims })
    }

    /// Wraps a matrix without validation. Callers guarantee the invariants.
    pub(crate) fn new_unchecked(matrix: ComplexMatrix, dims: Vec<usize>) -> Self {
        Self { matrix, dims }
    }

    /// Single-system state with dims `[n]`.
    pub fn single(matrix: ComplexMatrix) -> Result<Self> {
        let n = matrix.rows();
        Self::new(matrix, vec![n])
    }

    /// Pure state |ψ⟩⟨ψ| from an (unnormalized) amplitude vector.
    pub fn pure(psi: &[C64], dims: Vec<usize>) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::outer(&v, &v), dims)
    }

    /// Computational basis projector |k⟩⟨k| on a space with the given dims.
    pub fn basis(index: usize, dims: Vec<usize>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if index >= n {
            return Err(Error::DimensionMismatch(format!(
                "basis index {index} out of range for dimension {n}"
            )));
        }
        let mut m = ComplexMatrix::zeros(n, n);
        m[(index, index)] = ONE;
        Ok(Self { matrix: m, dims })
    }

    /// Diagonal state from a probability vector.
    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        Self::single(ComplexMatrix::from_real_diagonal(probabilities))
    }

    /// ρ_a ⊗ ρ_b with concatenated subsystem dims.
    pub fn product(a: &DensityMatrix, b: &DensityMatrix) -> Result<Self> {
        let m = tensor_product(&a.matrix, &b.matrix)?;
        let dims = a.dims.iter().chain(&b.dims).copied().collect();
        Ok(Self { matrix: m, dims })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Tr[ρ A]
    pub fn expect(&self, op: &ComplexMatrix) -> Result<C64> {
        if op.rows() != self.dim() || op.cols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "operator {}x{} on a {}-dimensional state",
                op.rows(),
                op.cols(),
                self.dim()
            )));
        }
        let n = self.dim();
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self.matrix[(i, k)] * op[(k, i)];
            }
        }
        Ok(acc)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.matrix.eigvalsh()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.first().copied().unwrap_or(0.0))
    }

    pub fn purity(&self) -> f64 {
        self.matrix.data().iter().map(|z| z.norm_sqr()).sum()
    }

    /// ½‖ρ − σ‖₁
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "trace distance between dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        let diff = &self.matrix - &other.matrix;
        Ok(0.5 * diff.eigvalsh()?.iter().map(|x| x.abs()).sum::<f64>())
    }

    /// Reduced state of subsystem `keep`.
    pub fn partial_trace(&self, keep: usize) -> Result<DensityMatrix> {
        if self.dims.len() < 2 {
            return Err(Error::InvalidSubsystem {
                index: keep,
                count: self.dims.len(),
            });
        }
        if keep >= self.dims.len() {
            return Err(Error::InvalidSubsystem {
                index: keep,
                count: self.dims.len(),
            });
        }
        let dk = self.dims[keep];
        let inner: usize = self.dims[keep + 1..].iter().product();
        let outer: usize = self.dims[..keep].iter().product();
        let mut out = ComplexMatrix::zeros(dk, dk);
        // index = (o · dk + k) · inner + r
        for o in 0..outer {
            for r in 0..inner {
                for a in 0..dk {
                    let row = (o * dk + a) * inner + r;
                    for b in 0..dk {
                        let col = (o * dk + b) * inner + r;
                        out[(a, b)] += self.matrix[(row, col)];
                    }
                }
            }
        }
        Ok(DensityMatrix {
            matrix: out,
            dims: vec![dk],
        })
    }
}

/// Kronecker product a ⊗ b of two square matrices (first factor is the
/// slower-varying index).
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.require_square()?;
    b.require_square()?;
    let (na, nb) = (a.rows(), b.rows());
    Ok(ComplexMatrix::from_fn(na * nb, na * nb, |i, j| {
        a[(i / nb, j / nb)] * b[(i % nb, j % nb)]
    }))
}

/// Tr over all subsystems except `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: usize) -> Result<DensityMatrix> {
    rho.partial_trace(keep)
}

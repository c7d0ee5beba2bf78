//! Lindblad-type generators, in operator form and as dense superoperators.
//!
//! Vectorization is column stacking: `vec(ρ)[i + j·D] = ρ[i, j]`, so that
//! `vec(XρY) = (Yᵀ ⊗ X) vec(ρ)`.

use super::matrix::{ComplexMatrix, C64, I, ONE, ZERO};
use super::sparse::SparseMatrix;
use crate::error::{Error, Result};

/// 𝒟[A]ρ = AρA† − ½{A†A, ρ}
pub fn dissipator_apply(a: &ComplexMatrix, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_pair(a, rho)?;
    let ad = a.adjoint();
    let ada = ad.dot(a);
    let mut out = a.dot(rho).dot(&ad);
    out.axpy(C64::new(-0.5, 0.0), &ada.anticommutator(rho));
    Ok(out)
}

/// ℋ[A]ρ = Aρ + ρA† − Tr[ρ(A + A†)]ρ
pub fn innovation_apply(a: &ComplexMatrix, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_pair(a, rho)?;
    let ad = a.adjoint();
    let mut out = &a.dot(rho) + &rho.dot(&ad);
    let shift = rho.dot(&(a + &ad)).trace();
    out.axpy(-shift, rho);
    Ok(out)
}

fn check_pair(a: &ComplexMatrix, rho: &ComplexMatrix) -> Result<()> {
    a.require_square()?;
    rho.require_square()?;
    if a.rows() != rho.rows() {
        return Err(Error::DimensionMismatch(format!(
            "operator of dimension {} applied to state of dimension {}",
            a.rows(),
            rho.rows()
        )));
    }
    Ok(())
}

/// Column-stacked vectorization.
pub fn vectorize(m: &ComplexMatrix) -> Vec<C64> {
    let (r, c) = (m.rows(), m.cols());
    let mut v = vec![ZERO; r * c];
    for i in 0..r {
        for j in 0..c {
            v[i + j * r] = m[(i, j)];
        }
    }
    v
}

/// Inverse of [`vectorize`] for a `dim × dim` matrix.
pub fn unvectorize(v: &[C64], dim: usize) -> Result<ComplexMatrix> {
    if v.len() != dim * dim {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} is not {dim}²",
            v.len()
        )));
    }
    Ok(ComplexMatrix::from_fn(dim, dim, |i, j| v[i + j * dim]))
}

/// One additive piece of a generator.
#[derive(Clone, Debug)]
pub enum GeneratorTerm {
    /// −i[H, ρ]
    Hamiltonian(ComplexMatrix),
    /// γ 𝒟[A]ρ with γ ≥ 0
    Dissipator { rate: f64, op: ComplexMatrix },
    /// i·k·[F, Aρ + ρA†]; the Markovian feedback cross term, which is not of
    /// Lindblad form on its own.
    FeedbackCross {
        gain: f64,
        drive: ComplexMatrix,
        jump: ComplexMatrix,
    },
}

#[derive(Clone, Debug)]
enum Compiled {
    Hamiltonian(SparseMatrix),
    Dissipator {
        rate: f64,
        op: SparseMatrix,
        op_dag_op: SparseMatrix,
    },
    FeedbackCross {
        gain: f64,
        drive: SparseMatrix,
        jump: SparseMatrix,
    },
}

/// A linear generator dρ/dt = 𝓛ρ assembled from terms.
#[derive(Clone, Debug)]
pub struct Generator {
    dim: usize,
    terms: Vec<GeneratorTerm>,
    compiled: Vec<Compiled>,
}

impl Generator {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            terms: Vec::new(),
            compiled: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[GeneratorTerm] {
        &self.terms
    }

    fn check_op(&self, op: &ComplexMatrix) -> Result<()> {
        op.require_square()?;
        if op.rows() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "operator of dimension {} in a generator of dimension {}",
                op.rows(),
                self.dim
            )));
        }
        Ok(())
    }

    pub fn push(&mut self, term: GeneratorTerm) -> Result<()> {
        let compiled = match &term {
            GeneratorTerm::Hamiltonian(h) => {
                self.check_op(h)?;
                Compiled::Hamiltonian(SparseMatrix::from_dense(h))
            }
            GeneratorTerm::Dissipator { rate, op } => {
                self.check_op(op)?;
                if !(*rate >= 0.0) || !rate.is_finite() {
                    return Err(Error::param(
                        "rate",
                        format!("dissipator rate must be finite and non-negative, got {rate}"),
                    ));
                }
                let sp = SparseMatrix::from_dense(op);
                Compiled::Dissipator {
                    rate: *rate,
                    op_dag_op: sp.adjoint().dot_sparse(&sp),
                    op: sp,
                }
            }
            GeneratorTerm::FeedbackCross { gain, drive, jump } => {
                self.check_op(drive)?;
                self.check_op(jump)?;
                if !gain.is_finite() {
                    return Err(Error::param("gain", "feedback gain must be finite"));
                }
                Compiled::FeedbackCross {
                    gain: *gain,
                    drive: SparseMatrix::from_dense(drive),
                    jump: SparseMatrix::from_dense(jump),
                }
            }
        };
        self.terms.push(term);
        self.compiled.push(compiled);
        Ok(())
    }

    pub fn with_hamiltonian(mut self, h: ComplexMatrix) -> Result<Self> {
        self.push(GeneratorTerm::Hamiltonian(h))?;
        Ok(self)
    }

    pub fn with_dissipator(mut self, rate: f64, op: ComplexMatrix) -> Result<Self> {
        self.push(GeneratorTerm::Dissipator { rate, op })?;
        Ok(self)
    }

    pub fn with_feedback_cross(
        mut self,
        gain: f64,
        drive: ComplexMatrix,
        jump: ComplexMatrix,
    ) -> Result<Self> {
        self.push(GeneratorTerm::FeedbackCross { gain, drive, jump })?;
        Ok(self)
    }

    /// 𝓛ρ for a row-major `dim × dim` slice, accumulated into `out`
    /// (which is overwritten).
    pub fn apply_into(&self, rho: &[C64], out: &mut [C64]) {
        let n = self.dim;
        debug_assert_eq!(rho.len(), n * n);
        out.iter_mut().for_each(|z| *z = ZERO);
        let mut tmp = vec![ZERO; n * n];
        for term in &self.compiled {
            match term {
                Compiled::Hamiltonian(h) => {
                    h.left_mul_acc(-I, rho, n, out);
                    h.right_mul_acc(I, rho, n, out);
                }
                Compiled::Dissipator {
                    rate,
                    op,
                    op_dag_op,
                } => {
                    if *rate == 0.0 {
                        continue;
                    }
                    let r = C64::new(*rate, 0.0);
                    tmp.iter_mut().for_each(|z| *z = ZERO);
                    op.right_mul_adjoint_acc(ONE, rho, n, &mut tmp);
                    op.left_mul_acc(r, &tmp, n, out);
                    op_dag_op.left_mul_acc(r * -0.5, rho, n, out);
                    op_dag_op.right_mul_acc(r * -0.5, rho, n, out);
                }
                Compiled::FeedbackCross { gain, drive, jump } => {
                    if *gain == 0.0 {
                        continue;
                    }
                    tmp.iter_mut().for_each(|z| *z = ZERO);
                    jump.left_mul_acc(ONE, rho, n, &mut tmp);
                    jump.right_mul_adjoint_acc(ONE, rho, n, &mut tmp);
                    let k = I * *gain;
                    drive.left_mul_acc(k, &tmp, n, out);
                    drive.right_mul_acc(-k, &tmp, n, out);
                }
            }
        }
    }

    /// 𝓛ρ in operator form.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.rows() != self.dim || rho.cols() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix under a generator of dimension {}",
                rho.rows(),
                rho.cols(),
                self.dim
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        self.apply_into(rho.data(), out.data_mut());
        Ok(out)
    }

    /// Dense (D²)×(D²) matrix of the generator.
    pub fn to_superoperator(&self) -> Superoperator {
        let n = self.dim;
        let mut sup = ComplexMatrix::zeros(n * n, n * n);
        let id = SparseMatrix::from_dense(&ComplexMatrix::identity(n));
        // adds s·XρY
        let mut sandwich = |s: C64, x: &SparseMatrix, y: &SparseMatrix| {
            for (i, k, xv) in x.entries() {
                for (l, j, yv) in y.entries() {
                    sup[(i + j * n, k + l * n)] += s * xv * yv;
                }
            }
        };
        for term in &self.compiled {
            match term {
                Compiled::Hamiltonian(h) => {
                    sandwich(-I, h, &id);
                    sandwich(I, &id, h);
                }
                Compiled::Dissipator {
                    rate,
                    op,
                    op_dag_op,
                } => {
                    let r = C64::new(*rate, 0.0);
                    sandwich(r, op, &op.adjoint());
                    sandwich(r * -0.5, op_dag_op, &id);
                    sandwich(r * -0.5, &id, op_dag_op);
                }
                Compiled::FeedbackCross { gain, drive, jump } => {
                    let k = I * *gain;
                    let jd = jump.adjoint();
                    sandwich(k, &drive.dot_sparse(jump), &id);
                    sandwich(k, drive, &jd);
                    sandwich(-k, jump, drive);
                    sandwich(-k, &id, &jd.dot_sparse(drive));
                }
            }
        }
        Superoperator { dim: n, matrix: sup }
    }
}

/// Matrix form of a linear map on D×D matrices, acting on column-stacked
/// vectors.
#[derive(Clone, Debug)]
pub struct Superoperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl Superoperator {
    pub fn from_matrix(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.rows() != dim * dim || matrix.cols() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "superoperator on dimension {dim} needs a {0}x{0} matrix",
                dim * dim
            )));
        }
        Ok(Self { dim, matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn apply_vec(&self, v: &[C64]) -> Vec<C64> {
        let n2 = self.dim * self.dim;
        assert_eq!(v.len(), n2);
        let data = self.matrix.data();
        (0..n2)
            .map(|r| {
                data[r * n2..(r + 1) * n2]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.rows() != self.dim || rho.cols() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix under a superoperator on dimension {}",
                rho.rows(),
                rho.cols(),
                self.dim
            )));
        }
        unvectorize(&self.apply_vec(&vectorize(rho)), self.dim)
    }
}

/// Dense generator −i[H,·] + Σ γ_k 𝒟[A_k].
pub fn vectorize_generator(
    hamiltonian: &ComplexMatrix,
    lindblad_terms: &[(f64, ComplexMatrix)],
) -> Result<Superoperator> {
    hamiltonian.require_square()?;
    let mut gen = Generator::new(hamiltonian.rows()).with_hamiltonian(hamiltonian.clone())?;
    for (rate, op) in lindblad_terms {
        gen.push(GeneratorTerm::Dissipator {
            rate: *rate,
            op: op.clone(),
        })?;
    }
    Ok(gen.to_superoperator())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma_minus() -> ComplexMatrix {
        // basis order (e, g)
        ComplexMatrix::from_real(2, 2, &[0.0, 0.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn decay_of_excited_state() {
        let e = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        let out = dissipator_apply(&sigma_minus(), &e).unwrap();
        let expect = ComplexMatrix::from_real_diagonal(&[-1.0, 1.0]);
        assert!(out.approx_eq(&expect, 1e-15));
    }

    #[test]
    fn ground_state_is_dark() {
        let g = ComplexMatrix::from_real_diagonal(&[0.0, 1.0]);
        let out = dissipator_apply(&sigma_minus(), &g).unwrap();
        assert!(out.approx_eq(&ComplexMatrix::zeros(2, 2), 0.0));
        let out = innovation_apply(&sigma_minus(), &g).unwrap();
        assert!(out.approx_eq(&ComplexMatrix::zeros(2, 2), 0.0));
    }

    #[test]
    fn innovation_of_excited_state_is_sigma_x() {
        let e = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        let out = innovation_apply(&sigma_minus(), &e).unwrap();
        let sx = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(out.approx_eq(&sx, 1e-15));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let rho = ComplexMatrix::identity(3).scale_real(1.0 / 3.0);
        assert!(matches!(
            dissipator_apply(&sigma_minus(), &rho),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(innovation_apply(&sigma_minus(), &rho).is_err());
    }

    #[test]
    fn negative_rate_rejected() {
        let h = ComplexMatrix::zeros(2, 2);
        let r = vectorize_generator(&h, &[(-1.0, sigma_minus())]);
        assert!(matches!(r, Err(Error::InvalidParameter { .. })));
        let r = vectorize_generator(&h, &[(1.0, ComplexMatrix::identity(3))]);
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn vec_roundtrip_is_column_stacking() {
        let m = ComplexMatrix::from_fn(3, 3, |i, j| C64::new(i as f64, j as f64));
        let v = vectorize(&m);
        assert_eq!(v[1], C64::new(1.0, 0.0));
        assert_eq!(v[3], C64::new(0.0, 1.0));
        assert_eq!(unvectorize(&v, 3).unwrap(), m);
    }
}

//! Stationary states from the null space of the Liouvillian.

use faer::linalg::solvers::Solve;
use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{markovian_generator, ModelParams};
use crate::quantum::{faer_sequential, ComplexMatrix, DensityMatrix, Generator, C64, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SteadyMethod {
    /// Replace one redundant row of L by the trace condition and LU-solve.
    /// The uniqueness gate estimates the smallest singular value of the
    /// bordered matrix by inverse iteration.
    Lu,
    /// Right-singular vector of the smallest singular value of L; the gate is
    /// the second-smallest singular value. O(D⁶) and slow beyond d ≈ 10.
    Svd,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SteadyOptions {
    pub method: SteadyMethod,
    /// Uniqueness gate, relative to ‖L‖_F.
    pub gap_threshold: f64,
    /// Bound on ‖𝓛ρ‖_F / ‖L‖_F for the returned state.
    pub residual_tolerance: f64,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self {
            method: SteadyMethod::Lu,
            gap_threshold: 1e-8,
            residual_tolerance: 1e-10,
        }
    }
}

/// A stationary state with its convergence diagnostics.
#[derive(Clone, Debug)]
pub struct SteadyState {
    pub state: DensityMatrix,
    /// ‖𝓛ρ‖_F / ‖L‖_F
    pub residual: f64,
    /// Uniqueness gap relative to ‖L‖_F (method dependent, see [`SteadyMethod`]).
    pub gap: f64,
    /// Number of negative eigenvalues clipped to zero.
    pub repairs: usize,
    /// Smallest eigenvalue of the normalized null vector before clipping.
    pub raw_min_eigenvalue: f64,
}

pub fn steady_state_numeric(p: &ModelParams) -> Result<DensityMatrix> {
    Ok(steady_state_with(p, &SteadyOptions::default())?.state)
}

pub fn steady_state_with(p: &ModelParams, opts: &SteadyOptions) -> Result<SteadyState> {
    let gen = markovian_generator(p)?;
    steady_state_of_generator(&gen, vec![2, p.d], opts)
}

pub fn steady_state_of_generator(
    gen: &Generator,
    dims: Vec<usize>,
    opts: &SteadyOptions,
) -> Result<SteadyState> {
    faer_sequential();
    let n = gen.dim();
    let l = gen.to_superoperator().into_matrix();
    let norm = l.frobenius_norm();
    if norm == 0.0 {
        return Err(Error::DegenerateSteadyState {
            gap: 0.0,
            threshold: opts.gap_threshold,
        });
    }
    let (vec, gap) = match opts.method {
        SteadyMethod::Lu => null_vector_lu(&l, n, norm, opts.gap_threshold)?,
        SteadyMethod::Svd => null_vector_svd(&l, norm, opts.gap_threshold)?,
    };
    let rho = ComplexMatrix::from_fn(n, n, |i, j| vec[i + j * n]);
    let (rho, repairs, raw_min_eigenvalue) = physicalize(rho)?;
    let residual = gen.apply(&rho)?.frobenius_norm() / norm;
    if !(residual <= opts.residual_tolerance) {
        return Err(Error::ResidualTooLarge {
            residual,
            tolerance: opts.residual_tolerance,
        });
    }
    Ok(SteadyState {
        state: DensityMatrix::new(rho, dims)?,
        residual,
        gap,
        repairs,
        raw_min_eigenvalue,
    })
}

fn null_vector_lu(l: &ComplexMatrix, n: usize, norm: f64, threshold: f64) -> Result<(Vec<C64>, f64)> {
    let big = n * n;
    // Row 0 (the ⟨0|·|0⟩ component) is minus the sum of the other diagonal
    // rows because 𝓛 is trace-annihilating, so it can carry Tr ρ = 1.
    let mut a = l.to_faer();
    for j in 0..big {
        a[(0, j)] = ZERO;
    }
    for i in 0..n {
        a[(0, i + i * n)] = ONE;
    }
    let lu = a.partial_piv_lu();

    let sigma_min = smallest_singular_value(&lu, big);
    let gap = sigma_min / norm;
    if !(gap > threshold) {
        return Err(Error::DegenerateSteadyState { gap, threshold });
    }

    let mut rhs = Mat::<C64>::zeros(big, 1);
    rhs[(0, 0)] = ONE;
    lu.solve_in_place(rhs.as_mut());
    let v: Vec<C64> = (0..big).map(|i| rhs[(i, 0)]).collect();
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::DegenerateSteadyState { gap: 0.0, threshold });
    }
    Ok((v, gap))
}

/// Inverse iteration on AᴴA using the existing factorization.
fn smallest_singular_value(lu: &faer::linalg::solvers::PartialPivLu<C64>, n: usize) -> f64 {
    let mut x = Mat::<C64>::from_fn(n, 1, |i, _| {
        // fixed, non-special start vector
        C64::new(1.0 + (i % 7) as f64 * 0.1, (i % 3) as f64 * 0.05)
    });
    let mut estimate = 0.0;
    for _ in 0..30 {
        let nx = x.norm_l2();
        if !(nx > 0.0) || !nx.is_finite() {
            return 0.0;
        }
        x = x * faer::Scale(C64::new(1.0 / nx, 0.0));
        lu.solve_adjoint_in_place(x.as_mut());
        lu.solve_in_place(x.as_mut());
        let grown = x.norm_l2();
        if !grown.is_finite() {
            return 0.0;
        }
        let next = 1.0 / grown.sqrt();
        if (next - estimate).abs() <= 1e-6 * next {
            return next;
        }
        estimate = next;
    }
    estimate
}

fn null_vector_svd(l: &ComplexMatrix, norm: f64, threshold: f64) -> Result<(Vec<C64>, f64)> {
    let big = l.rows();
    let svd = l
        .to_faer()
        .svd()
        .map_err(|e| Error::LinearAlgebra(format!("singular value decomposition: {e:?}")))?;
    let s: Vec<f64> = svd.S().column_vector().iter().map(|z| z.re).collect();
    let mut order: Vec<usize> = (0..big).collect();
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
    let gap = s[order[1]] / norm;
    if !(gap > threshold) {
        return Err(Error::DegenerateSteadyState { gap, threshold });
    }
    let v = svd.V();
    let col = order[0];
    Ok(((0..big).map(|i| v[(i, col)]).collect(), gap))
}

/// Trace-normalizes, Hermitizes and clips negative eigenvalues.
fn physicalize(rho: ComplexMatrix) -> Result<(ComplexMatrix, usize, f64)> {
    let tr = rho.trace();
    if tr.norm() == 0.0 || !tr.re.is_finite() {
        return Err(Error::LinearAlgebra("null vector has zero trace".into()));
    }
    let rho = rho.scale(ONE / tr).hermitian_part();
    let (values, vectors) = rho.eigh()?;
    let repairs = values.iter().filter(|&&v| v < 0.0).count();
    if repairs == 0 {
        return Ok((rho, 0, values[0]));
    }
    let clipped: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    let n = rho.rows();
    let rebuilt = ComplexMatrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| vectors[(i, k)] * vectors[(j, k)].conj() * (clipped[k] / total))
            .sum()
    });
    Ok((rebuilt.hermitian_part(), repairs, values[0]))
}

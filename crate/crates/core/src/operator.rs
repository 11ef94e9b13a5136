//! Operator abstraction: Hermitian linear maps with matvec accounting, and
//! the conjugate-linear `v -> J v*` map that pairs degenerate eigenvectors.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cg::{cg_solve, CgConfig, CgReport};
use crate::error::{check_dim, invalid, Error, Result};
use crate::linalg::{self, DenseMatrix, RealMatrix};

/// Power iterations used for the one-time `||A||` estimate.
pub const NORM_POWER_ITERATIONS: usize = 20;
/// Largest relative residual accepted from a CG solve that stagnated.
pub const FLOOR_ACCEPT: f64 = 1e-11;

/// A matrix-free linear map on `C^n`.
pub trait LinearOperator: Send + Sync {
    fn dim(&self) -> usize;

    /// `y = A x`. Callers guarantee `x.len() == y.len() == dim()`.
    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]);

    /// Dense form, when the implementation has one cheaply at hand.
    fn dense(&self) -> Option<&DenseMatrix> {
        None
    }
}

/// Materializes any operator column by column.
pub fn materialize(op: &dyn LinearOperator) -> DenseMatrix {
    if let Some(d) = op.dense() {
        return d.clone();
    }
    let n = op.dim();
    let mut out = DenseMatrix::zeros(n, n);
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        e[j] = Complex64::new(1.0, 0.0);
        op.apply_into(&e, &mut col);
        e[j] = Complex64::new(0.0, 0.0);
        for i in 0..n {
            out[(i, j)] = col[i];
        }
    }
    out
}

pub struct DenseOperator {
    matrix: DenseMatrix,
}

impl DenseOperator {
    pub fn new(matrix: DenseMatrix) -> Result<Self> {
        check_dim(matrix.rows(), matrix.cols())?;
        if !matrix.is_finite() {
            return Err(Error::NonFinite("dense operator"));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }
}

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.matrix.rows()
    }

    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.matrix.matvec_into(x, y);
    }

    fn dense(&self) -> Option<&DenseMatrix> {
        Some(&self.matrix)
    }
}

/// Real diagonal operator.
pub struct DiagonalOperator {
    diag: Vec<f64>,
}

impl DiagonalOperator {
    pub fn new(diag: Vec<f64>) -> Self {
        Self { diag }
    }

    pub fn identity(n: usize) -> Self {
        Self { diag: vec![1.0; n] }
    }
}

impl LinearOperator for DiagonalOperator {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        for ((yi, xi), d) in y.iter_mut().zip(x).zip(&self.diag) {
            *yi = xi * d;
        }
    }
}

/// Wraps an operator with the matvec counter used for cost accounting.
///
/// `apply` and `apply_inverse` each count exactly one matvec; one inverse
/// application is one logical matvec no matter how many CG iterations it
/// took (those are tallied separately). `apply_uncounted` is for
/// verification work (true residuals, norm estimates) that the cost model
/// does not charge.
pub struct CountedOperator {
    inner: Box<dyn LinearOperator>,
    matvecs: AtomicUsize,
    cg_iterations: AtomicUsize,
    cg_floor_solves: AtomicUsize,
    norm: OnceLock<f64>,
}

impl CountedOperator {
    pub fn new(op: impl LinearOperator + 'static) -> Self {
        Self::from_boxed(Box::new(op))
    }

    pub fn from_boxed(inner: Box<dyn LinearOperator>) -> Self {
        Self {
            inner,
            matvecs: AtomicUsize::new(0),
            cg_iterations: AtomicUsize::new(0),
            cg_floor_solves: AtomicUsize::new(0),
            norm: OnceLock::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn inner(&self) -> &dyn LinearOperator {
        self.inner.as_ref()
    }

    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let y = self.apply_uncounted(v)?;
        self.matvecs.fetch_add(1, Ordering::Relaxed);
        Ok(y)
    }

    pub fn apply_uncounted(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        check_dim(self.dim(), v.len())?;
        let mut y = vec![Complex64::new(0.0, 0.0); v.len()];
        self.inner.apply_into(v, &mut y);
        Ok(y)
    }

    /// Solves `A x = v` with CG. A solve that stagnates at its rounding
    /// floor is accepted when that floor is below [`FLOOR_ACCEPT`] and
    /// counted in [`Self::cg_floor_solves`]; anything else short of
    /// `cg.tol` is an error.
    pub fn apply_inverse(&self, v: &[Complex64], cg: &CgConfig) -> Result<(Vec<Complex64>, CgReport)> {
        check_dim(self.dim(), v.len())?;
        let (x, report) = cg_solve(self.inner.as_ref(), v, cg, None)?;
        self.matvecs.fetch_add(1, Ordering::Relaxed);
        self.cg_iterations.fetch_add(report.iterations, Ordering::Relaxed);
        if !report.converged {
            if report.stagnated && report.residual <= FLOOR_ACCEPT {
                self.cg_floor_solves.fetch_add(1, Ordering::Relaxed);
            } else {
                return Err(Error::CgNoConvergence { iterations: report.iterations, residual: report.residual });
            }
        }
        Ok((x, report))
    }

    pub fn matvecs(&self) -> usize {
        self.matvecs.load(Ordering::Relaxed)
    }

    pub fn cg_iterations(&self) -> usize {
        self.cg_iterations.load(Ordering::Relaxed)
    }

    /// Inverse applications that ended at the CG rounding floor.
    pub fn cg_floor_solves(&self) -> usize {
        self.cg_floor_solves.load(Ordering::Relaxed)
    }

    pub fn reset_counters(&self) {
        self.matvecs.store(0, Ordering::Relaxed);
        self.cg_iterations.store(0, Ordering::Relaxed);
        self.cg_floor_solves.store(0, Ordering::Relaxed);
    }

    /// `||A||_2` estimate from a fixed-start power method, computed once.
    pub fn norm_estimate(&self) -> f64 {
        *self.norm.get_or_init(|| power_norm(self.inner.as_ref(), NORM_POWER_ITERATIONS))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        materialize(self.inner.as_ref())
    }
}

fn power_norm(op: &dyn LinearOperator, iterations: usize) -> f64 {
    let n = op.dim();
    if n == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x6e6f726d);
    let mut v: Vec<Complex64> =
        (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let s = linalg::norm(&v);
    linalg::scale(&mut v, 1.0 / s);
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    let mut estimate = 0.0;
    for _ in 0..iterations {
        op.apply_into(&v, &mut y);
        estimate = linalg::norm(&y);
        if estimate == 0.0 {
            return 0.0;
        }
        v.copy_from_slice(&y);
        linalg::scale(&mut v, 1.0 / estimate);
    }
    estimate
}

/// The conjugate-linear map `v -> J v*` for a real, skew-symmetric,
/// orthogonal `J`.
#[derive(Clone, Debug, PartialEq)]
pub enum JOperator {
    /// `J = [[O, -I], [I, O]]` with `n/2 x n/2` blocks.
    CanonicalBlock { n: usize },
    /// `J = (C gamma_5) ⊗ I_d` with the spin index outermost.
    SpinTensor { color_dim: usize, spin: [[f64; 4]; 4] },
}

impl JOperator {
    pub fn canonical_block(n: usize) -> Result<Self> {
        if n % 2 != 0 {
            return Err(invalid(format!("canonical block J needs an even dimension, got {n}")));
        }
        Ok(Self::CanonicalBlock { n })
    }

    pub fn spin_tensor(color_dim: usize) -> Self {
        Self::SpinTensor { color_dim, spin: crate::tek::GammaAlgebra::new().j_spin_real() }
    }

    /// Name used in file sidecars.
    pub fn realization(&self) -> &'static str {
        match self {
            Self::CanonicalBlock { .. } => "canonical-block",
            Self::SpinTensor { .. } => "spin-tensor",
        }
    }

    pub fn from_realization(name: &str, dim: usize) -> Result<Self> {
        match name {
            "canonical-block" => Self::canonical_block(dim),
            "spin-tensor" => {
                if dim % 4 != 0 {
                    return Err(invalid(format!("spin-tensor J needs dim divisible by 4, got {dim}")));
                }
                Ok(Self::spin_tensor(dim / 4))
            }
            other => Err(invalid(format!("unknown J realization {other:?}"))),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::CanonicalBlock { n } => *n,
            Self::SpinTensor { color_dim, .. } => 4 * color_dim,
        }
    }

    pub fn apply_conj(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        check_dim(self.dim(), v.len())?;
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        match self {
            Self::CanonicalBlock { n } => {
                let h = n / 2;
                for i in 0..h {
                    out[i] = -v[i + h].conj();
                    out[i + h] = v[i].conj();
                }
            }
            Self::SpinTensor { color_dim, spin } => {
                let d = *color_dim;
                for (alpha, row) in spin.iter().enumerate() {
                    let dst = &mut out[alpha * d..(alpha + 1) * d];
                    for (beta, &coef) in row.iter().enumerate() {
                        if coef == 0.0 {
                            continue;
                        }
                        let src = &v[beta * d..(beta + 1) * d];
                        for (o, s) in dst.iter_mut().zip(src) {
                            *o += s.conj() * coef;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// The real matrix `J` itself.
    pub fn materialize(&self) -> RealMatrix {
        let n = self.dim();
        let mut out = RealMatrix::zeros(n, n);
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            e[j] = Complex64::new(1.0, 0.0);
            let col = self.apply_conj(&e).expect("dimension checked");
            e[j] = Complex64::new(0.0, 0.0);
            for i in 0..n {
                out[(i, j)] = col[i].re;
            }
        }
        out
    }
}

/// `max |J A J^{-1} - A^T|` for a dense `A`, using `J^{-1} = J^T`.
pub fn j_symmetry_defect(a: &DenseMatrix, j: &JOperator) -> f64 {
    let jm = DenseMatrix::from_real(&j.materialize());
    let jaj = jm.matmul(a).unwrap().matmul(&jm.transpose()).unwrap();
    jaj.max_abs_diff(&a.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn canonical_block_small_cases() {
        let j = JOperator::canonical_block(2).unwrap();
        assert_eq!(j.apply_conj(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap(), vec![c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(j.apply_conj(&[c(0.0, 1.0), c(0.0, 0.0)]).unwrap(), vec![c(0.0, 0.0), c(0.0, -1.0)]);

        let j4 = JOperator::canonical_block(4).unwrap();
        let e = |k: usize| (0..4).map(|i| c(if i == k { 1.0 } else { 0.0 }, 0.0)).collect::<Vec<_>>();
        assert_eq!(j4.apply_conj(&e(0)).unwrap(), e(2));
        let neg_e0: Vec<_> = e(0).into_iter().map(|x| -x).collect();
        assert_eq!(j4.apply_conj(&e(2)).unwrap(), neg_e0);
    }

    #[test]
    fn canonical_block_matrix_is_skew_orthogonal() {
        let jm = JOperator::canonical_block(4).unwrap().materialize();
        let jt = jm.transpose();
        let neg = RealMatrix::from_fn(4, 4, |i, k| -jm[(i, k)]);
        assert_eq!(jt, neg);
        assert_eq!(jt.matmul(&jm).unwrap(), RealMatrix::identity(4));
    }

    #[test]
    fn odd_dimension_rejected() {
        assert!(JOperator::canonical_block(3).is_err());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let j = JOperator::canonical_block(4).unwrap();
        assert!(matches!(j.apply_conj(&[c(1.0, 0.0)]), Err(Error::DimensionMismatch { .. })));
        let op = CountedOperator::new(DiagonalOperator::identity(3));
        assert!(op.apply(&[c(1.0, 0.0)]).is_err());
        assert_eq!(op.matvecs(), 0);
    }

    #[test]
    fn counter_counts_each_application_once() {
        let op = CountedOperator::new(DiagonalOperator::new(vec![1.0, 2.0, 4.0]));
        let v = vec![c(1.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)];
        op.apply(&v).unwrap();
        op.apply_uncounted(&v).unwrap();
        let (x, report) = op.apply_inverse(&v, &CgConfig::default()).unwrap();
        assert!(report.iterations >= 1);
        for xi in &x {
            assert!((xi - c(1.0, 0.0)).norm() < 1e-13);
        }
        assert_eq!(op.matvecs(), 2);
        op.reset_counters();
        assert_eq!(op.matvecs(), 0);
    }

    #[test]
    fn diagonal_apply_and_norm_estimate() {
        let op = CountedOperator::new(DiagonalOperator::new(vec![0.5, -3.0, 2.0]));
        let e1 = vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
        assert_eq!(op.apply(&e1).unwrap(), vec![c(0.0, 0.0), c(-3.0, 0.0), c(0.0, 0.0)]);
        assert!((op.norm_estimate() - 3.0).abs() < 1e-3);
    }

    #[test]
    fn spin_tensor_involution() {
        let j = JOperator::spin_tensor(3);
        let v: Vec<Complex64> = (0..12).map(|i| c(i as f64 * 0.1 - 0.3, 1.0 / (i as f64 + 1.0))).collect();
        let jv = j.apply_conj(&v).unwrap();
        let jjv = j.apply_conj(&jv).unwrap();
        for (a, b) in jjv.iter().zip(&v) {
            assert!((a + b).norm() < 1e-15);
        }
        assert!((linalg::norm(&jv) - linalg::norm(&v)).abs() < 1e-14);
        assert_eq!(JOperator::from_realization("spin-tensor", 12).unwrap(), j);
    }
}

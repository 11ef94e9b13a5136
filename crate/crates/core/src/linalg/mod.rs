//! Dense complex/real linear algebra used by the Krylov solvers.
//!
//! Vectors are plain `Vec<Complex64>` / `&[Complex64]`; matrices are small
//! row-major containers. Everything here is sequential with a fixed
//! reduction order so that solver runs are bit-reproducible.

mod dense;
mod gram_schmidt;
mod jacobi;
mod projected;
mod sort;

pub use dense::{DenseMatrix, RealMatrix};
pub use gram_schmidt::{
    mgs_orthonormalize, orthonormalize_scaled, Orthonormalized, BREAKDOWN_RTOL, MAX_SWEEPS,
    REORTH_GAMMA,
};
pub use jacobi::{hermitian_eig, symmetric_eig_small, JACOBI_RTOL};
pub use projected::ProjectedMatrix;
pub use sort::{permute, sort_eigenpairs, sort_permutation, SortKey};

pub use num_complex::Complex64;

/// `a^H b`.
#[inline]
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    kernel(a, b, true)
}

/// Four-lane complex inner product with a fixed reduction order; the
/// independent accumulators let the loop pipeline instead of waiting on one
/// running sum.
#[inline]
pub(crate) fn kernel(a: &[Complex64], b: &[Complex64], conj_a: bool) -> Complex64 {
    let s = if conj_a { -1.0 } else { 1.0 };
    let mut re = [0.0f64; 4];
    let mut im = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ta, tb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            re[l] += x[l].re * y[l].re - s * x[l].im * y[l].im;
            im[l] += x[l].re * y[l].im + s * x[l].im * y[l].re;
        }
    }
    for (l, (x, y)) in ta.iter().zip(tb).enumerate() {
        re[l] += x.re * y.re - s * x.im * y.im;
        im[l] += x.re * y.im + s * x.im * y.re;
    }
    Complex64::new((re[0] + re[1]) + (re[2] + re[3]), (im[0] + im[1]) + (im[2] + im[3]))
}

/// Unconjugated bilinear form `a^T b`.
#[inline]
pub fn dot_t(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x * y)
}

#[inline]
pub fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

#[inline]
pub fn norm(a: &[Complex64]) -> f64 {
    norm_sqr(a).sqrt()
}

/// `y += alpha * x`.
#[inline]
pub fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub fn scale(v: &mut [Complex64], s: f64) {
    for x in v.iter_mut() {
        *x *= s;
    }
}

pub fn conj(v: &[Complex64]) -> Vec<Complex64> {
    v.iter().map(|x| x.conj()).collect()
}

pub fn is_finite(v: &[Complex64]) -> bool {
    v.iter().all(|x| x.re.is_finite() && x.im.is_finite())
}

/// Unit vector with the all-ones direction.
pub fn ones_normalized(n: usize) -> Vec<Complex64> {
    let s = 1.0 / (n as f64).sqrt();
    vec![Complex64::new(s, 0.0); n]
}

/// Linear combination `sum_i coeffs[i] * basis[i]`.
pub fn combine(basis: &[Vec<Complex64>], coeffs: &[f64]) -> Vec<Complex64> {
    debug_assert_eq!(basis.len(), coeffs.len());
    let n = basis.first().map_or(0, |b| b.len());
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (b, &c) in basis.iter().zip(coeffs) {
        if c != 0.0 {
            for (o, x) in out.iter_mut().zip(b) {
                *o += x * c;
            }
        }
    }
    out
}

/// Max magnitude of `u_i^H w_j` over all pairs.
pub fn max_cross_inner(u: &[Vec<Complex64>], w: &[Vec<Complex64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for a in u {
        for b in w {
            worst = worst.max(dot(a, b).norm());
        }
    }
    worst
}

/// `max |(U^H U - I)_{ij}|`.
pub fn orthonormality_defect(u: &[Vec<Complex64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in u.iter().enumerate() {
        for (j, b) in u.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot(a, b) - target).norm());
        }
    }
    worst
}

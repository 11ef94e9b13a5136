//! Conjugate gradient for Hermitian positive-definite systems.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};
use crate::linalg::{axpy, dot, norm, norm_sqr};
use crate::operator::LinearOperator;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CgConfig {
    /// Target for `||A x - b|| / ||b||`.
    pub tol: f64,
    pub max_iter: usize,
}

impl CgConfig {
    pub fn new(tol: f64, max_iter: usize) -> Result<Self> {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(invalid(format!("CG tolerance must lie in (0, 1), got {tol}")));
        }
        if max_iter == 0 {
            return Err(invalid("CG max_iter must be at least 1"));
        }
        Ok(Self { tol, max_iter })
    }

    /// Inner tolerance for an eigensolve with absolute residual target `eig_tol`.
    pub fn for_eigen_tol(eig_tol: f64) -> Self {
        Self { tol: (eig_tol / 10.0).min(1e-14), max_iter: 10_000 }
    }
}

impl Default for CgConfig {
    fn default() -> Self {
        Self::for_eigen_tol(1e-13)
    }
}

/// Iterations without a new minimum of the recursive residual after which a
/// solve is treated as stagnant.
pub const STALL_WINDOW: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CgReport {
    pub iterations: usize,
    /// True relative residual `||b - A x|| / ||b||` of the returned iterate.
    pub residual: f64,
    pub converged: bool,
    /// The iteration reached its rounding floor above `tol` and returned the
    /// best iterate seen.
    pub stagnated: bool,
}

/// Solves `A x = b`, starting from `x0` (zero by default).
///
/// Convergence is judged on the true residual. Whenever the recursive
/// residual meets the target the true one is computed; if it misses, it
/// replaces the recursive residual and iteration continues. The solve is
/// declared stagnant when such a replacement fails to improve on the previous
/// one, or when the recursive residual sets no new minimum for
/// [`STALL_WINDOW`] iterations; the best iterate is then returned with
/// `stagnated` set. Hitting `max_iter` returns the last iterate.
pub fn cg_solve(
    op: &dyn LinearOperator,
    b: &[Complex64],
    cfg: &CgConfig,
    x0: Option<&[Complex64]>,
) -> Result<(Vec<Complex64>, CgReport)> {
    let n = op.dim();
    check_dim(n, b.len())?;
    let zero = Complex64::new(0.0, 0.0);
    let bnorm = norm(b);
    let mut x = match x0 {
        Some(x0) => {
            check_dim(n, x0.len())?;
            x0.to_vec()
        }
        None => vec![zero; n],
    };
    if bnorm == 0.0 {
        let report = CgReport { iterations: 0, residual: 0.0, converged: true, stagnated: false };
        return Ok((vec![zero; n], report));
    }
    let target = cfg.tol * bnorm;

    let mut ap = vec![zero; n];
    let mut r = b.to_vec();
    if x0.is_some() {
        op.apply_into(&x, &mut ap);
        axpy(Complex64::new(-1.0, 0.0), &ap, &mut r);
    }
    let mut rr = norm_sqr(&r);
    if rr.sqrt() <= target {
        let report = CgReport { iterations: 0, residual: rr.sqrt() / bnorm, converged: true, stagnated: false };
        return Ok((x, report));
    }
    let mut p = r.clone();
    let mut best_rr = rr;
    let mut best_x = x.clone();
    let mut since_best = 0;
    // lowest true residual seen at a replacement, with its iterate
    let mut checkpoint: Option<(f64, Vec<Complex64>)> = None;

    for it in 1..=cfg.max_iter {
        op.apply_into(&p, &mut ap);
        let curvature = dot(&p, &ap).re;
        if !(curvature > 0.0) {
            return Err(Error::NotPositiveDefinite { curvature });
        }
        let alpha = rr / curvature;
        axpy(Complex64::new(alpha, 0.0), &p, &mut x);
        axpy(Complex64::new(-alpha, 0.0), &ap, &mut r);
        let mut rr_new = norm_sqr(&r);

        if rr_new.sqrt() <= target {
            let true_r = residual(op, b, &x);
            let true_norm = norm(&true_r);
            if true_norm <= target {
                let report = CgReport { iterations: it, residual: true_norm / bnorm, converged: true, stagnated: false };
                return Ok((x, report));
            }
            if checkpoint.as_ref().is_some_and(|(prev, _)| true_norm >= *prev) {
                return Ok(stagnated(op, b, bnorm, it, best_x, checkpoint));
            }
            checkpoint = Some((true_norm, x.clone()));
            r = true_r;
            rr_new = true_norm * true_norm;
            best_rr = rr_new;
            since_best = 0;
        } else if rr_new < best_rr {
            best_rr = rr_new;
            best_x.copy_from_slice(&x);
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= STALL_WINDOW {
                return Ok(stagnated(op, b, bnorm, it, best_x, checkpoint));
            }
        }

        let beta = rr_new / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + *pi * beta;
        }
        rr = rr_new;
    }

    let final_res = norm(&residual(op, b, &x)) / bnorm;
    let report =
        CgReport { iterations: cfg.max_iter, residual: final_res, converged: final_res <= cfg.tol, stagnated: false };
    Ok((x, report))
}

fn stagnated(
    op: &dyn LinearOperator,
    b: &[Complex64],
    bnorm: f64,
    iterations: usize,
    best_x: Vec<Complex64>,
    checkpoint: Option<(f64, Vec<Complex64>)>,
) -> (Vec<Complex64>, CgReport) {
    let best_norm = norm(&residual(op, b, &best_x));
    let (res, x) = match checkpoint {
        Some((c, cx)) if c < best_norm => (c, cx),
        _ => (best_norm, best_x),
    };
    (x, CgReport { iterations, residual: res / bnorm, converged: false, stagnated: true })
}

fn residual(op: &dyn LinearOperator, b: &[Complex64], x: &[Complex64]) -> Vec<Complex64> {
    let mut ax = vec![Complex64::new(0.0, 0.0); b.len()];
    op.apply_into(x, &mut ax);
    b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect()
}

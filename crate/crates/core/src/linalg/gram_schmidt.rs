use num_complex::Complex64;

use super::{axpy, dot, norm, scale};
use crate::error::{check_dim, invalid, Error, Result};

/// Reorthogonalization threshold: another sweep runs unless the sweep kept
/// more than `1/gamma` of the norm.
pub const REORTH_GAMMA: f64 = std::f64::consts::SQRT_2;

/// Maximum number of Gram–Schmidt sweeps before the result is accepted as is.
pub const MAX_SWEEPS: usize = 5;

/// Relative residual below which the input is declared to lie in the span.
pub const BREAKDOWN_RTOL: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct Orthonormalized {
    pub vector: Vec<Complex64>,
    /// Norm of the residual just before normalization.
    pub norm: f64,
    /// Number of full sweeps over the basis.
    pub sweeps: usize,
    /// Set when the sweep cap was hit without meeting the `gamma` criterion.
    pub capped: bool,
}

/// Orthonormalizes `v` against every column in `bases` with repeated modified
/// Gram–Schmidt sweeps.
///
/// Within one sweep the sets are interleaved by index: column `i` of every set
/// (in the order given) is projected out before column `i + 1` of any set.
/// With `bases = [W, V]` this is the `w_i`-then-`v_i` ordering of the
/// J-symmetric Lanczos step.
pub fn mgs_orthonormalize(
    v: Vec<Complex64>,
    bases: &[&[Vec<Complex64>]],
    gamma: f64,
) -> Result<Orthonormalized> {
    let reference = norm(&v);
    orthonormalize_scaled(v, bases, gamma, reference)
}

/// As [`mgs_orthonormalize`], but breakdown is judged relative to
/// `reference_norm` instead of the norm of `v` on entry.
pub fn orthonormalize_scaled(
    mut v: Vec<Complex64>,
    bases: &[&[Vec<Complex64>]],
    gamma: f64,
    reference_norm: f64,
) -> Result<Orthonormalized> {
    if !(gamma > 1.0) {
        return Err(invalid(format!("reorthogonalization gamma must exceed 1, got {gamma}")));
    }
    for set in bases {
        for col in set.iter() {
            check_dim(v.len(), col.len())?;
        }
    }
    let longest = bases.iter().map(|s| s.len()).max().unwrap_or(0);

    let mut b0 = norm(&v);
    let mut sweeps = 0;
    let mut capped = false;
    loop {
        for i in 0..longest {
            for set in bases {
                if let Some(col) = set.get(i) {
                    let c = dot(col, &v);
                    axpy(-c, col, &mut v);
                }
            }
        }
        sweeps += 1;
        let b1 = norm(&v);
        if b1 * gamma > b0 {
            b0 = b1;
            break;
        }
        b0 = b1;
        if sweeps == MAX_SWEEPS {
            capped = true;
            break;
        }
    }

    let threshold = BREAKDOWN_RTOL * reference_norm;
    if !(b0 > threshold) || !b0.is_finite() {
        return Err(Error::Breakdown { residual: b0, threshold });
    }
    scale(&mut v, 1.0 / b0);
    Ok(Orthonormalized { vector: v, norm: b0, sweeps, capped })
}

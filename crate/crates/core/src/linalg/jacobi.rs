//! Cyclic Jacobi eigensolvers.
//!
//! `symmetric_eig_small` diagonalizes the projected matrix of every restart.
//! `hermitian_eig` is the dense oracle used to check solver output on
//! materializable operators.

use num_complex::Complex64;

use super::{DenseMatrix, RealMatrix};
use crate::error::{invalid, Error, Result};

/// Convergence target: off-diagonal Frobenius norm relative to `||M||_F`.
pub const JACOBI_RTOL: f64 = 1e-14;

const MAX_SWEEPS: usize = 100;

/// Rotation `(c, s)` annihilating the real off-diagonal entry `apq` of the
/// 2x2 block `[[app, apq], [apq, aqq]]`; also returns `t = s / c`.
#[inline]
fn rotation(app: f64, aqq: f64, apq: f64) -> (f64, f64, f64) {
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.is_infinite() {
        0.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    (c, t * c, t)
}

/// Eigen-decomposition of a real symmetric matrix, `M = Z diag(values) Z^T`.
///
/// Eigenvalues come back in diagonal order (unsorted).
pub fn symmetric_eig_small(m: &RealMatrix) -> Result<(Vec<f64>, RealMatrix)> {
    let n = m.rows();
    if m.cols() != n {
        return Err(invalid("symmetric_eig_small needs a square matrix"));
    }
    let mut a = m.clone();
    let mut z = RealMatrix::identity(n);
    let scale = m.frobenius();
    if !scale.is_finite() {
        return Err(Error::NonFinite("symmetric_eig_small input"));
    }

    let off_norm = |a: &RealMatrix| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..i {
                s += 2.0 * a[(i, j)] * a[(i, j)];
            }
        }
        s.sqrt()
    };

    let mut off = off_norm(&a);
    let mut sweeps = 0;
    while off > JACOBI_RTOL * scale {
        if sweeps == MAX_SWEEPS {
            return Err(Error::EigNoConvergence { sweeps, off_norm: off });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                // negligible relative to both diagonal entries: drop it
                if sweeps > 3 && apq.abs() * 1e18 < app.abs() && apq.abs() * 1e18 < aqq.abs() {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let (c, s, t) = rotation(app, aqq, apq);
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    let np = c * arp - s * arq;
                    let nq = s * arp + c * arq;
                    a[(r, p)] = np;
                    a[(p, r)] = np;
                    a[(r, q)] = nq;
                    a[(q, r)] = nq;
                }
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for r in 0..n {
                    let zp = z[(r, p)];
                    let zq = z[(r, q)];
                    z[(r, p)] = c * zp - s * zq;
                    z[(r, q)] = s * zp + c * zq;
                }
            }
        }
        sweeps += 1;
        off = off_norm(&a);
    }
    let values = (0..n).map(|i| a[(i, i)]).collect();
    Ok((values, z))
}

/// Eigen-decomposition of a complex Hermitian matrix by complex Jacobi
/// rotations, `H = X diag(values) X^H`, eigenvalues unsorted.
pub fn hermitian_eig(h: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    let n = h.rows();
    if h.cols() != n {
        return Err(invalid("hermitian_eig needs a square matrix"));
    }
    // symmetrize once so the rotations only ever see a Hermitian array
    let mut a = DenseMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(h[(i, i)].re, 0.0)
        } else {
            (h[(i, j)] + h[(j, i)].conj()) * 0.5
        }
    });
    let mut x = DenseMatrix::identity(n);
    let scale = a.as_slice().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if !scale.is_finite() {
        return Err(Error::NonFinite("hermitian_eig input"));
    }

    let off_norm = |a: &DenseMatrix| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..i {
                s += 2.0 * a[(i, j)].norm_sqr();
            }
        }
        s.sqrt()
    };

    let mut off = off_norm(&a);
    let mut sweeps = 0;
    while off > JACOBI_RTOL * scale {
        if sweeps == MAX_SWEEPS {
            return Err(Error::EigNoConvergence { sweeps, off_norm: off });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                // phase-rotate index q so that a_pq becomes real and positive
                let phase = apq / mag;
                let phase_c = phase.conj();
                if phase != Complex64::new(1.0, 0.0) {
                    for r in 0..n {
                        a[(r, q)] *= phase_c;
                    }
                    for r in 0..n {
                        a[(q, r)] *= phase;
                    }
                    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                    for r in 0..n {
                        x[(r, q)] *= phase_c;
                    }
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let (c, s, t) = rotation(app, aqq, mag);
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    let np = arp * c - arq * s;
                    let nq = arp * s + arq * c;
                    a[(r, p)] = np;
                    a[(p, r)] = np.conj();
                    a[(r, q)] = nq;
                    a[(q, r)] = nq.conj();
                }
                a[(p, p)] = Complex64::new(app - t * mag, 0.0);
                a[(q, q)] = Complex64::new(aqq + t * mag, 0.0);
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                for r in 0..n {
                    let xp = x[(r, p)];
                    let xq = x[(r, q)];
                    x[(r, p)] = xp * c - xq * s;
                    x[(r, q)] = xp * s + xq * c;
                }
            }
        }
        sweeps += 1;
        off = off_norm(&a);
    }
    let values = (0..n).map(|i| a[(i, i)].re).collect();
    Ok((values, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reconstruct(values: &[f64], z: &RealMatrix) -> RealMatrix {
        let d = RealMatrix::diagonal(values);
        z.matmul(&d).unwrap().matmul(&z.transpose()).unwrap()
    }

    #[test]
    fn diagonal_input_is_left_alone() {
        let m = RealMatrix::diagonal(&[3.0, 1.0, 2.0]);
        let (values, z) = symmetric_eig_small(&m).unwrap();
        assert_eq!(values, vec![3.0, 1.0, 2.0]);
        assert_eq!(z, RealMatrix::identity(3));
    }

    #[test]
    fn two_by_two() {
        let m = RealMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let (mut values, _) = symmetric_eig_small(&m).unwrap();
        values.sort_by(|a, b| b.total_cmp(a));
        assert!((values[0] - 3.0).abs() < 1e-14);
        assert!((values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_symmetric_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut m = RealMatrix::zeros(10, 10);
        for i in 0..10 {
            for j in 0..=i {
                let v: f64 = rng.random_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let (values, z) = symmetric_eig_small(&m).unwrap();
        assert!(reconstruct(&values, &z).max_abs_diff(&m) <= 1e-12 * m.max_abs());
        let ztz = z.transpose().matmul(&z).unwrap();
        assert!(ztz.max_abs_diff(&RealMatrix::identity(10)) <= 1e-12);
    }

    #[test]
    fn empty_and_zero_matrices() {
        let (values, _) = symmetric_eig_small(&RealMatrix::zeros(0, 0)).unwrap();
        assert!(values.is_empty());
        let (values, _) = symmetric_eig_small(&RealMatrix::zeros(3, 3)).unwrap();
        assert_eq!(values, vec![0.0; 3]);
    }

    #[test]
    fn hermitian_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 12;
        let mut h = DenseMatrix::zeros(n, n);
        for i in 0..n {
            h[(i, i)] = Complex64::new(rng.random_range(-1.0..1.0), 0.0);
            for j in 0..i {
                let v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                h[(i, j)] = v;
                h[(j, i)] = v.conj();
            }
        }
        let (values, x) = hermitian_eig(&h).unwrap();
        let d = DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(values[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let back = x.matmul(&d).unwrap().matmul(&x.adjoint()).unwrap();
        assert!(back.max_abs_diff(&h) < 1e-12);
        let xhx = x.adjoint().matmul(&x).unwrap();
        assert!(xhx.max_abs_diff(&DenseMatrix::identity(n)) < 1e-12);
    }

    #[test]
    fn rejects_non_square() {
        assert!(symmetric_eig_small(&RealMatrix::zeros(2, 3)).is_err());
    }
}

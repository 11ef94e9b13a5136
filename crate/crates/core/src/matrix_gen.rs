//! Seeded generators for the two test-matrix families.
//!
//! All randomness goes through [`SeededRng`] (ChaCha8), so a seed maps to
//! the same matrix on every platform.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, mgs_orthonormalize, DenseMatrix, RealMatrix, REORTH_GAMMA};
use crate::operator::JOperator;

pub type SeededRng = ChaCha8Rng;

/// Fresh columns drawn per basis vector before giving up on breakdown.
pub const MAX_COLUMN_RETRIES: usize = 10;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random Hermitian J-symmetric matrix with a known spectrum,
/// `A = U diag(L, L) U^H` with `U = [[X1, -X2*], [X2, X1*]]`.
#[derive(Clone, Debug)]
pub struct PlantedSpectrumMatrix {
    pub a: DenseMatrix,
    /// Planted eigenvalues, one per degenerate pair (length `n/2`).
    pub eigenvalues: Vec<f64>,
    pub x1: DenseMatrix,
    pub x2: DenseMatrix,
    pub seed: u64,
}

/// File sidecar describing a generated matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedMetadata {
    pub kind: String,
    pub seed: u64,
    pub n_half: usize,
    pub j_realization: String,
    pub planted_eigenvalues: Vec<f64>,
}

impl PlantedSpectrumMatrix {
    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn j_operator(&self) -> JOperator {
        JOperator::CanonicalBlock { n: self.n() }
    }

    /// Planted eigenvalues sorted largest first (each listed once).
    pub fn sorted_desc(&self) -> Vec<f64> {
        let mut v = self.eigenvalues.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    pub fn metadata(&self) -> PlantedMetadata {
        PlantedMetadata {
            kind: "random-hjs".into(),
            seed: self.seed,
            n_half: self.eigenvalues.len(),
            j_realization: "canonical-block".into(),
            planted_eigenvalues: self.eigenvalues.clone(),
        }
    }

    /// `max |X1^H X1 + X2^H X2 - I|` and `max |X1^T X2 - X2^T X1|`.
    pub fn constraint_defects(&self) -> (f64, f64) {
        let h = self.eigenvalues.len();
        let gram = self.x1.adjoint().matmul(&self.x1).unwrap();
        let gram2 = self.x2.adjoint().matmul(&self.x2).unwrap();
        let mut unitary: f64 = 0.0;
        for i in 0..h {
            for j in 0..h {
                let target = if i == j { 1.0 } else { 0.0 };
                unitary = unitary.max((gram[(i, j)] + gram2[(i, j)] - target).norm());
            }
        }
        let s1 = self.x1.transpose().matmul(&self.x2).unwrap();
        let s2 = self.x2.transpose().matmul(&self.x1).unwrap();
        (unitary, s1.max_abs_diff(&s2))
    }
}

fn uniform_open_unit(rng: &mut SeededRng) -> f64 {
    loop {
        let x: f64 = rng.random();
        if x > 0.0 {
            return x;
        }
    }
}

fn random_square_entry(rng: &mut SeededRng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Generates a `2 n_half` square Hermitian J-symmetric matrix (canonical
/// block `J`) with eigenvalues drawn uniformly from `(0, 1)`, each doubly
/// degenerate.
///
/// The columns `u_j = [x1_j; x2_j]` are orthonormalized against every
/// previous `u_i` and its partner `J u_i*`, which imposes both
/// `X1^H X1 + X2^H X2 = I` and `X1^T X2 = X2^T X1`.
pub fn gen_random_hjs(n_half: usize, seed: u64) -> Result<PlantedSpectrumMatrix> {
    if n_half == 0 {
        return Err(invalid("n_half must be at least 1"));
    }
    let n = 2 * n_half;
    let mut rng = seeded_rng(seed);
    let eigenvalues: Vec<f64> = (0..n_half).map(|_| uniform_open_unit(&mut rng)).collect();
    let j = JOperator::CanonicalBlock { n };

    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n_half);
    let mut partners: Vec<Vec<Complex64>> = Vec::with_capacity(n_half);
    for _ in 0..n_half {
        let mut attempt = 0;
        let u = loop {
            let raw: Vec<Complex64> = (0..n).map(|_| random_square_entry(&mut rng)).collect();
            match mgs_orthonormalize(raw, &[&partners, &cols], REORTH_GAMMA) {
                Ok(out) => break out.vector,
                Err(Error::Breakdown { .. }) if attempt + 1 < MAX_COLUMN_RETRIES => attempt += 1,
                Err(e) => return Err(e),
            }
        };
        partners.push(j.apply_conj(&u)?);
        cols.push(u);
    }

    let x1 = DenseMatrix::from_fn(n_half, n_half, |r, c| cols[c][r]);
    let x2 = DenseMatrix::from_fn(n_half, n_half, |r, c| cols[c][n_half + r]);
    let a = assemble_hjs(&cols, &partners, &eigenvalues);
    Ok(PlantedSpectrumMatrix { a, eigenvalues, x1, x2, seed })
}

/// `A = U diag(L, L) U^H`, computing only the independent entries of the
/// `A11` (Hermitian) and `A12` (skew-symmetric) blocks and filling the rest
/// from the block structure.
fn assemble_hjs(cols: &[Vec<Complex64>], partners: &[Vec<Complex64>], lambda: &[f64]) -> DenseMatrix {
    let h = lambda.len();
    let n = 2 * h;
    // rows of U and of U diag(L, L)
    let u_rows: Vec<Vec<Complex64>> = (0..n)
        .map(|r| cols.iter().map(|c| c[r]).chain(partners.iter().map(|p| p[r])).collect())
        .collect();
    let ul_rows: Vec<Vec<Complex64>> = u_rows
        .iter()
        .map(|row| row.iter().enumerate().map(|(k, x)| x * lambda[k % h]).collect())
        .collect();
    // A_rc = sum_k (U L)_rk conj(U_ck)
    let entry = |r: usize, c: usize| linalg::dot(&u_rows[c], &ul_rows[r]);

    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..h {
        a[(i, i)] = Complex64::new(entry(i, i).re, 0.0);
        for jj in i + 1..h {
            let v = entry(i, jj);
            a[(i, jj)] = v;
            a[(jj, i)] = v.conj();
        }
        for jj in i + 1..h {
            let v = entry(i, h + jj);
            a[(i, h + jj)] = v;
            a[(jj, h + i)] = -v;
        }
    }
    for i in 0..h {
        for jj in 0..h {
            // A21 = A12^H, A22 = A11^T = conj(A11)
            a[(h + i, jj)] = a[(jj, h + i)].conj();
            a[(h + i, h + jj)] = a[(i, jj)].conj();
        }
    }
    a
}

/// Random real orthogonal matrix: Gram–Schmidt on a Gaussian matrix, column
/// by column.
pub fn gen_random_real_orthogonal(dim: usize, seed: u64) -> Result<RealMatrix> {
    let mut rng = seeded_rng(seed);
    random_real_orthogonal_with(dim, &mut rng)
}

pub(crate) fn random_real_orthogonal_with(dim: usize, rng: &mut SeededRng) -> Result<RealMatrix> {
    if dim == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for _ in 0..dim {
        let mut attempt = 0;
        let col = loop {
            let mut v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let start = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            for _ in 0..2 {
                for q in &cols {
                    let c: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                    v.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
                }
            }
            let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nrm > 1e-8 * start {
                v.iter_mut().for_each(|x| *x /= nrm);
                break v;
            }
            attempt += 1;
            if attempt == MAX_COLUMN_RETRIES {
                return Err(Error::Breakdown { residual: nrm, threshold: 1e-8 * start });
            }
        };
        cols.push(col);
    }
    Ok(RealMatrix::from_fn(dim, dim, |i, j| cols[j][i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::j_symmetry_defect;

    #[test]
    fn single_pair_is_scaled_identity() {
        let p = gen_random_hjs(1, 3).unwrap();
        let lam = p.eigenvalues[0];
        assert!(lam > 0.0 && lam < 1.0);
        let expect = DenseMatrix::from_fn(2, 2, |i, j| Complex64::new(if i == j { lam } else { 0.0 }, 0.0));
        assert!(p.a.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn structure_invariants_hold() {
        let p = gen_random_hjs(12, 5).unwrap();
        let scale = p.a.max_abs();
        assert!(p.a.hermiticity_defect() <= 1e-13 * scale);
        assert!(j_symmetry_defect(&p.a, &p.j_operator()) <= 1e-13 * scale);
        let (unitary, skew) = p.constraint_defects();
        assert!(unitary <= 1e-12, "{unitary}");
        assert!(skew <= 1e-12, "{skew}");
    }

    #[test]
    fn deterministic_per_seed() {
        let a = gen_random_hjs(6, 42).unwrap();
        let b = gen_random_hjs(6, 42).unwrap();
        assert_eq!(a.a, b.a);
        assert_ne!(gen_random_hjs(6, 43).unwrap().a, a.a);
    }

    #[test]
    fn zero_size_rejected() {
        assert!(gen_random_hjs(0, 1).is_err());
        assert!(gen_random_real_orthogonal(0, 1).is_err());
    }

    #[test]
    fn orthogonal_factor_small_cases() {
        let one = gen_random_real_orthogonal(1, 9).unwrap();
        assert!((one[(0, 0)].abs() - 1.0).abs() < 1e-15);
        for dim in 2..=6 {
            let v = gen_random_real_orthogonal(dim, dim as u64).unwrap();
            let det = v.det_cofactor();
            assert!((det * det - 1.0).abs() < 1e-8);
        }
        let v = gen_random_real_orthogonal(24, 1).unwrap();
        let vtv = v.transpose().matmul(&v).unwrap();
        assert!(vtv.max_abs_diff(&RealMatrix::identity(24)) <= 1e-12);
    }
}

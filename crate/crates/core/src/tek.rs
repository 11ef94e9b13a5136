//! Wilson–Dirac operator of the twisted Eguchi–Kawai model with real
//! orthogonal link matrices.
//!
//! Vectors live in `C^4 ⊗ C^d` with the spin index outermost: component
//! `(alpha, a)` sits at `alpha * d + a`.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::linalg::{DenseMatrix, RealMatrix};
use crate::matrix_gen::{random_real_orthogonal_with, seeded_rng};
use crate::operator::{JOperator, LinearOperator};

pub type Spin = [[Complex64; 4]; 4];

pub const DEFAULT_KAPPA: f64 = 0.19;

const Z: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn spin_mul(a: &Spin, b: &Spin) -> Spin {
    let mut out = [[Z; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn spin_map(a: &Spin, f: impl Fn(usize, usize) -> Complex64) -> Spin {
    let mut out = *a;
    for (i, row) in out.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = f(i, j);
        }
    }
    out
}

pub fn spin_transpose(a: &Spin) -> Spin {
    spin_map(a, |i, j| a[j][i])
}

pub fn spin_adjoint(a: &Spin) -> Spin {
    spin_map(a, |i, j| a[j][i].conj())
}

pub fn spin_identity() -> Spin {
    let mut out = [[Z; 4]; 4];
    (0..4).for_each(|i| out[i][i] = ONE);
    out
}

pub fn spin_max_abs_diff(a: &Spin, b: &Spin) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            m = m.max((a[i][j] - b[i][j]).norm());
        }
    }
    m
}

/// Euclidean Dirac matrices in the chiral basis used throughout, with the
/// charge-conjugation matrix `C = gamma_4 gamma_2` and `J = C gamma_5`.
#[derive(Clone, Debug)]
pub struct GammaAlgebra {
    /// `gamma_1 .. gamma_4`.
    pub gamma: [Spin; 4],
    pub gamma5: Spin,
    pub c: Spin,
    pub j: Spin,
}

impl Default for GammaAlgebra {
    fn default() -> Self {
        Self::new()
    }
}

impl GammaAlgebra {
    pub fn new() -> Self {
        let g1 = [[Z, Z, Z, -I], [Z, Z, -I, Z], [Z, I, Z, Z], [I, Z, Z, Z]];
        let g2 = [[Z, Z, Z, -ONE], [Z, Z, ONE, Z], [Z, ONE, Z, Z], [-ONE, Z, Z, Z]];
        let g3 = [[Z, Z, -I, Z], [Z, Z, Z, I], [I, Z, Z, Z], [Z, -I, Z, Z]];
        let g4 = [[ONE, Z, Z, Z], [Z, ONE, Z, Z], [Z, Z, -ONE, Z], [Z, Z, Z, -ONE]];
        let gamma5 = [[Z, Z, ONE, Z], [Z, Z, Z, ONE], [ONE, Z, Z, Z], [Z, ONE, Z, Z]];
        let c = spin_mul(&g4, &g2);
        let j = spin_mul(&c, &gamma5);
        Self { gamma: [g1, g2, g3, g4], gamma5, c, j }
    }

    /// `gamma_4 gamma_1 gamma_2 gamma_3`, which should equal `gamma5`.
    pub fn gamma5_from_product(&self) -> Spin {
        let [g1, g2, g3, g4] = &self.gamma;
        spin_mul(&spin_mul(&spin_mul(g4, g1), g2), g3)
    }

    /// `J` as a real matrix (its entries are real in this basis).
    pub fn j_spin_real(&self) -> [[f64; 4]; 4] {
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for k in 0..4 {
                debug_assert!(self.j[i][k].im == 0.0);
                out[i][k] = self.j[i][k].re;
            }
        }
        out
    }

    /// Largest deviation from `{gamma_mu, gamma_nu} = 2 delta_{mu nu}` over
    /// all five matrices, plus hermiticity.
    pub fn clifford_defect(&self) -> f64 {
        let all: Vec<&Spin> = self.gamma.iter().chain(std::iter::once(&self.gamma5)).collect();
        let mut worst: f64 = 0.0;
        for (m, a) in all.iter().enumerate() {
            worst = worst.max(spin_max_abs_diff(a, &spin_adjoint(a)));
            for (n, b) in all.iter().enumerate() {
                let ab = spin_mul(a, b);
                let ba = spin_mul(b, a);
                let anti = spin_map(&ab, |i, j| ab[i][j] + ba[i][j]);
                let expect = if m == n { spin_map(&ab, |i, j| if i == j { 2.0 * ONE } else { Z }) } else { [[Z; 4]; 4] };
                worst = worst.max(spin_max_abs_diff(&anti, &expect));
            }
        }
        worst
    }
}

/// `D = I - kappa sum_mu [(1 - gamma_mu) ⊗ V_mu + (1 + gamma_mu) ⊗ V_mu^T]`.
#[derive(Clone, Debug)]
pub struct WilsonDirac {
    links: [RealMatrix; 4],
    kappa: f64,
    minus: [Spin; 4],
    plus: [Spin; 4],
    link_defect: f64,
}

impl WilsonDirac {
    pub fn new(links: [RealMatrix; 4], kappa: f64) -> Result<Self> {
        let d = links[0].rows();
        if d == 0 {
            return Err(invalid("link matrices must be non-empty"));
        }
        for v in &links {
            if v.rows() != d || v.cols() != d {
                return Err(invalid("link matrices must be square and share one size"));
            }
        }
        if !kappa.is_finite() {
            return Err(invalid("kappa must be finite"));
        }
        let g = GammaAlgebra::new();
        let id = spin_identity();
        let minus = g.gamma.map(|gm| spin_map(&gm, |i, j| id[i][j] - gm[i][j]));
        let plus = g.gamma.map(|gm| spin_map(&gm, |i, j| id[i][j] + gm[i][j]));
        let eye = RealMatrix::identity(d);
        let link_defect = links
            .iter()
            .map(|v| v.transpose().matmul(v).unwrap().max_abs_diff(&eye))
            .fold(0.0, f64::max);
        Ok(Self { links, kappa, minus, plus, link_defect })
    }

    /// Links drawn from one seeded stream, one orthogonal matrix per direction.
    pub fn random(color_dim: usize, kappa: f64, seed: u64) -> Result<Self> {
        let mut rng = seeded_rng(seed);
        let mut links = Vec::with_capacity(4);
        for _ in 0..4 {
            links.push(random_real_orthogonal_with(color_dim, &mut rng)?);
        }
        let links: [RealMatrix; 4] = links.try_into().expect("four links");
        Self::new(links, kappa)
    }

    pub fn color_dim(&self) -> usize {
        self.links[0].rows()
    }

    pub fn dim(&self) -> usize {
        4 * self.color_dim()
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn links(&self) -> &[RealMatrix; 4] {
        &self.links
    }

    /// `max_mu |V_mu^T V_mu - I|`; the operator is only J-symmetric when
    /// this is at rounding level.
    pub fn link_orthogonality_defect(&self) -> f64 {
        self.link_defect
    }

    /// `D psi`, or `D^H psi` when `adjoint` is set (which swaps the roles of
    /// `V_mu` and `V_mu^T`).
    pub fn apply(&self, psi: &[Complex64], out: &mut [Complex64], adjoint: bool) {
        let d = self.color_dim();
        debug_assert_eq!(psi.len(), 4 * d);
        out.copy_from_slice(psi);
        let mut fwd = vec![Z; 4 * d];
        let mut bwd = vec![Z; 4 * d];
        for mu in 0..4 {
            let v = &self.links[mu];
            for beta in 0..4 {
                let src = &psi[beta * d..(beta + 1) * d];
                v.matvec_complex(src, &mut fwd[beta * d..(beta + 1) * d]);
                v.matvec_transpose_complex(src, &mut bwd[beta * d..(beta + 1) * d]);
            }
            let (with_v, with_vt) = if adjoint { (&self.plus[mu], &self.minus[mu]) } else { (&self.minus[mu], &self.plus[mu]) };
            for alpha in 0..4 {
                let dst = &mut out[alpha * d..(alpha + 1) * d];
                for beta in 0..4 {
                    let cf = -self.kappa * with_v[alpha][beta];
                    let cb = -self.kappa * with_vt[alpha][beta];
                    if cf == Z && cb == Z {
                        continue;
                    }
                    let f = &fwd[beta * d..(beta + 1) * d];
                    let b = &bwd[beta * d..(beta + 1) * d];
                    for ((o, x), y) in dst.iter_mut().zip(f).zip(b) {
                        *o += cf * x + cb * y;
                    }
                }
            }
        }
    }

    /// Dense `D` built from the Kronecker form.
    pub fn materialize(&self) -> DenseMatrix {
        let d = self.color_dim();
        let mut out = DenseMatrix::identity(4 * d);
        for mu in 0..4 {
            let v = &self.links[mu];
            for alpha in 0..4 {
                for beta in 0..4 {
                    let m = self.minus[mu][alpha][beta];
                    let p = self.plus[mu][alpha][beta];
                    if m == Z && p == Z {
                        continue;
                    }
                    for a in 0..d {
                        for b in 0..d {
                            out[(alpha * d + a, beta * d + b)] -= self.kappa * (m * v[(a, b)] + p * v[(b, a)]);
                        }
                    }
                }
            }
        }
        out
    }
}

/// `A = D D^H`, Hermitian positive semi-definite and J-symmetric with
/// `J = (C gamma_5) ⊗ I_d`.
#[derive(Clone, Debug)]
pub struct TekOperator {
    dirac: WilsonDirac,
}

impl TekOperator {
    pub fn new(dirac: WilsonDirac) -> Self {
        Self { dirac }
    }

    pub fn random(color_dim: usize, kappa: f64, seed: u64) -> Result<Self> {
        Ok(Self::new(WilsonDirac::random(color_dim, kappa, seed)?))
    }

    pub fn dirac(&self) -> &WilsonDirac {
        &self.dirac
    }

    pub fn j_operator(&self) -> JOperator {
        JOperator::spin_tensor(self.dirac.color_dim())
    }
}

impl LinearOperator for TekOperator {
    fn dim(&self) -> usize {
        self.dirac.dim()
    }

    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        let mut tmp = vec![Z; x.len()];
        self.dirac.apply(x, &mut tmp, true);
        self.dirac.apply(&tmp, y, false);
    }
}

/// Color dimension `N^2 - 1` for gauge group SU(N).
pub fn su_n_color_dim(n: usize) -> Result<usize> {
    if n < 2 {
        return Err(invalid(format!("SU(N) needs N >= 2, got {n}")));
    }
    Ok(n * n - 1)
}

/// Operator dimension `4 (N^2 - 1)`.
pub fn su_n_dim(n: usize) -> Result<usize> {
    Ok(4 * su_n_color_dim(n)?)
}

/// `s ⊗ I_d` in the spin-outermost layout.
pub fn spin_kron_identity(s: &Spin, d: usize) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(4 * d, 4 * d);
    for alpha in 0..4 {
        for beta in 0..4 {
            if s[alpha][beta] == Z {
                continue;
            }
            for a in 0..d {
                out[(alpha * d + a, beta * d + a)] = s[alpha][beta];
            }
        }
    }
    out
}

/// Residuals of the discrete symmetries of a dense `D`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymmetryReport {
    /// `max |Gamma5 D Gamma5 - D^H|`.
    pub gamma5_hermiticity: f64,
    /// `max |C D C^T - D^T|` with `C` extended by the identity.
    pub charge_conjugation: f64,
    /// `max |J A J^T - A^T|` for `A = D D^H`.
    pub j_symmetry: f64,
    /// `max |A - A^H|`.
    pub hermiticity: f64,
}

pub fn symmetry_report(dirac: &WilsonDirac) -> SymmetryReport {
    let g = GammaAlgebra::new();
    let d = dirac.color_dim();
    let dm = dirac.materialize();
    let dh = dm.adjoint();
    let g5 = spin_kron_identity(&g.gamma5, d);
    let c = spin_kron_identity(&g.c, d);
    let j = spin_kron_identity(&g.j, d);
    let a = dm.matmul(&dh).unwrap();
    let g5dg5 = g5.matmul(&dm).unwrap().matmul(&g5).unwrap();
    let cdct = c.matmul(&dm).unwrap().matmul(&c.transpose()).unwrap();
    let jajt = j.matmul(&a).unwrap().matmul(&j.transpose()).unwrap();
    SymmetryReport {
        gamma5_hermiticity: g5dg5.max_abs_diff(&dh),
        charge_conjugation: cdct.max_abs_diff(&dm.transpose()),
        j_symmetry: jajt.max_abs_diff(&a.transpose()),
        hermiticity: a.hermiticity_defect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eig, norm};
    use crate::operator::materialize;

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn gamma_algebra() {
        let g = GammaAlgebra::new();
        assert!(g.clifford_defect() < 1e-15);
        assert!(spin_max_abs_diff(&g.gamma5_from_product(), &g.gamma5) < 1e-15);
        let expected_j = [
            [Z, -ONE, Z, Z],
            [ONE, Z, Z, Z],
            [Z, Z, Z, -ONE],
            [Z, Z, ONE, Z],
        ];
        assert_eq!(g.j, expected_j);
        // C gamma_mu C^{-1} = -gamma_mu^T, C^{-1} = C^T
        for gm in &g.gamma {
            let lhs = spin_mul(&spin_mul(&g.c, gm), &spin_transpose(&g.c));
            let rhs = spin_map(gm, |i, j| -gm[j][i]);
            assert!(spin_max_abs_diff(&lhs, &rhs) < 1e-15);
        }
        let jt = spin_transpose(&g.j);
        assert_eq!(spin_map(&jt, |i, j| -jt[i][j]), g.j);
        assert_eq!(spin_mul(&g.j, &jt), spin_identity());
    }

    #[test]
    fn matrix_free_matches_kronecker_form() {
        let dirac = WilsonDirac::random(5, DEFAULT_KAPPA, 11).unwrap();
        let dm = dirac.materialize();
        let psi: Vec<Complex64> = (0..20).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.7).cos())).collect();
        let mut out = vec![Z; 20];
        dirac.apply(&psi, &mut out, false);
        let expect = dm.matvec(&psi);
        assert!(out.iter().zip(&expect).all(|(a, b)| (a - b).norm() < 1e-14));
        dirac.apply(&psi, &mut out, true);
        let expect = dm.adjoint().matvec(&psi);
        assert!(out.iter().zip(&expect).all(|(a, b)| (a - b).norm() < 1e-14));
    }

    #[test]
    fn symmetries_at_small_color_dim() {
        let dirac = WilsonDirac::random(8, DEFAULT_KAPPA, 2).unwrap();
        assert!(dirac.link_orthogonality_defect() < 1e-13);
        let rep = symmetry_report(&dirac);
        assert!(rep.gamma5_hermiticity < 1e-14, "{rep:?}");
        assert!(rep.charge_conjugation < 1e-14, "{rep:?}");
        assert!(rep.j_symmetry < 1e-13, "{rep:?}");
        assert!(rep.hermiticity < 1e-14, "{rep:?}");
    }

    #[test]
    fn zero_kappa_gives_identity() {
        let op = TekOperator::random(3, 0.0, 1).unwrap();
        let a = materialize(&op);
        assert!(a.max_abs_diff(&DenseMatrix::identity(12)) == 0.0);
    }

    #[test]
    fn identity_links_have_exact_spectrum() {
        // with V = I, D = I - 2 kappa * 4 * I_spin ⊗ I, since the gammas cancel
        let links = [0; 4].map(|_| RealMatrix::identity(2));
        let dirac = WilsonDirac::new(links, 0.1).unwrap();
        let a = materialize(&TekOperator::new(dirac));
        let expect = (1.0 - 0.8_f64).powi(2);
        assert!(a.max_abs_diff(&DenseMatrix::from_fn(8, 8, |i, j| if i == j { r(expect) } else { Z })) < 1e-14);
    }

    #[test]
    fn positive_semidefinite() {
        let op = TekOperator::random(6, DEFAULT_KAPPA, 4).unwrap();
        let (vals, _) = hermitian_eig(&materialize(&op)).unwrap();
        assert!(vals.iter().all(|&v| v >= -1e-12));
        let x = vec![r(1.0); 24];
        assert!(norm(&x) > 0.0);
    }

    #[test]
    fn sizing() {
        assert_eq!(su_n_dim(289).unwrap(), 334_080);
        assert_eq!(su_n_color_dim(5).unwrap(), 24);
        assert_eq!(su_n_color_dim(13).unwrap(), 168);
        assert!(su_n_dim(1).is_err());
    }

    #[test]
    fn mismatched_links_rejected() {
        let links = [RealMatrix::identity(2), RealMatrix::identity(2), RealMatrix::identity(3), RealMatrix::identity(2)];
        assert!(WilsonDirac::new(links, 0.1).is_err());
    }
}

//! Lanczos extension of a Krylov decomposition, with and without the dual
//! basis `W = J V*`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cg::CgConfig;
use crate::error::{check_dim, invalid, Error, Result};
use crate::linalg::{self, orthonormalize_scaled, ProjectedMatrix, REORTH_GAMMA};
use crate::matrix_gen::seeded_rng;
use crate::operator::{CountedOperator, JOperator};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Krylov space of `A`; largest eigenvalues first.
    #[default]
    Normal,
    /// Krylov space of `A^{-1}` (applied by CG); smallest eigenvalues first.
    Invert,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Self::Normal),
            "invert" => Ok(Self::Invert),
            other => Err(invalid(format!("unknown mode {other:?}"))),
        }
    }
}

/// The operator the Krylov space is built from: `A` or `A^{-1}`.
pub struct KrylovOperator<'a> {
    pub op: &'a CountedOperator,
    pub mode: Mode,
    pub cg: CgConfig,
}

impl<'a> KrylovOperator<'a> {
    pub fn new(op: &'a CountedOperator, mode: Mode, cg: CgConfig) -> Self {
        Self { op, mode, cg }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// One counted application.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        match self.mode {
            Mode::Normal => self.op.apply(v),
            Mode::Invert => self.op.apply_inverse(v, &self.cg).map(|(x, _)| x),
        }
    }
}

/// A Krylov decomposition `op V_j = V_j T_j + v_{j+1} t_{j+1}^T`.
///
/// After a successful extension the basis holds `active + 1` vectors (the
/// last one is the residual direction). After a breakdown it holds
/// `active` vectors, the diagonal entry of the last column is set, and
/// [`KrylovState::inject_random`] must run before the next extension.
#[derive(Clone, Debug)]
pub struct KrylovState {
    v: Vec<Vec<Complex64>>,
    w: Option<Vec<Vec<Complex64>>>,
    t: ProjectedMatrix,
    active: usize,
    broken: bool,
    mode: Mode,
    matvecs: usize,
    capped_sweeps: usize,
}

/// Largest tolerated `|Im alpha|` relative to `|Re alpha|`.
pub const ALPHA_IMAG_RTOL: f64 = 1e-12;
pub const ALPHA_IMAG_ATOL: f64 = 1e-13;

impl KrylovState {
    /// Starts from `v1` (normalized here). `j_op` selects the J-symmetric
    /// variant, which maintains `W = J V*` alongside `V`.
    pub fn start(v1: Vec<Complex64>, m: usize, j_op: Option<&JOperator>, mode: Mode) -> Result<Self> {
        if m == 0 {
            return Err(invalid("Krylov dimension m must be at least 1"));
        }
        let nrm = linalg::norm(&v1);
        if !(nrm > 0.0) || !nrm.is_finite() {
            return Err(invalid("start vector must be finite and non-zero"));
        }
        let mut v1 = v1;
        linalg::scale(&mut v1, 1.0 / nrm);
        let w = match j_op {
            Some(j) => {
                check_dim(j.dim(), v1.len())?;
                Some(vec![j.apply_conj(&v1)?])
            }
            None => None,
        };
        Ok(Self {
            v: vec![v1],
            w,
            t: ProjectedMatrix::new(m),
            active: 0,
            broken: false,
            mode,
            matvecs: 0,
            capped_sweeps: 0,
        })
    }

    /// Replaces the contents with a thick-restart decomposition: basis
    /// `u_1..u_k, v_{k+1}`, diagonal `theta` and coupling row `b`.
    pub fn compress(
        &mut self,
        basis: Vec<Vec<Complex64>>,
        theta: &[f64],
        coupling: &[f64],
        j_op: Option<&JOperator>,
    ) -> Result<()> {
        let k = theta.len();
        if basis.len() != k + 1 || coupling.len() != k {
            return Err(invalid("compressed basis must hold k + 1 vectors for k Ritz values"));
        }
        if k >= self.t.capacity() {
            return Err(invalid("restart window must be smaller than m"));
        }
        self.t.clear();
        for i in 0..k {
            self.t.set(i, i, theta[i]);
            self.t.set(k, i, coupling[i]);
        }
        self.w = match (j_op, self.w.is_some()) {
            (Some(j), true) => Some(basis.iter().map(|x| j.apply_conj(x)).collect::<Result<_>>()?),
            (None, false) => None,
            _ => return Err(invalid("J operator presence must match the state variant")),
        };
        self.v = basis;
        self.active = k;
        self.broken = false;
        Ok(())
    }

    pub fn basis(&self) -> &[Vec<Complex64>] {
        &self.v
    }

    pub fn dual(&self) -> Option<&[Vec<Complex64>]> {
        self.w.as_deref()
    }

    pub fn projected(&self) -> &ProjectedMatrix {
        &self.t
    }

    /// Number of completed columns of `T`.
    pub fn active(&self) -> usize {
        self.active
    }

    pub fn capacity(&self) -> usize {
        self.t.capacity()
    }

    pub fn is_broken(&self) -> bool {
        self.broken
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Counted operator applications made through this state.
    pub fn matvecs(&self) -> usize {
        self.matvecs
    }

    /// Steps whose reorthogonalization loop hit the sweep cap.
    pub fn capped_sweeps(&self) -> usize {
        self.capped_sweeps
    }

    pub fn is_jsym(&self) -> bool {
        self.w.is_some()
    }

    /// Breakdown recovery: appends a seeded random unit vector orthogonal to
    /// the current basis (and its dual) with zero coupling.
    pub fn inject_random(&mut self, seed: u64, j_op: Option<&JOperator>) -> Result<()> {
        if !self.broken {
            return Err(invalid("inject_random is only valid after a breakdown"));
        }
        let n = self.v[0].len();
        let mut rng = seeded_rng(seed);
        let raw: Vec<Complex64> =
            (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let reference = linalg::norm(&raw);
        let out = match &self.w {
            Some(w) => orthonormalize_scaled(raw, &[w, &self.v], REORTH_GAMMA, reference)?,
            None => orthonormalize_scaled(raw, &[&self.v], REORTH_GAMMA, reference)?,
        };
        let j = self.active - 1;
        self.t.set(j + 1, j, 0.0);
        if let (Some(w), Some(jop)) = (self.w.as_mut(), j_op) {
            w.push(jop.apply_conj(&out.vector)?);
        }
        self.v.push(out.vector);
        self.broken = false;
        Ok(())
    }
}

/// Extends a J-symmetric decomposition to `m` columns. Each new vector is
/// orthogonalized against `w_1..w_j` and `v_1..v_j` (interleaved, `w_i`
/// before `v_i`) with the `sqrt(2)` repeat rule.
pub fn lanczos_extend_jsym(kop: &KrylovOperator, j_op: &JOperator, state: &mut KrylovState, m: usize) -> Result<()> {
    if !state.is_jsym() {
        return Err(invalid("J-symmetric extension needs a state carrying W"));
    }
    check_dim(kop.dim(), j_op.dim())?;
    if 2 * m > kop.dim() {
        return Err(invalid(format!("m = {m} exceeds n/2 = {}", kop.dim() / 2)));
    }
    extend(kop, Some(j_op), state, m)
}

/// Extends a decomposition to `m` columns with full reorthogonalization
/// against `v_1..v_j` only.
pub fn lanczos_extend_plain(kop: &KrylovOperator, state: &mut KrylovState, m: usize) -> Result<()> {
    if state.is_jsym() {
        return Err(invalid("plain extension needs a state without W"));
    }
    if m > kop.dim() {
        return Err(invalid(format!("m = {m} exceeds n = {}", kop.dim())));
    }
    extend(kop, None, state, m)
}

fn extend(kop: &KrylovOperator, j_op: Option<&JOperator>, state: &mut KrylovState, m: usize) -> Result<()> {
    if state.broken {
        return Err(invalid("state is broken down; inject a restart vector first"));
    }
    if m > state.t.capacity() || m <= state.active {
        return Err(invalid(format!("cannot extend {} columns to {m}", state.active)));
    }
    check_dim(kop.dim(), state.v[0].len())?;
    if state.mode != kop.mode {
        return Err(invalid("operator mode does not match the state mode"));
    }

    for j in state.active..m {
        let mut y = kop.apply(&state.v[j])?;
        state.matvecs += 1;
        if !linalg::is_finite(&y) {
            return Err(Error::NonFinite("operator output"));
        }
        let reference = linalg::norm(&y);
        let alpha = linalg::dot(&state.v[j], &y);
        if alpha.im.abs() > ALPHA_IMAG_RTOL * alpha.re.abs() + ALPHA_IMAG_ATOL {
            return Err(Error::NonHermitian { re: alpha.re, im: alpha.im });
        }
        state.t.set(j, j, alpha.re);
        linalg::axpy(Complex64::new(-alpha.re, 0.0), &state.v[j], &mut y);

        let v_prefix = &state.v[..=j];
        let result = match &state.w {
            Some(w) => orthonormalize_scaled(y, &[&w[..=j], v_prefix], REORTH_GAMMA, reference),
            None => orthonormalize_scaled(y, &[v_prefix], REORTH_GAMMA, reference),
        };
        let out = match result {
            Ok(out) => out,
            Err(e @ Error::Breakdown { .. }) => {
                state.active = j + 1;
                state.broken = true;
                return Err(e);
            }
            Err(e) => return Err(e),
        };
        if out.capped {
            state.capped_sweeps += 1;
        }
        state.t.set(j + 1, j, out.norm);
        if let (Some(w), Some(jop)) = (state.w.as_mut(), j_op) {
            w.push(jop.apply_conj(&out.vector)?);
        }
        state.v.push(out.vector);
        state.active = j + 1;
    }
    Ok(())
}

/// `max |op V_j - V_j T_j - v_{j+1} t_{j+1}^T|` recomputed with uncounted
/// applications (of `A`, or `A^{-1}` via CG in invert mode).
pub fn decomposition_residual(kop: &KrylovOperator, state: &KrylovState) -> Result<f64> {
    decomposition_residual_of(kop, state.basis(), state.projected(), state.active())
}

/// The same check for the dual basis `W`, which satisfies the decomposition
/// with the same `T`.
pub fn dual_decomposition_residual(kop: &KrylovOperator, state: &KrylovState) -> Result<f64> {
    let w = state.dual().ok_or_else(|| invalid("state carries no dual basis"))?;
    decomposition_residual_of(kop, w, state.projected(), state.active())
}

fn decomposition_residual_of(
    kop: &KrylovOperator,
    basis: &[Vec<Complex64>],
    t: &ProjectedMatrix,
    j: usize,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for c in 0..j {
        let mut r = match kop.mode {
            Mode::Normal => kop.op.apply_uncounted(&basis[c])?,
            Mode::Invert => crate::cg::cg_solve(kop.op.inner(), &basis[c], &kop.cg, None)?.0,
        };
        for (i, b) in basis.iter().enumerate().take(j + 1) {
            let tij = t.get(i, c);
            if tij != 0.0 {
                linalg::axpy(Complex64::new(-tij, 0.0), b, &mut r);
            }
        }
        worst = r.iter().fold(worst, |acc, x| acc.max(x.norm()));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{symmetric_eig_small, DenseMatrix};
    use crate::operator::{DenseOperator, DiagonalOperator};

    fn normal(op: &CountedOperator) -> KrylovOperator<'_> {
        KrylovOperator::new(op, Mode::Normal, CgConfig::default())
    }

    #[test]
    fn two_by_two_terminates_after_one_step() {
        let lam = 0.625;
        let op = CountedOperator::new(DiagonalOperator::new(vec![lam, lam]));
        let j = JOperator::canonical_block(2).unwrap();
        let v1 = vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        let mut st = KrylovState::start(v1, 1, Some(&j), Mode::Normal).unwrap();
        let err = lanczos_extend_jsym(&normal(&op), &j, &mut st, 1).unwrap_err();
        assert!(matches!(err, Error::Breakdown { .. }));
        assert!((st.projected().get(0, 0) - lam).abs() < 1e-15);
        assert!(st.is_broken());
        // n/2 = 1: no room for a restart vector either
        assert!(st.inject_random(1, Some(&j)).is_err());
    }

    #[test]
    fn plain_diagonal_recovers_full_spectrum() {
        let op = CountedOperator::new(DiagonalOperator::new((1..=8).map(f64::from).collect()));
        let mut st = KrylovState::start(linalg::ones_normalized(8), 8, None, Mode::Normal).unwrap();
        let res = lanczos_extend_plain(&normal(&op), &mut st, 8);
        // the ninth direction does not exist
        assert!(matches!(res, Err(Error::Breakdown { .. })));
        let (mut vals, _) = symmetric_eig_small(&st.projected().leading(8)).unwrap();
        vals.sort_by(f64::total_cmp);
        for (i, v) in vals.iter().enumerate() {
            assert!((v - (i + 1) as f64).abs() < 1e-10, "{vals:?}");
        }
        assert_eq!(st.matvecs(), 8);
        assert_eq!(op.matvecs(), 8);
    }

    #[test]
    fn non_hermitian_detected() {
        let a = DenseMatrix::from_fn(2, 2, |i, j| if i == 0 && j == 0 { Complex64::new(1.0, 1.0) } else { Complex64::new(0.0, 0.0) });
        let op = CountedOperator::new(DenseOperator::new(a).unwrap());
        let mut st = KrylovState::start(vec![Complex64::new(1.0, 0.0); 2], 1, None, Mode::Normal).unwrap();
        let err = lanczos_extend_plain(&normal(&op), &mut st, 1).unwrap_err();
        assert!(matches!(err, Error::NonHermitian { .. }));
    }

    #[test]
    fn jsym_rejects_m_above_half() {
        let op = CountedOperator::new(DiagonalOperator::identity(4));
        let j = JOperator::canonical_block(4).unwrap();
        let mut st = KrylovState::start(linalg::ones_normalized(4), 3, Some(&j), Mode::Normal).unwrap();
        assert!(lanczos_extend_jsym(&normal(&op), &j, &mut st, 3).is_err());
    }

    #[test]
    fn mode_mismatch_rejected() {
        let op = CountedOperator::new(DiagonalOperator::identity(4));
        let mut st = KrylovState::start(linalg::ones_normalized(4), 2, None, Mode::Invert).unwrap();
        assert!(lanczos_extend_plain(&normal(&op), &mut st, 2).is_err());
    }
}

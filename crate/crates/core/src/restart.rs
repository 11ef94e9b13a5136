//! Thick-restart Lanczos drivers: the J-symmetric variant and the standard
//! baseline.
//!
//! Both share one driver. Each cycle extends the decomposition to `m`
//! columns, diagonalizes `T_m`, estimates residuals from the coupling row,
//! confirms candidates with a true residual, locks converged pairs and
//! compresses to `k = min(icnv + mwin, m - 1)` Ritz vectors plus the
//! carried residual direction.
//!
//! Locked pairs sit in the leading columns with zero coupling, so `T_m` is
//! block diagonal with an exactly diagonal locked block; only the trailing
//! block is handed to Jacobi and locked Ritz values and vectors are carried
//! through restarts bit for bit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cg::CgConfig;
use crate::error::{invalid, Error, Result};
use crate::lanczos::{lanczos_extend_jsym, lanczos_extend_plain, KrylovOperator, KrylovState, Mode};
use crate::linalg::{self, permute, sort_eigenpairs, sort_permutation, symmetric_eig_small, RealMatrix, SortKey};
use crate::matrix_gen::seeded_rng;
use crate::operator::{CountedOperator, JOperator};
use rand::Rng;

pub const DEFAULT_TOL: f64 = 1e-13;
pub const DEFAULT_MAX_RESTARTS: usize = 10_000;
const BREAKDOWN_SEED_BASE: u64 = 0xb4ea_d0c0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartVector {
    /// The normalized all-ones vector.
    #[default]
    Ones,
    SeededRandom(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Jsym,
    Standard,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Self::Jsym => "jsym",
            Self::Standard => "standard",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsym" => Ok(Self::Jsym),
            "standard" => Ok(Self::Standard),
            other => Err(invalid(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub nev: usize,
    pub mwin: usize,
    pub m: usize,
    pub mode: Mode,
    /// Absolute residual target `||A x - lambda x||`.
    pub tol: f64,
    pub max_restarts: usize,
    pub cg: CgConfig,
    pub start: StartVector,
}

impl SolverConfig {
    pub fn new(nev: usize, mwin: usize, m: usize) -> Self {
        Self {
            nev,
            mwin,
            m,
            mode: Mode::Normal,
            tol: DEFAULT_TOL,
            max_restarts: DEFAULT_MAX_RESTARTS,
            cg: CgConfig::for_eigen_tol(DEFAULT_TOL),
            start: StartVector::Ones,
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    /// Sets `tol` and the matching CG tolerance.
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self.cg = CgConfig::for_eigen_tol(tol);
        self
    }

    pub fn with_start(mut self, start: StartVector) -> Self {
        self.start = start;
        self
    }

    pub fn with_max_restarts(mut self, max_restarts: usize) -> Self {
        self.max_restarts = max_restarts;
        self
    }

    /// `(2 nev, 2 mwin, 2 m)`, the standard-solver setting that captures both
    /// members of each degenerate pair.
    pub fn doubled(&self) -> Self {
        Self { nev: 2 * self.nev, mwin: 2 * self.mwin, m: 2 * self.m, ..*self }
    }

    pub fn validate(&self, n: usize, algorithm: Algorithm) -> Result<()> {
        if !(1 <= self.nev && self.nev <= self.mwin && self.mwin < self.m) {
            return Err(invalid(format!(
                "need 1 <= nev <= mwin < m, got nev={} mwin={} m={}",
                self.nev, self.mwin, self.m
            )));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(invalid(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_restarts == 0 {
            return Err(invalid("max_restarts must be at least 1"));
        }
        let limit = match algorithm {
            Algorithm::Jsym => n / 2,
            Algorithm::Standard => n,
        };
        if self.m >= limit {
            return Err(invalid(format!("m = {} must be below {limit} for n = {n}", self.m)));
        }
        Ok(())
    }
}

/// One target's state at a restart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetRecord {
    pub eig_estimate: f64,
    pub res_estimate: f64,
    pub res_true: Option<f64>,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    /// 1-based cycle index.
    pub restart: usize,
    pub cum_matvec: usize,
    pub targets: Vec<TargetRecord>,
}

impl ConvergenceRecord {
    pub fn converged_count(&self) -> usize {
        self.targets.iter().filter(|t| t.converged).count()
    }
}

#[derive(Clone, Debug)]
pub struct EigenResult {
    pub algorithm: Algorithm,
    pub config: SolverConfig,
    /// Eigenvalues of `A` in target order (largest first in normal mode,
    /// smallest first in invert mode).
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<Complex64>>,
    /// `J x*` for each eigenvector (J-symmetric solver only).
    pub partners: Option<Vec<Vec<Complex64>>>,
    pub residuals: Vec<f64>,
    /// Set where `residuals[i]` is the coupling-row estimate, not a true residual.
    pub residual_estimated: Vec<bool>,
    pub converged: bool,
    /// Number of Lanczos cycles `N_conv`.
    pub restarts: usize,
    /// The solver's own tally of counted applications.
    pub matvecs: usize,
    pub cg_iterations: usize,
    pub breakdowns: usize,
    pub reorder_events: usize,
    pub records: Vec<ConvergenceRecord>,
}

/// State handed to a restart observer right after compression.
pub struct RestartSnapshot<'a> {
    pub restart: usize,
    pub icnv: usize,
    pub state: &'a KrylovState,
    pub kop: &'a KrylovOperator<'a>,
}

pub type RestartObserver<'o> = dyn FnMut(&RestartSnapshot<'_>) -> Result<()> + 'o;

/// `y = J x*`: the second eigenvector of a degenerate pair, orthogonal to `x`.
pub fn reconstruct_pair(j_op: &JOperator, x: &[Complex64]) -> Result<Vec<Complex64>> {
    j_op.apply_conj(x)
}

/// Thick-restart Lanczos for a Hermitian J-symmetric operator. Returns one
/// eigenvector per degenerate pair; the partner is in `partners`.
pub fn trlan_jsym(op: &CountedOperator, j_op: &JOperator, cfg: &SolverConfig) -> Result<EigenResult> {
    thick_restart(op, Some(j_op), cfg, None)
}

pub fn trlan_jsym_observed(
    op: &CountedOperator,
    j_op: &JOperator,
    cfg: &SolverConfig,
    observer: &mut RestartObserver<'_>,
) -> Result<EigenResult> {
    thick_restart(op, Some(j_op), cfg, Some(observer))
}

/// Standard thick-restart Lanczos (no dual basis).
pub fn trlan_standard(op: &CountedOperator, cfg: &SolverConfig) -> Result<EigenResult> {
    thick_restart(op, None, cfg, None)
}

pub fn trlan_standard_observed(
    op: &CountedOperator,
    cfg: &SolverConfig,
    observer: &mut RestartObserver<'_>,
) -> Result<EigenResult> {
    thick_restart(op, None, cfg, Some(observer))
}

/// `k = min(icnv + mwin, m - 1)`.
pub fn restart_window(icnv: usize, mwin: usize, m: usize) -> usize {
    (icnv + mwin).min(m - 1)
}

/// Residual estimate from the coupling entry `t_{m+1,i}`. In invert mode
/// `theta` is a Ritz value of `A^{-1}` and `c = ||A v_{m+1}||`.
pub fn residual_estimate(mode: Mode, coupling: f64, theta: f64, c: f64) -> f64 {
    match mode {
        Mode::Normal => coupling.abs(),
        Mode::Invert => c * (coupling / theta).abs(),
    }
}

fn start_vector(n: usize, start: StartVector) -> Vec<Complex64> {
    match start {
        StartVector::Ones => linalg::ones_normalized(n),
        StartVector::SeededRandom(seed) => {
            let mut rng = seeded_rng(seed);
            (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
        }
    }
}

/// Eigen-decomposition of `T_m` with the leading `locked` block already
/// diagonal: `Z = diag(I, Z_active)`.
fn decompose(t: &RealMatrix, locked: usize) -> Result<(Vec<f64>, RealMatrix)> {
    let m = t.rows();
    let active = RealMatrix::from_fn(m - locked, m - locked, |i, j| t[(locked + i, locked + j)]);
    let (vals, za) = symmetric_eig_small(&active)?;
    let mut z = RealMatrix::identity(m);
    let mut lam: Vec<f64> = (0..locked).map(|i| t[(i, i)]).collect();
    lam.extend(vals);
    for i in 0..m - locked {
        for j in 0..m - locked {
            z[(locked + i, locked + j)] = za[(i, j)];
        }
    }
    Ok((lam, z))
}

/// True when some target now tracks a different eigenvalue than last time:
/// its new estimate is closer to the previous estimate of another index.
fn reordered(prev: &[f64], cur: &[f64]) -> bool {
    cur.iter().enumerate().any(|(i, &x)| {
        let own = prev.get(i).map_or(f64::INFINITY, |p| (x - p).abs());
        prev.iter().enumerate().any(|(j, &p)| j != i && (x - p).abs() < own)
    })
}

fn true_residual(op: &CountedOperator, x: &[Complex64], ev: f64) -> Result<f64> {
    let mut r = op.apply_uncounted(x)?;
    linalg::axpy(Complex64::new(-ev, 0.0), x, &mut r);
    Ok(linalg::norm(&r))
}

fn thick_restart(
    op: &CountedOperator,
    j_op: Option<&JOperator>,
    cfg: &SolverConfig,
    mut observer: Option<&mut RestartObserver<'_>>,
) -> Result<EigenResult> {
    let n = op.dim();
    let algorithm = if j_op.is_some() { Algorithm::Jsym } else { Algorithm::Standard };
    cfg.validate(n, algorithm)?;
    if let Some(j) = j_op {
        crate::error::check_dim(n, j.dim())?;
    }
    let (nev, mwin, m) = (cfg.nev, cfg.mwin, cfg.m);
    let kop = KrylovOperator::new(op, cfg.mode, cfg.cg);
    let base_cg = op.cg_iterations();

    let mut state = KrylovState::start(start_vector(n, cfg.start), m, j_op, cfg.mode)?;
    let mut locked = 0;
    let mut extra_matvecs = 0;
    let mut breakdowns = 0;
    let mut reorder_events = 0;
    let mut records: Vec<ConvergenceRecord> = Vec::new();
    let mut prev_estimates: Option<Vec<f64>> = None;
    let mut restart = 0;

    loop {
        restart += 1;
        loop {
            let step = match j_op {
                Some(j) => lanczos_extend_jsym(&kop, j, &mut state, m),
                None => lanczos_extend_plain(&kop, &mut state, m),
            };
            match step {
                Ok(()) => break,
                Err(Error::Breakdown { .. }) => {
                    state.inject_random(BREAKDOWN_SEED_BASE + breakdowns as u64, j_op)?;
                    breakdowns += 1;
                    if state.active() == m {
                        break;
                    }
                }
                Err(e) => return Err(e),
            }
        }

        let t = state.projected().leading(m);
        let beta = state.projected().get(m, m - 1);
        let (mut theta, mut z) = decompose(&t, locked)?;
        let mut is_locked: Vec<bool> = (0..m).map(|i| i < locked).collect();
        let perm = sort_eigenpairs(&mut theta, &mut z, SortKey::Descending, None);
        permute(&mut is_locked, &perm);

        let mut coupling: Vec<f64> = (0..m).map(|i| beta * z[(m - 1, i)]).collect();
        for (c, &l) in coupling.iter_mut().zip(&is_locked) {
            if l {
                *c = 0.0;
            }
        }
        let c_norm = match cfg.mode {
            Mode::Normal => 0.0,
            Mode::Invert => {
                extra_matvecs += 1;
                linalg::norm(&op.apply(&state.basis()[m])?)
            }
        };
        let ev: Vec<f64> = theta
            .iter()
            .map(|&th| match cfg.mode {
                Mode::Normal => th,
                Mode::Invert => 1.0 / th,
            })
            .collect();

        // Ritz vectors are needed for the targets and the next window only.
        let keep = (nev + mwin).min(m - 1);
        let basis = &state.basis()[..m];
        let mut ritz: Vec<Vec<Complex64>> = (0..keep).map(|i| linalg::combine(basis, &z.column(i))).collect();

        let mut res_est: Vec<f64> = (0..m).map(|i| residual_estimate(cfg.mode, coupling[i], theta[i], c_norm)).collect();
        let mut res_true: Vec<Option<f64>> = vec![None; m];
        let mut conv = vec![false; m];
        for i in 0..nev {
            if is_locked[i] {
                conv[i] = true;
                continue;
            }
            if res_est[i] < cfg.tol {
                let r = true_residual(op, &ritz[i], ev[i])?;
                res_true[i] = Some(r);
                conv[i] = r < cfg.tol;
            }
        }

        let order = sort_permutation(&theta, SortKey::ConvergedFirst, Some(&conv));
        permute(&mut theta, &order);
        permute(&mut coupling, &order);
        permute(&mut conv, &order);
        permute(&mut res_est, &order);
        permute(&mut res_true, &order);
        let ev: Vec<f64> = order.iter().map(|&p| ev[p]).collect();
        // converged indices are below nev, so the first `keep` slots come
        // from the first `keep` Ritz vectors
        permute(&mut ritz, &order[..keep]);
        let icnv = conv.iter().filter(|&&c| c).count();
        for c in coupling.iter_mut().take(icnv) {
            *c = 0.0;
        }

        let estimates: Vec<f64> = ev[..nev].to_vec();
        if let Some(prev) = &prev_estimates {
            if reordered(prev, &estimates) {
                reorder_events += 1;
            }
        }
        prev_estimates = Some(estimates);

        let cum_matvec = state.matvecs() + extra_matvecs;
        records.push(ConvergenceRecord {
            restart,
            cum_matvec,
            targets: (0..nev)
                .map(|i| TargetRecord {
                    eig_estimate: ev[i],
                    res_estimate: res_est[i],
                    res_true: res_true[i],
                    converged: conv[i],
                })
                .collect(),
        });

        let done = icnv >= nev;
        if done || restart >= cfg.max_restarts {
            let eigenvectors: Vec<Vec<Complex64>> = ritz[..nev].to_vec();
            let mut residuals = Vec::with_capacity(nev);
            let mut residual_estimated = Vec::with_capacity(nev);
            for i in 0..nev {
                if conv[i] {
                    residuals.push(true_residual(op, &eigenvectors[i], ev[i])?);
                    residual_estimated.push(false);
                } else if let Some(r) = res_true[i] {
                    residuals.push(r);
                    residual_estimated.push(false);
                } else {
                    residuals.push(res_est[i]);
                    residual_estimated.push(true);
                }
            }
            let partners = match j_op {
                Some(j) => Some(eigenvectors.iter().map(|x| reconstruct_pair(j, x)).collect::<Result<_>>()?),
                None => None,
            };
            return Ok(EigenResult {
                algorithm,
                config: *cfg,
                eigenvalues: ev[..nev].to_vec(),
                eigenvectors,
                partners,
                residuals,
                residual_estimated,
                converged: done,
                restarts: restart,
                matvecs: cum_matvec,
                cg_iterations: op.cg_iterations() - base_cg,
                breakdowns,
                reorder_events,
                records,
            });
        }

        let k = restart_window(icnv, mwin, m);
        let mut next = ritz;
        next.truncate(k);
        next.push(state.basis()[m].clone());
        state.compress(next, &theta[..k], &coupling[..k], j_op)?;
        locked = icnv;

        if let Some(obs) = observer.as_deref_mut() {
            obs(&RestartSnapshot { restart, icnv, state: &state, kop: &kop })?;
        }
    }
}

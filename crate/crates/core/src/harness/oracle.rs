//! Dense Jacobi oracle for checking solver output on small matrices.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{hermitian_eig, DenseMatrix};
use crate::restart::{Algorithm, EigenResult};

/// Largest dimension the oracle will diagonalize.
pub const ORACLE_MAX_DIM: usize = 1000;
pub const MATCH_TOL: f64 = 1e-9;
pub const PAIR_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extreme {
    Largest,
    Smallest,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub passed: bool,
    /// `|computed - oracle|` per returned eigenvalue, in result order.
    pub gaps: Vec<f64>,
    /// Largest spread inside an oracle pair, when pairing was checked.
    pub max_pair_gap: Option<f64>,
    pub pairs_ok: Option<bool>,
    pub message: String,
}

/// All eigenvalues of a Hermitian matrix, ascending.
pub fn oracle_spectrum(a: &DenseMatrix) -> Result<Vec<f64>> {
    if a.rows() > ORACLE_MAX_DIM {
        return Err(invalid(format!("oracle limited to dim <= {ORACLE_MAX_DIM}, got {}", a.rows())));
    }
    let (mut vals, _) = hermitian_eig(a)?;
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Collapses an ascending spectrum into consecutive pairs, returning the
/// pair means and the largest in-pair spread. `None` for odd lengths.
pub fn pair_up(ascending: &[f64]) -> Option<(Vec<f64>, f64)> {
    if ascending.len() % 2 != 0 {
        return None;
    }
    let mut means = Vec::with_capacity(ascending.len() / 2);
    let mut spread: f64 = 0.0;
    for p in ascending.chunks_exact(2) {
        means.push(0.5 * (p[0] + p[1]));
        spread = spread.max(p[1] - p[0]);
    }
    Some((means, spread))
}

/// Compares `result` with the `count` extreme oracle eigenvalues.
///
/// For a J-symmetric result each returned value must match a distinct
/// oracle pair; for a standard result the values are matched with
/// multiplicity. With `paired` set the oracle spectrum must also split into
/// degenerate pairs.
pub fn verify_against_oracle(
    a: &DenseMatrix,
    result: &EigenResult,
    which: Extreme,
    count: usize,
    paired: bool,
) -> Result<Verdict> {
    let spectrum = oracle_spectrum(a)?;
    verify_against_spectrum(&spectrum, result, which, count, paired)
}

pub fn verify_against_spectrum(
    ascending: &[f64],
    result: &EigenResult,
    which: Extreme,
    count: usize,
    paired: bool,
) -> Result<Verdict> {
    if count == 0 || count > result.eigenvalues.len() {
        return Err(invalid(format!("count must be in 1..={}", result.eigenvalues.len())));
    }
    let mut problems = Vec::new();
    let (pair_gap, pairs_ok, means) = if paired {
        match pair_up(ascending) {
            Some((means, spread)) => {
                let ok = spread <= PAIR_TOL;
                if !ok {
                    problems.push(format!("oracle pair spread {spread:.3e} exceeds {PAIR_TOL:e}"));
                }
                (Some(spread), Some(ok), Some(means))
            }
            None => {
                problems.push("odd dimension cannot be paired".to_string());
                (None, Some(false), None)
            }
        }
    } else {
        (None, None, None)
    };

    let reference: Vec<f64> = match (result.algorithm, &means) {
        (Algorithm::Jsym, Some(means)) => means.clone(),
        (Algorithm::Jsym, None) if paired => Vec::new(),
        (Algorithm::Jsym, None) => pair_up(ascending).map(|(m, _)| m).unwrap_or_default(),
        (Algorithm::Standard, _) => ascending.to_vec(),
    };
    let mut ordered = reference;
    if which == Extreme::Largest {
        ordered.reverse();
    }
    let mut computed: Vec<f64> = result.eigenvalues[..count].to_vec();
    match which {
        Extreme::Largest => computed.sort_by(|x, y| y.total_cmp(x)),
        Extreme::Smallest => computed.sort_by(f64::total_cmp),
    }
    let mut gaps = Vec::with_capacity(count);
    if ordered.len() < count {
        problems.push(format!("oracle has only {} reference values", ordered.len()));
    } else {
        for (c, o) in computed.iter().zip(&ordered) {
            gaps.push((c - o).abs());
        }
        let worst = gaps.iter().cloned().fold(0.0, f64::max);
        if !(worst <= MATCH_TOL) {
            problems.push(format!("largest eigenvalue gap {worst:.3e} exceeds {MATCH_TOL:e}"));
        }
    }
    let passed = problems.is_empty();
    let message = if passed { format!("{count} eigenvalues match the oracle") } else { problems.join("; ") };
    Ok(Verdict { passed, gaps, max_pair_gap: pair_gap, pairs_ok, message })
}

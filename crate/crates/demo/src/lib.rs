//! Browser demo: each exported function runs a small computation and returns
//! a JSON string for `www/index.html` to draw.

use jsym_lanczos::cg::CgConfig;
use jsym_lanczos::harness::csv::write_convergence_csv;
use jsym_lanczos::lanczos::{lanczos_extend_plain, KrylovOperator, KrylovState, Mode};
use jsym_lanczos::linalg::{max_cross_inner, ones_normalized, DenseMatrix};
use jsym_lanczos::matrix_gen::{gen_random_hjs, seeded_rng};
use jsym_lanczos::operator::{CountedOperator, DenseOperator, JOperator};
use jsym_lanczos::restart::{trlan_jsym, trlan_standard, ConvergenceRecord, SolverConfig};
use jsym_lanczos::tek::{symmetry_report, TekOperator};
use jsym_lanczos::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Keeps browser runs interactive.
pub const MAX_DEMO_DIM: usize = 400;

fn check_size(n: usize) -> Result<()> {
    if n > MAX_DEMO_DIM {
        return Err(Error::InvalidArgument(format!("demo matrices are limited to dimension {MAX_DEMO_DIM}, got {n}")));
    }
    Ok(())
}

#[derive(Serialize)]
struct Point {
    cum_matvec: usize,
    /// Largest residual estimate over the targets still unconverged.
    worst_residual: f64,
    converged: usize,
}

#[derive(Serialize)]
struct Curve {
    algorithm: &'static str,
    nev: usize,
    mwin: usize,
    m: usize,
    n_mv: usize,
    n_conv: usize,
    eigenvalues: Vec<f64>,
    points: Vec<Point>,
    csv: String,
}

#[derive(Serialize)]
struct History {
    n: usize,
    planted_top: Vec<f64>,
    curves: Vec<Curve>,
}

fn curve(algorithm: &'static str, cfg: &SolverConfig, records: &[ConvergenceRecord], eigenvalues: Vec<f64>) -> Result<Curve> {
    let points = records
        .iter()
        .map(|r| Point {
            cum_matvec: r.cum_matvec,
            worst_residual: r
                .targets
                .iter()
                .filter(|t| !t.converged)
                .map(|t| t.res_estimate)
                .fold(0.0, f64::max),
            converged: r.converged_count(),
        })
        .collect();
    let mut csv = Vec::new();
    write_convergence_csv(&mut csv, records)?;
    Ok(Curve {
        algorithm,
        nev: cfg.nev,
        mwin: cfg.mwin,
        m: cfg.m,
        n_mv: records.last().map_or(0, |r| r.cum_matvec),
        n_conv: records.len(),
        eigenvalues,
        points,
        csv: String::from_utf8(csv).expect("CSV is ASCII"),
    })
}

/// Runs both solvers on one planted matrix, the standard one with doubled
/// parameters.
pub fn convergence_history_json(n_half: usize, nev: usize, mwin: usize, m: usize, seed: u64) -> Result<String> {
    check_size(2 * n_half)?;
    let planted = gen_random_hjs(n_half, seed)?;
    let j = planted.j_operator();
    let mut planted_top = planted.sorted_desc();
    planted_top.truncate(nev);
    let op = CountedOperator::new(DenseOperator::new(planted.a)?);
    let cfg = SolverConfig::new(nev, mwin, m);
    let jsym = trlan_jsym(&op, &j, &cfg)?;
    let doubled = cfg.doubled();
    let standard = trlan_standard(&op, &doubled)?;
    let history = History {
        n: 2 * n_half,
        planted_top,
        curves: vec![
            curve("jsym", &cfg, &jsym.records, jsym.eigenvalues)?,
            curve("standard", &doubled, &standard.records, standard.eigenvalues)?,
        ],
    };
    Ok(serde_json::to_string(&history)?)
}

#[derive(Serialize)]
struct Orthogonality {
    m: usize,
    /// `max |V_j^H J V_j^*|` for j = 1..m on the J-symmetric matrix.
    hjs: Vec<f64>,
    /// The same quantity for a Hermitian matrix without J-symmetry.
    generic: Vec<f64>,
}

fn partner_overlap_curve(a: DenseMatrix, j: &JOperator, m: usize) -> Result<Vec<f64>> {
    let n = a.rows();
    let op = CountedOperator::new(DenseOperator::new(a)?);
    let kop = KrylovOperator::new(&op, Mode::Normal, CgConfig::default());
    let mut state = KrylovState::start(ones_normalized(n), m, None, Mode::Normal)?;
    match lanczos_extend_plain(&kop, &mut state, m) {
        Ok(()) | Err(Error::Breakdown { .. }) => {}
        Err(e) => return Err(e),
    }
    let v = &state.basis()[..state.active()];
    let partners: Vec<Vec<Complex64>> = v.iter().map(|x| j.apply_conj(x)).collect::<Result<_>>()?;
    Ok((1..=v.len()).map(|k| max_cross_inner(&v[..k], &partners[..k])).collect())
}

/// Plain Lanczos (no J-orthogonalization) on a planted matrix and on a
/// random Hermitian matrix of the same size, tracking how far the basis is
/// from its J-partners.
pub fn emergent_orthogonality_json(n_half: usize, m: usize, seed: u64) -> Result<String> {
    check_size(2 * n_half)?;
    let planted = gen_random_hjs(n_half, seed)?;
    let j = planted.j_operator();
    let n = planted.n();
    if m == 0 || m > n_half {
        return Err(Error::InvalidArgument(format!("m must lie in 1..={n_half}")));
    }
    let hjs = partner_overlap_curve(planted.a, &j, m)?;

    let mut rng = seeded_rng(seed ^ 0x9e37_79b9);
    let g = DenseMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let mut h = g.clone();
    let gh = g.adjoint();
    for r in 0..n {
        for c in 0..n {
            h[(r, c)] = (g[(r, c)] + gh[(r, c)]) * 0.5;
        }
    }
    let generic = partner_overlap_curve(h, &j, m)?;
    Ok(serde_json::to_string(&Orthogonality { m, hjs, generic })?)
}

#[derive(Serialize)]
struct LowModes {
    dim: usize,
    kappa: f64,
    eigenvalues: Vec<f64>,
    residuals: Vec<f64>,
    n_mv: usize,
    n_conv: usize,
    cg_iterations: usize,
    gamma5_hermiticity: f64,
    charge_conjugation: f64,
    j_symmetry: f64,
}

/// Smallest eigenvalues of `D D^H` for a random TEK background, in invert
/// mode, plus the symmetry residuals of `D`.
pub fn tek_low_modes_json(color_dim: usize, kappa: f64, nev: usize, seed: u64) -> Result<String> {
    check_size(4 * color_dim)?;
    let tek = TekOperator::random(color_dim, kappa, seed)?;
    let sym = symmetry_report(tek.dirac());
    let j = tek.j_operator();
    let dim = tek.dirac().dim();
    let op = CountedOperator::new(tek);
    let m = (6 * nev).min(dim / 2 - 1);
    let cfg = SolverConfig::new(nev, 2 * nev, m).with_mode(Mode::Invert);
    let res = trlan_jsym(&op, &j, &cfg)?;
    Ok(serde_json::to_string(&LowModes {
        dim,
        kappa,
        eigenvalues: res.eigenvalues,
        residuals: res.residuals,
        n_mv: res.matvecs,
        n_conv: res.restarts,
        cg_iterations: op.cg_iterations(),
        gamma5_hermiticity: sym.gamma5_hermiticity,
        charge_conjugation: sym.charge_conjugation,
        j_symmetry: sym.j_symmetry,
    })?)
}

fn to_js(r: Result<String>) -> std::result::Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen]
pub fn convergence_history(n_half: usize, nev: usize, mwin: usize, m: usize, seed: u32) -> std::result::Result<String, JsValue> {
    to_js(convergence_history_json(n_half, nev, mwin, m, seed.into()))
}

#[wasm_bindgen]
pub fn emergent_orthogonality(n_half: usize, m: usize, seed: u32) -> std::result::Result<String, JsValue> {
    to_js(emergent_orthogonality_json(n_half, m, seed.into()))
}

#[wasm_bindgen]
pub fn tek_low_modes(color_dim: usize, kappa: f64, nev: usize, seed: u32) -> std::result::Result<String, JsValue> {
    to_js(tek_low_modes_json(color_dim, kappa, nev, seed.into()))
}

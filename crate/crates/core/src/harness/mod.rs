//! Experiment harness: builds matrices, runs the solvers, checks the cost
//! model and writes per-run convergence histories.

pub mod csv;
pub mod manifest;
pub mod oracle;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lanczos::Mode;
use crate::linalg::DenseMatrix;
use crate::matrix_gen::gen_random_hjs;
use crate::mmio;
use crate::operator::{CountedOperator, DenseOperator, JOperator};
use crate::restart::{trlan_jsym, trlan_standard, Algorithm, EigenResult, SolverConfig, DEFAULT_TOL};
use crate::tek::{su_n_color_dim, TekOperator, DEFAULT_KAPPA};
use manifest::Manifest;

pub use oracle::{verify_against_oracle, Extreme, Verdict};

/// `||A||` above which absolute tolerances are likely meaningless.
pub const NORM_WARNING: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixSource {
    RandomHjs { n_half: usize },
    Tek { color_dim: usize, kappa: f64 },
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub source: MatrixSource,
    /// One matrix per seed (ignored for file sources).
    pub seeds: Vec<u64>,
    pub jsym: SolverConfig,
    /// Baseline configuration; the doubled J-symmetric one when `None`.
    pub baseline: Option<SolverConfig>,
    pub algorithms: Vec<Algorithm>,
    pub out_dir: Option<PathBuf>,
    /// Run the dense oracle on each result (small matrices only).
    pub verify: bool,
}

impl ExperimentSpec {
    pub fn new(source: MatrixSource, seeds: Vec<u64>, jsym: SolverConfig) -> Self {
        Self {
            source,
            seeds,
            jsym,
            baseline: None,
            algorithms: vec![Algorithm::Jsym, Algorithm::Standard],
            out_dir: None,
            verify: false,
        }
    }

    pub fn config_for(&self, algorithm: Algorithm) -> SolverConfig {
        match algorithm {
            Algorithm::Jsym => self.jsym,
            Algorithm::Standard => self.baseline.unwrap_or_else(|| self.jsym.doubled()),
        }
    }
}

/// Keys understood by [`RunSettings::from_manifest`].
pub const MANIFEST_KEYS: &[&str] =
    &["algo", "mode", "nev", "mwin", "m", "tol", "seed", "seeds", "matrix", "n-half", "d", "su-n", "kappa", "out"];

/// Experiment settings resolved from a manifest, with defaults for absent keys.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSettings {
    pub algo: Algorithm,
    pub mode: Mode,
    pub nev: usize,
    pub mwin: usize,
    pub m: usize,
    pub tol: f64,
    pub seed: u64,
    pub seeds: usize,
    pub source: MatrixSource,
    pub out: Option<PathBuf>,
}

impl RunSettings {
    pub fn from_manifest(man: &Manifest) -> Result<Self> {
        let unknown = man.unknown_keys(MANIFEST_KEYS);
        if !unknown.is_empty() {
            return Err(Error::Parse(format!("unknown manifest keys: {}", unknown.join(", "))));
        }
        let color_dim = match (man.get_parsed::<usize>("d")?, man.get_parsed::<usize>("su-n")?) {
            (Some(_), Some(_)) => return Err(invalid("give either d or su-n, not both")),
            (Some(d), None) => d,
            (None, Some(n)) => su_n_color_dim(n)?,
            (None, None) => 24,
        };
        let source = match man.get("matrix").unwrap_or("random") {
            "random" => MatrixSource::RandomHjs { n_half: man.get_parsed("n-half")?.unwrap_or(100) },
            "tek" => MatrixSource::Tek { color_dim, kappa: man.get_parsed("kappa")?.unwrap_or(DEFAULT_KAPPA) },
            other => match other.strip_prefix("file:") {
                Some(path) if !path.is_empty() => MatrixSource::File { path: PathBuf::from(path) },
                _ => return Err(invalid(format!("matrix must be random, tek or file:PATH, got {other:?}"))),
            },
        };
        Ok(Self {
            algo: man.get_parsed("algo")?.unwrap_or(Algorithm::Jsym),
            mode: man.get_parsed("mode")?.unwrap_or(Mode::Normal),
            nev: man.get_parsed("nev")?.unwrap_or(5),
            mwin: man.get_parsed("mwin")?.unwrap_or(10),
            m: man.get_parsed("m")?.unwrap_or(50),
            tol: man.get_parsed("tol")?.unwrap_or(DEFAULT_TOL),
            seed: man.get_parsed("seed")?.unwrap_or(0),
            seeds: man.get_parsed("seeds")?.unwrap_or(1),
            source,
            out: man.get("out").map(PathBuf::from),
        })
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig::new(self.nev, self.mwin, self.m).with_mode(self.mode).with_tol(self.tol)
    }

    /// `seeds` consecutive seeds starting at `seed`.
    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds as u64).map(|i| self.seed + i).collect()
    }

    /// One algorithm, configured directly by the settings.
    pub fn single_run(&self, verify: bool) -> ExperimentSpec {
        let cfg = self.solver_config();
        let mut spec = ExperimentSpec::new(self.source.clone(), self.seed_list(), cfg);
        spec.algorithms = vec![self.algo];
        if self.algo == Algorithm::Standard {
            spec.baseline = Some(cfg);
        }
        spec.out_dir = self.out.clone();
        spec.verify = verify;
        spec
    }

    /// Both algorithms; the settings configure the J-symmetric solver and the
    /// baseline uses the doubled parameters.
    pub fn comparison(&self) -> ExperimentSpec {
        let mut spec = ExperimentSpec::new(self.source.clone(), self.seed_list(), self.solver_config());
        spec.out_dir = self.out.clone();
        spec
    }
}

/// A matrix ready to be solved.
pub struct MatrixInstance {
    pub label: String,
    pub seed: Option<u64>,
    pub op: CountedOperator,
    pub j: JOperator,
    /// Dense form, kept for the oracle when cheap.
    pub dense: Option<DenseMatrix>,
    pub planted: Option<Vec<f64>>,
}

pub fn build_instance(source: &MatrixSource, seed: u64) -> Result<MatrixInstance> {
    match source {
        MatrixSource::RandomHjs { n_half } => {
            let p = gen_random_hjs(*n_half, seed)?;
            let j = p.j_operator();
            let dense = (p.n() <= oracle::ORACLE_MAX_DIM).then(|| p.a.clone());
            Ok(MatrixInstance {
                label: format!("random-n{}-seed{seed}", p.n()),
                seed: Some(seed),
                op: CountedOperator::new(DenseOperator::new(p.a)?),
                j,
                dense,
                planted: Some(p.eigenvalues),
            })
        }
        MatrixSource::Tek { color_dim, kappa } => {
            let tek = TekOperator::random(*color_dim, *kappa, seed)?;
            let j = tek.j_operator();
            Ok(MatrixInstance {
                label: format!("tek-d{color_dim}-seed{seed}"),
                seed: Some(seed),
                op: CountedOperator::new(tek),
                j,
                dense: None,
                planted: None,
            })
        }
        MatrixSource::File { path } => {
            let (a, sidecar) = mmio::load(path)?;
            let realization = sidecar.as_ref().map_or("canonical-block", |s| s.j_realization.as_str());
            let j = JOperator::from_realization(realization, a.rows())?;
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("matrix").to_string();
            Ok(MatrixInstance {
                label: stem,
                seed: sidecar.as_ref().and_then(|s| s.seed),
                dense: (a.rows() <= oracle::ORACLE_MAX_DIM).then(|| a.clone()),
                op: CountedOperator::new(DenseOperator::new(a)?),
                j,
                planted: sidecar.and_then(|s| s.planted_eigenvalues),
            })
        }
    }
}

/// The cost-model bracket `m + (m-mwin-nev)(N_conv-1) < N_MV < m + (m-mwin)(N_conv-1)`,
/// shifted by `N_conv` in invert mode for the per-cycle `||A v_{m+1}||`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub lower: i64,
    pub upper: i64,
    pub n_mv: i64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

impl BoundCheck {
    pub fn holds(&self) -> bool {
        self.lower_ok && self.upper_ok
    }
}

/// `None` when `n_conv <= 1`, where the bracket does not apply.
pub fn check_bounds(cfg: &SolverConfig, n_conv: usize, n_mv: usize) -> Option<BoundCheck> {
    if n_conv <= 1 {
        return None;
    }
    let (m, mwin, nev) = (cfg.m as i64, cfg.mwin as i64, cfg.nev as i64);
    let cycles = n_conv as i64;
    let offset = if cfg.mode == Mode::Invert { cycles } else { 0 };
    let lower = m + (m - mwin - nev) * (cycles - 1) + offset;
    let upper = m + (m - mwin) * (cycles - 1) + offset;
    let n_mv = n_mv as i64;
    Some(BoundCheck { lower, upper, n_mv, lower_ok: lower < n_mv, upper_ok: n_mv < upper })
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub label: String,
    pub seed: Option<u64>,
    pub algorithm: Algorithm,
    pub converged: bool,
    pub n_conv: usize,
    pub n_mv: usize,
    /// Counted applications observed on the operator itself.
    pub tally: usize,
    pub cg_iterations: usize,
    /// Inverse applications accepted at the CG rounding floor.
    pub cg_floor_solves: usize,
    pub breakdowns: usize,
    pub reorder_events: usize,
    pub wall_secs: f64,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub bounds: Option<BoundCheck>,
    pub verdict: Option<Verdict>,
    pub csv_path: Option<PathBuf>,
    pub error: Option<String>,
}

impl RunSummary {
    pub fn ok(&self) -> bool {
        self.error.is_none() && self.converged && self.verdict.as_ref().is_none_or(|v| v.passed)
    }

    pub fn tally_matches(&self) -> bool {
        self.tally == self.n_mv
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub runs: usize,
    pub min_n_mv: usize,
    pub avg_n_mv: f64,
    pub max_n_mv: usize,
    pub avg_n_conv: f64,
}

impl Aggregate {
    pub fn of<'a>(runs: impl IntoIterator<Item = &'a RunSummary>) -> Option<Self> {
        let done: Vec<&RunSummary> = runs.into_iter().filter(|r| r.converged && r.error.is_none()).collect();
        if done.is_empty() {
            return None;
        }
        let k = done.len() as f64;
        Some(Self {
            runs: done.len(),
            min_n_mv: done.iter().map(|r| r.n_mv).min().unwrap(),
            avg_n_mv: done.iter().map(|r| r.n_mv as f64).sum::<f64>() / k,
            max_n_mv: done.iter().map(|r| r.n_mv).max().unwrap(),
            avg_n_conv: done.iter().map(|r| r.n_conv as f64).sum::<f64>() / k,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub runs: Vec<RunSummary>,
    pub jsym: Option<Aggregate>,
    pub standard: Option<Aggregate>,
    /// `avg N_MV(standard) / avg N_MV(jsym)` over matrices where both converged.
    pub ratio: Option<f64>,
    pub bound_violations: usize,
    pub warnings: Vec<String>,
}

impl ComparisonReport {
    fn assemble(runs: Vec<RunSummary>, warnings: Vec<String>) -> Self {
        let of = |a: Algorithm| Aggregate::of(runs.iter().filter(|r| r.algorithm == a));
        let jsym = of(Algorithm::Jsym);
        let standard = of(Algorithm::Standard);
        let mut pairs = Vec::new();
        for r in runs.iter().filter(|r| r.algorithm == Algorithm::Jsym && r.converged) {
            if let Some(s) = runs.iter().find(|s| s.algorithm == Algorithm::Standard && s.label == r.label && s.converged) {
                pairs.push((r.n_mv as f64, s.n_mv as f64));
            }
        }
        let ratio = (!pairs.is_empty()).then(|| {
            let j: f64 = pairs.iter().map(|p| p.0).sum();
            let s: f64 = pairs.iter().map(|p| p.1).sum();
            s / j
        });
        let bound_violations = runs.iter().filter(|r| r.bounds.is_some_and(|b| !b.holds())).count();
        Self { runs, jsym, standard, ratio, bound_violations, warnings }
    }

    /// Every run converged, every oracle verdict passed and every tally matched.
    pub fn all_ok(&self) -> bool {
        self.runs.iter().all(|r| r.ok() && r.tally_matches())
    }

    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        for r in &self.runs {
            let _ = write!(s, "{:<28} {:<8} ", r.label, r.algorithm.name());
            match &r.error {
                Some(e) => {
                    let _ = writeln!(s, "ERROR {e}");
                    continue;
                }
                None => {
                    let _ = write!(s, "converged={} N_conv={} N_MV={}", r.converged, r.n_conv, r.n_mv);
                }
            }
            if r.cg_iterations > 0 {
                let _ = write!(s, " cg_iters={}", r.cg_iterations);
            }
            if r.cg_floor_solves > 0 {
                let _ = write!(s, " cg_floor_solves={}", r.cg_floor_solves);
            }
            if let Some(b) = r.bounds {
                let _ = write!(s, " bounds=({} < N_MV < {}){}", b.lower, b.upper, if b.holds() { "" } else { " VIOLATED" });
            }
            if let Some(v) = &r.verdict {
                let _ = write!(s, " oracle={}", if v.passed { "pass" } else { "FAIL" });
            }
            if !r.tally_matches() {
                let _ = write!(s, " TALLY MISMATCH ({})", r.tally);
            }
            let _ = writeln!(s, " time={:.2}s", r.wall_secs);
        }
        for (name, agg) in [("jsym", &self.jsym), ("standard", &self.standard)] {
            if let Some(a) = agg {
                let _ = writeln!(
                    s,
                    "{name}: runs={} N_MV [min {}, avg {:.1}, max {}] avg N_conv {:.1}",
                    a.runs, a.min_n_mv, a.avg_n_mv, a.max_n_mv, a.avg_n_conv
                );
            }
        }
        match self.ratio {
            Some(r) => {
                let _ = writeln!(s, "N_MV ratio standard/jsym: {r:.4}");
            }
            None => {
                let _ = writeln!(s, "N_MV ratio standard/jsym: undefined");
            }
        }
        let _ = writeln!(s, "bound violations: {}", self.bound_violations);
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }

    /// Deterministic per-run table (no timings).
    pub fn summary_csv(&self) -> String {
        let mut s = String::from("label,algorithm,converged,n_conv,n_mv,cg_iterations,bound_lower,bound_upper,bounds_hold,oracle\n");
        for r in &self.runs {
            let (lo, hi, ok) = match r.bounds {
                Some(b) => (b.lower.to_string(), b.upper.to_string(), b.holds().to_string()),
                None => (String::new(), String::new(), String::new()),
            };
            let oracle = r.verdict.as_ref().map_or(String::new(), |v| v.passed.to_string());
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{lo},{hi},{ok},{oracle}",
                r.label,
                r.algorithm.name(),
                r.converged,
                r.n_conv,
                r.n_mv,
                r.cg_iterations
            );
        }
        s
    }
}

fn run_one(
    inst: &MatrixInstance,
    algorithm: Algorithm,
    cfg: &SolverConfig,
    spec: &ExperimentSpec,
    out_dir: Option<&Path>,
) -> RunSummary {
    inst.op.reset_counters();
    let started = Instant::now();
    let outcome = match algorithm {
        Algorithm::Jsym => trlan_jsym(&inst.op, &inst.j, cfg),
        Algorithm::Standard => trlan_standard(&inst.op, cfg),
    };
    let wall_secs = started.elapsed().as_secs_f64();
    let tally = inst.op.matvecs();
    let mut summary = RunSummary {
        label: inst.label.clone(),
        seed: inst.seed,
        algorithm,
        converged: false,
        n_conv: 0,
        n_mv: 0,
        tally,
        cg_iterations: inst.op.cg_iterations(),
        cg_floor_solves: inst.op.cg_floor_solves(),
        breakdowns: 0,
        reorder_events: 0,
        wall_secs,
        eigenvalues: Vec::new(),
        residuals: Vec::new(),
        bounds: None,
        verdict: None,
        csv_path: None,
        error: None,
    };
    let result: EigenResult = match outcome {
        Ok(r) => r,
        Err(e) => {
            summary.error = Some(e.to_string());
            return summary;
        }
    };
    summary.converged = result.converged;
    summary.n_conv = result.restarts;
    summary.n_mv = result.matvecs;
    summary.breakdowns = result.breakdowns;
    summary.reorder_events = result.reorder_events;
    summary.eigenvalues = result.eigenvalues.clone();
    summary.residuals = result.residuals.clone();
    if result.converged {
        summary.bounds = check_bounds(cfg, result.restarts, result.matvecs);
    }
    if spec.verify {
        let which = match cfg.mode {
            Mode::Normal => Extreme::Largest,
            Mode::Invert => Extreme::Smallest,
        };
        let dense = inst.dense.clone().or_else(|| {
            (inst.op.dim() <= oracle::ORACLE_MAX_DIM).then(|| inst.op.to_dense())
        });
        summary.verdict = Some(match dense {
            Some(a) => match verify_against_oracle(&a, &result, which, result.eigenvalues.len(), true) {
                Ok(v) => v,
                Err(e) => failed_verdict(e),
            },
            None => failed_verdict(invalid("matrix too large for the dense oracle")),
        });
    }
    if let Some(dir) = out_dir {
        let path = dir.join(format!("{}-{}.csv", inst.label, algorithm.name()));
        match csv::emit_convergence_csv(&result.records, &path) {
            Ok(()) => summary.csv_path = Some(path),
            Err(e) => summary.error = Some(e.to_string()),
        }
    }
    summary
}

fn failed_verdict(e: Error) -> Verdict {
    Verdict { passed: false, gaps: Vec::new(), max_pair_gap: None, pairs_ok: None, message: e.to_string() }
}

/// Runs every requested algorithm on every matrix of the spec. Failures of
/// individual runs are recorded in their summaries; only setup errors
/// (bad spec, unwritable output directory) abort.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ComparisonReport> {
    if spec.algorithms.is_empty() {
        return Err(invalid("no algorithms requested"));
    }
    let seeds: Vec<u64> = match spec.source {
        MatrixSource::File { .. } => vec![0],
        _ if spec.seeds.is_empty() => return Err(invalid("no seeds requested")),
        _ => spec.seeds.clone(),
    };
    if let Some(dir) = &spec.out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let mut runs = Vec::new();
    let mut warnings = Vec::new();
    for seed in seeds {
        let inst = match build_instance(&spec.source, seed) {
            Ok(inst) => inst,
            Err(e) => {
                warnings.push(format!("seed {seed}: could not build matrix: {e}"));
                for &algorithm in &spec.algorithms {
                    runs.push(RunSummary {
                        label: format!("seed{seed}"),
                        seed: Some(seed),
                        algorithm,
                        converged: false,
                        n_conv: 0,
                        n_mv: 0,
                        tally: 0,
                        cg_iterations: 0,
                        cg_floor_solves: 0,
                        breakdowns: 0,
                        reorder_events: 0,
                        wall_secs: 0.0,
                        eigenvalues: Vec::new(),
                        residuals: Vec::new(),
                        bounds: None,
                        verdict: None,
                        csv_path: None,
                        error: Some(e.to_string()),
                    });
                }
                continue;
            }
        };
        let norm = inst.op.norm_estimate();
        if norm > NORM_WARNING {
            warnings.push(format!(
                "{}: ||A|| is about {norm:.3e}; the absolute tolerance may be unreachable, consider rescaling",
                inst.label
            ));
        }
        for &algorithm in &spec.algorithms {
            let cfg = spec.config_for(algorithm);
            runs.push(run_one(&inst, algorithm, &cfg, spec, spec.out_dir.as_deref()));
        }
    }
    let report = ComparisonReport::assemble(runs, warnings);
    if let Some(dir) = &spec.out_dir {
        std::fs::write(dir.join("summary.csv"), report.summary_csv())?;
        std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    }
    Ok(report)
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jsym_lanczos::harness::manifest::Manifest;
use jsym_lanczos::harness::{run_experiment, MatrixSource, RunSettings};
use jsym_lanczos::matrix_gen::gen_random_hjs;
use jsym_lanczos::mmio::{self, Sidecar};
use jsym_lanczos::operator::materialize;
use jsym_lanczos::tek::TekOperator;
use jsym_lanczos::{Error, Result};

#[derive(Parser)]
#[command(name = "jsym", version, about = "Thick-restart Lanczos for Hermitian J-symmetric matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write generated matrices in Matrix Market format.
    Gen(Opts),
    /// Run one algorithm on one matrix.
    Solve(Opts),
    /// Run both algorithms over a batch of seeds.
    Compare(Opts),
    /// Solve and check the result against the dense oracle.
    Verify(Opts),
}

#[derive(Args, Default)]
struct Opts {
    /// key=value manifest; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["jsym", "standard"])]
    algo: Option<String>,
    #[arg(long, value_parser = ["normal", "invert"])]
    mode: Option<String>,
    #[arg(long)]
    nev: Option<usize>,
    #[arg(long)]
    mwin: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of consecutive seeds starting at --seed.
    #[arg(long)]
    seeds: Option<usize>,
    /// random | tek | file:PATH
    #[arg(long)]
    matrix: Option<String>,
    #[arg(long)]
    n_half: Option<usize>,
    /// TEK color dimension.
    #[arg(long)]
    d: Option<usize>,
    /// TEK color dimension from SU(N) sizing, N^2 - 1.
    #[arg(long)]
    su_n: Option<usize>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Opts {
    /// The manifest from `--config` with every given flag written over it.
    fn merged(&self) -> Result<Manifest> {
        let mut man = match &self.config {
            Some(path) => Manifest::load(path)?,
            None => Manifest::default(),
        };
        let flags: [(&str, Option<String>); 14] = [
            ("algo", self.algo.clone()),
            ("mode", self.mode.clone()),
            ("nev", self.nev.map(|v| v.to_string())),
            ("mwin", self.mwin.map(|v| v.to_string())),
            ("m", self.m.map(|v| v.to_string())),
            ("tol", self.tol.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("seeds", self.seeds.map(|v| v.to_string())),
            ("matrix", self.matrix.clone()),
            ("n-half", self.n_half.map(|v| v.to_string())),
            ("d", self.d.map(|v| v.to_string())),
            ("su-n", self.su_n.map(|v| v.to_string())),
            ("kappa", self.kappa.map(|v| v.to_string())),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                man.set(k, v);
            }
        }
        Ok(man)
    }
}

fn generate(s: &RunSettings) -> Result<bool> {
    let out = s.out.as_deref().ok_or_else(|| Error::InvalidArgument("gen needs --out".into()))?;
    std::fs::create_dir_all(out)?;
    for seed in s.seed_list() {
        let path = write_matrix(&s.source, seed, out)?;
        println!("{}", path.display());
    }
    Ok(true)
}

fn write_matrix(source: &MatrixSource, seed: u64, out: &Path) -> Result<PathBuf> {
    match source {
        MatrixSource::RandomHjs { n_half } => {
            let p = gen_random_hjs(*n_half, seed)?;
            let path = out.join(format!("random-n{}-seed{seed}.mtx", p.n()));
            let meta = p.metadata();
            let sidecar = Sidecar {
                j_realization: meta.j_realization,
                kind: Some(meta.kind),
                seed: Some(seed),
                planted_eigenvalues: Some(meta.planted_eigenvalues),
                kappa: None,
            };
            mmio::save(&path, &p.a, &sidecar)?;
            Ok(path)
        }
        MatrixSource::Tek { color_dim, kappa } => {
            let tek = TekOperator::random(*color_dim, *kappa, seed)?;
            let path = out.join(format!("tek-d{color_dim}-seed{seed}.mtx"));
            let sidecar = Sidecar {
                j_realization: tek.j_operator().realization().into(),
                kind: Some("tek".into()),
                seed: Some(seed),
                planted_eigenvalues: None,
                kappa: Some(*kappa),
            };
            mmio::save(&path, &materialize(&tek), &sidecar)?;
            Ok(path)
        }
        MatrixSource::File { .. } => Err(Error::InvalidArgument("gen needs --matrix random or tek".into())),
    }
}

fn run(command: &Command) -> Result<bool> {
    match command {
        Command::Gen(o) => generate(&RunSettings::from_manifest(&o.merged()?)?),
        Command::Solve(o) | Command::Verify(o) => {
            let s = RunSettings::from_manifest(&o.merged()?)?;
            let spec = s.single_run(matches!(command, Command::Verify(_)));
            let report = run_experiment(&spec)?;
            print!("{}", report.summary_text());
            if spec.verify {
                for r in &report.runs {
                    if let Some(v) = &r.verdict {
                        println!("{} {}: {}", r.label, r.algorithm.name(), v.message);
                    }
                }
            }
            Ok(report.all_ok())
        }
        Command::Compare(o) => {
            let spec = RunSettings::from_manifest(&o.merged()?)?.comparison();
            let report = run_experiment(&spec)?;
            print!("{}", report.summary_text());
            Ok(report.all_ok())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

use std::fs;

use jsym_lanczos::harness::oracle::{oracle_spectrum, pair_up, verify_against_spectrum};
use jsym_lanczos::harness::{run_experiment, verify_against_oracle, ExperimentSpec, Extreme, MatrixSource};
use jsym_lanczos::lanczos::Mode;
use jsym_lanczos::linalg::{norm, DenseMatrix};
use jsym_lanczos::matrix_gen::gen_random_hjs;
use jsym_lanczos::operator::{CountedOperator, DenseOperator};
use jsym_lanczos::restart::{reconstruct_pair, trlan_jsym, trlan_standard, Algorithm, SolverConfig};
use num_complex::Complex64;

#[test]
fn planted_values_are_found_once_by_jsym_and_twice_by_standard() {
    let p = gen_random_hjs(100, 21).unwrap();
    let top = p.sorted_desc();
    let j = p.j_operator();
    let a = p.a.clone();
    let op = CountedOperator::new(DenseOperator::new(p.a).unwrap());
    let cfg = SolverConfig::new(5, 10, 50);

    let res = trlan_jsym(&op, &j, &cfg).unwrap();
    assert!(res.converged);
    for (ev, planted) in res.eigenvalues.iter().zip(&top) {
        assert!((ev - planted).abs() <= 1e-10, "{ev} vs {planted}");
    }
    for (x, ev) in res.eigenvectors.iter().zip(&res.eigenvalues) {
        let y = reconstruct_pair(&j, x).unwrap();
        let ay = a.matvec(&y);
        let r: Vec<Complex64> = ay.iter().zip(&y).map(|(p, q)| p - q * ev).collect();
        assert!(norm(&r) <= 10.0 * cfg.tol);
    }

    let res = trlan_standard(&op, &cfg.doubled()).unwrap();
    assert!(res.converged);
    for (i, planted) in top.iter().take(5).enumerate() {
        let hits = res.eigenvalues.iter().filter(|v| (*v - planted).abs() <= 1e-10).count();
        assert_eq!(hits, 2, "planted value {i} found {hits} times");
    }
}

#[test]
fn oracle_rejects_perturbed_result() {
    let p = gen_random_hjs(50, 3).unwrap();
    let j = p.j_operator();
    let op = CountedOperator::new(DenseOperator::new(p.a.clone()).unwrap());
    let mut res = trlan_jsym(&op, &j, &SolverConfig::new(3, 6, 20)).unwrap();
    let spectrum = oracle_spectrum(&p.a).unwrap();
    let good = verify_against_spectrum(&spectrum, &res, Extreme::Largest, 3, true).unwrap();
    assert!(good.passed, "{}", good.message);
    assert_eq!(good.gaps.len(), 3);
    assert!(good.max_pair_gap.unwrap() <= 1e-10);
    res.eigenvalues[1] += 1e-6;
    let bad = verify_against_spectrum(&spectrum, &res, Extreme::Largest, 3, true).unwrap();
    assert!(!bad.passed);
}

#[test]
fn invert_mode_agrees_with_normal_mode_on_shifted_matrix() {
    let p = gen_random_hjs(60, 8).unwrap();
    let j = p.j_operator();
    // largest of (sigma I - A) are the smallest of A
    let sigma = 1.5;
    let shifted = DenseMatrix::from_fn(120, 120, |r, c| {
        let diag = if r == c { Complex64::new(sigma, 0.0) } else { Complex64::new(0.0, 0.0) };
        diag - p.a[(r, c)]
    });
    let direct = CountedOperator::new(DenseOperator::new(p.a).unwrap());
    let shifted = CountedOperator::new(DenseOperator::new(shifted).unwrap());
    let inv = trlan_jsym(&direct, &j, &SolverConfig::new(5, 10, 30).with_mode(Mode::Invert)).unwrap();
    let nor = trlan_jsym(&shifted, &j, &SolverConfig::new(5, 10, 30)).unwrap();
    assert!(inv.converged && nor.converged);
    for (a, b) in inv.eigenvalues.iter().zip(&nor.eigenvalues) {
        assert!((a - (sigma - b)).abs() <= 1e-9, "{a} vs {}", sigma - b);
    }
}

#[test]
fn tek_low_modes_match_dense_oracle() {
    let mut spec = ExperimentSpec::new(
        MatrixSource::Tek { color_dim: 24, kappa: 0.19 },
        vec![0, 1],
        SolverConfig::new(4, 8, 24).with_mode(Mode::Invert),
    );
    spec.algorithms = vec![Algorithm::Jsym];
    spec.verify = true;
    let report = run_experiment(&spec).unwrap();
    for run in &report.runs {
        assert!(run.ok(), "{run:?}");
        assert!(run.tally_matches());
        assert_eq!(run.eigenvalues.len(), 4);
    }
}

#[test]
fn standard_oracle_check_needs_each_value_twice() {
    let p = gen_random_hjs(40, 5).unwrap();
    let op = CountedOperator::new(DenseOperator::new(p.a.clone()).unwrap());
    let res = trlan_standard(&op, &SolverConfig::new(3, 6, 20).doubled()).unwrap();
    let verdict = verify_against_oracle(&p.a, &res, Extreme::Largest, 6, true).unwrap();
    assert!(verdict.passed, "{}", verdict.message);
    let (means, _) = pair_up(&oracle_spectrum(&p.a).unwrap()).unwrap();
    assert_eq!(means.len(), 40);
}

#[test]
fn repeated_experiment_writes_identical_files() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let mut spec =
            ExperimentSpec::new(MatrixSource::RandomHjs { n_half: 50 }, vec![0, 1], SolverConfig::new(3, 6, 20));
        spec.out_dir = Some(d.path().to_path_buf());
        let report = run_experiment(&spec).unwrap();
        assert!(report.all_ok());
        assert!(report.ratio.is_some());
    }
    let mut names: Vec<_> = fs::read_dir(dirs[0].path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    let csvs: Vec<_> = names.iter().filter(|n| n.to_string_lossy().ends_with(".csv")).collect();
    assert_eq!(csvs.len(), 5);
    for name in csvs {
        let a = fs::read(dirs[0].path().join(name)).unwrap();
        let b = fs::read(dirs[1].path().join(name)).unwrap();
        assert_eq!(a, b, "{name:?} differs");
    }
}

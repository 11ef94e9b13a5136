use jsym_demo::{convergence_history_json, emergent_orthogonality_json, tek_low_modes_json};
use serde_json::Value;

#[test]
fn history_reports_both_solvers() {
    let v: Value = serde_json::from_str(&convergence_history_json(40, 3, 6, 15, 1).unwrap()).unwrap();
    let curves = v["curves"].as_array().unwrap();
    assert_eq!(curves.len(), 2);
    assert_eq!(curves[1]["m"], 30);
    let planted: Vec<f64> = v["planted_top"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let jsym: Vec<f64> = curves[0]["eigenvalues"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    for (a, b) in jsym.iter().zip(&planted) {
        assert!((a - b).abs() < 1e-10);
    }
    assert!(curves[0]["csv"].as_str().unwrap().starts_with("restart,cum_matvec"));
}

#[test]
fn partner_overlap_stays_small_only_with_j_symmetry() {
    let v: Value = serde_json::from_str(&emergent_orthogonality_json(50, 10, 3).unwrap()).unwrap();
    let hjs = v["hjs"].as_array().unwrap();
    let generic = v["generic"].as_array().unwrap();
    assert_eq!(hjs.len(), 10);
    assert!(hjs.iter().all(|x| x.as_f64().unwrap() <= 1e-8));
    assert!(generic.last().unwrap().as_f64().unwrap() > 1e-3);
}

#[test]
fn tek_low_modes_are_positive() {
    let v: Value = serde_json::from_str(&tek_low_modes_json(24, 0.19, 3, 0).unwrap()).unwrap();
    let ev: Vec<f64> = v["eigenvalues"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(ev.len(), 3);
    assert!(ev.windows(2).all(|w| w[0] <= w[1]));
    assert!(ev[0] > 0.0);
    assert!(v["j_symmetry"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn oversized_requests_are_rejected() {
    assert!(convergence_history_json(1000, 5, 10, 50, 0).is_err());
    assert!(emergent_orthogonality_json(50, 60, 0).is_err());
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn jsym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jsym")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn csv_files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    v.sort();
    v
}

#[test]
fn generated_file_verifies_against_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let gen = jsym(&["gen", "--n-half", "30", "--seed", "4", "--out", out]);
    assert!(gen.status.success());
    let mtx = dir.path().join("random-n60-seed4.mtx");
    assert!(mtx.exists() && dir.path().join("random-n60-seed4.json").exists());

    let spec = format!("file:{}", mtx.display());
    let v = jsym(&["verify", "--matrix", &spec, "--nev", "3", "--mwin", "6", "--m", "20"]);
    assert!(v.status.success(), "{}", stdout(&v));
    assert!(stdout(&v).contains("oracle=pass"));
}

#[test]
fn compare_with_same_manifest_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("study.cfg");
    fs::write(&manifest, "# small paired study\nmatrix = random\nn_half = 40\nseeds = 2\nnev = 3\nmwin = 6\nm = 16\n").unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = jsym(&["compare", "--config", manifest.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stdout(&o));
        assert!(stdout(&o).contains("N_MV ratio standard/jsym:"));
        outputs.push(out);
    }
    let names = csv_files(&outputs[0]);
    assert_eq!(names.len(), 5);
    assert_eq!(names, csv_files(&outputs[1]));
    for n in &names {
        assert_eq!(fs::read(outputs[0].join(n)).unwrap(), fs::read(outputs[1].join(n)).unwrap(), "{n}");
    }
}

#[test]
fn flags_override_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.cfg");
    fs::write(&manifest, "n-half = 20\nnev = 2\nmwin = 4\nm = 9\nseed = 1\n").unwrap();
    let o = jsym(&["solve", "--config", manifest.to_str().unwrap(), "--seed", "3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("random-n40-seed3"));
}

#[test]
fn tek_invert_solve_and_standard_algorithm() {
    let o = jsym(&["solve", "--matrix", "tek", "--d", "8", "--mode", "invert", "--nev", "2", "--mwin", "4", "--m", "12"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("tek-d8-seed0"));
    let o = jsym(&["verify", "--algo", "standard", "--n-half", "20", "--nev", "4", "--mwin", "8", "--m", "20"]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn bad_input_exits_nonzero() {
    assert_eq!(jsym(&["solve", "--matrix", "nonsense"]).status.code(), Some(2));
    assert_eq!(jsym(&["solve", "--n-half", "10", "--m", "50"]).status.code(), Some(1));
    assert!(!jsym(&["solve", "--algo", "lobpcg"]).status.success());
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("bad.cfg");
    fs::write(&manifest, "nev = 2\nwindow = 3\n").unwrap();
    assert_eq!(jsym(&["solve", "--config", manifest.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(jsym(&["gen"]).status.code(), Some(2));
}

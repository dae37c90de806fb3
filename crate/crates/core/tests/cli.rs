use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mbwave::app::RegimeRecord;
use tempfile::TempDir;

fn mbwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbwave")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

const CONSERVED: &str =
    r#"{"problem":"neumann_damped","k":0.5,"a":"a1","initial":{"preset":"example2"},"t_max":10,"sample_count":11}"#;
const DELAY: &str = r#"{"problem":"dirichlet_delay","k":0.5,"mu1":2,"mu2":1,"tau":1,"xi":1,
    "initial":{"preset":"sine","displacement":1,"velocity":0.5},"history":{"preset":"compatible"},"t_max":3,"sample_count":7}"#;

#[test]
fn conserved_energy_column_is_flat() {
    let dir = TempDir::new().unwrap();
    let path = write(dir.path(), "c.json", CONSERVED);
    let csv = stdout(&mbwave(&["energy", "--scenario", path.to_str().unwrap()]));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,E,dE_analytic,ut_boundary"));
    let energies: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(energies.len(), 11);
    assert!(energies.iter().all(|e| (e - 3f64.ln()).abs() < 1e-8));
    assert!(!csv.contains('\r') && !csv.contains("-0.0000000000000000e0"));
}

#[test]
fn delay_energy_has_the_delayed_trace_column() {
    let dir = TempDir::new().unwrap();
    let path = write(dir.path(), "d.json", DELAY);
    let out = dir.path().join("e.csv");
    stdout(&mbwave(&["energy", "--scenario", path.to_str().unwrap(), "--out", out.to_str().unwrap()]));
    let csv = std::fs::read_to_string(out).unwrap();
    assert!(csv.starts_with("t,E,dE_analytic,ut_boundary,ut_delayed\n"));
    let e: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(e.windows(2).all(|w| w[1] <= w[0]), "{e:?}");
}

#[test]
fn output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let path = write(dir.path(), "d.json", DELAY);
    let p = path.to_str().unwrap();
    for cmd in ["solve", "energy"] {
        let first = stdout(&mbwave(&[cmd, "--scenario", p]));
        let second = stdout(&mbwave(&[cmd, "--scenario", p]));
        assert_eq!(first, second, "{cmd}");
    }
}

#[test]
fn solve_samples_the_whole_domain() {
    let dir = TempDir::new().unwrap();
    let json = r#"{"problem":"neumann_damped","k":0.5,"a":0.5,"initial":{"preset":"example1"},"t_max":2,"sample_count":3,"space_samples":5}"#;
    let path = write(dir.path(), "s.json", json);
    let csv = stdout(&mbwave(&["solve", "--scenario", path.to_str().unwrap()]));
    let rows: Vec<Vec<f64>> = csv.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 15);
    let last = rows.last().unwrap();
    assert_eq!((last[0], last[1]), (2.0, 2.0));
    // u = ln(t + 2 + x) + ln(t + 2 - x)
    for r in &rows {
        let (t, x) = (r[0], r[1]);
        assert!((r[2] - ((t + 2.0 + x).ln() + (t + 2.0 - x).ln())).abs() < 1e-12);
    }
}

#[test]
fn classify_round_trips() {
    let out = stdout(&mbwave(&["classify", "--k", "0.5", "--a", "0.5"]));
    let record = RegimeRecord::from_json(out.trim()).unwrap();
    assert_eq!(record.to_json(), out.trim());
    assert!(out.contains("\"DecayExactlyFirstOrder\""));

    let out = stdout(&mbwave(&["classify", "--k", "0.5", "--mu1", "2", "--mu2", "1", "--xi", "1", "--tau", "1"]));
    let record = RegimeRecord::from_json(out.trim()).unwrap();
    assert_eq!(record.to_json(), out.trim());
    assert!(out.contains("\"DecreasingWithWindow\"") && out.contains("\"rate_constant\":0.25"));

    let dir = TempDir::new().unwrap();
    let path = write(dir.path(), "d.json", DELAY);
    let from_file = stdout(&mbwave(&["classify", "--scenario", path.to_str().unwrap()]));
    assert_eq!(from_file, out);
}

#[test]
fn neumann_sweep_has_one_row_per_gain() {
    let dir = TempDir::new().unwrap();
    let json = r#"{"problem":"neumann_damped","k":0.5,"initial":{"preset":"sine","velocity":0.5},"t_max":5}"#;
    let path = write(dir.path(), "n.json", json);
    let csv = stdout(&mbwave(&["sweep", "--scenario", path.to_str().unwrap(), "--a", "0:4:0.1"]));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "index,a,kind,E0,ET,log_slope");
    assert_eq!(lines.len(), 42);
    for (i, l) in lines[1..].iter().enumerate() {
        assert!(l.starts_with(&format!("{i},")));
    }
    // a = 0.5 = k and a = 2 = 1/k land exactly on the grid.
    assert!(lines[6].contains(",DecayExactlyFirstOrder,"));
    assert!(lines[21].contains(",DecayExactlyFirstOrder,"));
    assert!(lines[1].contains("IncreasingPolynomialOnly"));
}

#[test]
fn delay_sweep_marks_inadmissible_points() {
    let dir = TempDir::new().unwrap();
    let json = r#"{"problem":"dirichlet_delay","k":0.5,"mu1":2,"mu2":1,"tau":1,"xi":1,
        "initial":{"preset":"sine"},"history":{"preset":"zero"},"t_max":2,"sweep":{"tau":"0.5:2.5:0.5"}}"#;
    let path = write(dir.path(), "s.json", json);
    let csv = stdout(&mbwave(&["sweep", "--scenario", path.to_str().unwrap()]));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[4].contains("Invalid") && lines[4].ends_with("NaN,NaN"), "{}", lines[4]);
    assert!(lines[2].contains("DecreasingWithWindow"));
}

#[test]
fn verify_passes_on_the_first_example() {
    let dir = TempDir::new().unwrap();
    let json = r#"{"problem":"neumann_damped","k":0.5,"a":0.5,"initial":{"preset":"example1"}}"#;
    let path = write(dir.path(), "v.json", json);
    let text = stdout(&mbwave(&["verify", "--scenario", path.to_str().unwrap(), "--grid", "ny=256,tmax=1"]));
    assert!(text.trim_end().ends_with("PASS"), "{text}");
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let code = |args: &[&str]| mbwave(args).status.code().unwrap();

    assert_eq!(code(&["classify", "--k", "1.5", "--a", "0.5"]), 2);
    let bad_tau = write(dir.path(), "t.json", &DELAY.replace("\"tau\":1", "\"tau\":3"));
    let out = mbwave(&["energy", "--scenario", bad_tau.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tau"));
    let unknown = write(dir.path(), "u.json", &CONSERVED.replace("\"t_max\"", "\"tmax\""));
    assert_eq!(code(&["energy", "--scenario", unknown.to_str().unwrap()]), 2);
    assert_eq!(code(&["energy", "--scenario", dir.path().join("missing.json").to_str().unwrap()]), 2);

    let wild = r#"{"problem":"neumann_damped","k":0.5,"a":-0.999,"initial":{"preset":"sine"}}"#;
    let wild = write(dir.path(), "w.json", wild);
    assert_eq!(code(&["verify", "--scenario", wild.to_str().unwrap(), "--grid", "ny=64,tmax=100"]), 3);
    assert_eq!(code(&["verify", "--scenario", wild.to_str().unwrap(), "--grid", "ny=64,tmax=20"]), 4);
}

#[test]
fn shipped_scenarios_load_and_classify() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let scenario = mbwave::scenario::Scenario::load(&path).unwrap();
        if scenario.sweep.is_none() {
            mbwave::app::classify_scenario(&scenario).unwrap();
        }
        count += 1;
    }
    assert!(count >= 6);
}

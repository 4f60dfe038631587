use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gibbs_core::lie::{GalileanAlgebraElement, Vec3};
use gibbs_core::models::{centrifuge_radial_density, VesselSpec};
use gibbs_core::oracle::chi_square_gof;
use tempfile::TempDir;

fn gibbs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gibbs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn column(text: &str, name: &str) -> Vec<f64> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

const GAS: &str = r#"{"model": "ideal_gas", "volume": 2.0, "masses": [1.0, 1.0, 2.0]}"#;

#[test]
fn ideal_gas_sweep_reproduces_energy() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "gas.json", GAS);
    let o = gibbs(&[
        "thermo",
        "--config",
        s(&cfg),
        "--b-min",
        "0.5",
        "--b-max",
        "5",
        "--steps",
        "10",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("b,T,log_p,energy,entropy,var_h,status\n"));
    let b = column(&text, "b");
    let e = column(&text, "energy");
    assert_eq!(b.len(), 10);
    for (b, e) in b.iter().zip(&e) {
        let exact = 4.5 / b;
        assert!(((e - exact) / exact).abs() < 1e-12);
    }
}

#[test]
fn solid_sweep_is_dulong_petit() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "solid.json",
        r#"{"model": "solid", "frequencies": [1.0, 2.0, 3.0, 0.5, 0.5, 7.0]}"#,
    );
    let out = dir.path().join("solid.csv");
    let o = gibbs(&[
        "thermo",
        "--config",
        s(&cfg),
        "--b-min",
        "0.2",
        "--b-max",
        "4",
        "--steps",
        "7",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    for (b, e) in column(&text, "b").iter().zip(column(&text, "energy")) {
        assert!((e * b - 6.0).abs() < 1e-12);
    }
}

#[test]
fn empty_grid_and_bad_config_exit_2() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "gas.json", GAS);
    let o = gibbs(&[
        "thermo",
        "--config",
        s(&cfg),
        "--b-min",
        "0.5",
        "--b-max",
        "5",
        "--steps",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    let bad = write(
        &dir,
        "bad.json",
        r#"{"model": "ideal_gas", "volume": -1.0, "masses": [1.0]}"#,
    );
    assert_eq!(
        gibbs(&["thermo", "--config", s(&bad), "--b", "1"]).status.code(),
        Some(2)
    );
    let junk = write(&dir, "junk.json", "{ not json");
    assert_eq!(
        gibbs(&["verify", "--config", s(&junk), "--b", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(gibbs(&["thermo"]).status.code(), Some(2));
}

#[test]
fn verify_passes_and_catches_bias() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "gas.json", GAS);
    let o = gibbs(&["verify", "--config", s(&cfg), "--b", "1.0", "--n", "100000"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));

    let biased = write(
        &dir,
        "biased.json",
        r#"{"model": "ideal_gas", "volume": 2.0, "masses": [1.0, 1.0, 2.0], "closed_form_bias": 0.01}"#,
    );
    let o = gibbs(&["verify", "--config", s(&biased), "--b", "1.0", "--n", "100000"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL closed_vs_quadrature"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("closed_vs_quadrature"));
}

#[test]
fn verify_photon_energy() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "photon.json",
        r#"{"model": "photon_gas", "volume": 1.0, "light_speed": 1.0}"#,
    );
    let o = gibbs(&["verify", "--config", s(&cfg), "--b", "2.0"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS photon_energy"));
}

#[test]
fn sampling_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "gas.json", GAS);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = gibbs(&[
            "sample",
            "--config",
            s(&cfg),
            "--b",
            "1",
            "--n",
            "500",
            "--seed",
            "42",
            "--out",
            s(p),
        ]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn juttner_batch_row_count() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "rel.json",
        r#"{"model": "relativistic_gas", "volume": 1.0, "light_speed": 1.0, "masses": [1.0]}"#,
    );
    let o = gibbs(&["sample", "--config", s(&cfg), "--b", "0.5", "--n", "10000"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 10_001);
}

#[test]
fn photon_sampling_is_unsupported() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "photon.json",
        r#"{"model": "photon_gas", "volume": 1.0, "light_speed": 1.0}"#,
    );
    assert_eq!(
        gibbs(&["sample", "--config", s(&cfg), "--b", "1"]).status.code(),
        Some(2)
    );
}

#[test]
fn centrifuge_batch_passes_gof() {
    let dir = TempDir::new().unwrap();
    let body = r#"{"model": "vessel", "cylinder_radius": 1.0, "height": 0.5, "masses": [2.0],
                   "omega": [0.0, 0.0, 2.0], "epsilon": -1.0}"#;
    let cfg = write(&dir, "centrifuge.json", body);
    let o = gibbs(&["sample", "--config", s(&cfg), "--n", "20000", "--seed", "7"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let x = column(&text, "x");
    let y = column(&text, "y");
    let radii: Vec<f64> = x.iter().zip(&y).map(|(x, y)| x.hypot(*y).min(1.0)).collect();
    let spec: VesselSpec = serde_json::from_str(r#"{"cylinder_radius": 1.0, "height": 0.5, "masses": [2.0]}"#).unwrap();
    let b = GalileanAlgebraElement::new(Vec3::new(0.0, 0.0, 2.0), Vec3::zeros(), Vec3::zeros(), -1.0);
    let g = chi_square_gof(
        &radii,
        |r| centrifuge_radial_density(&spec, &b, 0, r).unwrap(),
        0.0,
        1.0,
        40,
    )
    .unwrap();
    assert!(g.p_value > 0.01, "{g:?}");
}

fn equilibrate(dir: &TempDir, b_a: f64, b_b: f64) -> Output {
    let body = format!(r#"{{"model_a": {GAS}, "model_b": {GAS}, "b_a": {b_a}, "b_b": {b_b}}}"#);
    let cfg = write(dir, "eq.json", &body);
    gibbs(&["equilibrate", "--config", s(&cfg)])
}

#[test]
fn equilibrate_identical_gases() {
    let dir = TempDir::new().unwrap();
    let o = equilibrate(&dir, 1.0, 3.0);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!((column(&text, "b")[0] - 1.5).abs() < 1e-10);
    assert!(column(&text, "transfer")[0] > 0.0);

    let o = equilibrate(&dir, 2.0, 2.0);
    assert_eq!(column(&stdout(&o), "transfer")[0], 0.0);

    assert_eq!(equilibrate(&dir, -1.0, 2.0).status.code(), Some(2));
}

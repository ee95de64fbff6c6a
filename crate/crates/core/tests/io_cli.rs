use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chkp_lab::io::{read_series, read_snapshot, snapshot_stem, write_snapshot};
use chkp_lab::model::ModelParams;
use chkp_lab::spectral::{spectral_shift, Field2D, Grid2D};
use chkp_lab::timestep::Snapshot;
use proptest::prelude::*;
use serde_json::{json, Value};
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chkp-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_config(dir: &Path, name: &str, mut v: Value) -> PathBuf {
    v["schema_version"] = json!(1);
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    p
}

fn sim_config(t_end: f64, initial: Value) -> Value {
    json!({
        "model": { "kind": "chkp", "kappa": 1.0 },
        "grid": { "nx": 64, "ny": 16, "lx": 8.0 * PI, "ly": 8.0 * PI },
        "t_end": t_end,
        "dt": 0.02,
        "snapshot_every": 50,
        "initial": initial,
        "seed": 7,
    })
}

fn gaussian() -> Value {
    json!({ "kind": "gaussian", "x0": 4.0 * PI, "y0": 4.0 * PI, "sigma_x": 2.0, "sigma_y": 3.0, "amplitude": 0.3 })
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn arb_value() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        Just(-0.0),
        Just(f64::MIN_POSITIVE / 8.0),
        Just(-f64::MIN_POSITIVE / 3.0),
        Just(f64::MAX),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn snapshots_round_trip_bit_for_bit(values in proptest::collection::vec(arb_value(), 8 * 8), t in -1e3..1e3f64) {
        let dir = TempDir::new().unwrap();
        let g = Grid2D::new(8, 8, 3.0, 0.7).unwrap();
        let snap = Snapshot { t, field: Field2D::from_values(g, values.clone()).unwrap() };
        let p = write_snapshot(dir.path(), "snap_000000", &snap, Some(&ModelParams::ChkpNormalized { kappa: 0.5 })).unwrap();
        let (g2, back) = read_snapshot(&p).unwrap();
        prop_assert_eq!(g2, g);
        prop_assert_eq!(back.t.to_bits(), t.to_bits());
        for (a, b) in values.iter().zip(back.field.values()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn zero_length_run_writes_one_snapshot() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "run.json", sim_config(0.0, gaussian()));
    let out = dir.path().join("out");
    let o = run(&["simulate", "--config", path(&cfg), "--out", path(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let series = read_series(&out).unwrap();
    assert_eq!(series.len(), 1);
    assert_eq!(series[0].t, 0.0);
    let csv = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.starts_with("t,l2_norm,"));
}

#[test]
fn bad_configs_exit_2_and_name_the_key() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let mut missing = sim_config(1.0, gaussian());
    missing.as_object_mut().unwrap().remove("schema_version");
    let cases = [
        ("dt", {
            let mut v = sim_config(1.0, gaussian());
            v["dt"] = json!(-1.0);
            v
        }),
        ("grid.nx", {
            let mut v = sim_config(1.0, gaussian());
            v["grid"]["nx"] = json!("many");
            v
        }),
        ("initial", {
            let mut v = sim_config(1.0, gaussian());
            v["initial"]["sigma_x"] = json!(null);
            v
        }),
        ("model", {
            let mut v = sim_config(1.0, gaussian());
            v["model"] = json!({ "kind": "hcp", "alpha": -1.0, "beta": 0.0, "gamma": 1.0 });
            v
        }),
        ("bogus", {
            let mut v = sim_config(1.0, gaussian());
            v["bogus"] = json!(1);
            v
        }),
    ];
    for (key, v) in cases {
        let cfg = write_config(dir.path(), "bad.json", v);
        let o = run(&["simulate", "--config", path(&cfg), "--out", path(&out)]);
        let err = String::from_utf8_lossy(&o.stderr);
        assert_eq!(code(&o), 2, "{key}: {err}");
        assert!(err.contains(key), "{key} not in {err}");
    }
    let p = dir.path().join("noversion.json");
    fs::write(
        &p,
        serde_json::to_string(&sim_config(1.0, gaussian())).unwrap(),
    )
    .unwrap();
    let o = run(&["simulate", "--config", path(&p), "--out", path(&out)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema_version"));
}

#[test]
fn steadiness_verdict_sets_the_exit_code() {
    let dir = TempDir::new().unwrap();
    let g = Grid2D::new(64, 16, 20.0, 6.0).unwrap();
    let base = Field2D::from_fn(g, |x, y| {
        (-(x - 10.0).powi(2)).exp() * (1.0 + 0.3 * (2.0 * PI * y / 6.0).cos())
    });
    let moving = dir.path().join("moving");
    for i in 0..5 {
        let t = 0.5 * i as f64;
        write_snapshot(
            &moving,
            &snapshot_stem(i),
            &Snapshot {
                t,
                field: spectral_shift(&base, 0.7 * t),
            },
            None,
        )
        .unwrap();
    }
    let report = dir.path().join("steady.json");
    let o = run(&[
        "check-steadiness",
        "--in",
        path(&moving),
        "--out",
        path(&report),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert!((r["speed_estimate"].as_f64().unwrap() - 0.7).abs() < 1e-8);
    let printed: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(printed, r);

    let cfg = write_config(dir.path(), "run.json", sim_config(8.0, gaussian()));
    let gauss = dir.path().join("gauss");
    assert_eq!(
        code(&run(&[
            "simulate",
            "--config",
            path(&cfg),
            "--out",
            path(&gauss)
        ])),
        0
    );
    assert_eq!(code(&run(&["check-steadiness", "--in", path(&gauss)])), 1);
    let o = run(&["check-symmetry", "--in", path(&gauss)]);
    assert_eq!(code(&o), 0);
    let sym: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(sym["symmetric"], json!(false));

    assert_eq!(
        code(&run(&[
            "check-steadiness",
            "--in",
            path(&dir.path().join("nowhere"))
        ])),
        3
    );
}

fn tree_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

#[test]
fn deterministic_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let init = json!({ "kind": "random", "max_j": 4, "max_k": 3, "amplitude": 0.2 });
    let cfg = write_config(dir.path(), "run.json", sim_config(1.0, init));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert_eq!(
            code(&run(&[
                "--deterministic",
                "simulate",
                "--config",
                path(&cfg),
                "--out",
                path(out)
            ])),
            0
        );
    }
    let (ta, tb) = (tree_bytes(&a), tree_bytes(&b));
    assert_eq!(ta.len(), 2 * 2 + 1);
    assert!(ta == tb);
}

#[test]
fn solved_wave_evolves_into_a_steady_series() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "tw.json",
        json!({
            "model": { "kind": "chkp", "kappa": 1.0 },
            "grid": { "nx": 128, "ny": 16, "lx": 8.0 * PI, "ly": 8.0 * PI },
            "amplitude": 0.05,
            "continuation": { "step": 0.02, "steps": 2 },
            "evolve": { "dt": 0.05, "snapshot_every": 20 },
        }),
    );
    let tw = dir.path().join("tw");
    let o = run(&["tw-solve", "--config", path(&cfg), "--out", path(&tw)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(tw.join("tw.json")).unwrap()).unwrap();
    let c = summary["speed"].as_f64().unwrap();
    assert!(summary["residual_norm"].as_f64().unwrap() <= 1e-10);
    let branch = fs::read_to_string(tw.join("branch.csv")).unwrap();
    assert_eq!(branch.lines().next(), Some("A,c,residual_norm"));
    assert_eq!(branch.lines().count(), 4);

    let run_dir = dir.path().join("run");
    let o = run(&[
        "simulate",
        "--config",
        path(&tw.join("run_config.json")),
        "--out",
        path(&run_dir),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["check-steadiness", "--in", path(&run_dir)]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((r["speed_estimate"].as_f64().unwrap() - c).abs() < 1e-4);

    let tcfg = write_config(
        dir.path(),
        "map.json",
        json!({ "epsilon": 0.5, "gamma_phys": 0.6, "kappa": 1.0, "direction": "to_physical" }),
    );
    let phys = dir.path().join("phys");
    let o = run(&[
        "transform",
        "--config",
        path(&tcfg),
        "--in",
        path(&run_dir),
        "--out",
        path(&phys),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep: Value =
        serde_json::from_str(&fs::read_to_string(phys.join("transform.json")).unwrap()).unwrap();
    assert_eq!(
        rep["frames"].as_u64().unwrap() as usize,
        read_series(&run_dir).unwrap().len()
    );
    let o = run(&["check-steadiness", "--in", path(&phys)]);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    let drift = rep["drift"].as_f64().unwrap();
    assert!(
        (r["speed_estimate"].as_f64().unwrap() - (c + drift)).abs() < 1e-4,
        "{r}"
    );
}

#[test]
fn weak_residual_and_scan_write_their_reports() {
    let dir = TempDir::new().unwrap();
    let bump = json!({ "center": [0.2, 0.5, -0.3], "radii": [1.0, 1.2, 0.9], "amplitude": 1.0 });
    let cfg = write_config(
        dir.path(),
        "weak.json",
        json!({
            "form": "space_time",
            "model": { "kind": "chkp", "kappa": 0.0 },
            "field": { "kind": "peakon", "a": 0.8, "theta": 0.0, "c": 0.8 },
            "test_function": bump,
        }),
    );
    let out = dir.path().join("weak_out.json");
    let o = run(&["weak-residual", "--config", path(&cfg), "--out", path(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("+-"));
    let w: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(w["value"].as_f64().unwrap().abs() <= w["quadrature_error_estimate"].as_f64().unwrap());

    let bad = write_config(
        dir.path(),
        "weak_bad.json",
        json!({
            "form": "space_time",
            "model": { "kind": "chkp", "kappa": 0.0 },
            "field": { "kind": "snapshot", "path": "x.json" },
            "test_function": bump,
        }),
    );
    let o = run(&["weak-residual", "--config", path(&bad)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("field.kind"));

    let scan = write_config(
        dir.path(),
        "scan.json",
        json!({ "theta": 0.0, "kappa": 0.0, "a_grid": [0.5, 1.0], "c_grid": [0.0, 0.4, 0.8, 1.2, 1.6] }),
    );
    let sdir = dir.path().join("scan");
    let o = run(&["peakon-scan", "--config", path(&scan), "--out", path(&sdir)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let zeros = fs::read_to_string(sdir.join("zero_set.csv")).unwrap();
    assert_eq!(zeros.lines().next(), Some("a,c,R"));
    assert_eq!(
        fs::read_to_string(sdir.join("scan.csv"))
            .unwrap()
            .lines()
            .count(),
        1 + 10
    );
    let z: Value =
        serde_json::from_str(&fs::read_to_string(sdir.join("zero_set.json")).unwrap()).unwrap();
    assert!(
        (z["fit"]["slope"].as_f64().unwrap() - 1.0).abs() < 1e-6,
        "{}",
        z["fit"]
    );
}

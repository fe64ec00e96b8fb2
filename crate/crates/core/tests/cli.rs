use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_photon-score");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    assert!(
        o.status.success(),
        "exit {:?}: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stderr)
    );
    serde_json::from_slice(&o.stdout).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn spectrum(index: f64) -> Value {
    json!({"kind": "power-law", "index": index,
           "e_min": {"value": 100, "unit": "MeV"}, "e_max": {"value": 10, "unit": "GeV"}})
}

/// Sinusoidal source at 1 Hz over 1000 s on a disc with xi = 1.
fn base_config(theta: f64, eta: f64) -> Value {
    json!({
        "model": {
            "mu": {"value": 10, "unit": "1/s"},
            "theta": theta,
            "span": {"value": 1000, "unit": "s"},
            "profile": {"kind": "sinusoid", "gamma1": 0.5, "eta": eta}
        },
        "phase": {"f": {"value": 1.0, "unit": "Hz"}},
        "densities": {
            "kind": "disk",
            "radius": {"value": 18f64.sqrt(), "unit": "deg"},
            "psf": {"kind": "constant", "sigma": {"value": 1, "unit": "deg"}},
            "rho": {"value": 1.0 / std::f64::consts::TAU, "unit": "1/s/deg2"},
            "alpha_rate": {"value": 1.0, "unit": "1/s"},
            "source_spectrum": spectrum(2.0),
            "background_spectrum": spectrum(2.7)
        },
        "weight": {"kind": "optimal"},
        "template": {"kind": "rayleigh"}
    })
}

fn write_config(dir: &TempDir, name: &str, cfg: &Value) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate(dir: &TempDir, cfg: &Path, name: &str, seed: u64) -> (PathBuf, Value) {
    let out = dir.path().join(name);
    let v = stdout_json(&run(&[
        "simulate",
        "--config",
        s(cfg),
        "--out",
        s(&out),
        "--seed",
        &seed.to_string(),
    ]));
    (out, v)
}

#[test]
fn help_and_usage_exit_codes() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["scan", "--help"]).status.code(), Some(0));
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn out_of_range_theta_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "bad.json", &base_config(1.5, 1.0));
    let o = run(&["simulate", "--config", s(&cfg), "--out", "/dev/null"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("model.theta"), "{}", stderr(&o));
}

#[test]
fn unreadable_event_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "c.json", &base_config(0.3, 1.0));
    let events = dir.path().join("bad.csv");
    std::fs::write(&events, "time,energy,angle\n0.5,200,1.0\n0.7,abc,1.0\n").unwrap();
    let o = run(&["detect", "--config", s(&cfg), "--events", s(&events)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let missing = dir.path().join("absent.csv");
    let o = run(&["detect", "--config", s(&cfg), "--events", s(&missing)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "c.json", &base_config(0.3, 1.0));
    let (a, _) = simulate(&dir, &cfg, "a.csv", 7);
    let (b, _) = simulate(&dir, &cfg, "b.csv", 7);
    let (c, _) = simulate(&dir, &cfg, "c.csv", 8);
    let read = |p: &Path| std::fs::read(p).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn unpulsed_simulation_has_poisson_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "c.json", &base_config(0.3, 0.0));
    let (_, v) = simulate(&dir, &cfg, "e.csv", 42);
    let n = v["n_events"].as_f64().unwrap();
    let mean = v["expected_count"].as_f64().unwrap();
    assert!((mean - 10_000.0).abs() < 1e-6);
    assert!((n - mean).abs() < 5.0 * mean.sqrt(), "n = {n}");
}

#[test]
fn precomputed_weights_match_the_weight_function() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = base_config(0.3, 1.0);
    cfg["theta"] = json!(0.3);
    let with_fn = write_config(&dir, "fn.json", &cfg);
    let (events, _) = simulate(&dir, &with_fn, "e.csv", 3);
    let direct = stdout_json(&run(&[
        "detect",
        "--config",
        s(&with_fn),
        "--events",
        s(&events),
    ]));
    assert_eq!(direct["theta_used"], json!(0.3));

    // Re-evaluate the same weights in-process and write them as a column.
    let d = photon_score::auxmodel::DiskGeometry::from_xi(1.0, 1.0, 0.1)
        .unwrap()
        .densities(
            photon_score::auxmodel::EnergySpectrum::PowerLaw {
                index: 2.0,
                e_min: 100.0,
                e_max: 10_000.0,
            },
            photon_score::auxmodel::EnergySpectrum::PowerLaw {
                index: 2.7,
                e_min: 100.0,
                e_max: 10_000.0,
            },
        )
        .unwrap();
    let wf = photon_score::auxmodel::WeightFunction::optimal(0.3, d).unwrap();
    let text = std::fs::read_to_string(&events).unwrap();
    let mut out = String::from("time,energy,angle,weight\n");
    for line in text.lines().skip(1).filter(|l| !l.starts_with('#')) {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let w = wf.weight(f[1], f[2]).unwrap();
        out.push_str(&format!("{line},{w:.17e}\n"));
    }
    let weighted = dir.path().join("w.csv");
    std::fs::write(&weighted, out).unwrap();

    cfg.as_object_mut().unwrap().remove("theta");
    cfg["weight"] = json!({"kind": "precomputed"});
    let pre = write_config(&dir, "pre.json", &cfg);
    let v = stdout_json(&run(&[
        "detect",
        "--config",
        s(&pre),
        "--events",
        s(&weighted),
    ]));
    assert!(v["theta_used"].is_null());
    let rel = |k: &str| {
        let (a, b) = (v[k].as_f64().unwrap(), direct[k].as_f64().unwrap());
        (a - b).abs() / b.abs()
    };
    assert!(rel("sum_w2") < 1e-12, "{v} vs {direct}");
    assert!(rel("qt") < 1e-9, "{v} vs {direct}");
}

#[test]
fn strong_source_detected_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "c.json", &base_config(0.3, 1.0));
    let (events, _) = simulate(&dir, &cfg, "e.csv", 5);
    let v = stdout_json(&run(&[
        "detect",
        "--config",
        s(&cfg),
        "--events",
        s(&events),
    ]));
    assert!(v["p_value"].as_f64().unwrap() < 1e-6, "{v}");
    let theta = v["theta_used"].as_f64().unwrap();
    assert!((theta - 0.3).abs() < 0.05, "{theta}");
}

fn scan_table(path: &Path) -> Vec<(f64, f64)> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].parse().unwrap(), rec[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn doubling_oversampling_refines_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = base_config(0.3, 1.0);
    let scan = |o: f64| {
        json!({"f_lo": {"value": 0.99, "unit": "Hz"}, "f_hi": {"value": 1.01, "unit": "Hz"},
               "oversample": o, "m": 1})
    };
    cfg["scan"] = scan(2.0);
    let coarse_cfg = write_config(&dir, "o2.json", &cfg);
    cfg["scan"] = scan(4.0);
    let fine_cfg = write_config(&dir, "o4.json", &cfg);
    let (events, _) = simulate(&dir, &coarse_cfg, "e.csv", 6);

    let table = |c: &Path, name: &str| {
        let out = dir.path().join(name);
        let v = stdout_json(&run(&[
            "scan",
            "--config",
            s(c),
            "--events",
            s(&events),
            "--out",
            s(&out),
        ]));
        (v, scan_table(&out))
    };
    let (vc, coarse) = table(&coarse_cfg, "o2.csv");
    let (vf, fine) = table(&fine_cfg, "o4.csv");
    assert_eq!(vc["trials"].as_u64().unwrap() as usize, coarse.len());
    assert_eq!(fine.len(), 2 * coarse.len() - 1);
    for (k, (f, q)) in coarse.iter().enumerate() {
        let (g, r) = fine[2 * k];
        assert!((f - g).abs() < 1e-12);
        assert!((q - r).abs() <= 1e-9 * q.max(1e-300));
    }
    assert!(vf["best_qt"].as_f64().unwrap() >= vc["best_qt"].as_f64().unwrap());
}

#[test]
fn oversized_grid_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = base_config(0.3, 1.0);
    cfg["scan"] = json!({"f_lo": {"value": 0.5, "unit": "Hz"}, "f_hi": {"value": 1.5, "unit": "Hz"},
                         "oversample": 10, "m": 1, "max_points": 1000});
    let cfg = write_config(&dir, "c.json", &cfg);
    let (events, _) = simulate(&dir, &cfg, "e.csv", 1);
    let o = run(&["scan", "--config", s(&cfg), "--events", s(&events)]);
    assert_ne!(o.status.code(), Some(0));
    assert!(!stderr(&o).is_empty());
}

#[test]
fn power_table_for_a_pure_sinusoid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "c.json", &base_config(0.1, 1.0));
    let out = dir.path().join("table.csv");
    let v = stdout_json(&run(&["power", "--config", s(&cfg), "--out", s(&out)]));
    assert!(v["prediction"].is_object(), "{v}");
    let mut r = csv::Reader::from_path(&out).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["m", "efficiency_percent"]);
    let rows: Vec<f64> = r
        .records()
        .map(|rec| rec.unwrap()[1].parse().unwrap())
        .collect();
    assert_eq!(rows.len(), 10);
    for (want, got) in [100.0, 70.7, 57.7].iter().zip(&rows) {
        assert!((want - got).abs() < 0.05, "{want} vs {got}");
    }
}

#[test]
fn power_table_for_average_coefficients_peaks_inside() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = base_config(0.1, 1.0);
    let coeffs: Vec<[f64; 2]> = [0.35f64, 0.77, 0.43, 0.17, 0.26]
        .iter()
        .map(|g| [g.sqrt(), 0.0])
        .collect();
    cfg["model"]["profile"] = json!({"kind": "fourier", "eta": 0.1, "coeffs": coeffs});
    let cfg = write_config(&dir, "c.json", &cfg);
    let out = dir.path().join("table.csv");
    stdout_json(&run(&["power", "--config", s(&cfg), "--out", s(&out)]));
    let mut r = csv::Reader::from_path(&out).unwrap();
    let rows: Vec<f64> = r
        .records()
        .map(|rec| rec.unwrap()[1].parse().unwrap())
        .collect();
    let peak = rows
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    assert!(peak > 0 && peak < rows.len() - 1, "{rows:?}");
    assert!(rows[0] < rows[peak] && rows[rows.len() - 1] < rows[peak]);
}

#[test]
fn calibrate_reports_null_moments() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = base_config(0.3, 1.0);
    cfg["theta"] = json!(0.3);
    cfg["model"]["mu"] = json!({"value": 1, "unit": "1/s"});
    let cfg = write_config(&dir, "c.json", &cfg);
    let out = dir.path().join("reps.csv");
    let v = stdout_json(&run(&[
        "--threads",
        "1",
        "calibrate",
        "--config",
        s(&cfg),
        "--replicates",
        "50",
        "--seed",
        "3",
        "--out",
        s(&out),
    ]));
    assert_eq!(v["replicates"], json!(50));
    assert_eq!(v["theta_mode"], json!("known"));
    let m = &v["qt_mean"];
    let (e, se, p) = (
        m["empirical"].as_f64().unwrap(),
        m["stderr"].as_f64().unwrap(),
        m["predicted"].as_f64().unwrap(),
    );
    assert!((e - p).abs() < 4.0 * se, "{m}");
    let rows = csv::Reader::from_path(&out).unwrap().records().count();
    assert_eq!(rows, 50);
}

#[test]
fn zero_threads_is_rejected() {
    let o = run(&["--threads", "0", "power", "--config", "/nonexistent.json"]);
    assert_eq!(o.status.code(), Some(2));
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn repulsive(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_repulsive"))
        .args(args)
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn region_flags_the_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = repulsive(&["region", "--n", "3", "--resolution", "64", "--output", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("region.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("inv_q,inv_r,admissible,on_boundary,is_endpoint"));
    let flagged: Vec<&str> = lines.filter(|l| l.ends_with(",true")).collect();
    assert_eq!(flagged, ["5.0000000000000000e-1,1.6666666666666666e-1,true,true,true"]);
}

#[test]
fn decay_fit_defaults_recover_unit_rate() {
    let dir = tempfile::tempdir().unwrap();
    let o = repulsive(&[
        "decay-fit",
        "--n",
        "1",
        "--tau",
        "1",
        "--output",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&dir.path().join("decay-fit.json"));
    let rate = v["fitted_rate"].as_f64().unwrap();
    assert!((rate - 1.0).abs() <= 0.05, "{rate}");
    for key in ["rate", "intercept", "r_squared", "reference_rate"] {
        assert!(v[key].is_number(), "{key}");
    }
    let csv = fs::read_to_string(dir.path().join("decay-fit.csv")).unwrap();
    assert!(csv.starts_with("sigma,value\n"));
}

#[test]
fn unknown_flag_exits_with_two() {
    assert_eq!(repulsive(&["--foo"]).status.code(), Some(2));
    assert_eq!(repulsive(&["region", "--foo", "1"]).status.code(), Some(2));
}

#[test]
fn validation_errors_exit_with_two_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "command = region\nn = banana\n").unwrap();
    let o = repulsive(&[
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("`n`") && stderr(&o).contains("line 2"),
        "{}",
        stderr(&o)
    );

    fs::write(&cfg, "").unwrap();
    let o = repulsive(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing `command`"));

    let o = repulsive(&["region", "--resolution", "ten"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`resolution`"));

    let o = repulsive(&["decay-fit", "--t-step", "0", "--output", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`t_step`"));
}

#[test]
fn module_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = repulsive(&["weighted-decay", "--q-exponent", "1", "--output", out]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("Q must be at least 2"));
    // a grid too coarse for the chirp asks for refinement
    let o = repulsive(&["propagate", "--points", "64", "--output", out]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("at least"), "{}", stderr(&o));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# region scan\ncommand = region\nn = 2\nresolution = 16\nseed = 7\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = repulsive(&[
        "--config",
        cfg.to_str().unwrap(),
        "region",
        "--n",
        "5",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["parameters"]["n"], 5);
    assert_eq!(m["parameters"]["resolution"], 16);
    assert_eq!(m["seed"], 7);
    assert_eq!(m["command"], "region");
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));

    let o = repulsive(&["--config", cfg.to_str().unwrap(), "decay-fit"]);
    assert_eq!(o.status.code(), Some(2), "conflicting command");
}

#[test]
fn manifest_lists_every_default() {
    let dir = tempfile::tempdir().unwrap();
    let o = repulsive(&[
        "smoothing",
        "--points",
        "4096",
        "--steps",
        "64",
        "--output",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = json(&dir.path().join("manifest.json"));
    let params = m["parameters"].as_object().unwrap();
    for key in [
        "tau",
        "amplitude",
        "decay",
        "half_width",
        "points",
        "width",
        "dt",
        "steps",
        "record_every",
    ] {
        assert!(params.contains_key(key), "{key}");
    }
    assert!(m["constants"]["boundary_mass_limit"].is_number());
    let s = json(&dir.path().join("smoothing.json"));
    for key in ["T", "value", "saturation", "norm_f_sq"] {
        assert!(s[key].is_number(), "{key}");
    }
    assert_eq!(s["T"].as_f64(), Some(0.25));
}

#[test]
fn duhamel_and_scans_write_their_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = repulsive(&[
        "duhamel",
        "--half-width",
        "12",
        "--points",
        "8192",
        "--dt",
        "1/256",
        "--steps",
        "64",
        "--quad-points",
        "16",
        "--output",
        out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let d = json(&dir.path().join("duhamel.json"));
    assert_eq!(d["quad_points"], 16);
    assert_eq!(d["t"].as_f64(), Some(0.25));
    assert!(d["residual"].as_f64().unwrap() < 1e-2);

    let o = repulsive(&[
        "resolvent-scan",
        "--points",
        "256",
        "--lambda-min",
        "-2",
        "--lambda-max",
        "2",
        "--output",
        out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("resolvent-scan.csv")).unwrap();
    assert!(csv.starts_with("lambda,nu,theta,sign,norm,certificate\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 9);

    let o = repulsive(&[
        "propagate",
        "--method",
        "strang",
        "--amplitude",
        "1",
        "--time",
        "0.25",
        "--output",
        out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let samples = fs::read_to_string(dir.path().join("propagate_samples.csv")).unwrap();
    assert!(samples.starts_with("t,l2,linf,boundary_mass\n"));
}

#[test]
fn help_lists_parameters_with_defaults() {
    let o = repulsive(&["resolvent-scan", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(
        text.contains("--lambda-min") && text.contains("[default: -20]"),
        "{text}"
    );
}

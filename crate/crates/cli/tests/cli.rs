use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use quasisol::config::{ShapeName, SweepSection};
use quasisol::RunConfig;
use quasisol_core::Model;
use serde_json::Value;

fn bin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quasisol"))
        .current_dir(dir)
        .args(args)
        .arg("--quiet")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SMALL: &str = "[model]\nmodel = \"power_q\"\nkappa = 0.005\n\n[grid]\nnodes = 801\n";

#[test]
fn minimal_config_uses_documented_defaults() {
    let cfg = RunConfig::parse("[model]\nmodel = \"saturable\"\nkappa = 0.05\n").unwrap();
    assert_eq!(cfg.model.q, Some(2.5));
    assert_eq!(cfg.model.dim, 3);
    assert_eq!(cfg.potential.v_infty, 1.0);
    assert_eq!(cfg.grid.radius, 20.0);
    assert!(cfg.grid.adaptive);
    assert_eq!(cfg.solver.path_points, 16);
    assert_eq!(cfg.verify.residual_tol, 1e-3);
    assert!(cfg.sweep.is_none());
}

#[test]
fn saturable_kappa_above_one_third_rejected_with_line() {
    let err = RunConfig::parse("[model]\nmodel = \"saturable\"\nkappa = 0.4\n").unwrap_err();
    assert_eq!(err.line, 3);
    assert_eq!(err.key.as_deref(), Some("model.kappa"));
    assert!(err.message.contains("1/3"), "{err}");
}

#[test]
fn power_q_at_two_rejected() {
    let err = RunConfig::parse("[model]\nmodel = \"power_q\"\nkappa = 0.1\nq = 2.0\n").unwrap_err();
    assert_eq!((err.line, err.key.as_deref()), (4, Some("model.q")));
}

#[test]
fn saturable_q_window_is_open_at_fourteen_fifths() {
    let err = RunConfig::parse("[model]\nmodel = \"saturable\"\nkappa = 0.1\nq = 2.8\n").unwrap_err();
    assert_eq!(err.key.as_deref(), Some("model.q"));
    assert!(RunConfig::parse("[model]\nmodel = \"saturable\"\nkappa = 0.1\nq = 2.79\n").is_ok());
}

#[test]
fn unknown_key_rejected() {
    let err = RunConfig::parse("[model]\nmodel = \"power_q\"\nkappa = 0.1\n\n[grid]\nnode = 10\n").unwrap_err();
    assert_eq!(err.line, 6);
    assert!(err.message.contains("unknown field"), "{err}");
    assert!(RunConfig::parse("[model]\nmodel = \"power_q\"\nkappa = 0.1\n[extra]\n").is_err());
}

#[test]
fn missing_and_malformed_values() {
    let err = RunConfig::parse("[model]\nmodel = \"power_q\"\n").unwrap_err();
    assert!(err.message.contains("kappa"), "{err}");
    let err = RunConfig::parse("[model]\nmodel = \"power_q\"\nkappa = 1.0.0\n").unwrap_err();
    assert_eq!(err.line, 3);
    assert!(RunConfig::parse("[model]\nmodel = \"cubic\"\nkappa = 0.1\n").is_err());
}

#[test]
fn potential_constraints() {
    let base = "[model]\nmodel = \"power_q\"\nkappa = 0.01\n\n[potential]\nshape = \"gaussian_well\"\n";
    let err = RunConfig::parse(&format!("{base}depth = 1.5\n")).unwrap_err();
    assert_eq!((err.line, err.key.as_deref()), (7, Some("potential.depth")));
    let cfg = RunConfig::parse(&format!("{base}depth = 0.5\nwidth = 2.0\n")).unwrap();
    assert_eq!(cfg.potential.shape, ShapeName::GaussianWell);
    let err = RunConfig::parse("[model]\nmodel = \"saturable\"\nkappa = 0.1\n[potential]\nv_infty = 0.5\n")
        .unwrap_err();
    assert_eq!(err.key.as_deref(), Some("potential.v_infty"));
}

#[test]
fn sweep_section_forms() {
    let base = "[model]\nmodel = \"power_q\"\nkappa = 0.01\n\n[sweep]\n";
    let cfg = RunConfig::parse(&format!("{base}kappa_min = 0.001\nkappa_max = 0.3\ncount = 5\n")).unwrap();
    let k = cfg.sweep.unwrap().values();
    assert_eq!((k.len(), k[0], k[4]), (5, 0.001, 0.3));
    assert!(RunConfig::parse(&format!("{base}kappas = [0.02, 0.01]\n")).is_err());
    assert!(RunConfig::parse(&format!("{base}kappas = [0.01]\ncount = 3\n")).is_err());
    assert!(RunConfig::parse(&format!("{base}kappa_min = 0.001\n")).is_err());
}

#[test]
fn serialized_form_is_canonical() {
    let cfg = RunConfig::parse("[model]\nkappa = 0.02\nmodel = \"power_q\"\n").unwrap();
    let text = cfg.to_toml();
    assert!(text.contains("q = 3.0"));
    assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
    assert_eq!(RunConfig::parse(&text).unwrap().to_toml(), text);
}

fn arb_config() -> impl Strategy<Value = RunConfig> {
    (
        prop::bool::ANY,
        0.001f64..0.3,
        prop::option::of(2.05f64..2.75),
        prop::bool::ANY,
        0.0f64..0.9,
        0.5f64..3.0,
        101usize..4001,
        5.0f64..60.0,
        prop::option::of(prop::collection::vec(0.001f64..0.3, 1..6)),
    )
        .prop_map(|(sat, kappa, q, well, depth, width, nodes, radius, kappas)| {
            let model = if sat { Model::Saturable } else { Model::PowerQ };
            let mut cfg = RunConfig::with_model(model, kappa);
            cfg.model.q = q.or(cfg.model.q);
            if well && !sat {
                cfg.potential.shape = ShapeName::GaussianWell;
                cfg.potential.depth = depth;
                cfg.potential.width = width;
            }
            cfg.grid.nodes = nodes;
            cfg.grid.radius = radius;
            cfg.sweep = kappas.map(|mut k| {
                k.sort_by(f64::total_cmp);
                k.dedup();
                SweepSection { kappas: Some(k), kappa_min: None, kappa_max: None, count: None, threshold_tol: None }
            });
            cfg
        })
}

proptest! {
    #[test]
    fn parse_serialize_round_trip(cfg in arb_config()) {
        let text = cfg.to_toml();
        let parsed = RunConfig::parse(&text).unwrap();
        prop_assert_eq!(&parsed, &cfg);
        prop_assert_eq!(parsed.to_toml(), text);
    }
}

#[test]
fn table_with_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(dir.path(), &["table"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("out/table.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,g,g_prime,primitive,inverse,f,f_primitive"));
    assert_eq!(lines.count(), 101);
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "[model]\nmodel = \"saturable\"\nkappa = 0.4\n").unwrap();
    let out = bin(dir.path(), &["solve", "--config", "bad.toml"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
    let out = bin(dir.path(), &["table", "--kappa", "-1"]);
    assert_eq!(code(&out), 2);
    let out = bin(dir.path(), &["solve", "--config", "missing.toml"]);
    assert_eq!(code(&out), 5);
}

#[test]
fn solve_then_verify_matches_combined_run() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), SMALL).unwrap();
    let out = bin(dir.path(), &["solve", "--config", "run.toml", "--out", "solved"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let profile = fs::read_to_string(dir.path().join("solved/profile.csv")).unwrap();
    assert!(profile.starts_with("# dim=3 radius=20 nodes=801\nr,v,u\n"));

    let out = bin(dir.path(), &["verify", "--input", "solved", "--out", "checked"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = bin(dir.path(), &["verify", "--config", "run.toml", "--out", "combined"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let read = |p: &str| -> Value { serde_json::from_str(&fs::read_to_string(dir.path().join(p)).unwrap()).unwrap() };
    let staged = read("checked/report.json");
    let combined = read("combined/report.json");
    assert_eq!(staged["result"], combined["result"]);
    assert_eq!(combined["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(combined["config"]["model"]["kappa"], 0.005);
    assert_eq!(combined["result"]["passed"], true);
}

#[test]
fn corrupted_profile_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), SMALL).unwrap();
    assert_eq!(code(&bin(dir.path(), &["solve", "--config", "run.toml", "--out", "s"])), 0);
    let path = dir.path().join("s/profile.csv");
    let text = fs::read_to_string(&path).unwrap();
    let broken: Vec<&str> = text.lines().enumerate().map(|(i, l)| if i == 40 { "0.5,abc,1" } else { l }).collect();
    fs::write(&path, broken.join("\n")).unwrap();
    let out = bin(dir.path(), &["verify", "--input", "s"]);
    assert_eq!(code(&out), 5);
    assert!(stderr(&out).contains("line 41"), "{}", stderr(&out));

    fs::write(&path, text.lines().take(100).collect::<Vec<_>>().join("\n")).unwrap();
    assert_eq!(code(&bin(dir.path(), &["verify", "--input", "s"])), 5);
}

#[test]
fn certificate_failure_exits_four() {
    // Above the empirical threshold the L-inf certificate fails.
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), SMALL.replace("0.005", "0.05")).unwrap();
    let out = bin(dir.path(), &["verify", "--config", "run.toml"]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    assert!(stderr(&out).contains("linf"));
}

#[test]
fn sweep_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SMALL}\n[sweep]\nkappas = [0.002, 0.005, 0.05]\n");
    fs::write(dir.path().join("run.toml"), text).unwrap();
    let out = bin(dir.path(), &["sweep", "--config", "run.toml"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    let json: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/sweep.json")).unwrap()).unwrap();
    assert_eq!(json["result"]["sweep"]["empirical_threshold"], 0.005);
    assert_eq!(json["result"]["sweep"]["anomaly"], false);
}

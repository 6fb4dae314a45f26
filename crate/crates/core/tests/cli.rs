//! Every exit path of the command line, driven through `run_command` and,
//! for the environment override, the built binary.

use std::path::PathBuf;
use std::process::Command;

use evpkit::cli::run_command;
use evpkit::io::report::{Certificate, Report, Status};

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "examples", "data", name].iter().collect();
    p.display().to_string()
}

fn run(args: &[&str]) -> evpkit::cli::CommandOutcome {
    let mut argv = vec!["evpkit"];
    argv.extend_from_slice(args);
    run_command(argv)
}

fn evp_xhat(r: &Report) -> &str {
    match r.certificate.as_ref().expect("certificate") {
        Certificate::Evp(c) => &c.xhat,
        Certificate::Product(c) => &c.xhat,
    }
}

#[test]
fn two_point_ray_solver_moves_to_b() {
    let out = run(&["solve-evp", "--theorem", "3.5", &fixture("two_point.json")]);
    assert_eq!(out.exit_code, 0, "{}", out.rendered);
    assert_eq!(evp_xhat(&out.reports[0]), "b");
    assert_eq!(out.reports[0].status, Status::Certified);
}

#[test]
fn every_evp_theorem_on_its_fixture() {
    let two = fixture("two_point.json");
    let qm = fixture("quasimetric.json");
    for (t, f, xhat) in [
        ("3.1", &two, "b"),
        ("3.5", &two, "b"),
        ("3.6", &two, "b"),
        ("4.1", &two, "b"),
        ("4.2", &two, "b"),
        ("4.5", &two, "b"),
        ("4.6", &two, "b"),
        ("4.4", &qm, "c"),
    ] {
        let out = run(&["solve-evp", "--theorem", t, f]);
        assert_eq!(out.exit_code, 0, "{t}: {}", out.rendered);
        assert_eq!(evp_xhat(&out.reports[0]), xhat, "{t}");
    }
}

#[test]
fn product_theorems_on_pareto_demo() {
    for t in ["5.1", "5.2", "5.6"] {
        let out = run(&["solve-minimal-point", "--theorem", t, &fixture("pareto_demo.json")]);
        assert_eq!(out.exit_code, 0, "{t}: {}", out.rendered);
        match out.reports[0].certificate.as_ref().unwrap() {
            Certificate::Product(c) => {
                assert_eq!(c.xhat, "c");
                assert_eq!(c.yhat.coords(), &[0.5, 0.5]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}

#[test]
fn strict_pareto_lists_smin() {
    let out = run(&["pareto", "--strict", &fixture("pareto_demo.json")]);
    assert_eq!(out.exit_code, 0);
    let data = out.reports[0].data.as_ref().unwrap();
    let ys: Vec<Vec<f64>> = data["minima"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| serde_json::from_value(m["y"].clone()).unwrap())
        .collect();
    assert_eq!(ys, vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.5, 0.5]]);
    assert_eq!(data["domination"], serde_json::json!(true));
}

#[test]
fn bad_file_exits_3() {
    let out = run(&["validate", &fixture("bad.json")]);
    assert_eq!(out.exit_code, 3);
    let err = out.reports[0].error.as_ref().unwrap();
    assert!(err.contains("triangle") && err.contains("\"a\", \"b\", \"c\""), "{err}");
}

#[test]
fn premise_failure_exits_2() {
    let out = run(&["solve-evp", "--theorem", "3.5", &fixture("two_point_tight.json")]);
    assert_eq!(out.exit_code, 2);
    assert_eq!(out.reports[0].status, Status::PremiseFailed);
    // from b the premise holds and b is its own answer
    let out = run(&["solve-evp", "--theorem", "3.5", "--x0", "b", &fixture("two_point_tight.json")]);
    assert_eq!(out.exit_code, 0);
    assert_eq!(evp_xhat(&out.reports[0]), "b");
}

#[test]
fn hypothesis_failure_exits_2() {
    let f = fixture("flat_potential.json");
    let out = run(&["solve-evp", "--theorem", "3.1", &f]);
    assert_eq!(out.exit_code, 2);
    assert_eq!(out.reports[0].status, Status::HypothesisFailed);
    assert!(out.reports[0].error.as_ref().unwrap().contains("hypothesis E"));
    assert_eq!(run(&["check-assumptions", &f]).exit_code, 2);
}

#[test]
fn missing_parameters_are_input_errors() {
    // no quasi-metric in this file
    assert_eq!(run(&["solve-evp", "--theorem", "4.4", &fixture("two_point.json")]).exit_code, 3);
    assert_eq!(run(&["solve-evp", "--theorem", "3.5", "--x0", "zz", &fixture("two_point.json")]).exit_code, 3);
    assert_eq!(run(&["scalarize", "--y", "1,2", &fixture("two_point.json")]).exit_code, 3);
}

#[test]
fn machine_block_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let out = run(&[
        "solve-minimal-point",
        "--theorem",
        "5.2",
        "--out",
        out_path.to_str().unwrap(),
        &fixture("pareto_demo.json"),
    ]);
    assert_eq!(out.exit_code, 0);
    let text = std::fs::read_to_string(&out_path).unwrap();
    let back: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(back, out.reports[0]);
}

#[test]
fn batch_keeps_input_order() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("batch.json");
    let files = [fixture("two_point.json"), fixture("bad.json"), fixture("quasimetric.json"), fixture("two_point.json")];
    let mut args = vec!["validate", "--batch", "--out", out_path.to_str().unwrap()];
    args.extend(files.iter().map(String::as_str));
    let out = run(&args);
    assert_eq!(out.exit_code, 3);
    let got: Vec<&str> = out.reports.iter().map(|r| r.instance.as_deref().unwrap()).collect();
    let want: Vec<&str> = files.iter().map(String::as_str).collect();
    assert_eq!(got, want);
    let back: Vec<Report> = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(back.len(), 4);
    assert_eq!(back[1].status, Status::InputError);
}

#[test]
fn generate_then_validate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    for variant in ["singleton", "polytope", "open-polytope", "quasimetric", "extensional"] {
        let out = run(&["generate", "--seed", "7", "--n", "6", "--variant", variant, "--emit", path.to_str().unwrap()]);
        assert_eq!(out.exit_code, 0, "{variant}");
        assert_eq!(run(&["validate", path.to_str().unwrap()]).exit_code, 0, "{variant}");
    }
    let a = run(&["generate", "--seed", "1", "--n", "5", "--m", "2"]);
    let b = run(&["generate", "--seed", "1", "--n", "5", "--m", "2"]);
    assert_eq!(a.reports[0].data, b.reports[0].data);
}

#[test]
fn builtin_chain_reaches_bottom() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chain.json");
    assert_eq!(run(&["builtin", "chain", "--emit", path.to_str().unwrap()]).exit_code, 0);
    let out = run(&["solve-evp", "--theorem", "4.2", path.to_str().unwrap()]);
    assert_eq!(evp_xhat(&out.reports[0]), "c");
    let path = dir.path().join("anti.json");
    assert_eq!(run(&["builtin", "antichain", "--emit", path.to_str().unwrap()]).exit_code, 0);
    let out = run(&["solve-evp", "--theorem", "4.2", path.to_str().unwrap()]);
    assert_eq!(evp_xhat(&out.reports[0]), "b");
}

#[test]
fn binary_honors_tolerance_env() {
    let bin = env!("CARGO_BIN_EXE_evpkit");
    let status = Command::new(bin)
        .args(["validate", &fixture("two_point.json")])
        .env("EVPKIT_TOLERANCE", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(3));
    let out = Command::new(bin)
        .args(["validate", &fixture("two_point.json")])
        .env("EVPKIT_TOLERANCE", "1e-6")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"tolerance\":1e-6"));
    let out = Command::new(bin).args(["validate", &fixture("bad.json")]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

//! Behaviour of the command-line binary: exit codes and output files.

use std::fs;
use std::process::{Command, Output};

use tempfile::tempdir;

const BIN: &str = env!("CARGO_BIN_EXE_triopoly");
const PARAMS: &str = "0.4,0.55,0.6,17";
const BOX: &str = "0.5766666668,0.6316666668,0.3366666668,0.4516666668,0,0.3951779684";

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn certify_exit_codes() {
    let o = run(&["certify", "--params", PARAMS, "--box", BOX]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["records"].as_array().unwrap().len(), 10);

    let thin = BOX.replace("0.3951779684", "0.38");
    let o = run(&["certify", "--params", PARAMS, "--box", &thin]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let h2 = v["records"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["id"] == "H2")
        .unwrap();
    assert_eq!(h2["status"], "fail");

    let o = run(&["certify", "--params", "0.4,0.55,0.6,1", "--box", BOX]);
    assert_eq!(code(&o), 2);
}

#[test]
fn usage_errors_exit_three() {
    let o = run(&["certify", "--params", PARAMS]);
    assert!(code(&o) >= 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert!(o.stdout.is_empty());

    assert!(code(&run(&["certify", "--preset", "paper-raw"])) >= 3);
    assert!(code(&run(&["certify", "--params", "0.4,0.55", "--box", BOX])) >= 3);
    assert!(code(&run(&["certify", "--preset", "paper", "--engine", "fast"])) >= 3);
    assert!(code(&run(&[])) >= 3);
}

#[test]
fn uncertified_box_cannot_build_a_horseshoe() {
    let thin = BOX.replace("0.3951779684", "0.38");
    let o = run(&[
        "horseshoe",
        "--params",
        PARAMS,
        "--box",
        &thin,
        "--resolution",
        "8",
    ]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("precondition"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    let out = dir.path().join("cert.json");
    fs::write(
        &cfg,
        format!(
            "# example setup\nparams = {PARAMS}\nbox = {BOX}\nengine = analytic\nout = {}\n",
            out.display()
        ),
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    assert_eq!(code(&run(&["certify", "--config", c])), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["verdict"], "certified");

    let thin = BOX.replace("0.3951779684", "0.38");
    assert_eq!(code(&run(&["certify", "--config", c, "--box", &thin])), 1);
}

#[test]
fn horseshoe_writes_covers_and_report() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("hs");
    let o = run(&[
        "horseshoe",
        "--preset",
        "paper",
        "--resolution",
        "8",
        "--paths",
        "4",
        "--seed",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("k_covers.csv")).unwrap();
    assert!(csv.starts_with("index,cell,"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("horseshoe.json")).unwrap()).unwrap();
    assert_eq!(report["k_covers_disjoint"], true);
    assert_eq!(report["midplane"]["misses"], true);
    assert_eq!(report["paths_stretched"], 4);
    let cells = report["k0_cells"].as_u64().unwrap() + report["k1_cells"].as_u64().unwrap();
    assert_eq!(csv.lines().count() as u64, cells + 1);
}

#[test]
fn same_invocation_same_bytes() {
    let dir = tempdir().unwrap();
    let cases: [&[&str]; 4] = [
        &[
            "search",
            "--preset",
            "paper",
            "--around",
            "0.05",
            "--budget",
            "2000",
            "--seed",
            "3",
            "--strategy",
            "refine",
        ],
        &["simulate", "--params", "0.4,0.55,0.6,9", "--steps", "200"],
        &[
            "bifurcate",
            "--preset",
            "paper",
            "--alpha-range",
            "6,10",
            "--samples",
            "5",
            "--record",
            "4",
            "--seed",
            "2",
        ],
        &["periodic", "--preset", "paper", "--max-k", "2"],
    ];
    for (n, args) in cases.iter().enumerate() {
        let paths: Vec<_> = (0..2)
            .map(|i| dir.path().join(format!("{n}-{i}.out")))
            .collect();
        for p in &paths {
            let mut a = args.to_vec();
            a.extend(["--out", p.to_str().unwrap()]);
            assert_eq!(code(&run(&a)), 0, "{args:?}");
        }
        let (a, b) = (fs::read(&paths[0]).unwrap(), fs::read(&paths[1]).unwrap());
        assert!(!a.is_empty());
        assert_eq!(a, b, "{args:?}");
    }
}

#[test]
fn csv_numbers_round_trip() {
    let o = run(&[
        "simulate",
        "--params",
        "0.4,0.55,0.6,2",
        "--steps",
        "3",
        "--transient",
        "0",
        "--start",
        "0.6,0.4,0.1",
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "1");
    let x: f64 = row[1].parse().unwrap();
    let p = triopoly::Params::new(0.4, 0.55, 0.6, 2.0).unwrap();
    let want = p.eval(triopoly::State::new(0.6, 0.4, 0.1)).unwrap();
    assert_eq!(x, want.x);
}

#[test]
fn logistic_demo_json() {
    let o = run(&["demo-logistic"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["mu"], 3.88);
    assert!(v["first_iterate"].is_null());
    assert_eq!(v["second_iterate"]["verified"], true);
}

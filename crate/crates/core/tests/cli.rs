use std::process::{Command, Output};

use serde_json::Value;

fn replikit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_replikit"))
        .args(args)
        .env_remove("REPLIKIT_SEED")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let out = replikit(&full);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn num(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
}

#[test]
fn envelope_shape() {
    let v = json(&["replication", "--effect", "1.96", "--n", "100"]);
    let obj = v.as_object().unwrap();
    let mut keys: Vec<_> = obj.keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(keys, ["command", "inputs", "outputs", "version"]);
    assert_eq!(v["command"], "replication");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["inputs"]["alpha"], 0.025);
}

#[test]
fn posterior_examples() {
    let v = json(&[
        "posterior",
        "--mean",
        "2",
        "--sd",
        "10",
        "--n",
        "100",
        "--beyond",
        "0",
        "--within",
        "1,3",
    ]);
    close(
        num(&v["outputs"]["beyond"][0]["probability"]),
        0.977_249_868,
        1e-9,
    );
    close(
        num(&v["outputs"]["within"][0]["probability"]),
        0.682_689_492,
        1e-9,
    );

    let v = json(&["posterior", "--mean", "0", "--n", "100", "--beyond", "0"]);
    assert_eq!(num(&v["outputs"]["beyond"][0]["probability"]), 0.5);

    let text = replikit(&["posterior", "--mean", "2", "--n", "100", "--beyond", "0"]);
    assert!(String::from_utf8_lossy(&text.stdout).contains("0.977250"));
}

#[test]
fn replication_examples() {
    let p = |args: &[&str]| num(&json(args)["outputs"]["replication_probability"]);
    close(
        p(&[
            "replication",
            "--effect",
            "1.96",
            "--sd",
            "10",
            "--n",
            "100",
            "--k",
            "2",
            "--alpha",
            "0.025",
        ]),
        0.282_972_162,
        1e-9,
    );
    close(
        p(&["replication", "--effect", "2.2", "--n", "163", "--k", "3"]),
        0.367_561_505,
        1e-9,
    );
    close(
        p(&[
            "replication",
            "--effect",
            "0",
            "--sd",
            "1",
            "--n",
            "10",
            "--k",
            "2",
        ]),
        0.025,
        1e-12,
    );
    assert_eq!(
        p(&[
            "replication",
            "--effect",
            "1.96",
            "--n",
            "100",
            "--two-sided",
            "0.05"
        ]),
        p(&[
            "replication",
            "--effect",
            "1.96",
            "--n",
            "100",
            "--alpha",
            "0.025"
        ]),
    );
}

#[test]
fn sample_size_examples() {
    for (k, raw, required) in [
        ("1", 204.312_779, 205),
        ("2", 408.625_559, 409),
        ("3", 612.938_338, 613),
    ] {
        let v = json(&[
            "sample-size",
            "--effect",
            "1.96",
            "--sd",
            "10",
            "--alpha",
            "0.025",
            "--power",
            "0.8",
            "--k",
            k,
        ]);
        close(num(&v["outputs"]["raw_n"]), raw, 1e-6);
        assert_eq!(v["outputs"]["required_n"], required);
    }
}

#[test]
fn combine_table() {
    let args = [
        "combine",
        "--prior",
        "204,10,1.96",
        "--study",
        "613,11,1.76",
    ];
    let v = json(&args);
    let post = &v["outputs"]["posterior"];
    assert_eq!(post["n"], 817);
    close(num(&post["sd"]), 10.750_306, 1e-6);
    close(num(&post["mean_diff"]), 1.809_938_8, 1e-7);
    for (col, r) in ["prior", "study", "posterior"]
        .iter()
        .zip([0.365_533, 0.799_876, 0.925_470])
    {
        close(num(&v["outputs"][col]["replication_probability"]), r, 1e-5);
    }

    let mut precision = args.to_vec();
    precision.extend(["--mode", "precision"]);
    close(
        num(&json(&precision)["outputs"]["posterior"]["mean_diff"]),
        1.817_415_33,
        1e-8,
    );

    let mut swap = args.to_vec();
    swap.push("--paper-swap");
    let v = json(&swap);
    close(
        num(&v["outputs"]["posterior"]["upper_cl"]),
        2.087_191_426,
        1e-6,
    );
    close(
        num(&v["outputs"]["posterior"]["lower_cl"]),
        1.532_686_175,
        1e-6,
    );

    let v = json(&["combine", "--prior", "100,10,2", "--study", "100,10,2"]);
    assert_eq!(
        v["outputs"]["prior"]["mean_diff"],
        v["outputs"]["study"]["mean_diff"]
    );
    assert_eq!(
        v["outputs"]["posterior"]["mean_diff"],
        v["outputs"]["study"]["mean_diff"]
    );
}

#[test]
fn exit_codes() {
    assert_eq!(
        replikit(&["replication", "--effect", "1.96", "--n", "100"])
            .status
            .code(),
        Some(0)
    );
    // missing flag, bad value, conflicting flags
    assert_eq!(
        replikit(&["replication", "--n", "100"]).status.code(),
        Some(2)
    );
    assert_eq!(
        replikit(&["replication", "--effect", "x", "--n", "100"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        replikit(&[
            "replication",
            "--effect",
            "1",
            "--n",
            "100",
            "--alpha",
            "0.02",
            "--two-sided",
            "0.05"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        replikit(&["simulate", "--trials", "10"]).status.code(),
        Some(2)
    );
    // parseable but outside the domain
    assert_eq!(
        replikit(&["sample-size", "--effect", "0"]).status.code(),
        Some(1)
    );
    assert_eq!(
        replikit(&["replication", "--effect", "1", "--n", "1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        replikit(&[
            "replication",
            "--effect",
            "1",
            "--n",
            "100",
            "--alpha",
            "0.7"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        replikit(&[
            "simulate",
            "--model",
            "chain-predictive",
            "--effect",
            "1",
            "--k",
            "2",
            "--trials",
            "10"
        ])
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn simulate_matches_analytic() {
    let v = json(&[
        "simulate",
        "--model",
        "posterior-predictive",
        "--effect",
        "1.96",
        "--sd",
        "10",
        "--n",
        "100",
        "--trials",
        "200000",
        "--seed",
        "42",
    ]);
    let out = &v["outputs"];
    assert_eq!(out["rng"], "ChaCha8");
    assert_eq!(out["seed"], 42);
    close(num(&out["analytic_prediction"]), 0.282_972_162, 1e-9);
    assert!(num(&out["z_discrepancy"]).abs() < 3.29);

    let v = json(&[
        "simulate",
        "--model",
        "individuals",
        "--effect",
        "2",
        "--sd",
        "10",
        "--threshold",
        "0",
        "--trials",
        "200000",
        "--seed",
        "1",
    ]);
    close(num(&v["outputs"]["empirical_rate"]), 0.5793, 5e-3);
}

#[test]
fn seed_from_environment() {
    let args = [
        "simulate", "--effect", "1.96", "--trials", "5000", "--format", "json",
    ];
    let from_env = Command::new(env!("CARGO_BIN_EXE_replikit"))
        .args(args)
        .env("REPLIKIT_SEED", "99")
        .output()
        .unwrap();
    let mut explicit = args.to_vec();
    explicit.extend(["--seed", "99"]);
    assert_eq!(from_env.stdout, replikit(&explicit).stdout);
    let v: Value = serde_json::from_slice(&from_env.stdout).unwrap();
    assert_eq!(v["outputs"]["seed"], 99);

    let overridden = Command::new(env!("CARGO_BIN_EXE_replikit"))
        .args(args)
        .args(["--seed", "5"])
        .env("REPLIKIT_SEED", "99")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&overridden.stdout).unwrap();
    assert_eq!(v["outputs"]["seed"], 5);
}

#[test]
fn portfolio() {
    let v = json(&[
        "simulate",
        "--portfolio",
        "97",
        "--n",
        "163",
        "--effect",
        "2.2",
        "--sd",
        "10",
        "--seed",
        "7",
    ]);
    let p = &v["outputs"]["portfolios"][0];
    assert_eq!(p["studies"], 97);
    let rate = num(&p["rate"]);
    close(rate, num(&p["replications"]) / 97.0, 1e-9);
    assert!(num(&p["ci_lower"]) < 0.3676 && 0.3676 < num(&p["ci_upper"]));

    let csv = replikit(&[
        "simulate",
        "--portfolio",
        "97",
        "--sweep",
        "3",
        "--seed",
        "7",
        "--format",
        "csv",
    ]);
    let text = String::from_utf8(csv.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(
        lines[0],
        "seed,model,n,effect,sd,alpha,k,trials,empirical,analytic,z"
    );
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("7,chain-predictive,163,"));
    assert!(lines[3].starts_with("9,"));
}

fn plot(args: &[&str]) -> Vec<Vec<String>> {
    let out = replikit(args);
    assert!(out.status.success());
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    reader
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn figure_one_peaks_at_mean() {
    let rows = plot(&[
        "plot-data",
        "--figure",
        "1",
        "--mean",
        "2",
        "--sd",
        "10",
        "--n",
        "100",
    ]);
    let peak = rows
        .iter()
        .max_by(|a, b| {
            a[2].parse::<f64>()
                .unwrap()
                .total_cmp(&b[2].parse().unwrap())
        })
        .unwrap();
    close(peak[0].parse().unwrap(), 2.0, 1e-9);
}

#[test]
#[allow(clippy::approx_constant)]
fn figure_two_predictive_curve() {
    let rows = plot(&[
        "plot-data",
        "--figure",
        "2",
        "--mean",
        "1.96",
        "--n",
        "100",
        "--points",
        "4001",
    ]);
    let xy: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[3].parse().unwrap()))
        .collect();

    // A normal density peaks at 1/(sigma·sqrt(2π)); recover sigma from the peak.
    let peak = xy.iter().map(|p| p.1).fold(0.0, f64::max);
    close(
        1.0 / (peak * (2.0 * std::f64::consts::PI).sqrt()),
        1.414_21,
        1e-5,
    );

    let markers: Vec<(&str, f64)> = rows
        .iter()
        .filter(|r| !r[4].is_empty())
        .map(|r| (r[4].as_str(), r[0].parse().unwrap()))
        .collect();
    assert_eq!(
        markers.iter().map(|m| m.0).collect::<Vec<_>>(),
        ["A", "B", "C", "D"]
    );
    close(markers[2].1, 2.77, 5e-3);
    close(markers[3].1, 3.77, 5e-3);

    let c = markers[2].1;
    let area: f64 = xy
        .windows(2)
        .filter(|w| w[0].0 >= c)
        .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
        .sum();
    close(area, 0.283, 1e-3);
}

#[test]
fn plot_needs_two_points() {
    assert_eq!(
        replikit(&["plot-data", "--points", "1"]).status.code(),
        Some(1)
    );
}

use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sharpineq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &[u8]) -> Value {
    serde_json::from_slice(out).expect("stdout is JSON")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn constants_n2() {
    let o = run(&["constants", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o.stdout);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "constants");
    assert_eq!(v["result"]["sharp_coefficient"].as_f64(), Some(0.5));
    assert!((v["result"]["c_n"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn extremal_profile_goes_to_stdout_summary_to_stderr() {
    let o = run(&["extremal", "--n", "2", "--a", "1", "--emit-profile"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,u"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (r, u) = l.split_once(',').unwrap();
            (r.parse().unwrap(), u.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 3000);
    for &(r, u) in rows.iter().step_by(97) {
        let v = (2.0f64).ln() - (-2.0 * r).exp().ln_1p();
        assert!((u - v).abs() < 1e-15, "r = {r}");
    }
    let summary = json(&o.stderr);
    assert_eq!(summary["result"]["mass"].as_f64(), Some(1.0));
    assert_eq!(summary["parameters"]["nodes"], 3000);
}

#[test]
fn deficit_of_generated_function_is_positive() {
    let o = run(&["deficit", "--n", "2", "--seed", "7", "--pieces", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o.stdout);
    assert_eq!(v["passed"], true);
    assert!(v["result"]["deficit"].as_f64().unwrap() > 0.0);
}

#[test]
fn deficit_reads_a_supplied_profile() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.csv");
    std::fs::write(&path, "r,u\n0,0\n1,1\n5,1\n").unwrap();
    let o = run(&["deficit", "--n", "2", "--input", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o.stdout);
    // ∫_0^1 e^0 dr + ∫_1^∞ e^{2-2r} dr = 1 + 1/2
    assert!((v["result"]["mass"].as_f64().unwrap() - 1.5).abs() < 1e-13);
    assert!((v["result"]["energy"].as_f64().unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn negative_input_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.csv");
    std::fs::write(&path, "r,u\n0,0\n1,-1\n2,0\n").unwrap();
    let o = run(&["deficit", "--n", "2", "--input", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o.stdout)["error"]["kind"], "negative_values");
}

#[test]
fn invalid_parameters_exit_2_with_error_object() {
    for args in [
        vec!["constants", "--n", "0.5"],
        vec!["extremal", "--n", "2", "--a", "0.1"],
        vec!["moser", "--n", "2", "--a", "1", "--beta", "5"],
        vec!["verify", "--criterion", "11"],
        vec!["onofri"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let v = json(&o.stdout);
        assert!(v["error"]["kind"].is_string(), "{args:?}");
    }
}

#[test]
fn usage_errors_exit_2() {
    let o = run(&["constants"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o.stdout)["error"]["kind"], "usage");
    let o = run(&["constants", "--n", "2", "--nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_sweep_range_exits_2() {
    let o = run(&["sweep", "--param", "a", "--from", "1", "--to", "10", "--points", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["sweep", "--param", "a", "--from", "3", "--to", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

fn csv_column(text: &str, name: &str) -> Vec<f64> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let idx = rdr.headers().unwrap().iter().position(|h| h == name).unwrap();
    rdr.records().map(|r| r.unwrap()[idx].parse().unwrap()).collect()
}

#[test]
fn mass_sweep_deficit_decreases_below_1e_3() {
    let o = run(&["sweep", "--param", "a", "--n", "2", "--from", "0.6", "--to", "1e4", "--points", "40"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("a,"));
    let d = csv_column(&text, "deficit");
    assert_eq!(d.len(), 40);
    assert!(d.windows(2).all(|w| w[1] < w[0]));
    assert!(*d.last().unwrap() < 1e-3);
}

#[test]
fn rough_constant_sweep_grows_toward_threshold() {
    let threshold = 0.5f64.sqrt();
    let o = run(&[
        "sweep",
        "--param",
        "beta0",
        "--from",
        "1.5",
        "--to",
        &format!("{}", threshold * (1.0 + 1e-9)),
        "--points",
        "30",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let c1 = csv_column(&stdout(&o), "c1");
    assert!(c1.windows(2).all(|w| w[1] > w[0]));
    assert!(*c1.last().unwrap() > 15.0);
}

#[test]
fn output_is_byte_identical_across_runs() {
    for args in [
        vec!["deficit", "--n", "2.5", "--seed", "11"],
        vec!["onofri", "--samples", "40", "--seed", "5"],
        vec!["bliss", "--k", "3", "--l", "6", "--samples", "30"],
        vec!["sweep", "--param", "lambda", "--from", "0.1", "--to", "10", "--points", "16"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn config_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# deficit defaults\nn = 3\nseed = 7\npieces = 4\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let from_file = json(&run(&["deficit", "--config", cfg]).stdout);
    assert_eq!(from_file["parameters"]["n"].as_f64(), Some(3.0));
    assert_eq!(from_file["parameters"]["function"]["pieces"], 4);

    let overridden = json(&run(&["deficit", "--config", cfg, "--n", "2"]).stdout);
    assert_eq!(overridden["parameters"]["n"].as_f64(), Some(2.0));
    assert_eq!(overridden["parameters"]["function"]["seed"], 7);

    let direct = run(&["deficit", "--n", "2", "--seed", "7", "--pieces", "4"]);
    assert_eq!(run(&["deficit", "--config", cfg, "--n", "2"]).stdout, direct.stdout);
}

#[test]
fn config_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "n = 2\nradius_of_doom = 3\n").unwrap();
    let o = run(&["constants", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o.stdout)["error"]["kind"], "config");
}

#[test]
fn config_boolean_and_global_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p.cfg");
    let out = dir.path().join("profile.csv");
    std::fs::write(&cfg, format!("emit_profile = true\nnodes = 5\noutput = {}\n", out.display())).unwrap();
    let o = run(&["extremal", "--n", "2", "--a", "1", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert_eq!(json(&o.stderr)["parameters"]["nodes"], 5);
}

#[test]
fn failed_check_exits_1_with_report() {
    let o = run(&["minimize", "--n", "2", "--a", "1", "--max-iters", "2"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o.stdout);
    assert_eq!(v["passed"], false);
    assert_eq!(v["result"]["converged"], false);
}

#[test]
fn minimize_and_shoot_recover_the_extremal() {
    let v = json(&run(&["minimize", "--n", "2", "--a", "2"]).stdout);
    assert_eq!(v["passed"], true);
    assert!(v["result"]["relative_energy_error"].as_f64().unwrap() < 1e-2);
    assert!(v["result"]["sup_distance"].as_f64().unwrap() < 5e-3);

    let o = run(&["shoot", "--n", "3", "--lambda0", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(json(&o.stdout)["result"]["sup_distance"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn onofri_mobius_family_is_flat() {
    let o = run(&["onofri", "--lambda", "0.3,1,4", "--polynomial", "0,1", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let d = csv_column(&stdout(&o), "deficit");
    assert_eq!(d.len(), 4);
    assert!(d[..3].iter().all(|x| x.abs() < 1e-6));
    assert!((d[3] - 0.07144647461244385).abs() < 1e-9);
}

#[test]
fn verify_single_criterion() {
    let o = run(&["verify", "--criterion", "1,4"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o.stdout);
    assert_eq!(v["result"].as_array().unwrap().len(), 2);
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let o = run(&["constants", "--n", "4", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert!((v["result"]["c_n"].as_f64().unwrap() - (1.0 + 0.5 + 1.0 / 3.0)).abs() < 1e-12);
}

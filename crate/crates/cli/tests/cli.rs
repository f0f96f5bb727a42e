use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn polybetti(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polybetti")).args(args).output().expect("binary runs")
}

fn polybetti_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polybetti")).current_dir(dir).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn strings(v: &Value) -> Vec<String> {
    v.as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect()
}

#[test]
fn exact_planar_quadrilateral() {
    let out = polybetti(&["exact", "--lengths", "1,1,1,2", "--kind", "planar", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["pass"], true);
    assert_eq!(strings(&v["results"][0]["betti"]), ["1", "1"]);
    assert_eq!(v["results"][0]["total"], "2");
    assert!(v["invocation"].is_array());
    assert!(v["diagnostics"].is_array());
}

#[test]
fn exact_equilateral_pentagon() {
    let out = polybetti(&["exact", "--equilateral", "5", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(strings(&v["results"][0]["betti"]), ["1", "8", "1"]);
    assert_eq!(v["results"][0]["total"], "10");
    let spatial = json(&polybetti(&["exact", "--equilateral", "5", "--kind", "spatial", "--json"]));
    assert_eq!(strings(&spatial["results"][0]["betti"]), ["1", "5", "1"]);
}

#[test]
fn error_paths_write_nothing_to_stdout() {
    for (args, code) in [
        (vec!["exact", "--lengths", "1,2,3", "--kind", "spatial"], 11),
        (vec!["exact", "--lengths", "1,2.5,3"], 2),
        (vec!["exact", "--lengths", "1,-2,3"], 2),
        (vec!["exact", "--equilateral", "40"], 10),
        (vec!["exact", "--equilateral", "9", "--cap", "8"], 10),
        (vec!["equilateral", "--n", "6"], 13),
        (vec!["mc", "--model", "uniform:0,1", "--n", "10", "--t", "-1", "--json"], 14),
        (vec!["mc", "--model", "gamma:2", "--n", "10", "--t", "1"], 2),
        (vec!["no-such-command"], 2),
        (vec!["verify", "--config", "/nonexistent/polybetti.cfg"], 4),
    ] {
        let out = polybetti(&args);
        assert_eq!(out.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty(), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn float_medians_are_ambiguous_or_classified() {
    let out = polybetti(&["exact", "--lengths", "0.1,0.2,0.3", "--kind", "planar", "--json"]);
    assert!(matches!(out.status.code(), Some(0) | Some(12)));
    let out = polybetti(&["exact", "--lengths", "0.5,0.5,1.0", "--kind", "spatial"]);
    assert_eq!(out.status.code(), Some(11));
}

#[test]
fn mc_profile_is_degenerate_for_a_short_anchor() {
    let out = polybetti(&["mc", "--lengths", "1,1,1,2", "--perms", "1000", "--seed", "7", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["seed"], 7);
    let a0 = &v["results"][0];
    assert_eq!(a0["statistic"], "a_0");
    assert_eq!(a0["value"], 1.0);
    assert_eq!(a0["std_error"], 0.0);
}

#[test]
fn mc_model_is_reproducible_across_thread_counts() {
    let args = ["mc", "--model", "uniform:0,1", "--n", "16", "--t", "1", "--samples", "20000", "--seed", "7", "--kind", "planar", "--json"];
    let a = polybetti(&args);
    let b = polybetti(&args);
    let mut with_threads = args.to_vec();
    with_threads.extend(["--threads", "1"]);
    let c = polybetti(&with_threads);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let (va, vc) = (json(&a), json(&c));
    assert_eq!(va["results"], vc["results"]);
    let value = va["results"][0]["value"].as_f64().unwrap();
    assert!(value > 0.5 && value <= 1.0, "{value}");
}

#[test]
fn csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let out = polybetti(&["exact", "--equilateral", "5", "--csv", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("statistic,index,value,std_error\n"));
    assert!(text.contains("betti,1,8,"));
    assert!(text.contains("total,,10,"));
}

#[test]
fn calpha_and_equilateral() {
    let v = json(&polybetti(&["calpha", "--alpha", "0", "--model", "uniform:0,1", "--json"]));
    let c = v["results"][0]["value"].as_f64().unwrap();
    // m = 1/2, sd = 1/sqrt(12): C(0) = arctan(m / sd) / pi
    let expected = (0.5 * 12f64.sqrt()).atan() / std::f64::consts::PI;
    assert!((c - expected).abs() < 1e-9, "{c} vs {expected}");
    let v = json(&polybetti(&["equilateral", "--n", "7", "--json"]));
    assert_eq!(strings(&v["results"][0]["betti"]), ["1", "6", "30", "6", "1"]);
    assert_eq!(v["results"][0]["total"], "44");
}

#[test]
fn tau_stats_for_given_lengths() {
    let v = json(&polybetti(&["tau-stats", "--lengths", "1,1,1,2", "--json"]));
    assert_eq!(v["results"][0]["statistic"], "tau");
    assert_eq!(v["results"][1]["statistic"], "tau_tilde");
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("experiment.cfg");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn verify_rejects_invalid_configs() {
    let dir = tempfile::tempdir().unwrap();
    for body in [
        "experiment = clt-tau\nmodel = uniform:0,1\nn_grid = 50, 100\nsamples = 10\nseed = 1\n",
        "experiment = no-such-experiment\nmodel = uniform:0,1\nn_grid = 50\nsamples = 1000\nseed = 1\n",
        "experiment = clt-tau\nmodel = uniform:0,1\nn_grid = 100, 50\nsamples = 1000\nseed = 1\n",
    ] {
        let cfg = write_config(dir.path(), body);
        let out = polybetti_in(dir.path(), &["verify", "--config", cfg.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(3), "{body}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn verify_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "experiment = high-dim-betti-planar\nmodel = uniform:0,1\nn_grid = 12, 16\nsamples = 400\nseed = 3\nregime = sub\np = 0.25\noutput = result.json\n",
    );
    let out = polybetti_in(dir.path(), &["verify", "--config", cfg.to_str().unwrap(), "--json"]);
    let code = out.status.code().unwrap();
    assert!(code == 0 || code == 1, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = json(&out);
    let written: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("result.json")).unwrap()).unwrap();
    assert_eq!(written["pass"], stdout["pass"]);
    assert_eq!(written["pass"].as_bool().unwrap(), code == 0);
    assert_eq!(written["seed"], 3);
    assert!(written["invocation"].is_array());
    let rows = std::fs::read_to_string(dir.path().join("result.csv")).unwrap();
    assert!(rows.starts_with("row,n,statistic,value,std_error,target,samples\n"));
    let parsed = polybetti::asymptotics::ExperimentResult::from_json(&std::fs::read_to_string(dir.path().join("result.json")).unwrap()).unwrap();
    assert_eq!(parsed.results.len(), written["results"].as_array().unwrap().len());
}

#[test]
fn verify_default_output_name() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "experiment = clt-tau\nmodel = uniform:0,1\nn_grid = 40, 80\nsamples = 500\nseed = 11\n",
    );
    let out = polybetti_in(dir.path(), &["verify", "--config", cfg.to_str().unwrap()]);
    assert!(matches!(out.status.code(), Some(0) | Some(1)));
    assert!(dir.path().join("clt-tau.json").exists());
    assert!(dir.path().join("clt-tau.csv").exists());
}

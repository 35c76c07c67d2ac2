use std::path::Path;
use std::process::{Command, Output};

use rpdhg_cli::trace_io::load_trace;

fn rpdhg(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rpdhg")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn lasso_run_writes_monotone_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let o = rpdhg(&["run", "lasso", "--solver", "rpdhg", "--n", "40", "--seed", "7", "--max-iters", "300", "--out", "l"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = load_trace(&tmp.path().join("l/trace.csv")).unwrap();
    assert_eq!(rows.len(), 300);
    assert!(rows.windows(2).all(|w| w[1].best_objective <= w[0].best_objective));
    assert!(rows.iter().all(|r| r.best_objective <= r.objective));
    for f in ["config.json", "summary.json", "solution.csv"] {
        assert!(tmp.path().join("l").join(f).exists(), "{f}");
    }
    // the echoed config reproduces the run
    let again = rpdhg(&["run", "--spec", "l/config.json", "--out", "l2"], tmp.path());
    assert!(again.status.success());
    let a = std::fs::read_to_string(tmp.path().join("l/trace.csv")).unwrap();
    let b = std::fs::read_to_string(tmp.path().join("l2/trace.csv")).unwrap();
    assert_eq!(rpdhg_cli::trace_io::strip_elapsed(&a), rpdhg_cli::trace_io::strip_elapsed(&b));
}

#[test]
fn fan_out_and_compare() {
    let tmp = tempfile::tempdir().unwrap();
    let o = rpdhg(&["run", "tv1d", "--solver", "all", "--num-segs", "4", "--len-segs", "20", "--max-iters", "200", "--out", "t"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let names = ["pdhg", "pdhg-ls", "aoi-ls", "rpdhg"];
    for s in names {
        assert!(tmp.path().join("t").join(s).join("trace.csv").exists());
    }
    let traces: Vec<String> = names.iter().map(|s| format!("t/{s}/trace.csv")).collect();
    let mut args = vec!["compare"];
    args.extend(traces.iter().map(String::as_str));
    let c = rpdhg(&args, tmp.path());
    assert!(c.status.success());
    let table = stdout(&c);
    for s in names {
        assert!(table.lines().any(|l| l.starts_with(s)), "{table}");
    }
    assert!(table.contains("machine-dependent"));

    let single = rpdhg(&["compare", "t/rpdhg/trace.csv"], tmp.path());
    let rows: Vec<String> = stdout(&single).lines().filter(|l| l.starts_with("rpdhg")).map(String::from).collect();
    assert_eq!(rows.len(), 1);
    let twice = rpdhg(&["compare", "t/rpdhg/trace.csv", "t/rpdhg/trace.csv"], tmp.path());
    let rows: Vec<String> = stdout(&twice).lines().filter(|l| l.starts_with("rpdhg")).map(String::from).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], rows[1]);

    let other = rpdhg(&["run", "tv1d", "--seed", "9", "--num-segs", "4", "--len-segs", "20", "--max-iters", "20", "--out", "u"], tmp.path());
    assert!(other.status.success());
    let bad = rpdhg(&["compare", "t/rpdhg/trace.csv", "u/trace.csv"], tmp.path());
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("different experiments"));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(rpdhg(&["run", "svm"], tmp.path()).status.code(), Some(2));
    assert_eq!(rpdhg(&["run", "lasso", "--solver", "sgd"], tmp.path()).status.code(), Some(2));
    assert_eq!(rpdhg(&["run", "lasso", "--nu", "0.6"], tmp.path()).status.code(), Some(2));
    let guard = rpdhg(&["run", "lasso", "--n", "10", "--solver", "pdhg", "--tau", "10", "--sigma", "10", "--out", "g"], tmp.path());
    assert_eq!(guard.status.code(), Some(2));
    let ls = rpdhg(&["run", "lasso", "--n", "10", "--solver", "pdhg-ls", "--max-inner", "1", "--tau0", "1e12", "--out", "n"], tmp.path());
    assert_eq!(ls.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&ls.stderr);
    assert_eq!(stderr.trim().lines().count(), 1, "{stderr}");
    assert!(!tmp.path().join("n").exists());
    std::fs::write(tmp.path().join("blocker"), "").unwrap();
    let io = rpdhg(&["run", "lasso", "--n", "10", "--max-iters", "5", "--out", "blocker/x"], tmp.path());
    assert_eq!(io.status.code(), Some(4));
    assert_eq!(rpdhg(&["compare", "missing/trace.csv"], tmp.path()).status.code(), Some(4));
    assert_eq!(std::fs::read_dir(tmp.path()).unwrap().count(), 1);
}

#[test]
fn describe_prints_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let o = rpdhg(&["describe"], tmp.path());
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["experiments"]["mri"]["experiment"]["nu"], 0.5625);
    assert_eq!(doc["experiments"]["lasso"]["config"]["tau0"], 1.0);
    assert_eq!(rpdhg(&["describe", "knapsack"], tmp.path()).status.code(), Some(2));
}

#[test]
fn image_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let o = rpdhg(&["run", "mri", "--size", "16", "--max-iters", "50", "--out", "m"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["input.pgm", "noisy.pgm", "recon.pgm", "recon.pfm", "diff4x.pgm", "mask.pgm", "mask_pf.pgm", "mask_vd.pgm"] {
        let img = rpdhg_cli::image_io::load(&tmp.path().join("m").join(f)).unwrap();
        assert_eq!((img.rows, img.cols), (16, 16), "{f}");
    }
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("m/summary.json")).unwrap()).unwrap();
    assert!(summary["relative_error"].as_f64().unwrap() > 0.0);
    assert!(summary["zero_filled_error"].as_f64().is_some());

    let t = rpdhg(&["run", "tv2d", "--size", "24", "--split", "spectral", "--max-iters", "30", "--out", "t"], tmp.path());
    assert!(t.status.success(), "{}", String::from_utf8_lossy(&t.stderr));
    let noisy = rpdhg_cli::image_io::load(&tmp.path().join("t/noisy.pgm")).unwrap();
    assert_eq!(noisy.data.len(), 24 * 24);
}

#[test]
fn tuned_pdhg_matches_rpdhg_on_mri() {
    let tmp = tempfile::tempdir().unwrap();
    let r = rpdhg(&["run", "mri", "--size", "32", "--max-iters", "1500", "--out", "r"], tmp.path());
    assert!(r.status.success());
    let p = rpdhg(&["run", "mri", "--size", "32", "--solver", "pdhg", "--tune", "--max-iters", "1500", "--out", "p"], tmp.path());
    assert!(p.status.success(), "{}", String::from_utf8_lossy(&p.stderr));
    let best = |dir: &str| load_trace(&tmp.path().join(dir).join("trace.csv")).unwrap().last().unwrap().best_objective;
    let (a, b) = (best("r"), best("p"));
    assert!((a - b).abs() <= 0.05 * a.abs().min(b.abs()), "rpdhg {a} vs tuned pdhg {b}");
    let cfg: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("p/config.json")).unwrap()).unwrap();
    assert!(cfg["config"]["pdhg_tau"].as_f64().is_some() && cfg["config"]["pdhg_sigma"].as_f64().is_some());
}

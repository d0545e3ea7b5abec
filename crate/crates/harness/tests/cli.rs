use std::fs;
use std::process::{Command, Output};

fn gdro(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gdro")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn missing_config_names_the_path() {
    let o = gdro(&["run", "--config", "/definitely/not/here.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/definitely/not/here.toml"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [&["frobnicate"][..], &["run", "--config", "x", "--bogus"], &[]] {
        let o = gdro(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(stderr(&o).contains("Usage"), "{args:?}: {}", stderr(&o));
    }
    assert_eq!(gdro(&["--help"]).status.code(), Some(0));
}

#[test]
fn invalid_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "[experiment]\nseeds = []\noutput_dir = \"out\"\n[environment]\nkind = \"lowerbound\"\n[[solver]]\nkind = \"smd-gdro\"\n").unwrap();
    let o = gdro(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seeds"), "{}", stderr(&o));
}

#[test]
fn idealgame_reports_the_lower_bound_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("ideal.txt");
    let o = gdro(&["idealgame", "--env", "lowerbound", "--rounds", "200000", "--cache", cache.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    let l_star: f64 = out.lines().find_map(|l| l.strip_prefix("l_star=")).unwrap().parse().unwrap();
    assert!((l_star - 0.275).abs() < 0.002, "{l_star}");
    assert!(fs::read_to_string(&cache).unwrap().contains("rounds=200000"));
}

#[test]
fn solveopt_prints_lambda_hat_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let o = gdro(&["solveopt", "--seed", "3", "--trace", trace.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    let hat: f64 = out.trim().strip_prefix("lambda_hat=").unwrap().parse().unwrap();
    assert!(hat > 0.0 && hat <= 1.0);
    let text = fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("lambda,g,f,U,L\n"));
    assert!(text.lines().count() >= 2);
}

#[test]
fn run_then_plot() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    fs::write(
        &config,
        "[experiment]\nseeds = [7, 8]\noutput_dir = \"results\"\n\n[environment]\nkind = \"lowerbound\"\n\n\
         [ideal]\nrounds = 50000\n\n[[solver]]\nkind = \"sb-gdro\"\nlambda = 0.2\nrounds = 3000\n",
    )
    .unwrap();
    let o = gdro(&["run", "--config", config.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let results = dir.path().join("results");
    assert!(results.join("sb-gdro_7_metrics.csv").exists());
    let o = gdro(&["plot", "--in", results.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 3);
    let svgs = fs::read_dir(&results)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "svg"))
        .count();
    assert_eq!(svgs, 3);
}

#[test]
fn plot_on_an_empty_directory_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = gdro(&["plot", "--in", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

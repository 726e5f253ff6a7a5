use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bfselect(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bfselect"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

const SMALL_SWEEP: [&str; 10] = [
    "random-fn",
    "--n-train",
    "200",
    "--lengthscale",
    "0.4",
    "--ld-list",
    "2,3",
    "--rho-list",
    "0.5,1",
    "--repetitions",
];

fn small_sweep(dir: &Path, extra: &[&str]) -> Output {
    let out = out_arg(dir);
    let mut args: Vec<&str> = SMALL_SWEEP.to_vec();
    args.push("1");
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--out", &out]);
    bfselect(&args)
}

#[test]
fn rbf_demo_writes_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = bfselect(&["rbf-demo", "--out", &out_arg(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["base.csv", "standard.csv", "integral.csv"] {
        let text = fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(text.starts_with("x,f,std\n"), "{name}");
        assert!(!text.contains('\r'));
    }
    let sel = fs::read_to_string(dir.path().join("selection.csv")).unwrap();
    assert!(sel.starts_with("method,index,center,score\n"));
    assert_eq!(sel.lines().filter(|l| l.starts_with("integral,")).count(), 2);
    assert_eq!(sel.lines().filter(|l| l.starts_with("simplified,")).count(), 2);
}

#[test]
fn seed_round_trips_into_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = small_sweep(dir.path(), &["--seed", "7"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let meta = fs::read_to_string(dir.path().join("metadata.txt")).unwrap();
    assert!(meta.lines().any(|l| l == "# seed = 7"), "{meta}");
    assert!(meta.lines().any(|l| l == "seed = 7"), "{meta}");
    let results = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert!(results.starts_with(
        "L,rho,rel_kl,rel_nlpd,rel_rmse,rel_time,abs_time_full_s,abs_time_reduced_s\n"
    ));
    assert_eq!(results.lines().count(), 5);
}

#[test]
fn metadata_config_reloads_to_the_same_run() {
    let first = tempfile::tempdir().unwrap();
    assert!(small_sweep(first.path(), &["--seed", "3"]).status.success());
    let config = first.path().join("metadata.txt");

    let second = tempfile::tempdir().unwrap();
    let out = bfselect(&[
        "random-fn",
        "--config",
        config.to_str().unwrap(),
        "--out",
        &out_arg(second.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        fs::read(first.path().join("scores.csv")).unwrap(),
        fs::read(second.path().join("scores.csv")).unwrap()
    );
}

#[test]
fn out_of_range_rho_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = bfselect(&["random-fn", "--rho", "1.5", "--out", &out_arg(dir.path())]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("rho_list"));
    assert!(!dir.path().join("results.csv").exists());
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    fs::write(&config, "seed = 1\nrbf_count = 4\n").unwrap();
    let out = bfselect(&["rbf-demo", "--config", config.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("rbf_count"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("demo.toml");
    fs::write(&config, "seed = 1\nnum_bfs = 12\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = bfselect(&[
        "rbf-demo",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "9",
        "--out",
        &out_arg(&out_dir),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let meta = fs::read_to_string(out_dir.join("metadata.txt")).unwrap();
    assert!(meta.contains("\nseed = 9\n") && meta.contains("\nnum_bfs = 12\n"), "{meta}");
}

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ladder-dicke"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn column<'a>(header: &'a str, line: &'a str, name: &str) -> &'a str {
    let pos = header.split(',').position(|h| h == name).unwrap();
    line.split(',').nth(pos).unwrap()
}

#[test]
fn empty_single_atom_point() {
    let o = run(&["point", "--n", "1", "--eta1", "0", "--eta2", "0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    for name in ["G1_1", "G1_2"] {
        assert_eq!(column(lines[0], lines[1], name), "0");
    }
    for name in ["g2_11", "g2_22", "g2_12", "g2_21", "chi1", "chi2", "error"] {
        assert_eq!(column(lines[0], lines[1], name), "null");
    }
}

#[test]
fn sweep_row_count_and_order() {
    let o = run(&["sweep", "--n", "2,5", "--eta1", "0.1:0.5:3", "--nbar2", "0.5,1,2,4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 2 * 3 * 4);
    assert_eq!(column(lines[0], lines[1], "N"), "2");
    assert_eq!(column(lines[0], lines[1], "eta1"), "0.1");
    assert_eq!(column(lines[0], lines[1], "nbar2"), "0.5");
    assert_eq!(column(lines[0], lines[2], "nbar2"), "1");
    assert_eq!(column(lines[0], lines[24], "N"), "5");
    assert_eq!(column(lines[0], lines[24], "eta1"), "0.5");
}

#[test]
fn output_is_byte_reproducible_across_thread_counts() {
    let args = ["sweep", "--n", "3,40", "--eta1", "0.2,0.9,1.2", "--eta2", "0.3,1.1", "--tau-stop", "2", "--tau-points", "6", "--series", "11,21"];
    let one = bin().args(args).env("LADDER_DICKE_THREADS", "1").output().unwrap();
    let many = bin().args(args).env("LADDER_DICKE_THREADS", "4").output().unwrap();
    let again = bin().args(args).env("LADDER_DICKE_THREADS", "4").output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, many.stdout);
    assert_eq!(many.stdout, again.stdout);
}

#[test]
fn bad_thread_setting_is_rejected() {
    let o = bin()
        .args(["point", "--n", "2", "--eta1", "0.5", "--eta2", "0.5"])
        .env("LADDER_DICKE_THREADS", "zero")
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("LADDER_DICKE_THREADS"));
}

#[test]
fn json_rows_match_csv_columns() {
    let csv = run(&["sweep", "--n", "4", "--eta1", "0.5,1.2", "--eta2", "0.5"]);
    let json = run(&["sweep", "--n", "4", "--eta1", "0.5,1.2", "--eta2", "0.5", "--format", "json"]);
    assert!(csv.status.success() && json.status.success());
    let header: Vec<String> = stdout(&csv).lines().next().unwrap().split(',').map(String::from).collect();
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let keys: Vec<String> = rows[0].as_object().unwrap().keys().cloned().collect();
    let mut sorted = header.clone();
    sorted.sort();
    let mut keys_sorted = keys;
    keys_sorted.sort();
    assert_eq!(sorted, keys_sorted);
    assert!(rows[1]["nbar1"].is_null());
    assert!(rows[1]["snr1"].is_null());
    assert!(rows[1]["g2_11"].as_f64().unwrap() > 0.0);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    let out = dir.path().join("rows.csv");
    std::fs::write(
        &cfg,
        format!(
            "mode = \"grid\"\nn = [3, 4]\neta1 = \"0.2,0.4\"\neta2 = 0.5\nout = {:?}\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--n", "7"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1..].iter().all(|l| l.starts_with("7,")));
}

#[test]
fn unwritable_output_fails() {
    let o = run(&["point", "--n", "2", "--eta1", "0.5", "--eta2", "0.5", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot write"));
}

#[test]
fn invalid_configs_fail() {
    for args in [
        vec!["point", "--n", "2.5", "--eta1", "0.5", "--eta2", "0.5"],
        vec!["point", "--n", "2,3", "--eta1", "0.5", "--eta2", "0.5"],
        vec!["sweep", "--n", "2", "--eta1", "0.5"],
        vec!["sweep", "--n", "2", "--eta1", "0.5", "--eta2", "0.5", "--tau-stop", "-1"],
        vec!["figure"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "n = 3\nunknown_key = 1\n").unwrap();
    let o = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn negative_eta_rejected_before_running() {
    let o = run(&["sweep", "--n", "2", "--eta1", "0.5,-0.1", "--eta2", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}

fn read_data(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| l.split_whitespace().map(String::from).collect())
        .collect()
}

#[test]
fn fig3b_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "figure", "--preset", "fig3b", "--tau-stop", "5", "--tau-points", "11",
        "--plot-dir", dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let data = read_data(&dir.path().join("fig3b_g2_11_tau.dat"));
    assert_eq!(data.len(), 33);
    let first: Vec<&Vec<String>> = data.iter().filter(|r| r[0] == "0").collect();
    assert_eq!(first.len(), 3);
    // Single atom: one photon at a time on transition 1.
    assert_eq!(first[2][1], "0");
    assert_eq!(first[2][2], "iii");
}

#[test]
fn fig3a_markers_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["figure", "--preset", "fig3a", "--plot-dir", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1 + 60);
    let data = read_data(&dir.path().join("fig3a_g2_11_vs_N.dat"));
    assert_eq!(data.len(), 60);
    assert!(data.iter().all(|r| r[2] == "bunched" || r[2] == "anti-bunched"));
}

#[test]
fn fig5_covers_three_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig5.json");
    let o = run(&[
        "figure", "--preset", "fig5", "--format", "json", "--out", out.to_str().unwrap(),
        "--plot-dir", dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 300);
    let data = read_data(&dir.path().join("fig5_chi1.dat"));
    let below: usize = data.iter().filter(|r| r[1].parse::<f64>().unwrap() < 1.0).count();
    assert!(below > 0);
}

#[test]
fn oracle_check_default_grid_passes() {
    let o = run(&["oracle-check", "--n", "1,2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1 + 2 * 4);
    assert!(text.lines().skip(1).all(|l| l.contains(",true,")));
}

#[test]
fn oracle_check_refuses_large_n() {
    let o = run(&["oracle-check", "--n", "5"]);
    assert_eq!(o.status.code(), Some(2));
}

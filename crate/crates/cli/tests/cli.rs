use std::fmt::Write as _;
use std::path::Path;
use std::process::{Command, Output};

use rankscreen_cli::report::{read_csv_rows, ScreenReport};
use tempfile::TempDir;

fn rankscreen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rankscreen"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Deterministic dataset: `g2` duplicates the response, the rest is filler.
fn write_dataset(dir: &Path, n: usize, p: usize, events: Option<&dyn Fn(usize) -> u8>) -> String {
    let mut text = String::from("time");
    if events.is_some() {
        text.push_str(",status");
    }
    for k in 0..p {
        write!(text, ",g{k}").unwrap();
    }
    text.push('\n');
    for i in 0..n {
        let t = ((i * 37) % n) as f64 + 0.5;
        write!(text, "{t}").unwrap();
        if let Some(ev) = events {
            write!(text, ",{}", ev(i)).unwrap();
        }
        for k in 0..p {
            let v = if k == 2 { t } else { ((i * (k + 3) * 7919 + k * 31) % 101) as f64 / 10.0 };
            write!(text, ",{v}").unwrap();
        }
        text.push('\n');
    }
    let path = dir.join("data.csv");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn json_report(args: &[&str]) -> ScreenReport {
    let o = rankscreen(args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn duplicated_response_ranks_first() {
    let dir = TempDir::new().unwrap();
    let path = write_dataset(dir.path(), 60, 12, None);
    let r = json_report(&["screen", "-i", &path, "-r", "time", "-f", "json"]);
    assert_eq!(r.method, "srcs");
    assert_eq!(r.features[0].feature, "g2");
    assert_eq!(r.features[0].abs_rank, 1);
    assert_eq!(r.features.len(), 12);
    assert_eq!(r.features.iter().filter(|f| f.selected).count(), r.d_n);
}

#[test]
fn all_events_matches_complete_mode() {
    let dir = TempDir::new().unwrap();
    let path = write_dataset(dir.path(), 50, 8, Some(&|_| 1));
    let cen = json_report(&["screen", "-i", &path, "-r", "time", "-e", "status", "-f", "json"]);
    let full = json_report(&["screen", "-i", &path, "-r", "time", "-e", "status", "-m", "srcs", "-f", "json"]);
    assert_eq!(cen.method, "srcs_cen");
    assert_eq!(cen.features, full.features);
    assert_eq!(cen.censoring_ratio, Some(0.0));
    assert_eq!(cen.capped_weights, Some(0));
}

#[test]
fn csv_output_round_trips() {
    let dir = TempDir::new().unwrap();
    let path = write_dataset(dir.path(), 40, 9, Some(&|i| u8::from(i % 3 != 0)));
    let json = json_report(&["screen", "-i", &path, "-r", "time", "-e", "status", "-f", "json"]);
    let o = rankscreen(&["screen", "-i", &path, "-r", "time", "-e", "status", "-f", "csv"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("feature,score,abs_rank,selected\n"));
    let rows = read_csv_rows(o.stdout.as_slice()).unwrap();
    assert_eq!(rows, json.features);
}

#[test]
fn multiplier_controls_selected_count() {
    // ceil(92 / ln 92) = 21, so a = 20/21 selects exactly 20 features
    let dir = TempDir::new().unwrap();
    let path = write_dataset(dir.path(), 92, 40, None);
    let a = (20.0f64 / 21.0).to_string();
    let o = rankscreen(&["screen", "-i", &path, "-r", "time", "--a", &a]);
    assert!(o.status.success());
    let listed = stdout(&o).lines().filter(|l| l.trim_end().ends_with("yes")).count();
    assert_eq!(listed, 20);
    let o = rankscreen(&["screen", "-i", &path, "-r", "time", "--all"]);
    assert_eq!(stdout(&o).lines().filter(|l| l.trim_end().ends_with("no")).count(), 40 - 21);
}

#[test]
fn missing_rows_are_dropped_and_reported() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("m.csv");
    std::fs::write(&path, "time,a,b\n1,2,NA\n2,3,1\n3,,2\n4,1,3\n5,5,5\n").unwrap();
    let r = json_report(&["screen", "-i", path.to_str().unwrap(), "-r", "time", "-f", "json"]);
    assert_eq!(r.n, 3);
    assert_eq!(r.rows_dropped, 2);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "time,a\n1,2\n2,oops\n3,4\n").unwrap();
    let o = rankscreen(&["screen", "-i", bad.to_str().unwrap(), "-r", "time"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let o = rankscreen(&["screen", "-i", dir.path().join("absent.csv").to_str().unwrap(), "-r", "time"]);
    assert_eq!(o.status.code(), Some(3));

    assert_eq!(rankscreen(&["bench", "no-such-scenario", "--reps", "1"]).status.code(), Some(2));
    assert_eq!(rankscreen(&["screen", "--method", "bogus"]).status.code(), Some(2));
    assert_eq!(rankscreen(&["frobnicate"]).status.code(), Some(2));

    let path = write_dataset(dir.path(), 20, 3, None);
    let o = rankscreen(&["screen", "-i", &path, "-r", "time", "-m", "srcs-cen"]);
    assert_eq!(o.status.code(), Some(2));
    let o = rankscreen(&["screen", "-i", &path, "-r", "time", "-m", "srcs_cen"]);
    assert_eq!(o.status.code(), Some(2));
    let o = rankscreen(&["screen", "-i", &path, "-r", "time", "--threads", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_lists_and_runs() {
    let o = rankscreen(&["bench", "--list"]);
    assert!(o.status.success());
    let names = stdout(&o);
    assert!(names.lines().any(|l| l == "ex1-case1a"));
    assert!(names.lines().count() >= 30);

    let o = rankscreen(&["bench", "ex1-case1b-cens20", "--reps", "3", "-m", "srcs_cen", "-f", "csv", "--threads", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!(header.contains(&"realized_censoring"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "ex1-case1b-cens20");
    assert_eq!(row[1], "srcs_cen");
    assert_eq!(row[2], "3");
    let cens: f64 = row[header.iter().position(|h| *h == "realized_censoring").unwrap()].parse().unwrap();
    assert!((0.05..0.4).contains(&cens), "{cens}");
}

#[test]
fn bench_json_is_reproducible() {
    let args = ["bench", "-s", "ex1-case3a", "--reps", "2", "-m", "pearson", "-f", "json", "--seed", "7"];
    let parse = |o: Output| -> serde_json::Value { serde_json::from_slice(&o.stdout).unwrap() };
    let a = parse(rankscreen(&args));
    let b = parse(rankscreen(&args));
    assert_eq!(a["schema_version"], 1);
    assert_eq!(a["results"][0]["method"], "pearson");
    assert_eq!(a["results"][0]["s_values"], b["results"][0]["s_values"]);
    assert_eq!(a["results"][0]["seed"], 7);
}

#[test]
fn custom_catalog() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("cat.toml");
    std::fs::write(
        &path,
        r#"
[[scenario]]
name = "tiny"
n = 40
p = 30
beta = [1.0, 1.0]
covariance = { kind = "independent" }
model = { kind = "linear" }
noise = { kind = "normal", variance = 1.0 }
"#,
    )
    .unwrap();
    let cat = path.to_str().unwrap();
    let o = rankscreen(&["scenarios", "--catalog", cat]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("tiny"));
    let o = rankscreen(&["bench", "tiny", "--reps", "2", "--catalog", cat]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    std::fs::write(&path, "not = [valid").unwrap();
    assert_eq!(rankscreen(&["scenarios", "--catalog", cat]).status.code(), Some(2));
}

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_decifuse"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const SMALL: &str = r#"{"schemes":["parallel","stc"],"K":[4],"pi0":[0.6],"snr_c_db":[6],"snr_h_db":[10],
    "alpha":[0.7],"trials":10000,"master_seed":3}"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn binom(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[test]
fn floor_row_matches_vote_count_oracle() {
    let o = run(&["floor", "--snr-c", "6", "--pi0", "0.6", "--K", "10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(run(&["floor", "--snr-c", "-3"]).status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "K,pi0,snr_c_db,pd,pf,m,error_floor");
    let cols: Vec<&str> = lines.next().unwrap().split(',').collect();
    let (pd, pf): (f64, f64) = (cols[3].parse().unwrap(), cols[4].parse().unwrap());
    let m: u64 = cols[5].parse().unwrap();
    let floor: f64 = cols[6].parse().unwrap();

    // smallest vote count whose likelihood ratio beats the prior ratio
    let lr = |n: u64| (pd / pf).powi(n as i32) * ((1.0 - pd) / (1.0 - pf)).powi(10 - n as i32);
    let m_ref = (0..=10).find(|&n| lr(n) > 0.6 / 0.4).unwrap();
    assert_eq!(m, m_ref);
    let pmf = |p: f64, n: u64| binom(10, n) * p.powi(n as i32) * (1.0 - p).powi(10 - n as i32);
    let expect = 0.4 * (0..m).map(|n| pmf(pd, n)).sum::<f64>() + 0.6 * (m..=10).map(|n| pmf(pf, n)).sum::<f64>();
    assert!((floor - expect).abs() < 1e-12 * expect, "{floor} vs {expect}");
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["simulate", "--config", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error:"));

    let bad = write(dir.path(), "bad.json", &SMALL.replace("\"trials\"", "\"typo\":1,\"trials\""));
    let o = run(&["simulate", "--config", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error:"), "{}", stderr(&o));

    let good = write(dir.path(), "good.json", SMALL);
    let o = run(&["simulate", "--config", &good, "--set", "K=[3]"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let o = run(&["bound", "--scheme", "fusion", "--snr-c", "6", "--snr-h", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error:"));

    let o = bin().args(["floor", "--snr-c", "6"]).env("DECIFUSE_THREADS", "lots").output().unwrap();
    assert_eq!(o.status.code(), Some(2));

    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn computation_errors_exit_one() {
    // local decisions are error-free in floating point, so the bound is undefined
    let o = run(&["bound", "--scheme", "threshold", "--snr-c", "40", "--snr-h", "10"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn dump_config_round_trips_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", SMALL);
    let o = run(&["simulate", "-c", &cfg, "--set", "master_seed=99", "--set", "geometry.epsilon=3", "--dump-config"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["master_seed"], 99);
    assert_eq!(v["geometry"]["epsilon"], 3.0);
    let again = write(dir.path(), "d.json", &stdout(&o));
    let o2 = run(&["simulate", "-c", &again, "--dump-config"]);
    assert_eq!(stdout(&o), stdout(&o2));
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", SMALL);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(run(&["simulate", "-c", &cfg, "-o", a.to_str().unwrap()]).status.success());
    let o = bin()
        .args(["simulate", "-c", &cfg, "-o", b.to_str().unwrap()])
        .env("DECIFUSE_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.success());
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 3);

    let o = run(&["simulate", "-c", &cfg]);
    assert_eq!(stdout(&o).as_bytes(), text.as_bytes());
}

#[test]
fn json_outputs_parse() {
    let o = run(&["bound", "--scheme", "stc", "--snr-c", "6", "--snr-h", "10", "--K", "4", "--alpha", "0.7", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let total = v["pe1_bar"].as_f64().unwrap() + v["pe2_bar"].as_f64().unwrap();
    assert!((v["pe_bar"].as_f64().unwrap() - total).abs() <= 1e-12 * total);

    let o = run(&["asymptotics", "--snr-c", "6", "--snr-h", "10", "--schemes", "parallel,stc", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schemes"].as_array().unwrap().len(), 2);
    assert_eq!(v["differences"].as_array().unwrap().len(), 1);
}

#[test]
fn sweep_reports_every_grid_point() {
    let o = run(&[
        "sweep-alpha", "--scheme", "fusion", "--snr-c", "6", "--snr-h", "5", "--K", "4", "--trials", "10000", "--grid",
        "0.3,0.6,0.9",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    let best = rows.iter().min_by(|a, b| a[9].parse::<f64>().unwrap().total_cmp(&b[9].parse().unwrap())).unwrap();
    assert!(rows.iter().all(|r| r[11] == best[7]));
}

#[test]
fn compare_flags_violations() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", SMALL);
    let csv_path = dir.path().join("rows.csv");
    assert!(run(&["simulate", "-c", &cfg, "-o", csv_path.to_str().unwrap()]).status.success());

    // push one bound far below its estimate
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let mut cols: Vec<String> = lines[1].split(',').map(str::to_string).collect();
    cols[11] = "1e-9".into();
    lines[1] = cols.join(",");
    let tampered = write(dir.path(), "t.csv", &(lines.join("\n") + "\n"));

    let o = run(&["compare", "--input", &tampered]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let rows: Vec<Vec<&str>> = out.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0][14..], ["bound_margin", "bound_violation"]);
    assert_eq!(rows[1][15], "true");
    assert!(rows[1][14].parse::<f64>().unwrap() < 0.0);

    let o = run(&["compare", "--config", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let direct = stdout(&o);
    let from_file = stdout(&run(&["compare", "--input", csv_path.to_str().unwrap()]));
    assert_eq!(direct, from_file);

    let junk = write(dir.path(), "j.csv", "a,b\n1,2\n");
    assert_eq!(run(&["compare", "--input", &junk]).status.code(), Some(2));
}

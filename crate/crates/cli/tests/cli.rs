use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gompertz-gof"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gompertz-gof-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn values(text: &str) -> Vec<f64> {
    text.lines().filter(|l| !l.starts_with('#') && *l != "x").map(|l| l.parse().unwrap()).collect()
}

#[test]
fn sample_then_fit_recovers_parameters() {
    let dir = scratch("fit");
    let data = dir.join("go.csv");
    stdout(&run(&[
        "sample",
        "gompertz",
        "eta=2",
        "b=1",
        "--n",
        "10000",
        "--seed",
        "3",
        "--output",
        data.to_str().unwrap(),
    ]));
    let text = stdout(&run(&["fit", "--input", data.to_str().unwrap()]));
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,eta_hat,b_hat,b_pilot,converged,fallback_used,iterations");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "10000");
    let (eta, b): (f64, f64) = (row[1].parse().unwrap(), row[2].parse().unwrap());
    assert!((eta - 2.0).abs() < 0.2 && (b - 1.0).abs() < 0.1, "eta {eta} b {b}");
    assert_eq!(row[5], "false");
}

#[test]
fn bad_data_exits_with_code_two() {
    let dir = scratch("bad");
    let negative = dir.join("neg.csv");
    fs::write(&negative, "x\n1.0\n-0.5\n2.0\n").unwrap();
    assert_eq!(run(&["fit", "--input", negative.to_str().unwrap()]).status.code(), Some(2));
    let constant = dir.join("const.csv");
    fs::write(&constant, "x\n1.5\n1.5\n1.5\n").unwrap();
    assert_eq!(run(&["fit", "--input", constant.to_str().unwrap()]).status.code(), Some(2));
    let missing = dir.join("nope.csv");
    assert_eq!(run(&["fit", "--input", missing.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["fit"]).status.code(), Some(2));
}

#[test]
fn gof_reports_each_test() {
    let dir = scratch("gof");
    let data = dir.join("go.csv");
    stdout(&run(&["sample", "gompertz", "eta=1", "b=1", "n=60", "--output", data.to_str().unwrap()]));
    let args = ["gof", "--input", data.to_str().unwrap(), "--test", "stein,ks", "--a", "1,2", "--bootstrap", "50"];
    let text = stdout(&run(&args));
    assert_eq!(text, stdout(&run(&args)));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "test,a,statistic,p_value,critical_value,alpha,bootstrap,reject,notfound_boot");
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("stein,1,") && rows[3].starts_with("ks,NA,"));
    for row in &rows[1..] {
        let p: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&p));
    }
    let zero = ["gof", "--input", data.to_str().unwrap(), "--bootstrap", "0"];
    assert_eq!(run(&zero).status.code(), Some(2));
}

#[test]
fn simulate_writes_report() {
    let dir = scratch("sim");
    let config = dir.join("study.cfg");
    fs::write(
        &config,
        "scenarios = GO(1,1)\nn = 30\ntests = stein\na = 1\nreplications = 10\nbootstrap = 20\nseed = 4\n",
    )
    .unwrap();
    let text = stdout(&run(&["simulate", "--config", config.to_str().unwrap()]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "scenario,n,test,a,rejection_rate,notfound_fit,notfound_boot");
    assert_eq!(lines.len(), 2);
    let missing = dir.join("missing.cfg");
    assert_eq!(run(&["simulate", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn lifetable_truncation_bounds_sample() {
    let dir = scratch("life");
    let table = dir.join("table.csv");
    let mut rows = String::from("age,q\n");
    for age in 0..=110 {
        let q = if age == 110 { 1.0 } else { (0.0005 + 0.00004 * (0.095 * age as f64).exp()).min(1.0) };
        rows.push_str(&format!("{age},{q}\n"));
    }
    fs::write(&table, rows).unwrap();
    let pmf = dir.join("pmf.csv");
    let base = ["lifetable", "--input", table.to_str().unwrap(), "--truncate", "40", "99", "--n", "2000"];
    let mut args = base.to_vec();
    args.extend(["--jitter", "--pmf-output", pmf.to_str().unwrap()]);
    let xs = values(&stdout(&run(&args)));
    assert_eq!(xs.len(), 2000);
    assert!(xs.iter().all(|&x| x > 40.0 && x < 99.0));
    let masses: f64 = fs::read_to_string(&pmf)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((masses - 1.0).abs() < 1e-9);
    let mut empty = base.to_vec();
    empty[7] = "0";
    assert_eq!(run(&empty).status.code(), Some(2));
}

#[test]
fn sample_is_deterministic_and_families_agree() {
    let a = stdout(&run(&["sample", "lognormal", "sigma=0.5", "--n", "50", "--seed", "9"]));
    assert_eq!(a, stdout(&run(&["sample", "lognormal", "sigma=0.5", "--n", "50", "--seed", "9"])));
    assert_ne!(a, stdout(&run(&["sample", "lognormal", "sigma=0.5", "--n", "50", "--seed", "10"])));
    let pow = values(&stdout(&run(&["sample", "pow", "nu=1", "--n", "40", "--seed", "2"])));
    let uniform = values(&stdout(&run(&["sample", "uniform", "0", "1", "--n", "40", "--seed", "2"])));
    assert_eq!(pow, uniform);
    assert!(values(&stdout(&run(&["sample", "lf", "nu=2", "--n", "100"]))).iter().all(|&x| x > 0.0));
    assert_eq!(run(&["sample", "bogus", "--n", "5"]).status.code(), Some(2));
    assert_eq!(run(&["sample", "gompertz", "eta=1", "b=1", "--n", "0"]).status.code(), Some(2));
}

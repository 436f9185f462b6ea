use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pcs-barrier"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const BS_BASE: &str = r#"
[model]
kind = "black-scholes"
x0 = 100.0
rate = 0.0
vol = 0.2

[contract]
strike = 95.0
barrier = 90.0
maturity = 1.0

[mc]
method = "pcs"
"#;

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn price_with_pcs_near_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bs.toml", BS_BASE);
    let o = run(&["--config", &cfg, "price"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mean: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("mean"))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!((mean - 8.17140).abs() / 8.17140 < 0.01, "{text}");
    assert!(text.contains("rel_error"));
    assert!(text.contains("stderr"));
}

#[test]
fn verify_exits_zero() {
    let o = run(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("12/12 checks passed"));
}

#[test]
fn empty_schedule_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t.toml",
        &format!("command = \"table\"\n{BS_BASE}\n[experiment]\nschedule = []\n"),
    );
    let out = dir.path().join("t.csv");
    let o = run(&["--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        std::fs::read_to_string(out).unwrap(),
        "M,n,em_mean,em_stderr,pcm_mean,pcm_stderr,em_err_pct,pcm_err_pct\n"
    );
}

#[test]
fn table_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t.toml",
        &format!("command = \"table\"\n{BS_BASE}\n[experiment]\nschedule = [10, 20, 30]\n"),
    );
    let runs: Vec<String> = [("1", "a.csv"), ("8", "b.csv"), ("1", "c.csv")]
        .iter()
        .map(|(w, name)| {
            let out = dir.path().join(name);
            let o = run(&["--config", &cfg, "--workers", w, "--out", out.to_str().unwrap()]);
            assert_eq!(o.status.code(), Some(0));
            std::fs::read_to_string(out).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
    assert_eq!(runs[0].lines().count(), 4);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // usage
    assert_eq!(run(&["--steps", "ten"]).status.code(), Some(1));
    assert_eq!(run(&["--rng", "sobol"]).status.code(), Some(1));
    // parse: unknown key
    let bad = write(dir.path(), "u.toml", &BS_BASE.replace("vol = 0.2", "vol = 0.2\nvolatility = 1"));
    assert_eq!(run(&["--config", &bad]).status.code(), Some(1));
    // validation: correlation bound
    let rho = write(
        dir.path(),
        "rho.toml",
        r#"
[model]
kind = "heston"
x0 = 100.0
v0 = 0.03
mean_reversion = 1.0
long_run = 0.03
vol_of_vol = 0.03
correlation = 1.5

[contract]
strike = 95.0
barrier = 90.0
maturity = 1.0
"#,
    );
    let o = run(&["--config", &rho]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("correlation"));
    // validation: zero steps from a flag
    let cfg = write(dir.path(), "bs.toml", BS_BASE);
    assert_eq!(run(&["--config", &cfg, "--steps", "0"]).status.code(), Some(2));
}

#[test]
fn flags_take_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bs.toml",
        &format!("{BS_BASE}\nsteps = 10\ntrials = 100\n"),
    );
    let o = run(&["--config", &cfg, "--trials", "300", "--method", "pathwise"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("trials     300"), "{text}");
    assert!(text.contains("steps      10"), "{text}");
    assert!(text.contains("method     pathwise"), "{text}");
}

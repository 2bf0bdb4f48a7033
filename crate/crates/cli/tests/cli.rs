use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn wavedecay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavedecay"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn envelope_writes_linear_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "env.cfg",
        "# linear law, constant weight\nlaw = linear\nrho = const\nT = 1\nK = 2\nMa = 1\nS0 = 1\nt_end = 20\nrel_tol = 1e-10\n",
    );
    let out = dir.path().join("env.csv");
    let res = wavedecay(&["envelope", &cfg, "--out", out.to_str().unwrap()]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let text = fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,S"));
    for line in lines {
        let (t, s) = line.split_once(',').unwrap();
        let (t, s): (f64, f64) = (t.parse().unwrap(), s.parse().unwrap());
        assert!((s / (-t / 4.0).exp() - 1.0).abs() < 1e-6);
    }
}

#[test]
fn simulate_streams_series_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sim.cfg",
        "law = superlinear:r0=3\nt_end = 4\ndr = 0.04\nsample_every = 10\n",
    );
    let res = wavedecay(&["simulate", &cfg]);
    assert_eq!(res.status.code(), Some(0));
    let text = String::from_utf8(res.stdout).unwrap();
    assert!(text.starts_with("t,E_total,E_R,D_cum\n"));
    // dt = dr / 2, so 200 levels sampled every 10 plus t = 0.
    assert_eq!(text.lines().count(), 1 + 21);
}

#[test]
fn verify_exit_code_follows_the_checks() {
    let dir = tempfile::tempdir().unwrap();
    let base = "law = linear\nt_end = 110\ndr = 0.04\nsample_every = 25\n";
    let good = write(dir.path(), "good.cfg", base);
    let out = dir.path().join("good");
    let res = wavedecay(&["verify", &good, "--out", out.to_str().unwrap()]);
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stdout)
    );
    for name in ["series.csv", "envelope.csv", "report.csv"] {
        assert!(out.join(name).exists());
    }

    let strict = write(
        dir.path(),
        "strict.cfg",
        &format!("{base}identity_tol = 1e-30\n"),
    );
    let res = wavedecay(&[
        "verify",
        &strict,
        "--out",
        dir.path().join("strict").to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stdout).contains("identity   FAIL"));
}

#[test]
fn aborted_experiment_fails_with_partial_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "abort.cfg",
        "law = superlinear:r0=3\nt_end = 55\ndr = 0.04\nsample_every = 25\nK = 2\nMa = 1e-9\n",
    );
    let out = dir.path().join("abort");
    let res = wavedecay(&["verify", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(fs::read_to_string(out.join("report.csv"))
        .unwrap()
        .contains("status,aborted"));
}

#[test]
fn rates_prints_the_table() {
    let res = wavedecay(&["rates"]);
    assert!(res.status.success());
    let text = String::from_utf8(res.stdout).unwrap();
    assert!(text.starts_with("law,rho,form,exponent\n"));
    assert!(text.contains("superlinear:r0=3,const,power-law mu=-1,-1\n"));
    assert!(text.contains("linear,power:tau=-2,unsupported,\n"));

    let res = wavedecay(&[
        "rates",
        "--law",
        "superlinear:r0=3",
        "--rho",
        "power:tau=-0.5",
    ]);
    assert_eq!(
        String::from_utf8(res.stdout).unwrap().lines().nth(1),
        Some("superlinear:r0=3,power:tau=-0.5,power-law mu=-0.5,-0.5")
    );
}

#[test]
fn bad_configuration_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.cfg",
        "law = linear\nt_end = 4\nspeed = 2\n",
    );
    let res = wavedecay(&["simulate", &cfg]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("unknown key `speed`"));
    let res = wavedecay(&["envelope", dir.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
}

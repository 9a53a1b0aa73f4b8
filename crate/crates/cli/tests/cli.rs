use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn monoflux(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monoflux"))
        .args(args)
        .current_dir(cwd)
        .env("MONOFLUX_THREADS", "1")
        .output()
        .expect("spawn monoflux")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_shows_six_builtins() {
    let dir = tempfile::tempdir().unwrap();
    let out = monoflux(&["list"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 6);
    for name in [
        "hetero-n2",
        "hetero-n3",
        "gl-vortex-n2",
        "constant-zero",
        "constant-minimum",
        "negative-control",
    ] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
}

#[test]
fn constant_zero_exits_zero_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let first = monoflux(
        &["run", "--builtin", "constant-zero", "--out-dir", "a"],
        dir.path(),
    );
    assert_eq!(first.status.code(), Some(0), "{}", stdout(&first));
    let second = monoflux(
        &["run", "--builtin", "constant-zero", "--out-dir", "b"],
        dir.path(),
    );
    assert_eq!(second.status.code(), Some(0));
    for suffix in ["profile.csv", "verdicts.csv", "tensor.txt", "field"] {
        let name = format!("constant-zero.{suffix}");
        let a = fs::read(dir.path().join("a").join(&name)).unwrap();
        let b = fs::read(dir.path().join("b").join(&name)).unwrap();
        assert!(a == b, "{name} differs between runs");
    }
    let verdicts = fs::read_to_string(dir.path().join("a/constant-zero.verdicts.csv")).unwrap();
    assert!(verdicts
        .lines()
        .all(|l| l.split(',').nth(1) == Some("PASS")));
}

#[test]
fn negative_control_expected_failure_keeps_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = monoflux(
        &["run", "--builtin", "negative-control", "--out-dir", "o"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.starts_with("DivergenceFree,FAIL,")));
}

#[test]
fn missing_potential_kind_exits_two_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    fs::write(&cfg, "name = bad\ngrid.n = 2\ngrid.L = 1\ngrid.N = 21\nsource = oracle\nsource.oracle = constant:0\n").unwrap();
    let out = monoflux(&["run", "bad.conf"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("bad.conf:6:") && err.contains("potential.kind"),
        "{err}"
    );
}

#[test]
fn violated_assertion_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("nc.conf");
    fs::write(
        &cfg,
        "name = nc\npotential.kind = double-well\ngrid.n = 2\ngrid.L = 2\ngrid.N = 41\nsource = oracle\nsource.oracle = linear\nexpect.ModicaPointwise = report\noutput.dir = out\n",
    )
    .unwrap();
    let out = monoflux(&["run", "nc.conf"], dir.path());
    assert_eq!(out.status.code(), Some(1), "{}", stdout(&out));
    assert!(stdout(&out).contains("FAILED (DivergenceFree)"));
    assert!(dir.path().join("out/nc.verdicts.csv").exists());
}

#[test]
fn divergent_fixed_step_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("div.conf");
    fs::write(
        &cfg,
        "name = div\npotential.kind = double-well\ngrid.n = 2\ngrid.L = 4\ngrid.N = 21\nsource = solve\nsolve.boundary = heteroclinic\nsolve.initial = constant:30\nsolve.step = fixed:0.0396\n",
    )
    .unwrap();
    let out = monoflux(&["run", "div.conf"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn unknown_builtin_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = monoflux(&["run", "--builtin", "nope"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn field_checks_on_saved_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("h.conf");
    fs::write(
        &cfg,
        "name = h\npotential.kind = double-well\ngrid.n = 2\ngrid.L = 4\ngrid.N = 81\nsource = oracle\nsource.oracle = heteroclinic\noutput.dir = out\n",
    )
    .unwrap();
    assert_eq!(
        monoflux(&["run", "h.conf"], dir.path()).status.code(),
        Some(0)
    );

    let tensor = monoflux(
        &[
            "check-tensor",
            "--field",
            "out/h.field",
            "--R",
            "1",
            "--R",
            "1.5",
        ],
        dir.path(),
    );
    assert_eq!(tensor.status.code(), Some(0), "{}", stdout(&tensor));
    let text = stdout(&tensor);
    assert_eq!(
        text.lines()
            .filter(|l| l.starts_with("pohozaev R="))
            .count(),
        2
    );
    assert!(text.contains("DivergenceFree,PASS"));

    let mono = monoflux(
        &[
            "check-monotonicity",
            "--field",
            "out/h.field",
            "--radii",
            "12",
            "--csv",
            "p.csv",
        ],
        dir.path(),
    );
    assert_eq!(mono.status.code(), Some(0), "{}", stdout(&mono));
    assert!(stdout(&mono).contains("StrongTheorem,PASS"));
    let csv = fs::read_to_string(dir.path().join("p.csv")).unwrap();
    assert_eq!(csv.lines().count(), 13);
    assert!(csv.starts_with(
        "R,f,e,w,f_scaled_weak,f_scaled_strong,e_scaled_weak,e_scaled_strong,w_scaled\n"
    ));

    let few = monoflux(
        &[
            "check-monotonicity",
            "--field",
            "out/h.field",
            "--radii",
            "4",
        ],
        dir.path(),
    );
    assert_eq!(few.status.code(), Some(2));
}

#[test]
fn vortex_oracle_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = monoflux(
        &[
            "oracle", "vortex", "--rmax", "10", "--step", "1e-3", "--out", "g.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("g.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("r,g"));
    let bad = monoflux(&["oracle", "vortex", "--rmax", "3"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn bad_thread_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_monoflux"))
        .arg("list")
        .current_dir(dir.path())
        .env("MONOFLUX_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

use std::process::{Command, Output};

fn typetopos(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_typetopos")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn corpus_list_names_every_fixture() {
    let o = typetopos(&["corpus", "list"]);
    assert!(o.status.success());
    for name in typetopos::corpus::names() {
        assert!(stdout(&o).contains(name), "{name}");
    }
}

#[test]
fn spec_is_deterministic_and_passes() {
    let a = typetopos(&["spec", "lattice-3chain"]);
    let b = typetopos(&["spec", "lattice-3chain"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn unknown_input_is_an_error() {
    let o = typetopos(&["spec", "no-such-fixture"]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn bad_config_line_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    std::fs::write(&path, "input=lattice-2x2\nnot a pair\n").unwrap();
    let o = typetopos(&["run", path.to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains('2'));
}

#[test]
fn run_writes_stage_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        format!("# chain\ninput=lattice-3chain\nvariant=prime\nchecks=spec,coverage,preserve\nout={}\n", out.display()),
    )
    .unwrap();
    let o = typetopos(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    for file in ["spec.report", "coverage.report", "preserve.report", "summary.report", "preserve-converse-witness.txt", "spec-site.txt"] {
        assert!(out.join(file).exists(), "{file}");
    }
}

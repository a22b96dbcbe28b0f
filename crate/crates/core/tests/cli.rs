mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::{fixture, read_fixture, CONTEXTS};

fn contextflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contextflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn with_contexts(sub: &str, extra: &[&str]) -> Vec<String> {
    let mut args = vec![sub.to_string()];
    for c in CONTEXTS {
        args.push("-c".into());
        args.push(fixture(c).display().to_string());
    }
    for e in extra {
        args.push(e.to_string());
    }
    args.push(fixture("workflow.mac").display().to_string());
    args
}

fn runtime() -> Vec<String> {
    vec![
        "-c".into(),
        fixture("Outputs.ctx").display().to_string(),
        "--db".into(),
        format!("Database=RefDB:{}", fixture("refdb.kv").display()),
        "--db".into(),
        format!("Database=PhysicsGroupDB:{}", fixture("physicsgroupdb.kv").display()),
        "--arg".into(),
        "UserJDLFile=job.jdl".into(),
        "--arg".into(),
        "ResourceBroker=rb.cern.ch".into(),
    ]
}

fn run(args: &[String]) -> Output {
    contextflow(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn apply_emits_golden_macro() {
    let out = run(&with_contexts("apply", &["--emit", "macro"]));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out), read_fixture("expanded_workflow.mac"));
}

#[test]
fn apply_writes_dag_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("workflow.dag");
    let out = run(&with_contexts("apply", &["--emit", "dag", "-o", path.to_str().unwrap()]));
    assert!(out.status.success());
    let dag = std::fs::read_to_string(&path).unwrap();
    assert!(dag.starts_with("JOB CMKIN CMKIN.sub\n"));
    assert!(dag.ends_with("PARENT OSCAR CHILD Digitization\n"));
}

#[test]
fn reduce_emits_provenance_and_shell() {
    let mut args = with_contexts("reduce", &["--emit", "provenance"]);
    args.splice(1..1, runtime());
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).lines().filter(|l| l.starts_with("REDUCE ")).count(), 9);

    let dir = tempfile::tempdir().unwrap();
    let mut args = with_contexts("reduce", &["--emit", "shell", "-o", dir.path().to_str().unwrap()]);
    args.splice(1..1, runtime());
    assert!(run(&args).status.success());
    let script = std::fs::read_to_string(dir.path().join("0_CMKIN.sh")).unwrap();
    assert!(script.contains("export ApplicationVersion=6.133\n"));
}

#[test]
fn run_writes_manifest_and_scripts() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let mut args = with_contexts("run", &["--jobs", "3", "--out-dir", out_dir.to_str().unwrap()]);
    args.splice(1..1, runtime());
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = std::fs::read_to_string(out_dir.join("manifest.log")).unwrap();
    assert_eq!(manifest.lines().count(), 3);
    let scripts = std::fs::read_dir(&out_dir)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "sh"))
        .count();
    assert_eq!(scripts, 12);
    assert!(Path::new(&out_dir.join("provenance.log")).exists());
}

#[test]
fn validate_fixture_is_clean() {
    let out = run(&with_contexts("validate", &["--strict-collisions"]));
    assert!(out.status.success());
    assert_eq!(stdout(&out), "ok: 6 element(s), 9 flow(s), 0 collision(s)\n");
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn strict_collisions_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "Site.ctx", "contextBlock Application=*\n  define Site default\nend\n");
    let b = write(dir.path(), "FNAL.ctx", "contextBlock Application=A\n  define Site FNAL\nend\n");
    let wf = write(dir.path(), "wf.mac", "attach A\n");
    let out = contextflow(&["validate", "-c", &a, "-c", &b, &wf]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("intentional shadowing"));
    let out = contextflow(&["validate", "--strict-collisions", "-c", &a, "-c", &b, &wf]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cyclic = write(dir.path(), "cyc.mac", "attach A\nattach B\nA define x ::B:y\nB define y ::A:x\n");
    assert_eq!(contextflow(&["validate", &cyclic]).status.code(), Some(2));
    let deps = write(dir.path(), "deps.mac", "attach A\nattach B\nA adddep B\nB adddep A\n");
    assert_eq!(contextflow(&["validate", &deps]).status.code(), Some(2));
    let bad = write(dir.path(), "bad.mac", "attach A\nA define x :;B:y\n");
    let out = contextflow(&["validate", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert_eq!(contextflow(&["validate", "/nonexistent.mac"]).status.code(), Some(1));
    assert_eq!(contextflow(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(contextflow(&["--help"]).status.code(), Some(0));
}

#[test]
fn unsupported_emit_target() {
    let out = run(&with_contexts("apply", &["--emit", "manifest"]));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`apply` cannot emit `manifest`"));
}

use std::path::{Path, PathBuf};
use std::process::Command;

const REFERENCE: &str = include_str!("../configs/reference.toml");

fn repat() -> Command {
    Command::new(env!("CARGO_BIN_EXE_repat"))
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.toml");
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> (i32, String) {
    let out = repat().args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn build_then_validate_fk_and_measure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), REFERENCE);
    let out = dir.path().join("o");
    let (c, o) = (cfg.to_str().unwrap(), out.to_str().unwrap());
    assert_eq!(run(&["build", "--config", c, "--out", o, "--max-stage", "6"]).0, 0);
    let stages = std::fs::read_to_string(out.join("stages.json")).unwrap();
    assert!(stages.contains("\"pi\": 127"));
    assert_eq!(run(&["validate", "--config", c, "--out", o, "--max-stage", "6"]).0, 0);
    assert_eq!(run(&["fk", "--config", c, "--out", o]).0, 0);
    let fk = std::fs::read_to_string(out.join("fk.csv")).unwrap();
    assert!(fk.starts_with("n,mode,window,horizon,fit,gap,gap_bound,distance,bound,certified,passed"));
    assert!(fk.lines().skip(1).all(|l| l.ends_with(",true")));
    assert!(fk.contains(",identical,"));
    assert_eq!(run(&["measure", "--config", c, "--out", o]).0, 0);
    let occ = std::fs::read_to_string(out.join("occupancy.csv")).unwrap();
    assert_eq!(occ.lines().count(), 1 + 15);
}

#[test]
fn ten_stages_give_period_2047() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), REFERENCE);
    let out = dir.path().join("o");
    assert_eq!(
        run(&["build", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--max-stage", "10"]).0,
        0
    );
    let csv = std::fs::read_to_string(out.join("stages.csv")).unwrap();
    assert!(csv.lines().last().unwrap().starts_with("10,2047,"));
}

#[test]
fn repetition_count_one_fails_with_condition_3() {
    let dir = tempfile::tempdir().unwrap();
    let text = REFERENCE.replace("repeat = 13\nk = 2", "repeat = 2\nk = 1");
    let cfg = write_config(dir.path(), &text);
    let out = dir.path().join("o");
    let (code, err) = run(&["build", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("condition 3"), "{err}");
}

#[test]
fn exit_codes_for_config_and_cap_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = out.to_str().unwrap();
    let missing = dir.path().join("nope.toml");
    assert_eq!(run(&["build", "--config", missing.to_str().unwrap(), "--out", o]).0, 1);
    let cfg = write_config(dir.path(), REFERENCE);
    let c = cfg.to_str().unwrap();
    assert_eq!(run(&["build", "--config", c, "--out", o, "--max-stage", "3"]).0, 0);
    // orbit sample cap below the stage periods
    let capped = REFERENCE.replace("sample_cap = 10000000", "sample_cap = 4");
    let cfg2 = dir.path().join("capped.toml");
    std::fs::write(&cfg2, capped).unwrap();
    assert_eq!(run(&["measure", "--config", cfg2.to_str().unwrap(), "--out", o]).0, 4);
}

#[test]
fn sampled_search_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let text = REFERENCE.replace(
        "repeat = 13\nk = 2\nsearch = \"exhaustive\"\nr = 1",
        "repeat = 4\nk = 2\nsearch = \"sampled\"\nr = 1\nsamples = 6",
    );
    let cfg = write_config(dir.path(), &text);
    let c = cfg.to_str().unwrap();
    let mut files = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let (code, err) = run(&["build", "--config", c, "--out", out.to_str().unwrap(), "--seed", "5"]);
        assert_eq!(code, 0, "{err}");
        files.push(std::fs::read(out.join("stages.json")).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

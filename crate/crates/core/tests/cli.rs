use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gldpc"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("c.toml");
    std::fs::write(&path, body).unwrap();
    path
}

const SMALL_BEC: &str = "[code]\nfixture = 1\nlifting_size = 34\n[code.row_subcodes]\n1 = \"hamming_7_4\"\n\
[channel]\ntype = \"bec\"\nparameters = [0.3, 0.45]\n[decoder]\nschedules = [\"1,2,3,4\", \"4,1,2,3\"]\n\
[run]\ntrials = 200\nseed = 5\n";

#[test]
fn schedule_prints_hds_first() {
    let o = bin().arg("schedule").arg(config("gr4_schedule.toml")).output().unwrap();
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("1,3,2,4"));
    assert!(text.contains("low_degree: 1,2,3,4"));
}

#[test]
fn config_flag_is_accepted() {
    let o = bin()
        .args(["schedule", "--config"])
        .arg(config("gr4_schedule.toml"))
        .output()
        .unwrap();
    assert_eq!(stdout(&o).lines().next(), Some("1,3,2,4"));
}

#[test]
fn analyze_reports_profiles() {
    let o = bin().arg("analyze").arg(config("gr4_schedule.toml")).output().unwrap();
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("N=540 K=180 rank=360"));
    assert!(text.contains("1,shortened_hamming_6_3,6,3,3,4,6"));
    assert!(text.contains("3,hamming_7_4,7,4,3,7,7"));
    assert!(text.contains("1: - 0 3 4"));
}

#[test]
fn predict_emits_key_values() {
    let o = bin().arg("predict").arg(config("fig1a_bec.toml")).output().unwrap();
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("channel=bec"));
    assert!(text.contains("preferred="));
    for line in text.lines().filter(|l| !l.is_empty()) {
        assert!(line.contains('='), "{line}");
    }
}

#[test]
fn verify_passes() {
    let o = bin().arg("verify").output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn unknown_subcommand_exits_one() {
    let o = bin().arg("frobnicate").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn zero_trials_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &SMALL_BEC.replace("trials = 200", "trials = 0"));
    let o = bin().arg("simulate").arg(&path).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("run.trials"));
}

#[test]
fn missing_config_exits_one() {
    let o = bin().args(["simulate", "/nonexistent/config.toml"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_writes_csv_to_stdout_and_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), SMALL_BEC);
    let o = bin().arg("simulate").arg(&path).output().unwrap();
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "channel_param,schedule,iterations,trials,block_errors,bler,seed");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("0.3,\"1,2,3,4\",3,200,"));
    assert!(lines[4].starts_with("0.45,\"4,1,2,3\",3,200,"));

    let out = dir.path().join("o.csv");
    let o = bin().arg("simulate").arg(&path).arg("--output").arg(&out).output().unwrap();
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), text);

    let o = bin().arg("simulate").arg(&path).args(["--seed", "6"]).output().unwrap();
    assert!(stdout(&o).lines().all(|l| l.ends_with(",6") || l.ends_with("seed")));
}

#[test]
fn unwritable_output_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), SMALL_BEC);
    let o = bin()
        .arg("simulate")
        .arg(&path)
        .args(["--output", "/nonexistent/dir/out.csv"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

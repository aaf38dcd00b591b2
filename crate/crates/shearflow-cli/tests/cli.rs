use std::path::Path;
use std::process::Command;

fn shearflow(args: &[&str], out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_shearflow"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("SHEARFLOW_OUT")
        .output()
        .expect("binary runs")
}

#[test]
fn run_is_deterministic_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = ["run", "--n1", "16", "--n2", "64", "--seed", "11"];
    for out in [&a, &b] {
        let o = shearflow(&args, out);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["norms.csv", "ledger.jsonl", "summary.txt", "fields_eps0.1.csv"] {
        let x = std::fs::read(a.join(name)).unwrap();
        assert_eq!(x, std::fs::read(b.join(name)).unwrap(), "{name}");
    }
    let norms = std::fs::read_to_string(a.join("norms.csv")).unwrap();
    assert!(norms.starts_with(shearflow_cli::report::NORMS_HEADER));
    assert_eq!(norms.lines().count(), 2);
}

#[test]
fn subsonic_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[flow]\nprofile = \"constant\"\nbase = 0.5\n").unwrap();
    let o = shearflow(&["run", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("validate_supersonic"));
}

#[test]
fn example_config_runs() {
    let dir = tempfile::tempdir().unwrap();
    let example = concat!(env!("CARGO_MANIFEST_DIR"), "/shearflow.example.toml");
    let o = shearflow(&["dump", "--config", example, "--n1", "16", "--n2", "64", "--eps", "0.2"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("fields_eps0.2.csv").is_file());
}

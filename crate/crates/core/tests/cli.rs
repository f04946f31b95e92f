use std::path::PathBuf;

use clap::Parser;
use nxfem::cli::{run, Cli, Status};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nxfem-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn invoke(args: &[&str]) -> (Status, String) {
    let cli = Cli::try_parse_from(std::iter::once("nxfem").chain(args.iter().copied())).unwrap();
    let mut log = Vec::new();
    let status = run(&cli, &mut log);
    (status, String::from_utf8(log).unwrap())
}

#[test]
fn study_output_is_deterministic() {
    let dir = scratch("determinism");
    let (a, b) = (dir.join("a"), dir.join("b"));
    for out in [&a, &b] {
        let (status, log) = invoke(&["study", "--example", "2", "--n", "8,16", "--out", out.to_str().unwrap()]);
        assert_eq!(status, Status::Success, "{log}");
    }
    let csv = std::fs::read(a.join("study.csv")).unwrap();
    assert_eq!(csv, std::fs::read(b.join("study.csv")).unwrap());
    assert_eq!(std::fs::read(a.join("study.md")).unwrap(), std::fs::read(b.join("study.md")).unwrap());
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(2).unwrap().ends_with(",ok"));
}

#[test]
fn constrained_dump_respects_bounds() {
    let dir = scratch("dump");
    let (status, log) = invoke(&["solve", "--example", "3", "--n", "16", "--out", dir.to_str().unwrap()]);
    assert_eq!(status, Status::Success, "{log}");
    let csv = std::fs::read_to_string(dir.join("fields_n16.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let (uh, active) = (col("u_h"), col("active_h"));
    let mut n_active = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let u: f64 = f[uh].parse().unwrap();
        assert!((-0.5..=0.5).contains(&u), "{line}");
        n_active += usize::from(f[active] == "1");
    }
    assert!(n_active > 0);
}

#[test]
fn unconstrained_dump_is_close_to_the_exact_control() {
    let dir = scratch("ex1");
    let (status, _) = invoke(&["solve", "--example", "1", "--n", "32", "--out", dir.to_str().unwrap()]);
    assert_eq!(status, Status::Success);
    let csv = std::fs::read_to_string(dir.join("fields_n32.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let (uh, u) = (col("u_h"), col("u"));
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for line in lines {
        let f: Vec<f64> = line.split(',').skip(2).map(|s| s.parse().unwrap()).collect();
        worst = worst.max((f[uh - 2] - f[u - 2]).abs());
        scale = scale.max(f[u - 2].abs());
    }
    assert!(worst < 0.05 * scale, "max error {worst}, max |u| {scale}");
}

#[test]
fn exit_statuses() {
    let (status, log) = invoke(&["study", "--config", "/nonexistent/study.conf"]);
    assert_eq!((status, status.code()), (Status::ConfigError, 1));
    assert!(log.starts_with("error:"));

    assert_eq!(invoke(&["solve", "--n", "8,16"]).0, Status::ConfigError);
    assert_eq!(invoke(&["verify", "--example", "9"]).0, Status::ConfigError);

    let (status, log) = invoke(&["props", "--example", "2", "--n", "8", "--ctilde", "0.01"]);
    assert_eq!((status, status.code()), (Status::CheckFailure, 3));
    assert!(log.contains("[FAIL] coercivity"));

    let dir = scratch("stall");
    let conf = dir.join("stall.conf");
    std::fs::write(&conf, "example = 1\nnu = 1e-4\nlower = -0.5\nupper = 0.5\nmax_iter = 20\n").unwrap();
    let args = ["solve", "--config", conf.to_str().unwrap(), "--n", "8", "--out", dir.to_str().unwrap()];
    let (status, log) = invoke(&args);
    assert_eq!((status, status.code()), (Status::SolverFailure, 2), "{log}");
    assert!(log.contains("converged=false"));
}

#[test]
fn verify_and_props_pass_for_the_benchmarks() {
    for ex in ["1", "2", "3"] {
        let (status, log) = invoke(&["verify", "--example", ex]);
        assert_eq!(status, Status::Success, "{log}");
        assert_eq!(log.matches("[PASS]").count(), 8);
    }
    let (status, log) = invoke(&["props", "--example", "3", "--n", "8"]);
    assert_eq!(status, Status::Success, "{log}");
    assert!(!log.contains("[FAIL]"));
}

#[test]
fn shipped_configs_parse() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs");
    for k in 1..=6 {
        let path = dir.join(format!("example{}_{}.conf", (k + 1) / 2, if k % 2 == 1 { "l2" } else { "h1" }));
        let cfg = nxfem::cli::StudyConfig::load(&path).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.meshes, vec![16, 32, 64, 128]);
    }
}

mod common;

use std::path::Path;

use common::{run_cli, small_config};
use domain_uq::config::ExperimentConfig;
use domain_uq::lattice::GeneratingVector;

const COMMANDS: [&[&str]; 5] = [
    &["cbc"],
    &["run-poisson"],
    &["run-heat"],
    &["truncation"],
    &["truncation", "--problem", "heat"],
];

fn run_in(config: &Path, out: &Path, threads: &str, cmd: &[&str]) {
    let mut args = vec![
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--threads",
        threads,
    ];
    args.extend_from_slice(cmd);
    let o = run_cli(&args);
    assert!(
        o.status.success(),
        "{cmd:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

#[test]
fn artifacts_are_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path(), false);
    let mut runs = Vec::new();
    for threads in ["1", "2", "8"] {
        let out = dir.path().join(format!("t{threads}"));
        for cmd in COMMANDS {
            run_in(&config, &out, threads, cmd);
        }
        runs.push(artifacts(&out));
    }
    assert_eq!(runs[0].len(), 8);
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn timed_runs_agree_outside_the_seconds_column() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path(), true);
    let strip = |p: &Path| -> Vec<String> {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .map(|l| match l.rsplit_once(',') {
                Some((head, _)) if !l.starts_with('#') => head.to_string(),
                _ => l.to_string(),
            })
            .collect()
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_in(&config, &a, "1", &["run-poisson"]);
    run_in(&config, &b, "8", &["run-poisson"]);
    assert_eq!(strip(&a.join("poisson.csv")), strip(&b.join("poisson.csv")));
}

#[test]
fn artifacts_carry_hash_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path(), false);
    let out = dir.path().join("out");
    for cmd in COMMANDS {
        run_in(&config, &out, "2", cmd);
    }
    let cfg = ExperimentConfig::load(&config).unwrap();
    let tag = format!("# {}", cfg.provenance().unwrap());
    for (name, bytes) in artifacts(&out) {
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.lines().any(|l| l.starts_with(&tag)), "{name}");
    }
    let poisson = std::fs::read_to_string(out.join("poisson.csv")).unwrap();
    assert_eq!(poisson.lines().nth(1), Some("m,n,R,rms_L2,rms_H10,seconds"));
    let heat = std::fs::read_to_string(out.join("heat.csv")).unwrap();
    assert_eq!(
        heat.lines().nth(1),
        Some("m,n,R,rms_L2L2,rms_L2H10,seconds")
    );
    let trunc = std::fs::read_to_string(out.join("truncation_heat.csv")).unwrap();
    assert_eq!(trunc.lines().nth(1), Some("s_trunc,err_L2L2,err_L2H10"));
    assert_eq!(poisson.lines().count(), 2 + 4);
}

#[test]
fn seed_flag_changes_results() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path(), false);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_in(&config, &a, "2", &["run-poisson"]);
    run_in(&config, &b, "2", &["run-poisson", "--seed", "7"]);
    let ta = std::fs::read_to_string(a.join("poisson.csv")).unwrap();
    let tb = std::fs::read_to_string(b.join("poisson.csv")).unwrap();
    assert!(tb.starts_with("# config=") && tb.lines().next().unwrap().contains("seed=7"));
    assert_ne!(ta, tb);
}

#[test]
fn cbc_output_reads_back_and_feeds_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path(), false);
    let out = dir.path().join("out");
    run_in(&config, &out, "1", &["cbc"]);
    let gv = GeneratingVector::read(&out.join("lattice_m6.txt")).unwrap();
    assert_eq!((gv.n(), gv.s()), (64, 6));
    assert_eq!(gv.z()[0], 1);

    let mut cfg = ExperimentConfig::load(&config).unwrap();
    cfg.cbc.vector = Some(out.join("lattice_m6.txt"));
    let with_file = dir.path().join("file.toml");
    std::fs::write(&with_file, cfg.to_toml().unwrap()).unwrap();
    run_in(&with_file, &out, "1", &["run-poisson"]);
    let o = run_cli(&[
        "--config",
        with_file.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "cbc",
    ]);
    assert!(!o.status.success());
}

#[test]
fn one_dimensional_cbc_is_the_unit_vector() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::preset("desk-e3").unwrap();
    cfg.s = 1;
    cfg.m_list = vec![4];
    let path = dir.path().join("c.toml");
    std::fs::write(&path, cfg.to_toml().unwrap()).unwrap();
    run_in(&path, dir.path(), "1", &["cbc"]);
    let text = std::fs::read_to_string(dir.path().join("lattice_m4.txt")).unwrap();
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body, vec!["1"]);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path(), false);
    let text = std::fs::read_to_string(&config).unwrap();
    for (i, bad) in [
        format!("shifs = 3\n{text}"),
        text.replace("[cbc]", "[cbc]\nlamda = 0.5"),
    ]
    .iter()
    .enumerate()
    {
        let path = dir.path().join(format!("bad{i}.toml"));
        std::fs::write(&path, bad).unwrap();
        let o = run_cli(&["--config", path.to_str().unwrap(), "run-poisson"]);
        assert!(!o.status.success());
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(
            err.contains("unknown field") && err.contains(path.to_str().unwrap()),
            "{err}"
        );
    }
}

#[test]
fn verify_passes_and_lists_every_suite() {
    let o = run_cli(&["verify"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}");
    for suite in [
        "check_tau_bound",
        "check_upsilon",
        "check_xi_alpha",
        "check_superlemma",
        "check_identities",
        "fem_manufactured",
        "heat_manufactured",
        "geometry",
    ] {
        assert!(
            stdout
                .lines()
                .any(|l| l.starts_with(suite) && l.contains("passed")),
            "{suite}"
        );
    }
}

#[test]
fn injected_fault_fails_verify_naming_the_check() {
    let o = run_cli(&["verify", "--inject-fault", "tau-off-by-one"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("check_tau_bound"), "{err}");
    assert!(!err.contains("check_identities"));
}

#[test]
fn bad_arguments_exit_with_usage_error() {
    assert_eq!(run_cli(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(
        run_cli(&["--preset", "desk-e9", "cbc"]).status.code(),
        Some(1)
    );
}

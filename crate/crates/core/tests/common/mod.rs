#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;

use domain_uq::cbc::PodWeights;
use domain_uq::config::ExperimentConfig;
use domain_uq::cubature::{ProblemKind, QmcProblem};
use domain_uq::deformation::{pullback_data, Experiment, ScalarField};
use domain_uq::fem::{build_disk_mesh, FemSpace, PullbackProblem};

pub fn b2(x: f64) -> f64 {
    x * x - x + 1.0 / 6.0
}

/// Squared shift-averaged worst-case error by enumerating every subset.
pub fn wce_by_subsets(z: &[u64], n: u64, w: &PodWeights) -> f64 {
    let s = z.len();
    let mut total = 0.0;
    for mask in 1u32..(1 << s) {
        let u: Vec<usize> = (0..s).filter(|j| mask >> j & 1 == 1).collect();
        let mut avg = 0.0;
        for k in 0..n {
            avg += u
                .iter()
                .map(|&j| b2(((k * z[j]) % n) as f64 / n as f64))
                .product::<f64>();
        }
        total += w.gamma(&u) * avg / n as f64;
    }
    total
}

/// Greedy construction that scores every odd candidate by subset
/// enumeration; ties within `1e-12` relative go to the smaller candidate.
pub fn exhaustive_cbc(n: u64, s: usize, w: &PodWeights) -> Vec<u64> {
    let mut z = Vec::with_capacity(s);
    for d in 1..=s {
        let wd = w.truncated(d).unwrap();
        let scores: Vec<(u64, f64)> = (1..n)
            .step_by(2)
            .map(|c| {
                let mut cand = z.clone();
                cand.push(c);
                (c, wce_by_subsets(&cand, n, &wd))
            })
            .collect();
        let min = scores.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let pick = scores
            .iter()
            .find(|p| p.1 <= min + 1e-12 * min.abs())
            .unwrap()
            .0;
        z.push(pick);
    }
    z
}

pub fn problem(exp: Experiment, s: usize, h: f64, kind: ProblemKind) -> QmcProblem {
    let space = Arc::new(FemSpace::new(build_disk_mesh(h).unwrap()).unwrap());
    let data = pullback_data(&exp.field(s).unwrap(), ScalarField::ONE, ScalarField::ZERO);
    QmcProblem::new(PullbackProblem::new(space, data).unwrap(), kind).unwrap()
}

pub fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_domain-uq")
}

pub fn run_cli(args: &[&str]) -> Output {
    Command::new(binary())
        .args(args)
        .output()
        .expect("binary runs")
}

/// A small E1 config written to `dir/config.toml`.
pub fn small_config(dir: &Path, record_wall_time: bool) -> std::path::PathBuf {
    let mut cfg = ExperimentConfig::preset("desk-e1").unwrap();
    cfg.s = 6;
    cfg.h = 0.3;
    cfg.m_list = vec![3, 4, 5, 6];
    cfg.shifts = 4;
    cfg.t_final = 0.3;
    cfg.truncation.s_ref = 16;
    cfg.truncation.m = 6;
    cfg.record_wall_time = record_wall_time;
    let path = dir.join("config.toml");
    std::fs::write(&path, cfg.to_toml().unwrap()).unwrap();
    path
}

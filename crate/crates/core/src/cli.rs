//! Command-line front end. `main` only parses arguments and calls [`run`].

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cbc::cbc_construct;
use crate::config::{ExperimentConfig, PRESETS};
use crate::cubature::{convergence_study, truncation_study, ProblemKind, QmcProblem};
use crate::deformation::pullback_data;
use crate::error::{Error, Result};
use crate::fem::{build_disk_mesh, FemSpace, PullbackProblem};
use crate::lattice::{sample_shifts, GeneratingVector};
use crate::regularity::{CheckReport, Fault};
use crate::verify::run_all;

#[derive(Debug, Parser)]
#[command(
    name = "domain-uq",
    version,
    about = "Lattice QMC on randomly deformed disks"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// TOML experiment file.
    #[arg(long, global = true, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in experiment instead of a file (desk-e1..4, full-e1..4).
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Output directory; overrides `output` in the config. Default `out`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads. Results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemArg {
    Poisson,
    Heat,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build one generating vector per `m` and write `lattice_m<m>.txt`.
    Cbc,
    /// Poisson convergence study, written to `poisson.csv`.
    RunPoisson,
    /// Heat convergence study, written to `heat.csv`.
    RunHeat,
    /// Dimension truncation study, written to `truncation_<problem>.csv`.
    Truncation {
        #[arg(long, value_enum, default_value = "poisson")]
        problem: ProblemArg,
    },
    /// Run every verification suite; nonzero exit on any failure.
    Verify {
        #[arg(long, hide = true)]
        inject_fault: Option<Fault>,
    },
    /// Print an annotated example config.
    ExampleConfig,
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = if cli.global.verbose { "info" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .try_init();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let threads = cli.global.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(cli))
}

fn dispatch(cli: &Cli) -> Result<i32> {
    if let Command::ExampleConfig = cli.command {
        print!("{}", crate::config::EXAMPLE_TOML);
        return Ok(0);
    }
    let cfg = load_config(&cli.global)?;
    if let Command::Verify { inject_fault } = cli.command {
        return cmd_verify(&cfg, inject_fault);
    }
    let out = output_dir(&cli.global, &cfg)?;
    match cli.command {
        Command::Cbc => cmd_cbc(&cfg, &out),
        Command::RunPoisson => cmd_run(&cfg, &out, ProblemArg::Poisson),
        Command::RunHeat => cmd_run(&cfg, &out, ProblemArg::Heat),
        Command::Truncation { problem } => cmd_truncation(&cfg, &out, problem),
        Command::Verify { .. } | Command::ExampleConfig => unreachable!(),
    }
    .map(|()| 0)
}

/// Config from `--config`, `--preset` or the `desk-e1` preset, with the
/// seed override applied.
pub fn load_config(g: &GlobalArgs) -> Result<ExperimentConfig> {
    let mut cfg = match (&g.config, &g.preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => ExperimentConfig::preset(name)?,
        (None, None) => ExperimentConfig::preset(PRESETS[0])?,
    };
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn output_dir(g: &GlobalArgs, cfg: &ExperimentConfig) -> Result<PathBuf> {
    let dir = g
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn lattice_file(m: u32) -> String {
    format!("lattice_m{m}.txt")
}

fn cmd_cbc(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    if cfg.cbc.vector.is_some() {
        return Err(Error::invalid("cbc.vector is set; nothing to construct"));
    }
    let prov = cfg.provenance()?;
    for (m, gv, err) in constructed_vectors(cfg, cfg.s)? {
        write(
            &out.join(lattice_file(m)),
            &format!("{}# {prov}\n", gv.to_text()),
        )?;
        println!("m={m} n={} wce^2={err:e}", gv.n());
    }
    Ok(())
}

fn constructed_vectors(
    cfg: &ExperimentConfig,
    s: usize,
) -> Result<Vec<(u32, GeneratingVector, f64)>> {
    let w = cfg.weights(s)?;
    let mut ms = cfg.m_list.clone();
    if let Some(n_max) = cfg.cbc.n_max {
        ms.retain(|&m| 1u64 << m <= n_max);
    }
    ms.iter()
        .map(|&m| {
            let rep = cbc_construct(1u64 << m, s, &w)?;
            let err = rep.per_dim_error.last().copied().unwrap_or(0.0);
            Ok((m, rep.z, err))
        })
        .collect()
}

/// The vector for each `m`: `z mod 2^m` of the configured file, or a CBC
/// construction with the configured weights.
pub fn generating_vectors(
    cfg: &ExperimentConfig,
    s: usize,
    ms: &[u32],
) -> Result<Vec<(u32, GeneratingVector)>> {
    match &cfg.cbc.vector {
        Some(path) => {
            let file = GeneratingVector::read(path)?;
            if file.s() < s {
                return Err(Error::Config {
                    path: path.clone(),
                    msg: format!("vector has {} components, need {s}", file.s()),
                });
            }
            ms.iter()
                .map(|&m| {
                    let n = 1u64 << m;
                    if n > file.n() {
                        return Err(Error::Config {
                            path: path.clone(),
                            msg: format!("vector built for n = {}, asked for n = {n}", file.n()),
                        });
                    }
                    let z = file.z()[..s].iter().map(|z| z % n).collect();
                    Ok((m, GeneratingVector::new(n, z)?))
                })
                .collect()
        }
        None => {
            let w = cfg.weights(s)?;
            ms.iter()
                .map(|&m| Ok((m, cbc_construct(1u64 << m, s, &w)?.z)))
                .collect()
        }
    }
}

fn problem(cfg: &ExperimentConfig, s: usize, which: ProblemArg) -> Result<QmcProblem> {
    let space = Arc::new(FemSpace::new(build_disk_mesh(cfg.h)?)?);
    let field = cfg.experiment.field(s)?;
    let pde = PullbackProblem::new(space, pullback_data(&field, cfg.source.f, cfg.source.u0))?;
    let kind = match which {
        ProblemArg::Poisson => ProblemKind::Poisson,
        ProblemArg::Heat => ProblemKind::Heat {
            dt: cfg.dt,
            t_final: cfg.t_final,
        },
    };
    QmcProblem::new(pde, kind)
}

fn describe(cfg: &ExperimentConfig, s: usize) -> Result<String> {
    Ok(format!(
        "{} experiment={:?} s={s} h={} R={}",
        cfg.provenance()?,
        cfg.experiment,
        cfg.h,
        cfg.shifts
    ))
}

/// Selected slope entries, e.g. `slope_L2=-0.9812`.
fn slope_fields(names: [&str; 2], slopes: [f64; 2], norms: &[String]) -> Vec<String> {
    norms
        .iter()
        .filter_map(|n| match n.as_str() {
            "L2" => Some(0),
            "H10" => Some(1),
            _ => None,
        })
        .map(|i| format!("slope_{}={:.4}", names[i], slopes[i]))
        .collect()
}

/// Runs the convergence study and returns the CSV text.
pub fn convergence_csv(cfg: &ExperimentConfig, which: ProblemArg) -> Result<(String, [f64; 2])> {
    let prob = problem(cfg, cfg.s, which)?;
    let vectors = generating_vectors(cfg, cfg.s, &cfg.m_list)?;
    let shifts = sample_shifts(cfg.shifts, cfg.s, cfg.seed)?;
    let rep = convergence_study(&prob, &vectors, &shifts)?;
    let slopes = rep.slopes()?;
    let mut head = describe(cfg, cfg.s)?;
    if let ProblemArg::Heat = which {
        head += &format!(" dt={} T={}", cfg.dt, cfg.t_final);
    }
    let all = ["L2".to_string(), "H10".to_string()];
    for f in slope_fields(rep.norm_names, slopes, &all) {
        head += &format!(" {f}");
    }
    Ok((rep.to_csv(&head, cfg.record_wall_time), slopes))
}

fn cmd_run(cfg: &ExperimentConfig, out: &Path, which: ProblemArg) -> Result<()> {
    let (csv, slopes) = convergence_csv(cfg, which)?;
    let name = match which {
        ProblemArg::Poisson => "poisson.csv",
        ProblemArg::Heat => "heat.csv",
    };
    write(&out.join(name), &csv)?;
    let names = match which {
        ProblemArg::Poisson => ["L2", "H10"],
        ProblemArg::Heat => ["L2L2", "L2H10"],
    };
    println!("{}", slope_fields(names, slopes, &cfg.norms).join(" "));
    Ok(())
}

/// Runs the truncation study and returns the CSV text.
pub fn truncation_csv(cfg: &ExperimentConfig, which: ProblemArg) -> Result<(String, [f64; 2])> {
    let t = &cfg.truncation;
    let prob = problem(cfg, t.s_ref, which)?;
    let gv = generating_vectors(cfg, t.s_ref, &[t.m])?.remove(0).1;
    let shifts = sample_shifts(cfg.shifts, t.s_ref, cfg.seed)?;
    let rep = truncation_study(&prob, &t.levels, &gv, &shifts)?;
    let slopes = rep.slopes()?;
    let mut head = describe(cfg, t.s_ref)?;
    head += &format!(" n={}", gv.n());
    for (name, v) in rep.norm_names.iter().zip(slopes) {
        head += &format!(" slope_{name}={v:.4}");
    }
    Ok((rep.to_csv(&head), slopes))
}

fn cmd_truncation(cfg: &ExperimentConfig, out: &Path, which: ProblemArg) -> Result<()> {
    let (csv, slopes) = truncation_csv(cfg, which)?;
    let name = match which {
        ProblemArg::Poisson => "truncation_poisson.csv",
        ProblemArg::Heat => "truncation_heat.csv",
    };
    write(&out.join(name), &csv)?;
    println!("slopes {:.4} {:.4}", slopes[0], slopes[1]);
    Ok(())
}

/// One summary line per suite plus the failing lines.
pub fn verify_summary(reports: &[CheckReport]) -> String {
    let mut out = String::new();
    for r in reports {
        out += &format!(
            "{:<22} {}/{} passed\n",
            r.name,
            r.pass_count(),
            r.lines.len()
        );
        for line in r.failures() {
            out += &format!(
                "  FAIL {} lhs={:e} rhs={:e}\n",
                line.tuple, line.lhs, line.rhs
            );
        }
    }
    out
}

fn cmd_verify(cfg: &ExperimentConfig, fault: Option<Fault>) -> Result<i32> {
    let reports = run_all(&cfg.constants, fault)?;
    print!("{}", verify_summary(&reports));
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.name.as_str())
        .collect();
    if failed.is_empty() {
        Ok(0)
    } else {
        eprintln!("verification failed: {}", failed.join(", "));
        Ok(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_subcommands() {
        let c = Cli::try_parse_from(["x", "--threads", "2", "run-heat", "--seed", "5"]).unwrap();
        assert!(matches!(c.command, Command::RunHeat));
        assert_eq!(c.global.threads, Some(2));
        assert_eq!(c.global.seed, Some(5));
        let c = Cli::try_parse_from(["x", "verify", "--inject-fault", "tau-off-by-one"]).unwrap();
        assert!(matches!(
            c.command,
            Command::Verify {
                inject_fault: Some(Fault::TauOffByOne)
            }
        ));
        assert!(Cli::try_parse_from(["x", "bogus"]).is_err());
    }

    #[test]
    fn slope_fields_follow_norm_selection() {
        let f = slope_fields(["L2", "H10"], [-1.0, -0.5], &["H10".into()]);
        assert_eq!(f, vec!["slope_H10=-0.5000"]);
    }

    #[test]
    fn vector_file_is_reduced_mod_n() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("z.txt");
        std::fs::write(
            &path,
            GeneratingVector::new(64, vec![1, 19, 27])
                .unwrap()
                .to_text(),
        )
        .unwrap();
        let mut cfg = ExperimentConfig::preset("desk-e1").unwrap();
        cfg.cbc.vector = Some(path);
        let v = generating_vectors(&cfg, 2, &[3, 6]).unwrap();
        assert_eq!(v[0].1.z(), &[1, 3]);
        assert_eq!(v[1].1.z(), &[1, 19]);
        assert!(generating_vectors(&cfg, 4, &[3]).is_err());
        assert!(generating_vectors(&cfg, 2, &[7]).is_err());
    }
}

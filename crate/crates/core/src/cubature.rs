//! Randomly shifted lattice estimates of `E[u]` on the reference mesh, the
//! RMS error over shifts, and convergence and truncation studies.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::deformation::PerturbationField;
use crate::error::{Error, Result};
use crate::fem::{NormKind, PullbackProblem};
use crate::heat::{solve_heat, step_count};
use crate::lattice::{
    generate_points, qmc_mean, qmc_mean_with, shift_and_center, GeneratingVector, ShiftSet,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemKind {
    Poisson,
    Heat { dt: f64, t_final: f64 },
}

/// A PDE whose solution, flattened to one vector, is averaged over the
/// parameter. Heat solutions are stored as `u^0, ..., u^K` back to back.
#[derive(Debug)]
pub struct QmcProblem {
    pub pde: PullbackProblem,
    pub kind: ProblemKind,
}

impl QmcProblem {
    pub fn new(pde: PullbackProblem, kind: ProblemKind) -> Result<Self> {
        if let ProblemKind::Heat { dt, t_final } = kind {
            step_count(dt, t_final)?;
        }
        Ok(QmcProblem { pde, kind })
    }

    pub fn s(&self) -> usize {
        self.pde.s()
    }

    /// Same mesh and data with a different field.
    pub fn with_field(&self, field: PerturbationField) -> Result<Self> {
        let mut data = self.pde.data.clone();
        data.field = field;
        let mut pde = PullbackProblem::new(self.pde.space.clone(), data)?;
        pde.cg = self.pde.cg;
        Ok(QmcProblem {
            pde,
            kind: self.kind,
        })
    }

    pub fn solve(&self, y: &[f64]) -> Result<Vec<f64>> {
        match self.kind {
            ProblemKind::Poisson => self.pde.solve_poisson_interior(y),
            ProblemKind::Heat { dt, t_final } => {
                let series = solve_heat(&self.pde, y, dt, t_final)?;
                Ok(series.steps.concat())
            }
        }
    }

    /// CSV names of the two norms.
    pub fn norm_names(&self) -> [&'static str; 2] {
        match self.kind {
            ProblemKind::Poisson => ["L2", "H10"],
            ProblemKind::Heat { .. } => ["L2L2", "L2H10"],
        }
    }

    /// `[L2, H10]` for Poisson, `[L2(I;L2), L2(I;H10)]` for heat.
    pub fn norms(&self, v: &[f64]) -> Result<[f64; 2]> {
        let space = &self.pde.space;
        match self.kind {
            ProblemKind::Poisson => {
                Ok([space.norm(v, NormKind::L2)?, space.norm(v, NormKind::H10)?])
            }
            ProblemKind::Heat { dt, .. } => {
                let dof = space.dof();
                if !v.len().is_multiple_of(dof) || v.len() < 2 * dof {
                    return Err(Error::DimensionMismatch {
                        expected: dof,
                        got: v.len(),
                    });
                }
                let mut acc = [0.0; 2];
                for step in v.chunks(dof).skip(1) {
                    acc[0] += space.norm(step, NormKind::L2)?.powi(2);
                    acc[1] += space.norm(step, NormKind::H10)?.powi(2);
                }
                Ok(acc.map(|a| (dt * a).sqrt()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub q_ran: Vec<f64>,
    pub q_r: Vec<Vec<f64>>,
}

/// `Q_r` for every shift and their mean `Q_ran`.
pub fn estimate_expectation(
    problem: &QmcProblem,
    gv: &GeneratingVector,
    shifts: &ShiftSet,
) -> Result<Estimate> {
    let s = problem.s();
    if gv.s() != s || shifts.dim() != s {
        return Err(Error::DimensionMismatch {
            expected: s,
            got: if gv.s() != s { gv.s() } else { shifts.dim() },
        });
    }
    if shifts.is_empty() {
        return Err(Error::invalid("need at least one shift"));
    }
    let points = generate_points(gv);
    let q_r: Vec<Vec<f64>> = shifts
        .shifts
        .par_iter()
        .enumerate()
        .map(|(r, shift)| {
            qmc_mean_with(points.len(), |i| {
                let y = shift_and_center(&points[i], shift)?;
                problem.solve(&y).map_err(|e| Error::SolveFailed {
                    shift: r,
                    node: i,
                    y: y.clone(),
                    source: Box::new(e),
                })
            })
        })
        .collect::<Result<_>>()?;
    let q_ran = qmc_mean(&q_r)?;
    Ok(Estimate { q_ran, q_r })
}

/// `sqrt(1/(R(R-1)) sum_r |Q_ran - Q_r|^2)` in each norm of the problem.
pub fn rms_error(problem: &QmcProblem, est: &Estimate) -> Result<[f64; 2]> {
    rms_error_with(&est.q_ran, &est.q_r, |v| problem.norms(v))
}

pub fn rms_error_with<F>(q_ran: &[f64], q_r: &[Vec<f64>], norms: F) -> Result<[f64; 2]>
where
    F: Fn(&[f64]) -> Result<[f64; 2]>,
{
    let r = q_r.len();
    if r < 2 {
        return Err(Error::TooFewShifts(r));
    }
    let mut acc = [0.0; 2];
    for q in q_r {
        if q.len() != q_ran.len() {
            return Err(Error::DimensionMismatch {
                expected: q_ran.len(),
                got: q.len(),
            });
        }
        let d: Vec<f64> = q_ran.iter().zip(q).map(|(a, b)| a - b).collect();
        let n = norms(&d)?;
        acc[0] += n[0] * n[0];
        acc[1] += n[1] * n[1];
    }
    let scale = 1.0 / (r * (r - 1)) as f64;
    Ok(acc.map(|a| (scale * a).sqrt()))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::invalid("slope fit needs at least two points"));
    }
    if x.iter().chain(y).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::invalid("slope fit needs positive finite data"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("slope fit needs distinct abscissae"));
    }
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub m: u32,
    pub n: u64,
    pub shifts: usize,
    pub rms: [f64; 2],
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub norm_names: [&'static str; 2],
    pub rows: Vec<ReportRow>,
}

impl ErrorReport {
    /// Fitted slopes of RMS error against `n`, one per norm.
    pub fn slopes(&self) -> Result<[f64; 2]> {
        let n: Vec<f64> = self.rows.iter().map(|r| r.n as f64).collect();
        let a: Vec<f64> = self.rows.iter().map(|r| r.rms[0]).collect();
        let b: Vec<f64> = self.rows.iter().map(|r| r.rms[1]).collect();
        Ok([fit_loglog_slope(&n, &a)?, fit_loglog_slope(&n, &b)?])
    }

    pub fn csv_header(&self) -> String {
        format!(
            "m,n,R,rms_{},rms_{},seconds",
            self.norm_names[0], self.norm_names[1]
        )
    }

    /// CSV text with a leading `#` metadata line. With `record_time` off
    /// the `seconds` column is written as `0`.
    pub fn to_csv(&self, comment: &str, record_time: bool) -> String {
        let mut out = format!("# {comment}\n{}\n", self.csv_header());
        for r in &self.rows {
            let secs = if record_time {
                format!("{:.3}", r.seconds)
            } else {
                "0".into()
            };
            let _ = writeln!(
                out,
                "{},{},{},{:e},{:e},{}",
                r.m, r.n, r.shifts, r.rms[0], r.rms[1], secs
            );
        }
        out
    }
}

/// One RMS row per generating vector, in the order given (sorted by `m`).
pub fn convergence_study(
    problem: &QmcProblem,
    vectors: &[(u32, GeneratingVector)],
    shifts: &ShiftSet,
) -> Result<ErrorReport> {
    let mut sorted: Vec<&(u32, GeneratingVector)> = vectors.iter().collect();
    sorted.sort_by_key(|(m, _)| *m);
    let mut rows = Vec::with_capacity(sorted.len());
    for (m, gv) in sorted {
        if gv.n() != 1u64 << m {
            return Err(Error::invalid(format!(
                "vector for m = {m} has n = {}",
                gv.n()
            )));
        }
        let start = Instant::now();
        let est = estimate_expectation(problem, gv, shifts)?;
        let rms = rms_error(problem, &est)?;
        let seconds = start.elapsed().as_secs_f64();
        log::info!(
            "m={m} n={} rms={:e},{:e} ({seconds:.2}s)",
            gv.n(),
            rms[0],
            rms[1]
        );
        rows.push(ReportRow {
            m: *m,
            n: gv.n(),
            shifts: shifts.len(),
            rms,
            seconds,
        });
    }
    Ok(ErrorReport {
        norm_names: problem.norm_names(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationRow {
    pub s_trunc: usize,
    pub err: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationReport {
    pub norm_names: [&'static str; 2],
    pub s_ref: usize,
    pub rows: Vec<TruncationRow>,
}

impl TruncationReport {
    /// Fitted slopes against `s'`, over levels with nonzero error.
    pub fn slopes(&self) -> Result<[f64; 2]> {
        let rows: Vec<&TruncationRow> = self
            .rows
            .iter()
            .filter(|r| r.s_trunc < self.s_ref)
            .collect();
        let s: Vec<f64> = rows.iter().map(|r| r.s_trunc as f64).collect();
        let a: Vec<f64> = rows.iter().map(|r| r.err[0]).collect();
        let b: Vec<f64> = rows.iter().map(|r| r.err[1]).collect();
        Ok([fit_loglog_slope(&s, &a)?, fit_loglog_slope(&s, &b)?])
    }

    /// `s_trunc,err_L2,err_H10` for Poisson; `s_trunc,err_L2L2,err_L2H10`
    /// for heat.
    pub fn to_csv(&self, comment: &str) -> String {
        let mut out = format!(
            "# {comment}\ns_trunc,err_{},err_{}\n",
            self.norm_names[0], self.norm_names[1]
        );
        for r in &self.rows {
            let _ = writeln!(out, "{},{:e},{:e}", r.s_trunc, r.err[0], r.err[1]);
        }
        out
    }
}

/// Distance between the estimate with `y_j = 0` for `j > s'` and the full
/// estimate, on the same lattice nodes and shifts.
pub fn truncation_study(
    problem: &QmcProblem,
    levels: &[usize],
    gv: &GeneratingVector,
    shifts: &ShiftSet,
) -> Result<TruncationReport> {
    let s_ref = problem.s();
    let mut levels = levels.to_vec();
    levels.sort_unstable();
    if let Some(&bad) = levels.iter().find(|&&l| l == 0 || l > s_ref) {
        return Err(Error::invalid(format!(
            "truncation level {bad} outside [1, {s_ref}]"
        )));
    }
    let reference = estimate_expectation(problem, gv, shifts)?;
    let mut rows = Vec::with_capacity(levels.len());
    for s_trunc in levels {
        let truncated = problem.with_field(problem.pde.data.field.truncate(s_trunc)?)?;
        let est = estimate_expectation(&truncated, gv, shifts)?;
        let d: Vec<f64> = est
            .q_ran
            .iter()
            .zip(&reference.q_ran)
            .map(|(a, b)| a - b)
            .collect();
        rows.push(TruncationRow {
            s_trunc,
            err: problem.norms(&d)?,
        });
    }
    Ok(TruncationReport {
        norm_names: problem.norm_names(),
        s_ref,
        rows,
    })
}

/// Plain Monte Carlo mean over `samples` uniform parameters and its
/// standard error in each norm.
pub fn monte_carlo_estimate(
    problem: &QmcProblem,
    samples: usize,
    seed: u64,
) -> Result<(Vec<f64>, [f64; 2])> {
    if samples < 2 {
        return Err(Error::invalid("Monte Carlo needs at least two samples"));
    }
    let s = problem.s();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ys: Vec<Vec<f64>> = (0..samples)
        .map(|_| (0..s).map(|_| rng.random::<f64>() - 0.5).collect())
        .collect();
    let sols: Vec<Vec<f64>> = ys
        .par_iter()
        .map(|y| problem.solve(y))
        .collect::<Result<_>>()?;
    let mean = qmc_mean(&sols)?;
    let mut acc = [0.0; 2];
    for u in &sols {
        let d: Vec<f64> = u.iter().zip(&mean).map(|(a, b)| a - b).collect();
        let n = problem.norms(&d)?;
        acc[0] += n[0] * n[0];
        acc[1] += n[1] * n[1];
    }
    let scale = 1.0 / (samples * (samples - 1)) as f64;
    Ok((mean, acc.map(|a| (scale * a).sqrt())))
}

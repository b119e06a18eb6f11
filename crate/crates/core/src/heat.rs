//! Pulled-back heat equation: P1 in space, implicit Euler in time.
//!
//! Each step solves `(M_J + dt K_A) u^{k+1} = M_J u^k + dt F`, where `M_J` is
//! the `det J`-weighted mass matrix, `K_A` the stiffness matrix with
//! coefficient `A` and `F` the load with density `f(V) det J`. The initial
//! value is the `det J`-weighted L2 projection of `u0(V)`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fem::sparse::dot;
use crate::fem::{
    conjugate_gradient, CgOptions, ElementCoefficients, FemSpace, NormKind, PullbackProblem,
};

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesSolution {
    /// Interior coefficients of `u^0, ..., u^K`.
    pub steps: Vec<Vec<f64>>,
    pub dt: f64,
    pub t_final: f64,
}

impl TimeSeriesSolution {
    pub fn num_steps(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }

    pub fn last(&self) -> &[f64] {
        self.steps.last().expect("series holds u^0")
    }
}

/// Number of steps `K = T / dt`, which must be an integer.
pub fn step_count(dt: f64, t_final: f64) -> Result<usize> {
    if !(dt > 0.0 && t_final > 0.0) {
        return Err(Error::invalid(format!(
            "need dt > 0 and T > 0, got dt={dt}, T={t_final}"
        )));
    }
    let k = (t_final / dt).round();
    if (k * dt - t_final).abs() > 1e-9 * t_final || k < 1.0 {
        return Err(Error::invalid(format!(
            "T = {t_final} is not a multiple of dt = {dt}"
        )));
    }
    Ok(k as usize)
}

pub fn solve_heat(
    problem: &PullbackProblem,
    y: &[f64],
    dt: f64,
    t_final: f64,
) -> Result<TimeSeriesSolution> {
    solve_heat_with(problem, y, None, dt, t_final)
}

/// As [`solve_heat`]; `initial` replaces the projected initial value with
/// given interior coefficients.
pub fn solve_heat_with(
    problem: &PullbackProblem,
    y: &[f64],
    initial: Option<&[f64]>,
    dt: f64,
    t_final: f64,
) -> Result<TimeSeriesSolution> {
    let steps = step_count(dt, t_final)?;
    let space = &problem.space;
    let data = problem.element_data(y)?;
    let coeffs: Vec<ElementCoefficients> = data.iter().map(ElementCoefficients::from).collect();
    let mass = space.mass_matrix(&coeffs);
    let stiff = space.stiffness_matrix(&coeffs);
    let load = space.load_vector(&coeffs);
    let system = mass.add_scaled(dt, &stiff)?;
    let cg = problem.cg;

    let u0 = match initial {
        Some(v) => {
            if v.len() != space.dof() {
                return Err(Error::DimensionMismatch {
                    expected: space.dof(),
                    got: v.len(),
                });
            }
            v.to_vec()
        }
        None => {
            let init: Vec<ElementCoefficients> = data
                .iter()
                .zip(&coeffs)
                .map(|(p, c)| ElementCoefficients {
                    g: p.u0_hat * p.det_j,
                    ..*c
                })
                .collect();
            let rhs = space.load_vector(&init);
            let mut u = vec![0.0; space.dof()];
            conjugate_gradient(&mass, &rhs, &mut u, cg)?;
            u
        }
    };

    let mut series = Vec::with_capacity(steps + 1);
    series.push(u0);
    let mut rhs = vec![0.0; space.dof()];
    for _ in 0..steps {
        let prev = series.last().expect("non-empty");
        mass.matvec_into(prev, &mut rhs);
        for (r, f) in rhs.iter_mut().zip(&load) {
            *r += dt * f;
        }
        let mut next = prev.clone();
        conjugate_gradient(&system, &rhs, &mut next, cg)?;
        series.push(next);
    }
    Ok(TimeSeriesSolution {
        steps: series,
        dt,
        t_final,
    })
}

/// Right-endpoint rule `sqrt(dt sum_{k=1..K} |u^k|^2)`.
pub fn spacetime_norm(
    space: &FemSpace,
    series: &TimeSeriesSolution,
    which: NormKind,
) -> Result<f64> {
    if series.num_steps() == 0 {
        return Err(Error::Empty);
    }
    let mut acc = 0.0;
    for u in &series.steps[1..] {
        let n = space.norm(u, which)?;
        acc += n * n;
    }
    Ok((series.dt * acc).sqrt())
}

/// Smallest Dirichlet eigenpair of `K0 v = lambda M0 v` by inverse
/// iteration; `v` is normalized to unit mass norm and positive mean.
pub fn first_eigenpair(space: &FemSpace, tol: f64) -> Result<(f64, Vec<f64>)> {
    let k = space.stiffness0();
    let m = space.mass0();
    let n = space.dof();
    let mut v = vec![1.0; n];
    let mut lambda = f64::INFINITY;
    let opts = CgOptions {
        rtol: 1e-13,
        max_iter: None,
    };
    for _ in 0..500 {
        let rhs = m.matvec(&v);
        let mut w = v.clone();
        conjugate_gradient(k, &rhs, &mut w, opts)?;
        let norm = m.quadratic_form(&w).sqrt();
        for x in w.iter_mut() {
            *x /= norm;
        }
        let next = k.quadratic_form(&w);
        v = w;
        if (lambda - next).abs() <= tol * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    Ok((lambda, v))
}

/// Text export of selected steps as full node vectors:
/// `# step <k> t=<t> nodes <N>` followed by `N` values.
pub fn snapshot_text(
    space: &FemSpace,
    series: &TimeSeriesSolution,
    steps: &[usize],
) -> Result<String> {
    let mut out = String::new();
    for &k in steps {
        let u = series
            .steps
            .get(k)
            .ok_or_else(|| Error::invalid(format!("step {k} beyond K = {}", series.num_steps())))?;
        let full = space.extend(u);
        let _ = writeln!(
            out,
            "# step {k} t={} nodes {}",
            k as f64 * series.dt,
            full.len()
        );
        for v in full {
            let _ = writeln!(out, "{v:e}");
        }
    }
    Ok(out)
}

/// `|u|_M` for a mass matrix.
pub fn energy(mass: &crate::fem::CsrMatrix, u: &[f64]) -> f64 {
    dot(u, &mass.matvec(u)).max(0.0).sqrt()
}

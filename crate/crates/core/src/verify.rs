//! Manufactured-solution, time-stepping and geometry checks, plus the
//! combined suite run by the `verify` command.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cubature::fit_loglog_slope;
use crate::deformation::{
    displacement, jacobian, pullback_data, singular_values, Experiment, ScalarField,
};
use crate::error::Result;
use crate::fem::{build_disk_mesh, FemSpace, NormKind, PullbackProblem};
use crate::heat::{first_eigenpair, solve_heat, solve_heat_with};
use crate::regularity::{
    parabolic_constants, recurrence_suite, stationary_constants, CheckReport, Fault,
    ModelConstants, SweepConfig,
};

/// Exact solution of `-Laplace u = 1` on the unit disk.
pub fn disk_solution(x: [f64; 2]) -> f64 {
    (1.0 - x[0] * x[0] - x[1] * x[1]) / 4.0
}

/// `|(1 - r^2)/4|_{L2}` on the unit disk.
pub fn disk_solution_l2() -> f64 {
    (PI / 48.0).sqrt()
}

/// Errors against a discretization parameter and the fitted log-log slope.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub param: Vec<f64>,
    pub errors: Vec<f64>,
    pub order: f64,
}

fn identity_problem(h: f64, f: ScalarField) -> Result<PullbackProblem> {
    let space = Arc::new(FemSpace::new(build_disk_mesh(h)?)?);
    let field = Experiment::E1.field(1)?;
    PullbackProblem::new(space, pullback_data(&field, f, ScalarField::ZERO))
}

/// L2 error of the P1 solution for `f = 1` on the undeformed disk against
/// `(1 - r^2)/4`, fitted against the longest mesh edge. Also returns the
/// discrete L2 norm on the finest mesh.
pub fn fem_spatial_rate(hs: &[f64]) -> Result<(RateFit, f64)> {
    let mut param = Vec::with_capacity(hs.len());
    let mut errors = Vec::with_capacity(hs.len());
    let mut finest = f64::NAN;
    for &h in hs {
        let p = identity_problem(h, ScalarField::ONE)?;
        let sol = p.solve_poisson(&[0.0])?;
        errors.push(p.space.l2_error_against(&sol.coefficients, disk_solution));
        param.push(p.space.mesh().max_edge());
        finest = p
            .space
            .norm(&p.space.restrict(&sol.coefficients), NormKind::L2)?;
    }
    let order = fit_loglog_slope(&param, &errors)?;
    Ok((
        RateFit {
            param,
            errors,
            order,
        },
        finest,
    ))
}

/// Implicit Euler error at `t_final` for the first discrete eigenmode,
/// against the exact semi-discrete decay `exp(-lambda t) v`.
pub fn temporal_rate(h: f64, dts: &[f64], t_final: f64) -> Result<RateFit> {
    let p = identity_problem(h, ScalarField::ZERO)?;
    let (lambda, v) = first_eigenpair(&p.space, 1e-13)?;
    let decay = (-lambda * t_final).exp();
    let mut errors = Vec::with_capacity(dts.len());
    for &dt in dts {
        let sol = solve_heat_with(&p, &[0.0], Some(&v), dt, t_final)?;
        let diff: Vec<f64> = sol
            .last()
            .iter()
            .zip(&v)
            .map(|(u, e)| u - decay * e)
            .collect();
        errors.push(p.space.norm(&diff, NormKind::L2)?);
    }
    let order = fit_loglog_slope(dts, &errors)?;
    Ok(RateFit {
        param: dts.to_vec(),
        errors,
        order,
    })
}

/// L2 distance between the heat solution at `t_final` and the Poisson
/// solution, `f = 1`, `u0 = 0`, undeformed disk.
pub fn steady_state_gap(h: f64, dt: f64, t_final: f64) -> Result<f64> {
    let p = identity_problem(h, ScalarField::ONE)?;
    let sol = solve_heat(&p, &[0.0], dt, t_final)?;
    let stat = p.solve_poisson_interior(&[0.0])?;
    let diff: Vec<f64> = sol.last().iter().zip(&stat).map(|(a, b)| a - b).collect();
    p.space.norm(&diff, NormKind::L2)
}

fn random_point(rng: &mut impl Rng, rmin: f64) -> [f64; 2] {
    let r = rng.random_range(rmin..1.0);
    let t = rng.random_range(0.0..2.0 * PI);
    [r * t.cos(), r * t.sin()]
}

fn random_y(rng: &mut impl Rng, s: usize) -> Vec<f64> {
    (0..s).map(|_| rng.random_range(-0.5..0.5)).collect()
}

/// Largest relative Frobenius distance between `J` and central differences
/// of `V` (step `1e-5`) over random points with `|x| >= 0.1`.
pub fn jacobian_fd_error(exp: Experiment, s: usize, points: usize, seed: u64) -> Result<f64> {
    let field = exp.field(s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..points {
        let x = random_point(&mut rng, 0.1);
        let y = random_y(&mut rng, s);
        let j = jacobian(&field, x, &y)?;
        let mut err = 0.0;
        for c in 0..2 {
            let (mut xp, mut xm) = (x, x);
            xp[c] += step;
            xm[c] -= step;
            let vp = displacement(&field, xp, &y)?;
            let vm = displacement(&field, xm, &y)?;
            for r in 0..2 {
                err += (j[r][c] - (vp[r] - vm[r]) / (2.0 * step)).powi(2);
            }
        }
        let norm = j.iter().flatten().map(|v| v * v).sum::<f64>();
        worst = worst.max((err / norm).sqrt());
    }
    Ok(worst)
}

/// Largest entry of `|A (J^T J) / det J - I|` over random samples.
pub fn coefficient_identity_error(
    exp: Experiment,
    s: usize,
    points: usize,
    seed: u64,
) -> Result<f64> {
    let data = pullback_data(&exp.field(s)?, ScalarField::ONE, ScalarField::ZERO);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..points {
        let x = random_point(&mut rng, 0.01);
        let y = random_y(&mut rng, s);
        let p = data.at(x, &y)?;
        let j = p.jac;
        let g = [
            [
                j[0][0] * j[0][0] + j[1][0] * j[1][0],
                j[0][0] * j[0][1] + j[1][0] * j[1][1],
            ],
            [
                j[0][1] * j[0][0] + j[1][1] * j[1][0],
                j[0][1] * j[0][1] + j[1][1] * j[1][1],
            ],
        ];
        let a = [[p.a[0], p.a[1]], [p.a[1], p.a[2]]];
        for r in 0..2 {
            for c in 0..2 {
                let v = (a[r][0] * g[0][c] + a[r][1] * g[1][c]) / p.det_j;
                let id = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((v - id).abs());
            }
        }
    }
    Ok(worst)
}

/// Smallest singular value of `J` over random samples.
pub fn min_singular_value(exp: Experiment, s: usize, samples: usize, seed: u64) -> Result<f64> {
    let field = exp.field(s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lo = f64::INFINITY;
    for _ in 0..samples {
        let x = random_point(&mut rng, 1e-3);
        let y = random_y(&mut rng, s);
        lo = lo.min(singular_values(&jacobian(&field, x, &y)?).0);
    }
    Ok(lo)
}

pub const FEM_MESH_WIDTHS: [f64; 4] = [0.4, 0.2, 0.1, 0.05];
pub const FEM_ORDER_RANGE: (f64, f64) = (1.7, 2.3);
pub const FEM_NORM_TOL: f64 = 5e-4;
pub const TIME_STEPS: [f64; 3] = [0.2, 0.1, 0.05];
pub const TIME_ORDER_RANGE: (f64, f64) = (0.7, 1.3);
pub const STEADY_STATE_TOL: f64 = 1e-3;
pub const FD_TOL: f64 = 1e-6;
pub const IDENTITY_TOL: f64 = 1e-12;

fn range_lines(rep: &mut CheckReport, label: &str, value: f64, (lo, hi): (f64, f64)) {
    rep.record(format!("{label} >= {lo}"), lo, value, value >= lo);
    rep.record(format!("{label} <= {hi}"), value, hi, value <= hi);
}

pub fn fem_suite() -> Result<CheckReport> {
    let mut rep = CheckReport::new("fem_manufactured");
    let (fit, norm) = fem_spatial_rate(&FEM_MESH_WIDTHS)?;
    range_lines(&mut rep, "L2 order", fit.order, FEM_ORDER_RANGE);
    let gap = (norm - disk_solution_l2()).abs();
    rep.record(
        "|u_h|_L2 - sqrt(pi/48) at h=0.05",
        gap,
        FEM_NORM_TOL,
        gap < FEM_NORM_TOL,
    );
    Ok(rep)
}

pub fn heat_suite() -> Result<CheckReport> {
    let mut rep = CheckReport::new("heat_manufactured");
    let fit = temporal_rate(0.1, &TIME_STEPS, 1.0)?;
    range_lines(&mut rep, "time order", fit.order, TIME_ORDER_RANGE);
    let gap = steady_state_gap(0.1, 0.1, 5.0)?;
    rep.record(
        "steady state gap at T=5",
        gap,
        STEADY_STATE_TOL,
        gap <= STEADY_STATE_TOL,
    );
    Ok(rep)
}

pub fn geometry_suite() -> Result<CheckReport> {
    let mut rep = CheckReport::new("geometry");
    for (i, exp) in Experiment::ALL.into_iter().enumerate() {
        let seed = 100 + i as u64;
        let fd = jacobian_fd_error(exp, 20, 100, seed)?;
        rep.record(format!("{exp:?} jacobian fd"), fd, FD_TOL, fd <= FD_TOL);
        let id = coefficient_identity_error(exp, 100, 100, seed)?;
        rep.record(
            format!("{exp:?} A identity"),
            id,
            IDENTITY_TOL,
            id <= IDENTITY_TOL,
        );
        let smin = min_singular_value(exp, 100, 1000, seed)?;
        rep.record(format!("{exp:?} sigma_min > 0"), 0.0, smin, smin > 0.0);
    }
    Ok(rep)
}

pub fn constants_suite(mc: &ModelConstants) -> Result<CheckReport> {
    let mut rep = CheckReport::new("regularity_constants");
    let st = stationary_constants(mc)?;
    let pa = parabolic_constants(mc)?;
    for (name, v) in [
        ("stationary C_u1", st.c1),
        ("stationary C_u2", st.c2),
        ("parabolic C_u1", pa.c1),
        ("parabolic C_u2", pa.c2),
    ] {
        rep.record(
            format!("{name} finite, >= 1"),
            1.0,
            v,
            v.is_finite() && v >= 1.0,
        );
    }
    Ok(rep)
}

/// Every suite: recurrence sweeps, manufactured solutions, geometry and the
/// regularity constants of `mc`.
pub fn run_all(mc: &ModelConstants, fault: Option<Fault>) -> Result<Vec<CheckReport>> {
    let mut reports = recurrence_suite(&SweepConfig::default(), fault)?;
    reports.push(fem_suite()?);
    reports.push(heat_suite()?);
    reports.push(geometry_suite()?);
    reports.push(constants_suite(mc)?);
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_norm() {
        assert!((disk_solution_l2() - 0.255832).abs() < 1e-6);
        assert_eq!(disk_solution([1.0, 0.0]), 0.0);
    }

    #[test]
    fn temporal_rate_is_first_order() {
        let fit = temporal_rate(0.2, &TIME_STEPS, 1.0).unwrap();
        assert!(fit.errors.windows(2).all(|w| w[1] < w[0]));
        assert!((0.7..=1.3).contains(&fit.order), "{}", fit.order);
    }

    #[test]
    fn geometry_helpers() {
        assert!(jacobian_fd_error(Experiment::E3, 5, 20, 1).unwrap() <= FD_TOL);
        assert!(coefficient_identity_error(Experiment::E2, 5, 20, 1).unwrap() <= IDENTITY_TOL);
        assert!(min_singular_value(Experiment::E4, 5, 50, 1).unwrap() > 0.0);
    }
}

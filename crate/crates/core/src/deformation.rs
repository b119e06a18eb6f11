//! Random perturbation fields `V(x,y) = x + sum_j xi(y_j) psi_j(x)` of the
//! unit disk, with `psi_j(x) = j^{-theta} sin(3j(atan2(x1,x2) + pi)) x`.
//!
//! The angle is `atan2(x1, x2)`, first argument `x1`. Its gradient is
//! `(x2, -x1) / |x|^2`, which is orthogonal to `x`, so with
//! `S = sum a_j sin(alpha_j)` and `T = sum a_j 3j cos(alpha_j)` the field and
//! its Jacobian reduce to
//!
//! ```text
//! V = (1 + S) x,    J = (1 + S) I + T x grad(phi)^T,    det J = (1 + S)^2.
//! ```

use std::f64::consts::PI;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum XiKind {
    /// `xi(y) = y`
    Linear,
    /// `xi(y) = exp(-1/(y + 1/2))`, extended by `0` at `y = -1/2`
    Exponential,
}

impl XiKind {
    pub fn eval(self, y: f64) -> f64 {
        match self {
            XiKind::Linear => y,
            XiKind::Exponential => {
                let t = y + 0.5;
                if t <= 0.0 {
                    0.0
                } else {
                    (-1.0 / t).exp()
                }
            }
        }
    }

    /// Gevrey exponent of the resulting parametric map.
    pub fn beta(self) -> f64 {
        match self {
            XiKind::Linear => 1.0,
            XiKind::Exponential => 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Experiment {
    E1,
    E2,
    E3,
    E4,
}

impl Experiment {
    pub const ALL: [Experiment; 4] = [
        Experiment::E1,
        Experiment::E2,
        Experiment::E3,
        Experiment::E4,
    ];

    pub fn kind(self) -> XiKind {
        match self {
            Experiment::E1 | Experiment::E3 => XiKind::Linear,
            Experiment::E2 | Experiment::E4 => XiKind::Exponential,
        }
    }

    pub fn theta(self) -> f64 {
        match self {
            Experiment::E1 | Experiment::E2 => 2.1,
            Experiment::E3 | Experiment::E4 => 2.5,
        }
    }

    pub fn field(self, s: usize) -> Result<PerturbationField> {
        PerturbationField::new(self.kind(), self.theta(), s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationField {
    kind: XiKind,
    theta: f64,
    s: usize,
    active: usize,
}

impl PerturbationField {
    pub fn new(kind: XiKind, theta: f64, s: usize) -> Result<Self> {
        if !(theta > 2.0) {
            return Err(Error::invalid(format!("theta must exceed 2, got {theta}")));
        }
        if s == 0 {
            return Err(Error::invalid("field needs s >= 1"));
        }
        Ok(PerturbationField {
            kind,
            theta,
            s,
            active: s,
        })
    }

    pub fn kind(&self) -> XiKind {
        self.kind
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// Number of parameters that vary; `y_j` for `j > active` is read as `0`.
    pub fn active(&self) -> usize {
        self.active
    }

    /// Keeps `s` terms but freezes `y_j = 0` for `j > s_trunc`. For the
    /// exponential variant the frozen terms still contribute `e^{-2} psi_j`.
    pub fn truncate(&self, s_trunc: usize) -> Result<Self> {
        if s_trunc == 0 || s_trunc > self.s {
            return Err(Error::invalid(format!(
                "truncation level {s_trunc} outside [1, {}]",
                self.s
            )));
        }
        Ok(PerturbationField {
            active: s_trunc,
            ..self.clone()
        })
    }

    /// `a_j = xi(y_j) j^{-theta}` for `j = 1..=s`.
    pub fn coefficients(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.s {
            return Err(Error::DimensionMismatch {
                expected: self.s,
                got: y.len(),
            });
        }
        debug_assert!(y.iter().all(|v| (-0.5..=0.5).contains(v)));
        Ok(y.iter()
            .enumerate()
            .map(|(i, &yj)| {
                let yj = if i < self.active { yj } else { 0.0 };
                self.kind.eval(yj) * ((i + 1) as f64).powf(-self.theta)
            })
            .collect())
    }
}

pub fn b_sequence(theta: f64, s: usize) -> Result<Vec<f64>> {
    if !(theta > 2.0) {
        return Err(Error::invalid(format!("theta must exceed 2, got {theta}")));
    }
    Ok((1..=s).map(|j| (j as f64).powf(1.0 - theta)).collect())
}

#[inline]
pub fn angle(x: [f64; 2]) -> f64 {
    x[0].atan2(x[1])
}

/// `(S, T)` at `x` for coefficients `a`.
fn angular_sums(a: &[f64], x: [f64; 2]) -> (f64, f64) {
    let base = angle(x) + PI;
    let mut s = 0.0;
    let mut t = 0.0;
    for (i, &aj) in a.iter().enumerate() {
        if aj == 0.0 {
            continue;
        }
        let k = 3.0 * (i + 1) as f64;
        let (sn, cs) = (k * base).sin_cos();
        s += aj * sn;
        t += aj * k * cs;
    }
    (s, t)
}

fn jacobian_from(s: f64, t: f64, x: [f64; 2]) -> Mat2 {
    let r2 = x[0] * x[0] + x[1] * x[1];
    let g = [x[1] / r2, -x[0] / r2];
    [
        [1.0 + s + t * x[0] * g[0], t * x[0] * g[1]],
        [t * x[1] * g[0], 1.0 + s + t * x[1] * g[1]],
    ]
}

pub fn displacement(field: &PerturbationField, x: [f64; 2], y: &[f64]) -> Result<[f64; 2]> {
    debug_assert!(x[0].hypot(x[1]) <= 1.0 + 1e-12);
    let a = field.coefficients(y)?;
    if x == [0.0, 0.0] {
        return Ok(x);
    }
    let (s, _) = angular_sums(&a, x);
    Ok([(1.0 + s) * x[0], (1.0 + s) * x[1]])
}

pub fn jacobian(field: &PerturbationField, x: [f64; 2], y: &[f64]) -> Result<Mat2> {
    let a = field.coefficients(y)?;
    jacobian_with_coefficients(&a, x)
}

pub fn jacobian_with_coefficients(a: &[f64], x: [f64; 2]) -> Result<Mat2> {
    if x == [0.0, 0.0] {
        return Err(Error::OriginSingularity);
    }
    let (s, t) = angular_sums(a, x);
    Ok(jacobian_from(s, t, x))
}

pub fn det2(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// `A = (J^T J)^{-1} det J` as `[a11, a12, a22]`, using `adj(J^T J) / det J`.
pub fn coefficient_matrix(j: &Mat2, x: [f64; 2]) -> Result<([f64; 3], f64)> {
    let det = det2(j);
    if !(det > 0.0) {
        return Err(Error::DeformationFold {
            x0: x[0],
            x1: x[1],
            det,
        });
    }
    let g11 = j[0][0] * j[0][0] + j[1][0] * j[1][0];
    let g12 = j[0][0] * j[0][1] + j[1][0] * j[1][1];
    let g22 = j[0][1] * j[0][1] + j[1][1] * j[1][1];
    Ok(([g22 / det, -g12 / det, g11 / det], det))
}

/// Singular values `(sigma_min, sigma_max)` of a 2x2 matrix.
pub fn singular_values(m: &Mat2) -> (f64, f64) {
    let f = m.iter().flatten().map(|v| v * v).sum::<f64>();
    let det = det2(m).abs();
    let disc = (f * f - 4.0 * det * det).max(0.0).sqrt();
    let smax = ((f + disc) / 2.0).sqrt();
    let smin = if smax > 0.0 { det / smax } else { 0.0 };
    (smin, smax)
}

/// Scalar function on the hold-all domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ScalarField {
    Constant {
        value: f64,
    },
    /// `amplitude * exp(-|x - center|^2 / width^2)`
    Gaussian {
        amplitude: f64,
        center: [f64; 2],
        width: f64,
    },
}

impl ScalarField {
    pub const ZERO: ScalarField = ScalarField::Constant { value: 0.0 };
    pub const ONE: ScalarField = ScalarField::Constant { value: 1.0 };

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        match *self {
            ScalarField::Constant { value } => value,
            ScalarField::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let d0 = x[0] - center[0];
                let d1 = x[1] - center[1];
                amplitude * (-(d0 * d0 + d1 * d1) / (width * width)).exp()
            }
        }
    }

    pub fn scaled(&self, factor: f64) -> ScalarField {
        match *self {
            ScalarField::Constant { value } => ScalarField::Constant {
                value: value * factor,
            },
            ScalarField::Gaussian {
                amplitude,
                center,
                width,
            } => ScalarField::Gaussian {
                amplitude: amplitude * factor,
                center,
                width,
            },
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            ScalarField::Constant { value } => value == 0.0,
            ScalarField::Gaussian { amplitude, .. } => amplitude == 0.0,
        }
    }
}

/// Reference-domain data of the pulled-back problem at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointData {
    pub jac: Mat2,
    pub det_j: f64,
    /// `[a11, a12, a22]`
    pub a: [f64; 3],
    pub f_ref: f64,
    pub u0_hat: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PullbackData {
    pub field: PerturbationField,
    pub f: ScalarField,
    pub u0: ScalarField,
}

pub fn pullback_data(field: &PerturbationField, f: ScalarField, u0: ScalarField) -> PullbackData {
    PullbackData {
        field: field.clone(),
        f,
        u0,
    }
}

impl PullbackData {
    pub fn at(&self, x: [f64; 2], y: &[f64]) -> Result<PointData> {
        let a = self.field.coefficients(y)?;
        self.at_with_coefficients(&a, x)
    }

    pub fn at_with_coefficients(&self, coeffs: &[f64], x: [f64; 2]) -> Result<PointData> {
        if x == [0.0, 0.0] {
            return Err(Error::OriginSingularity);
        }
        let (s, t) = angular_sums(coeffs, x);
        let jac = jacobian_from(s, t, x);
        let (a, det_j) = coefficient_matrix(&jac, x)?;
        let v = [(1.0 + s) * x[0], (1.0 + s) * x[1]];
        Ok(PointData {
            jac,
            det_j,
            a,
            f_ref: self.f.eval(v) * det_j,
            u0_hat: self.u0.eval(v),
        })
    }
}

/// Precomputed `sin(alpha_j)` and `3j cos(alpha_j)` at a fixed point set, so
/// that evaluating the field for a new parameter costs `O(s)` per point.
#[derive(Debug, Clone)]
pub struct AngularTable {
    points: Vec<[f64; 2]>,
    s: usize,
    /// `sin[p * s + j]`
    sin: Vec<f64>,
    /// `3(j+1) cos(alpha_j)` at `p * s + j`
    dcos: Vec<f64>,
}

impl AngularTable {
    pub fn new(points: &[[f64; 2]], s: usize) -> Result<Self> {
        let mut sin = Vec::with_capacity(points.len() * s);
        let mut dcos = Vec::with_capacity(points.len() * s);
        for &x in points {
            if x == [0.0, 0.0] {
                return Err(Error::OriginSingularity);
            }
            let base = angle(x) + PI;
            for j in 0..s {
                let k = 3.0 * (j + 1) as f64;
                let (sn, cs) = (k * base).sin_cos();
                sin.push(sn);
                dcos.push(k * cs);
            }
        }
        Ok(AngularTable {
            points: points.to_vec(),
            s,
            sin,
            dcos,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    /// Pullback data at every tabulated point for coefficients `a`.
    pub fn evaluate(&self, data: &PullbackData, coeffs: &[f64]) -> Result<Vec<PointData>> {
        if coeffs.len() != self.s {
            return Err(Error::DimensionMismatch {
                expected: self.s,
                got: coeffs.len(),
            });
        }
        self.points
            .iter()
            .enumerate()
            .map(|(p, &x)| {
                let row = p * self.s..(p + 1) * self.s;
                let mut s = 0.0;
                let mut t = 0.0;
                for ((aj, sn), dc) in coeffs
                    .iter()
                    .zip(&self.sin[row.clone()])
                    .zip(&self.dcos[row])
                {
                    s += aj * sn;
                    t += aj * dc;
                }
                let jac = jacobian_from(s, t, x);
                let (a, det_j) = coefficient_matrix(&jac, x)?;
                let v = [(1.0 + s) * x[0], (1.0 + s) * x[1]];
                Ok(PointData {
                    jac,
                    det_j,
                    a,
                    f_ref: data.f.eval(v) * det_j,
                    u0_hat: data.u0.eval(v),
                })
            })
            .collect()
    }
}

/// Extreme singular values of `J` over the sample set. Warns when
/// `sigma_min < 0.05`.
pub fn singular_value_range(
    field: &PerturbationField,
    samples: &[([f64; 2], Vec<f64>)],
) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (x, y) in samples {
        let (smin, smax) = singular_values(&jacobian(field, *x, y)?);
        lo = lo.min(smin);
        hi = hi.max(smax);
    }
    if lo < 0.05 {
        warn!("smallest singular value {lo:.3e} is close to a fold");
    }
    Ok((lo, hi))
}

//! Regularity constants and exhaustive checks of the recurrence bounds that
//! drive the parametric regularity estimates.
//!
//! Every check evaluates a recurrence with equality and compares it against
//! its claimed closed-form bound on all multi-indices up to a given order.
//! Bounds of the form `X_nu <= K(|nu|) b^nu` are checked at `b = 1`. For
//! integer `beta` the arithmetic is exact (`BigUint`/`BigRational`); for
//! other `beta` it is `f64` with relative slack [`FLOAT_SLACK`].

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::ops::{Add, Div, Mul};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FLOAT_SLACK: f64 = 1e-9;

/// Finitely supported multi-index, stored densely over a fixed number of
/// dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(dims: usize) -> Self {
        MultiIndex(vec![0; dims])
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0)
    }

    /// All `m <= self` componentwise, in lexicographic order.
    pub fn below(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex(Vec::with_capacity(self.dims()))];
        for &nj in &self.0 {
            out = out
                .into_iter()
                .flat_map(|m| {
                    (0..=nj).map(move |v| {
                        let mut next = m.0.clone();
                        next.push(v);
                        MultiIndex(next)
                    })
                })
                .collect();
        }
        out
    }

    pub fn sub(&self, m: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&m.0).map(|(a, b)| a - b).collect())
    }

    /// `prod_j binom(nu_j, m_j)`
    pub fn binomial(&self, m: &MultiIndex) -> BigUint {
        self.0
            .iter()
            .zip(&m.0)
            .map(|(&n, &k)| binomial(n, k))
            .product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// All multi-indices in `dims` dimensions with order at most `max_order`,
/// sorted by order and then lexicographically.
pub fn multi_indices(dims: usize, max_order: u32) -> Vec<MultiIndex> {
    let mut all = MultiIndex(vec![max_order; dims]).below();
    all.retain(|m| m.order() <= max_order);
    all.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.cmp(b)));
    all
}

pub fn factorial(n: u32) -> BigUint {
    (1..=n).map(BigUint::from).product()
}

pub fn binomial(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Gevrey exponent as used by the checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beta {
    Int(u32),
    Real(f64),
}

impl Beta {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta >= 1.0) || !beta.is_finite() {
            return Err(Error::invalid(format!("beta must be >= 1, got {beta}")));
        }
        if beta.fract() == 0.0 && beta <= u32::MAX as f64 {
            Ok(Beta::Int(beta as u32))
        } else {
            Ok(Beta::Real(beta))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Beta::Int(b) => b as f64,
            Beta::Real(b) => b,
        }
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Arithmetic used by the recurrences: exact rationals or floats.
pub trait Scalar:
    Clone
    + PartialOrd
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn from_big(v: &BigUint) -> Self;
    fn from_f64(v: f64) -> Result<Self>;
    fn to_f64(&self) -> f64;
    /// `self^beta` for `self >= 0`.
    fn pow_beta(&self, beta: Beta) -> Self;
    /// `self <= rhs`, with [`FLOAT_SLACK`] for floats.
    fn at_most(&self, rhs: &Self) -> bool;

    fn pow_u32(&self, e: u32) -> Self {
        (0..e).fold(Self::one(), |acc, _| acc * self.clone())
    }
}

impl Scalar for BigRational {
    fn from_big(v: &BigUint) -> Self {
        BigRational::from_integer(v.clone().into())
    }

    fn from_f64(v: f64) -> Result<Self> {
        BigRational::from_float(v).ok_or_else(|| Error::invalid(format!("not finite: {v}")))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::INFINITY)
    }

    fn pow_beta(&self, beta: Beta) -> Self {
        match beta {
            Beta::Int(b) => self.pow_u32(b),
            Beta::Real(_) => panic!("exact arithmetic needs integer beta"),
        }
    }

    fn at_most(&self, rhs: &Self) -> bool {
        self <= rhs
    }
}

impl Scalar for f64 {
    fn from_big(v: &BigUint) -> Self {
        v.to_f64().unwrap_or(f64::INFINITY)
    }

    fn from_f64(v: f64) -> Result<Self> {
        Ok(v)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn pow_beta(&self, beta: Beta) -> Self {
        match beta {
            Beta::Int(b) => self.powi(b as i32),
            Beta::Real(b) => self.powf(b),
        }
    }

    fn at_most(&self, rhs: &Self) -> bool {
        *self <= *rhs * (1.0 + FLOAT_SLACK)
    }
}

/// Deliberate defects used to confirm that the checks can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// The factorial in the numerator of the tau recurrence is taken one
    /// too high.
    TauOffByOne,
}

impl std::str::FromStr for Fault {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tau-off-by-one" => Ok(Fault::TauOffByOne),
            _ => Err(Error::invalid(format!("unknown fault '{s}'"))),
        }
    }
}

fn fact<T: Scalar>(n: u32) -> T {
    T::from_big(&factorial(n))
}

/// `tau_0..=tau_kmax`, optionally scaled by `scale` per step (the tilde
/// variant).
fn tau_sequence<T: Scalar>(
    k_max: u32,
    beta: Beta,
    q: u32,
    scale: &T,
    fault: Option<Fault>,
) -> Vec<T> {
    let shift = u32::from(fault == Some(Fault::TauOffByOne));
    let mut tau: Vec<T> = vec![T::one()];
    for k in 1..=k_max {
        let mut acc = T::zero();
        for (l, tl) in tau.iter().enumerate() {
            let j = k - l as u32;
            let ratio = (fact::<T>(j + q + shift) / fact::<T>(j)).pow_beta(beta);
            acc = acc + ratio * tl.clone();
        }
        tau.push(scale.clone() * acc);
    }
    tau
}

/// `tau_{k,beta,q}` for `k = 0..=k_max`.
///
/// Integer `beta` is evaluated exactly and rounded once; a value beyond the
/// `f64` range is an error rather than infinity.
pub fn tau(k_max: u32, beta: f64, q: u32) -> Result<Vec<f64>> {
    let beta = Beta::new(beta)?;
    let values: Vec<f64> = match beta {
        Beta::Int(_) => tau_sequence::<BigRational>(k_max, beta, q, &One::one(), None)
            .iter()
            .map(Scalar::to_f64)
            .collect(),
        Beta::Real(_) => tau_sequence::<f64>(k_max, beta, q, &1.0, None),
    };
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Overflow(format!("tau_{k} with beta={beta}, q={q}")));
    }
    Ok(values)
}

/// One checked inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub tuple: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Decided in the check's own arithmetic, not from the rounded values.
    pub holds: bool,
}

impl CheckLine {
    pub fn ratio(&self) -> f64 {
        if self.rhs == 0.0 {
            if self.lhs == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.lhs / self.rhs
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub lines: Vec<CheckLine>,
}

impl CheckReport {
    pub fn new(name: &str) -> Self {
        CheckReport {
            name: name.to_string(),
            lines: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.holds)
    }

    pub fn pass_count(&self) -> usize {
        self.lines.iter().filter(|l| l.holds).count()
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckLine> {
        self.lines.iter().filter(|l| !l.holds)
    }

    /// Appends a line whose verdict was decided by the caller.
    pub fn record(&mut self, tuple: impl Into<String>, lhs: f64, rhs: f64, holds: bool) {
        self.lines.push(CheckLine {
            tuple: tuple.into(),
            lhs,
            rhs,
            holds,
        });
    }

    fn push<T: Scalar>(&mut self, tuple: String, lhs: &T, rhs: &T) {
        self.lines.push(CheckLine {
            tuple,
            lhs: lhs.to_f64(),
            rhs: rhs.to_f64(),
            holds: lhs.at_most(rhs),
        });
    }

    fn merge(name: &str, parts: Vec<CheckReport>) -> CheckReport {
        CheckReport {
            name: name.to_string(),
            lines: parts.into_iter().flat_map(|p| p.lines).collect(),
        }
    }

    /// One line per checked tuple: `tuple lhs rhs ratio status`.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# {} {}/{} passed\n",
            self.name,
            self.pass_count(),
            self.lines.len()
        );
        for l in &self.lines {
            let _ = writeln!(
                out,
                "{} lhs={:e} rhs={:e} ratio={:.6e} {}",
                l.tuple,
                l.lhs,
                l.rhs,
                l.ratio(),
                if l.holds { "ok" } else { "FAIL" }
            );
        }
        out
    }
}

fn max_one_two_pow<T: Scalar>(k: u32) -> T {
    if k == 0 {
        T::one()
    } else {
        T::from_big(&(BigUint::one() << (k - 1)))
    }
}

fn dispatch<R>(
    beta: f64,
    exact: impl FnOnce(Beta) -> R,
    float: impl FnOnce(Beta) -> R,
) -> Result<R> {
    let b = Beta::new(beta)?;
    Ok(match b {
        Beta::Int(_) => exact(b),
        Beta::Real(_) => float(b),
    })
}

fn tau_bound_impl<T: Scalar>(k_max: u32, beta: Beta, q: u32, fault: Option<Fault>) -> CheckReport {
    let mut rep = CheckReport::new("check_tau_bound");
    let tau = tau_sequence::<T>(k_max, beta, q, &T::one(), fault);
    let qf = fact::<T>(q).pow_beta(beta);
    let two_pow = T::from_big(&(BigUint::one() << (q + 1))).pow_beta(beta);
    for (k, tk) in tau.iter().enumerate() {
        let k = k as u32;
        let rhs = qf.pow_u32(k) * two_pow.pow_u32(k) * max_one_two_pow::<T>(k);
        rep.push(format!("k={k} beta={beta} q={q}"), tk, &rhs);
    }
    rep
}

/// `tau_{k,beta,q} <= (q!)^{beta k} 2^{beta (q+1) k} max{1, 2^{k-1}}` for
/// `k <= k_max`.
pub fn check_tau_bound(k_max: u32, beta: f64, q: u32) -> Result<CheckReport> {
    check_tau_bound_with(k_max, beta, q, None)
}

pub fn check_tau_bound_with(
    k_max: u32,
    beta: f64,
    q: u32,
    fault: Option<Fault>,
) -> Result<CheckReport> {
    if k_max > 30 {
        return Err(Error::invalid(format!("k_max must be <= 30, got {k_max}")));
    }
    dispatch(
        beta,
        |b| tau_bound_impl::<BigRational>(k_max, b, q, fault),
        |b| tau_bound_impl::<f64>(k_max, b, q, fault),
    )
}

/// Evaluates `X_0 = x0`, `X_nu = sum_{0 != m <= nu} binom(nu, m) c(|m|) X_{nu-m}`
/// over `indices` (sorted by order).
fn convolution_recurrence<T: Scalar>(
    indices: &[MultiIndex],
    x0: T,
    coeff: impl Fn(u32) -> T,
    extra: impl Fn(u32) -> T,
) -> HashMap<MultiIndex, T> {
    let mut values: HashMap<MultiIndex, T> = HashMap::with_capacity(indices.len());
    for nu in indices {
        if nu.is_zero() {
            values.insert(nu.clone(), x0.clone());
            continue;
        }
        let mut acc = extra(nu.order());
        for m in nu.below() {
            if m.is_zero() {
                continue;
            }
            let prev = &values[&nu.sub(&m)];
            acc = acc + T::from_big(&nu.binomial(&m)) * coeff(m.order()) * prev.clone();
        }
        values.insert(nu.clone(), acc);
    }
    values
}

fn check_dims(max_order: u32, dims: usize, limit: u32) -> Result<()> {
    if dims == 0 || dims > 3 || max_order > limit {
        return Err(Error::invalid(format!(
            "need 1 <= dims <= 3 and order <= {limit}, got dims={dims} order={max_order}"
        )));
    }
    Ok(())
}

fn upsilon_impl<T: Scalar>(max_order: u32, dims: usize, beta: Beta, q: u32) -> CheckReport {
    let mut rep = CheckReport::new("check_upsilon");
    let indices = multi_indices(dims, max_order);
    let ups = convolution_recurrence::<T>(
        &indices,
        T::one(),
        |m| fact::<T>(m + q).pow_beta(beta),
        |_| T::zero(),
    );
    let tau = tau_sequence::<T>(max_order, beta, q, &T::one(), None);
    for nu in &indices {
        let k = nu.order();
        let rhs = tau[k as usize].clone() * fact::<T>(k).pow_beta(beta);
        rep.push(format!("nu={nu} beta={beta} q={q}"), &ups[nu], &rhs);
    }
    rep
}

/// `Upsilon_nu <= tau_{|nu|,beta,q} (|nu|!)^beta` for all `|nu| <= max_order`.
pub fn check_upsilon(max_order: u32, dims: usize, beta: f64, q: u32) -> Result<CheckReport> {
    check_dims(max_order, dims, 8)?;
    dispatch(
        beta,
        |b| upsilon_impl::<BigRational>(max_order, dims, b, q),
        |b| upsilon_impl::<f64>(max_order, dims, b, q),
    )
}

fn xi_alpha_impl<T: Scalar>(
    max_order: u32,
    dims: usize,
    beta: Beta,
    c: T,
    sigma_min: T,
) -> CheckReport {
    let mut rep = CheckReport::new("check_xi_alpha");
    let indices = multi_indices(dims, max_order);
    let alpha = convolution_recurrence::<T>(
        &indices,
        T::one(),
        |m| fact::<T>(m).pow_beta(beta),
        |_| T::zero(),
    );
    let inv_sigma = T::one() / sigma_min;
    let xi_coeff = c.clone() * inv_sigma.clone();
    let xi = convolution_recurrence::<T>(
        &indices,
        inv_sigma.clone(),
        |m| xi_coeff.clone() * fact::<T>(m).pow_beta(beta),
        |_| T::zero(),
    );
    let (cf, sf) = (c.to_f64(), 1.0 / inv_sigma.to_f64());
    for nu in &indices {
        let k = nu.order();
        let shape = fact::<T>(k).pow_beta(beta) * max_one_two_pow::<T>(k);
        rep.push(format!("alpha nu={nu} beta={beta}"), &alpha[nu], &shape);
        let rhs = inv_sigma.pow_u32(k + 1) * c.pow_u32(k) * shape;
        rep.push(
            format!("xi nu={nu} beta={beta} C={cf} sigma_min={sf}"),
            &xi[nu],
            &rhs,
        );
    }
    rep
}

/// `alpha_nu <= max{1,2^{|nu|-1}} (|nu|!)^beta` and
/// `xi_nu <= sigma_min^{-|nu|-1} C^{|nu|} (|nu|!)^beta max{1,2^{|nu|-1}}`.
pub fn check_xi_alpha(
    max_order: u32,
    dims: usize,
    beta: f64,
    c: f64,
    sigma_min: f64,
) -> Result<CheckReport> {
    check_dims(max_order, dims, 8)?;
    if !(c >= 1.0) || !(sigma_min > 0.0 && sigma_min <= 1.0) {
        return Err(Error::invalid("need C >= 1 and 0 < sigma_min <= 1"));
    }
    let exact = |b| -> Result<CheckReport> {
        Ok(xi_alpha_impl::<BigRational>(
            max_order,
            dims,
            b,
            Scalar::from_f64(c)?,
            Scalar::from_f64(sigma_min)?,
        ))
    };
    dispatch(beta, exact, |b| {
        Ok(xi_alpha_impl::<f64>(max_order, dims, b, c, sigma_min))
    })?
}

fn superlemma_impl<T: Scalar>(
    max_order: u32,
    dims: usize,
    beta: Beta,
    k: u32,
    c: T,
    c0: T,
) -> CheckReport {
    let mut rep = CheckReport::new("check_superlemma");
    let indices = multi_indices(dims, max_order);
    let lambda = convolution_recurrence::<T>(
        &indices,
        c0.clone(),
        |m| c.clone() * fact::<T>(m + k).pow_beta(beta) * c.pow_u32(m),
        |n| c.clone() * fact::<T>(n + k).pow_beta(beta) * c.pow_u32(n),
    );
    let tilde = tau_sequence::<T>(max_order, beta, k, &c, None);
    let tau = tau_sequence::<T>(max_order, beta, k, &T::one(), None);
    let (cf, c0f) = (c.to_f64(), c0.to_f64());
    let label = format!("beta={beta} k={k} C={cf} C0={c0f}");
    for nu in &indices {
        let n = nu.order();
        let rhs = (T::one() + c0.clone())
            * c.pow_u32(n)
            * fact::<T>(n).pow_beta(beta)
            * tilde[n as usize].clone();
        rep.push(format!("Lambda nu={nu} {label}"), &lambda[nu], &rhs);
    }
    for n in 0..=max_order {
        let rhs = c.pow_u32(n) * tau[n as usize].clone();
        rep.push(format!("tau~ n={n} {label}"), &tilde[n as usize], &rhs);
    }
    rep
}

/// `Lambda_nu <= (1+C0) C^{|nu|} (|nu|!)^beta tau~_{|nu|,beta,k}` for the
/// recurrence taken with equality, plus `tau~_n <= C^n tau_n`.
pub fn check_superlemma(
    max_order: u32,
    dims: usize,
    beta: f64,
    k: u32,
    c: f64,
    c0: f64,
) -> Result<CheckReport> {
    check_dims(max_order, dims, 8)?;
    if !(c >= 1.0) || !(c0 >= 0.0) {
        return Err(Error::invalid("need C >= 1 and C0 >= 0"));
    }
    let exact = |b| -> Result<CheckReport> {
        Ok(superlemma_impl::<BigRational>(
            max_order,
            dims,
            b,
            k,
            Scalar::from_f64(c)?,
            Scalar::from_f64(c0)?,
        ))
    };
    dispatch(beta, exact, |b| {
        Ok(superlemma_impl::<f64>(max_order, dims, b, k, c, c0))
    })?
}

/// Gosper sum `d^2 sum_{l=0}^{v} (l+d^2-1)!/l! = (v+d^2)!/v!` for `v <= 20`,
/// `d <= 3`, and the Vandermonde convolution
/// `sum_{m <= nu, |m| = l} binom(nu, m) = binom(|nu|, l)` for `|nu| <= 8`,
/// up to three dimensions. Integer arithmetic; lines hold on equality.
pub fn check_identities() -> CheckReport {
    let mut rep = CheckReport::new("check_identities");
    let mut push_eq = |tuple: String, lhs: BigUint, rhs: BigUint| {
        rep.lines.push(CheckLine {
            tuple,
            lhs: lhs.to_f64().unwrap_or(f64::INFINITY),
            rhs: rhs.to_f64().unwrap_or(f64::INFINITY),
            holds: lhs == rhs,
        });
    };
    for d in 1..=3u32 {
        let d2 = d * d;
        for v in 0..=20u32 {
            let sum: BigUint = (0..=v).map(|l| factorial(l + d2 - 1) / factorial(l)).sum();
            push_eq(
                format!("gosper d={d} v={v}"),
                sum * BigUint::from(d2),
                factorial(v + d2) / factorial(v),
            );
        }
    }
    for dims in 1..=3 {
        for nu in multi_indices(dims, 8) {
            let n = nu.order();
            let below = nu.below();
            for l in 0..=n {
                let lhs: BigUint = below
                    .iter()
                    .filter(|m| m.order() == l)
                    .map(|m| nu.binomial(m))
                    .sum();
                push_eq(format!("vandermonde nu={nu} l={l}"), lhs, binomial(n, l));
            }
        }
    }
    rep
}

/// Sweep parameters for [`recurrence_suite`].
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub betas: Vec<f64>,
    pub qs: Vec<u32>,
    pub ks: Vec<u32>,
    pub tau_k_max: u32,
    pub max_order: u32,
    pub max_dims: usize,
    pub cs: Vec<f64>,
    pub c0s: Vec<f64>,
    pub sigma_mins: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            betas: vec![1.0, 1.5, 2.0],
            qs: vec![0, 1, 4],
            ks: vec![0, 1, 4],
            tau_k_max: 20,
            max_order: 6,
            max_dims: 3,
            cs: vec![1.0, 2.0],
            c0s: vec![0.0, 1.0],
            sigma_mins: vec![1.0, 0.5],
        }
    }
}

/// Runs every recurrence check over the sweep, one merged report per check.
pub fn recurrence_suite(sweep: &SweepConfig, fault: Option<Fault>) -> Result<Vec<CheckReport>> {
    let dims: Vec<usize> = (1..=sweep.max_dims).collect();

    let tau_jobs: Vec<(f64, u32)> = sweep
        .betas
        .iter()
        .flat_map(|&b| sweep.qs.iter().map(move |&q| (b, q)))
        .collect();
    let tau = tau_jobs
        .par_iter()
        .map(|&(b, q)| check_tau_bound_with(sweep.tau_k_max, b, q, fault))
        .collect::<Result<Vec<_>>>()?;

    let ups = tau_jobs
        .iter()
        .flat_map(|&(b, q)| dims.iter().map(move |&d| (b, q, d)))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&(b, q, d)| check_upsilon(sweep.max_order, d, b, q))
        .collect::<Result<Vec<_>>>()?;

    let mut xi_jobs = Vec::new();
    for &b in &sweep.betas {
        for &d in &dims {
            for &c in &sweep.cs {
                for &sg in &sweep.sigma_mins {
                    xi_jobs.push((b, d, c, sg));
                }
            }
        }
    }
    let xi = xi_jobs
        .par_iter()
        .map(|&(b, d, c, sg)| check_xi_alpha(sweep.max_order, d, b, c, sg))
        .collect::<Result<Vec<_>>>()?;

    let mut sl_jobs = Vec::new();
    for &b in &sweep.betas {
        for &d in &dims {
            for &k in &sweep.ks {
                for &c in &sweep.cs {
                    for &c0 in &sweep.c0s {
                        sl_jobs.push((b, d, k, c, c0));
                    }
                }
            }
        }
    }
    let sl = sl_jobs
        .par_iter()
        .map(|&(b, d, k, c, c0)| check_superlemma(sweep.max_order, d, b, k, c, c0))
        .collect::<Result<Vec<_>>>()?;

    Ok(vec![
        CheckReport::merge("check_tau_bound", tau),
        CheckReport::merge("check_upsilon", ups),
        CheckReport::merge("check_xi_alpha", xi),
        CheckReport::merge("check_superlemma", sl),
        check_identities(),
    ])
}

/// Constants entering the regularity bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConstants {
    /// Field regularity constant `C`.
    pub c: f64,
    pub beta: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Spatial dimension.
    pub d: u32,
    pub c_f: f64,
    pub rho: Vec<f64>,
    pub c_u0: f64,
    /// Poincare constant of the reference domain.
    pub c_dref: f64,
    /// `|D_ref|`
    pub area: f64,
    pub m: f64,
    pub c_delta_max: f64,
    /// The elliptic-regularity constant `C_Delta`.
    pub c_delta: f64,
    pub t_final: f64,
}

impl Default for ModelConstants {
    fn default() -> Self {
        ModelConstants {
            c: 1.0,
            beta: 1.0,
            sigma_min: 1.0,
            sigma_max: 1.0,
            d: 2,
            c_f: 1.0,
            rho: vec![0.0, 0.0],
            c_u0: 1.0,
            c_dref: 1.0,
            area: std::f64::consts::PI,
            m: 1.0,
            c_delta_max: 1.0,
            c_delta: 1.0,
            t_final: 1.0,
        }
    }
}

/// Intermediate constants for the derivative bounds of `det J`, `A` and
/// `f_ref`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub c_det_j: f64,
    pub c_a1: f64,
    pub c_a2: f64,
    pub c_fref1: f64,
    pub c_fref2: f64,
    /// `||rho||_{l^{1/beta}}`
    pub rho_norm: f64,
}

/// `C_{u,1}`, `C_{u,2}` in `||d^nu u|| <= C_{u,1} C_{u,2}^{|nu|} (|nu|!)^beta b^nu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionConstants {
    pub c1: f64,
    pub c2: f64,
}

impl ModelConstants {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.c_f,
            self.c_dref,
            self.area,
            self.m,
            self.c_delta_max,
            self.c_delta,
            self.t_final,
        ];
        if !(self.sigma_min > 0.0 && self.sigma_min <= 1.0 && self.sigma_max >= 1.0) {
            return Err(Error::invalid("need 0 < sigma_min <= 1 <= sigma_max"));
        }
        if !(self.c >= 1.0) || !(self.beta >= 1.0) {
            return Err(Error::invalid("need C >= 1 and beta >= 1"));
        }
        if self.d == 0 || self.rho.len() != self.d as usize {
            return Err(Error::invalid("rho needs one entry per spatial dimension"));
        }
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite()))
            || !(self.c_u0 >= 0.0)
            || self.rho.iter().any(|r| !(*r >= 0.0))
        {
            return Err(Error::invalid(
                "model constants must be positive and finite",
            ));
        }
        Ok(())
    }

    pub fn derived(&self) -> Result<DerivedConstants> {
        self.validate()?;
        let (b, c, smin) = (self.beta, self.c, self.sigma_min);
        let smax_d = self.sigma_max.powi(self.d as i32);
        let c_det_j = 2f64.powf(b) * c / smin;
        Ok(DerivedConstants {
            c_det_j,
            c_a1: smax_d / (smin * smin),
            c_a2: c_det_j / (smin * smin) * c * c * 4f64.powf(b),
            c_fref1: smax_d * 2f64.powf(-b) * self.c_f,
            c_fref2: 2f64.powf(b) * c * c / smin * 2f64.powf(b),
            rho_norm: self
                .rho
                .iter()
                .map(|r| r.powf(1.0 / b))
                .sum::<f64>()
                .powf(b),
        })
    }

    fn factorial_pow(&self, n: u32) -> f64 {
        factorial(n)
            .to_f64()
            .unwrap_or(f64::INFINITY)
            .powf(self.beta)
    }
}

/// Constants of the stationary regularity bound.
pub fn stationary_constants(mc: &ModelConstants) -> Result<SolutionConstants> {
    let k = mc.derived()?;
    let d2 = mc.d * mc.d;
    let smin_d = mc.sigma_min.powi(mc.d as i32);
    let d2f = mc.factorial_pow(d2);
    let source = mc.area.sqrt() * mc.c_dref * k.c_fref1;
    let c0 = k.c_a1 / (smin_d * d2f);
    let c1 = 2.0 * k.c_a2;
    let ct0 = source / (smin_d * d2f);
    let ct1 = k.c_fref2 * k.rho_norm.max(1.0);
    let cmax = c0.max(c1).max(ct0).max(ct1);
    Ok(SolutionConstants {
        c1: 1.0 + mc.sigma_max.powi(2) / smin_d * source,
        c2: cmax * cmax * d2f * 2f64.powf(mc.beta * (d2 + 1) as f64 + 1.0),
    })
}

/// `C~_1`, `C~_2` of the parabolic recurrence.
pub fn parabolic_auxiliary(mc: &ModelConstants) -> Result<(f64, f64)> {
    let k = mc.derived()?;
    let dd = mc.d as i32;
    let smax_d = mc.sigma_max.powi(dd);
    let sum = mc.c_delta_max * smax_d * smax_d
        + mc.c_dref * smax_d
        + smax_d * mc.c_dref * mc.c_dref * k.c_a1
        + k.c_a1
        + mc.m * mc.m * smax_d
        + mc.c_delta_max * smax_d * k.c_fref1
        + mc.c_dref * k.c_fref1
        + mc.m * smax_d;
    let floor = (mc.sigma_min.powi(2 * dd) / (mc.c_dref * mc.c_dref * mc.c_delta * mc.c_delta))
        .min(mc.sigma_min.powi(dd) / mc.sigma_max.powi(2));
    let ct1 = sum / floor;
    let ct2 = 4.0 * k.c_det_j + 4.0 * k.c_a2 + 2.0 * k.c_fref2 * k.rho_norm.max(1.0);
    Ok((ct1, ct2))
}

/// Constants of the parabolic regularity bound.
pub fn parabolic_constants(mc: &ModelConstants) -> Result<SolutionConstants> {
    let (ct1, ct2) = parabolic_auxiliary(mc)?;
    let d = mc.d as f64;
    let d2 = mc.d * mc.d;
    let ctilde = (ct1 + mc.c_u0).max(ct2 + 2f64.powf(mc.beta) * d.powf(mc.beta) * mc.c * ct2);
    let c0 = ct1 * (1.0 + mc.c_u0);
    Ok(SolutionConstants {
        c1: 1.0 + c0,
        c2: ctilde * ctilde * mc.factorial_pow(d2 + 1) * 2f64.powf(mc.beta * (d2 + 2) as f64 + 1.0),
    })
}

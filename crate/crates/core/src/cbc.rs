//! POD weights and component-by-component construction of rank-1 lattice
//! generating vectors for the weighted unanchored Sobolev space of order one.
//!
//! Weights have the form `gamma_u = G_{|u|} * prod_{j in u} w_j`. The order
//! part is stored through the ratios `r_l = G_l / G_{l-1}` so that sums over
//! subsets can be accumulated order by order without forming `G_l` itself,
//! which overflows for large `l` when `G_l` grows like a power of `l!`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::GeneratingVector;

/// Riemann zeta for real `x > 1`.
///
/// Euler-Maclaurin: partial sum up to `N - 1`, integral tail and six
/// Bernoulli corrections. For `N = 64` the remainder is below `1e-16`
/// relative for every `x > 1`.
pub fn zeta(x: f64) -> Result<f64> {
    if !(x > 1.0) {
        return Err(Error::invalid(format!("zeta needs x > 1, got {x}")));
    }
    const N: usize = 64;
    // B_{2j} / (2j)!
    const B: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ];
    let mut head = 0.0;
    for k in (1..N).rev() {
        head += (k as f64).powf(-x);
    }
    let nf = N as f64;
    let mut tail = nf.powf(1.0 - x) / (x - 1.0) + 0.5 * nf.powf(-x);
    // rising factorial x (x+1) ... (x+2j-2) times N^{-x-2j+1}
    let mut rising = x;
    let mut power = nf.powf(-x - 1.0);
    for (j, bj) in B.iter().enumerate() {
        tail += bj * rising * power;
        let a = x + (2 * j + 1) as f64;
        rising *= a * (a + 1.0);
        power /= nf * nf;
    }
    Ok(head + tail)
}

/// Summability exponent to weight exponent `lambda`.
pub fn select_lambda(p: f64, beta: f64, eps: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("p must lie in (0,1), got {p}")));
    }
    if !(beta >= 1.0) {
        return Err(Error::invalid(format!("beta must be >= 1, got {beta}")));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::invalid(format!(
            "eps must lie in (0,1/2), got {eps}"
        )));
    }
    let inv_beta = 1.0 / beta;
    if p > 2.0 / 3.0 && p < inv_beta {
        Ok(p / (2.0 - p))
    } else if p <= (2.0 / 3.0f64).min(inv_beta) && p != inv_beta {
        Ok(1.0 / (2.0 - 2.0 * eps))
    } else {
        Err(Error::UncoveredRegime { p, beta })
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.5 && lambda <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "lambda must lie in (1/2,1], got {lambda}"
        )))
    }
}

/// `2 zeta(2 lambda) / (2 pi^2)^lambda`.
pub fn kernel_constant(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(2.0 * zeta(2.0 * lambda)? / (2.0 * PI * PI).powf(lambda))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PodWeights {
    /// `r_l = G_l / G_{l-1}` for `l = 1..=s`.
    order_ratio: Vec<f64>,
    /// `w_j`, one per dimension.
    product: Vec<f64>,
    /// Per-dimension factors `d_j` before exponentiation, when built by
    /// [`pod_weights`].
    pub dim_factors: Option<Vec<f64>>,
    pub beta: Option<f64>,
    pub lambda: Option<f64>,
}

impl PodWeights {
    /// General POD weights from order ratios and product factors.
    pub fn from_parts(order_ratio: Vec<f64>, product: Vec<f64>) -> Result<Self> {
        if order_ratio.len() != product.len() {
            return Err(Error::DimensionMismatch {
                expected: product.len(),
                got: order_ratio.len(),
            });
        }
        if product.is_empty() {
            return Err(Error::invalid("weights need s >= 1"));
        }
        if order_ratio
            .iter()
            .chain(&product)
            .any(|v| !v.is_finite() || *v < 0.0)
        {
            return Err(Error::invalid("weights must be finite and nonnegative"));
        }
        Ok(PodWeights {
            order_ratio,
            product,
            dim_factors: None,
            beta: None,
            lambda: None,
        })
    }

    /// Product weights `gamma_u = prod_{j in u} w_j`.
    pub fn product(w: Vec<f64>) -> Result<Self> {
        Self::from_parts(vec![1.0; w.len()], w)
    }

    pub fn s(&self) -> usize {
        self.product.len()
    }

    pub fn order_ratio(&self) -> &[f64] {
        &self.order_ratio
    }

    pub fn product_factors(&self) -> &[f64] {
        &self.product
    }

    /// First `s` dimensions.
    pub fn truncated(&self, s: usize) -> Result<Self> {
        if s == 0 || s > self.s() {
            return Err(Error::invalid(format!("cannot truncate weights to {s}")));
        }
        Ok(PodWeights {
            order_ratio: self.order_ratio[..s].to_vec(),
            product: self.product[..s].to_vec(),
            dim_factors: self.dim_factors.as_ref().map(|d| d[..s].to_vec()),
            beta: self.beta,
            lambda: self.lambda,
        })
    }

    /// `G_l`; may overflow to infinity for large `l`.
    pub fn order_weight(&self, l: usize) -> f64 {
        self.order_ratio[..l].iter().product()
    }

    /// `gamma_u` for a set of 0-based coordinate indices.
    pub fn gamma(&self, u: &[usize]) -> f64 {
        let prod: f64 = u.iter().map(|&j| self.product[j]).product();
        self.order_weight(u.len()) * prod
    }
}

/// POD weights `gamma_u = ((|u|!)^beta prod_{j in u} d_j)^{2/(1+lambda)}` with
/// `d_j = C b_j / sqrt(2 zeta(2 lambda) / (2 pi^2)^lambda)`.
pub fn pod_weights(b: &[f64], c: f64, beta: f64, lambda: f64, s: usize) -> Result<PodWeights> {
    check_lambda(lambda)?;
    if s == 0 || b.len() < s {
        return Err(Error::invalid(format!(
            "need s >= 1 and at least s = {s} sequence terms, got {}",
            b.len()
        )));
    }
    if !(c > 0.0) || !(beta >= 1.0) {
        return Err(Error::invalid("need C > 0 and beta >= 1"));
    }
    if b[..s].iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::invalid("b_j must be finite and nonnegative"));
    }
    let scale = kernel_constant(lambda)?.sqrt();
    let expo = 2.0 / (1.0 + lambda);
    let d: Vec<f64> = b[..s].iter().map(|&bj| c * bj / scale).collect();
    let product = d.iter().map(|dj| dj.powf(expo)).collect();
    let order_ratio = (1..=s).map(|l| (l as f64).powf(beta * expo)).collect();
    let mut w = PodWeights::from_parts(order_ratio, product)?;
    w.dim_factors = Some(d);
    w.beta = Some(beta);
    w.lambda = Some(lambda);
    Ok(w)
}

/// `B_2(x) = x^2 - x + 1/6` at `x = j/n`, evaluated through `min(j, n-j)` so
/// that the table is exactly symmetric.
fn bernoulli_table(n: u64) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let x = j.min(n - j) as f64 / n as f64;
            x * x - x + 1.0 / 6.0
        })
        .collect()
}

/// Folds one dimension into the order-recursion state `q[0..=d]`:
/// `q_l += w r_l B q_{l-1}`, highest order first.
#[inline]
fn fold_dimension(q: &mut [f64], d: usize, w: f64, ratios: &[f64], bx: f64) {
    for l in (1..=d).rev() {
        q[l] += w * ratios[l - 1] * bx * q[l - 1];
    }
}

/// Squared shift-averaged worst-case error
/// `sum_{u != {}} gamma_u (1/n) sum_k prod_{j in u} B_2({k z_j / n})`.
pub fn shift_avg_wce(z: &GeneratingVector, w: &PodWeights) -> Result<f64> {
    let s = z.s();
    if w.s() != s {
        return Err(Error::DimensionMismatch {
            expected: s,
            got: w.s(),
        });
    }
    let n = z.n();
    let table = bernoulli_table(n);
    let mut q = vec![0.0; s + 1];
    let mut total = 0.0;
    for k in 0..n {
        q.fill(0.0);
        q[0] = 1.0;
        for (d, &zj) in z.z().iter().enumerate() {
            let idx = ((k as u128 * zj as u128) % n as u128) as usize;
            fold_dimension(&mut q, d + 1, w.product[d], &w.order_ratio, table[idx]);
        }
        total += q[1..].iter().sum::<f64>();
    }
    Ok(total / n as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WceReport {
    pub z: GeneratingVector,
    /// Squared worst-case error of each prefix `z_1..z_d`.
    pub per_dim_error: Vec<f64>,
}

/// Candidates whose error is within this relative distance of the minimum
/// count as tied; the smallest such candidate is chosen. During CBC the
/// tolerance is widened by the rounding bound `4 n eps` of the candidate sum.
pub const TIE_RTOL: f64 = 1e-12;

/// Index of the smallest candidate attaining the minimum up to [`TIE_RTOL`].
pub fn argmin_with_ties(values: &[f64]) -> usize {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    argmin_within(values, TIE_RTOL * min.abs())
}

/// Index of the first value within `tol` of the minimum.
pub fn argmin_within(values: &[f64], tol: f64) -> usize {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    values
        .iter()
        .position(|&v| v <= min + tol)
        .expect("non-empty candidate list")
}

/// Greedy CBC over odd candidates in `[1, n)`.
pub fn cbc_construct(n: u64, s: usize, w: &PodWeights) -> Result<WceReport> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    if s == 0 || w.s() < s {
        return Err(Error::DimensionMismatch {
            expected: s,
            got: w.s(),
        });
    }
    let nn = n as usize;
    let table = bernoulli_table(n);
    let candidates: Vec<u64> = (1..n).step_by(2).collect();
    // q[k * (s+1) + l]: order-l partial sums at node k
    let stride = s + 1;
    let mut q = vec![0.0; nn * stride];
    for k in 0..nn {
        q[k * stride] = 1.0;
    }
    let mut z = Vec::with_capacity(s);
    let mut per_dim_error = Vec::with_capacity(s);
    let mut a = vec![0.0; nn];
    for d in 1..=s {
        let wd = w.product[d - 1];
        let mut base = 0.0;
        for k in 0..nn {
            let row = &q[k * stride..k * stride + d];
            base += row[1..].iter().sum::<f64>();
            a[k] = row
                .iter()
                .zip(&w.order_ratio[..d])
                .map(|(ql, rl)| ql * rl)
                .sum();
        }
        let base = base / n as f64;
        let terms: Vec<f64> = candidates
            .par_iter()
            .map(|&c| {
                let mut acc = 0.0;
                let mut idx = 0u64;
                for ak in &a {
                    acc += table[idx as usize] * ak;
                    idx = (idx + c) % n;
                }
                wd * acc / n as f64
            })
            .collect();
        let magnitude = wd * a.iter().map(|x| x.abs()).sum::<f64>() / (6.0 * n as f64);
        let min_term = terms.iter().copied().fold(f64::INFINITY, f64::min);
        let tol = TIE_RTOL * (base + min_term).abs() + 4.0 * n as f64 * f64::EPSILON * magnitude;
        let best = argmin_within(&terms, tol);
        let zd = candidates[best];
        z.push(zd);
        per_dim_error.push(base + terms[best]);
        let mut idx = 0u64;
        for k in 0..nn {
            let row = &mut q[k * stride..(k + 1) * stride];
            fold_dimension(row, d, wd, &w.order_ratio, table[idx as usize]);
            idx = (idx + zd) % n;
        }
    }
    Ok(WceReport {
        z: GeneratingVector::new(n, z)?,
        per_dim_error,
    })
}

/// `sum_{u != {}} gamma_u^lambda c^{|u|}` by order grouping.
pub fn weighted_subset_sum(w: &PodWeights, lambda: f64, c: f64) -> f64 {
    let s = w.s();
    let ratios: Vec<f64> = w.order_ratio.iter().map(|r| r.powf(lambda)).collect();
    let mut q = vec![0.0; s + 1];
    q[0] = 1.0;
    for d in 1..=s {
        fold_dimension(&mut q, d, w.product[d - 1].powf(lambda), &ratios, c);
    }
    q[1..].iter().sum()
}

/// Error bound for the randomly shifted rule with `R` shifts,
/// `R^{-1/2} (2/n sum_{u != {}} gamma_u^lambda c_lambda^{|u|})^{1/(2 lambda)} norm`.
pub fn theoretical_bound(
    n: u64,
    w: &PodWeights,
    lambda: f64,
    shifts: usize,
    norm_bound: f64,
) -> Result<f64> {
    check_lambda(lambda)?;
    if n == 0 || shifts == 0 {
        return Err(Error::invalid("need n >= 1 and R >= 1"));
    }
    let c = kernel_constant(lambda)?;
    let sum = weighted_subset_sum(w, lambda, c);
    Ok((2.0 / n as f64 * sum).powf(1.0 / (2.0 * lambda)) / (shifts as f64).sqrt() * norm_bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b2(x: f64) -> f64 {
        x * x - x + 1.0 / 6.0
    }

    /// Direct `2^s` enumeration of the squared worst-case error.
    fn wce_by_subsets(z: &[u64], n: u64, w: &PodWeights) -> f64 {
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

    fn subset_sum_by_enumeration(w: &PodWeights, lambda: f64, c: f64) -> f64 {
        let s = w.s();
        (1u32..(1 << s))
            .map(|mask| {
                let u: Vec<usize> = (0..s).filter(|j| mask >> j & 1 == 1).collect();
                w.gamma(&u).powf(lambda) * c.powi(u.len() as i32)
            })
            .sum()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn zeta_known_values() {
        assert!(close(zeta(2.0).unwrap(), PI * PI / 6.0, 1e-15));
        assert!(close(zeta(4.0).unwrap(), PI.powi(4) / 90.0, 1e-15));
        assert!(close(zeta(1.5).unwrap(), 2.612_375_348_685_488, 1e-14));
        assert!(close(zeta(1.1).unwrap(), 10.584_448_464_950_81, 1e-14));
        assert!(zeta(1.0).is_err());
    }

    #[test]
    fn lambda_case_split() {
        assert!(close(
            select_lambda(0.8, 1.0, 0.1).unwrap(),
            2.0 / 3.0,
            1e-15
        ));
        assert!(close(
            select_lambda(0.5, 1.0, 0.1).unwrap(),
            1.0 / 1.8,
            1e-15
        ));
        assert!(select_lambda(1.2, 1.0, 0.1).is_err());
        assert!(matches!(
            select_lambda(0.5, 2.0, 0.1),
            Err(Error::UncoveredRegime { .. })
        ));
        assert!(matches!(
            select_lambda(0.8, 2.0, 0.1),
            Err(Error::UncoveredRegime { .. })
        ));
        assert!(select_lambda(0.4, 2.0, 0.1).is_ok());
    }

    #[test]
    fn single_dimension_weight() {
        let w = pod_weights(&[1.0], 1.0, 1.0, 1.0, 1).unwrap();
        assert!(close(w.gamma(&[0]), 6f64.sqrt(), 1e-14));
        assert_eq!(w.gamma(&[]), 1.0);
    }

    #[test]
    fn closed_form_matches_factored_form() {
        let b: Vec<f64> = (1..=2).map(|j| (j as f64).powf(-1.1)).collect();
        let lambda = 1.0;
        let w = pod_weights(&b, 1.0, 1.0, lambda, 2).unwrap();
        let scale = (2.0 * zeta(2.0).unwrap() / (2.0 * PI * PI)).sqrt();
        let closed = |u: &[usize]| {
            let fact: f64 = (1..=u.len()).map(|k| k as f64).product();
            let prod: f64 = u.iter().map(|&j| b[j] / scale).product();
            (fact * prod).powf(2.0 / (1.0 + lambda))
        };
        let ratio_closed = closed(&[0, 1]) / (closed(&[0]) * closed(&[1]));
        let ratio = w.gamma(&[0, 1]) / (w.gamma(&[0]) * w.gamma(&[1]));
        assert!(close(ratio, ratio_closed, 1e-12));
        assert!(close(ratio, 2.0, 1e-12));
    }

    #[test]
    fn lambda_out_of_range() {
        assert!(pod_weights(&[1.0], 1.0, 1.0, 0.5, 1).is_err());
        assert!(
            theoretical_bound(8, &PodWeights::product(vec![1.0]).unwrap(), 1.2, 1, 1.0).is_err()
        );
    }

    #[test]
    fn one_point_rule() {
        let z = GeneratingVector::new(1, vec![0]).unwrap();
        let w = PodWeights::product(vec![1.0]).unwrap();
        assert!(close(shift_avg_wce(&z, &w).unwrap(), 1.0 / 6.0, 1e-15));
    }

    #[test]
    fn zero_weights_give_zero() {
        let z = GeneratingVector::new(16, vec![1, 5, 7]).unwrap();
        let w = PodWeights::product(vec![0.0; 3]).unwrap();
        assert_eq!(shift_avg_wce(&z, &w).unwrap(), 0.0);
        assert_eq!(theoretical_bound(16, &w, 1.0, 4, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn recursion_matches_enumeration_product_weights() {
        let w = PodWeights::product(vec![0.5, 0.5]).unwrap();
        let z = GeneratingVector::new(8, vec![1, 3]).unwrap();
        let fast = shift_avg_wce(&z, &w).unwrap();
        assert!(close(fast, wce_by_subsets(z.z(), 8, &w), 1e-13));
    }

    #[test]
    fn recursion_matches_enumeration_pod_weights() {
        let b: Vec<f64> = (1..=12).map(|j| (j as f64).powf(-1.5)).collect();
        let w = pod_weights(&b, 1.0, 2.0, 0.7, 12).unwrap();
        let z = GeneratingVector::new(32, vec![1, 13, 7, 11, 3, 9, 5, 15, 27, 21, 19, 25]).unwrap();
        let fast = shift_avg_wce(&z, &w).unwrap();
        assert!(close(fast, wce_by_subsets(z.z(), 32, &w), 1e-12));
        let c = kernel_constant(0.7).unwrap();
        assert!(close(
            weighted_subset_sum(&w, 0.7, c),
            subset_sum_by_enumeration(&w, 0.7, c),
            1e-12
        ));
    }

    #[test]
    fn first_component_is_one() {
        let w = PodWeights::product(vec![1.0]).unwrap();
        let errs: Vec<f64> = (1..8)
            .step_by(2)
            .map(|c| shift_avg_wce(&GeneratingVector::new(8, vec![c]).unwrap(), &w).unwrap())
            .collect();
        for e in &errs {
            assert!(close(*e, errs[0], 1e-14));
        }
        let rep = cbc_construct(8, 1, &w).unwrap();
        assert_eq!(rep.z.z(), &[1]);
    }

    #[test]
    fn cbc_matches_exhaustive_pairs() {
        let w = PodWeights::product(vec![1.0, 1.0]).unwrap();
        let rep = cbc_construct(8, 2, &w).unwrap();
        let mut best: Option<((u64, u64), f64)> = None;
        for z1 in (1..8).step_by(2) {
            for z2 in (1..8).step_by(2) {
                let e = wce_by_subsets(&[z1, z2], 8, &w);
                match best {
                    Some((_, b)) if e >= b - TIE_RTOL * b => {}
                    _ => best = Some(((z1, z2), e)),
                }
            }
        }
        let ((z1, z2), e) = best.unwrap();
        assert_eq!(rep.z.z(), &[z1, z2]);
        assert!(close(rep.per_dim_error[1], e, 1e-13));
    }

    #[test]
    fn cbc_prefix_property() {
        let b: Vec<f64> = (1..=3).map(|j| (j as f64).powf(-1.1)).collect();
        let w = pod_weights(&b, 1.0, 1.0, 0.7, 3).unwrap();
        let three = cbc_construct(64, 3, &w).unwrap();
        let two = cbc_construct(64, 2, &w).unwrap();
        assert_eq!(three.z.truncated(2).unwrap(), two.z);
        assert_eq!(&three.per_dim_error[..2], &two.per_dim_error[..]);
    }

    #[test]
    fn cbc_rejects_bad_n() {
        let w = PodWeights::product(vec![1.0]).unwrap();
        assert!(matches!(
            cbc_construct(12, 1, &w),
            Err(Error::NotPowerOfTwo(12))
        ));
        assert!(cbc_construct(1, 1, &w).is_err());
    }

    #[test]
    fn bound_scaling_in_n() {
        let b: Vec<f64> = (1..=5).map(|j| (j as f64).powf(-1.5)).collect();
        for lambda in [1.0, 0.75] {
            let w = pod_weights(&b, 1.0, 1.0, lambda, 5).unwrap();
            let b1 = theoretical_bound(64, &w, lambda, 8, 1.0).unwrap();
            let b2 = theoretical_bound(128, &w, lambda, 8, 1.0).unwrap();
            assert!(close(b2 / b1, 2f64.powf(-1.0 / (2.0 * lambda)), 1e-13));
        }
    }

    #[test]
    fn bound_order_grouping_matches_enumeration() {
        let w = PodWeights::from_parts(vec![1.0, 2.5], vec![0.3, 0.7]).unwrap();
        let c = kernel_constant(0.8).unwrap();
        let direct = (2.0 / 16.0 * subset_sum_by_enumeration(&w, 0.8, c)).powf(1.0 / 1.6);
        assert!(close(
            theoretical_bound(16, &w, 0.8, 1, 1.0).unwrap(),
            direct,
            1e-13
        ));
    }

    proptest! {
        #[test]
        fn reflection_symmetry(
            m in 2u32..7,
            raw in proptest::collection::vec(0u64..1 << 20, 1..5),
            flip in proptest::collection::vec(any::<bool>(), 5),
            wts in proptest::collection::vec(0.01f64..2.0, 5),
        ) {
            let n = 1u64 << m;
            let z: Vec<u64> = raw.iter().map(|r| (2 * r + 1) % n).collect();
            let zf: Vec<u64> = z.iter().zip(&flip).map(|(&zj, &f)| if f { n - zj } else { zj }).collect();
            let w = PodWeights::from_parts(vec![1.5; z.len()], wts[..z.len()].to_vec()).unwrap();
            let a = shift_avg_wce(&GeneratingVector::new(n, z).unwrap(), &w).unwrap();
            let b = shift_avg_wce(&GeneratingVector::new(n, zf).unwrap(), &w).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn bound_monotone(
            wts in proptest::collection::vec(0.0f64..2.0, 1..6),
            bump in 0usize..6,
            m in 1u32..12,
        ) {
            let s = wts.len();
            let w = PodWeights::product(wts.clone()).unwrap();
            let mut wb = wts.clone();
            wb[bump % s] += 0.5;
            let w_up = PodWeights::product(wb).unwrap();
            let n = 1u64 << m;
            let base = theoretical_bound(n, &w, 0.8, 4, 1.0).unwrap();
            prop_assert!(theoretical_bound(2 * n, &w, 0.8, 4, 1.0).unwrap() <= base);
            prop_assert!(theoretical_bound(n, &w_up, 0.8, 4, 1.0).unwrap() >= base);
        }
    }
}

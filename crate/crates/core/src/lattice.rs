//! Rank-1 lattice point sets, random shifts and the equal-weight QMC average.
//!
//! Nodes are indexed `i = 1..=n`, so `t_n` is the origin. A randomly shifted
//! node is `frac(t_i + shift) - 1/2`, which lands in `[-1/2, 1/2)^s`.
//!
//! Shifts are drawn from a ChaCha8 stream seeded with a `u64`; the stream is
//! platform independent, so a seed pins the shift set everywhere.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Generating vector `z` of an `n`-point rank-1 lattice rule in `s` dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratingVector {
    n: u64,
    z: Vec<u64>,
}

impl GeneratingVector {
    pub fn new(n: u64, z: Vec<u64>) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        if z.is_empty() {
            return Err(Error::invalid("generating vector needs s >= 1"));
        }
        if let Some(&bad) = z.iter().find(|&&zj| zj >= n) {
            return Err(Error::invalid(format!("component {bad} outside [0, {n})")));
        }
        Ok(GeneratingVector { n, z })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn s(&self) -> usize {
        self.z.len()
    }

    pub fn z(&self) -> &[u64] {
        &self.z
    }

    /// Keeps the first `s` components.
    pub fn truncated(&self, s: usize) -> Result<Self> {
        if s == 0 || s > self.s() {
            return Err(Error::invalid(format!(
                "cannot truncate a {}-dimensional vector to {s}",
                self.s()
            )));
        }
        GeneratingVector::new(self.n, self.z[..s].to_vec())
    }

    /// Serializes to the generating-vector text format: `# n=<n> s=<s>` and
    /// then one component per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("# n={} s={}\n", self.n, self.s());
        for zj in &self.z {
            let _ = writeln!(out, "{zj}");
        }
        out
    }

    /// Parses the text format. Comment lines (starting with `#`) are accepted
    /// only after the `s` component lines.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::VectorFormat("empty file".into()))?;
        let (n, s) = parse_header(header)?;
        let mut z = Vec::with_capacity(s);
        for k in 0..s {
            let line = lines.next().ok_or_else(|| {
                Error::VectorFormat(format!("expected {s} components, found {k}"))
            })?;
            let zj: u64 = line.trim().parse().map_err(|_| {
                Error::VectorFormat(format!("line {}: not a decimal integer: {line:?}", k + 2))
            })?;
            z.push(zj);
        }
        for line in lines {
            if !(line.starts_with('#') || line.trim().is_empty()) {
                return Err(Error::VectorFormat(format!(
                    "unexpected trailing line {line:?}"
                )));
            }
        }
        GeneratingVector::new(n, z).map_err(|e| Error::VectorFormat(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

fn parse_header(header: &str) -> Result<(u64, usize)> {
    let bad = || Error::VectorFormat(format!("malformed header {header:?}"));
    let rest = header.strip_prefix("# ").ok_or_else(bad)?;
    let mut parts = rest.split(' ');
    let n = parts
        .next()
        .and_then(|p| p.strip_prefix("n="))
        .and_then(|v| v.parse::<u64>().ok())
        .ok_or_else(bad)?;
    let s = parts
        .next()
        .and_then(|p| p.strip_prefix("s="))
        .and_then(|v| v.parse::<usize>().ok())
        .ok_or_else(bad)?;
    if parts.next().is_some() || s == 0 {
        return Err(bad());
    }
    Ok((n, s))
}

/// Lattice points `t_i = frac(i z / n)` for `i = 1..=n`, one row per point.
///
/// The products are formed in integer arithmetic and divided by a power of
/// two, so every coordinate is exact.
pub fn generate_points(gv: &GeneratingVector) -> Vec<Vec<f64>> {
    let n = gv.n;
    (1..=n)
        .map(|i| {
            gv.z.iter()
                .map(|&zj| ((i as u128 * zj as u128) % n as u128) as f64 / n as f64)
                .collect()
        })
        .collect()
}

#[inline]
pub fn frac(x: f64) -> f64 {
    x - x.floor()
}

/// Shifted and centered node `frac(t + shift) - 1/2`.
pub fn shift_and_center(point: &[f64], shift: &[f64]) -> Result<Vec<f64>> {
    if point.len() != shift.len() {
        return Err(Error::DimensionMismatch {
            expected: point.len(),
            got: shift.len(),
        });
    }
    Ok(point
        .iter()
        .zip(shift)
        .map(|(&t, &d)| frac(t + d) - 0.5)
        .collect())
}

pub fn shifted_centered_points(points: &[Vec<f64>], shift: &[f64]) -> Result<Vec<Vec<f64>>> {
    points.iter().map(|t| shift_and_center(t, shift)).collect()
}

/// `R` independent uniform shifts in `[0,1)^s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftSet {
    pub seed: u64,
    pub shifts: Vec<Vec<f64>>,
}

impl ShiftSet {
    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.shifts.first().map_or(0, Vec::len)
    }

    /// Keeps the first `s` coordinates of every shift.
    pub fn truncated(&self, s: usize) -> ShiftSet {
        ShiftSet {
            seed: self.seed,
            shifts: self.shifts.iter().map(|d| d[..s].to_vec()).collect(),
        }
    }
}

pub fn sample_shifts(count: usize, s: usize, seed: u64) -> Result<ShiftSet> {
    if count == 0 {
        return Err(Error::invalid("need at least one shift"));
    }
    if s == 0 {
        return Err(Error::invalid("shift dimension must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shifts = (0..count)
        .map(|_| (0..s).map(|_| rng.random::<f64>()).collect())
        .collect();
    Ok(ShiftSet { seed, shifts })
}

/// Elements that can be averaged by [`qmc_mean`].
pub trait MeanValue: Clone + Send {
    fn add_assign(&mut self, other: &Self);
    fn scale(&mut self, factor: f64);
}

impl MeanValue for f64 {
    fn add_assign(&mut self, other: &Self) {
        *self += *other;
    }

    fn scale(&mut self, factor: f64) {
        *self *= factor;
    }
}

impl MeanValue for Vec<f64> {
    fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.len(), other.len(), "vector lengths differ");
        for (a, b) in self.iter_mut().zip(other) {
            *a += *b;
        }
    }

    fn scale(&mut self, factor: f64) {
        for a in self.iter_mut() {
            *a *= factor;
        }
    }
}

/// Items are summed sequentially inside blocks of this many consecutive
/// indices; block sums are then combined by a balanced pairwise tree.
pub const REDUCTION_BLOCK: usize = 64;

fn tree_sum<T: MeanValue>(mut parts: Vec<T>) -> T {
    debug_assert!(!parts.is_empty());
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                a.add_assign(&b);
            }
            next.push(a);
        }
        parts = next;
    }
    parts.pop().expect("non-empty")
}

/// Equal-weight average with a fixed reduction shape: sequential sums over
/// blocks of [`REDUCTION_BLOCK`] items, then a pairwise tree over blocks.
pub fn qmc_mean<T: MeanValue + Sync>(values: &[T]) -> Result<T> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    let blocks: Vec<T> = values
        .chunks(REDUCTION_BLOCK)
        .map(|chunk| {
            let mut acc = chunk[0].clone();
            for v in &chunk[1..] {
                acc.add_assign(v);
            }
            acc
        })
        .collect();
    let mut total = tree_sum(blocks);
    total.scale(1.0 / values.len() as f64);
    Ok(total)
}

/// Same reduction as [`qmc_mean`] over `f(0), …, f(count-1)`, evaluated in
/// parallel without materializing every item. Bitwise equal to collecting the
/// values and calling [`qmc_mean`], for any thread count.
pub fn qmc_mean_with<T, F>(count: usize, f: F) -> Result<T>
where
    T: MeanValue,
    F: Fn(usize) -> Result<T> + Sync,
{
    if count == 0 {
        return Err(Error::Empty);
    }
    let nblocks = count.div_ceil(REDUCTION_BLOCK);
    let blocks: Vec<T> = (0..nblocks)
        .into_par_iter()
        .map(|b| {
            let start = b * REDUCTION_BLOCK;
            let end = (start + REDUCTION_BLOCK).min(count);
            let mut acc = f(start)?;
            for i in start + 1..end {
                acc.add_assign(&f(i)?);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = tree_sum(blocks);
    total.scale(1.0 / count as f64);
    Ok(total)
}

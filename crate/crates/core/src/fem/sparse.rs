//! Compressed sparse row matrices and a Jacobi-preconditioned conjugate
//! gradient solver.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix with the given sparsity pattern. Column indices of each
    /// row must be sorted and unique.
    pub fn from_pattern(n: usize, row_ptr: Vec<usize>, col_idx: Vec<usize>) -> Self {
        debug_assert_eq!(row_ptr.len(), n + 1);
        debug_assert!((0..n).all(|i| col_idx[row_ptr[i]..row_ptr[i + 1]]
            .windows(2)
            .all(|w| w[0] < w[1])));
        let nnz = col_idx.len();
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values: vec![0.0; nnz],
        }
    }

    /// Pattern from per-row column sets.
    pub fn from_rows(rows: &[Vec<usize>]) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for r in rows {
            let mut cols = r.clone();
            cols.sort_unstable();
            cols.dedup();
            col_idx.extend(cols);
            row_ptr.push(col_idx.len());
        }
        Self::from_pattern(rows.len(), row_ptr, col_idx)
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::from_pattern(n, (0..=n).collect(), (0..n).collect());
        m.values.fill(1.0);
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Position of entry `(i, j)` in the value array.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let row = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        row.binary_search(&j).ok().map(|k| self.row_ptr[i] + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    /// `x^T A x`
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.matvec(x))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                rows[j].push((i, v));
            }
        }
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        for r in rows {
            for (j, v) in r {
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            n: self.n,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// `self + alpha * other` for matrices sharing a pattern.
    pub fn add_scaled(&self, alpha: f64, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.row_ptr != other.row_ptr || self.col_idx != other.col_idx {
            return Err(Error::invalid("sparsity patterns differ"));
        }
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    /// Stop when `|b - A x| <= rtol |b|`.
    pub rtol: f64,
    /// Iteration cap; `None` means `10 * n`.
    pub max_iter: Option<usize>,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions {
            rtol: 1e-10,
            max_iter: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    pub residual: f64,
}

/// Jacobi-preconditioned CG for symmetric positive definite `a`, starting
/// from the contents of `x`.
pub fn conjugate_gradient(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    opts: CgOptions,
) -> Result<CgStats> {
    let n = a.n();
    if b.len() != n || x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len().min(x.len()),
        });
    }
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        x.fill(0.0);
        return Ok(CgStats {
            iterations: 0,
            residual: 0.0,
        });
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let max_iter = opts.max_iter.unwrap_or(10 * n.max(1));

    let mut r = a.matvec(x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut rel = dot(&r, &r).sqrt() / bnorm;
    if rel <= opts.rtol {
        return Ok(CgStats {
            iterations: 0,
            residual: rel,
        });
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NoConvergence {
                iterations: it,
                residual: rel,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = dot(&r, &r).sqrt() / bnorm;
        if rel <= opts.rtol {
            return Ok(CgStats {
                iterations: it,
                residual: rel,
            });
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let rows: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                let mut r = vec![i];
                if i > 0 {
                    r.push(i - 1);
                }
                if i + 1 < n {
                    r.push(i + 1);
                }
                r
            })
            .collect();
        let mut m = CsrMatrix::from_rows(&rows);
        for i in 0..n {
            let k = m.position(i, i).unwrap();
            m.values_mut()[k] = 2.0;
            if i > 0 {
                let k = m.position(i, i - 1).unwrap();
                m.values_mut()[k] = -1.0;
            }
            if i + 1 < n {
                let k = m.position(i, i + 1).unwrap();
                m.values_mut()[k] = -1.0;
            }
        }
        m
    }

    #[test]
    fn identity_solve() {
        let a = CsrMatrix::identity(3);
        let b = [1.0, 2.0, 3.0];
        let mut x = vec![0.0; 3];
        conjugate_gradient(&a, &b, &mut x, CgOptions::default()).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn tridiagonal_solve_matches_closed_form() {
        // -u'' = 1 with u(0)=u(1)=0 on a uniform grid is solved exactly by
        // the discrete Laplacian: u_i = h^2 i (n+1-i) / 2
        let n = 50;
        let a = laplacian_1d(n);
        let b = vec![1.0; n];
        let mut x = vec![0.0; n];
        let stats = conjugate_gradient(&a, &b, &mut x, CgOptions::default()).unwrap();
        assert!(stats.residual <= 1e-10);
        for (i, xi) in x.iter().enumerate() {
            let k = (i + 1) as f64;
            let exact = k * (n as f64 + 1.0 - k) / 2.0;
            assert!((xi - exact).abs() <= 1e-8 * exact);
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = laplacian_1d(4);
        let mut x = vec![1.0; 4];
        conjugate_gradient(&a, &[0.0; 4], &mut x, CgOptions::default()).unwrap();
        assert_eq!(x, vec![0.0; 4]);
    }

    #[test]
    fn iteration_cap_reports_residual() {
        let a = laplacian_1d(100);
        let mut x = vec![0.0; 100];
        let opts = CgOptions {
            rtol: 1e-14,
            max_iter: Some(3),
        };
        match conjugate_gradient(&a, &vec![1.0; 100], &mut x, opts) {
            Err(Error::NoConvergence {
                iterations,
                residual,
            }) => {
                assert_eq!(iterations, 3);
                assert!(residual > 0.0);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn transpose_and_dense() {
        let a = laplacian_1d(5);
        assert_eq!(a.transpose(), a);
        let d = a.to_dense();
        assert_eq!(d[2][1], -1.0);
        assert_eq!(d[0][4], 0.0);
        let sum = a.add_scaled(2.0, &a).unwrap();
        assert_eq!(sum.get(3, 3), 6.0);
    }
}

//! Small dense linear algebra: numeric rank by full pivoting, dense solves,
//! exact rank over rationals, and symbolic inversion.

use crate::error::{Error, Result};
use crate::symbolic::{is_zero, Expr, Number, Sampler};

pub type Matrix<T> = Vec<Vec<T>>;

/// Result of Gaussian elimination with full pivoting.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotRank {
    pub rank: usize,
    /// Pivot rows and columns, in elimination order.
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

/// Numeric rank with full pivoting. A pivot is accepted while its magnitude
/// exceeds `rel_threshold * max|entry|` of the input.
pub fn rank_full_pivot(m: &Matrix<f64>, rel_threshold: f64) -> PivotRank {
    let nrows = m.len();
    let ncols = m.first().map_or(0, Vec::len);
    let scale = m.iter().flatten().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    let mut out = PivotRank { rank: 0, rows: Vec::new(), cols: Vec::new() };
    if scale == 0.0 || !scale.is_finite() {
        return out;
    }
    let cutoff = rel_threshold * scale;
    let mut a = m.clone();
    let mut row_idx: Vec<usize> = (0..nrows).collect();
    let mut col_idx: Vec<usize> = (0..ncols).collect();
    for k in 0..nrows.min(ncols) {
        let mut best = (k, k, 0.0_f64);
        for i in k..nrows {
            for j in k..ncols {
                if a[i][j].abs() > best.2 {
                    best = (i, j, a[i][j].abs());
                }
            }
        }
        if best.2 <= cutoff {
            break;
        }
        a.swap(k, best.0);
        row_idx.swap(k, best.0);
        for row in a.iter_mut() {
            row.swap(k, best.1);
        }
        col_idx.swap(k, best.1);
        for i in k + 1..nrows {
            let factor = a[i][k] / a[k][k];
            if factor != 0.0 {
                for j in k..ncols {
                    a[i][j] -= factor * a[k][j];
                }
            }
        }
        out.rank += 1;
        out.rows.push(row_idx[k]);
        out.cols.push(col_idx[k]);
    }
    out
}

/// Solves `a x = b` by partial pivoting; `None` when singular.
pub fn solve(mut a: Matrix<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k] == 0.0 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let factor = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= factor * a[k][j];
            }
            b[i] -= factor * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Some(x)
}

/// Exact rank of a constant matrix; `None` when an entry is not a constant
/// or when rational arithmetic leaves the exact range.
pub fn exact_rank(m: &Matrix<Expr>) -> Option<usize> {
    let mut a: Matrix<Number> = m
        .iter()
        .map(|row| row.iter().map(|e| e.simplify().as_number()).collect::<Option<Vec<_>>>())
        .collect::<Option<Vec<_>>>()?;
    if a.iter().flatten().any(|n| matches!(n, Number::Real(_))) {
        return None;
    }
    let nrows = a.len();
    let ncols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..nrows).find(|&i| !a[i][col].is_zero()) else { continue };
        a.swap(rank, p);
        let inv = a[rank][col].recip()?;
        for i in rank + 1..nrows {
            let factor = a[i][col].mul(inv);
            for j in col..ncols {
                a[i][j] = a[i][j].add(factor.mul(a[rank][j]).neg());
            }
        }
        rank += 1;
    }
    if a.iter().flatten().any(|n| matches!(n, Number::Real(_))) {
        return None;
    }
    Some(rank)
}

pub fn evaluate_matrix(m: &Matrix<crate::symbolic::Compiled>, values: &[f64]) -> Result<Matrix<f64>> {
    m.iter()
        .map(|row| row.iter().map(|c| c.eval(values).map_err(Error::from)).collect())
        .collect()
}

/// Determinant by cofactor expansion.
pub fn determinant(m: &Matrix<Expr>) -> Expr {
    match m.len() {
        0 => Expr::one(),
        1 => m[0][0].clone(),
        2 => &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0],
        n => Expr::sum((0..n).filter(|&j| !m[0][j].is_zero_constant()).map(|j| {
            let sign = if j % 2 == 0 { Expr::one() } else { Expr::int(-1) };
            Expr::product([sign, m[0][j].clone(), determinant(&minor(m, 0, j))])
        })),
    }
}

fn minor(m: &Matrix<Expr>, row: usize, col: usize) -> Matrix<Expr> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, e)| e.clone()).collect())
        .collect()
}

/// Largest block inverted by cofactors; larger blocks use Gauss-Jordan.
pub const COFACTOR_LIMIT: usize = 4;
/// Largest block inverted symbolically at all.
pub const SYMBOLIC_LIMIT: usize = 8;

/// Exact inverse of a square expression matrix.
///
/// Cofactors up to [`COFACTOR_LIMIT`], Gauss-Jordan elimination with
/// sampled-nonzero pivots up to [`SYMBOLIC_LIMIT`]. Fails with
/// `SingularMinor` when the determinant (or every candidate pivot) vanishes.
pub fn symbolic_inverse(m: &Matrix<Expr>, sampler: &Sampler) -> Result<Matrix<Expr>> {
    let n = m.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n > SYMBOLIC_LIMIT {
        return Err(Error::UnsupportedLagrangian(format!(
            "symbolic inversion is limited to {SYMBOLIC_LIMIT}x{SYMBOLIC_LIMIT} blocks, got {n}x{n}"
        )));
    }
    if n <= COFACTOR_LIMIT {
        let det = determinant(m);
        if is_zero(&det, sampler, 1e-12).is_zero() {
            return Err(Error::SingularMinor);
        }
        let inv_det = det.powi(-1);
        return Ok((0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        // inverse[i][j] = (-1)^(i+j) det(minor(j, i)) / det
                        let sign = if (i + j) % 2 == 0 { Expr::one() } else { Expr::int(-1) };
                        let cof = if n == 1 { Expr::one() } else { determinant(&minor(m, j, i)) };
                        Expr::product([sign, cof, inv_det.clone()])
                    })
                    .collect()
            })
            .collect());
    }
    gauss_jordan_inverse(m, sampler)
}

fn gauss_jordan_inverse(m: &Matrix<Expr>, sampler: &Sampler) -> Result<Matrix<Expr>> {
    let n = m.len();
    let mut a: Matrix<Expr> = m.iter().map(|r| r.iter().map(Expr::simplify).collect()).collect();
    let mut inv: Matrix<Expr> =
        (0..n).map(|i| (0..n).map(|j| if i == j { Expr::one() } else { Expr::zero() }).collect()).collect();
    for k in 0..n {
        let pivot = (k..n)
            .find(|&i| !a[i][k].is_zero_constant() && !is_zero(&a[i][k], sampler, 1e-12).is_zero())
            .ok_or(Error::SingularMinor)?;
        a.swap(k, pivot);
        inv.swap(k, pivot);
        let p_inv = a[k][k].powi(-1);
        for j in 0..n {
            a[k][j] = &a[k][j] * &p_inv;
            inv[k][j] = &inv[k][j] * &p_inv;
        }
        for i in 0..n {
            if i == k || a[i][k].is_zero_constant() {
                continue;
            }
            let factor = a[i][k].clone();
            for j in 0..n {
                a[i][j] = &a[i][j] - &(&factor * &a[k][j]);
                inv[i][j] = &inv[i][j] - &(&factor * &inv[k][j]);
            }
        }
    }
    Ok(inv)
}

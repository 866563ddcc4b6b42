//! Dense row-major matrices and a least-squares kernel built on Householder
//! QR with column pivoting.
//!
//! Normal equations are avoided throughout: the pivoted QR keeps full
//! précision on ill-conditioned empirical designs and the ordered diagonal of
//! R doubles as a rank screen that names the collapsed columns.

use crate::error::{Error, Result};

/// Condition-estimate limit above which a design is declared singular.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Dense matrix, row-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major entries, checking shape and finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("matrix entries must be finite".into()));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Assembles a matrix from equal-length columns.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::DimensionMismatch("no columns".into()));
        }
        let rows = columns[0].len();
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch(
                "columns have unequal lengths".into(),
            ));
        }
        let cols = columns.len();
        let mut data = vec![0.0; rows * cols];
        for (j, col) in columns.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                data[i * cols + j] = v;
            }
        }
        Matrix::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// `X v`
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a * b)
                    .sum::<f64>()
            })
            .collect()
    }

    /// `Xᵀ v`
    pub fn t_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let row = self.row(i);
            let vi = v[i];
            for (o, &a) in out.iter_mut().zip(row) {
                *o += a * vi;
            }
        }
        out
    }

    /// Product of two matrices (used for small sandwich factors).
    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * out.cols + j] += a * other.get(l, j);
                }
            }
        }
        out
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }
}

/// Pivoted QR factor: packed R, column permutation, and the diagonal-ratio
/// condition estimate.
struct PivotedQr {
    r: Vec<f64>, // n x n upper triangular, row-major
    perm: Vec<usize>,
    cond: f64,
}

/// Factors `a` in a working copy; `qty`, when given, is overwritten with Qᵀy.
fn qr_factor(a: &Matrix, mut qty: Option<&mut Vec<f64>>) -> PivotedQr {
    let m = a.rows;
    let n = a.cols;
    let mut w = a.data.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let at = |w: &[f64], i: usize, j: usize| w[i * n + j];

    for k in 0..n {
        // Businger-Golub pivot: bring the column with the largest remaining
        // norm to position k. Norms are recomputed, not downdated.
        let mut best = k;
        let mut best_norm = -1.0;
        for j in k..n {
            let norm2: f64 = (k..m).map(|i| at(&w, i, j).powi(2)).sum();
            if norm2 > best_norm {
                best_norm = norm2;
                best = j;
            }
        }
        if best != k {
            for i in 0..m {
                w.swap(i * n + k, i * n + best);
            }
            perm.swap(k, best);
        }

        let norm_x = best_norm.max(0.0).sqrt();
        if norm_x == 0.0 {
            // Remaining block is exactly zero; R diagonal stays zero.
            continue;
        }
        let akk = at(&w, k, k);
        let alpha = if akk >= 0.0 { -norm_x } else { norm_x };
        let vk = akk - alpha;
        let vtv = vk * vk + (k + 1..m).map(|i| at(&w, i, k).powi(2)).sum::<f64>();
        if vtv == 0.0 {
            continue;
        }
        // Apply I - 2vvᵀ/vᵀv to the trailing columns and to qty.
        for j in k + 1..n {
            let mut dot = vk * at(&w, k, j);
            for i in k + 1..m {
                dot += at(&w, i, k) * at(&w, i, j);
            }
            let s = 2.0 * dot / vtv;
            w[k * n + j] -= s * vk;
            for i in k + 1..m {
                w[i * n + j] -= s * at(&w, i, k);
            }
        }
        if let Some(q) = qty.as_deref_mut() {
            let mut dot = vk * q[k];
            for i in k + 1..m {
                dot += at(&w, i, k) * q[i];
            }
            let s = 2.0 * dot / vtv;
            q[k] -= s * vk;
            for i in k + 1..m {
                q[i] -= s * at(&w, i, k);
            }
        }
        w[k * n + k] = alpha;
        for i in k + 1..m {
            w[i * n + k] = 0.0;
        }
    }

    let mut r = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            r[i * n + j] = at(&w, i, j);
        }
    }
    let dmax = (0..n).map(|i| r[i * n + i].abs()).fold(0.0, f64::max);
    let dmin = (0..n).map(|i| r[i * n + i].abs()).fold(f64::INFINITY, f64::min);
    let cond = if dmin == 0.0 { f64::INFINITY } else { dmax / dmin };
    PivotedQr { r, perm, cond }
}

/// Columns whose R diagonal collapsed below `dmax / CONDITION_LIMIT`,
/// reported as original column indices in ascending order.
fn collapsed_columns(qr: &PivotedQr, n: usize) -> Vec<usize> {
    let dmax = (0..n).map(|i| qr.r[i * n + i].abs()).fold(0.0, f64::max);
    let mut cols: Vec<usize> = (0..n)
        .filter(|&i| qr.r[i * n + i].abs() * CONDITION_LIMIT <= dmax || dmax == 0.0)
        .map(|i| qr.perm[i])
        .collect();
    cols.sort_unstable();
    cols
}

fn singular_error(qr: &PivotedQr, n: usize) -> Error {
    Error::SingularDesign {
        columns: collapsed_columns(qr, n)
            .into_iter()
            .map(|j| format!("{j}"))
            .collect(),
        cond: qr.cond,
    }
}

/// Least-squares coefficients minimizing `||y - X b||²`.
///
/// Requires strictly more rows than columns and a numerically full-rank `X`;
/// rank deficiency is reported with the offending column indices.
pub fn least_squares(x: &Matrix, y: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = (x.rows, x.cols);
    if y.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "design has {m} rows but response has {}",
            y.len()
        )));
    }
    if m <= n {
        return Err(Error::Parameter(format!(
            "need more observations than columns ({m} rows, {n} columns)"
        )));
    }
    let mut qty = y.to_vec();
    let qr = qr_factor(x, Some(&mut qty));
    if !(qr.cond <= CONDITION_LIMIT) {
        return Err(singular_error(&qr, n));
    }
    // Back-substitute R z = (Qᵀy)[..n], then undo the pivoting.
    let mut z = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = qty[i];
        for j in i + 1..n {
            s -= qr.r[i * n + j] * z[j];
        }
        z[i] = s / qr.r[i * n + i];
    }
    let mut b = vec![0.0; n];
    for (j, &p) in qr.perm.iter().enumerate() {
        b[p] = z[j];
    }
    Ok(b)
}

/// `(XᵀX)⁻¹` computed from the pivoted QR of `X` (never from the normal
/// equations). Used by the sandwich covariance.
pub fn inv_xtx(x: &Matrix) -> Result<Matrix> {
    let n = x.cols;
    let qr = qr_factor(x, None);
    if !(qr.cond <= CONDITION_LIMIT) {
        return Err(singular_error(&qr, n));
    }
    // R⁻¹ by back-substitution, column by column.
    let mut rinv = vec![0.0; n * n];
    for c in 0..n {
        let mut col = vec![0.0; n];
        for i in (0..=c).rev() {
            let mut s = if i == c { 1.0 } else { 0.0 };
            for j in i + 1..=c {
                s -= qr.r[i * n + j] * col[j];
            }
            col[i] = s / qr.r[i * n + i];
        }
        for i in 0..n {
            rinv[i * n + c] = col[i];
        }
    }
    // G = R⁻¹ R⁻ᵀ, then (XᵀX)⁻¹ = P G Pᵀ.
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for l in i.max(j)..n {
                s += rinv[i * n + l] * rinv[j * n + l];
            }
            out.set(qr.perm[i], qr.perm[j], s);
        }
    }
    Ok(out)
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations,
/// ascending order. Supports the positive-semidefiniteness checks on
/// covariance sandwiches.
pub fn sym_eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    if m.rows != m.cols {
        return Err(Error::DimensionMismatch("matrix must be square".into()));
    }
    let n = m.rows;
    let mut a = m.data.clone();
    let idx = |i: usize, j: usize| i * n + j;
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += a[idx(i, j)] * a[idx(i, j)];
            }
        }
        if off.sqrt() <= 1e-14 * (1.0 + m.max_abs()) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[idx(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[idx(p, p)];
                let aqq = a[idx(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[idx(k, p)];
                    let akq = a[idx(k, q)];
                    a[idx(k, p)] = c * akp - s * akq;
                    a[idx(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[idx(p, k)];
                    let aqk = a[idx(q, k)];
                    a[idx(p, k)] = c * apk - s * aqk;
                    a[idx(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[idx(i, i)]).collect();
    eig.sort_by(|x, y| x.total_cmp(y));
    Ok(eig)
}

/// Solves a square k×k system by Gaussian elimination with partial pivoting.
/// Returns `None` when the pivot collapses; the enumeration oracle skips
/// those subsets.
pub(crate) fn solve_square(a: &Matrix, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows;
    if a.cols != n || b.len() != n {
        return None;
    }
    let mut w = a.data.clone();
    let mut rhs = b.to_vec();
    let scale = a.max_abs().max(1e-300);
    for k in 0..n {
        let (piv, pmax) = (k..n)
            .map(|i| (i, w[i * n + k].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if pmax <= 1e-13 * scale {
            return None;
        }
        if piv != k {
            for j in 0..n {
                w.swap(k * n + j, piv * n + j);
            }
            rhs.swap(k, piv);
        }
        for i in k + 1..n {
            let f = w[i * n + k] / w[k * n + k];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                w[i * n + j] -= f * w[k * n + j];
            }
            rhs[i] -= f * rhs[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for j in i + 1..n {
            s -= w[i * n + j] * x[j];
        }
        x[i] = s / w[i * n + i];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rng::Rng;

    fn design(rows: &[[f64; 2]]) -> Matrix {
        Matrix::new(rows.len(), 2, rows.iter().flatten().copied().collect()).unwrap()
    }

    #[test]
    fn perfect_fit_is_exact() {
        let x = design(&[[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]]);
        let b = least_squares(&x, &[1.0, 3.0, 5.0]).unwrap();
        assert!((b[0] - 1.0).abs() < 1e-12 && (b[1] - 2.0).abs() < 1e-12, "{b:?}");
    }

    #[test]
    fn hand_solved_two_by_two() {
        // Normal equations [[3,3],[3,5]] b = [2,3]  =>  b = [1/6, 1/2].
        let x = design(&[[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]]);
        let b = least_squares(&x, &[0.0, 1.0, 1.0]).unwrap();
        assert!((b[0] - 1.0 / 6.0).abs() < 1e-12, "b0 = {}", b[0]);
        assert!((b[1] - 0.5).abs() < 1e-12, "b1 = {}", b[1]);
    }

    #[test]
    fn duplicated_column_is_singular_and_named() {
        let x = Matrix::new(
            4,
            3,
            vec![
                1.0, 2.0, 2.0, //
                1.0, 3.0, 3.0, //
                1.0, 5.0, 5.0, //
                1.0, 7.0, 7.0,
            ],
        )
        .unwrap();
        match least_squares(&x, &[1.0, 2.0, 3.0, 4.0]) {
            Err(Error::SingularDesign { columns, .. }) => {
                assert!(!columns.is_empty());
                // One of the duplicated pair must be reported.
                assert!(columns.contains(&"1".to_string()) || columns.contains(&"2".to_string()));
            }
            other => panic!("expected singular design, got {other:?}"),
        }
    }

    #[test]
    fn residuals_are_orthogonal_on_random_designs() {
        let mut rng = Rng::new(314, 0);
        for _ in 0..50 {
            let n = 40;
            let k = 4;
            let cols: Vec<Vec<f64>> = (0..k)
                .map(|j| {
                    if j == 0 {
                        vec![1.0; n]
                    } else {
                        rng.sample_normal(0.0, 1.0 + j as f64, n).unwrap()
                    }
                })
                .collect();
            let x = Matrix::from_columns(&cols).unwrap();
            let y = rng.sample_normal(0.5, 2.0, n).unwrap();
            let b = least_squares(&x, &y).unwrap();
            let fitted = x.mul_vec(&b);
            let resid: Vec<f64> = y.iter().zip(&fitted).map(|(a, f)| a - f).collect();
            let xte = x.t_mul_vec(&resid);
            let ymax = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let scale = n as f64 * x.max_abs() * ymax;
            for g in xte {
                assert!(g.abs() <= 1e-8 * scale, "gradient {g} vs scale {scale}");
            }
        }
    }

    #[test]
    fn inv_xtx_matches_direct_inverse() {
        let x = Matrix::new(
            5,
            2,
            vec![1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0, 1.0, 4.0],
        )
        .unwrap();
        let inv = inv_xtx(&x).unwrap();
        // XtX = [[5,10],[10,30]], det 50, inverse [[0.6,-0.2],[-0.2,0.1]].
        assert!((inv.get(0, 0) - 0.6).abs() < 1e-12);
        assert!((inv.get(0, 1) + 0.2).abs() < 1e-12);
        assert!((inv.get(1, 0) + 0.2).abs() < 1e-12);
        assert!((inv.get(1, 1) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn jacobi_eigenvalues_of_known_matrix() {
        let m = Matrix::new(2, 2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let e = sym_eigenvalues(&m).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-12);
        assert!((e[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn square_solver_interpolates() {
        let a = Matrix::new(2, 2, vec![1.0, 0.0, 1.0, 2.0]).unwrap();
        let x = solve_square(&a, &[1.0, 5.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 2.0).abs() < 1e-12);
        let sing = Matrix::new(2, 2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(solve_square(&sing, &[1.0, 2.0]).is_none());
    }

    #[test]
    fn nonfinite_entries_are_rejected() {
        assert!(Matrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(Matrix::new(2, 2, vec![1.0, 2.0, 3.0]).is_err());
    }
}

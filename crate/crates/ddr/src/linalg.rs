//! Dense linear algebra over a [`Scalar`]: elimination, null spaces and
//! constrained minimum-norm solves.

use crate::scalar::{max_abs, Scalar};
use crate::{Error, Result};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<S> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>, cols: usize) -> Self {
        let r = rows.len();
        let mut data = Vec::with_capacity(r * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged matrix rows");
            data.extend(row);
        }
        Mat { rows: r, cols, data }
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vec(&self, i: usize) -> Vec<S> {
        self.row(i).to_vec()
    }

    pub fn col_vec(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Mat<S>) -> Mat<S> {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = &self[(i, l)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(l, j)];
                    if b.is_zero() {
                        continue;
                    }
                    let v = out[(i, j)].clone() + a.clone() * b.clone();
                    out[(i, j)] = v;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[S]) -> Vec<S> {
        assert_eq!(self.cols, x.len(), "dimension mismatch in matrix-vector product");
        (0..self.rows)
            .map(|i| {
                let mut acc = S::zero();
                for (a, b) in self.row(i).iter().zip(x) {
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc + a.clone() * b.clone();
                    }
                }
                acc
            })
            .collect()
    }

    pub fn tmul_vec(&self, y: &[S]) -> Vec<S> {
        assert_eq!(self.rows, y.len(), "dimension mismatch in transposed product");
        let mut out = vec![S::zero(); self.cols];
        for (i, yi) in y.iter().enumerate() {
            if yi.is_zero() {
                continue;
            }
            for (j, a) in self.row(i).iter().enumerate() {
                if !a.is_zero() {
                    out[j] = out[j].clone() + a.clone() * yi.clone();
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    /// Selects a subset of rows.
    pub fn select_rows(&self, idx: &[usize]) -> Mat<S> {
        Mat::from_rows(idx.iter().map(|&i| self.row_vec(i)).collect(), self.cols)
    }

    /// Converts every entry with `g`.
    pub fn map<T: Scalar>(&self, g: impl Fn(&S) -> T) -> Mat<T> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(g).collect() }
    }
}

impl<S> std::ops::Index<(usize, usize)> for Mat<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> std::ops::IndexMut<(usize, usize)> for Mat<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

/// Reduced row echelon form of a matrix together with its pivot columns.
#[derive(Clone, Debug)]
pub struct Rref<S> {
    pub mat: Mat<S>,
    pub pivots: Vec<usize>,
}

/// Gauss-Jordan elimination. `scale` is the magnitude used by float zero tests.
pub fn rref<S: Scalar>(mut m: Mat<S>, scale: f64) -> Rref<S> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..m.cols {
        if r == m.rows {
            break;
        }
        let mut best = None;
        let mut best_score = 0.0;
        for i in r..m.rows {
            let v = &m[(i, c)];
            if v.negligible(scale) {
                continue;
            }
            let s = v.pivot_score();
            if best.is_none() || s > best_score {
                best = Some(i);
                best_score = s;
            }
        }
        let Some(p) = best else {
            for i in r..m.rows {
                m[(i, c)] = S::zero();
            }
            continue;
        };
        if p != r {
            for j in 0..m.cols {
                m.data.swap(p * m.cols + j, r * m.cols + j);
            }
        }
        let inv = S::one() / m[(r, c)].clone();
        for j in c..m.cols {
            let v = m[(r, j)].clone() * inv.clone();
            m[(r, j)] = v;
        }
        m[(r, c)] = S::one();
        let pivot_row: Vec<S> = m.row(r)[c..].to_vec();
        for i in 0..m.rows {
            if i == r {
                continue;
            }
            let factor = m[(i, c)].clone();
            if factor.is_zero() {
                continue;
            }
            for (off, pv) in pivot_row.iter().enumerate() {
                if pv.is_zero() {
                    continue;
                }
                let j = c + off;
                let v = m[(i, j)].clone() - factor.clone() * pv.clone();
                m[(i, j)] = v;
            }
            m[(i, c)] = S::zero();
        }
        pivots.push(c);
        r += 1;
    }
    Rref { mat: m, pivots }
}

pub fn rank<S: Scalar>(m: &Mat<S>) -> usize {
    let scale = m.max_abs();
    rref(m.clone(), scale).pivots.len()
}

/// Basis of `{x : m x = 0}` as columns of the returned matrix (cols = nullity).
pub fn nullspace<S: Scalar>(m: &Mat<S>) -> Mat<S> {
    let scale = m.max_abs();
    let red = rref(m.clone(), scale);
    let n = m.cols;
    let free: Vec<usize> = (0..n).filter(|c| !red.pivots.contains(c)).collect();
    let mut out = Mat::zeros(n, free.len());
    for (q, &fc) in free.iter().enumerate() {
        out[(fc, q)] = S::one();
        for (ri, &pc) in red.pivots.iter().enumerate() {
            out[(pc, q)] = -red.mat[(ri, fc)].clone();
        }
    }
    out
}

/// One solution of `a x = b` (free variables set to zero), or an error when
/// the system is inconsistent.
pub fn solve_any<S: Scalar>(a: &Mat<S>, b: &[S]) -> Result<Vec<S>> {
    assert_eq!(a.rows, b.len(), "right-hand side length mismatch");
    let mut aug = Mat::zeros(a.rows, a.cols + 1);
    for i in 0..a.rows {
        for j in 0..a.cols {
            aug[(i, j)] = a[(i, j)].clone();
        }
        aug[(i, a.cols)] = b[i].clone();
    }
    let scale = a.max_abs().max(max_abs(b));
    let red = rref(aug, scale);
    if red.pivots.last() == Some(&a.cols) {
        return Err(Error::Inconsistent("linear system has no solution".into()));
    }
    let mut x = vec![S::zero(); a.cols];
    for (ri, &pc) in red.pivots.iter().enumerate() {
        x[pc] = red.mat[(ri, a.cols)].clone();
    }
    Ok(x)
}

/// Inverse of a square nonsingular matrix.
pub fn inverse<S: Scalar>(a: &Mat<S>) -> Result<Mat<S>> {
    assert_eq!(a.rows, a.cols, "inverse of a non-square matrix");
    let n = a.rows;
    if n == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    let mut aug = Mat::zeros(n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = a[(i, j)].clone();
        }
        aug[(i, n + i)] = S::one();
    }
    let red = rref(aug, a.max_abs());
    if red.pivots.len() < n || red.pivots[n - 1] != n - 1 {
        return Err(Error::Singular(format!("{n}x{n} matrix is singular")));
    }
    let mut inv = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            inv[(i, j)] = red.mat[(i, n + j)].clone();
        }
    }
    Ok(inv)
}

/// Indices of a maximal linearly independent subset of the rows, scanned in order.
pub fn independent_rows<S: Scalar>(rows: &[Vec<S>]) -> Vec<usize> {
    let scale = rows.iter().map(|r| max_abs(r)).fold(0.0, f64::max);
    let mut basis: Vec<(usize, Vec<S>)> = Vec::new();
    let mut keep = Vec::new();
    for (idx, row) in rows.iter().enumerate() {
        let mut v = row.clone();
        for (pc, b) in &basis {
            let f = v[*pc].clone();
            if f.is_zero() {
                continue;
            }
            for (x, y) in v.iter_mut().zip(b) {
                if !y.is_zero() {
                    *x = x.clone() - f.clone() * y.clone();
                }
            }
        }
        let pivot = v
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.negligible(scale))
            .max_by(|a, b| a.1.pivot_score().partial_cmp(&b.1.pivot_score()).unwrap())
            .map(|(i, _)| i);
        if let Some(pc) = pivot {
            let inv = S::one() / v[pc].clone();
            for x in v.iter_mut() {
                *x = x.clone() * inv.clone();
            }
            for (_, b) in basis.iter_mut() {
                let f = b[pc].clone();
                if f.is_zero() {
                    continue;
                }
                for (x, y) in b.iter_mut().zip(&v) {
                    if !y.is_zero() {
                        *x = x.clone() - f.clone() * y.clone();
                    }
                }
            }
            basis.push((pc, v));
            keep.push(idx);
        }
    }
    keep
}

/// Result of a constrained minimum-norm solve.
#[derive(Clone, Debug)]
pub struct MinNorm<S> {
    pub x: Vec<S>,
    /// Null-space basis of the constraint matrix used in the solve.
    pub kernel: Mat<S>,
}

/// Minimizes `x^T g x` subject to `a x = b` via the null-space method.
///
/// `g` must be symmetric positive definite on the kernel of `a`.
pub fn min_norm<S: Scalar>(g: &Mat<S>, a: &Mat<S>, b: &[S]) -> Result<MinNorm<S>> {
    let n = g.rows;
    assert_eq!(a.cols, n, "constraint width mismatch");
    let xp = if a.rows == 0 { vec![S::zero(); n] } else { solve_any(a, b)? };
    let kernel = if a.rows == 0 { Mat::identity(n) } else { nullspace(a) };
    let q = kernel.cols;
    if q == 0 {
        return Ok(MinNorm { x: xp, kernel });
    }
    let gk = g.mul(&kernel);
    let reduced = kernel.transpose().mul(&gk);
    let rhs: Vec<S> = kernel.tmul_vec(&g.mul_vec(&xp)).into_iter().map(|v| -v).collect();
    let y = solve_square(&reduced, &rhs)?;
    let corr = kernel.mul_vec(&y);
    let x = xp.into_iter().zip(corr).map(|(u, v)| u + v).collect();
    Ok(MinNorm { x, kernel })
}

/// Linear solution operator of a family of constrained minimum-norm problems
/// `min x^T g x` subject to `a x = b`, for all consistent right-hand sides `b`.
#[derive(Clone, Debug)]
pub struct MinNormOp<S> {
    /// `x = solve * b` for consistent `b`.
    pub solve: Mat<S>,
    /// Rows spanning the left null space of `a`: `b` is consistent iff `consistency * b = 0`.
    pub consistency: Mat<S>,
    /// Null-space basis of `a`.
    pub kernel: Mat<S>,
}

impl<S: Scalar> MinNormOp<S> {
    pub fn apply(&self, b: &[S]) -> Vec<S> {
        self.solve.mul_vec(b)
    }

    /// Largest entry of `consistency * b` (zero for solvable data).
    pub fn defect(&self, b: &Mat<S>) -> f64 {
        self.consistency.mul(b).max_abs()
    }
}

pub fn min_norm_operator<S: Scalar>(g: &Mat<S>, a: &Mat<S>) -> Result<MinNormOp<S>> {
    let (m, n) = (a.rows, a.cols);
    assert_eq!(g.rows, n, "metric size mismatch");
    let mut aug = Mat::zeros(m, n + m);
    for i in 0..m {
        for j in 0..n {
            aug[(i, j)] = a[(i, j)].clone();
        }
        aug[(i, n + i)] = S::one();
    }
    let red = rref(aug, a.max_abs());
    let rank = red.pivots.iter().take_while(|&&p| p < n).count();
    let mut particular = Mat::zeros(n, m);
    for (ri, &pc) in red.pivots.iter().take(rank).enumerate() {
        for j in 0..m {
            particular[(pc, j)] = red.mat[(ri, n + j)].clone();
        }
    }
    let mut consistency = Mat::zeros(m - rank, m);
    for ri in rank..m {
        for j in 0..m {
            consistency[(ri - rank, j)] = red.mat[(ri, n + j)].clone();
        }
    }
    let free: Vec<usize> = (0..n).filter(|c| !red.pivots[..rank].contains(c)).collect();
    let mut kernel = Mat::zeros(n, free.len());
    for (q, &fc) in free.iter().enumerate() {
        kernel[(fc, q)] = S::one();
        for (ri, &pc) in red.pivots.iter().take(rank).enumerate() {
            kernel[(pc, q)] = -red.mat[(ri, fc)].clone();
        }
    }
    let solve = if kernel.cols == 0 {
        particular
    } else {
        let gk = g.mul(&kernel);
        let reduced = kernel.transpose().mul(&gk);
        let inv = inverse(&reduced)?;
        let corr = kernel.mul(&inv.mul(&gk.transpose().mul(&particular)));
        let mut out = particular;
        for (o, c) in out.data.iter_mut().zip(corr.data) {
            *o = o.clone() - c;
        }
        out
    };
    Ok(MinNormOp { solve, consistency, kernel })
}

/// Solves a square nonsingular system.
pub fn solve_square<S: Scalar>(a: &Mat<S>, b: &[S]) -> Result<Vec<S>> {
    assert_eq!(a.rows, a.cols, "square solve of a rectangular matrix");
    let mut aug = Mat::zeros(a.rows, a.cols + 1);
    for i in 0..a.rows {
        for j in 0..a.cols {
            aug[(i, j)] = a[(i, j)].clone();
        }
        aug[(i, a.cols)] = b[i].clone();
    }
    let red = rref(aug, a.max_abs().max(max_abs(b)));
    if red.pivots.len() < a.cols || red.pivots.iter().take(a.cols).enumerate().any(|(i, &p)| p != i) {
        return Err(Error::Singular(format!("{}x{} system is singular", a.rows, a.cols)));
    }
    Ok((0..a.rows).map(|i| red.mat[(i, a.cols)].clone()).collect())
}

/// KKT certificate: `kernel^T g x`, which vanishes at the constrained minimizer.
pub fn kkt_residual<S: Scalar>(g: &Mat<S>, kernel: &Mat<S>, x: &[S]) -> Vec<S> {
    kernel.tmul_vec(&g.mul_vec(x))
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut acc = S::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc = acc + x.clone() * y.clone();
        }
    }
    acc
}

pub fn quad_form<S: Scalar>(g: &Mat<S>, x: &[S]) -> S {
    dot(x, &g.mul_vec(x))
}

pub fn sub_vec<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

pub fn add_vec<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
}

pub fn scale_vec<S: Scalar>(a: &[S], t: &S) -> Vec<S> {
    a.iter().map(|x| x.clone() * t.clone()).collect()
}

pub fn is_zero_vec<S: Scalar>(a: &[S], scale: f64) -> bool {
    a.iter().all(|x| x.negligible(scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rint, Rat};

    fn m(rows: Vec<Vec<i64>>) -> Mat<Rat> {
        let c = rows[0].len();
        Mat::from_rows(rows.into_iter().map(|r| r.into_iter().map(rint).collect()).collect(), c)
    }

    #[test]
    fn rank_and_nullspace() {
        let a = m(vec![vec![1, 2, 3], vec![2, 4, 6], vec![1, 0, 1]]);
        assert_eq!(rank(&a), 2);
        let k = nullspace(&a);
        assert_eq!(k.cols, 1);
        assert!(a.mul(&k).data.iter().all(|v| v == &rint(0)));
    }

    #[test]
    fn inverse_exact() {
        let a = m(vec![vec![2, 1], vec![1, 1]]);
        let inv = inverse(&a).unwrap();
        assert_eq!(a.mul(&inv), Mat::identity(2));
    }

    #[test]
    fn min_norm_identity_metric() {
        // minimize x^2 + y^2 subject to x + y = 1 -> (1/2, 1/2)
        let g = Mat::<Rat>::identity(2);
        let a = m(vec![vec![1, 1]]);
        let sol = min_norm(&g, &a, &[rint(1)]).unwrap();
        assert_eq!(sol.x, vec![rat(1, 2), rat(1, 2)]);
        assert!(kkt_residual(&g, &sol.kernel, &sol.x).iter().all(|v| v == &rint(0)));
    }

    #[test]
    fn operator_matches_vector_solve() {
        let g = m(vec![vec![2, 1, 0], vec![1, 3, 1], vec![0, 1, 4]]);
        let a = m(vec![vec![1, 1, 1], vec![2, 2, 2]]);
        let op = min_norm_operator(&g, &a).unwrap();
        let b = vec![rint(3), rint(6)];
        assert_eq!(op.consistency.mul_vec(&b), vec![rint(0)]);
        assert_eq!(op.apply(&b), min_norm(&g, &a, &b).unwrap().x);
        assert_ne!(op.consistency.mul_vec(&[rint(1), rint(1)]), vec![rint(0)]);
    }

    #[test]
    fn inconsistent_system_rejected() {
        let a = m(vec![vec![1, 1], vec![1, 1]]);
        assert!(solve_any(&a, &[rint(1), rint(2)]).is_err());
    }

    #[test]
    fn independent_subset() {
        let rows = vec![vec![rint(1), rint(0)], vec![rint(2), rint(0)], vec![rint(0), rint(3)]];
        assert_eq!(independent_rows(&rows), vec![0, 2]);
    }
}

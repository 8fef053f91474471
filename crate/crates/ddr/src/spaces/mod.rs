//! Polynomial form spaces on cells, conforming trimmed finite element spaces
//! on simplicial submeshes, and bubble subspaces.

mod fe;
pub mod reference;

pub use fe::{DofKey, FeSpace};
pub use reference::{ref_element, RefElement};

use std::collections::HashMap;

use crate::exterior::form::{subsets, Form, Subset};
use crate::exterior::poly::{binomial, monomials, Exps, Poly};
use crate::linalg::{independent_rows, solve_any, solve_square, Mat};
use crate::mesh::Mesh;
use crate::scalar::Scalar;
use crate::Result;

/// Coordinates of `P_r Lambda^k` in `d` variables: subset-major, monomials by degree.
#[derive(Clone, Debug)]
pub struct FullSpace {
    pub d: usize,
    pub r: i64,
    pub k: usize,
    pub keys: Vec<(Subset, Exps)>,
    index: HashMap<(Subset, Exps), usize>,
}

impl FullSpace {
    pub fn new(d: usize, r: i64, k: usize) -> Self {
        let mut keys = Vec::new();
        if k <= d {
            for m in subsets(d, k) {
                for e in monomials(d, r) {
                    keys.push((m, e));
                }
            }
        }
        let index = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        FullSpace { d, r, k, keys, index }
    }

    pub fn dim(&self) -> usize {
        self.keys.len()
    }

    /// Coefficients of `w`; `None` when `w` is not in the space.
    pub fn try_coeffs<S: Scalar>(&self, w: &Form<S>) -> Option<Vec<S>> {
        let mut out = vec![S::zero(); self.dim()];
        for (m, p) in &w.terms {
            for (e, c) in &p.terms {
                out[*self.index.get(&(*m, *e))?] = c.clone();
            }
        }
        Some(out)
    }

    pub fn coeffs<S: Scalar>(&self, w: &Form<S>) -> Vec<S> {
        self.try_coeffs(w).unwrap_or_else(|| panic!("form of degree {} outside P_{}", w.poly_degree(), self.r))
    }

    pub fn form<S: Scalar>(&self, c: &[S]) -> Form<S> {
        let mut out = Form::zero(self.d, self.k);
        for ((m, e), v) in self.keys.iter().zip(c) {
            if !v.is_zero() {
                out.add_term(*m, Poly::monomial(self.d, *e, v.clone()));
            }
        }
        out
    }

    pub fn basis<S: Scalar>(&self) -> Vec<Form<S>> {
        self.keys.iter().map(|(m, e)| Form::term(self.d, *m, Poly::monomial(self.d, *e, S::one()))).collect()
    }
}

/// Monomial basis of `P_r Lambda^k` in `d` variables; empty when `r < 0`.
pub fn full_basis<S: Scalar>(d: usize, r: i64, k: usize) -> Vec<Form<S>> {
    FullSpace::new(d, r, k).basis()
}

/// Selects a basis from a spanning set of forms in `P_r Lambda^k`.
pub fn reduce_span<S: Scalar>(d: usize, r: i64, k: usize, span: Vec<Form<S>>) -> Vec<Form<S>> {
    let sp = FullSpace::new(d, r, k);
    let rows: Vec<Vec<S>> = span.iter().map(|w| sp.coeffs(w)).collect();
    let keep = independent_rows(&rows);
    keep.into_iter().map(|i| span[i].clone()).collect()
}

/// Basis of `d P_{r} Lambda^{k-1}` (k >= 1).
pub fn exact_basis<S: Scalar>(d: usize, r: i64, k: usize) -> Vec<Form<S>> {
    if k == 0 || k > d || r < 1 {
        return Vec::new();
    }
    let span = full_basis::<S>(d, r, k - 1).iter().map(|w| w.d()).filter(|w| !w.is_zero()).collect();
    reduce_span(d, r - 1, k, span)
}

/// Basis of `kappa P_{r} Lambda^{k+1}` (forms of degree k), Koszul centered at the origin.
pub fn koszul_basis<S: Scalar>(d: usize, r: i64, k: usize) -> Vec<Form<S>> {
    if k + 1 > d || r < 0 {
        return Vec::new();
    }
    let origin = vec![S::zero(); d];
    let span = full_basis::<S>(d, r, k + 1).iter().map(|w| w.koszul(&origin)).filter(|w| !w.is_zero()).collect();
    reduce_span(d, r + 1, k, span)
}

/// Basis of the trimmed space `P^-_r Lambda^k = d P_r Lambda^{k-1} + kappa P_{r-1} Lambda^{k+1}`
/// (`P_r Lambda^0` when k = 0).
pub fn trimmed_basis<S: Scalar>(d: usize, r: i64, k: usize) -> Vec<Form<S>> {
    if r < 0 || k > d {
        return Vec::new();
    }
    if k == 0 {
        return full_basis(d, r, 0);
    }
    let mut out = exact_basis(d, r, k);
    out.extend(koszul_basis(d, r - 1, k));
    out
}

/// `dim P^-_r Lambda^k` on a `d`-cell from the closed form.
pub fn trimmed_dim(d: usize, r: i64, k: usize) -> usize {
    if r < 0 || k > d {
        return 0;
    }
    if k == 0 {
        return binomial(r + d as i64, d as i64) as usize;
    }
    (binomial(r + d as i64, r + k as i64) * binomial(r + k as i64 - 1, k as i64)) as usize
}

pub fn full_dim(d: usize, r: i64, k: usize) -> usize {
    if r < 0 || k > d {
        return 0;
    }
    (binomial(r + d as i64, d as i64) * binomial(d as i64, k as i64)) as usize
}

/// Splits `w` in `P_r Lambda^k` as `a + b` with `a` in `d P_{r+1} Lambda^{k-1}` (constants
/// when k = 0) and `b` in `kappa P_{r-1} Lambda^{k+1}`.
pub fn decompose_koszul<S: Scalar>(d: usize, r: i64, k: usize, w: &Form<S>) -> Result<(Form<S>, Form<S>)> {
    let first = if k == 0 { full_basis(d, 0, 0) } else { exact_basis(d, r + 1, k) };
    let second = koszul_basis(d, r - 1, k);
    let sp = FullSpace::new(d, r.max(0), k);
    let cols: Vec<Vec<S>> = first.iter().chain(&second).map(|b| sp.coeffs(b)).collect();
    let target = sp
        .try_coeffs(w)
        .ok_or_else(|| crate::Error::Inconsistent(format!("form is not in P_{r} Lambda^{k}")))?;
    let a = Mat::from_rows((0..sp.dim()).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect(), cols.len());
    let x = solve_any(&a, &target)?;
    let mut alpha = Form::zero(d, k);
    let mut beta = Form::zero(d, k);
    for (j, xj) in x.iter().enumerate() {
        if j < first.len() {
            alpha.add_assign_scaled(&first[j], xj);
        } else {
            beta.add_assign_scaled(&second[j - first.len()], xj);
        }
    }
    Ok((alpha, beta))
}

/// Local geometry of a cell: metric weights and positively ordered submesh
/// simplices in frame coordinates.
#[derive(Clone, Debug)]
pub struct CellGeometry<S> {
    pub dim: usize,
    pub metric: Vec<S>,
    pub simplices: Vec<Vec<Vec<S>>>,
}

impl<S: Scalar> CellGeometry<S> {
    pub fn new(mesh: &Mesh, d: usize, i: usize) -> Self {
        let simplices = mesh
            .local_simplices::<S>(d, i)
            .into_iter()
            .map(|(mut v, sign)| {
                if sign < 0 {
                    v.swap(0, 1);
                }
                v
            })
            .collect();
        CellGeometry { dim: d, metric: mesh.cell(d, i).metric_as(), simplices }
    }

    /// Integral of a top-degree form with the cell orientation.
    pub fn integrate(&self, w: &Form<S>) -> S {
        if w.is_zero() {
            return S::zero();
        }
        self.simplices.iter().fold(S::zero(), |acc, s| acc + w.integrate_simplex(s))
    }

    /// Scaled L2 inner product (true value divided by `sqrt(prod g)`).
    pub fn inner(&self, a: &Form<S>, b: &Form<S>) -> S {
        self.integrate(&a.wedge(&b.hodge_scaled(&self.metric)))
    }

    pub fn gram(&self, basis: &[Form<S>]) -> Mat<S> {
        let n = basis.len();
        let mut g = Mat::zeros(n, n);
        let stars: Vec<Form<S>> = basis.iter().map(|b| b.hodge_scaled(&self.metric)).collect();
        for i in 0..n {
            for j in i..n {
                let v = self.integrate(&basis[i].wedge(&stars[j]));
                g[(i, j)] = v.clone();
                g[(j, i)] = v;
            }
        }
        g
    }

    /// Coefficients of the L2-orthogonal projection of `w` on `span(basis)`.
    pub fn project(&self, basis: &[Form<S>], w: &Form<S>) -> Vec<S> {
        let g = self.gram(basis);
        let rhs: Vec<S> = basis.iter().map(|b| self.inner(w, b)).collect();
        solve_square(&g, &rhs).expect("basis Gram matrix is singular")
    }
}

pub fn combine<S: Scalar>(basis: &[Form<S>], c: &[S], d: usize, k: usize) -> Form<S> {
    let mut out = Form::zero(d, k);
    for (b, x) in basis.iter().zip(c) {
        out.add_assign_scaled(b, x);
    }
    out
}

#[cfg(test)]
mod tests;

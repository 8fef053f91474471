//! Differential forms with polynomial coefficients in a cell's frame coordinates.

use std::collections::BTreeMap;

use super::poly::{Poly, MAX_VARS};
use crate::scalar::{sign_pow, Scalar};
use crate::{Error, Result};

/// Bit mask of an increasing index subset of `{0..dim}`.
pub type Subset = u8;

/// `sum_I w_I ds_I`, a `deg`-form in `dim` frame coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Form<S> {
    pub dim: usize,
    pub deg: usize,
    pub terms: BTreeMap<Subset, Poly<S>>,
}

/// All `k`-subsets of `{0..d}` as masks, in increasing numeric order of their
/// index lists.
pub fn subsets(d: usize, k: usize) -> Vec<Subset> {
    let mut out: Vec<Subset> = (0u32..(1u32 << d))
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| m as Subset)
        .collect();
    out.sort_by_key(|m| indices(*m));
    out
}

pub fn indices(m: Subset) -> Vec<usize> {
    (0..8).filter(|i| m & (1 << i) != 0).collect()
}

/// Sign of the permutation sorting the concatenation `I ++ J` (disjoint masks).
pub fn merge_sign(a: Subset, b: Subset) -> i32 {
    let mut inv = 0;
    for i in indices(a) {
        inv += indices(b).iter().filter(|&&j| j < i).count();
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

fn full_mask(d: usize) -> Subset {
    ((1u32 << d) - 1) as Subset
}

impl<S: Scalar> Form<S> {
    pub fn zero(dim: usize, deg: usize) -> Self {
        assert!(dim <= MAX_VARS && deg <= dim, "invalid form shape ({dim}, {deg})");
        Form { dim, deg, terms: BTreeMap::new() }
    }

    /// 0-form from a polynomial.
    pub fn scalar(p: Poly<S>) -> Self {
        let mut f = Self::zero(p.nvars, 0);
        f.add_term(0, p);
        f
    }

    /// `p ds_I` for the subset mask `m`.
    pub fn term(dim: usize, m: Subset, p: Poly<S>) -> Self {
        let mut f = Self::zero(dim, m.count_ones() as usize);
        f.add_term(m, p);
        f
    }

    /// Constant-coefficient `ds_I`.
    pub fn basis(dim: usize, m: Subset) -> Self {
        Self::term(dim, m, Poly::one(dim))
    }

    /// `ds_0 ^ ... ^ ds_{dim-1}` with coefficient `p`.
    pub fn top(p: Poly<S>) -> Self {
        let d = p.nvars;
        Self::term(d, full_mask(d), p)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Subset, p: Poly<S>) {
        debug_assert_eq!(m.count_ones() as usize, self.deg);
        if p.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(q) => {
                q.add_assign(&p);
                if q.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, p);
            }
        }
    }

    pub fn coeff(&self, m: Subset) -> Poly<S> {
        self.terms.get(&m).cloned().unwrap_or_else(|| Poly::zero(self.dim))
    }

    /// Coefficient of the top-degree basis element.
    pub fn top_coeff(&self) -> Poly<S> {
        self.coeff(full_mask(self.dim))
    }

    pub fn poly_degree(&self) -> i64 {
        self.terms.values().map(|p| p.degree()).max().unwrap_or(-1)
    }

    pub fn add(&self, other: &Form<S>) -> Form<S> {
        self.check_shape(other);
        let mut out = self.clone();
        for (m, p) in &other.terms {
            out.add_term(*m, p.clone());
        }
        out
    }

    pub fn sub(&self, other: &Form<S>) -> Form<S> {
        self.add(&other.neg())
    }

    pub fn add_assign_scaled(&mut self, other: &Form<S>, t: &S) {
        self.check_shape(other);
        if t.is_zero() {
            return;
        }
        for (m, p) in &other.terms {
            self.add_term(*m, p.scale(t));
        }
    }

    pub fn scale(&self, t: &S) -> Form<S> {
        let mut out = Self::zero(self.dim, self.deg);
        if t.is_zero() {
            return out;
        }
        for (m, p) in &self.terms {
            out.terms.insert(*m, p.scale(t));
        }
        out
    }

    pub fn neg(&self) -> Form<S> {
        Form {
            dim: self.dim,
            deg: self.deg,
            terms: self.terms.iter().map(|(m, p)| (*m, p.neg())).collect(),
        }
    }

    /// Multiplies every coefficient by a polynomial.
    pub fn mul_poly(&self, q: &Poly<S>) -> Form<S> {
        let mut out = Self::zero(self.dim, self.deg);
        for (m, p) in &self.terms {
            out.add_term(*m, p.mul(q));
        }
        out
    }

    fn check_shape(&self, other: &Form<S>) {
        assert!(
            self.dim == other.dim && self.deg == other.deg,
            "form shape mismatch: ({}, {}) vs ({}, {})",
            self.dim,
            self.deg,
            other.dim,
            other.deg
        );
    }

    /// Exterior product.
    pub fn wedge(&self, other: &Form<S>) -> Form<S> {
        assert_eq!(self.dim, other.dim, "wedge of forms on different cells");
        let deg = self.deg + other.deg;
        let mut out = Self::zero(self.dim, deg.min(self.dim));
        if deg > self.dim {
            return out;
        }
        for (ma, pa) in &self.terms {
            for (mb, pb) in &other.terms {
                if ma & mb != 0 {
                    continue;
                }
                let s = merge_sign(*ma, *mb);
                let p = pa.mul(pb);
                out.add_term(ma | mb, if s < 0 { p.neg() } else { p });
            }
        }
        out
    }

    /// Exterior derivative; the zero form when `deg == dim`.
    pub fn d(&self) -> Form<S> {
        if self.deg == self.dim {
            return Self::zero(self.dim, self.deg);
        }
        let mut out = Self::zero(self.dim, self.deg + 1);
        for (m, p) in &self.terms {
            for i in 0..self.dim {
                if m & (1 << i) != 0 {
                    continue;
                }
                let dp = p.deriv(i);
                if dp.is_zero() {
                    continue;
                }
                let s = merge_sign(1 << i, *m);
                out.add_term(m | (1 << i), if s < 0 { dp.neg() } else { dp });
            }
        }
        out
    }

    /// Interior product with the coordinate vector field `d/ds_i`.
    pub fn interior_coord(&self, i: usize) -> Form<S> {
        assert!(self.deg >= 1, "interior product of a 0-form");
        let mut out = Self::zero(self.dim, self.deg - 1);
        for (m, p) in &self.terms {
            if m & (1 << i) == 0 {
                continue;
            }
            let pos = indices(*m).iter().position(|&j| j == i).unwrap();
            out.add_term(m & !(1 << i), if pos % 2 == 1 { p.neg() } else { p.clone() });
        }
        out
    }

    /// Koszul operator: interior product with `s - center`.
    pub fn koszul(&self, center: &[S]) -> Form<S> {
        assert!(self.deg >= 1, "Koszul operator needs deg >= 1");
        let mut out = Self::zero(self.dim, self.deg - 1);
        for i in 0..self.dim {
            let ip = self.interior_coord(i);
            let c = center.get(i).cloned().unwrap_or_else(S::zero);
            let x = Poly::affine(self.dim, -c, &unit::<S>(self.dim, i));
            out = out.add(&ip.mul_poly(&x));
        }
        out
    }

    /// Pullback under the affine map `s = a + m t` into `new_dim` coordinates.
    pub fn pullback(&self, a: &[S], m: &[Vec<S>], new_dim: usize) -> Form<S> {
        let mut out = Form::zero(new_dim, self.deg.min(new_dim));
        if self.deg > new_dim {
            return out;
        }
        let targets = subsets(new_dim, self.deg);
        for (mi, p) in &self.terms {
            let rows = indices(*mi);
            let comp = p.compose_affine(a, m, new_dim);
            if comp.is_zero() {
                continue;
            }
            for mj in &targets {
                let cols = indices(*mj);
                let det = minor_det(m, &rows, &cols);
                if det.is_zero() {
                    continue;
                }
                out.add_term(*mj, comp.scale(&det));
            }
        }
        out
    }

    /// Hodge star for the diagonal frame metric `g`, divided by `sqrt(prod g)`.
    ///
    /// `a ^ hodge_scaled(b)` equals the pointwise inner product times
    /// `ds_0 ^ ... ^ ds_{d-1}`.
    pub fn hodge_scaled(&self, g: &[S]) -> Form<S> {
        let d = self.dim;
        let mut out = Self::zero(d, d - self.deg);
        for (m, p) in &self.terms {
            let comp = full_mask(d) & !m;
            let s = merge_sign(*m, comp);
            let mut w = S::one();
            for i in indices(*m) {
                w = w / g[i].clone();
            }
            let w = if s < 0 { -w } else { w };
            out.add_term(comp, p.scale(&w));
        }
        out
    }

    /// Inverse of [`Form::hodge_scaled`].
    pub fn hodge_scaled_inv(&self, g: &[S]) -> Form<S> {
        let d = self.dim;
        let k = d - self.deg;
        let mut prod = S::one();
        for gi in g.iter().take(d) {
            prod = prod * gi.clone();
        }
        self.hodge_scaled(g).scale(&(prod * sign_pow::<S>(k * (d - k))))
    }

    /// Codifferential `(-1)^k star^-1 d star` for the diagonal frame metric `g`.
    pub fn codifferential(&self, g: &[S]) -> Form<S> {
        assert!(self.deg >= 1, "codifferential of a 0-form");
        let inner = self.hodge_scaled(g).d();
        let out = inner.hodge_scaled_inv(g);
        if self.deg % 2 == 1 {
            out.neg()
        } else {
            out
        }
    }

    /// True Hodge star; fails when `sqrt(prod g)` is not representable.
    pub fn hodge(&self, g: &[S]) -> Result<Form<S>> {
        let mut prod = S::one();
        for gi in g.iter().take(self.dim) {
            prod = prod * gi.clone();
        }
        let root = prod
            .sqrt_exact()
            .ok_or_else(|| Error::Unsupported("Hodge star needs a rational volume factor".into()))?;
        Ok(self.hodge_scaled(g).scale(&root))
    }

    /// Integral of a top-degree form over the simplex with the given vertex
    /// coordinates, oriented by the vertex order.
    pub fn integrate_simplex(&self, verts: &[Vec<S>]) -> S {
        let d = self.dim;
        assert_eq!(self.deg, d, "integration needs a top-degree form");
        assert_eq!(verts.len(), d + 1, "simplex vertex count mismatch");
        let p = self.top_coeff();
        if p.is_zero() {
            return S::zero();
        }
        let (a, m) = simplex_map(verts);
        let det = det(&m);
        p.compose_affine(&a, &m, d).integrate_reference() * det
    }

    pub fn map<T: Scalar>(&self, g: impl Fn(&S) -> T + Copy) -> Form<T> {
        Form { dim: self.dim, deg: self.deg, terms: self.terms.iter().map(|(m, p)| (*m, p.map(g))).collect() }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|p| p.max_abs_coeff()).fold(0.0, f64::max)
    }

    /// Coefficient values at a point, ordered by `subsets(dim, deg)`.
    pub fn eval_f64(&self, x: &[f64]) -> Vec<f64> {
        subsets(self.dim, self.deg).iter().map(|m| self.coeff(*m).eval_f64(x)).collect()
    }
}

fn unit<S: Scalar>(d: usize, i: usize) -> Vec<S> {
    (0..d).map(|j| if j == i { S::one() } else { S::zero() }).collect()
}

/// Affine parametrization `t -> v0 + sum_j t_j (v_{j+1} - v0)` of a simplex.
pub fn simplex_map<S: Scalar>(verts: &[Vec<S>]) -> (Vec<S>, Vec<Vec<S>>) {
    let a = verts[0].clone();
    let n = a.len();
    let k = verts.len() - 1;
    let m = (0..n)
        .map(|i| (0..k).map(|j| verts[j + 1][i].clone() - verts[0][i].clone()).collect())
        .collect();
    (a, m)
}

/// Determinant of a square matrix given by rows.
pub fn det<S: Scalar>(m: &[Vec<S>]) -> S {
    let n = m.len();
    if n == 0 {
        return S::one();
    }
    let rows: Vec<usize> = (0..n).collect();
    minor_det(m, &rows, &rows)
}

/// Determinant of the submatrix with the given rows and columns (cofactor expansion).
pub fn minor_det<S: Scalar>(m: &[Vec<S>], rows: &[usize], cols: &[usize]) -> S {
    match rows.len() {
        0 => S::one(),
        1 => m[rows[0]][cols[0]].clone(),
        2 => {
            m[rows[0]][cols[0]].clone() * m[rows[1]][cols[1]].clone()
                - m[rows[0]][cols[1]].clone() * m[rows[1]][cols[0]].clone()
        }
        _ => {
            let mut acc = S::zero();
            for (j, &c) in cols.iter().enumerate() {
                let a = &m[rows[0]][c];
                if a.is_zero() {
                    continue;
                }
                let sub_cols: Vec<usize> = cols.iter().enumerate().filter(|(jj, _)| *jj != j).map(|(_, &x)| x).collect();
                let v = a.clone() * minor_det(m, &rows[1..], &sub_cols);
                acc = if j % 2 == 0 { acc + v } else { acc - v };
            }
            acc
        }
    }
}

/// Inner product of two forms against the diagonal metric, integrated over a
/// simplex (positive measure). This omits the constant factor `sqrt(prod g)`.
pub fn inner_simplex_scaled<S: Scalar>(a: &Form<S>, b: &Form<S>, g: &[S], verts: &[Vec<S>]) -> S {
    let top = a.wedge(&b.hodge_scaled(g));
    let v = top.integrate_simplex(verts);
    let (_, m) = simplex_map(verts);
    if det(&m).to_f64() < 0.0 {
        -v
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rint, Rat};

    fn x(d: usize) -> Poly<Rat> {
        Poly::var(d, 0)
    }

    #[test]
    fn wedge_sign_rule() {
        let dx = Form::<Rat>::basis(2, 0b01);
        let dy = Form::<Rat>::basis(2, 0b10);
        assert!(dx.wedge(&dx).is_zero());
        // (x dy) ^ dx = -x dx^dy
        let xdy = Form::term(2, 0b10, x(2));
        assert_eq!(xdy.wedge(&dx), Form::term(2, 0b11, x(2).neg()));
        assert_eq!(dx.wedge(&dy), Form::basis(2, 0b11));
    }

    #[test]
    fn derivative_examples() {
        let f = Form::scalar(x(2));
        assert_eq!(f.d(), Form::basis(2, 0b01));
        let xdy = Form::term(2, 0b10, x(2));
        assert_eq!(xdy.d(), Form::basis(2, 0b11));
    }

    #[test]
    fn koszul_examples() {
        let c = vec![rint(0), rint(0)];
        assert_eq!(Form::<Rat>::basis(2, 0b01).koszul(&c), Form::scalar(x(2)));
        let k = Form::<Rat>::basis(2, 0b11).koszul(&c);
        let expect = Form::term(2, 0b10, x(2)).sub(&Form::term(2, 0b01, Poly::var(2, 1)));
        assert_eq!(k, expect);
    }

    #[test]
    fn hodge_in_plane() {
        let g = vec![rint(1), rint(1)];
        assert_eq!(Form::<Rat>::basis(2, 0b01).hodge(&g).unwrap(), Form::basis(2, 0b10));
        assert_eq!(Form::<Rat>::basis(2, 0b10).hodge(&g).unwrap(), Form::basis(2, 0b01).neg());
        assert_eq!(Form::scalar(Poly::<Rat>::one(2)).hodge(&g).unwrap(), Form::basis(2, 0b11));
    }

    #[test]
    fn unit_triangle_integrals() {
        let tri = vec![vec![rint(0), rint(0)], vec![rint(1), rint(0)], vec![rint(0), rint(1)]];
        assert_eq!(Form::<Rat>::basis(2, 0b11).integrate_simplex(&tri), rat(1, 2));
        assert_eq!(Form::top(x(2)).integrate_simplex(&tri), rat(1, 6));
        let g = vec![rint(1), rint(1)];
        let dx = Form::<Rat>::basis(2, 0b01);
        let dy = Form::<Rat>::basis(2, 0b10);
        assert_eq!(inner_simplex_scaled(&dx, &dx, &g, &tri), rat(1, 2));
        assert_eq!(inner_simplex_scaled(&dx, &dy, &g, &tri), rint(0));
    }

    #[test]
    fn pullback_onto_edge() {
        // trace of x dx + y dy onto y = 0 parametrized by x is x dx
        let f = Form::term(2, 0b01, x(2)).add(&Form::term(2, 0b10, Poly::var(2, 1)));
        let tr = f.pullback(&[rint(0), rint(0)], &[vec![rint(1)], vec![rint(0)]], 1);
        assert_eq!(tr, Form::term(1, 0b1, x(1)));
        let dy = Form::<Rat>::basis(2, 0b10);
        assert!(dy.pullback(&[rint(0), rint(0)], &[vec![rint(1)], vec![rint(0)]], 1).is_zero());
    }
}

//! Sparse multivariate polynomials in monomial form.

use std::collections::BTreeMap;

use crate::scalar::Scalar;

/// Largest number of variables a polynomial may carry.
pub const MAX_VARS: usize = 4;

/// Exponent multi-index; entries past the variable count stay zero.
pub type Exps = [u8; MAX_VARS];

/// Polynomial `sum c_a s^a` in `nvars` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<S> {
    pub nvars: usize,
    pub terms: BTreeMap<Exps, S>,
}

pub fn total_degree(e: &Exps) -> usize {
    e.iter().map(|&x| x as usize).sum()
}

/// All exponent multi-indices in `nvars` variables of total degree `<= deg`,
/// ordered by degree then lexicographically.
pub fn monomials(nvars: usize, deg: i64) -> Vec<Exps> {
    let mut out = Vec::new();
    if deg < 0 {
        return out;
    }
    for t in 0..=deg as usize {
        out.extend(monomials_of_degree(nvars, t));
    }
    out
}

/// Exponents of total degree exactly `deg`.
pub fn monomials_of_degree(nvars: usize, deg: usize) -> Vec<Exps> {
    fn rec(nvars: usize, i: usize, left: usize, cur: &mut Exps, out: &mut Vec<Exps>) {
        if i + 1 == nvars {
            cur[i] = left as u8;
            out.push(*cur);
            cur[i] = 0;
            return;
        }
        for e in (0..=left).rev() {
            cur[i] = e as u8;
            rec(nvars, i + 1, left - e, cur, out);
        }
        cur[i] = 0;
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if deg == 0 {
            out.push([0; MAX_VARS]);
        }
        return out;
    }
    rec(nvars, 0, deg, &mut [0; MAX_VARS], &mut out);
    out
}

pub fn binomial(n: i64, k: i64) -> i64 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i64 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn factorial(n: usize) -> i128 {
    (1..=n as i128).product()
}

impl<S: Scalar> Poly<S> {
    pub fn zero(nvars: usize) -> Self {
        assert!(nvars <= MAX_VARS, "too many variables");
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: S) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term([0; MAX_VARS], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, S::one())
    }

    /// The coordinate function `s_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = [0; MAX_VARS];
        e[i] = 1;
        Self::monomial(nvars, e, S::one())
    }

    pub fn monomial(nvars: usize, e: Exps, c: S) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(e, c);
        p
    }

    /// Affine function `c0 + sum_i c[i] s_i`.
    pub fn affine(nvars: usize, c0: S, c: &[S]) -> Self {
        let mut p = Self::constant(nvars, c0);
        for (i, ci) in c.iter().enumerate() {
            let mut e = [0; MAX_VARS];
            e[i] = 1;
            p.add_term(e, ci.clone());
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, e: Exps, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                let nv = v.clone() + c;
                if nv.is_zero() {
                    self.terms.remove(&e);
                } else {
                    *v = nv;
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn coeff(&self, e: &Exps) -> S {
        self.terms.get(e).cloned().unwrap_or_else(S::zero)
    }

    pub fn degree(&self) -> i64 {
        self.terms.keys().map(|e| total_degree(e) as i64).max().unwrap_or(-1)
    }

    pub fn add(&self, other: &Poly<S>) -> Poly<S> {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &Poly<S>) {
        for (e, c) in &other.terms {
            self.add_term(*e, c.clone());
        }
    }

    pub fn sub(&self, other: &Poly<S>) -> Poly<S> {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }

    pub fn scale(&self, t: &S) -> Poly<S> {
        if t.is_zero() {
            return Self::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (*e, c.clone() * t.clone())).collect(),
        }
    }

    pub fn neg(&self) -> Poly<S> {
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect() }
    }

    pub fn mul(&self, other: &Poly<S>) -> Poly<S> {
        let mut out = Self::zero(self.nvars.max(other.nvars));
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let mut e = [0; MAX_VARS];
                for i in 0..MAX_VARS {
                    e[i] = ea[i] + eb[i];
                }
                out.add_term(e, ca.clone() * cb.clone());
            }
        }
        out
    }

    /// Partial derivative with respect to `s_i`.
    pub fn deriv(&self, i: usize) -> Poly<S> {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut ne = *e;
            ne[i] -= 1;
            out.add_term(ne, c.clone() * S::from_i64(e[i] as i64));
        }
        out
    }

    pub fn eval(&self, x: &[S]) -> S {
        let mut acc = S::zero();
        for (e, c) in &self.terms {
            let mut v = c.clone();
            for (i, &p) in e.iter().enumerate().take(self.nvars) {
                for _ in 0..p {
                    v = v * x[i].clone();
                }
            }
            acc = acc + v;
        }
        acc
    }

    /// Evaluates at a binary64 point (coefficients converted on the fly).
    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut v = c.to_f64();
                for (i, &p) in e.iter().enumerate().take(self.nvars) {
                    v *= x[i].powi(p as i32);
                }
                v
            })
            .sum()
    }

    /// Composition `p(a + m t)` where `m` has `nvars` rows and `new_vars` columns.
    pub fn compose_affine(&self, a: &[S], m: &[Vec<S>], new_vars: usize) -> Poly<S> {
        let lin: Vec<Poly<S>> = (0..self.nvars)
            .map(|i| {
                let row: Vec<S> = (0..new_vars).map(|j| m[i][j].clone()).collect();
                Poly::affine(new_vars, a[i].clone(), &row)
            })
            .collect();
        let mut powers: Vec<Vec<Poly<S>>> = vec![vec![Poly::one(new_vars)]; self.nvars];
        let mut out = Poly::zero(new_vars);
        for (e, c) in &self.terms {
            let mut term = Poly::constant(new_vars, c.clone());
            for i in 0..self.nvars {
                let p = e[i] as usize;
                while powers[i].len() <= p {
                    let next = powers[i].last().unwrap().mul(&lin[i]);
                    powers[i].push(next);
                }
                if p > 0 {
                    term = term.mul(&powers[i][p]);
                }
            }
            out.add_assign(&term);
        }
        out
    }

    /// Integral over the reference simplex `{t >= 0, sum t <= 1}`.
    pub fn integrate_reference(&self) -> S {
        let d = self.nvars;
        let mut acc = S::zero();
        for (e, c) in &self.terms {
            let num: i128 = e.iter().take(d).map(|&x| factorial(x as usize)).product();
            let den = factorial(d + total_degree(e));
            acc = acc + c.clone() * ratio_i128::<S>(num, den);
        }
        acc
    }

    pub fn map<T: Scalar>(&self, g: impl Fn(&S) -> T) -> Poly<T> {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(*e, g(c));
        }
        out
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.abs_f64()).fold(0.0, f64::max)
    }
}

fn ratio_i128<S: Scalar>(num: i128, den: i128) -> S {
    let g = gcd(num, den);
    let (n, d) = (num / g, den / g);
    big_int_scalar::<S>(n) / big_int_scalar::<S>(d)
}

fn big_int_scalar<S: Scalar>(v: i128) -> S {
    if let Ok(x) = i64::try_from(v) {
        return S::from_i64(x);
    }
    let base = S::from_i64(1i64 << 32);
    let hi = v >> 32;
    let lo = v & 0xffff_ffff;
    big_int_scalar::<S>(hi) * base + S::from_i64(lo as i64)
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.abs().max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rint, Rat};

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials(2, 2).len(), 6);
        assert_eq!(monomials(3, 3).len(), binomial(6, 3) as usize);
        assert!(monomials(2, -1).is_empty());
        assert_eq!(monomials(0, 3).len(), 1);
    }

    #[test]
    fn reference_integrals() {
        // int_T x dxdy over the unit triangle is 1/6
        let p = Poly::<Rat>::var(2, 0);
        assert_eq!(p.integrate_reference(), rat(1, 6));
        assert_eq!(Poly::<Rat>::one(3).integrate_reference(), rat(1, 6));
        let mut e = [0; MAX_VARS];
        e[0] = 2;
        e[1] = 1;
        // 2! 1! / 5! = 1/60
        assert_eq!(Poly::monomial(2, e, rint(1)).integrate_reference(), rat(1, 60));
    }

    #[test]
    fn affine_composition() {
        // p = s0^2, s0 = 1 + 2 t0 -> 1 + 4 t0 + 4 t0^2
        let mut e = [0; MAX_VARS];
        e[0] = 2;
        let p = Poly::monomial(1, e, rint(1));
        let q = p.compose_affine(&[rint(1)], &[vec![rint(2)]], 1);
        assert_eq!(q.eval(&[rint(3)]), rint(49));
    }
}

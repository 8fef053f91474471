//! Random polynomial forms with small integer coefficients for property checks.

use rand::Rng;

use super::form::{subsets, Form};
use super::poly::{monomials, Poly};
use crate::scalar::Scalar;

/// Polynomial of total degree `<= deg` with integer coefficients in `[-3, 3]`,
/// each monomial kept with probability `density`.
pub fn poly<S: Scalar>(rng: &mut impl Rng, nvars: usize, deg: usize, density: f64) -> Poly<S> {
    let mut p = Poly::zero(nvars);
    for e in monomials(nvars, deg as i64) {
        if rng.gen_bool(density) {
            p.add_term(e, S::from_i64(rng.gen_range(-3..=3)));
        }
    }
    p
}

/// Random `k`-form in `dim` coordinates with coefficients of degree `<= deg`.
pub fn form<S: Scalar>(rng: &mut impl Rng, dim: usize, k: usize, deg: usize) -> Form<S> {
    let mut f = Form::zero(dim, k);
    for m in subsets(dim, k) {
        f.add_term(m, poly(rng, dim, deg, 0.6));
    }
    f
}

/// Random coefficient vector with entries in `[-5, 5]`.
pub fn vector<S: Scalar>(rng: &mut impl Rng, n: usize) -> Vec<S> {
    (0..n).map(|_| S::from_i64(rng.gen_range(-5..=5))).collect()
}

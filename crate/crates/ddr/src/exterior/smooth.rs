//! Smooth (non-polynomial) ambient forms with separable coefficients, used as
//! test data by the harness.

use super::form::{indices, merge_sign, subsets, Subset};

/// Univariate factor of a separable term.
#[derive(Clone, Debug, PartialEq)]
pub enum Factor {
    /// `sin(a x + b)`
    Sin { a: f64, b: f64 },
    /// Polynomial with coefficients in increasing degree.
    Poly(Vec<f64>),
}

impl Factor {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Factor::Sin { a, b } => (a * x + b).sin(),
            Factor::Poly(c) => c.iter().rev().fold(0.0, |acc, ci| acc * x + ci),
        }
    }

    /// Derivative as a scaled factor.
    pub fn deriv(&self) -> (f64, Factor) {
        match self {
            Factor::Sin { a, b } => (*a, Factor::Sin { a: *a, b: b + std::f64::consts::FRAC_PI_2 }),
            Factor::Poly(c) => {
                let d: Vec<f64> = c.iter().enumerate().skip(1).map(|(i, ci)| i as f64 * ci).collect();
                (1.0, Factor::Poly(if d.is_empty() { vec![0.0] } else { d }))
            }
        }
    }

    pub fn constant(c: f64) -> Factor {
        Factor::Poly(vec![c])
    }
}

/// `coef * prod_i factors[i](x_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub factors: Vec<Factor>,
}

impl Term {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coef * self.factors.iter().zip(x).map(|(f, xi)| f.eval(*xi)).product::<f64>()
    }
}

/// Ambient `k`-form in `n` dimensions with separable coefficient terms.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothForm {
    pub n: usize,
    pub k: usize,
    /// Terms of each component, indexed like `subsets(n, k)`.
    pub comps: Vec<Vec<Term>>,
    /// Number of classical derivatives the data supports (reported only).
    pub smoothness: usize,
}

impl SmoothForm {
    pub fn zero(n: usize, k: usize) -> Self {
        let m = subsets(n, k).len();
        SmoothForm { n, k, comps: vec![Vec::new(); m], smoothness: usize::MAX }
    }

    fn slot(&self, m: Subset) -> usize {
        subsets(self.n, self.k).iter().position(|x| *x == m).expect("subset of wrong size")
    }

    pub fn add_term(&mut self, m: Subset, t: Term) {
        assert_eq!(t.factors.len(), self.n, "term arity mismatch");
        let i = self.slot(m);
        self.comps[i].push(t);
    }

    /// Component values at `x`, ordered by `subsets(n, k)`.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.comps.iter().map(|ts| ts.iter().map(|t| t.eval(x)).sum()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_empty())
    }

    pub fn scale(&self, s: f64) -> SmoothForm {
        let mut out = self.clone();
        for c in out.comps.iter_mut() {
            for t in c.iter_mut() {
                t.coef *= s;
            }
        }
        out
    }

    /// Exterior derivative.
    pub fn d(&self) -> SmoothForm {
        if self.k == self.n {
            return SmoothForm::zero(self.n, self.k);
        }
        let mut out = SmoothForm::zero(self.n, self.k + 1);
        out.smoothness = self.smoothness.saturating_sub(1);
        for (m, ts) in subsets(self.n, self.k).into_iter().zip(&self.comps) {
            for i in 0..self.n {
                if m & (1 << i) != 0 {
                    continue;
                }
                let sign = merge_sign(1 << i, m) as f64;
                for t in ts {
                    let (c, df) = t.factors[i].deriv();
                    let mut factors = t.factors.clone();
                    factors[i] = df;
                    out.add_term(m | (1 << i), Term { coef: t.coef * c * sign, factors });
                }
            }
        }
        out
    }

    /// Hodge star for the ambient orthonormal metric.
    pub fn hodge(&self) -> SmoothForm {
        let full: Subset = ((1u32 << self.n) - 1) as Subset;
        let mut out = SmoothForm::zero(self.n, self.n - self.k);
        out.smoothness = self.smoothness;
        for (m, ts) in subsets(self.n, self.k).into_iter().zip(&self.comps) {
            let c = full & !m;
            let s = merge_sign(m, c) as f64;
            for t in ts {
                out.add_term(c, Term { coef: t.coef * s, factors: t.factors.clone() });
            }
        }
        out
    }

    /// Inverse Hodge star.
    pub fn hodge_inv(&self) -> SmoothForm {
        let j = self.n - self.k;
        let s = if (j * (self.n - j)).is_multiple_of(2) { 1.0 } else { -1.0 };
        self.hodge().scale(s)
    }

    /// Codifferential `(-1)^k star^-1 d star`.
    pub fn codifferential(&self) -> SmoothForm {
        assert!(self.k >= 1, "codifferential of a 0-form");
        let out = self.hodge().d().hodge_inv();
        if self.k % 2 == 1 {
            out.scale(-1.0)
        } else {
            out
        }
    }

    /// Pointwise inner product of two forms of the same degree.
    pub fn dot_at(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    /// Largest absolute component value on the boundary of the unit box,
    /// sampled on a grid of `m` points per face direction, for the tangential
    /// components only.
    pub fn boundary_trace_defect(&self, m: usize) -> f64 {
        let mut worst: f64 = 0.0;
        let n = self.n;
        let subs = subsets(n, self.k);
        for face_dir in 0..n {
            for side in [0.0, 1.0] {
                let total = m.pow((n - 1) as u32);
                for idx in 0..total {
                    let mut x = vec![0.0; n];
                    let mut rem = idx;
                    for (i, xi) in x.iter_mut().enumerate() {
                        if i == face_dir {
                            *xi = side;
                        } else {
                            *xi = (rem % m) as f64 / (m - 1).max(1) as f64;
                            rem /= m;
                        }
                    }
                    let v = self.eval(&x);
                    for (s, vi) in subs.iter().zip(&v) {
                        if indices(*s).contains(&face_dir) {
                            continue;
                        }
                        worst = worst.max(vi.abs());
                    }
                }
            }
        }
        worst
    }
}

/// Named test data on the unit box.
pub mod library {
    use super::*;
    use std::f64::consts::PI;

    fn sin(a: f64, b: f64) -> Factor {
        Factor::Sin { a, b }
    }

    /// `k`-form whose tangential trace vanishes on the boundary of the unit box:
    /// every component carries `sin(pi x_i)` for each direction not in its index set.
    pub fn bump(n: usize, k: usize) -> SmoothForm {
        let mut out = SmoothForm::zero(n, k);
        for (slot, m) in subsets(n, k).into_iter().enumerate() {
            let factors = (0..n)
                .map(|i| if m & (1 << i) == 0 { sin(PI, 0.0) } else { sin(1.3 + 0.2 * i as f64, 0.3 + 0.1 * slot as f64) })
                .collect();
            out.add_term(m, Term { coef: 1.0 + 0.25 * slot as f64, factors });
        }
        out
    }

    /// `k`-form whose components all vanish on the boundary of the unit box, so
    /// that both its trace and the trace of its Hodge star vanish there.
    pub fn clamped(n: usize, k: usize) -> SmoothForm {
        let mut out = SmoothForm::zero(n, k);
        for (slot, m) in subsets(n, k).into_iter().enumerate() {
            let factors = (0..n)
                .map(|i| {
                    if m & (1 << i) == 0 {
                        sin(PI, 0.0)
                    } else {
                        // x (1 - x) (1 + a x)
                        let a = 0.3 + 0.2 * i as f64 + 0.1 * slot as f64;
                        Factor::Poly(vec![0.0, 1.0, a - 1.0, -a])
                    }
                })
                .collect();
            out.add_term(m, Term { coef: 1.0 + 0.25 * slot as f64, factors });
        }
        out
    }

    /// Generic smooth `k`-form without boundary conditions.
    pub fn trig(n: usize, k: usize) -> SmoothForm {
        let mut out = SmoothForm::zero(n, k);
        for (slot, m) in subsets(n, k).into_iter().enumerate() {
            let factors = (0..n).map(|i| sin(1.1 + 0.35 * i as f64 + 0.2 * slot as f64, 0.5 + 0.3 * i as f64)).collect();
            out.add_term(m, Term { coef: 1.0 - 0.3 * slot as f64, factors });
        }
        out
    }

    /// Polynomial `k`-form of total degree `deg`.
    pub fn polynomial(n: usize, k: usize, deg: usize) -> SmoothForm {
        let mut out = SmoothForm::zero(n, k);
        for (slot, m) in subsets(n, k).into_iter().enumerate() {
            let mut factors = vec![Factor::constant(1.0); n];
            let coeffs: Vec<f64> = (0..=deg).map(|j| 0.5 + 0.25 * ((j + slot) % 3) as f64).collect();
            factors[slot % n.max(1)] = Factor::Poly(coeffs);
            out.add_term(m, Term { coef: 1.0, factors });
        }
        out
    }

    /// `sin(pi x) dy` in the plane.
    pub fn sin_dy() -> SmoothForm {
        let mut out = SmoothForm::zero(2, 1);
        out.add_term(0b10, Term { coef: 1.0, factors: vec![sin(PI, 0.0), Factor::constant(1.0)] });
        out
    }

    pub fn by_name(name: &str, n: usize, k: usize) -> Option<SmoothForm> {
        match name {
            "bump" => Some(bump(n, k)),
            "clamped" => Some(clamped(n, k)),
            "trig" => Some(trig(n, k)),
            "sin-dy" if n == 2 && k == 1 => Some(sin_dy()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::library::*;
    use super::*;

    #[test]
    fn d_squared_vanishes() {
        for n in 1usize..=3 {
            for k in 0..n.saturating_sub(1) {
                let w = trig(n, k).d().d();
                for x in [[0.1, 0.7, 0.3], [0.9, 0.2, 0.5]] {
                    assert!(w.eval(&x[..n]).iter().all(|v| v.abs() < 1e-12));
                }
            }
        }
    }

    #[test]
    fn bump_has_zero_trace() {
        for n in 1..=3 {
            for k in 0..=n {
                assert!(bump(n, k).boundary_trace_defect(7) < 1e-12);
            }
        }
    }

    #[test]
    fn clamped_form_and_its_star_have_zero_trace() {
        for n in 1..=3 {
            for k in 0..=n {
                let w = clamped(n, k);
                assert!(w.boundary_trace_defect(7) < 1e-12);
                assert!(w.hodge().boundary_trace_defect(7) < 1e-12);
            }
        }
        assert!(bump(2, 1).hodge().boundary_trace_defect(7) > 0.1);
    }

    #[test]
    fn codifferential_of_radial_field() {
        // delta(x dx + y dy) = -2 in the plane
        let mut w = SmoothForm::zero(2, 1);
        w.add_term(0b01, Term { coef: 1.0, factors: vec![Factor::Poly(vec![0.0, 1.0]), Factor::constant(1.0)] });
        w.add_term(0b10, Term { coef: 1.0, factors: vec![Factor::constant(1.0), Factor::Poly(vec![0.0, 1.0])] });
        let v = w.codifferential().eval(&[0.3, 0.4]);
        assert!((v[0] + 2.0).abs() < 1e-14);
    }
}

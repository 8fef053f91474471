//! Collapsed Gauss-Legendre quadrature on simplices.

use std::sync::{Mutex, OnceLock};

use std::collections::HashMap;

/// Quadrature rule on the reference simplex `{t >= 0, sum t <= 1}`.
#[derive(Clone, Debug)]
pub struct Rule {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=m {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if m == 1 { z } else { p1 };
            let pm = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (z * p - pm) / (z * z - 1.0);
            if m == 1 {
                dp = 1.0;
            }
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = 0.5 * (1.0 - z);
        w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Rule exact for polynomials of total degree `<= order` on the reference `dim`-simplex.
pub fn simplex_rule(dim: usize, order: usize) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&(dim, order)) {
        return r.clone();
    }
    let rule = build_rule(dim, order);
    cache.lock().unwrap().insert((dim, order), rule.clone());
    rule
}

fn build_rule(dim: usize, order: usize) -> Rule {
    if dim == 0 {
        return Rule { dim, points: vec![vec![]], weights: vec![1.0] };
    }
    let m = (order + dim) / 2 + 1;
    let (x, w) = gauss_legendre(m);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let total = m.pow(dim as u32);
    for idx in 0..total {
        let mut rem = idx;
        let mut u = Vec::with_capacity(dim);
        let mut wu = 1.0;
        for _ in 0..dim {
            u.push(x[rem % m]);
            wu *= w[rem % m];
            rem /= m;
        }
        // t_i = u_i prod_{j<i} (1 - u_j), jacobian prod_i (1 - u_i)^(dim-1-i)
        let mut t = Vec::with_capacity(dim);
        let mut scale = 1.0;
        let mut jac = 1.0;
        for (i, ui) in u.iter().enumerate() {
            t.push(ui * scale);
            jac *= (1.0 - ui).powi((dim - 1 - i) as i32);
            scale *= 1.0 - ui;
        }
        points.push(t);
        weights.push(wu * jac);
    }
    Rule { dim, points, weights }
}

/// Integrates `g` over the simplex with the given vertices (unsigned measure).
pub fn integrate_simplex(verts: &[Vec<f64>], order: usize, g: impl Fn(&[f64]) -> f64) -> f64 {
    let k = verts.len() - 1;
    let n = verts[0].len();
    let rule = simplex_rule(k, order);
    let jac = simplex_volume_factor(verts);
    let mut acc = 0.0;
    let mut x = vec![0.0; n];
    for (t, w) in rule.points.iter().zip(&rule.weights) {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = verts[0][i] + t.iter().enumerate().map(|(j, tj)| tj * (verts[j + 1][i] - verts[0][i])).sum::<f64>();
        }
        acc += w * g(&x);
    }
    acc * jac
}

/// `sqrt(det(J^T J))` for the edge matrix `J` of a simplex.
pub fn simplex_volume_factor(verts: &[Vec<f64>]) -> f64 {
    let k = verts.len() - 1;
    let n = verts[0].len();
    let e: Vec<Vec<f64>> = (0..k).map(|j| (0..n).map(|i| verts[j + 1][i] - verts[0][i]).collect()).collect();
    let mut gram = nalgebra::DMatrix::<f64>::zeros(k, k);
    for a in 0..k {
        for b in 0..k {
            gram[(a, b)] = e[a].iter().zip(&e[b]).map(|(x, y)| x * y).sum();
        }
    }
    if k == 0 {
        return 1.0;
    }
    gram.determinant().max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_volumes() {
        for d in 1..=3 {
            let r = simplex_rule(d, 4);
            let s: f64 = r.weights.iter().sum();
            let fact: f64 = (1..=d).map(|i| i as f64).product();
            assert!((s - 1.0 / fact).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_on_monomials() {
        // int_T x^3 y^2 = 3! 2! / 7! on the unit triangle
        let r = simplex_rule(2, 5);
        let v: f64 = r.points.iter().zip(&r.weights).map(|(p, w)| w * p[0].powi(3) * p[1].powi(2)).sum();
        assert!((v - 12.0 / 5040.0).abs() < 1e-15);
    }
}

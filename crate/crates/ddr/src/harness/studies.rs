//! Error and residual functionals evaluated on one mesh.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::quad::TopQuad;
use crate::ddr::{smooth_moments, DdrSpace};
use crate::exterior::form::Form;
use crate::exterior::SmoothForm;
use crate::linalg::{dot, quad_form, solve_square, Mat};
use crate::lifting::Lifting;
use crate::mesh::Mesh;
use crate::scalar::{rat_from_f64, Scalar};
use crate::spaces::{decompose_koszul, full_basis, CellGeometry};
use crate::{par, Error, Result};

fn to_f64<S: Scalar>(w: &Form<S>) -> Form<f64> {
    w.map(|v| v.to_f64())
}

fn from_f64<S: Scalar>(v: f64) -> S {
    S::from_rat(&rat_from_f64(v).expect("non-finite moment"))
}

fn sign(e: usize) -> f64 {
    if e.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Interpolate of a smooth ambient form, with moments computed by quadrature.
pub fn interpolate_smooth<S: Scalar>(space: &DdrSpace<'_, S>, w: &SmoothForm, order: usize) -> Vec<S> {
    assert_eq!(w.k, space.k, "form degree mismatch");
    space.interpolate_by(|d, i, tests| {
        let tests: Vec<Form<f64>> = tests.iter().map(to_f64).collect();
        smooth_moments(space.mesh, d, i, w, &tests, order).into_iter().map(from_f64).collect()
    })
}

/// Fails when the tangential trace of `w` on the boundary of the unit box exceeds `1e-12`.
pub fn check_zero_trace(w: &SmoothForm) -> Result<()> {
    let defect = w.boundary_trace_defect(9);
    if defect > 1e-12 {
        return Err(Error::Compatibility { condition: "zero boundary trace of the test form".into(), defect });
    }
    Ok(())
}

/// As [`check_zero_trace`], for both `w` and its Hodge star.
pub fn check_clamped(w: &SmoothForm) -> Result<()> {
    check_zero_trace(w)?;
    let defect = w.hodge().boundary_trace_defect(9);
    if defect > 1e-12 {
        return Err(Error::Compatibility { condition: "zero boundary trace of the Hodge star of the test form".into(), defect });
    }
    Ok(())
}

/// Trimmed approximation of a smooth form on a top cell, in frame coordinates.
#[derive(Clone, Debug)]
pub struct TrimmedApprox {
    pub mu: Form<f64>,
    /// Squared L2 errors of `alpha - mu` and of its exterior derivative.
    pub l2: f64,
    pub h1: f64,
}

fn project_sampled(geo: &CellGeometry<f64>, q: &TopQuad, k: usize, basis: &[Form<f64>], vals: &[Vec<f64>]) -> Form<f64> {
    let g = geo.gram(basis);
    let rhs: Vec<f64> = basis.iter().map(|b| q.inner(k, vals, &q.sample_poly(b)) / q.vf).collect();
    let c = crate::linalg::solve_square(&g, &rhs).expect("basis Gram matrix is singular");
    crate::spaces::combine(basis, &c, q.n, k)
}

/// Builds `mu` in `P^-_{r+1} Lambda^k` on the top cell `i`: the projection on
/// `P_r`, corrected by the Koszul part of the projection of the remainder on `P_{r+1}`.
pub fn build_trimmed_approx(mesh: &Mesh, i: usize, r: usize, alpha: &SmoothForm, order: usize) -> TrimmedApprox {
    let n = mesh.n;
    let k = alpha.k;
    let q = TopQuad::new(mesh, i, order);
    let geo = CellGeometry::<f64>::new(mesh, n, i);
    let vals = q.sample(alpha);
    let mu = if k == 0 {
        project_sampled(&geo, &q, 0, &full_basis(n, r as i64 + 1, 0), &vals)
    } else {
        let hat = project_sampled(&geo, &q, k, &full_basis(n, r as i64, k), &vals);
        if k == n {
            hat
        } else {
            let hv = q.sample_poly(&hat);
            let rem: Vec<Vec<f64>> = vals.iter().zip(&hv).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect()).collect();
            let beta = project_sampled(&geo, &q, k, &full_basis(n, r as i64 + 1, k), &rem);
            let (_, rho) = decompose_koszul(n, r as i64 + 1, k, &beta).expect("projection lies in P_{r+1}");
            hat.add(&rho)
        }
    };
    let l2 = q.dist2(k, &vals, &q.sample_poly(&mu));
    let h1 = if k < n { q.dist2(k + 1, &q.sample(&alpha.d()), &q.sample_poly(&mu.d())) } else { 0.0 };
    TrimmedApprox { mu, l2, h1 }
}

/// Global approximation errors `(||alpha - mu||, ||d(alpha - mu)||)`.
pub fn approximation_errors(mesh: &Mesh, r: usize, alpha: &SmoothForm, order: usize) -> (f64, f64) {
    let parts = par::map(mesh.num_cells(mesh.n), |i| {
        let a = build_trimmed_approx(mesh, i, r, alpha, order);
        (a.l2, a.h1)
    });
    let (l2, h1) = parts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    (l2.sqrt(), h1.sqrt())
}

/// Errors of the primal consistency study.
#[derive(Clone, Debug, Default, Serialize)]
pub struct PrimalErrors {
    /// `||P I omega - omega||`.
    pub potential: f64,
    /// `||d_r I omega - d omega||` (zero for top-degree forms).
    pub derivative: f64,
    /// Root sum over top cells of the dual norm of `mu -> (I omega, mu)_f - int_f omega ^ star P mu`
    /// for the component norm of `mu`.
    pub inner: f64,
    /// Root sum over top cells of the same functional at a seeded random `mu`, divided by `||mu||_f`.
    pub inner_random: f64,
}

/// Dual norm `sqrt(g^T N^{-1} g)` of a functional `g` for the norm matrix `N`.
fn dual_norm(norm: &Mat<f64>, g: &[f64]) -> f64 {
    let z = solve_square(norm, g).expect("component norm matrix is singular");
    dot(g, &z).max(0.0).sqrt()
}

pub fn primal_errors<S: Scalar>(space: &DdrSpace<'_, S>, omega: &SmoothForm, order: usize, seed: u64) -> PrimalErrors {
    let mesh = space.mesh;
    let (n, k) = (mesh.n, space.k);
    let x = interpolate_smooth(space, omega, order);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mu: Vec<S> = crate::exterior::random::vector(&mut rng, space.dim);
    let domega = (k < n).then(|| omega.d());
    let parts = par::map(mesh.num_cells(n), |i| {
        let q = TopQuad::new(mesh, i, order);
        let loc = space.restrict(n, i, &x);
        let vals = q.sample(omega);
        let pot = q.sample_poly(&to_f64(&space.potential(n, i, &loc)));
        let e0 = q.dist2(k, &vals, &pot);
        let e1 = match &domega {
            Some(dw) => q.dist2(k + 1, &q.sample(dw), &q.sample_poly(&to_f64(&space.discrete_d(n, i, &loc)))),
            None => 0.0,
        };
        // functional g_j = (I omega, e_j)_f - int_f omega ^ star P e_j on the closure basis
        let xl: Vec<f64> = loc.iter().map(|v| v.to_f64()).collect();
        let lhs = space.local_inner_matrix(n, i).mul_vec(&xl);
        let g: Vec<f64> = (0..loc.len())
            .map(|j| {
                let mut e = vec![S::zero(); loc.len()];
                e[j] = S::one();
                lhs[j] - q.inner(k, &vals, &q.sample_poly(&to_f64(&space.potential(n, i, &e))))
            })
            .collect();
        let norm = space.component_norm_matrix(n, i);
        let mloc: Vec<f64> = space.restrict(n, i, &mu).iter().map(|v| v.to_f64()).collect();
        let mn = quad_form(&norm, &mloc).max(0.0).sqrt();
        let random = if mn > 0.0 { dot(&g, &mloc) / mn } else { 0.0 };
        (e0, e1, dual_norm(&norm, &g).powi(2), random * random)
    });
    let sum = |f: fn(&(f64, f64, f64, f64)) -> f64| parts.iter().map(f).sum::<f64>().sqrt();
    PrimalErrors { potential: sum(|p| p.0), derivative: sum(|p| p.1), inner: sum(|p| p.2), inner_random: sum(|p| p.3) }
}

/// Terms of the adjoint residual split through a trimmed approximation of `alpha`.
#[derive(Clone, Debug, Default, Serialize)]
pub struct AdjointSplit {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    /// `t3` rewritten with traces of the conforming lifting (when requested).
    pub t3_lift: Option<f64>,
}

/// Signed residual argument `int alpha ^ d_r omega - (-1)^{k+1} int d alpha ^ P omega`
/// for `omega` in `space`, of degree `n - k - 1`.
pub fn adjoint_argument<S: Scalar>(space: &DdrSpace<'_, S>, alpha: &SmoothForm, omega: &[S], order: usize) -> f64 {
    let mesh = space.mesh;
    let n = mesh.n;
    let k = alpha.k;
    assert_eq!(space.k + k + 1, n, "degrees of alpha and omega must add up to n - 1");
    let dalpha = alpha.d();
    let s = sign(k + 1);
    par::map(mesh.num_cells(n), |i| {
        let q = TopQuad::new(mesh, i, order);
        let loc = space.restrict(n, i, omega);
        let dw = q.sample_poly(&to_f64(&space.discrete_d(n, i, &loc)));
        let pw = q.sample_poly(&to_f64(&space.potential(n, i, &loc)));
        q.wedge(k, &q.sample(alpha), &dw) - s * q.wedge(k + 1, &q.sample(&dalpha), &pw)
    })
    .iter()
    .sum()
}

/// `|adjoint_argument|`, after checking the boundary condition on `alpha`.
pub fn adjoint_residual<S: Scalar>(space: &DdrSpace<'_, S>, alpha: &SmoothForm, omega: &[S], order: usize) -> Result<f64> {
    check_zero_trace(alpha)?;
    Ok(adjoint_argument(space, alpha, omega, order).abs())
}

/// The three terms of the adjoint residual argument. With `lifting`, the
/// boundary term is also evaluated with traces of the lifting of `omega`.
pub fn adjoint_split<S: Scalar>(
    space: &DdrSpace<'_, S>,
    r: usize,
    alpha: &SmoothForm,
    omega: &[S],
    order: usize,
    lifting: Option<&Lifting<'_, '_, S>>,
) -> AdjointSplit {
    let mesh = space.mesh;
    let n = mesh.n;
    let k = alpha.k;
    let dalpha = alpha.d();
    let s = sign(k + 1);
    let parts = par::map(mesh.num_cells(n), |i| {
        let q = TopQuad::new(mesh, i, order);
        let mu = build_trimmed_approx(mesh, i, r, alpha, order).mu;
        let loc = space.restrict(n, i, omega);
        let dw = q.sample_poly(&to_f64(&space.discrete_d(n, i, &loc)));
        let pw = q.sample_poly(&to_f64(&space.potential(n, i, &loc)));
        let a = q.sample(alpha);
        let m = q.sample_poly(&mu);
        let diff: Vec<Vec<f64>> = a.iter().zip(&m).map(|(x, y)| x.iter().zip(y).map(|(u, v)| u - v).collect()).collect();
        let dm = q.sample_poly(&mu.d());
        let da = q.sample(&dalpha);
        let ddiff: Vec<Vec<f64>> = dm.iter().zip(&da).map(|(x, y)| x.iter().zip(y).map(|(u, v)| u - v).collect()).collect();
        let t1 = q.wedge(k, &diff, &dw);
        let t2 = s * q.wedge(k + 1, &ddiff, &pw);
        let mut t3 = 0.0;
        let mut t3l = 0.0;
        for &(j, eps) in &mesh.cell(n, i).boundary {
            let tr = mesh.trace(n, i, n - 1, j, &mu);
            let sub = space.restrict(n - 1, j, omega);
            let p = to_f64(&space.potential(n - 1, j, &sub));
            let v = mesh.integrate(n - 1, j, &tr.wedge(&p));
            t3 -= s * eps as f64 * v;
            if let Some(l) = lifting {
                let cl = &l.cells[n - 1][j];
                let fe = &cl.fe;
                let coeffs: Vec<f64> = l.local(n - 1, j, omega).iter().map(|c| c.to_f64()).collect();
                let z: Form<S> = tr.map(|c| from_f64::<S>(*c));
                let row = fe.pairing_matrix(&[z]);
                let lw: f64 = (0..fe.dim()).map(|c| row[(0, c)].to_f64() * coeffs[c]).sum();
                // tr mu ^ L = (-1)^{k (n-k-1)} L ^ tr mu
                t3l += sign(k) * eps as f64 * sign(k * (n - k - 1)) * lw;
            }
        }
        (t1, t2, t3, t3l)
    });
    let mut out = AdjointSplit::default();
    let mut t3l = 0.0;
    for p in &parts {
        out.t1 += p.0;
        out.t2 += p.1;
        out.t3 += p.2;
        t3l += p.3;
    }
    out.t3_lift = lifting.map(|_| t3l);
    out
}

/// `|(I zeta, d mu)_{k,h} - int delta zeta ^ star P mu|` for `mu` in `lower`
/// (degree `k - 1`) and `zeta` a `k`-form whose trace and Hodge star trace vanish.
pub fn adjoint_residual_inner<S: Scalar>(
    lower: &DdrSpace<'_, S>,
    upper: &DdrSpace<'_, S>,
    zeta: &SmoothForm,
    mu: &[S],
    order: usize,
) -> Result<f64> {
    check_clamped(zeta)?;
    let mesh = lower.mesh;
    let n = mesh.n;
    let k = zeta.k;
    assert!(k >= 1 && upper.k == k && lower.k + 1 == k, "degree mismatch");
    let iz = interpolate_smooth(upper, zeta, order);
    let dmu = lower.global_d(upper, mu);
    let discrete = upper.global_inner(&iz, &dmu);
    let delta = zeta.codifferential();
    let l2: f64 = par::map(mesh.num_cells(n), |i| {
        let q = TopQuad::new(mesh, i, order);
        let pm = q.sample_poly(&to_f64(&lower.potential(n, i, &lower.restrict(n, i, mu))));
        q.inner(k - 1, &q.sample(&delta), &pm)
    })
    .iter()
    .sum();
    Ok((discrete - l2).abs())
}

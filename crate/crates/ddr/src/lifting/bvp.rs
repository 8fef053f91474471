//! Boundary value problems `d lambda = xi`, `tr lambda = theta` in conforming
//! trimmed spaces on a cell submesh: the minimum-norm solver and the explicit
//! constructive solver used as an oracle.

use std::collections::HashMap;

use crate::cochain::{de_rham, whitney, Complex};
use crate::exterior::form::Form;
use crate::linalg::{dot, min_norm_operator, quad_form, solve_square, Mat, MinNormOp};
use crate::mesh::Mesh;
use crate::scalar::{sign_pow, Scalar};
use crate::spaces::{full_basis, koszul_basis, ref_element, FeSpace, FullSpace};
use crate::{Error, Result};

/// Column matrix of a vector.
pub fn column<S: Scalar>(v: &[S]) -> Mat<S> {
    Mat::from_rows(v.iter().map(|x| vec![x.clone()]).collect(), 1)
}

/// Largest entry of `m` and whether every entry is negligible at `scale`.
fn worst<S: Scalar>(m: &Mat<S>, scale: f64) -> (bool, f64) {
    (m.data.iter().all(|v| v.negligible(scale)), m.max_abs())
}

/// Solution of one boundary value problem with its certificates.
#[derive(Clone, Debug)]
pub struct BvpSolution<S> {
    pub x: Vec<S>,
    /// Relative size of `kernel^T G x`, see [`FeBvp::kkt`].
    pub kkt: f64,
    /// Largest violation of `d x = xi` and `tr x = theta`.
    pub residual: f64,
}

/// The problem in `P^-_s Lambda^k(S_h(f))` for a mesh cell `f` of dimension `d > k`.
#[derive(Debug)]
pub struct FeBvp<S> {
    pub d: usize,
    pub k: usize,
    pub s: i64,
    pub trial: FeSpace<S>,
    /// `P^-_s Lambda^{k+1}(S_h(f))`, which contains `d` of the trial space.
    pub target: FeSpace<S>,
    pub complex: Complex,
    /// Trial degrees of freedom carried by the boundary submesh.
    pub boundary: Vec<bool>,
    pub target_boundary: Vec<bool>,
    pub dmat: Mat<S>,
    /// `d` on the target space, used to check that `xi` is closed.
    next_dmat: Option<Mat<S>>,
    pub gram: Mat<S>,
    pub op: MinNormOp<S>,
    /// Lowest-order spaces carrying the Whitney forms of degrees `k` and `k + 1`.
    whitney: (FeSpace<S>, FeSpace<S>),
    boundary_dofs: Vec<usize>,
    /// Signed coefficients of `int_f` on the target and `int_{partial f}` on the trial space (`d = k + 1`).
    integral_rows: Option<(Vec<S>, Vec<S>)>,
}

impl<S: Scalar> FeBvp<S> {
    pub fn on_cell(mesh: &Mesh, d: usize, i: usize, s: i64, k: usize) -> Result<Self> {
        if k >= d {
            return Err(Error::Unsupported(format!("boundary value problem for {k}-forms on a {d}-cell")));
        }
        let cell = mesh.cell(d, i);
        let trial = FeSpace::<S>::on_cell(mesh, d, i, s, k);
        let target = FeSpace::<S>::on_cell(mesh, d, i, s, k + 1);
        let complex = Complex::of_cell(mesh, d, i);
        let btops: Vec<Vec<usize>> =
            cell.boundary.iter().flat_map(|&(b, _)| mesh.cell(d - 1, b).submesh.iter().cloned()).collect();
        let boundary = trial.mask_within(&btops);
        let target_boundary = target.mask_within(&btops);
        let dmat = trial.dmat(&target);
        let next_dmat = (k + 2 <= d).then(|| target.dmat(&FeSpace::<S>::on_cell(mesh, d, i, s, k + 2)));
        let gram = trial.gram();
        let boundary_dofs: Vec<usize> = (0..trial.dim()).filter(|&j| boundary[j]).collect();
        let mut a = Mat::zeros(boundary_dofs.len() + target.dim(), trial.dim());
        for (row, &j) in boundary_dofs.iter().enumerate() {
            a[(row, j)] = S::one();
        }
        for r in 0..dmat.rows {
            for c in 0..dmat.cols {
                a[(boundary_dofs.len() + r, c)] = dmat[(r, c)].clone();
            }
        }
        let op = min_norm_operator(&gram, &a)?;
        let integral_rows = (k + 1 == d).then(|| {
            let mut top = vec![S::zero(); target.dim()];
            for (t, g) in target.tops.iter().enumerate() {
                top[target.index[&(g.clone(), 0)]] = if target.signs[t] > 0 { S::one() } else { -S::one() };
            }
            let chain = complex.boundary(d, &complex.fundamental_chain::<S>());
            let mut bnd = vec![S::zero(); trial.dim()];
            for (j, g) in complex.simplices[k].iter().enumerate() {
                if complex.on_boundary[k][j] {
                    bnd[trial.index[&(g.clone(), 0)]] = chain[j].clone();
                }
            }
            (top, bnd)
        });
        let whitney = (FeSpace::on_cell(mesh, d, i, 1, k), FeSpace::on_cell(mesh, d, i, 1, k + 1));
        Ok(FeBvp {
            d,
            k,
            s,
            trial,
            target,
            complex,
            boundary,
            target_boundary,
            dmat,
            next_dmat,
            gram,
            op,
            whitney,
            boundary_dofs,
            integral_rows,
        })
    }

    /// `theta` with its interior entries set to zero.
    pub fn boundary_part(&self, theta: &Mat<S>) -> Mat<S> {
        let mut out = theta.clone();
        for j in 0..out.rows {
            if !self.boundary[j] {
                for c in 0..out.cols {
                    out[(j, c)] = S::zero();
                }
            }
        }
        out
    }

    /// Checks the compatibility conditions for every column of the data.
    pub fn check(&self, xi: &Mat<S>, theta: &Mat<S>) -> Result<()> {
        let scale = xi.max_abs().max(theta.max_abs()).max(1.0);
        if let Some((top, bnd)) = &self.integral_rows {
            let mut defect = Mat::zeros(1, xi.cols);
            for c in 0..xi.cols {
                let lhs = dot(top, &xi.col_vec(c));
                let rhs = dot(bnd, &theta.col_vec(c));
                defect[(0, c)] = lhs - rhs;
            }
            let (ok, w) = worst(&defect, scale);
            if !ok {
                return Err(Error::Compatibility { condition: "integral".into(), defect: w });
            }
            return Ok(());
        }
        if let Some(next) = &self.next_dmat {
            let (ok, w) = worst(&next.mul(xi), scale);
            if !ok {
                return Err(Error::Compatibility { condition: "closedness".into(), defect: w });
            }
        }
        let dth = self.dmat.mul(&self.boundary_part(theta));
        let mut defect = Mat::zeros(0, xi.cols);
        for j in 0..self.target.dim() {
            if self.target_boundary[j] {
                defect.data.extend((0..xi.cols).map(|c| dth[(j, c)].clone() - xi[(j, c)].clone()));
                defect.rows += 1;
            }
        }
        let (ok, w) = worst(&defect, scale);
        if !ok {
            return Err(Error::Compatibility { condition: "boundary trace".into(), defect: w });
        }
        Ok(())
    }

    fn rhs(&self, xi: &Mat<S>, theta: &Mat<S>) -> Mat<S> {
        let nb = self.boundary_dofs.len();
        let mut b = Mat::zeros(nb + xi.rows, xi.cols);
        for (row, &j) in self.boundary_dofs.iter().enumerate() {
            for c in 0..xi.cols {
                b[(row, c)] = theta[(j, c)].clone();
            }
        }
        for r in 0..xi.rows {
            for c in 0..xi.cols {
                b[(nb + r, c)] = xi[(r, c)].clone();
            }
        }
        b
    }

    /// Largest violation of the two equations by the columns of `x`.
    pub fn residual(&self, x: &Mat<S>, xi: &Mat<S>, theta: &Mat<S>) -> f64 {
        let dx = self.dmat.mul(x);
        let mut r: f64 = 0.0;
        for (a, b) in dx.data.iter().zip(&xi.data) {
            r = r.max((a.clone() - b.clone()).abs_f64());
        }
        for &j in &self.boundary_dofs {
            for c in 0..x.cols {
                r = r.max((x[(j, c)].clone() - theta[(j, c)].clone()).abs_f64());
            }
        }
        r
    }

    /// Largest entry of `kernel^T G x` over the columns of `x`, relative to
    /// the bound `max|kernel^T G| max|x| dim`.
    pub fn kkt(&self, x: &Mat<S>) -> f64 {
        let kg = self.op.kernel.transpose().mul(&self.gram);
        let scale = kg.max_abs() * x.max_abs() * self.trial.dim() as f64;
        if scale == 0.0 {
            return 0.0;
        }
        kg.mul(x).max_abs() / scale
    }

    /// Minimum-norm solutions for every column of the data (`xi` in the target
    /// space, `theta` in the trial space with only boundary entries used).
    pub fn solve_columns(&self, xi: &Mat<S>, theta: &Mat<S>) -> Result<Mat<S>> {
        self.check(xi, theta)?;
        let b = self.rhs(xi, theta);
        let scale = b.max_abs().max(1.0);
        let (ok, w) = worst(&self.op.consistency.mul(&b), scale);
        if !ok {
            return Err(Error::Compatibility { condition: "constraints".into(), defect: w });
        }
        Ok(self.op.solve.mul(&b))
    }

    pub fn solve(&self, xi: &[S], theta: &[S]) -> Result<BvpSolution<S>> {
        let (xm, tm) = (column(xi), column(theta));
        let x = self.solve_columns(&xm, &tm)?;
        let residual = self.residual(&x, &xm, &tm);
        let kkt = self.kkt(&x);
        Ok(BvpSolution { x: x.col_vec(0), kkt, residual })
    }

    /// Squared scaled L2 norm of a trial coefficient vector.
    pub fn norm2(&self, x: &[S]) -> S {
        quad_form(&self.gram, x)
    }

    /// Explicit solution built from the cochain solver, Whitney forms and an
    /// induction on the dimension of the subsimplices carrying the degrees of freedom.
    pub fn explicit(&self, xi: &[S], theta: &[S]) -> Result<Vec<S>> {
        self.check(&column(xi), &column(theta))?;
        let k = self.k;
        let cx = &self.complex;
        let (w0, w1) = (&self.whitney.0, &self.whitney.1);
        let xi_c = de_rham(&self.target, cx, xi);
        let th_c = cx.boundary_part(k, &de_rham(&self.trial, cx, theta));
        let lam_c = cx.solve_bvp(k, &xi_c, &th_c)?;
        let w_lam = w0.raise(&whitney(w0, cx, &lam_c), &self.trial);
        let xi_hat: Vec<S> =
            xi.iter().zip(w1.raise(&whitney(w1, cx, &xi_c), &self.target)).map(|(a, b)| a.clone() - b).collect();
        let th_hat: Vec<S> =
            theta.iter().zip(w0.raise(&whitney(w0, cx, &th_c), &self.trial)).map(|(a, b)| a.clone() - b).collect();

        let mut lam = vec![S::zero(); self.trial.dim()];
        let mut decomp: HashMap<usize, Decomposition<S>> = HashMap::new();
        for dd in k..=self.d {
            for (gi, g) in cx.simplices[dd].iter().enumerate() {
                let el = ref_element::<S>(dd, self.s, k);
                let keys: Vec<usize> = el.interior().iter().map(|&l| self.trial.index[&(g.clone(), el.dofs[l].1)]).collect();
                if cx.on_boundary[dd][gi] {
                    for &j in &keys {
                        lam[j] = th_hat[j].clone();
                    }
                    continue;
                }
                if dd == k || keys.is_empty() {
                    continue;
                }
                let dec = decomp.entry(dd).or_insert_with(|| Decomposition::new(dd, self.s, k));
                let lam0 = self.local_form(&el, g, &lam, true);
                let xi_g = self.local_form(&ref_element::<S>(dd, self.s, k + 1), g, &xi_hat, false);
                let sgn = sign_pow::<S>(k + 1);
                for (q, &j) in keys.iter().enumerate() {
                    let om = &dec.omega[q];
                    let a = xi_g.wedge(om).top_coeff().integrate_reference();
                    let b = lam0.wedge(om).d().top_coeff().integrate_reference();
                    lam[j] = sgn.clone() * a - sgn.clone() * b;
                }
            }
        }
        Ok(lam.into_iter().zip(w_lam).map(|(a, b)| a + b).collect())
    }

    /// Form on the reference simplex of `g` with the degrees of freedom of `c`
    /// (those attached to `g` itself dropped when `skip_interior`).
    fn local_form(&self, el: &crate::spaces::RefElement<S>, g: &[usize], c: &[S], skip_interior: bool) -> Form<S> {
        let space = if el.k == self.k { &self.trial } else { &self.target };
        let mut out = Form::zero(el.d, el.k);
        for (l, (sub, w)) in el.dofs.iter().enumerate() {
            if skip_interior && sub.len() == el.d + 1 {
                continue;
            }
            let key: Vec<usize> = sub.iter().map(|&v| g[v]).collect();
            let v = &c[space.index[&(key, *w)]];
            if !v.is_zero() {
                out.add_assign_scaled(&el.basis[l], v);
            }
        }
        out
    }
}

/// Koszul parts `omega_w` of the weights `mu_w = d omega_w + zeta_w` of the
/// interior degrees of freedom on a reference `dd`-simplex.
struct Decomposition<S> {
    omega: Vec<Form<S>>,
}

impl<S: Scalar> Decomposition<S> {
    fn new(dd: usize, s: i64, k: usize) -> Self {
        let m = dd - k;
        let a = s + k as i64 - dd as i64 - 1;
        let weights = full_basis::<S>(dd, a, m);
        let om = koszul_basis::<S>(dd, a, m - 1);
        let ze = koszul_basis::<S>(dd, a - 1, m);
        let space = FullSpace::new(dd, a, m);
        let n = space.dim();
        let mut mat = Mat::zeros(n, n);
        for (c, f) in om.iter().map(|w| w.d()).chain(ze.iter().cloned()).enumerate() {
            for (r, v) in space.coeffs(&f).into_iter().enumerate() {
                mat[(r, c)] = v;
            }
        }
        let omega = weights
            .iter()
            .map(|w| {
                let y = solve_square(&mat, &space.coeffs(w)).expect("Koszul decomposition is an isomorphism");
                let mut f = Form::zero(dd, m - 1);
                for (b, c) in om.iter().zip(&y) {
                    f.add_assign_scaled(b, c);
                }
                f
            })
            .collect();
        Decomposition { omega }
    }
}

//! Petrov-Galerkin problems in bubble spaces: find `tau` in the interior
//! trimmed space of each top simplex with
//! `(-1)^k int_F tau ^ d nu = int_F zeta ^ nu` for all `nu` in `kappa_f P_{s-1} Lambda^{d-k+1}(F)`.

use crate::exterior::form::Form;
use crate::linalg::{min_norm_operator, Mat, MinNormOp};
use crate::mesh::Mesh;
use crate::scalar::{sign_pow, Scalar};
use crate::spaces::{koszul_basis, FeSpace};
use crate::{Error, Result};

/// Bubble problem for data of form degree `k >= 1` on a `d`-cell.
#[derive(Debug)]
pub struct BubbleProblem<S> {
    pub d: usize,
    pub k: usize,
    pub s: i64,
    /// `P^-_{s+d-k+1} Lambda^{k-1}` on the submesh; `tau` lives in its bubble part.
    pub space: FeSpace<S>,
    /// Test forms `nu`, Koszul centered at the cell base point.
    pub tests: Vec<Form<S>>,
    /// Interior degrees of freedom of each top simplex.
    pub interior: Vec<Vec<usize>>,
    /// Per top simplex: the matrix `(-1)^k int tau ^ d nu_i` on its interior degrees of freedom.
    pub matrices: Vec<Mat<S>>,
    ops: Vec<MinNormOp<S>>,
}

impl<S: Scalar> BubbleProblem<S> {
    pub fn on_cell(mesh: &Mesh, d: usize, i: usize, s: i64, k: usize) -> Result<Self> {
        if k == 0 || k > d {
            return Err(Error::Unsupported(format!("bubble problem for {k}-forms on a {d}-cell")));
        }
        let space = FeSpace::<S>::on_cell(mesh, d, i, s + d as i64 - k as i64 + 1, k - 1);
        let tests = koszul_basis::<S>(d, s - 1, d - k);
        let sgn = sign_pow::<S>(k);
        let locals = space.reference.interior();
        let mut interior = Vec::new();
        let mut matrices = Vec::new();
        let mut ops = Vec::new();
        for t in 0..space.tops.len() {
            let dnu: Vec<Form<S>> = tests.iter().map(|nu| space.to_reference(t, &nu.d())).collect();
            let mut a = Mat::zeros(tests.len(), locals.len());
            for (q, &l) in locals.iter().enumerate() {
                let phi = &space.reference.basis[l];
                for (r, dn) in dnu.iter().enumerate() {
                    a[(r, q)] = sgn.clone() * phi.wedge(dn).top_coeff().integrate_reference();
                }
            }
            let g = space.reference.gram(&space.maps[t].1, &space.metric);
            let gi = Mat::from_rows(
                locals.iter().map(|&p| locals.iter().map(|&q| g[(p, q)].clone()).collect()).collect(),
                locals.len(),
            );
            ops.push(min_norm_operator(&gi, &a)?);
            matrices.push(a);
            interior.push(space.bubble_dofs(t));
        }
        Ok(BubbleProblem { d, k, s, space, tests, interior, matrices, ops })
    }

    /// Right-hand side rows `int_F b ^ nu_i` for polynomial forms `b` given in host coordinates.
    pub fn rhs_poly(&self, t: usize, basis: &[Form<S>]) -> Mat<S> {
        let mut out = Mat::zeros(self.tests.len(), basis.len());
        for (r, nu) in self.tests.iter().enumerate() {
            for (c, b) in basis.iter().enumerate() {
                out[(r, c)] = self.space.to_reference(t, &b.wedge(nu)).top_coeff().integrate_reference();
            }
        }
        out
    }

    /// Right-hand side rows `int_F phi_j ^ nu_i` for the basis of a finite element
    /// space of degree `k` on the same submesh.
    pub fn rhs_fe(&self, t: usize, fe: &FeSpace<S>) -> Mat<S> {
        let mut out = Mat::zeros(self.tests.len(), fe.dim());
        for (r, nu) in self.tests.iter().enumerate() {
            let nr = fe.to_reference(t, nu);
            for (l, phi) in fe.reference.basis.iter().enumerate() {
                out[(r, fe.local[t][l])] = phi.wedge(&nr).top_coeff().integrate_reference();
            }
        }
        out
    }

    /// Minimum-norm solutions for each column of the per-top right-hand sides,
    /// as coefficients in [`BubbleProblem::space`].
    pub fn solve(&self, rhs: &[Mat<S>]) -> Result<Mat<S>> {
        let cols = rhs.first().map_or(0, |m| m.cols);
        let mut out = Mat::zeros(self.space.dim(), cols);
        for (t, b) in rhs.iter().enumerate() {
            let scale = b.max_abs().max(1.0);
            if !self.ops[t].consistency.mul(b).data.iter().all(|v| v.negligible(scale)) {
                return Err(Error::Inconsistent(format!("bubble problem on top simplex {t}")));
            }
            let x = self.ops[t].solve.mul(b);
            for (q, &g) in self.interior[t].iter().enumerate() {
                for c in 0..cols {
                    out[(g, c)] = x[(q, c)].clone();
                }
            }
        }
        Ok(out)
    }

    /// Largest violation of the equations on every top simplex.
    pub fn residual(&self, tau: &Mat<S>, rhs: &[Mat<S>]) -> f64 {
        let mut worst: f64 = 0.0;
        for (t, b) in rhs.iter().enumerate() {
            let local = tau.select_rows(&self.interior[t]);
            let r = self.matrices[t].mul(&local);
            for (x, y) in r.data.iter().zip(&b.data) {
                worst = worst.max((x.clone() - y.clone()).abs_f64());
            }
        }
        worst
    }
}

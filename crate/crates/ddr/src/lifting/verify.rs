//! Verification of the lifting: projection property, right inverse of the
//! interpolator, single-valued traces, preservation of homogeneous boundary
//! values and the boundedness ratios.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::Lifting;
use crate::ddr::DdrSpace;
use crate::linalg::Mat;
use crate::scalar::Scalar;
use crate::spaces::{trimmed_basis, FeSpace};
use crate::{par, Rat};

/// Outcome of the checks on one cell.
#[derive(Clone, Debug, Default, Serialize)]
pub struct CellReport {
    pub d: usize,
    pub i: usize,
    /// Largest defect of `int L ^ z = int P ^ z` over `z` in `P^-_{r+1} Lambda^{d-k}`.
    pub projection: f64,
    /// Largest defect of `I L = Id` on the own block.
    pub right_inverse: f64,
    /// Largest mismatch between the trace of `L` and the boundary liftings.
    pub trace: f64,
    /// `sup ||L w|| / |w|` over the closure.
    pub ratio0: f64,
    /// `sup ||d L w|| / |d w|` over the closure (cells with `d > k`).
    pub ratio1: Option<f64>,
    /// Largest entry of the `d L` Gram matrix on the kernel of the discrete derivative.
    pub kernel_defect: Option<f64>,
}

/// Summary of the checks on every cell of a mesh.
#[derive(Clone, Debug, Default, Serialize)]
pub struct LiftReport {
    pub r: usize,
    pub k: usize,
    pub exact: bool,
    pub cells: usize,
    pub projection: f64,
    pub right_inverse: f64,
    pub trace: f64,
    /// Largest trace of `L w` on the domain boundary for `w` vanishing there.
    pub boundary: f64,
    pub kkt: f64,
    pub residual: f64,
    pub d_defect: f64,
    /// Largest ratios per cell dimension (index `d`, zero below `k`).
    pub ratio0: Vec<f64>,
    pub ratio1: Vec<f64>,
    pub kernel_defect: f64,
    pub passed: bool,
    #[serde(skip)]
    pub per_cell: Vec<CellReport>,
}

/// Tolerance on a defect of magnitude `scale`: zero for exact arithmetic.
fn tol<S: Scalar>(scale: f64) -> f64 {
    if S::EXACT {
        0.0
    } else {
        1e-9 * scale.max(1.0)
    }
}

impl<S: Scalar> Lifting<'_, '_, S> {
    /// Residual matrix of the projection property on `(d, i)`, for all local vectors.
    pub fn projection_defect(&self, d: usize, i: usize) -> Mat<S> {
        let sp = self.space;
        let (r, k) = (sp.r, sp.k);
        let tests = trimmed_basis::<Rat>(d, r as i64 + 1, d - k);
        let tests: Vec<_> = tests.iter().map(|z| z.map(S::from_rat)).collect();
        let cl = &self.cells[d][i];
        let lhs = cl.fe.pairing_matrix(&tests).mul(&cl.op);
        let integ = &sp.integrals[d][i];
        let b = &sp.bases[d];
        let pair = Mat::from_rows(
            tests.iter().map(|z| b.full_basis.iter().map(|e| integ.pairing(e, z)).collect()).collect(),
            b.full_basis.len(),
        );
        let rhs = pair.mul(&sp.cell(d, i).pot);
        let mut out = lhs;
        for (x, y) in out.data.iter_mut().zip(rhs.data) {
            *x = x.clone() - y;
        }
        out
    }

    /// `I L - Id` on the own block of `(d, i)`, for all local vectors.
    pub fn right_inverse_defect(&self, d: usize, i: usize) -> Mat<S> {
        let sp = self.space;
        let data = sp.cell(d, i);
        let cl = &self.cells[d][i];
        let mut out = data.mass_inv.mul(&cl.fe.pairing_matrix(&sp.bases[d].tests).mul(&cl.op));
        for (q, c) in data.block_range(d, i).enumerate() {
            out[(q, c)] = out[(q, c)].clone() - S::one();
        }
        out
    }

    /// Largest mismatch between the trace of `L` on `(d, i)` and the liftings of its boundary cells.
    pub fn trace_defect(&self, d: usize, i: usize) -> f64 {
        let sp = self.space;
        if d == sp.k {
            return 0.0;
        }
        let cl = &self.cells[d][i];
        let data = sp.cell(d, i);
        let mut worst: f64 = 0.0;
        for &(j, _) in &sp.mesh.cell(d, i).boundary {
            let sub = &self.cells[d - 1][j];
            let raised = FeSpace::<S>::on_cell(sp.mesh, d - 1, j, cl.fe.s, sp.k);
            let expect = sub.fe.raise_matrix(&raised).mul(&sub.op);
            let map = sp.embed(data, sp.cell(d - 1, j));
            let mut seen = vec![false; data.local_dim()];
            for (row, key) in raised.dofs.iter().enumerate() {
                let src = cl.fe.index[key];
                for (c, &tc) in map.iter().enumerate() {
                    seen[tc] = true;
                    worst = worst.max((cl.op[(src, tc)].clone() - expect[(row, c)].clone()).abs_f64());
                }
                for (tc, s) in seen.iter().enumerate() {
                    if !s {
                        worst = worst.max(cl.op[(src, tc)].abs_f64());
                    }
                }
            }
        }
        worst
    }

    /// Largest trace on boundary faces of top cells of the lifting of vectors
    /// vanishing on every cell in the domain boundary.
    pub fn boundary_defect(&self) -> f64 {
        let sp = self.space;
        let mesh = sp.mesh;
        let n = mesh.n;
        if sp.k >= n {
            return 0.0;
        }
        let per = par::map(mesh.num_cells(n), |i| {
            let cl = &self.cells[n][i];
            let data = sp.cell(n, i);
            let free: Vec<usize> = data
                .closure
                .iter()
                .filter(|&&(dd, j)| !mesh.cell(dd, j).on_boundary)
                .flat_map(|&(dd, j)| data.block_range(dd, j))
                .collect();
            let mut worst: f64 = 0.0;
            for &(j, _) in &mesh.cell(n, i).boundary {
                if !mesh.cell(n - 1, j).on_boundary {
                    continue;
                }
                let face = FeSpace::<S>::on_cell(mesh, n - 1, j, cl.fe.s, sp.k);
                for key in &face.dofs {
                    let row = cl.fe.index[key];
                    for &c in &free {
                        worst = worst.max(cl.op[(row, c)].abs_f64());
                    }
                }
            }
            worst
        });
        per.into_iter().fold(0.0, f64::max)
    }

    /// Checks every cell, using `next` (the space of `(k+1)`-forms) for the derivative ratio.
    pub fn verify(&self, next: Option<&DdrSpace<'_, S>>) -> LiftReport {
        let sp = self.space;
        let mesh = sp.mesh;
        let (r, k) = (sp.r, sp.k);
        let mut pairs = Vec::new();
        for d in k..=mesh.n {
            pairs.extend((0..mesh.num_cells(d)).map(|i| (d, i)));
        }
        let per_cell: Vec<CellReport> = par::map_with(pairs.len(), self.options.sequential, |q| {
            let (d, i) = pairs[q];
            let (ratio0, ratio1, kernel_defect) = self.ratios(d, i, next);
            CellReport {
                d,
                i,
                projection: self.projection_defect(d, i).max_abs(),
                right_inverse: self.right_inverse_defect(d, i).max_abs(),
                trace: self.trace_defect(d, i),
                ratio0,
                ratio1,
                kernel_defect,
            }
        });
        let mut rep = LiftReport {
            r,
            k,
            exact: S::EXACT,
            cells: per_cell.len(),
            boundary: self.boundary_defect(),
            ratio0: vec![0.0; mesh.n + 1],
            ratio1: vec![0.0; mesh.n + 1],
            ..Default::default()
        };
        for c in &per_cell {
            rep.projection = rep.projection.max(c.projection);
            rep.right_inverse = rep.right_inverse.max(c.right_inverse);
            rep.trace = rep.trace.max(c.trace);
            rep.ratio0[c.d] = rep.ratio0[c.d].max(c.ratio0);
            if let Some(v) = c.ratio1 {
                rep.ratio1[c.d] = rep.ratio1[c.d].max(v);
            }
            if let Some(v) = c.kernel_defect {
                rep.kernel_defect = rep.kernel_defect.max(v);
            }
        }
        for layer in &self.cells {
            for cl in layer {
                let g = &cl.diagnostics;
                rep.kkt = rep.kkt.max(g.lambda_kkt).max(g.chi_kkt);
                rep.residual = rep.residual.max(g.lambda_residual).max(g.chi_residual).max(g.bubble_residual);
                rep.d_defect = rep.d_defect.max(g.d_defect);
            }
        }
        let t = tol::<S>(1.0);
        rep.passed = [rep.projection, rep.right_inverse, rep.trace, rep.boundary, rep.kkt, rep.residual, rep.d_defect]
            .iter()
            .all(|&v| v <= t)
            && rep.kernel_defect <= 1e-8;
        rep.per_cell = per_cell;
        rep
    }

    /// Boundedness ratios of `(d, i)` and the kernel defect of the derivative bound.
    pub fn ratios(&self, d: usize, i: usize, next: Option<&DdrSpace<'_, S>>) -> (f64, Option<f64>, Option<f64>) {
        let sp = self.space;
        let cl = &self.cells[d][i];
        let vf = sp.mesh.cell(d, i).volume_factor();
        let op = cl.op.map(|v| v.to_f64());
        let g = cl.fe.gram().map(|v| v.to_f64() * vf);
        let a = op.transpose().mul(&g.mul(&op));
        let (r0, _) = generalized_max(&a, &sp.component_norm_matrix(d, i));
        let (Some(next), Some(dfe), Some(dop)) = (next, cl.dfe.as_ref(), cl.dop.as_ref()) else {
            return (r0, None, None);
        };
        let dop = dop.map(|v| v.to_f64());
        let g1 = dfe.gram().map(|v| v.to_f64() * vf);
        let a1 = dop.transpose().mul(&g1.mul(&dop));
        let dm = local_derivative(sp, next, d, i).map(|v| v.to_f64());
        let b1 = dm.transpose().mul(&next.component_norm_matrix(d, i).mul(&dm));
        let (r1, kd) = generalized_max(&a1, &b1);
        (r0, Some(r1), Some(kd))
    }
}

/// Matrix of the discrete derivative from the closure of `(d, i)` in `space`
/// to its closure in `next`.
pub fn local_derivative<S: Scalar>(space: &DdrSpace<'_, S>, next: &DdrSpace<'_, S>, d: usize, i: usize) -> Mat<S> {
    let data = space.cell(d, i);
    let ndata = next.cell(d, i);
    let mut out = Mat::zeros(ndata.local_dim(), data.local_dim());
    for &(dd, j) in &ndata.closure {
        let sub = space.cell(dd, j);
        let nsub = next.cell(dd, j);
        let integ = &space.integrals[dd][j];
        let tests = &next.bases[dd].tests;
        let full1 = &space.bases[dd].full1_basis;
        let pair = Mat::from_rows(tests.iter().map(|z| full1.iter().map(|e| integ.pairing(e, z)).collect()).collect(), full1.len());
        let block = nsub.mass_inv.mul(&pair.mul(sub.dmat.as_ref().expect("derivative on a cell above k")));
        let map = space.embed(data, sub);
        for (q, row) in ndata.block_range(dd, j).enumerate() {
            for (c, &tc) in map.iter().enumerate() {
                out[(row, tc)] = block[(q, c)].clone();
            }
        }
    }
    out
}

/// `sqrt` of the largest `x^T a x / x^T b x` over the range of `b`, and the largest
/// entry of `a` on the kernel of `b` relative to the largest entry of `a`.
pub fn generalized_max(a: &Mat<f64>, b: &Mat<f64>) -> (f64, f64) {
    let n = b.rows;
    if n == 0 {
        return (0.0, 0.0);
    }
    let bm = DMatrix::from_row_slice(n, n, &b.data);
    let am = DMatrix::from_row_slice(n, n, &a.data);
    let eig = SymmetricEigen::new((&bm + bm.transpose()) * 0.5);
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let keep: Vec<usize> = (0..n).filter(|&q| eig.eigenvalues[q] > 1e-10 * top).collect();
    let null: Vec<usize> = (0..n).filter(|&q| eig.eigenvalues[q] <= 1e-10 * top).collect();
    let w = DMatrix::from_fn(n, keep.len(), |row, c| eig.eigenvectors[(row, keep[c])] / eig.eigenvalues[keep[c]].sqrt());
    let c = w.transpose() * &am * &w;
    let ratio = if keep.is_empty() {
        0.0
    } else {
        SymmetricEigen::new((&c + c.transpose()) * 0.5).eigenvalues.iter().fold(0.0f64, |m, v| m.max(*v)).max(0.0).sqrt()
    };
    let scale = am.amax().max(f64::MIN_POSITIVE);
    let z = DMatrix::from_fn(n, null.len(), |row, c| eig.eigenvectors[(row, null[c])]);
    let kd = if null.is_empty() { 0.0 } else { (z.transpose() * &am * &z).amax() / scale };
    (ratio, kd)
}


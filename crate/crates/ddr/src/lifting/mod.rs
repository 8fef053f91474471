//! The conforming lifting of discrete de Rham vectors into piecewise
//! polynomial forms on the simplicial submesh.
//!
//! Every local lifting is stored as a matrix from the local closure vector of
//! the cell to the coefficients of a conforming trimmed finite element space
//! `P^-_{r+2+d-k} Lambda^k` on the cell submesh.

mod bubble;
mod bvp;
pub mod verify;

#[cfg(test)]
mod tests;

pub use bubble::BubbleProblem;
pub use bvp::{column, BvpSolution, FeBvp};

use serde::Serialize;

use crate::ddr::DdrSpace;
use crate::linalg::Mat;
use crate::scalar::Scalar;
use crate::spaces::FeSpace;
use crate::{par, Result};

/// Switches of the lifting construction.
#[derive(Clone, Copy, Debug, Default)]
pub struct LiftOptions {
    /// Omits the correction `chi + psi` on cells of dimension `d >= k + 2`.
    pub drop_correction: bool,
    /// Builds cells one at a time instead of on the worker pool.
    pub sequential: bool,
}

/// Certificates gathered while building one local lifting.
#[derive(Clone, Debug, Default, Serialize)]
pub struct LocalDiagnostics {
    /// Largest violation of `d lambda = xi`, `tr lambda = theta`.
    pub lambda_residual: f64,
    /// Largest entry of the minimum-norm certificate of `lambda`.
    pub lambda_kkt: f64,
    pub chi_residual: f64,
    pub chi_kkt: f64,
    /// Largest residual of the bubble problems for `rho` and `tau`.
    pub bubble_residual: f64,
    /// Largest entry of `d L - xi`, where `xi` is the data handed to the `lambda` solve.
    pub d_defect: f64,
}

/// Lifting on one cell.
#[derive(Debug)]
pub struct CellLift<S> {
    /// `P^-_{r+2+d-k} Lambda^k` on the cell submesh.
    pub fe: FeSpace<S>,
    /// Local closure vector to coefficients in `fe`.
    pub op: Mat<S>,
    /// `P^-_{r+2+d-k} Lambda^{k+1}` and the matrix of `d L` (cells with `d > k`).
    pub dfe: Option<FeSpace<S>>,
    pub dop: Option<Mat<S>>,
    pub diagnostics: LocalDiagnostics,
}

/// Local liftings of every cell of dimension at least `k`.
#[derive(Debug)]
pub struct Lifting<'s, 'm, S> {
    pub space: &'s DdrSpace<'m, S>,
    pub options: LiftOptions,
    /// Indexed by dimension, then cell (empty below `k`).
    pub cells: Vec<Vec<CellLift<S>>>,
}

/// Degree of the finite element space carrying the lifting on a `d`-cell.
pub fn lift_degree(r: usize, k: usize, d: usize) -> i64 {
    (r + 2 + d - k) as i64
}

impl<'s, 'm, S: Scalar> Lifting<'s, 'm, S> {
    pub fn new(space: &'s DdrSpace<'m, S>) -> Result<Self> {
        Self::build(space, LiftOptions::default())
    }

    pub fn build(space: &'s DdrSpace<'m, S>, options: LiftOptions) -> Result<Self> {
        let mesh = space.mesh;
        let k = space.k;
        let mut cells: Vec<Vec<CellLift<S>>> = (0..=mesh.n).map(|_| Vec::new()).collect();
        for d in k..=mesh.n {
            let lower: &[CellLift<S>] = if d > k { &cells[d - 1] } else { &[] };
            let layer = par::map_with(mesh.num_cells(d), options.sequential, |i| {
                if d == k {
                    Ok(base_cell(space, i))
                } else {
                    step_cell(space, d, i, lower, options)
                }
            });
            cells[d] = layer.into_iter().collect::<Result<Vec<_>>>()?;
        }
        Ok(Lifting { space, options, cells })
    }

    pub fn cell(&self, d: usize, i: usize) -> &CellLift<S> {
        &self.cells[d][i]
    }

    /// Coefficients of the lifting on `(d, i)` for a global vector.
    pub fn local(&self, d: usize, i: usize, x: &[S]) -> Vec<S> {
        self.cells[d][i].op.mul_vec(&self.space.restrict(d, i, x))
    }

    /// Lifting of a global vector, represented on every cell of dimension at least `k`.
    pub fn apply(&self, x: &[S]) -> LiftedForm<S> {
        let mesh = self.space.mesh;
        let (r, k) = (self.space.r, self.space.k);
        let cells = (0..=mesh.n)
            .map(|d| if d < k { Vec::new() } else { par::map(mesh.num_cells(d), |i| self.local(d, i, x)) })
            .collect();
        LiftedForm { r, k, degrees: (0..=mesh.n).map(|d| if d < k { 0 } else { lift_degree(r, k, d) }).collect(), cells }
    }
}

/// A lifted vector: finite element coefficients per cell.
#[derive(Clone, Debug)]
pub struct LiftedForm<S> {
    pub r: usize,
    pub k: usize,
    /// Finite element degree per cell dimension.
    pub degrees: Vec<i64>,
    pub cells: Vec<Vec<Vec<S>>>,
}

impl<S: Scalar> LiftedForm<S> {
    pub fn to_json(&self) -> serde_json::Value {
        let mut cells = serde_json::Map::new();
        for (d, layer) in self.cells.iter().enumerate() {
            if d < self.k {
                continue;
            }
            let mut m = serde_json::Map::new();
            for (i, c) in layer.iter().enumerate() {
                let vals: Vec<serde_json::Value> =
                    c.iter().map(|v| if S::EXACT { v.repr().into() } else { v.to_f64().into() }).collect();
                m.insert(i.to_string(), vals.into());
            }
            cells.insert(d.to_string(), m.into());
        }
        serde_json::json!({ "r": self.r, "k": self.k, "degrees": self.degrees, "cells": cells })
    }
}

fn base_cell<S: Scalar>(space: &DdrSpace<'_, S>, i: usize) -> CellLift<S> {
    let k = space.k;
    let fe = FeSpace::<S>::on_cell(space.mesh, k, i, lift_degree(space.r, k, k), k);
    let data = space.cell(k, i);
    let own = data.block_range(k, i).start;
    let mut op = Mat::zeros(fe.dim(), data.local_dim());
    for (j, b) in data.basis.iter().enumerate() {
        for (row, v) in fe.interpolate(b).into_iter().enumerate() {
            op[(row, own + j)] = v;
        }
    }
    CellLift { fe, op, dfe: None, dop: None, diagnostics: LocalDiagnostics::default() }
}

/// Scatters the rows of boundary cell matrices into the rows of `fe`, with
/// columns mapped from each boundary closure into the closure of `(d, i)`.
fn gather_boundary<S: Scalar>(
    space: &DdrSpace<'_, S>,
    d: usize,
    i: usize,
    fe: &FeSpace<S>,
    lower: &[CellLift<S>],
    pick: impl Fn(&CellLift<S>) -> (&FeSpace<S>, &Mat<S>),
) -> Mat<S> {
    let data = space.cell(d, i);
    let mut out = Mat::zeros(fe.dim(), data.local_dim());
    for &(j, _) in &space.mesh.cell(d, i).boundary {
        let (sfe, sop) = pick(&lower[j]);
        let map = space.embed(data, space.cell(d - 1, j));
        for (row, key) in sfe.dofs.iter().enumerate() {
            let target = fe.index[key];
            for (c, &tc) in map.iter().enumerate() {
                out[(target, tc)] = sop[(row, c)].clone();
            }
        }
    }
    out
}

/// Matrix of the interpolation of polynomial forms into `fe`.
fn interpolation_matrix<S: Scalar>(fe: &FeSpace<S>, forms: &[crate::exterior::form::Form<S>]) -> Mat<S> {
    let mut out = Mat::zeros(fe.dim(), forms.len());
    for (m, w) in forms.iter().enumerate() {
        for (row, v) in fe.interpolate(w).into_iter().enumerate() {
            out[(row, m)] = v;
        }
    }
    out
}

fn add_into<S: Scalar>(a: &mut Mat<S>, b: &Mat<S>) {
    for (x, y) in a.data.iter_mut().zip(&b.data) {
        if !y.is_zero() {
            *x = x.clone() + y.clone();
        }
    }
}

fn step_cell<S: Scalar>(
    space: &DdrSpace<'_, S>,
    d: usize,
    i: usize,
    lower: &[CellLift<S>],
    options: LiftOptions,
) -> Result<CellLift<S>> {
    let mesh = space.mesh;
    let (r, k) = (space.r, space.k);
    let sl = lift_degree(r, k, d) - 1;
    let data = space.cell(d, i);
    let b = &space.bases[d];
    let dmat = data.dmat.as_ref().expect("discrete derivative on a cell of dimension above k");
    let mut diag = LocalDiagnostics::default();

    let bvp = FeBvp::<S>::on_cell(mesh, d, i, sl, k)?;
    let theta = gather_boundary(space, d, i, &bvp.trial, lower, |c| (&c.fe, &c.op));
    let mut xi = interpolation_matrix(&bvp.target, &b.full1_basis).mul(dmat);

    if d >= k + 2 && !options.drop_correction {
        let cb = FeBvp::<S>::on_cell(mesh, d, i, sl, k + 1)?;
        debug_assert_eq!(cb.trial.dofs, bvp.target.dofs);
        let dd: Vec<_> = b.full1_basis.iter().map(|w| w.d()).collect();
        let mut xi_chi = interpolation_matrix(&cb.target, &dd).mul(dmat);
        xi_chi.data.iter_mut().for_each(|v| *v = -v.clone());
        let mut theta_chi = gather_boundary(space, d, i, &cb.trial, lower, |c| {
            (c.dfe.as_ref().expect("derivative space"), c.dop.as_ref().expect("derivative matrix"))
        });
        for (t, x) in theta_chi.data.iter_mut().zip(&xi.data) {
            *t = t.clone() - x.clone();
        }
        let chi = cb.solve_columns(&xi_chi, &theta_chi)?;
        diag.chi_residual = cb.residual(&chi, &xi_chi, &theta_chi);
        diag.chi_kkt = cb.kkt(&chi);
        let bub = BubbleProblem::<S>::on_cell(mesh, d, i, r as i64 + 1, k + 1)?;
        debug_assert_eq!(bub.space.dofs, bvp.trial.dofs);
        let rhs: Vec<Mat<S>> = (0..bub.space.tops.len())
            .map(|t| {
                let mut m = bub.rhs_fe(t, &cb.trial).mul(&chi);
                m.data.iter_mut().for_each(|v| *v = -v.clone());
                m
            })
            .collect();
        let rho = bub.solve(&rhs)?;
        diag.bubble_residual = diag.bubble_residual.max(bub.residual(&rho, &rhs));
        add_into(&mut xi, &chi);
        add_into(&mut xi, &bvp.dmat.mul(&rho));
    }

    let lambda = bvp.solve_columns(&xi, &theta)?;
    diag.lambda_residual = bvp.residual(&lambda, &xi, &theta);
    diag.lambda_kkt = bvp.kkt(&lambda);

    let fe = FeSpace::<S>::on_cell(mesh, d, i, sl + 1, k);
    let mut op = bvp.trial.raise_matrix(&fe).mul(&lambda);
    if k >= 1 {
        let bub = BubbleProblem::<S>::on_cell(mesh, d, i, r as i64 + 1, k)?;
        let rhs: Vec<Mat<S>> = (0..bub.space.tops.len())
            .map(|t| {
                let mut m = bub.rhs_poly(t, &b.full_basis).mul(&data.pot);
                let l = bub.rhs_fe(t, &bvp.trial).mul(&lambda);
                for (x, y) in m.data.iter_mut().zip(l.data) {
                    *x = x.clone() - y;
                }
                m
            })
            .collect();
        let tau = bub.solve(&rhs)?;
        diag.bubble_residual = diag.bubble_residual.max(bub.residual(&tau, &rhs));
        add_into(&mut op, &bub.space.dmat(&fe).mul(&tau));
    }

    let dfe = FeSpace::<S>::on_cell(mesh, d, i, sl + 1, k + 1);
    let dop = fe.dmat(&dfe).mul(&op);
    let expected = bvp.target.raise_matrix(&dfe).mul(&xi);
    diag.d_defect = dop.data.iter().zip(&expected.data).fold(0.0, |m, (a, b)| m.max((a.clone() - b.clone()).abs_f64()));
    Ok(CellLift { fe, op, dfe: Some(dfe), dop: Some(dop), diagnostics: diag })
}

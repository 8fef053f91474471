//! Conforming trimmed finite element spaces on simplicial submeshes.
//!
//! Global degrees of freedom are keyed by the sorted point ids of a subsimplex
//! and a weight index, so spaces on a cell and on its boundary cells share
//! keys and traces are restrictions of coefficient vectors.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use super::reference::{ref_element, RefElement};
use crate::exterior::form::{det, Form};
use crate::linalg::{inverse, Mat};
use crate::mesh::Mesh;
use crate::scalar::Scalar;

/// Sorted point ids of a subsimplex and the index of a weight form.
pub type DofKey = (Vec<usize>, usize);

#[derive(Debug)]
pub struct FeSpace<S> {
    pub d: usize,
    pub s: i64,
    pub k: usize,
    pub tops: Vec<Vec<usize>>,
    /// Affine maps `x = p0 + m t` of the top simplices in host coordinates.
    pub maps: Vec<(Vec<S>, Mat<S>)>,
    /// Orientation of each top simplex's vertex order relative to the host.
    pub signs: Vec<i32>,
    pub dofs: Vec<DofKey>,
    pub index: HashMap<DofKey, usize>,
    /// Local-to-global degree of freedom map per top simplex.
    pub local: Vec<Vec<usize>>,
    /// First `(top, local)` pair carrying each global degree of freedom.
    pub owner: Vec<(usize, usize)>,
    pub reference: Arc<RefElement<S>>,
    pub metric: Vec<S>,
    basis: OnceLock<Vec<Vec<Form<S>>>>,
}

impl<S: Scalar> FeSpace<S> {
    /// Space on the given top simplices (sorted point ids) with host coordinates
    /// `coords(point)` and host metric weights.
    pub fn new(d: usize, s: i64, k: usize, tops: Vec<Vec<usize>>, coords: impl Fn(usize) -> Vec<S>, metric: Vec<S>) -> Self {
        let reference = ref_element::<S>(d, s, k);
        let mut dofs: Vec<DofKey> = Vec::new();
        let mut index: HashMap<DofKey, usize> = HashMap::new();
        let mut local = Vec::with_capacity(tops.len());
        let mut owner = Vec::new();
        let mut maps = Vec::with_capacity(tops.len());
        let mut signs = Vec::with_capacity(tops.len());
        for (t, top) in tops.iter().enumerate() {
            debug_assert!(top.windows(2).all(|w| w[0] < w[1]), "top simplex must be sorted");
            let pts: Vec<Vec<S>> = top.iter().map(|&p| coords(p)).collect();
            let p0 = pts[0].clone();
            let mut m = Mat::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    m[(i, j)] = pts[j + 1][i].clone() - p0[i].clone();
                }
            }
            let rows: Vec<Vec<S>> = (0..d).map(|i| m.row_vec(i)).collect();
            signs.push(if det(&rows).to_f64() > 0.0 { 1 } else { -1 });
            maps.push((p0, m));
            let mut lmap = Vec::with_capacity(reference.dim());
            for (l, (g, w)) in reference.dofs.iter().enumerate() {
                let key: DofKey = (g.iter().map(|&v| top[v]).collect(), *w);
                let gi = *index.entry(key.clone()).or_insert_with(|| {
                    dofs.push(key);
                    owner.push((t, l));
                    dofs.len() - 1
                });
                lmap.push(gi);
            }
            local.push(lmap);
        }
        FeSpace { d, s, k, tops, maps, signs, dofs, index, local, owner, reference, metric, basis: OnceLock::new() }
    }

    /// Space on the submesh of mesh cell `(d, i)` in its frame coordinates.
    pub fn on_cell(mesh: &Mesh, d: usize, i: usize, s: i64, k: usize) -> Self {
        let cell = mesh.cell(d, i);
        Self::new(d, s, k, cell.submesh.clone(), |p| mesh.local_point::<S>(d, i, p), cell.metric_as())
    }

    pub fn dim(&self) -> usize {
        self.dofs.len()
    }

    /// Dual basis functions per top simplex in host coordinates.
    pub fn local_basis(&self, t: usize) -> &[Form<S>] {
        &self.basis.get_or_init(|| {
            (0..self.tops.len())
                .map(|t| {
                    let (p0, m) = &self.maps[t];
                    let minv = inverse(m).expect("degenerate simplex");
                    let a: Vec<S> = minv.mul_vec(p0).into_iter().map(|v| -v).collect();
                    let rows: Vec<Vec<S>> = (0..self.d).map(|i| minv.row_vec(i)).collect();
                    self.reference.basis.iter().map(|b| b.pullback(&a, &rows, self.d)).collect()
                })
                .collect()
        })[t]
    }

    /// The form with coefficients `c` on top simplex `t`, in host coordinates.
    pub fn eval_on(&self, t: usize, c: &[S]) -> Form<S> {
        let mut out = Form::zero(self.d, self.k);
        for (l, b) in self.local_basis(t).iter().enumerate() {
            let v = &c[self.local[t][l]];
            if !v.is_zero() {
                out.add_assign_scaled(b, v);
            }
        }
        out
    }

    /// The form with coefficients `c` on top simplex `t`, in reference coordinates.
    pub fn eval_ref(&self, t: usize, c: &[S]) -> Form<S> {
        let mut out = Form::zero(self.d, self.k);
        for (l, b) in self.reference.basis.iter().enumerate() {
            let v = &c[self.local[t][l]];
            if !v.is_zero() {
                out.add_assign_scaled(b, v);
            }
        }
        out
    }

    /// Pulls a host-coordinate form back to the reference coordinates of top `t`.
    pub fn to_reference(&self, t: usize, w: &Form<S>) -> Form<S> {
        let (p0, m) = &self.maps[t];
        let rows: Vec<Vec<S>> = (0..self.d).map(|i| m.row_vec(i)).collect();
        w.pullback(p0, &rows, self.d)
    }

    /// Degrees of freedom of a piecewise form given per top simplex in host
    /// coordinates. Values on shared subsimplices are taken from the first
    /// top simplex containing them.
    pub fn dofs_of(&self, piece: impl Fn(usize) -> Form<S>) -> Vec<S> {
        self.dofs_of_ref(|t| self.to_reference(t, &piece(t)))
    }

    /// As [`FeSpace::dofs_of`] with pieces in reference coordinates.
    pub fn dofs_of_ref(&self, piece: impl Fn(usize) -> Form<S>) -> Vec<S> {
        let mut out = vec![S::zero(); self.dim()];
        let mut done = vec![false; self.dim()];
        for t in 0..self.tops.len() {
            if self.local[t].iter().all(|&g| done[g]) {
                continue;
            }
            let vals = self.reference.dofs_of(&piece(t));
            for (l, v) in vals.into_iter().enumerate() {
                let g = self.local[t][l];
                if !done[g] {
                    out[g] = v;
                    done[g] = true;
                }
            }
        }
        out
    }

    /// Interpolates a polynomial form defined on the whole host.
    pub fn interpolate(&self, w: &Form<S>) -> Vec<S> {
        self.dofs_of(|_| w.clone())
    }

    /// Coefficients of the same piecewise form in a space of higher degree on
    /// the same top simplices.
    pub fn raise(&self, c: &[S], target: &FeSpace<S>) -> Vec<S> {
        target.dofs_of_ref(|t| self.eval_ref(t, c))
    }

    /// Matrix of [`FeSpace::raise`].
    pub fn raise_matrix(&self, target: &FeSpace<S>) -> Mat<S> {
        let local: Vec<Vec<S>> = self.reference.basis.iter().map(|b| target.reference.dofs_of(b)).collect();
        let mut out = Mat::zeros(target.dim(), self.dim());
        for t in 0..self.tops.len() {
            for (j, col) in local.iter().enumerate() {
                for (i, v) in col.iter().enumerate() {
                    out[(target.local[t][i], self.local[t][j])] = v.clone();
                }
            }
        }
        out
    }

    /// Matrix of `d` into `target` (same top simplices, degree `k + 1`).
    pub fn dmat(&self, target: &FeSpace<S>) -> Mat<S> {
        assert_eq!(target.k, self.k + 1, "exterior derivative target degree");
        let rd = self.reference.dmat();
        let mut out = Mat::zeros(target.dim(), self.dim());
        if target.s == self.s {
            for t in 0..self.tops.len() {
                for i in 0..rd.rows {
                    for j in 0..rd.cols {
                        out[(target.local[t][i], self.local[t][j])] = rd[(i, j)].clone();
                    }
                }
            }
            return out;
        }
        for j in 0..self.dim() {
            let mut e = vec![S::zero(); self.dim()];
            e[j] = S::one();
            let col = target.dofs_of_ref(|t| self.eval_ref(t, &e).d());
            for (i, v) in col.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }

    /// Scaled L2 Gram matrix (true values divided by `sqrt(prod g)` of the host).
    pub fn gram(&self) -> Mat<S> {
        let n = self.dim();
        let mut out: Mat<S> = Mat::zeros(n, n);
        for t in 0..self.tops.len() {
            let gl = self.reference.gram(&self.maps[t].1, &self.metric);
            for i in 0..gl.rows {
                for j in 0..gl.cols {
                    let (gi, gj) = (self.local[t][i], self.local[t][j]);
                    out[(gi, gj)] = out[(gi, gj)].clone() + gl[(i, j)].clone();
                }
            }
        }
        out
    }

    /// Scaled inner product of two coefficient vectors.
    pub fn inner(&self, a: &[S], b: &[S]) -> S {
        let mut acc = S::zero();
        for t in 0..self.tops.len() {
            let gl = self.reference.gram(&self.maps[t].1, &self.metric);
            let la: Vec<S> = self.local[t].iter().map(|&g| a[g].clone()).collect();
            let lb: Vec<S> = self.local[t].iter().map(|&g| b[g].clone()).collect();
            acc = acc + crate::linalg::dot(&la, &gl.mul_vec(&lb));
        }
        acc
    }

    /// Global indices of the degrees of freedom attached to top simplex `t` itself.
    pub fn bubble_dofs(&self, t: usize) -> Vec<usize> {
        self.reference.interior().into_iter().map(|l| self.local[t][l]).collect()
    }

    /// Flags degrees of freedom living on subsimplices of the given simplices.
    pub fn mask_within(&self, simplices: &[Vec<usize>]) -> Vec<bool> {
        self.dofs
            .iter()
            .map(|(g, _)| simplices.iter().any(|s| g.iter().all(|p| s.binary_search(p).is_ok())))
            .collect()
    }

    /// Restriction of `c` to the keys of `other` (a trace when `other` lives on
    /// a boundary cell).
    pub fn restrict(&self, c: &[S], other: &FeSpace<S>) -> Vec<S> {
        other.dofs.iter().map(|key| c[self.index[key]].clone()).collect()
    }

    /// Matrix `int phi_j ^ z_i` over the host for test forms `z_i` in host coordinates.
    pub fn pairing_matrix(&self, tests: &[Form<S>]) -> Mat<S> {
        let mut out = Mat::<S>::zeros(tests.len(), self.dim());
        for t in 0..self.tops.len() {
            for (i, z) in tests.iter().enumerate() {
                let zr = self.to_reference(t, z);
                for (l, phi) in self.reference.basis.iter().enumerate() {
                    let v = phi.wedge(&zr).top_coeff().integrate_reference();
                    if v.is_zero() {
                        continue;
                    }
                    let j = self.local[t][l];
                    out[(i, j)] = if self.signs[t] > 0 { out[(i, j)].clone() + v } else { out[(i, j)].clone() - v };
                }
            }
        }
        out
    }

    /// Integral of a top-degree form with the host orientation.
    pub fn integral(&self, c: &[S]) -> S {
        assert_eq!(self.k, self.d, "integral of a form that is not top-degree");
        let mut acc = S::zero();
        for (t, top) in self.tops.iter().enumerate() {
            let v = c[self.index[&(top.clone(), 0)]].clone();
            acc = if self.signs[t] > 0 { acc + v } else { acc - v };
        }
        acc
    }
}

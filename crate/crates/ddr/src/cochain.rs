//! Simplicial chains and cochains on a cell submesh: boundary operators, the
//! de Rham and Whitney maps, cycle complements and the explicit cochain
//! boundary value solver.

use std::collections::{BTreeSet, HashMap};

use crate::exterior::form::Form;
use crate::exterior::poly::Poly;
use crate::linalg::{inverse, nullspace, rref, solve_any, Mat};
use crate::mesh::Mesh;
use crate::scalar::{max_abs, Rat, Scalar};
use crate::spaces::FeSpace;
use crate::{Error, Result};

/// Simplicial complex generated by the top simplices of a cell submesh, with
/// the subcomplex of its boundary.
#[derive(Clone, Debug)]
pub struct Complex {
    pub dim: usize,
    /// Sorted simplices (sorted point ids) by dimension.
    pub simplices: Vec<Vec<Vec<usize>>>,
    pub index: Vec<HashMap<Vec<usize>, usize>>,
    /// Whether each simplex lies in the boundary subcomplex.
    pub on_boundary: Vec<Vec<bool>>,
    /// Orientation of each top simplex, indexed like `simplices[dim]`.
    pub top_signs: Vec<i32>,
}

fn sorted(s: &[usize]) -> Vec<usize> {
    let mut s = s.to_vec();
    s.sort_unstable();
    s
}

impl Complex {
    /// `tops` and `signs` pair each top simplex with its orientation relative
    /// to the cell when listed in sorted order.
    pub fn new(tops: &[Vec<usize>], signs: &[i32], boundary_tops: &[Vec<usize>]) -> Self {
        let dim = tops[0].len() - 1;
        let mut sets: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); dim + 1];
        for t in tops {
            let t = sorted(t);
            for mask in 1u32..(1u32 << t.len()) {
                let s: Vec<usize> = t.iter().enumerate().filter(|(j, _)| mask & (1 << j) != 0).map(|(_, &p)| p).collect();
                sets[s.len() - 1].insert(s);
            }
        }
        let simplices: Vec<Vec<Vec<usize>>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let index: Vec<HashMap<Vec<usize>, usize>> =
            simplices.iter().map(|l| l.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect()).collect();
        let bsorted: Vec<Vec<usize>> = boundary_tops.iter().map(|b| sorted(b)).collect();
        let on_boundary = simplices
            .iter()
            .map(|l| l.iter().map(|s| bsorted.iter().any(|b| s.iter().all(|p| b.binary_search(p).is_ok()))).collect())
            .collect();
        let mut top_signs = vec![0; simplices[dim].len()];
        for (t, &sg) in tops.iter().zip(signs) {
            top_signs[index[dim][&sorted(t)]] = sg;
        }
        Complex { dim, simplices, index, on_boundary, top_signs }
    }

    /// Complex of the submesh of mesh cell `(d, i)`, `d >= 1`.
    pub fn of_cell(mesh: &Mesh, d: usize, i: usize) -> Self {
        let cell = mesh.cell(d, i);
        let signs: Vec<i32> = mesh.local_simplices::<Rat>(d, i).into_iter().map(|(_, s)| s).collect();
        let btops: Vec<Vec<usize>> =
            cell.boundary.iter().flat_map(|&(b, _)| mesh.cell(d - 1, b).submesh.iter().cloned()).collect();
        Complex::new(&cell.submesh, &signs, &btops)
    }

    pub fn count(&self, k: usize) -> usize {
        self.simplices.get(k).map_or(0, |l| l.len())
    }

    /// Indices of the `k`-simplices in the boundary subcomplex.
    pub fn boundary_simplices(&self, k: usize) -> Vec<usize> {
        (0..self.count(k)).filter(|&j| self.on_boundary[k][j]).collect()
    }

    /// Indices of the `k`-simplices not in the boundary subcomplex.
    pub fn interior_simplices(&self, k: usize) -> Vec<usize> {
        (0..self.count(k)).filter(|&j| !self.on_boundary[k][j]).collect()
    }

    /// Boundary matrix `C_k -> C_{k-1}`; for `k = 0` the augmentation row.
    pub fn boundary_matrix<S: Scalar>(&self, k: usize) -> Mat<S> {
        if k == 0 {
            return Mat::from_rows(vec![vec![S::one(); self.count(0)]], self.count(0));
        }
        let mut m = Mat::zeros(self.count(k - 1), self.count(k));
        for (j, s) in self.simplices[k].iter().enumerate() {
            for o in 0..s.len() {
                let f: Vec<usize> = s.iter().enumerate().filter(|(q, _)| *q != o).map(|(_, &p)| p).collect();
                m[(self.index[k - 1][&f], j)] = if o % 2 == 0 { S::one() } else { -S::one() };
            }
        }
        m
    }

    pub fn boundary<S: Scalar>(&self, k: usize, w: &[S]) -> Vec<S> {
        self.boundary_matrix::<S>(k).mul_vec(w)
    }

    /// Coboundary `C^k -> C^{k+1}`, the transpose of the boundary.
    pub fn coboundary<S: Scalar>(&self, k: usize, l: &[S]) -> Vec<S> {
        if k >= self.dim {
            return Vec::new();
        }
        self.boundary_matrix::<S>(k + 1).tmul_vec(l)
    }

    /// The fundamental `d`-chain of the cell.
    pub fn fundamental_chain<S: Scalar>(&self) -> Vec<S> {
        self.top_signs.iter().map(|&s| if s > 0 { S::one() } else { -S::one() }).collect()
    }

    /// Cycles of dimension `k` (reduced at `k = 0`), as columns; with
    /// `boundary_only` the cycles of the boundary subcomplex.
    pub fn cycles<S: Scalar>(&self, k: usize, boundary_only: bool) -> Mat<S> {
        let b = self.boundary_matrix::<S>(k);
        if !boundary_only {
            return nullspace(&b);
        }
        let keep = self.boundary_simplices(k);
        let mut sub = Mat::zeros(b.rows, keep.len());
        for i in 0..b.rows {
            for (q, &j) in keep.iter().enumerate() {
                sub[(i, q)] = b[(i, j)].clone();
            }
        }
        let z = nullspace(&sub);
        let mut out = Mat::zeros(self.count(k), z.cols);
        for (q, &j) in keep.iter().enumerate() {
            for c in 0..z.cols {
                out[(j, c)] = z[(q, c)].clone();
            }
        }
        out
    }

    /// Complement of the boundary cycles in the cycles of dimension `k`: each
    /// returned pair is an interior `k`-simplex `F_z` and a cycle `z` whose
    /// coefficient is one at `F_z` and zero at every other selected simplex.
    pub fn cycle_complement<S: Scalar>(&self, k: usize) -> Vec<(usize, Vec<S>)> {
        let z = self.cycles::<S>(k, false);
        let interior = self.interior_simplices(k);
        let order: Vec<usize> = interior.iter().copied().chain(self.boundary_simplices(k)).collect();
        // Rows are cycles with coordinates reordered interior first.
        let mut m = Mat::zeros(z.cols, order.len());
        for c in 0..z.cols {
            for (q, &j) in order.iter().enumerate() {
                m[(c, q)] = z[(j, c)].clone();
            }
        }
        let scale = m.max_abs();
        let red = rref(m, scale);
        let mut out = Vec::new();
        for (row, &p) in red.pivots.iter().enumerate() {
            if p >= interior.len() {
                break;
            }
            let mut cyc = vec![S::zero(); self.count(k)];
            for (q, &j) in order.iter().enumerate() {
                cyc[j] = red.mat[(row, q)].clone();
            }
            out.push((interior[p], cyc));
        }
        out
    }

    /// A `(k+1)`-chain `w` with `boundary w = z`, supported in the boundary
    /// subcomplex when `boundary_only` is set.
    pub fn fill_cycle<S: Scalar>(&self, k: usize, z: &[S], boundary_only: bool) -> Result<Vec<S>> {
        let b = self.boundary_matrix::<S>(k + 1);
        let keep: Vec<usize> =
            if boundary_only { self.boundary_simplices(k + 1) } else { (0..self.count(k + 1)).collect() };
        let mut sub = Mat::zeros(b.rows, keep.len());
        for i in 0..b.rows {
            for (q, &j) in keep.iter().enumerate() {
                sub[(i, q)] = b[(i, j)].clone();
            }
        }
        let w = solve_any(&sub, z).map_err(|_| Error::Inconsistent(format!("{k}-cycle is not a boundary")))?;
        let mut out = vec![S::zero(); self.count(k + 1)];
        for (q, &j) in keep.iter().enumerate() {
            out[j] = w[q].clone();
        }
        Ok(out)
    }

    /// Restricts a cochain to the boundary subcomplex (other entries zeroed).
    pub fn boundary_part<S: Scalar>(&self, k: usize, l: &[S]) -> Vec<S> {
        l.iter().enumerate().map(|(j, v)| if self.on_boundary[k][j] { v.clone() } else { S::zero() }).collect()
    }

    /// Solves `coboundary(lambda) = xi` with `lambda = theta` on the boundary
    /// subcomplex. `theta` is a full `k`-cochain whose interior entries are
    /// ignored. Fails with a compatibility error when the data admits no solution.
    pub fn solve_bvp<S: Scalar>(&self, k: usize, xi: &[S], theta: &[S]) -> Result<Vec<S>> {
        self.check_compatibility(k, xi, theta)?;
        let mut lambda = self.boundary_part(k, theta);
        for (f, z) in self.cycle_complement::<S>(k) {
            let w = self.fill_cycle(k, &z, false)?;
            let mut v = crate::linalg::dot(xi, &w);
            for (j, zj) in z.iter().enumerate() {
                if self.on_boundary[k][j] && !zj.is_zero() {
                    v = v - zj.clone() * theta[j].clone();
                }
            }
            lambda[f] = v;
        }
        Ok(lambda)
    }

    /// Compatibility of boundary value data: the integral condition when
    /// `k + 1 = dim`, otherwise closedness of `xi` and agreement of
    /// `coboundary(theta)` with `xi` on the boundary.
    pub fn check_compatibility<S: Scalar>(&self, k: usize, xi: &[S], theta: &[S]) -> Result<()> {
        let th = self.boundary_part(k, theta);
        let scale = max_abs(xi).max(max_abs(theta)).max(1.0);
        if k + 1 == self.dim {
            let f = self.fundamental_chain::<S>();
            let lhs = crate::linalg::dot(xi, &f);
            let rhs = crate::linalg::dot(&th, &self.boundary(self.dim, &f));
            let defect = lhs - rhs;
            if !defect.negligible(scale) {
                return Err(Error::Compatibility { condition: "integral".into(), defect: defect.abs_f64() });
            }
            return Ok(());
        }
        let dxi = self.coboundary(k + 1, xi);
        let closed = max_abs(&dxi);
        if !is_small(&dxi, scale) {
            return Err(Error::Compatibility { condition: "closedness".into(), defect: closed });
        }
        let dth = self.coboundary(k, &th);
        let mut worst = 0.0f64;
        let mut ok = true;
        for j in self.boundary_simplices(k + 1) {
            let e = dth[j].clone() - xi[j].clone();
            if !e.negligible(scale) {
                ok = false;
            }
            worst = worst.max(e.abs_f64());
        }
        if !ok {
            return Err(Error::Compatibility { condition: "boundary trace".into(), defect: worst });
        }
        Ok(())
    }
}

fn is_small<S: Scalar>(v: &[S], scale: f64) -> bool {
    v.iter().all(|x| x.negligible(scale))
}

/// de Rham map: integrals of an element of a conforming space over the
/// `k`-simplices of the complex.
pub fn de_rham<S: Scalar>(fe: &FeSpace<S>, complex: &Complex, c: &[S]) -> Vec<S> {
    complex.simplices[fe.k].iter().map(|g| c[fe.index[&(g.clone(), 0)]].clone()).collect()
}

/// Whitney map into the lowest-order space `P^-_1 Lambda^k` on the complex.
pub fn whitney<S: Scalar>(fe: &FeSpace<S>, complex: &Complex, l: &[S]) -> Vec<S> {
    assert_eq!(fe.s, 1, "Whitney forms live in the lowest-order space");
    let mut c = vec![S::zero(); fe.dim()];
    for (j, g) in complex.simplices[fe.k].iter().enumerate() {
        c[fe.index[&(g.clone(), 0)]] = l[j].clone();
    }
    c
}

/// Barycentric formula for the Whitney form of the face `g` (local vertex
/// indices into `verts`) on the simplex with vertices `verts`.
pub fn whitney_form<S: Scalar>(verts: &[Vec<S>], g: &[usize]) -> Result<Form<S>> {
    let d = verts.len() - 1;
    let mut m = Mat::zeros(d + 1, d + 1);
    for (j, v) in verts.iter().enumerate() {
        m[(0, j)] = S::one();
        for i in 0..d {
            m[(i + 1, j)] = v[i].clone();
        }
    }
    // Rows of the inverse are the barycentric coordinates as affine functions.
    let inv = inverse(&m)?;
    let lam: Vec<Poly<S>> = (0..=d)
        .map(|a| Poly::affine(d, inv[(a, 0)].clone(), &(0..d).map(|i| inv[(a, i + 1)].clone()).collect::<Vec<_>>()))
        .collect();
    let k = g.len() - 1;
    let mut out = Form::zero(d, k);
    let mut fact = S::one();
    for i in 1..=k {
        fact = fact * S::from_i64(i as i64);
    }
    for i in 0..=k {
        let mut w = Form::scalar(lam[g[i]].clone());
        for (j, &v) in g.iter().enumerate() {
            if j != i {
                w = w.wedge(&Form::scalar(lam[v].clone()).d());
            }
        }
        let t = if i % 2 == 0 { fact.clone() } else { -fact.clone() };
        out.add_assign_scaled(&w, &t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests;

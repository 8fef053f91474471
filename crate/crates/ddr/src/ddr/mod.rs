//! The discrete de Rham complex: component spaces, interpolators, discrete
//! potentials and exterior derivatives, norms and stabilized inner products.
//!
//! A vector of the space of `k`-forms stores one block per cell of dimension
//! `d >= k`, holding coefficients in the basis `star^-1 zeta_j` where `zeta_j`
//! runs over a basis of the trimmed space `P^-_r Lambda^{d-k}` of the cell.

mod checks;
mod integrals;

pub use checks::{CellResiduals, Residuals};
pub use integrals::Integrals;

use std::collections::HashMap;
use std::sync::Arc;

use crate::exterior::form::{merge_sign, subsets, Form};
use crate::exterior::poly::Poly;
use crate::exterior::quadrature;
use crate::exterior::smooth::SmoothForm;
use crate::linalg::{inverse, Mat};
use crate::mesh::Mesh;
use crate::scalar::{sign_pow, Rat, Scalar};
use crate::spaces::{full_basis, koszul_basis, trimmed_basis, FullSpace};
use crate::{par, Error, Result};

/// Bases shared by all cells of one dimension.
#[derive(Debug)]
pub struct DimBases<S> {
    /// `P^-_r Lambda^{d-k}`: test forms of the component projection.
    pub tests: Vec<Form<S>>,
    /// `P_r Lambda^k`, the potential space.
    pub full: FullSpace,
    pub full_basis: Vec<Form<S>>,
    /// `P_r Lambda^{k+1}`, the discrete derivative space (d > k).
    pub full1: FullSpace,
    pub full1_basis: Vec<Form<S>>,
    /// `P_r Lambda^{d-k-1}`, tests of the discrete derivative.
    pub d_tests: Vec<Form<S>>,
    /// `kappa P_r Lambda^{d-k}` and `kappa P_{r-1} Lambda^{d-k+1}`, tests of the potential.
    pub mu: Vec<Form<S>>,
    pub nu: Vec<Form<S>>,
}

fn to_scalar<S: Scalar>(v: Vec<Form<Rat>>) -> Vec<Form<S>> {
    v.iter().map(|f| f.map(S::from_rat)).collect()
}

impl<S: Scalar> DimBases<S> {
    fn new(d: usize, r: usize, k: usize) -> Self {
        let r = r as i64;
        let (full1, full1_basis, d_tests, mu, nu) = if d > k {
            (
                FullSpace::new(d, r, k + 1),
                to_scalar(full_basis::<Rat>(d, r, k + 1)),
                to_scalar(full_basis::<Rat>(d, r, d - k - 1)),
                to_scalar(koszul_basis::<Rat>(d, r, d - k - 1)),
                to_scalar(koszul_basis::<Rat>(d, r - 1, d - k)),
            )
        } else {
            (FullSpace::new(d, r, k), Vec::new(), Vec::new(), Vec::new(), Vec::new())
        };
        DimBases {
            tests: to_scalar(trimmed_basis::<Rat>(d, r, d - k)),
            full: FullSpace::new(d, r, k),
            full_basis: to_scalar(full_basis::<Rat>(d, r, k)),
            full1,
            full1_basis,
            d_tests,
            mu,
            nu,
        }
    }
}

/// Per-cell data: component basis, closure layout and operator matrices.
#[derive(Debug)]
pub struct CellData<S> {
    /// Component basis `star^-1 zeta_j` in frame coordinates.
    pub basis: Vec<Form<S>>,
    /// Inverse of `M[i][j] = int b_j ^ zeta_i`.
    pub mass_inv: Mat<S>,
    /// Cells `(d', j)` with `k <= d' <= d` in the closure, ending with the cell itself.
    pub closure: Vec<(usize, usize)>,
    /// Local offsets of the closure blocks (one more entry than blocks).
    pub offsets: Vec<usize>,
    pub block_of: HashMap<(usize, usize), usize>,
    /// Potential: local closure vector to `P_r Lambda^k` coefficients.
    pub pot: Mat<S>,
    /// Discrete derivative: local closure vector to `P_r Lambda^{k+1}` coefficients.
    pub dmat: Option<Mat<S>>,
}

impl<S> CellData<S> {
    pub fn local_dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Local indices of the block of `(d', j)`.
    pub fn block_range(&self, dd: usize, j: usize) -> std::ops::Range<usize> {
        let b = self.block_of[&(dd, j)];
        self.offsets[b]..self.offsets[b + 1]
    }
}

/// Discrete space of `k`-forms of degree `r` on a mesh, with all local operators.
#[derive(Debug)]
pub struct DdrSpace<'m, S> {
    pub mesh: &'m Mesh,
    pub r: usize,
    pub k: usize,
    pub bases: Vec<Arc<DimBases<S>>>,
    pub integrals: Vec<Vec<Arc<Integrals<S>>>>,
    pub cells: Vec<Vec<CellData<S>>>,
    /// Global offset of each cell block (empty for `d < k`).
    pub offsets: Vec<Vec<usize>>,
    pub dim: usize,
}

/// Dimension of the component space on a `d`-cell.
pub fn component_dim(d: usize, r: usize, k: usize) -> usize {
    crate::spaces::trimmed_dim(d, r as i64, d - k)
}

impl<'m, S: Scalar> DdrSpace<'m, S> {
    pub fn new(mesh: &'m Mesh, r: usize, k: usize) -> Result<Self> {
        Self::build(mesh, r, k, false)
    }

    /// As [`DdrSpace::new`], optionally forcing sequential assembly.
    pub fn build(mesh: &'m Mesh, r: usize, k: usize, sequential: bool) -> Result<Self> {
        let n = mesh.n;
        if k > n {
            return Err(Error::Config(format!("form degree {k} exceeds mesh dimension {n}")));
        }
        let bases: Vec<Arc<DimBases<S>>> =
            (0..=n).map(|d| Arc::new(if d >= k { DimBases::new(d, r, k) } else { DimBases::empty(d) })).collect();
        let integrals: Vec<Vec<Arc<Integrals<S>>>> = (0..=n)
            .map(|d| {
                if d < k {
                    return Vec::new();
                }
                par::map_with(mesh.num_cells(d), sequential, |i| Arc::new(Integrals::new(mesh, d, i)))
            })
            .collect();
        let mut offsets = vec![Vec::new(); n + 1];
        let mut dim = 0;
        for d in k..=n {
            let m = component_dim(d, r, k);
            for _ in 0..mesh.num_cells(d) {
                offsets[d].push(dim);
                dim += m;
            }
        }
        let cells = (0..=n).map(|_| Vec::new()).collect();
        let mut space = DdrSpace { mesh, r, k, bases, integrals, cells, offsets, dim };
        for d in k..=n {
            let done = &space;
            let layer: Vec<Result<CellData<S>>> = par::map_with(mesh.num_cells(d), sequential, |i| done.cell_data(d, i));
            let layer = layer.into_iter().collect::<Result<Vec<_>>>()?;
            space.cells[d] = layer;
        }
        Ok(space)
    }

    pub fn cell(&self, d: usize, i: usize) -> &CellData<S> {
        &self.cells[d][i]
    }

    pub fn component_dim(&self, d: usize) -> usize {
        component_dim(d, self.r, self.k)
    }

    fn cell_data(&self, d: usize, i: usize) -> Result<CellData<S>> {
        let k = self.k;
        let mesh = self.mesh;
        let b = &self.bases[d];
        let integ = &self.integrals[d][i];
        let metric = mesh.cell(d, i).metric_as::<S>();
        let basis: Vec<Form<S>> = b.tests.iter().map(|z| z.hodge_scaled_inv(&metric)).collect();
        let nb = basis.len();
        let mut mass = Mat::zeros(nb, nb);
        for (ii, z) in b.tests.iter().enumerate() {
            for (j, bj) in basis.iter().enumerate() {
                mass[(ii, j)] = integ.pairing(bj, z);
            }
        }
        let mass_inv = inverse(&mass)?;
        let mut closure = Vec::new();
        for dd in k..d {
            for &j in mesh.closure(d, i, dd) {
                closure.push((dd, j));
            }
        }
        closure.push((d, i));
        let mut offsets = vec![0];
        let mut block_of = HashMap::new();
        for (q, &(dd, j)) in closure.iter().enumerate() {
            block_of.insert((dd, j), q);
            offsets.push(offsets[q] + self.component_dim(dd));
        }
        let nloc = *offsets.last().unwrap();
        let own = offsets[closure.len() - 1];
        let mut data = CellData { basis, mass_inv, closure, offsets, block_of, pot: Mat::zeros(0, 0), dmat: None };
        if d == k {
            let mut pot = Mat::zeros(b.full.dim(), nloc);
            for (j, bj) in data.basis.iter().enumerate() {
                for (m, c) in b.full.coeffs(bj).into_iter().enumerate() {
                    pot[(m, own + j)] = c;
                }
            }
            data.pot = pot;
            return Ok(data);
        }
        let sgn = sign_pow::<S>(k + 1);
        // discrete exterior derivative
        let nd = b.full1_basis.len();
        let mut a = Mat::zeros(nd, nd);
        for (ii, mu) in b.d_tests.iter().enumerate() {
            for (m, e) in b.full1_basis.iter().enumerate() {
                a[(ii, m)] = integ.pairing(e, mu);
            }
        }
        let mut rhs = Mat::zeros(nd, nloc);
        for (ii, mu) in b.d_tests.iter().enumerate() {
            let dmu = mu.d();
            for (j, bj) in data.basis.iter().enumerate() {
                rhs[(ii, own + j)] = sgn.clone() * integ.pairing(bj, &dmu);
            }
        }
        self.add_boundary_terms(d, i, &data, &b.d_tests, S::one(), &mut rhs);
        let dmat = inverse(&a)?.mul(&rhs);
        // discrete potential
        let np = b.full_basis.len();
        if b.mu.len() + b.nu.len() != np {
            return Err(Error::Singular(format!(
                "potential test space has dimension {} instead of {np}",
                b.mu.len() + b.nu.len()
            )));
        }
        let mut bm = Mat::zeros(np, np);
        let mut prhs = Mat::zeros(np, nloc);
        for (ii, mu) in b.mu.iter().enumerate() {
            let dmu = mu.d();
            for (m, e) in b.full_basis.iter().enumerate() {
                bm[(ii, m)] = sgn.clone() * integ.pairing(e, &dmu);
            }
            let pair: Vec<S> = b.full1_basis.iter().map(|e| integ.pairing(e, mu)).collect();
            for c in 0..nloc {
                let mut v = S::zero();
                for (m, p) in pair.iter().enumerate() {
                    let x = &dmat[(m, c)];
                    if !x.is_zero() {
                        v = v + p.clone() * x.clone();
                    }
                }
                prhs[(ii, c)] = v;
            }
        }
        self.add_boundary_terms(d, i, &data, &b.mu, -S::one(), &mut prhs);
        let off = b.mu.len();
        for (q, nu) in b.nu.iter().enumerate() {
            for (m, e) in b.full_basis.iter().enumerate() {
                bm[(off + q, m)] = sgn.clone() * integ.pairing(e, nu);
            }
            for (j, bj) in data.basis.iter().enumerate() {
                prhs[(off + q, own + j)] = sgn.clone() * integ.pairing(bj, nu);
            }
        }
        data.pot = inverse(&bm)?.mul(&prhs);
        data.dmat = Some(dmat);
        Ok(data)
    }

    /// Adds `scale * sum_f' eps int_f' P_f' ^ tr mu_i` to row `i` of `rhs`.
    fn add_boundary_terms(&self, d: usize, i: usize, data: &CellData<S>, tests: &[Form<S>], scale: S, rhs: &mut Mat<S>) {
        let mesh = self.mesh;
        let bb = &self.bases[d - 1];
        for &(j, eps) in &mesh.cell(d, i).boundary {
            let sub = &self.cells[d - 1][j];
            let integ = &self.integrals[d - 1][j];
            let map = self.embed(data, sub);
            let s = if eps > 0 { scale.clone() } else { -scale.clone() };
            for (ii, mu) in tests.iter().enumerate() {
                let tr = mesh.trace(d, i, d - 1, j, mu);
                if tr.is_zero() {
                    continue;
                }
                let t: Vec<S> = bb.full_basis.iter().map(|e| integ.pairing(e, &tr)).collect();
                for (c, &target) in map.iter().enumerate() {
                    let mut v = S::zero();
                    for (m, tm) in t.iter().enumerate() {
                        let p = &sub.pot[(m, c)];
                        if !p.is_zero() && !tm.is_zero() {
                            v = v + tm.clone() * p.clone();
                        }
                    }
                    if !v.is_zero() {
                        rhs[(ii, target)] = rhs[(ii, target)].clone() + s.clone() * v;
                    }
                }
            }
        }
    }

    /// Positions of the local indices of a subcell inside the local indices of `data`.
    pub fn embed(&self, data: &CellData<S>, sub: &CellData<S>) -> Vec<usize> {
        let mut out = Vec::with_capacity(sub.local_dim());
        for &(dd, j) in &sub.closure {
            out.extend(data.block_range(dd, j));
        }
        out
    }

    /// Local closure vector of `(d, i)` from a global vector.
    pub fn restrict(&self, d: usize, i: usize, x: &[S]) -> Vec<S> {
        let data = &self.cells[d][i];
        let mut out = Vec::with_capacity(data.local_dim());
        for &(dd, j) in &data.closure {
            out.extend_from_slice(self.block(dd, j, x));
        }
        out
    }

    pub fn block<'a>(&self, d: usize, i: usize, x: &'a [S]) -> &'a [S] {
        let o = self.offsets[d][i];
        &x[o..o + self.component_dim(d)]
    }

    /// Component `omega_f` as a form.
    pub fn component_form(&self, d: usize, i: usize, c: &[S]) -> Form<S> {
        let mut out = Form::zero(d, self.k);
        for (b, x) in self.cells[d][i].basis.iter().zip(c) {
            out.add_assign_scaled(b, x);
        }
        out
    }

    /// Coefficients of the potential in `P_r Lambda^k` of the cell.
    pub fn potential_coeffs(&self, d: usize, i: usize, local: &[S]) -> Vec<S> {
        self.cells[d][i].pot.mul_vec(local)
    }

    pub fn potential(&self, d: usize, i: usize, local: &[S]) -> Form<S> {
        self.bases[d].full.form(&self.potential_coeffs(d, i, local))
    }

    /// Discrete exterior derivative `d_{r,f}` as a form (zero when `d = k`).
    pub fn discrete_d(&self, d: usize, i: usize, local: &[S]) -> Form<S> {
        match &self.cells[d][i].dmat {
            Some(m) => self.bases[d].full1.form(&m.mul_vec(local)),
            None => Form::zero(d, (self.k + 1).min(d)),
        }
    }

    /// Component coefficients of `star^-1 pi star w` given the moments
    /// `int w ^ zeta_i` against the component tests.
    pub fn component_from_moments(&self, d: usize, i: usize, moments: &[S]) -> Vec<S> {
        self.cells[d][i].mass_inv.mul_vec(moments)
    }

    /// Projection of a polynomial form on the cell onto its component space.
    pub fn project_component(&self, d: usize, i: usize, w: &Form<S>) -> Vec<S> {
        let integ = &self.integrals[d][i];
        let m: Vec<S> = self.bases[d].tests.iter().map(|z| integ.pairing(w, z)).collect();
        self.component_from_moments(d, i, &m)
    }

    /// Assembles a global vector from per-cell moments `int tr omega ^ zeta_i`.
    pub fn interpolate_by(&self, moments: impl Fn(usize, usize, &[Form<S>]) -> Vec<S> + Sync) -> Vec<S> {
        let mut x = vec![S::zero(); self.dim];
        for d in self.k..=self.mesh.n {
            let tests = &self.bases[d].tests;
            let blocks = par::map(self.mesh.num_cells(d), |i| self.component_from_moments(d, i, &moments(d, i, tests)));
            for (i, b) in blocks.into_iter().enumerate() {
                let o = self.offsets[d][i];
                x[o..o + b.len()].clone_from_slice(&b);
            }
        }
        x
    }

    /// Interpolate of a polynomial form given in ambient coordinates.
    pub fn interpolate_poly(&self, w: &Form<S>) -> Vec<S> {
        assert_eq!(w.dim, self.mesh.n, "ambient form dimension");
        assert_eq!(w.deg, self.k, "form degree mismatch");
        self.interpolate_by(|d, i, tests| {
            let tr = ambient_trace(self.mesh, d, i, w);
            let integ = &self.integrals[d][i];
            tests.iter().map(|z| integ.pairing(&tr, z)).collect()
        })
    }

    /// Local interpolate on the closure of `(d, i)` of a polynomial form on that cell.
    pub fn interpolate_local(&self, d: usize, i: usize, w: &Form<S>) -> Vec<S> {
        let data = &self.cells[d][i];
        let mut out = Vec::with_capacity(data.local_dim());
        for &(dd, j) in &data.closure {
            let tr = self.mesh.trace(d, i, dd, j, w);
            out.extend(self.project_component(dd, j, &tr));
        }
        out
    }

    /// Global discrete derivative into `target`, the space of `(k+1)`-forms.
    pub fn global_d(&self, target: &DdrSpace<'_, S>, x: &[S]) -> Vec<S> {
        assert_eq!(target.k, self.k + 1, "target form degree");
        assert_eq!(target.r, self.r, "target polynomial degree");
        target.interpolate_by(|d, i, tests| {
            let dw = self.discrete_d(d, i, &self.restrict(d, i, x));
            let integ = &target.integrals[d][i];
            tests.iter().map(|z| integ.pairing(&dw, z)).collect()
        })
    }

    /// Scaled Gram matrix of the component basis, times the cell volume factor.
    fn component_gram_f64(&self, d: usize, i: usize) -> Mat<f64> {
        let g = self.integrals[d][i].gram(&self.cells[d][i].basis);
        let vf = self.mesh.cell(d, i).volume_factor();
        g.map(|v| v.to_f64() * vf)
    }

    fn full_gram_f64(&self, d: usize, i: usize) -> Mat<f64> {
        let g = self.integrals[d][i].gram(&self.bases[d].full_basis);
        let vf = self.mesh.cell(d, i).volume_factor();
        g.map(|v| v.to_f64() * vf)
    }

    /// Matrix of the squared component norm on the closure of `(d, i)`.
    pub fn component_norm_matrix(&self, d: usize, i: usize) -> Mat<f64> {
        let data = &self.cells[d][i];
        let n = data.local_dim();
        let mut out = Mat::zeros(n, n);
        let own = data.block_range(d, i);
        let g = self.component_gram_f64(d, i);
        for (a, ia) in own.clone().enumerate() {
            for (b, ib) in own.clone().enumerate() {
                out[(ia, ib)] = g[(a, b)];
            }
        }
        if d > self.k {
            let h = self.mesh.cell(d, i).h;
            for &(j, _) in &self.mesh.cell(d, i).boundary {
                let sub = &self.cells[d - 1][j];
                let map = self.embed(data, sub);
                let m = self.component_norm_matrix(d - 1, j);
                for (a, &ia) in map.iter().enumerate() {
                    for (b, &ib) in map.iter().enumerate() {
                        out[(ia, ib)] += h * m[(a, b)];
                    }
                }
            }
        }
        out
    }

    /// Component norm of a local closure vector.
    pub fn component_norm(&self, d: usize, i: usize, local: &[S]) -> f64 {
        let x: Vec<f64> = local.iter().map(|v| v.to_f64()).collect();
        crate::linalg::quad_form(&self.component_norm_matrix(d, i), &x).max(0.0).sqrt()
    }

    /// Global component norm: root sum of squares over top cells.
    pub fn global_norm(&self, x: &[S]) -> f64 {
        let n = self.mesh.n;
        let parts = par::map(self.mesh.num_cells(n), |i| self.component_norm(n, i, &self.restrict(n, i, x)).powi(2));
        parts.iter().sum::<f64>().sqrt()
    }

    /// Difference `tr_{f'} P_f - P_{f'}` as a matrix from the closure of `f`
    /// to `P_r Lambda^k(f')` coefficients.
    pub fn potential_defect_matrix(&self, d: usize, i: usize, dd: usize, j: usize) -> Mat<S> {
        let data = &self.cells[d][i];
        let sub = &self.cells[dd][j];
        let bsub = &self.bases[dd];
        let mut tr = Mat::zeros(bsub.full.dim(), self.bases[d].full.dim());
        for (m, e) in self.bases[d].full_basis.iter().enumerate() {
            let t = self.mesh.trace(d, i, dd, j, e);
            for (q, c) in bsub.full.coeffs(&t).into_iter().enumerate() {
                tr[(q, m)] = c;
            }
        }
        let mut out = tr.mul(&data.pot);
        for (c, &target) in self.embed(data, sub).iter().enumerate() {
            for q in 0..out.rows {
                out[(q, target)] = out[(q, target)].clone() - sub.pot[(q, c)].clone();
            }
        }
        out
    }

    /// Matrix of the local inner product `<P w, P v>_f + s(w, v)` on the closure.
    pub fn local_inner_matrix(&self, d: usize, i: usize) -> Mat<f64> {
        let data = &self.cells[d][i];
        let pot = data.pot.map(|v| v.to_f64());
        let mut out = pot.transpose().mul(&self.full_gram_f64(d, i).mul(&pot));
        let h = self.mesh.cell(d, i).h;
        for dd in self.k..d {
            let w = h.powi((d - dd) as i32);
            for &j in self.mesh.closure(d, i, dd) {
                let del = self.potential_defect_matrix(d, i, dd, j).map(|v| v.to_f64());
                let s = del.transpose().mul(&self.full_gram_f64(dd, j).mul(&del));
                for a in 0..s.rows {
                    for b in 0..s.cols {
                        out[(a, b)] += w * s[(a, b)];
                    }
                }
            }
        }
        out
    }

    /// Stabilization `s_{k,f}(w, v)`.
    pub fn stabilization(&self, d: usize, i: usize, a: &[S], b: &[S]) -> f64 {
        let h = self.mesh.cell(d, i).h;
        let mut acc = 0.0;
        for dd in self.k..d {
            let w = h.powi((d - dd) as i32);
            for &j in self.mesh.closure(d, i, dd) {
                let del = self.potential_defect_matrix(d, i, dd, j);
                let (da, db) = (del.mul_vec(a), del.mul_vec(b));
                let fa = self.bases[dd].full.form(&da);
                let fb = self.bases[dd].full.form(&db);
                let v = self.integrals[dd][j].inner(&fa, &fb).to_f64() * self.mesh.cell(dd, j).volume_factor();
                acc += w * v;
            }
        }
        acc
    }

    /// Local inner product of two closure vectors.
    pub fn inner_product(&self, d: usize, i: usize, a: &[S], b: &[S]) -> f64 {
        let pa = self.potential(d, i, a);
        let pb = self.potential(d, i, b);
        let l2 = self.integrals[d][i].inner(&pa, &pb).to_f64() * self.mesh.cell(d, i).volume_factor();
        l2 + self.stabilization(d, i, a, b)
    }

    /// Global inner product summed over top cells.
    pub fn global_inner(&self, a: &[S], b: &[S]) -> f64 {
        let n = self.mesh.n;
        par::map(self.mesh.num_cells(n), |i| self.inner_product(n, i, &self.restrict(n, i, a), &self.restrict(n, i, b)))
            .iter()
            .sum()
    }

    /// JSON blocks keyed by dimension and cell id.
    pub fn vector_to_json(&self, x: &[S]) -> serde_json::Value {
        let mut root = serde_json::Map::new();
        root.insert("r".into(), self.r.into());
        root.insert("k".into(), self.k.into());
        let mut cells = serde_json::Map::new();
        for d in self.k..=self.mesh.n {
            let mut layer = serde_json::Map::new();
            for i in 0..self.mesh.num_cells(d) {
                let vals: Vec<serde_json::Value> = self.block(d, i, x).iter().map(scalar_json).collect();
                layer.insert(i.to_string(), vals.into());
            }
            cells.insert(d.to_string(), layer.into());
        }
        root.insert("cells".into(), cells.into());
        root.into()
    }
}

impl<S: Scalar> DimBases<S> {
    fn empty(d: usize) -> Self {
        DimBases {
            tests: Vec::new(),
            full: FullSpace::new(d, 0, 0),
            full_basis: Vec::new(),
            full1: FullSpace::new(d, 0, 0),
            full1_basis: Vec::new(),
            d_tests: Vec::new(),
            mu: Vec::new(),
            nu: Vec::new(),
        }
    }
}

fn scalar_json<S: Scalar>(v: &S) -> serde_json::Value {
    if S::EXACT {
        v.repr().into()
    } else {
        v.to_f64().into()
    }
}

/// Trace of an ambient polynomial form onto cell `(d, i)` in its frame coordinates.
pub fn ambient_trace<S: Scalar>(mesh: &Mesh, d: usize, i: usize, w: &Form<S>) -> Form<S> {
    let cell = mesh.cell(d, i);
    let a: Vec<S> = cell.center.iter().map(S::from_rat).collect();
    let m: Vec<Vec<S>> = (0..mesh.n).map(|r| (0..d).map(|c| S::from_rat(&cell.frame[c][r])).collect()).collect();
    w.pullback(&a, &m, d)
}

/// Moments `int_f tr omega ^ zeta_i` of a smooth ambient form by quadrature.
pub fn smooth_moments(mesh: &Mesh, d: usize, i: usize, w: &SmoothForm, tests: &[Form<f64>], order: usize) -> Vec<f64> {
    let cell = mesh.cell(d, i);
    let k = w.k;
    let amb = subsets(mesh.n, k);
    let loc = subsets(d, k);
    let full = ((1u32 << d) - 1) as u8;
    // pullback coefficients det F[I, J]
    let frame: Vec<Vec<f64>> =
        (0..mesh.n).map(|r| (0..d).map(|c| crate::scalar::rat_to_f64(&cell.frame[c][r])).collect()).collect();
    let pull: Vec<Vec<f64>> = loc
        .iter()
        .map(|mj| {
            let cols = crate::exterior::form::indices(*mj);
            amb.iter().map(|mi| crate::exterior::form::minor_det(&frame, &crate::exterior::form::indices(*mi), &cols)).collect()
        })
        .collect();
    let comp: Vec<Vec<(usize, f64, Poly<f64>)>> = tests
        .iter()
        .map(|z| {
            loc.iter()
                .enumerate()
                .filter_map(|(q, mj)| {
                    let c = z.coeff(full & !mj);
                    (!c.is_zero()).then(|| (q, merge_sign(*mj, full & !mj) as f64, c))
                })
                .collect()
        })
        .collect();
    let simplices: Vec<Vec<Vec<f64>>> = mesh.local_simplices::<f64>(d, i).into_iter().map(|(v, _)| v).collect();
    let mut out = vec![0.0; tests.len()];
    for verts in &simplices {
        let rule = quadrature::simplex_rule(d, order);
        let jac = quadrature::simplex_volume_factor(verts);
        for (t, wq) in rule.points.iter().zip(&rule.weights) {
            let s: Vec<f64> =
                (0..d).map(|a| verts[0][a] + t.iter().enumerate().map(|(j, tj)| tj * (verts[j + 1][a] - verts[0][a])).sum::<f64>()).collect();
            let x = cell.ambient(&s);
            let vals = w.eval(&x);
            let tr: Vec<f64> = pull.iter().map(|row| row.iter().zip(&vals).map(|(p, v)| p * v).sum()).collect();
            for (o, terms) in out.iter_mut().zip(&comp) {
                let mut g = 0.0;
                for (q, sg, c) in terms {
                    g += sg * tr[*q] * c.eval_f64(&s);
                }
                *o += wq * jac * g;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests;

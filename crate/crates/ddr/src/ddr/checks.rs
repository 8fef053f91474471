//! Residuals of the defining relations, assembled independently of the
//! operator matrices by direct integration over submesh simplices.

use super::DdrSpace;
use crate::exterior::form::Form;
use crate::scalar::{sign_pow, Rat, Scalar};
use crate::spaces::{full_basis, trimmed_basis, CellGeometry};

/// Largest residuals found on one cell.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CellResiduals {
    /// Defining relation of the discrete derivative, over `P_r Lambda^{d-k-1}`.
    pub def_d: f64,
    /// Integration by parts of the potential, over `P^-_{r+1} Lambda^{d-k-1}`.
    pub ipp_pot: f64,
    /// `int (P w - w_f) ^ zeta` over the component tests.
    pub projection: f64,
}

/// Largest residuals over a set of cells.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Residuals {
    pub def_d: f64,
    pub ipp_pot: f64,
    pub projection: f64,
    pub cells: usize,
}

impl Residuals {
    pub fn absorb(&mut self, c: &CellResiduals) {
        self.def_d = self.def_d.max(c.def_d);
        self.ipp_pot = self.ipp_pot.max(c.ipp_pot);
        self.projection = self.projection.max(c.projection);
        self.cells += 1;
    }

    pub fn max(&self) -> f64 {
        self.def_d.max(self.ipp_pot).max(self.projection)
    }
}

fn conv<S: Scalar>(v: Vec<Form<Rat>>) -> Vec<Form<S>> {
    v.iter().map(|f| f.map(S::from_rat)).collect()
}

impl<S: Scalar> DdrSpace<'_, S> {
    /// Boundary term `sum_f' eps int_f' P_f' ^ tr mu`.
    fn boundary_integral(&self, d: usize, i: usize, local: &[S], mu: &Form<S>) -> S {
        let data = &self.cells[d][i];
        let mut acc = S::zero();
        for &(j, eps) in &self.mesh.cell(d, i).boundary {
            let sub = &self.cells[d - 1][j];
            let sl: Vec<S> = self.embed(data, sub).iter().map(|&q| local[q].clone()).collect();
            let p = self.potential(d - 1, j, &sl);
            let tr = self.mesh.trace(d, i, d - 1, j, mu);
            let v = CellGeometry::<S>::new(self.mesh, d - 1, j).integrate(&p.wedge(&tr));
            acc = if eps > 0 { acc + v } else { acc - v };
        }
        acc
    }

    /// Residuals of the defining relations on `(d, i)` for a local vector.
    pub fn cell_residuals(&self, d: usize, i: usize, local: &[S]) -> CellResiduals {
        let k = self.k;
        let geo = CellGeometry::<S>::new(self.mesh, d, i);
        let data = &self.cells[d][i];
        let own: Vec<S> = local[data.block_range(d, i)].to_vec();
        let w = self.component_form(d, i, &own);
        let p = self.potential(d, i, local);
        let mut out = CellResiduals::default();
        for z in &self.bases[d].tests {
            let v = geo.integrate(&p.sub(&w).wedge(z));
            out.projection = out.projection.max(v.abs_f64());
        }
        if d == k {
            return out;
        }
        let dw = self.discrete_d(d, i, local);
        let sgn = sign_pow::<S>(k + 1);
        for mu in conv::<S>(full_basis::<Rat>(d, self.r as i64, d - k - 1)) {
            let lhs = geo.integrate(&dw.wedge(&mu));
            let rhs = sgn.clone() * geo.integrate(&w.wedge(&mu.d())) + self.boundary_integral(d, i, local, &mu);
            out.def_d = out.def_d.max((lhs - rhs).abs_f64());
        }
        for mu in conv::<S>(trimmed_basis::<Rat>(d, self.r as i64 + 1, d - k - 1)) {
            let lhs = sgn.clone() * geo.integrate(&p.wedge(&mu.d()));
            let rhs = geo.integrate(&dw.wedge(&mu)) - self.boundary_integral(d, i, local, &mu);
            out.ipp_pot = out.ipp_pot.max((lhs - rhs).abs_f64());
        }
        out
    }

    /// Residuals over every cell of dimension `>= k` for a global vector.
    pub fn residuals(&self, x: &[S]) -> Residuals {
        let mut out = Residuals::default();
        for d in self.k..=self.mesh.n {
            let cells = crate::par::map(self.mesh.num_cells(d), |i| self.cell_residuals(d, i, &self.restrict(d, i, x)));
            for c in &cells {
                out.absorb(c);
            }
        }
        out
    }
}

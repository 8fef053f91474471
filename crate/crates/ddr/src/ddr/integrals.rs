//! Exact cell integrals of polynomial forms through cached monomial moments.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::exterior::form::{det, simplex_map, Form};
use crate::exterior::poly::{Exps, Poly};
use crate::mesh::Mesh;
use crate::scalar::Scalar;

/// Integrates top-degree polynomial forms over a cell in its frame coordinates.
#[derive(Debug)]
pub struct Integrals<S> {
    pub dim: usize,
    pub metric: Vec<S>,
    /// Positively ordered submesh simplices: base point, edge matrix and determinant.
    maps: Vec<(Vec<S>, Vec<Vec<S>>, S)>,
    moments: Mutex<HashMap<Exps, S>>,
}

impl<S: Scalar> Integrals<S> {
    pub fn new(mesh: &Mesh, d: usize, i: usize) -> Self {
        let maps = mesh
            .local_simplices::<S>(d, i)
            .into_iter()
            .map(|(mut v, sign)| {
                if sign < 0 {
                    v.swap(0, 1);
                }
                let (a, m) = simplex_map(&v);
                let dt = det(&m);
                (a, m, dt)
            })
            .collect();
        Integrals { dim: d, metric: mesh.cell(d, i).metric_as(), maps, moments: Mutex::new(HashMap::new()) }
    }

    fn moment(&self, e: &Exps) -> S {
        if let Some(v) = self.moments.lock().unwrap().get(e) {
            return v.clone();
        }
        let mono = Poly::monomial(self.dim, *e, S::one());
        let mut acc = S::zero();
        for (a, m, dt) in &self.maps {
            acc = acc + mono.compose_affine(a, m, self.dim).integrate_reference() * dt.clone();
        }
        self.moments.lock().unwrap().insert(*e, acc.clone());
        acc
    }

    /// Integral of a polynomial density against `ds_0 ^ ... ^ ds_{d-1}`.
    pub fn poly(&self, p: &Poly<S>) -> S {
        let mut acc = S::zero();
        for (e, c) in &p.terms {
            acc = acc + c.clone() * self.moment(e);
        }
        acc
    }

    /// Integral of a top-degree form with the cell orientation.
    pub fn top(&self, w: &Form<S>) -> S {
        debug_assert_eq!(w.deg, self.dim);
        self.poly(&w.top_coeff())
    }

    /// `int a ^ b` for complementary degrees.
    pub fn pairing(&self, a: &Form<S>, b: &Form<S>) -> S {
        self.top(&a.wedge(b))
    }

    /// Scaled L2 inner product (true value divided by `sqrt(prod g)`).
    pub fn inner(&self, a: &Form<S>, b: &Form<S>) -> S {
        self.top(&a.wedge(&b.hodge_scaled(&self.metric)))
    }

    pub fn gram(&self, basis: &[Form<S>]) -> crate::linalg::Mat<S> {
        let n = basis.len();
        let mut g = crate::linalg::Mat::zeros(n, n);
        let stars: Vec<Form<S>> = basis.iter().map(|b| b.hodge_scaled(&self.metric)).collect();
        for i in 0..n {
            for j in i..n {
                let v = self.top(&basis[i].wedge(&stars[j]));
                g[(i, j)] = v.clone();
                g[(j, i)] = v;
            }
        }
        g
    }
}

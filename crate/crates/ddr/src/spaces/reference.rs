//! Trimmed finite elements on the reference simplex: degrees of freedom, dual
//! bases, the exterior derivative in dual coordinates and product tables.

use std::any::{Any, TypeId};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::{full_basis, trimmed_basis, trimmed_dim, FullSpace};
use crate::exterior::form::{minor_det, subsets, Form};
use crate::exterior::poly::monomials;
use crate::linalg::{inverse, Mat};
use crate::scalar::{Rat, Scalar};

/// `P^-_s Lambda^k` on the reference `d`-simplex `{t >= 0, sum t <= 1}`.
#[derive(Debug)]
pub struct RefElement<S> {
    pub d: usize,
    pub s: i64,
    pub k: usize,
    /// Degrees of freedom: sorted local vertex subset and weight index.
    pub dofs: Vec<(Vec<usize>, usize)>,
    /// Weight forms per subsimplex dimension, in the subsimplex parameters.
    pub weights: Vec<Vec<Form<S>>>,
    /// Dual basis in reference coordinates.
    pub basis: Vec<Form<S>>,
    dmat: OnceLock<Mat<S>>,
    products: OnceLock<Mat<S>>,
}

/// Affine parametrization of the subsimplex with sorted local vertices `g`.
pub fn sub_param<S: Scalar>(d: usize, g: &[usize]) -> (Vec<S>, Vec<Vec<S>>) {
    let e = |v: usize, i: usize| if v > 0 && v - 1 == i { S::one() } else { S::zero() };
    let a = (0..d).map(|i| e(g[0], i)).collect();
    let m = (0..d).map(|i| (1..g.len()).map(|j| e(g[j], i) - e(g[0], i)).collect()).collect();
    (a, m)
}

/// Sorted vertex subsets of the reference `d`-simplex of size `>= min + 1`,
/// ordered by size and then lexicographically.
pub fn sub_simplices(d: usize, min: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for size in (min + 1)..=(d + 1) {
        let mut cur: Vec<Vec<usize>> = Vec::new();
        for mask in 0u32..(1u32 << (d + 1)) {
            if mask.count_ones() as usize == size {
                cur.push((0..=d).filter(|i| mask & (1 << i) != 0).collect());
            }
        }
        cur.sort();
        out.extend(cur);
    }
    out
}

impl RefElement<Rat> {
    fn build(d: usize, s: i64, k: usize) -> Self {
        let weights: Vec<Vec<Form<Rat>>> = (0..=d)
            .map(|dd| if dd < k { Vec::new() } else { full_basis(dd, s + k as i64 - dd as i64 - 1, dd - k) })
            .collect();
        let mut dofs = Vec::new();
        for g in sub_simplices(d, k) {
            for w in 0..weights[g.len() - 1].len() {
                dofs.push((g.clone(), w));
            }
        }
        let trimmed = trimmed_basis::<Rat>(d, s, k);
        assert_eq!(trimmed.len(), trimmed_dim(d, s, k), "trimmed basis dimension mismatch");
        assert_eq!(dofs.len(), trimmed.len(), "degree of freedom count mismatch for ({d}, {s}, {k})");
        let mut el = RefElement { d, s, k, dofs, weights, basis: Vec::new(), dmat: OnceLock::new(), products: OnceLock::new() };
        let n = trimmed.len();
        let cols: Vec<Vec<Rat>> = trimmed.iter().map(|b| el.dofs_of(b)).collect();
        let dm = Mat::from_rows((0..n).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect(), n);
        let inv = inverse(&dm).expect("degrees of freedom are not unisolvent");
        el.basis = (0..n)
            .map(|j| {
                let mut f = Form::zero(d, k);
                for (l, b) in trimmed.iter().enumerate() {
                    f.add_assign_scaled(b, &inv[(l, j)]);
                }
                f
            })
            .collect();
        el
    }
}

impl<S: Scalar> RefElement<S> {
    pub fn dim(&self) -> usize {
        self.dofs.len()
    }

    /// Degrees of freedom of a form given in reference coordinates.
    pub fn dofs_of(&self, w: &Form<S>) -> Vec<S> {
        let mut out = Vec::with_capacity(self.dofs.len());
        let mut last: Option<(&Vec<usize>, Form<S>)> = None;
        for (g, wi) in &self.dofs {
            let dd = g.len() - 1;
            let tr = match &last {
                Some((lg, t)) if *lg == g => t.clone(),
                _ => {
                    let (a, m) = sub_param::<S>(self.d, g);
                    let t = w.pullback(&a, &m, dd);
                    last = Some((g, t.clone()));
                    t
                }
            };
            let top = tr.wedge(&self.weights[dd][*wi]);
            out.push(top.top_coeff().integrate_reference());
        }
        out
    }

    /// Indices of the degrees of freedom attached to the simplex itself.
    pub fn interior(&self) -> Vec<usize> {
        (0..self.dofs.len()).filter(|&i| self.dofs[i].0.len() == self.d + 1).collect()
    }

    /// Matrix of `d` from this element to `P^-_s Lambda^{k+1}` in dual coordinates.
    pub fn dmat(&self) -> &Mat<S> {
        self.dmat.get_or_init(|| {
            let target = ref_element::<S>(self.d, self.s, self.k + 1);
            let cols: Vec<Vec<S>> = self.basis.iter().map(|b| target.dofs_of(&b.d())).collect();
            let n = target.dim();
            Mat::from_rows((0..n).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect(), cols.len())
        })
    }

    /// Table `R[(i, I), (j, J)] = int phi_{i, I} phi_{j, J}` over the reference simplex,
    /// with row index `i * C(d, k) + I`.
    pub fn products(&self) -> &Mat<S> {
        self.products.get_or_init(|| {
            let subs = subsets(self.d, self.k);
            let c = subs.len();
            let mons = monomials(self.d, self.s);
            let sp = FullSpace::new(self.d, self.s, 0);
            let mut a = Mat::zeros(self.dim() * c, mons.len());
            for (i, b) in self.basis.iter().enumerate() {
                for (ii, m) in subs.iter().enumerate() {
                    let coeffs = sp.coeffs(&Form::scalar(b.coeff(*m)));
                    for (q, v) in coeffs.into_iter().enumerate() {
                        a[(i * c + ii, q)] = v;
                    }
                }
            }
            let mut mom = Mat::zeros(mons.len(), mons.len());
            for (p, ea) in mons.iter().enumerate() {
                for (q, eb) in mons.iter().enumerate() {
                    let mut e = *ea;
                    for x in 0..e.len() {
                        e[x] += eb[x];
                    }
                    mom[(p, q)] = crate::exterior::poly::Poly::monomial(self.d, e, S::one()).integrate_reference();
                }
            }
            a.mul(&mom).mul(&a.transpose())
        })
    }

    /// Scaled Gram matrix on the simplex `s = p0 + m t` for the diagonal metric `g`.
    pub fn gram(&self, m: &Mat<S>, g: &[S]) -> Mat<S> {
        let d = self.d;
        let minv = inverse(m).expect("degenerate simplex");
        // inverse metric in reference coordinates: m^-1 diag(1/g) m^-T
        let mut ginv: Vec<Vec<S>> = vec![vec![S::zero(); d]; d];
        for a in 0..d {
            for b in 0..d {
                let mut acc = S::zero();
                for (c, gc) in g.iter().enumerate().take(d) {
                    acc = acc + minv[(a, c)].clone() * minv[(b, c)].clone() / gc.clone();
                }
                ginv[a][b] = acc;
            }
        }
        let subs = subsets(d, self.k);
        let c = subs.len();
        let idx: Vec<Vec<usize>> = subs.iter().map(|m| crate::exterior::form::indices(*m)).collect();
        let comp: Vec<Vec<S>> = (0..c).map(|p| (0..c).map(|q| minor_det(&ginv, &idx[p], &idx[q])).collect()).collect();
        let det = {
            let rows: Vec<Vec<S>> = (0..d).map(|i| m.row_vec(i)).collect();
            crate::exterior::form::det(&rows)
        };
        let vol = if det.to_f64() < 0.0 { -det } else { det };
        let r = self.products();
        let n = self.dim();
        let mut out = Mat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = S::zero();
                for p in 0..c {
                    for q in 0..c {
                        if comp[p][q].is_zero() {
                            continue;
                        }
                        let v = &r[(i * c + p, j * c + q)];
                        if !v.is_zero() {
                            acc = acc + comp[p][q].clone() * v.clone();
                        }
                    }
                }
                let v = acc * vol.clone();
                out[(i, j)] = v.clone();
                out[(j, i)] = v;
            }
        }
        out
    }

    fn convert(src: &RefElement<Rat>) -> Self {
        let f = |c: &Rat| S::from_rat(c);
        RefElement {
            d: src.d,
            s: src.s,
            k: src.k,
            dofs: src.dofs.clone(),
            weights: src.weights.iter().map(|ws| ws.iter().map(|w| w.map(f)).collect()).collect(),
            basis: src.basis.iter().map(|b| b.map(f)).collect(),
            dmat: OnceLock::new(),
            products: OnceLock::new(),
        }
    }
}

type Cache = Mutex<HashMap<(TypeId, usize, i64, usize), Arc<dyn Any + Send + Sync>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Shared reference element for `(d, s, k)`.
pub fn ref_element<S: Scalar>(d: usize, s: i64, k: usize) -> Arc<RefElement<S>> {
    let key = (TypeId::of::<S>(), d, s, k);
    if let Some(e) = cache().lock().unwrap().get(&key) {
        return e.clone().downcast::<RefElement<S>>().expect("cache type mismatch");
    }
    let built: Arc<RefElement<S>> = if TypeId::of::<S>() == TypeId::of::<Rat>() {
        let el = RefElement::<Rat>::build(d, s, k);
        let any: Arc<dyn Any + Send + Sync> = Arc::new(el);
        any.downcast::<RefElement<S>>().expect("rational element")
    } else {
        let exact = ref_element::<Rat>(d, s, k);
        Arc::new(RefElement::<S>::convert(&exact))
    };
    let mut guard = cache().lock().unwrap();
    let entry = guard.entry(key).or_insert_with(|| built.clone() as Arc<dyn Any + Send + Sync>);
    entry.clone().downcast::<RefElement<S>>().expect("cache type mismatch")
}

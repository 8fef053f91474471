use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::exterior::random;
use crate::mesh::{build_family, polygonal, Family, FamilySpec, SubmeshPolicy};
use crate::scalar::{rat, rint};

fn mesh(f: Family, n: usize, l: usize) -> Mesh {
    build_family(FamilySpec::new(f, n, l)).unwrap()
}

fn meshes_2d() -> Vec<Mesh> {
    vec![
        mesh(Family::Triangular, 2, 1),
        mesh(Family::CartesianPolygonal, 2, 1),
        mesh(Family::HexagonalDominant, 2, 0),
    ]
}

#[test]
fn edge_derivative_is_vertex_difference() {
    let pts = vec![vec![rint(0)], vec![rat(3, 2)]];
    let m = crate::mesh::simplicial(1, pts, vec![vec![0, 1]]).unwrap();
    let sp = DdrSpace::<Rat>::new(&m, 0, 0).unwrap();
    assert_eq!(sp.dim, 2);
    let x = vec![rint(2), rint(7)];
    let dw = sp.discrete_d(1, 0, &sp.restrict(1, 0, &x));
    let integral = sp.integrals[1][0].top(&dw);
    let (a, b) = (m.cell(1, 0).verts[0], m.cell(1, 0).verts[1]);
    let eps_b = m.relative_orientation(1, 0, b).unwrap();
    let eps_a = m.relative_orientation(1, 0, a).unwrap();
    assert_eq!(eps_a, -eps_b);
    let expect = if eps_b > 0 { rint(7 - 2) } else { rint(2 - 7) };
    assert_eq!(integral, expect);
}

#[test]
fn defining_relations_hold_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut ms = meshes_2d();
    ms.push(mesh(Family::Triangular, 3, 0));
    for m in &ms {
        for r in 0..=1 {
            for k in 0..=m.n {
                let sp = DdrSpace::<Rat>::new(m, r, k).unwrap();
                for _ in 0..2 {
                    let x = random::vector::<Rat>(&mut rng, sp.dim);
                    let res = sp.residuals(&x);
                    assert_eq!(res.max(), 0.0, "n={} r={r} k={k}: {res:?}", m.n);
                }
            }
        }
    }
}

#[test]
fn potential_and_derivative_reproduce_polynomials() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for m in meshes_2d() {
        for r in 0..=2 {
            for k in 0..=2 {
                let sp = DdrSpace::<Rat>::new(&m, r, k).unwrap();
                let w = random::form::<Rat>(&mut rng, 2, k, r);
                let x = sp.interpolate_poly(&w);
                for d in k..=2 {
                    for i in 0..m.num_cells(d) {
                        let loc = sp.restrict(d, i, &x);
                        let tr = ambient_trace(&m, d, i, &w);
                        assert_eq!(sp.potential(d, i, &loc), tr, "P I = Id, r={r} k={k} d={d}");
                        if d > k {
                            assert_eq!(sp.discrete_d(d, i, &loc), tr.d(), "d I = d, r={r} k={k}");
                        }
                        for dd in k..d {
                            for &j in m.closure(d, i, dd) {
                                let del = sp.potential_defect_matrix(d, i, dd, j).mul_vec(&loc);
                                assert!(del.iter().all(|v| *v == rint(0)));
                            }
                        }
                        assert_eq!(sp.stabilization(d, i, &loc, &loc), 0.0);
                    }
                }
            }
        }
    }
}

#[test]
fn complex_property_and_commuting_potential() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for m in meshes_2d() {
        for r in 0..=1 {
            let spaces: Vec<DdrSpace<Rat>> = (0..=2).map(|k| DdrSpace::new(&m, r, k).unwrap()).collect();
            for k in 0..2 {
                let x = random::vector::<Rat>(&mut rng, spaces[k].dim);
                let dx = spaces[k].global_d(&spaces[k + 1], &x);
                for d in (k + 1)..=2 {
                    for i in 0..m.num_cells(d) {
                        let pd = spaces[k + 1].potential(d, i, &spaces[k + 1].restrict(d, i, &dx));
                        assert_eq!(pd, spaces[k].discrete_d(d, i, &spaces[k].restrict(d, i, &x)));
                    }
                }
                if k == 0 {
                    let ddx = spaces[1].global_d(&spaces[2], &dx);
                    assert!(ddx.iter().all(|v| *v == rint(0)));
                }
            }
        }
    }
}

#[test]
fn closed_polynomials_have_zero_derivative() {
    let m = mesh(Family::HexagonalDominant, 2, 0);
    let sp0 = DdrSpace::<Rat>::new(&m, 1, 0).unwrap();
    let sp1 = DdrSpace::<Rat>::new(&m, 1, 1).unwrap();
    // d(x^2 - y) is closed; interpolate it in the 1-form space
    let f = Form::scalar(Poly::var(2, 0).mul(&Poly::var(2, 0)).sub(&Poly::var(2, 1)));
    let sp2 = DdrSpace::<Rat>::new(&m, 1, 2).unwrap();
    let x = sp1.interpolate_poly(&f.d());
    assert!(sp1.global_d(&sp2, &x).iter().all(|v| *v == rint(0)));
    let _ = sp0;
}

#[test]
fn norms_are_homogeneous_and_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let m = mesh(Family::CartesianPolygonal, 2, 1);
    for k in 0..=2 {
        let sp = DdrSpace::<Rat>::new(&m, 1, k).unwrap();
        let x = random::vector::<Rat>(&mut rng, sp.dim);
        let n1 = sp.global_norm(&x);
        let x3: Vec<Rat> = x.iter().map(|v| v * rint(-3)).collect();
        assert!((sp.global_norm(&x3) - 3.0 * n1).abs() < 1e-12 * n1);
        for i in 0..m.num_cells(2) {
            let loc = sp.restrict(2, i, &x);
            let full = sp.component_norm(2, i, &loc);
            for b in 0..sp.cell(2, i).closure.len() {
                let mut z = loc.clone();
                for q in sp.cell(2, i).offsets[b]..sp.cell(2, i).offsets[b + 1] {
                    z[q] = rint(0);
                }
                assert!(sp.component_norm(2, i, &z) <= full + 1e-12);
            }
            assert!(sp.stabilization(2, i, &loc, &loc) >= -1e-12);
        }
        // on a k-cell the component norm is the L2 norm
        let i = 0;
        let loc = sp.restrict(k, i, &x);
        let w = sp.component_form(k, i, &loc);
        let l2 = if k == 0 {
            loc[0].to_f64().abs()
        } else {
            (sp.integrals[k][i].inner(&w, &w).to_f64() * m.cell(k, i).volume_factor()).sqrt()
        };
        assert!((sp.component_norm(k, i, &loc) - l2).abs() < 1e-12);
    }
}

#[test]
fn smooth_moments_match_exact_moments() {
    let m = mesh(Family::HexagonalDominant, 2, 0);
    for k in 0..=2 {
        let sp = DdrSpace::<f64>::new(&m, 1, k).unwrap();
        let sf = crate::exterior::smooth::library::polynomial(2, k, 2);
        let pf = smooth_to_poly(&sf);
        let exact = sp.interpolate_poly(&pf);
        let quad = sp.interpolate_by(|d, i, tests| smooth_moments(&m, d, i, &sf, tests, 6));
        for (a, b) in exact.iter().zip(&quad) {
            assert!((a - b).abs() < 1e-11, "{a} vs {b}");
        }
    }
}

/// Expands a smooth form whose factors are all polynomial.
fn smooth_to_poly(sf: &SmoothForm) -> Form<f64> {
    use crate::exterior::smooth::Factor;
    let mut out = Form::zero(sf.n, sf.k);
    for (m, terms) in subsets(sf.n, sf.k).into_iter().zip(&sf.comps) {
        for t in terms {
            let mut p = Poly::constant(sf.n, t.coef);
            for (i, f) in t.factors.iter().enumerate() {
                let Factor::Poly(c) = f else { panic!("non-polynomial factor") };
                let mut q = Poly::zero(sf.n);
                for (e, ci) in c.iter().enumerate() {
                    let mut ex = [0u8; 4];
                    ex[i] = e as u8;
                    q.add_term(ex, *ci);
                }
                p = p.mul(&q);
            }
            out.add_term(m, p);
        }
    }
    out
}

#[test]
fn fan_submesh_gives_same_operators() {
    // The operators do not depend on the chosen submesh.
    let pts = vec![vec![rint(0), rint(0)], vec![rint(2), rint(0)], vec![rint(2), rint(1)], vec![rint(0), rint(1)]];
    let a = polygonal(pts.clone(), vec![(vec![0, 1, 2, 3], SubmeshPolicy::Diagonal)]).unwrap();
    let b = polygonal(pts, vec![(vec![0, 1, 2, 3], SubmeshPolicy::Fan)]).unwrap();
    for k in 0..=2 {
        let sa = DdrSpace::<Rat>::new(&a, 1, k).unwrap();
        let sb = DdrSpace::<Rat>::new(&b, 1, k).unwrap();
        assert_eq!(sa.cell(2, 0).pot, sb.cell(2, 0).pot);
    }
}

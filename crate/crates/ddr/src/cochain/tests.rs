use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::exterior::form::det;
use crate::mesh::{build_family, Family, FamilySpec};
use crate::scalar::{rint, Rat};
use crate::spaces::full_basis;

fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rat> {
    (0..n).map(|_| rint(rng.gen_range(-5..=5))).collect()
}

fn meshes() -> Vec<Mesh> {
    [
        FamilySpec::new(Family::Triangular, 2, 1),
        FamilySpec::new(Family::CartesianPolygonal, 2, 1),
        FamilySpec::new(Family::HexagonalDominant, 2, 1),
        FamilySpec::new(Family::Triangular, 3, 0),
    ]
    .into_iter()
    .map(|s| build_family(s).unwrap())
    .collect()
}

/// Unit cube split into twelve pyramids over its boundary triangles, with an
/// interior apex.
fn cube_fan() -> (Complex, Vec<Vec<Rat>>) {
    let mut pts: Vec<Vec<Rat>> = Vec::new();
    for z in 0..2 {
        for y in 0..2 {
            for x in 0..2 {
                pts.push(vec![rint(x), rint(y), rint(z)]);
            }
        }
    }
    let h = Rat::new(1.into(), 2.into());
    pts.push(vec![h.clone(), h.clone(), h]);
    let faces = [[0, 1, 3, 2], [4, 5, 7, 6], [0, 1, 5, 4], [2, 3, 7, 6], [0, 2, 6, 4], [1, 3, 7, 5]];
    let mut btops = Vec::new();
    for f in faces {
        btops.push(vec![f[0], f[1], f[2]]);
        btops.push(vec![f[0], f[2], f[3]]);
    }
    let tops: Vec<Vec<usize>> = btops.iter().map(|b| sorted(&[b[0], b[1], b[2], 8])).collect();
    let signs = tops.iter().map(|t| orientation(&pts, t)).collect::<Vec<_>>();
    (Complex::new(&tops, &signs, &btops), pts)
}

fn orientation(pts: &[Vec<Rat>], t: &[usize]) -> i32 {
    let d = t.len() - 1;
    let m: Vec<Vec<Rat>> = (0..d).map(|r| (0..d).map(|c| &pts[t[c + 1]][r] - &pts[t[0]][r]).collect()).collect();
    if det(&m) > rint(0) {
        1
    } else {
        -1
    }
}

fn complexes() -> Vec<Complex> {
    let mut out = Vec::new();
    for m in meshes() {
        for d in 1..=m.n {
            for i in 0..m.num_cells(d).min(4) {
                out.push(Complex::of_cell(&m, d, i));
            }
        }
    }
    out.push(cube_fan().0);
    out
}

#[test]
fn boundary_squares_to_zero() {
    for c in complexes() {
        for k in 1..=c.dim {
            let prod = c.boundary_matrix::<Rat>(k - 1).mul(&c.boundary_matrix::<Rat>(k));
            assert_eq!(prod.max_abs(), 0.0);
        }
        // the fundamental chain is a relative cycle
        let b = c.boundary(c.dim, &c.fundamental_chain::<Rat>());
        for (j, v) in b.iter().enumerate() {
            assert!(c.on_boundary[c.dim - 1][j] || *v == rint(0));
        }
    }
}

#[test]
fn cycle_complement_is_dual_to_its_simplices() {
    for c in complexes() {
        for k in 0..c.dim {
            let all = c.cycles::<Rat>(k, false).cols;
            let bnd = c.cycles::<Rat>(k, true).cols;
            let comp = c.cycle_complement::<Rat>(k);
            assert_eq!(comp.len(), all - bnd, "complement size at k = {k}");
            for (f, z) in &comp {
                assert!(!c.on_boundary[k][*f]);
                assert!(c.boundary(k, z).iter().all(|v| *v == rint(0)));
                for (g, _) in &comp {
                    assert_eq!(z[*g], if g == f { rint(1) } else { rint(0) });
                }
            }
        }
    }
}

#[test]
fn cochain_bvp_reproduces_coboundaries() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for c in complexes() {
        for k in 0..c.dim {
            for _ in 0..100 {
                let l0 = rand_vec(&mut rng, c.count(k));
                let xi = c.coboundary(k, &l0);
                let l = c.solve_bvp(k, &xi, &l0).unwrap();
                assert_eq!(c.coboundary(k, &l), xi);
                assert_eq!(c.boundary_part(k, &l), c.boundary_part(k, &l0));
            }
        }
    }
}

#[test]
fn incompatible_data_is_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for c in complexes() {
        for k in 0..c.dim {
            let l0 = rand_vec(&mut rng, c.count(k));
            let mut xi = c.coboundary(k, &l0);
            let j = c.interior_simplices(k + 1).first().copied().unwrap_or(0);
            xi[j] = &xi[j] + rint(1);
            match c.solve_bvp(k, &xi, &l0) {
                Err(Error::Compatibility { defect, .. }) => assert!(defect > 0.0),
                other => panic!("expected a compatibility error, got {other:?}"),
            }
        }
    }
}

#[test]
fn whitney_forms_match_barycentric_formula() {
    let (c, pts) = cube_fan();
    let fe3: Vec<FeSpace<Rat>> = (0..=3).map(|k| FeSpace::new(3, 1, k, c.simplices[3].clone(), |p| pts[p].clone(), vec![rint(1); 3])).collect();
    for (t, top) in c.simplices[3].iter().enumerate().take(3) {
        let verts: Vec<Vec<Rat>> = top.iter().map(|&p| pts[p].clone()).collect();
        for k in 0..=3 {
            let fe = &fe3[k];
            for g in crate::spaces::reference::sub_simplices(3, k).into_iter().filter(|g| g.len() == k + 1) {
                let key: Vec<usize> = g.iter().map(|&v| top[v]).collect();
                let mut e = vec![rint(0); fe.dim()];
                e[fe.index[&(key, 0)]] = rint(1);
                assert_eq!(fe.eval_on(t, &e), whitney_form(&verts, &g).unwrap());
            }
        }
    }
}

#[test]
fn de_rham_and_whitney_maps() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for m in meshes() {
        let d = m.n;
        let c = Complex::of_cell(&m, d, 0);
        for k in 0..=d {
            let w1 = FeSpace::<Rat>::on_cell(&m, d, 0, 1, k);
            let l = rand_vec(&mut rng, c.count(k));
            assert_eq!(de_rham(&w1, &c, &whitney(&w1, &c, &l)), l);
            // R commutes with d on a higher-order space
            if k < d {
                let hi = FeSpace::<Rat>::on_cell(&m, d, 0, 2, k);
                let hi1 = FeSpace::<Rat>::on_cell(&m, d, 0, 2, k + 1);
                let a = rand_vec(&mut rng, hi.dim());
                let da = hi.dmat(&hi1).mul_vec(&a);
                assert_eq!(de_rham(&hi1, &c, &da), c.coboundary(k, &de_rham(&hi, &c, &a)));
            }
        }
        // on top simplices it returns oriented integrals of polynomial data
        let hi = FeSpace::<Rat>::on_cell(&m, d, 0, 3, d);
        let p = &full_basis::<Rat>(d, 2, d)[rng.gen_range(0..3)];
        let r = de_rham(&hi, &c, &hi.interpolate(p));
        for (t, top) in c.simplices[d].iter().enumerate() {
            let verts: Vec<Vec<Rat>> = top.iter().map(|&q| m.local_point::<Rat>(d, 0, q)).collect();
            assert_eq!(r[t], p.integrate_simplex(&verts));
        }
    }
}

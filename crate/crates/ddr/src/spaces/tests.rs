use super::*;
use crate::exterior::form::inner_simplex_scaled;
use crate::mesh::{build_family, Family, FamilySpec};
use crate::scalar::{rat, rint, Rat};

#[test]
fn dimensions() {
    assert_eq!(full_basis::<Rat>(2, 0, 1).len(), 2);
    assert_eq!(full_basis::<Rat>(2, 1, 0).len(), 3);
    assert_eq!(full_basis::<Rat>(3, 2, 2).len(), 30);
    assert_eq!(trimmed_basis::<Rat>(2, 1, 1).len(), 3);
    assert_eq!(trimmed_basis::<Rat>(2, 0, 1).len(), 0);
    for r in 0..=3 {
        assert_eq!(trimmed_basis::<Rat>(1, r, 1).len(), r as usize);
    }
}

#[test]
fn trimmed_dimension_formula() {
    for d in 1..=3 {
        for k in 0..=d {
            for r in 0..=3 {
                assert_eq!(trimmed_basis::<Rat>(d, r, k).len(), trimmed_dim(d, r, k), "d={d} r={r} k={k}");
            }
        }
    }
}

#[test]
fn koszul_splitting() {
    let dx = Form::<Rat>::basis(2, 0b01);
    let (a, b) = decompose_koszul(2, 0, 1, &dx).unwrap();
    assert_eq!((a, b.is_zero()), (dx, true));
    let rot = Form::<Rat>::term(2, 0b10, Poly::var(2, 0)).sub(&Form::term(2, 0b01, Poly::var(2, 1)));
    let (a, b) = decompose_koszul(2, 1, 1, &rot).unwrap();
    assert!(a.is_zero());
    assert_eq!(b, rot);
}

#[test]
fn reference_elements_are_unisolvent() {
    for d in 1..=3 {
        for k in 0..=d {
            for s in 1..=3 {
                let el = ref_element::<Rat>(d, s, k);
                for (j, b) in el.basis.iter().enumerate() {
                    let v = el.dofs_of(b);
                    for (i, x) in v.iter().enumerate() {
                        assert_eq!(*x, rint((i == j) as i64));
                    }
                }
            }
        }
    }
}

#[test]
fn bubble_dimensions_match_polynomial_spaces() {
    // dim of the bubble space P-_{t+l+1} Lambda^{d-l} equals dim P_t Lambda^l
    for d in 1..=3 {
        for l in 0..=d {
            for t in 0..=2 {
                let el = ref_element::<Rat>(d, t + l as i64 + 1, d - l);
                assert_eq!(el.interior().len(), full_dim(d, t, l), "d={d} l={l} t={t}");
            }
        }
    }
}

#[test]
fn whitney_space_on_square() {
    let mesh = build_family(FamilySpec::new(Family::CartesianPolygonal, 2, 0)).unwrap();
    let fe = FeSpace::<Rat>::on_cell(&mesh, 2, 0, 1, 1);
    assert_eq!(fe.dim(), 5);
    let hats = FeSpace::<Rat>::on_cell(&mesh, 2, 0, 1, 0);
    let one = hats.interpolate(&Form::scalar(Poly::one(2)));
    assert!(one.iter().all(|v| *v == rint(1)));
}

#[test]
fn traces_are_single_valued() {
    let mesh = build_family(FamilySpec::new(Family::HexagonalDominant, 2, 0)).unwrap();
    let fe = FeSpace::<Rat>::on_cell(&mesh, 2, 1, 2, 1);
    let c: Vec<Rat> = (0..fe.dim()).map(|i| rat((i as i64 * 7) % 5 - 2, 3)).collect();
    for (a, ta) in fe.tops.iter().enumerate() {
        for (b, tb) in fe.tops.iter().enumerate().skip(a + 1) {
            let shared: Vec<usize> = ta.iter().filter(|p| tb.contains(p)).cloned().collect();
            if shared.len() < 2 {
                continue;
            }
            let pts: Vec<Vec<Rat>> = shared.iter().map(|&p| mesh.local_point(2, 1, p)).collect();
            let (p0, m) = crate::exterior::form::simplex_map(&pts);
            let fa = fe.eval_on(a, &c).pullback(&p0, &m, 1);
            let fb = fe.eval_on(b, &c).pullback(&p0, &m, 1);
            assert_eq!(fa, fb);
        }
    }
}

#[test]
fn exterior_derivative_closure() {
    let mesh = build_family(FamilySpec::new(Family::Triangular, 2, 0)).unwrap();
    for k in 0..2 {
        let a = FeSpace::<Rat>::on_cell(&mesh, 2, 0, 2, k);
        let b = FeSpace::<Rat>::on_cell(&mesh, 2, 0, 2, k + 1);
        let dm = a.dmat(&b);
        let c: Vec<Rat> = (0..a.dim()).map(|i| rat(i as i64 % 4 - 1, 2)).collect();
        let dc = dm.mul_vec(&c);
        for t in 0..a.tops.len() {
            assert_eq!(b.eval_on(t, &dc), a.eval_on(t, &c).d());
        }
    }
}

#[test]
fn gram_matches_direct_integration() {
    let mesh = build_family(FamilySpec::new(Family::Triangular, 3, 0)).unwrap();
    let fe = FeSpace::<Rat>::on_cell(&mesh, 2, 3, 2, 1);
    let g = fe.gram();
    let t = 0;
    let pts: Vec<Vec<Rat>> = fe.tops[t].iter().map(|&p| mesh.local_point(2, 3, p)).collect();
    let b = fe.local_basis(t);
    let gl = fe.reference.gram(&fe.maps[t].1, &fe.metric);
    for i in 0..b.len() {
        for j in 0..b.len() {
            let v = inner_simplex_scaled(&b[i], &b[j], &fe.metric, &pts);
            assert_eq!(v, gl[(i, j)]);
        }
    }
    assert_eq!(g.rows, fe.dim());
}

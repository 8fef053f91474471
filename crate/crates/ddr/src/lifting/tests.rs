use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::exterior::form::Form;
use crate::exterior::poly::Poly;
use crate::exterior::random;
use crate::linalg::quad_form;
use crate::mesh::{build_family, polygonal, simplicial, Family, FamilySpec, Mesh, SubmeshPolicy};
use crate::scalar::{rat, rint};
use crate::spaces::koszul_basis;
use crate::{Error, Rat};

fn mesh(f: Family, n: usize, l: usize) -> Mesh {
    build_family(FamilySpec::new(f, n, l)).unwrap()
}

fn pentagon() -> Mesh {
    let pts = [(0, 0), (2, 0), (3, 2), (1, 3), (-1, 1)].iter().map(|&(x, y)| vec![rint(x), rint(y)]).collect();
    polygonal(pts, vec![(vec![0, 1, 2, 3, 4], SubmeshPolicy::Fan)]).unwrap()
}

/// Cells exercising interior submesh vertices, plain simplices and an edge.
fn cells() -> Vec<(Mesh, usize)> {
    let edge = simplicial(1, vec![vec![rint(0)], vec![rat(3, 2)]], vec![vec![0, 1]]).unwrap();
    vec![(pentagon(), 2), (mesh(Family::Triangular, 3, 0), 3), (mesh(Family::Triangular, 2, 0), 2), (edge, 1)]
}

fn zero_col<S: Scalar>(n: usize) -> Vec<S> {
    vec![S::zero(); n]
}

#[test]
fn manufactured_data_is_solved_with_minimal_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (m, d) in cells() {
        for s in 1..=2 {
            for k in 0..d {
                let bvp = FeBvp::<Rat>::on_cell(&m, d, 0, s, k).unwrap();
                let mu = random::vector::<Rat>(&mut rng, bvp.trial.dim());
                let xi = bvp.dmat.mul_vec(&mu);
                let sol = bvp.solve(&xi, &mu).unwrap();
                assert_eq!(sol.residual, 0.0, "d={d} s={s} k={k}");
                assert_eq!(sol.kkt, 0.0, "d={d} s={s} k={k}");
                assert!(bvp.norm2(&sol.x) <= bvp.norm2(&mu), "d={d} s={s} k={k}");
            }
        }
    }
}

#[test]
fn zero_data_gives_zero() {
    for (m, d) in cells() {
        for k in 0..d {
            let bvp = FeBvp::<Rat>::on_cell(&m, d, 0, 2, k).unwrap();
            let sol = bvp.solve(&zero_col(bvp.target.dim()), &zero_col(bvp.trial.dim())).unwrap();
            assert!(sol.x.iter().all(|v| v.is_zero()));
            let ex = bvp.explicit(&zero_col(bvp.target.dim()), &zero_col(bvp.trial.dim())).unwrap();
            assert!(ex.iter().all(|v| v.is_zero()));
        }
    }
}

#[test]
fn edge_problem_is_the_antiderivative() {
    let m = simplicial(1, vec![vec![rint(1)], vec![rat(5, 2)]], vec![vec![0, 1]]).unwrap();
    let bvp = FeBvp::<Rat>::on_cell(&m, 1, 0, 2, 0).unwrap();
    // xi = (2 + 3 x) dx in the frame coordinate x of the edge
    let p = Poly::affine(1, rint(2), &[rint(3)]);
    let xi_form = Form::term(1, 1, p);
    let xi = bvp.target.interpolate(&xi_form);
    let mut antider = Form::scalar(Poly::affine(1, rint(0), &[rint(2)]).add(&Poly::monomial(1, [2, 0, 0, 0], rat(3, 2))));
    antider = antider.add(&Form::scalar(Poly::constant(1, rint(7))));
    let exact = bvp.trial.interpolate(&antider);
    let theta = bvp.boundary_part(&crate::lifting::column(&exact)).col_vec(0);
    let sol = bvp.solve(&xi, &theta).unwrap();
    assert_eq!(sol.x, exact);
    assert_eq!(bvp.explicit(&xi, &theta).unwrap(), exact);
}

#[test]
fn incompatible_data_names_the_condition() {
    let m = pentagon();
    let bvp = FeBvp::<Rat>::on_cell(&m, 2, 0, 1, 1).unwrap();
    let mut xi = zero_col::<Rat>(bvp.target.dim());
    xi[0] = rint(1);
    match bvp.solve(&xi, &zero_col(bvp.trial.dim())) {
        Err(Error::Compatibility { condition, defect }) => {
            assert_eq!(condition, "integral");
            assert!(defect > 0.0);
        }
        other => panic!("expected an integral failure, got {other:?}"),
    }
    let bvp = FeBvp::<Rat>::on_cell(&m, 2, 0, 1, 0).unwrap();
    let mut theta = zero_col::<Rat>(bvp.trial.dim());
    let j = (0..theta.len()).find(|&j| bvp.boundary[j]).unwrap();
    theta[j] = rint(1);
    match bvp.solve(&zero_col(bvp.target.dim()), &theta) {
        Err(Error::Compatibility { condition, .. }) => assert_eq!(condition, "boundary trace"),
        other => panic!("expected a boundary trace failure, got {other:?}"),
    }
    let tet = mesh(Family::Triangular, 3, 0);
    let bvp = FeBvp::<Rat>::on_cell(&tet, 3, 0, 1, 0).unwrap();
    let xi: Vec<Rat> = (0..bvp.target.dim()).map(|j| rint(j as i64 + 1)).collect();
    match bvp.solve(&xi, &zero_col(bvp.trial.dim())) {
        Err(Error::Compatibility { condition, .. }) => assert_eq!(condition, "closedness"),
        other => panic!("expected a closedness failure, got {other:?}"),
    }
}

#[test]
fn explicit_solution_differs_by_a_kernel_element() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut count = 0;
    for (m, d) in cells() {
        for s in 1..=2 {
            for k in 0..d {
                let bvp = FeBvp::<Rat>::on_cell(&m, d, 0, s, k).unwrap();
                for _ in 0..4 {
                    let mu = random::vector::<Rat>(&mut rng, bvp.trial.dim());
                    let xi = bvp.dmat.mul_vec(&mu);
                    let ex = bvp.explicit(&xi, &mu).unwrap();
                    let (xm, tm) = (column(&xi), column(&mu));
                    assert_eq!(bvp.residual(&column(&ex), &xm, &tm), 0.0, "d={d} s={s} k={k}");
                    let mn = bvp.solve(&xi, &mu).unwrap().x;
                    let diff: Vec<Rat> = ex.iter().zip(&mn).map(|(a, b)| a - b).collect();
                    let z = Mat::zeros(bvp.target.dim(), 1);
                    assert_eq!(bvp.residual(&column(&diff), &z, &Mat::zeros(bvp.trial.dim(), 1)), 0.0);
                    assert!(bvp.norm2(&ex) >= bvp.norm2(&mn));
                    count += 1;
                }
            }
        }
    }
    assert!(count >= 50);
}

#[test]
fn bubble_problem_residuals_vanish() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    // the test space is empty for 0-forms, so tau = 0 there
    for d in 1..=3 {
        assert!(koszul_basis::<Rat>(d, 0, d).is_empty());
    }
    for (m, d) in cells() {
        for k in 1..=d {
            for s in 1..=2 {
                let bub = BubbleProblem::<Rat>::on_cell(&m, d, 0, s, k).unwrap();
                let zeta: Vec<Form<Rat>> = (0..3).map(|_| random::form(&mut rng, d, k, 2)).collect();
                let rhs: Vec<Mat<Rat>> = (0..bub.space.tops.len()).map(|t| bub.rhs_poly(t, &zeta)).collect();
                let tau = bub.solve(&rhs).unwrap();
                assert_eq!(bub.residual(&tau, &rhs), 0.0, "d={d} k={k} s={s}");
                let zero: Vec<Mat<Rat>> = rhs.iter().map(|b| Mat::zeros(b.rows, 1)).collect();
                assert!(bub.solve(&zero).unwrap().data.iter().all(|v| v.is_zero()));
            }
        }
    }
}

#[test]
fn bubble_solution_has_zero_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let m = pentagon();
    let bub = BubbleProblem::<Rat>::on_cell(&m, 2, 0, 1, 1).unwrap();
    let zeta = vec![random::form::<Rat>(&mut rng, 2, 1, 1)];
    let rhs: Vec<Mat<Rat>> = (0..bub.space.tops.len()).map(|t| bub.rhs_poly(t, &zeta)).collect();
    let tau = bub.solve(&rhs).unwrap();
    for j in 0..bub.space.dim() {
        if bub.space.dofs[j].0.len() < 3 {
            assert!(tau[(j, 0)].is_zero());
        }
    }
}

#[test]
fn vertex_spaces_hold_point_values() {
    let m = mesh(Family::Triangular, 2, 0);
    let fe = FeSpace::<Rat>::on_cell(&m, 0, 1, 3, 0);
    assert_eq!(fe.dim(), 1);
    let c = fe.interpolate(&Form::scalar(Poly::constant(0, rat(7, 3))));
    assert_eq!(c, vec![rat(7, 3)]);
}

fn check_exact(m: &Mesh, r: usize, k: usize) {
    let sp = DdrSpace::<Rat>::new(m, r, k).unwrap();
    let next = (k < m.n).then(|| DdrSpace::<Rat>::new(m, r, k + 1).unwrap());
    let lift = Lifting::new(&sp).unwrap();
    let rep = lift.verify(next.as_ref());
    assert!(rep.passed, "n={} r={r} k={k}: {rep:?}", m.n);
    assert_eq!(rep.projection, 0.0);
    assert_eq!(rep.right_inverse, 0.0);
    assert_eq!(rep.trace, 0.0);
    assert_eq!(rep.boundary, 0.0);
}

#[test]
fn lifting_properties_hold_exactly_in_two_dimensions() {
    for m in [mesh(Family::Triangular, 2, 1), mesh(Family::CartesianPolygonal, 2, 1), pentagon()] {
        for r in 0..=1 {
            for k in 0..=2 {
                check_exact(&m, r, k);
            }
        }
    }
}

#[test]
fn lifting_properties_hold_on_tetrahedra() {
    let m = mesh(Family::Triangular, 3, 0);
    for k in 1..=3 {
        check_exact(&m, 0, k);
    }
    let sp = DdrSpace::<f64>::new(&m, 0, 0).unwrap();
    let next = DdrSpace::<f64>::new(&m, 0, 1).unwrap();
    let rep = Lifting::new(&sp).unwrap().verify(Some(&next));
    assert!(rep.passed, "{rep:?}");
}

#[test]
fn base_case_returns_the_component() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let m = pentagon();
    for k in 0..=2 {
        let sp = DdrSpace::<Rat>::new(&m, 1, k).unwrap();
        let lift = Lifting::new(&sp).unwrap();
        let x = random::vector::<Rat>(&mut rng, sp.dim);
        for i in 0..m.num_cells(k) {
            let cl = lift.cell(k, i);
            let w = sp.component_form(k, i, sp.block(k, i, &x));
            assert_eq!(lift.local(k, i, &x), cl.fe.interpolate(&w));
        }
    }
}

#[test]
fn lifting_is_linear_and_vanishes_on_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let m = mesh(Family::CartesianPolygonal, 2, 1);
    let sp = DdrSpace::<Rat>::new(&m, 0, 1).unwrap();
    let lift = Lifting::new(&sp).unwrap();
    let zero = lift.apply(&vec![Rat::zero(); sp.dim]);
    assert!(zero.cells.iter().flatten().flatten().all(|v| v.is_zero()));
    let (a, b) = (random::vector::<Rat>(&mut rng, sp.dim), random::vector::<Rat>(&mut rng, sp.dim));
    let sum: Vec<Rat> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
    let (la, lb, ls) = (lift.apply(&a), lift.apply(&b), lift.apply(&sum));
    for d in 1..=2 {
        for i in 0..m.num_cells(d) {
            let s: Vec<Rat> = la.cells[d][i].iter().zip(&lb.cells[d][i]).map(|(x, y)| x + y).collect();
            assert_eq!(s, ls.cells[d][i]);
        }
    }
    let json = la.to_json();
    assert_eq!(json["k"], 1);
    assert_eq!(json["cells"]["2"].as_object().unwrap().len(), m.num_cells(2));
}

#[test]
fn orientation_fault_breaks_the_projection_property() {
    let m = mesh(Family::CartesianPolygonal, 2, 1);
    let face = m.cell(2, 0).boundary[0].0;
    let bad = m.with_flipped_sign(2, 0, face);
    let sp = DdrSpace::<Rat>::new(&bad, 0, 0).unwrap();
    let rep = Lifting::new(&sp).unwrap().verify(None);
    assert!(rep.projection > 0.0);
    assert!(!rep.passed);
    let sp = DdrSpace::<Rat>::new(&bad, 0, 1).unwrap();
    assert!(matches!(Lifting::new(&sp), Err(Error::Compatibility { .. })));
}

#[test]
fn dropping_the_correction_breaks_compatibility() {
    let m = pentagon();
    let sp = DdrSpace::<Rat>::new(&m, 0, 0).unwrap();
    let opts = LiftOptions { drop_correction: true, sequential: false };
    match Lifting::build(&sp, opts) {
        Err(Error::Compatibility { condition, defect }) => {
            assert_eq!(condition, "boundary trace");
            assert!(defect > 0.0);
        }
        other => panic!("expected a compatibility failure, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn sequential_and_parallel_builds_agree() {
    let m = mesh(Family::Triangular, 2, 1);
    let sp = DdrSpace::<Rat>::new(&m, 1, 1).unwrap();
    let a = Lifting::new(&sp).unwrap();
    let b = Lifting::build(&sp, LiftOptions { sequential: true, ..Default::default() }).unwrap();
    for d in 1..=2 {
        for i in 0..m.num_cells(d) {
            assert_eq!(a.cell(d, i).op, b.cell(d, i).op);
        }
    }
}

#[test]
fn lifting_norm_is_controlled_by_the_component_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let m = pentagon();
    let sp = DdrSpace::<f64>::new(&m, 1, 0).unwrap();
    let lift = Lifting::new(&sp).unwrap();
    let (ratio0, _, _) = lift.ratios(2, 0, None);
    for _ in 0..5 {
        let x = random::vector::<f64>(&mut rng, sp.dim);
        let cl = lift.cell(2, 0);
        let l = cl.op.mul_vec(&sp.restrict(2, 0, &x));
        let norm = (quad_form(&cl.fe.gram(), &l) * m.cell(2, 0).volume_factor()).sqrt();
        assert!(norm <= ratio0 * sp.component_norm(2, 0, &sp.restrict(2, 0, &x)) * (1.0 + 1e-9));
    }
}

use super::*;
use crate::exterior::smooth::library;

fn mesh(family: Family, level: usize) -> Mesh {
    build_family(FamilySpec::new(family, 2, level)).unwrap()
}

#[test]
fn slope_of_a_power_law_is_its_exponent() {
    let h = [0.5, 0.25, 0.125, 0.0625];
    let y: Vec<f64> = h.iter().map(|v: &f64| 3.0 * v.powf(1.7)).collect();
    assert!((fitted_slope(&h, &y).unwrap() - 1.7).abs() < 1e-12);
    let t = RateTable::new("x", &[(0, 0.5, 1, 1.0), (1, 0.25, 2, 0.25)]).unwrap();
    assert!(t.rows[0].slope_running.is_none());
    assert!((t.slope.unwrap() - 2.0).abs() < 1e-12);
    assert!(RateTable::new("x", &[(0, 0.25, 1, 1.0), (1, 0.5, 2, 0.25)]).is_err());
}

#[test]
fn polynomial_data_is_reproduced_by_the_trimmed_approximation() {
    let m = mesh(Family::CartesianPolygonal, 1);
    for r in 0..2 {
        for k in 0..=2 {
            let (a, b) = approximation_errors(&m, r, &library::polynomial(2, k, r), 8);
            assert!(a < 1e-12 && b < 1e-12, "r={r} k={k}: {a} {b}");
        }
    }
}

#[test]
fn polynomial_data_is_reproduced_by_the_discrete_operators() {
    let m = mesh(Family::Triangular, 1);
    for r in 0..2 {
        for k in 0..=2 {
            let space = DdrSpace::<f64>::new(&m, r, k).unwrap();
            let e = primal_errors(&space, &library::polynomial(2, k, r), 8, 3);
            assert!(e.potential < 1e-10 && e.derivative < 1e-10 && e.inner < 1e-10 && e.inner_random < 1e-10, "r={r} k={k}: {e:?}");
        }
    }
}

#[test]
fn adjoint_residual_is_linear_in_both_arguments() {
    let m = mesh(Family::Triangular, 1);
    for k in 0..2 {
        let space = DdrSpace::<f64>::new(&m, 0, 1 - k).unwrap();
        let omega = interpolate_smooth(&space, &library::trig(2, 1 - k), 8);
        let zero_alpha = library::bump(2, k).scale(0.0);
        assert_eq!(adjoint_residual(&space, &zero_alpha, &omega, 8).unwrap(), 0.0);
        let zero = vec![0.0; space.dim];
        assert_eq!(adjoint_residual(&space, &library::bump(2, k), &zero, 8).unwrap(), 0.0);
    }
}

#[test]
fn data_without_zero_trace_is_rejected() {
    let m = mesh(Family::Triangular, 0);
    let space = DdrSpace::<f64>::new(&m, 0, 1).unwrap();
    let omega = vec![1.0; space.dim];
    let err = adjoint_residual(&space, &library::trig(2, 0), &omega, 6).unwrap_err();
    assert!(matches!(err, Error::Compatibility { .. }), "{err}");
    let mut cfg = StudyConfig::new(StudyKind::Adjoint, Family::Triangular, 2, vec![0, 1], 0, 0);
    cfg.form = "trig".into();
    assert!(cfg.validate().is_err());
    let cfg = StudyConfig::new(StudyKind::AdjointInner, Family::Triangular, 2, vec![0, 1], 0, 0);
    assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    // the inner-product study also needs the Hodge star of the data to vanish on the boundary
    let mut cfg = StudyConfig::new(StudyKind::AdjointInner, Family::Triangular, 2, vec![0, 1], 0, 1);
    assert!(cfg.validate().is_ok());
    cfg.form = "bump".into();
    assert!(matches!(cfg.validate(), Err(Error::Compatibility { .. })));
}

#[test]
fn split_terms_add_up_and_the_lifting_reproduces_the_boundary_term() {
    for (family, level) in [(Family::Triangular, 1), (Family::CartesianPolygonal, 1), (Family::HexagonalDominant, 1)] {
        let m = mesh(family, level);
        for r in 0..2 {
            for k in 0..2 {
                let space = DdrSpace::<f64>::new(&m, r, 1 - k).unwrap();
                let alpha = library::bump(2, k);
                let omega = interpolate_smooth(&space, &library::trig(2, 1 - k), 10);
                let lifting = Lifting::new(&space).unwrap();
                let total = adjoint_argument(&space, &alpha, &omega, 10);
                let s = adjoint_split(&space, r, &alpha, &omega, 10, Some(&lifting));
                let sum = s.t1 + s.t2 + s.t3;
                let scale = s.t1.abs().max(s.t2.abs()).max(s.t3.abs()).max(total.abs());
                assert!((sum - total).abs() <= 1e-12 * scale.max(1e-300) + 1e-15, "{family} r={r} k={k}: {total} vs {s:?}");
                let t3l = s.t3_lift.unwrap();
                assert!((t3l - s.t3).abs() <= 1e-10 * s.t3.abs().max(1e-12), "{family} r={r} k={k}: {t3l} vs {}", s.t3);
            }
        }
    }
}

#[test]
fn study_outputs_have_fixed_columns() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = StudyConfig::new(StudyKind::Primal, Family::Triangular, 2, vec![1, 2], 0, 1);
    cfg.out = Some(dir.path().join("p.csv"));
    cfg.plot_data = Some(dir.path().join("p.dat"));
    let rep = run_study(&cfg).unwrap();
    rep.write_outputs().unwrap();
    let csv = std::fs::read_to_string(dir.path().join("p.csv")).unwrap();
    assert!(csv.starts_with("level,h,ndof,residual,slope_running\n"));
    assert_eq!(csv.lines().count(), 3);
    assert!(dir.path().join("p.derivative.csv").exists());
    assert!(dir.path().join("p.inner.dat").exists());
    let again = run_study(&cfg).unwrap();
    assert_eq!(rep.config_hash, again.config_hash);
    assert_eq!(rep.tables[0].to_csv(), again.tables[0].to_csv());
}

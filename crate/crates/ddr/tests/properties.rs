//! Randomized properties of the public API.

use ddr::ddr::{ambient_trace, DdrSpace};
use ddr::exterior::random;
use ddr::harness::{fitted_slope, RateTable};
use ddr::lifting::Lifting;
use ddr::mesh::{build_family, polygonal, Family, FamilySpec, Mesh, SubmeshPolicy};
use ddr::scalar::{rat, rint};
use ddr::Rat;
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sheared_pentagon(a: i64, b: i64, c: i64) -> Mesh {
    // x -> (x + a/4 y, b/4 x + (1 + c/4) y) keeps the orientation for the ranges used below
    let base = [(0, 0), (2, 0), (3, 2), (1, 3), (-1, 1)];
    let pts = base
        .iter()
        .map(|&(x, y)| vec![rint(x) + rat(a * y, 4), rat(b * x, 4) + rint(y) + rat(c * y, 4)])
        .collect();
    polygonal(pts, vec![(vec![0, 1, 2, 3, 4], SubmeshPolicy::Fan)]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exterior_derivative_squares_to_zero_and_obeys_leibniz(seed in any::<u64>(), n in 1usize..=3, deg in 0usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = seed as usize % (n + 1);
        let w = random::form::<Rat>(&mut rng, n, k, deg);
        prop_assert_eq!(w.d().d().max_abs_coeff(), 0.0);
        if k < n {
            let u = random::form::<Rat>(&mut rng, n, n - k - 1, deg);
            let sign = if k.is_multiple_of(2) { rint(1) } else { rint(-1) };
            let lhs = w.wedge(&u).d();
            let rhs = w.d().wedge(&u).add(&w.wedge(&u.d()).scale(&sign));
            prop_assert_eq!(lhs.sub(&rhs).max_abs_coeff(), 0.0);
        }
    }

    #[test]
    fn potentials_reproduce_polynomials_on_sheared_cells(seed in any::<u64>(), a in -1i64..=1, b in -1i64..=1, c in 0i64..=2, r in 0usize..=1) {
        let mesh = sheared_pentagon(a, b, c);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in 0..=2 {
            let sp = DdrSpace::<Rat>::new(&mesh, r, k).unwrap();
            let w = random::form::<Rat>(&mut rng, 2, k, r);
            let x = sp.interpolate_poly(&w);
            for d in k..=2 {
                for i in 0..mesh.num_cells(d) {
                    let p = sp.potential(d, i, &sp.restrict(d, i, &x));
                    prop_assert_eq!(p.sub(&ambient_trace(&mesh, d, i, &w)).max_abs_coeff(), 0.0);
                }
            }
        }
    }

    #[test]
    fn lifting_is_an_exact_right_inverse_on_sheared_cells(a in -1i64..=1, b in -1i64..=1, c in 0i64..=2) {
        let mesh = sheared_pentagon(a, b, c);
        for k in 0..=2 {
            let sp = DdrSpace::<Rat>::new(&mesh, 0, k).unwrap();
            let next = if k < 2 { Some(DdrSpace::<Rat>::new(&mesh, 0, k + 1).unwrap()) } else { None };
            let rep = Lifting::new(&sp).unwrap().verify(next.as_ref());
            prop_assert!(rep.passed, "k={}: {:?}", k, rep);
            prop_assert_eq!(rep.projection, 0.0);
            prop_assert_eq!(rep.right_inverse, 0.0);
        }
    }

    #[test]
    fn fitted_slope_recovers_power_laws(c in 0.01f64..100.0, p in 0.2f64..5.0) {
        let h = [0.5, 0.25, 0.125, 0.0625];
        let y: Vec<f64> = h.iter().map(|v: &f64| c * v.powf(p)).collect();
        prop_assert!((fitted_slope(&h, &y).unwrap() - p).abs() < 1e-9);
    }

    #[test]
    fn csv_slopes_match_an_independent_fit(res in proptest::collection::vec(1e-8f64..1.0, 2..6)) {
        let data: Vec<(usize, f64, usize, f64)> =
            res.iter().enumerate().map(|(j, &v)| (j, 0.5f64.powi(j as i32), 10 << j, v)).collect();
        let csv = RateTable::new("residual", &data).unwrap().to_csv();
        let rows: Vec<Vec<String>> = csv.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect();
        let h: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
        for j in 1..rows.len() {
            // least squares on the last max(2, L - 1) points
            let l = j + 1;
            let w = (l - 1).max(2);
            let (x, z): (Vec<f64>, Vec<f64>) = (l - w..l).map(|q| (h[q].ln(), y[q].ln())).unzip();
            let (mx, mz) = (x.iter().sum::<f64>() / w as f64, z.iter().sum::<f64>() / w as f64);
            let sxz: f64 = x.iter().zip(&z).map(|(a, b)| (a - mx) * (b - mz)).sum();
            let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
            let tool: f64 = rows[j][4].parse().unwrap();
            prop_assert!((tool - sxz / sxx).abs() <= 1e-12 * (1.0 + tool.abs()), "{} vs {}", tool, sxz / sxx);
        }
    }
}

#[test]
fn discrete_derivatives_form_a_complex() {
    let mesh = build_family(FamilySpec::new(Family::HexagonalDominant, 2, 0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for r in 0..=1 {
        let s0 = DdrSpace::<Rat>::new(&mesh, r, 0).unwrap();
        let s1 = DdrSpace::<Rat>::new(&mesh, r, 1).unwrap();
        let s2 = DdrSpace::<Rat>::new(&mesh, r, 2).unwrap();
        let x = random::vector::<Rat>(&mut rng, s0.dim);
        let dd = s1.global_d(&s2, &s0.global_d(&s1, &x));
        assert!(dd.iter().all(Zero::is_zero), "r={r}");
    }
}

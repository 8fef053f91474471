//! Verification suites shared by the command line and the acceptance tests.

use std::time::Instant;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cochain::{de_rham, whitney, Complex};
use crate::ddr::{ambient_trace, DdrSpace};
use crate::exterior::form::{det, simplex_map, Form};
use crate::exterior::poly::{total_degree, Poly};
use crate::exterior::random;
use crate::lifting::verify::LiftReport;
use crate::lifting::{column, BubbleProblem, FeBvp, LiftOptions, Lifting};
use crate::linalg::{rank, Mat};
use crate::mesh::{build_family, polygonal, simplicial, Family, FamilySpec, Mesh, SubmeshPolicy};
use crate::scalar::{rat, rint, Rat, Scalar};
use crate::spaces::{exact_basis, full_basis, full_dim, koszul_basis, trimmed_basis, FeSpace, FullSpace};
use crate::{Error, Result};

/// One verified property.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub cases: usize,
    /// Largest defect found (zero for exact checks that hold).
    pub defect: f64,
    pub passed: bool,
}

/// A named group of checks.
#[derive(Clone, Debug, Serialize)]
pub struct Suite {
    pub name: String,
    pub checks: Vec<Check>,
    pub seconds: f64,
}

impl Suite {
    fn new(name: &str) -> Self {
        Suite { name: name.into(), checks: Vec::new(), seconds: 0.0 }
    }

    /// Records a check that must hold with zero defect.
    pub fn exact(&mut self, name: &str, cases: usize, defect: f64) {
        self.checks.push(Check { name: name.into(), cases, defect, passed: defect == 0.0 });
    }

    pub fn within(&mut self, name: &str, cases: usize, defect: f64, tol: f64) {
        self.checks.push(Check { name: name.into(), cases, defect, passed: defect <= tol });
    }

    /// Records a check whose outcome is a plain boolean.
    pub fn holds(&mut self, name: &str, cases: usize, ok: bool) {
        self.checks.push(Check { name: name.into(), cases, defect: if ok { 0.0 } else { 1.0 }, passed: ok });
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn summary(&self) -> String {
        let mut s = format!("{}: {} ({:.1} s)\n", self.name, if self.passed() { "PASS" } else { "FAIL" }, self.seconds);
        for c in &self.checks {
            s.push_str(&format!(
                "  {:<4} {:<48} cases={:<6} defect={:.3e}\n",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.cases,
                c.defect
            ));
        }
        s
    }
}

fn timed(name: &str, body: impl FnOnce(&mut Suite)) -> Suite {
    let t = Instant::now();
    let mut s = Suite::new(name);
    body(&mut s);
    s.seconds = t.elapsed().as_secs_f64();
    s
}

fn sign_rat(e: usize) -> Rat {
    if e.is_multiple_of(2) {
        Rat::one()
    } else {
        -Rat::one()
    }
}

fn homogeneous_part(w: &Form<Rat>, s: usize) -> Form<Rat> {
    let mut out = Form::zero(w.dim, w.deg);
    for (m, p) in &w.terms {
        let mut q = Poly::zero(p.nvars);
        for (e, c) in &p.terms {
            if total_degree(e) == s {
                q.add_term(*e, c.clone());
            }
        }
        out.add_term(*m, q);
    }
    out
}

fn random_simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<Rat>> {
    loop {
        let v: Vec<Vec<Rat>> = (0..=n).map(|_| (0..n).map(|_| rat(rng.gen_range(-6..=6), rng.gen_range(1..=3))).collect()).collect();
        let (_, m) = simplex_map(&v);
        if !det(&m).is_zero() {
            return v;
        }
    }
}

/// Randomized identities of the exterior algebra in dimensions `1..=nmax`, in exact arithmetic.
pub fn exterior_suite(cases: usize, nmax: usize, seed: u64) -> Suite {
    timed(&format!("exterior algebra (n <= {nmax})"), |suite| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = |c: usize| 1 + c % nmax;
        let mut worst = [0.0f64; 6];
        let mut kk = 0;
        for c in 0..cases {
            let n = dim(c);
            let k = rng.gen_range(0..=n);
            let deg = rng.gen_range(0..=3);
            let w = random::form::<Rat>(&mut rng, n, k, deg);
            worst[0] = worst[0].max(w.d().d().max_abs_coeff());

            let l = rng.gen_range(0..=(n - k));
            let vdeg = rng.gen_range(0..=2);
            let v = random::form::<Rat>(&mut rng, n, l, vdeg);
            let lhs = w.wedge(&v).d();
            let rhs = w.d().wedge(&v).add(&w.wedge(&v.d()).scale(&sign_rat(k)));
            worst[1] = worst[1].max(lhs.sub(&rhs).max_abs_coeff());

            // kappa kappa needs degree >= 2, hence dimension >= 2
            let kn = 2 + c % nmax.saturating_sub(1).max(1);
            if kn <= nmax {
                let kdeg = rng.gen_range(2..=kn);
                let pdeg = rng.gen_range(0..=3);
                let u = random::form::<Rat>(&mut rng, kn, kdeg, pdeg);
                let center: Vec<Rat> = (0..kn).map(|_| rat(rng.gen_range(-4..=4), rng.gen_range(1..=3))).collect();
                kk += 1;
                worst[2] = worst[2].max(u.koszul(&center).koszul(&center).max_abs_coeff());
            }

            let s = rng.gen_range(0..=3);
            let h = homogeneous_part(&random::form::<Rat>(&mut rng, n, k, s), s);
            let origin = vec![Rat::zero(); n];
            let lhs = match k {
                0 => h.d().koszul(&origin),
                _ if k == n => h.koszul(&origin).d(),
                _ => h.koszul(&origin).d().add(&h.d().koszul(&origin)),
            };
            worst[3] = worst[3].max(lhs.sub(&h.scale(&rint((s + k) as i64))).max_abs_coeff());

            let t = random_simplex(&mut rng, n);
            let adeg = rng.gen_range(0..=3);
            let a = random::form::<Rat>(&mut rng, n, n - 1, adeg);
            let inner = a.d().integrate_simplex(&t);
            let mut bnd = Rat::zero();
            for i in 0..=n {
                let face: Vec<Vec<Rat>> = t.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| p.clone()).collect();
                let (o, m) = simplex_map(&face);
                let tr = a.pullback(&o, &m, n - 1).top_coeff().integrate_reference();
                bnd += sign_rat(i) * tr;
            }
            worst[4] = worst[4].max((inner - bnd).abs_f64());

            let g: Vec<Rat> = (0..n)
                .map(|_| {
                    let q = rat(rng.gen_range(1..=5), rng.gen_range(1..=4));
                    &q * &q
                })
                .collect();
            let twice = w.hodge(&g).and_then(|x| x.hodge(&g)).expect("rational volume factor");
            worst[5] = worst[5].max(twice.sub(&w.scale(&sign_rat(k * (n - k)))).max_abs_coeff());
        }
        let names = ["d d = 0", "Leibniz rule", "kappa kappa = 0", "homotopy formula", "Stokes formula", "star star = (-1)^{k(n-k)}"];
        for (j, (name, v)) in names.iter().zip(worst).enumerate() {
            suite.exact(name, if j == 2 { kk } else { cases }, v);
        }
    })
}

fn binom(n: i64, k: i64) -> i64 {
    if k == 0 {
        return 1;
    }
    if n < k || n < 0 || k < 0 {
        return 0;
    }
    (1..=k).fold(1, |acc, j| acc * (n - k + j) / j)
}

/// Dimensions of trimmed spaces and the Koszul direct sums, up to dimension and degree 3.
pub fn spaces_suite() -> Suite {
    timed("polynomial form spaces", |suite| {
        let mut dims = (0, 0);
        let mut sums = (0, 0);
        for d in 1..=3usize {
            for k in 0..=d {
                for r in 0..=3i64 {
                    dims.0 += 1;
                    let expect = binom(r + d as i64, r + k as i64) * binom(r + k as i64 - 1, k as i64);
                    if trimmed_basis::<Rat>(d, r, k).len() as i64 != expect {
                        dims.1 += 1;
                    }
                    sums.0 += 1;
                    let first = if k == 0 { full_basis::<Rat>(d, 0, 0) } else { exact_basis::<Rat>(d, r + 1, k) };
                    let second = koszul_basis::<Rat>(d, r - 1, k);
                    let sp = FullSpace::new(d, r, k);
                    let rows: Vec<Vec<Rat>> = first.iter().chain(&second).map(|b| sp.coeffs(b)).collect();
                    let m = Mat::from_rows(rows, sp.dim());
                    let rk = rank(&m);
                    if rk != full_dim(d, r, k) || rk != first.len() + second.len() {
                        sums.1 += 1;
                    }
                }
            }
        }
        suite.exact("trimmed dimension formula", dims.0, dims.1 as f64);
        suite.exact("Koszul decomposition is a direct sum", sums.0, sums.1 as f64);
    })
}

fn family_meshes() -> Vec<Mesh> {
    [
        FamilySpec::new(Family::Triangular, 2, 1),
        FamilySpec::new(Family::CartesianPolygonal, 2, 1),
        FamilySpec::new(Family::HexagonalDominant, 2, 1),
        FamilySpec::new(Family::Triangular, 3, 0),
    ]
    .into_iter()
    .map(|s| build_family(s).expect("built-in family"))
    .collect()
}

/// Convex pentagon with a fan submesh.
pub fn pentagon() -> Mesh {
    let pts = [(0, 0), (2, 0), (3, 2), (1, 3), (-1, 1)].iter().map(|&(x, y)| vec![rint(x), rint(y)]).collect();
    polygonal(pts, vec![(vec![0, 1, 2, 3, 4], SubmeshPolicy::Fan)]).expect("pentagon")
}

fn edge() -> Mesh {
    simplicial(1, vec![vec![rint(0)], vec![rat(3, 2)]], vec![vec![0, 1]]).expect("edge")
}

/// The built-in cells: a few cells of every dimension from each family.
fn builtin_cells() -> Vec<(Mesh, usize, usize)> {
    let mut out = Vec::new();
    for m in family_meshes() {
        for d in 1..=m.n {
            for i in 0..m.num_cells(d).min(3) {
                out.push((m.clone(), d, i));
            }
        }
    }
    out.push((pentagon(), 2, 0));
    out
}

/// Simplicial (co)chain identities and the cochain boundary value problem.
pub fn cochain_suite(instances: usize, seed: u64) -> Suite {
    timed("cochain complexes", |suite| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cells = builtin_cells();
        let mut worst = [0.0f64; 5];
        let mut counts = [0usize; 5];
        for (m, d, i) in &cells {
            let c = Complex::of_cell(m, *d, *i);
            for k in 1..=c.dim {
                worst[0] = worst[0].max(c.boundary_matrix::<Rat>(k - 1).mul(&c.boundary_matrix::<Rat>(k)).max_abs());
                counts[0] += 1;
            }
            for k in 0..c.dim.saturating_sub(1) {
                let l = random::vector::<Rat>(&mut rng, c.count(k));
                let dd = c.coboundary(k + 1, &c.coboundary(k, &l));
                worst[1] = worst[1].max(crate::scalar::max_abs(&dd));
                counts[1] += 1;
            }
            for k in 0..=c.dim {
                let w1 = FeSpace::<Rat>::on_cell(m, *d, *i, 1, k);
                let l = random::vector::<Rat>(&mut rng, c.count(k));
                let back = de_rham(&w1, &c, &whitney(&w1, &c, &l));
                worst[2] = worst[2].max(crate::linalg::sub_vec(&back, &l).iter().map(|v| v.abs_f64()).fold(0.0, f64::max));
                counts[2] += 1;
                if k < c.dim {
                    let hi = FeSpace::<Rat>::on_cell(m, *d, *i, 2, k);
                    let hi1 = FeSpace::<Rat>::on_cell(m, *d, *i, 2, k + 1);
                    let a = random::vector::<Rat>(&mut rng, hi.dim());
                    let lhs = de_rham(&hi1, &c, &hi.dmat(&hi1).mul_vec(&a));
                    let rhs = c.coboundary(k, &de_rham(&hi, &c, &a));
                    worst[3] = worst[3].max(crate::linalg::sub_vec(&lhs, &rhs).iter().map(|v| v.abs_f64()).fold(0.0, f64::max));
                    counts[3] += 1;
                }
            }
            for k in 0..c.dim {
                for _ in 0..instances {
                    let l0 = random::vector::<Rat>(&mut rng, c.count(k));
                    let xi = c.coboundary(k, &l0);
                    let defect = match c.solve_bvp(k, &xi, &l0) {
                        Ok(l) => {
                            let a = crate::linalg::sub_vec(&c.coboundary(k, &l), &xi);
                            let b = crate::linalg::sub_vec(&c.boundary_part(k, &l), &c.boundary_part(k, &l0));
                            a.iter().chain(&b).map(|v| v.abs_f64()).fold(0.0, f64::max)
                        }
                        Err(_) => f64::INFINITY,
                    };
                    worst[4] = worst[4].max(defect);
                    counts[4] += 1;
                }
            }
        }
        let names = ["boundary of boundary", "coboundary of coboundary", "de Rham after Whitney is the identity", "de Rham map commutes with d", "cochain problem solved exactly"];
        for j in 0..5 {
            suite.exact(names[j], counts[j], worst[j]);
        }
    })
}

fn ddr_meshes() -> Vec<Mesh> {
    vec![
        build_family(FamilySpec::new(Family::Triangular, 2, 1)).expect("mesh"),
        build_family(FamilySpec::new(Family::CartesianPolygonal, 2, 1)).expect("mesh"),
        build_family(FamilySpec::new(Family::HexagonalDominant, 2, 0)).expect("mesh"),
        pentagon(),
        build_family(FamilySpec::new(Family::Triangular, 3, 0)).expect("mesh"),
    ]
}

/// Defining relations of the discrete operators and polynomial consistency, exact.
pub fn ddr_suite(rmax: usize, seed: u64) -> Suite {
    timed("discrete de Rham operators", |suite| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = [0.0f64; 5];
        let mut counts = [0usize; 5];
        for m in ddr_meshes() {
            for r in 0..=rmax {
                for k in 0..=m.n {
                    let sp = match DdrSpace::<Rat>::new(&m, r, k) {
                        Ok(sp) => sp,
                        Err(_) => {
                            worst[0] = f64::INFINITY;
                            continue;
                        }
                    };
                    let x = random::vector::<Rat>(&mut rng, sp.dim);
                    let res = sp.residuals(&x);
                    worst[0] = worst[0].max(res.def_d);
                    worst[1] = worst[1].max(res.ipp_pot);
                    counts[0] += res.cells;
                    counts[1] += res.cells;
                    let w = random::form::<Rat>(&mut rng, m.n, k, r);
                    let xi = sp.interpolate_poly(&w);
                    for d in k..=m.n {
                        for i in 0..m.num_cells(d) {
                            let loc = sp.restrict(d, i, &xi);
                            let tr = ambient_trace(&m, d, i, &w);
                            worst[2] = worst[2].max(sp.potential(d, i, &loc).sub(&tr).max_abs_coeff());
                            counts[2] += 1;
                            if d > k {
                                worst[3] = worst[3].max(sp.discrete_d(d, i, &loc).sub(&tr.d()).max_abs_coeff());
                                counts[3] += 1;
                            }
                            worst[4] = worst[4].max(sp.stabilization(d, i, &loc, &loc).abs());
                            counts[4] += 1;
                        }
                    }
                }
            }
        }
        let names = [
            "defining relation of the discrete derivative",
            "integration by parts of the potential",
            "potential reproduces polynomials",
            "discrete derivative reproduces polynomials",
            "stabilization vanishes on polynomials",
        ];
        for j in 0..5 {
            suite.exact(names[j], counts[j], worst[j]);
        }
    })
}

fn solver_cells() -> Vec<(Mesh, usize)> {
    vec![
        (pentagon(), 2),
        (build_family(FamilySpec::new(Family::Triangular, 3, 0)).expect("mesh"), 3),
        (build_family(FamilySpec::new(Family::Triangular, 2, 0)).expect("mesh"), 2),
        (edge(), 1),
    ]
}

/// Local boundary value and bubble problems on single cells, exact.
pub fn solver_suite(seed: u64) -> Suite {
    timed("local solvers", |suite| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = [0.0f64; 5];
        let mut counts = [0usize; 5];
        for (m, d) in solver_cells() {
            for s in 1..=2 {
                for k in 0..d {
                    let bvp = match FeBvp::<Rat>::on_cell(&m, d, 0, s, k) {
                        Ok(b) => b,
                        Err(_) => {
                            worst[0] = f64::INFINITY;
                            continue;
                        }
                    };
                    for _ in 0..4 {
                        let mu = random::vector::<Rat>(&mut rng, bvp.trial.dim());
                        let xi = bvp.dmat.mul_vec(&mu);
                        match bvp.solve(&xi, &mu) {
                            Ok(sol) => {
                                worst[0] = worst[0].max(sol.residual);
                                worst[1] = worst[1].max(sol.kkt);
                                let ex = bvp.explicit(&xi, &mu);
                                match ex {
                                    Ok(ex) => {
                                        let (xm, tm) = (column(&xi), column(&mu));
                                        worst[2] = worst[2].max(bvp.residual(&column(&ex), &xm, &tm));
                                        let diff = crate::linalg::sub_vec(&ex, &sol.x);
                                        let z = Mat::zeros(bvp.target.dim(), 1);
                                        let kernel = bvp.residual(&column(&diff), &z, &Mat::zeros(bvp.trial.dim(), 1));
                                        let longer = bvp.norm2(&ex) >= bvp.norm2(&sol.x);
                                        worst[3] = worst[3].max(if longer { kernel } else { f64::INFINITY });
                                    }
                                    Err(_) => worst[2] = f64::INFINITY,
                                }
                            }
                            Err(_) => worst[0] = f64::INFINITY,
                        }
                        counts[0] += 1;
                        counts[1] += 1;
                        counts[2] += 1;
                        counts[3] += 1;
                    }
                }
            }
            for k in 1..=d {
                for s in 1..=2 {
                    let defect = BubbleProblem::<Rat>::on_cell(&m, d, 0, s, k)
                        .and_then(|bub| {
                            let zeta: Vec<Form<Rat>> = (0..3).map(|_| random::form(&mut rng, d, k, 2)).collect();
                            let rhs: Vec<Mat<Rat>> = (0..bub.space.tops.len()).map(|t| bub.rhs_poly(t, &zeta)).collect();
                            let tau = bub.solve(&rhs)?;
                            Ok(bub.residual(&tau, &rhs))
                        })
                        .unwrap_or(f64::INFINITY);
                    worst[4] = worst[4].max(defect);
                    counts[4] += 1;
                }
            }
        }
        let names = [
            "d lambda = xi and tr lambda = theta",
            "minimum-norm certificate",
            "explicit solution solves the problem",
            "explicit and minimum-norm differ in the kernel",
            "bubble residuals vanish",
        ];
        for j in 0..5 {
            suite.exact(names[j], counts[j], worst[j]);
        }
    })
}

/// Lifting reports over refinement levels for one family.
#[derive(Clone, Debug, Serialize)]
pub struct LiftingStudy {
    pub family: String,
    pub n: usize,
    pub r: usize,
    pub k: usize,
    pub levels: Vec<usize>,
    pub reports: Vec<LiftReport>,
    /// Largest ratio of the boundedness constants between any two levels, per dimension.
    pub drift0: f64,
    pub drift1: f64,
}

fn drift(values: &[Vec<f64>]) -> f64 {
    let dims = values.iter().map(|v| v.len()).max().unwrap_or(0);
    let mut worst: f64 = 1.0;
    for d in 0..dims {
        let col: Vec<f64> = values.iter().filter_map(|v| v.get(d).copied()).filter(|v| *v > 0.0).collect();
        if col.len() >= 2 {
            let hi = col.iter().cloned().fold(0.0, f64::max);
            let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
            worst = worst.max(hi / lo);
        }
    }
    worst
}

/// Builds and verifies the lifting on each level.
pub fn lifting_study<S: Scalar>(family: Family, n: usize, levels: &[usize], r: usize, k: usize) -> Result<LiftingStudy> {
    let mut reports = Vec::new();
    for &l in levels {
        let mesh = build_family(FamilySpec::new(family, n, l))?;
        reports.push(lifting_report::<S>(&mesh, r, k, LiftOptions::default())?);
    }
    let drift0 = drift(&reports.iter().map(|r| r.ratio0.clone()).collect::<Vec<_>>());
    let drift1 = drift(&reports.iter().map(|r| r.ratio1.clone()).collect::<Vec<_>>());
    Ok(LiftingStudy { family: family.to_string(), n, r, k, levels: levels.to_vec(), reports, drift0, drift1 })
}

/// Verification report of the lifting on one mesh.
pub fn lifting_report<S: Scalar>(mesh: &Mesh, r: usize, k: usize, options: LiftOptions) -> Result<LiftReport> {
    let sp = DdrSpace::<S>::new(mesh, r, k)?;
    let next = if k < mesh.n { Some(DdrSpace::<S>::new(mesh, r, k + 1)?) } else { None };
    let lift = Lifting::build(&sp, options)?;
    Ok(lift.verify(next.as_ref()))
}

/// Outcomes of the two injected faults.
#[derive(Clone, Debug, Serialize)]
pub struct NegativeControls {
    /// Projection defect with one flipped relative orientation (must be nonzero).
    pub orientation_projection: f64,
    /// Build error for the flipped orientation with `k = 1`, if any.
    pub orientation_error: Option<String>,
    /// Error raised when the correction is dropped on a polygonal cell with `k = 0`.
    pub correction_error: Option<String>,
}

impl NegativeControls {
    pub fn detected(&self) -> bool {
        self.orientation_projection > 0.0 && self.correction_error.is_some()
    }
}

/// Runs the lifting with an injected orientation fault and without the correction.
pub fn negative_controls() -> Result<NegativeControls> {
    let m = build_family(FamilySpec::new(Family::CartesianPolygonal, 2, 1))?;
    let face = m.cell(2, 0).boundary[0].0;
    let bad = m.with_flipped_sign(2, 0, face);
    let orientation_projection = match lifting_report::<Rat>(&bad, 0, 0, LiftOptions::default()) {
        Ok(rep) => rep.projection,
        Err(_) => f64::INFINITY,
    };
    let orientation_error = lifting_report::<Rat>(&bad, 0, 1, LiftOptions::default()).err().map(|e| e.to_string());
    let opts = LiftOptions { drop_correction: true, sequential: false };
    let correction_error = match lifting_report::<Rat>(&pentagon(), 0, 0, opts) {
        Ok(rep) if rep.passed => None,
        Ok(rep) => Some(format!("verification failed (projection {:e})", rep.projection)),
        Err(e @ Error::Compatibility { .. }) => Some(e.to_string()),
        Err(e) => Some(e.to_string()),
    };
    Ok(NegativeControls { orientation_projection, orientation_error, correction_error })
}

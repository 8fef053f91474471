//! Acceptance gate: prints one PASS/FAIL line per criterion and fails if any is red.

use std::process::ExitCode;
use std::time::Instant;

use ddr::harness::suites::{self, Suite};
use ddr::harness::{run_study, StudyConfig, StudyKind};
use ddr::mesh::Family;
use ddr::Rat;

const SEED: u64 = 20_240_607;

struct Outcome {
    passed: bool,
    detail: String,
}

fn from_suites(list: &[Suite]) -> Outcome {
    let failed: Vec<String> = list
        .iter()
        .flat_map(|s| s.checks.iter().filter(|c| !c.passed).map(move |c| format!("{}: {} ({:e})", s.name, c.name, c.defect)))
        .collect();
    let cases: usize = list.iter().flat_map(|s| &s.checks).map(|c| c.cases).sum();
    Outcome {
        passed: failed.is_empty() && list.iter().all(Suite::passed),
        detail: if failed.is_empty() { format!("{cases} cases") } else { failed.join("; ") },
    }
}

fn lifting() -> Outcome {
    let mut bad = Vec::new();
    let mut worst_drift: f64 = 1.0;
    let mut runs = 0;
    for family in [Family::Triangular, Family::CartesianPolygonal] {
        for r in 0..=1 {
            for k in 0..=2 {
                runs += 1;
                match suites::lifting_study::<Rat>(family, 2, &[0, 1, 2], r, k) {
                    Ok(s) => {
                        for (l, rep) in s.levels.iter().zip(&s.reports) {
                            if !rep.passed {
                                bad.push(format!("{family} r={r} k={k} level {l}: exact checks failed"));
                            }
                        }
                    }
                    Err(e) => bad.push(format!("{family} r={r} k={k}: {e}")),
                }
                match suites::lifting_study::<f64>(family, 2, &[0, 1, 2, 3], r, k) {
                    Ok(s) => {
                        worst_drift = worst_drift.max(s.drift0).max(s.drift1);
                        if s.drift0 >= 2.0 || s.drift1 >= 2.0 {
                            bad.push(format!("{family} r={r} k={k}: drift {:.3}/{:.3}", s.drift0, s.drift1));
                        }
                    }
                    Err(e) => bad.push(format!("{family} r={r} k={k} (float): {e}")),
                }
            }
        }
    }
    Outcome {
        passed: bad.is_empty(),
        detail: if bad.is_empty() { format!("{runs} configurations, largest drift {worst_drift:.3}") } else { bad.join("; ") },
    }
}

fn rates() -> Outcome {
    let mut bad = Vec::new();
    let mut runs = 0;
    let mut min_margin = f64::INFINITY;
    for family in [Family::Triangular, Family::CartesianPolygonal, Family::HexagonalDominant] {
        for r in 0..=1 {
            let mut configs = Vec::new();
            for k in 0..=2 {
                configs.push((StudyKind::Approx, k));
                configs.push((StudyKind::Primal, k));
            }
            for k in 0..=1 {
                configs.push((StudyKind::Adjoint, k));
            }
            for k in 1..=2 {
                configs.push((StudyKind::AdjointInner, k));
            }
            for (kind, k) in configs {
                runs += 1;
                let cfg = StudyConfig::new(kind, family, 2, vec![1, 2, 3, 4], r, k);
                match run_study(&cfg) {
                    Ok(rep) => {
                        for t in rep.tables.iter().filter(|t| !t.informational && !t.exact) {
                            let s = t.slope.unwrap_or(f64::NEG_INFINITY);
                            min_margin = min_margin.min(s - rep.target);
                            if !t.meets(rep.target) {
                                bad.push(format!("{kind} {family} r={r} k={k} {}: slope {s:.3} < {:.1}", t.name, rep.target));
                            }
                        }
                    }
                    Err(e) => bad.push(format!("{kind} {family} r={r} k={k}: {e}")),
                }
            }
        }
    }
    Outcome {
        passed: bad.is_empty(),
        detail: if bad.is_empty() { format!("{runs} studies, smallest slope margin {min_margin:.3}") } else { bad.join("; ") },
    }
}

fn negative() -> Outcome {
    match suites::negative_controls() {
        Ok(c) => Outcome {
            passed: c.detected(),
            detail: format!(
                "orientation fault: projection defect {:.3e}, k=1 build {}; dropped correction: {}",
                c.orientation_projection,
                c.orientation_error.as_deref().unwrap_or("succeeded"),
                c.correction_error.as_deref().unwrap_or("not detected")
            ),
        },
        Err(e) => Outcome { passed: false, detail: e.to_string() },
    }
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("exterior algebra identities", Box::new(|| from_suites(&[suites::exterior_suite(1000, 3, SEED)]))),
        ("polynomial space dimensions and direct sums", Box::new(|| from_suites(&[suites::spaces_suite()]))),
        ("cochain identities and boundary value problems", Box::new(|| from_suites(&[suites::cochain_suite(100, SEED)]))),
        ("discrete de Rham identities", Box::new(|| from_suites(&[suites::ddr_suite(1, SEED)]))),
        ("local solvers", Box::new(|| from_suites(&[suites::solver_suite(SEED)]))),
        ("conforming lifting", Box::new(lifting)),
        ("convergence rates", Box::new(rates)),
        ("negative controls", Box::new(negative)),
    ];
    let mut all = true;
    for (j, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = run();
        all &= out.passed;
        println!(
            "criterion {}: {} {name} [{:.1} s] {}",
            j + 1,
            if out.passed { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            out.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

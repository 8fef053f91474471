//! Command line front end: convergence studies, verification suites and mesh tools.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ddr::harness::suites::{self, Suite};
use ddr::harness::{run_study, ScalarKind, StudyConfig, StudyKind};
use ddr::mesh::{build_family, load_json, mesh_to_json, save_json, Family, FamilySpec};
use ddr::{Error, Rat};

#[derive(Parser)]
#[command(name = "ddr", version, about = "Discrete de Rham complex: studies, verification suites and meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence study over refinement levels.
    Study {
        #[arg(value_enum)]
        kind: KindArg,
        #[command(flatten)]
        common: Common,
        /// Data form: bump, clamped, trig, sin-dy or poly<deg>.
        #[arg(long)]
        form: Option<String>,
        /// Smooth form interpolated into the discrete argument.
        #[arg(long)]
        partner: Option<String>,
        #[arg(long)]
        quad_order: Option<usize>,
        /// CSV output of the primary table; further tables go next to it.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Two-column `h residual` series file.
        #[arg(long)]
        plot_data: Option<PathBuf>,
        /// Record the three-term split of the adjoint residual.
        #[arg(long)]
        split: bool,
    },
    /// Verification suites.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
        #[command(flatten)]
        common: Common,
        /// Number of randomized cases for the exterior suite.
        #[arg(long, default_value_t = 1000)]
        cases: usize,
    },
    /// Build or inspect meshes.
    Mesh {
        #[arg(value_enum)]
        action: MeshAction,
        #[command(flatten)]
        common: Common,
        /// Mesh JSON file to inspect instead of a family.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Output JSON path (`build` only; stdout otherwise).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value = "triangular")]
    family: String,
    /// Dimension of the domain.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Number of refinement levels.
    #[arg(long, default_value_t = 4)]
    levels: usize,
    /// First refinement level.
    #[arg(long, default_value_t = 1)]
    start: usize,
    #[arg(long, default_value_t = 0)]
    r: usize,
    /// Form degree; verification runs every degree when omitted.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, conflicts_with = "float")]
    exact: bool,
    #[arg(long)]
    float: bool,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Print the full report as JSON.
    #[arg(long)]
    json: bool,
}

impl Common {
    fn family(&self) -> Result<Family, Error> {
        self.family.parse()
    }

    fn level_list(&self) -> Vec<usize> {
        (self.start..self.start + self.levels).collect()
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Adjoint,
    AdjointInner,
    Primal,
    Approx,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Lifting,
    Ddr,
    Exterior,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeshAction {
    Build,
    Inspect,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ (Error::Config(_) | Error::Compatibility { .. } | Error::Unsupported(_) | Error::Schema { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Study { kind, common, form, partner, quad_order, out, plot_data, split } => {
            let kind = match kind {
                KindArg::Adjoint => StudyKind::Adjoint,
                KindArg::AdjointInner => StudyKind::AdjointInner,
                KindArg::Primal => StudyKind::Primal,
                KindArg::Approx => StudyKind::Approx,
            };
            let mut cfg = StudyConfig::new(kind, common.family()?, common.n, common.level_list(), common.r, common.k.unwrap_or(0));
            cfg.scalar = if common.exact { ScalarKind::Exact } else { ScalarKind::Float };
            cfg.form = form.unwrap_or(cfg.form);
            cfg.partner = partner.unwrap_or(cfg.partner);
            cfg.quad_order = quad_order.unwrap_or(cfg.quad_order);
            cfg.seed = common.seed;
            cfg.split = split;
            cfg.out = out;
            cfg.plot_data = plot_data;
            let rep = run_study(&cfg)?;
            rep.write_outputs()?;
            if common.json {
                println!("{}", serde_json::to_string_pretty(&rep)?);
            } else {
                println!("study {} on {} (n={}, r={}, k={}), config {}", cfg.kind, cfg.family, cfg.n, cfg.r, cfg.k, rep.config_hash);
                for t in &rep.tables {
                    let status = match (t.informational, t.exact) {
                        (true, _) => "info",
                        (_, true) => "exact",
                        _ if t.meets(rep.target) => "ok",
                        _ => "FAIL",
                    };
                    let slope = t.slope.map(|s| format!("{s:.3}")).unwrap_or_else(|| "-".into());
                    println!("  {status:<5} {:<14} slope={slope:<7} target={:.1}", t.name, rep.target);
                    for r in &t.rows {
                        println!("        level={} h={:.4e} ndof={} residual={:.6e}", r.level, r.h, r.ndof, r.residual);
                    }
                }
                for (level, (total, s)) in cfg.levels.iter().zip(&rep.splits) {
                    let lift = s.t3_lift.map(|v| format!(" t3_lift={v:.6e}")).unwrap_or_default();
                    println!("  split level={level} total={total:.6e} t1={:.6e} t2={:.6e} t3={:.6e}{lift}", s.t1, s.t2, s.t3);
                }
                println!("{}", if rep.passed { "PASS" } else { "FAIL" });
            }
            Ok(rep.passed)
        }
        Command::Verify { suite, common, cases } => match suite {
            SuiteArg::Exterior => {
                if !(1..=3).contains(&common.n) {
                    return Err(Error::Config(format!("dimension {} is not supported", common.n)));
                }
                report_suites(&[suites::exterior_suite(cases, common.n, common.seed)], common.json)
            }
            SuiteArg::Ddr => report_suites(
                &[
                    suites::spaces_suite(),
                    suites::cochain_suite(100, common.seed),
                    suites::ddr_suite(common.r.max(1), common.seed),
                    suites::solver_suite(common.seed),
                ],
                common.json,
            ),
            SuiteArg::Lifting => verify_lifting(&common),
        },
        Command::Mesh { action, common, input, out } => {
            let meshes = match &input {
                Some(p) => vec![(None, load_json(p)?)],
                None => {
                    let family = common.family()?;
                    common
                        .level_list()
                        .into_iter()
                        .map(|l| build_family(FamilySpec::new(family, common.n, l)).map(|m| (Some(l), m)))
                        .collect::<Result<Vec<_>, _>>()?
                }
            };
            match action {
                MeshAction::Inspect => {
                    let rows: Vec<_> = meshes
                        .iter()
                        .map(|(l, m)| {
                            let counts: Vec<usize> = (0..=m.n).map(|d| m.num_cells(d)).collect();
                            json!({ "level": l, "n": m.n, "cells": counts, "regularity": m.regularity_report() })
                        })
                        .collect();
                    println!("{}", serde_json::to_string_pretty(&rows)?);
                }
                MeshAction::Build => {
                    let (_, m) = meshes.last().ok_or_else(|| Error::Config("no level requested".into()))?;
                    match out {
                        Some(p) => save_json(m, p)?,
                        None => println!("{}", serde_json::to_string_pretty(&mesh_to_json(m))?),
                    }
                }
            }
            Ok(true)
        }
    }
}

fn report_suites(list: &[Suite], as_json: bool) -> Result<bool, Error> {
    if as_json {
        println!("{}", serde_json::to_string_pretty(list)?);
    } else {
        for s in list {
            print!("{}", s.summary());
        }
    }
    Ok(list.iter().all(Suite::passed))
}

fn verify_lifting(common: &Common) -> Result<bool, Error> {
    let family = common.family()?;
    let levels = common.level_list();
    let ks: Vec<usize> = match common.k {
        Some(k) if k <= common.n => vec![k],
        Some(k) => return Err(Error::Config(format!("form degree {k} exceeds the dimension"))),
        None => (0..=common.n).collect(),
    };
    let mut all = true;
    let mut out = Vec::new();
    for k in ks {
        let study = if common.float {
            suites::lifting_study::<f64>(family, common.n, &levels, common.r, k)?
        } else {
            suites::lifting_study::<Rat>(family, common.n, &levels, common.r, k)?
        };
        let ok = study.reports.iter().all(|r| r.passed) && study.drift0 < 2.0 && study.drift1 < 2.0;
        all &= ok;
        if !common.json {
            println!(
                "lifting {} n={} r={} k={}: {} (drift {:.3} / {:.3})",
                study.family,
                study.n,
                study.r,
                k,
                if ok { "PASS" } else { "FAIL" },
                study.drift0,
                study.drift1
            );
            for (l, rep) in study.levels.iter().zip(&study.reports) {
                println!(
                    "  level={l} cells={} projection={:.3e} right_inverse={:.3e} boundary={:.3e} ratio0={:?} ratio1={:?}",
                    rep.cells, rep.projection, rep.right_inverse, rep.boundary, rep.ratio0, rep.ratio1
                );
            }
        }
        out.push(study);
    }
    if common.json {
        println!("{}", serde_json::to_string_pretty(&out)?);
    }
    Ok(all)
}

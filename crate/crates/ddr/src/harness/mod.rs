//! Convergence studies over refinement levels, rate fitting and report output.

pub mod quad;
pub mod studies;
pub mod suites;

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::ddr::DdrSpace;
use crate::exterior::smooth::library;
use crate::exterior::SmoothForm;
use crate::lifting::Lifting;
use crate::mesh::{build_family, Family, FamilySpec, Mesh};
use crate::scalar::{Rat, Scalar};
use crate::{Error, Result};

pub use studies::{
    adjoint_argument, adjoint_residual, adjoint_residual_inner, adjoint_split, approximation_errors, build_trimmed_approx,
    check_clamped, check_zero_trace, interpolate_smooth, primal_errors, AdjointSplit, PrimalErrors, TrimmedApprox,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    Adjoint,
    AdjointInner,
    Primal,
    Approx,
}

impl FromStr for StudyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adjoint" => Ok(StudyKind::Adjoint),
            "adjoint-inner" => Ok(StudyKind::AdjointInner),
            "primal" => Ok(StudyKind::Primal),
            "approx" => Ok(StudyKind::Approx),
            _ => Err(Error::Config(format!("unknown study '{s}'"))),
        }
    }
}

impl fmt::Display for StudyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StudyKind::Adjoint => "adjoint",
            StudyKind::AdjointInner => "adjoint-inner",
            StudyKind::Primal => "primal",
            StudyKind::Approx => "approx",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    Exact,
    Float,
}

/// Parameters of one study.
#[derive(Clone, Debug, Serialize)]
pub struct StudyConfig {
    pub kind: StudyKind,
    pub family: Family,
    pub n: usize,
    /// Refinement levels, coarsest first.
    pub levels: Vec<usize>,
    pub r: usize,
    pub k: usize,
    pub scalar: ScalarKind,
    /// Name of the data form `alpha`, `zeta` or `omega`.
    pub form: String,
    /// Name of the smooth form interpolated into the discrete argument.
    pub partner: String,
    pub quad_order: usize,
    pub seed: u64,
    /// Also split the adjoint residual into its three terms.
    pub split: bool,
    pub out: Option<PathBuf>,
    pub plot_data: Option<PathBuf>,
}

impl Serialize for Family {
    fn serialize<Z: serde::Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl StudyConfig {
    pub fn new(kind: StudyKind, family: Family, n: usize, levels: Vec<usize>, r: usize, k: usize) -> Self {
        let form = match kind {
            StudyKind::Adjoint => "bump",
            StudyKind::AdjointInner => "clamped",
            StudyKind::Primal | StudyKind::Approx => "trig",
        };
        StudyConfig {
            kind,
            family,
            n,
            levels,
            r,
            k,
            scalar: ScalarKind::Float,
            form: form.into(),
            partner: "trig".into(),
            quad_order: 2 * r + 6,
            seed: 7,
            split: false,
            out: None,
            plot_data: None,
        }
    }

    /// Checks degrees, levels and the test forms.
    pub fn validate(&self) -> Result<()> {
        let (n, k) = (self.n, self.k);
        if !(1..=3).contains(&n) {
            return Err(Error::Config(format!("dimension {n} is not supported")));
        }
        match self.kind {
            StudyKind::Adjoint if k + 1 > n => return Err(Error::Config(format!("adjoint study needs k <= {}", n - 1))),
            StudyKind::AdjointInner if k == 0 || k > n => {
                return Err(Error::Config(format!("adjoint-inner study needs 1 <= k <= {n}")))
            }
            _ if k > n => return Err(Error::Config(format!("form degree {k} exceeds {n}"))),
            _ => {}
        }
        if self.levels.is_empty() || self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("levels must be non-empty and increasing".into()));
        }
        let data = self.data_form()?;
        match self.kind {
            StudyKind::Adjoint => check_zero_trace(&data)?,
            StudyKind::AdjointInner => check_clamped(&data)?,
            _ => {}
        }
        self.partner_form()?;
        Ok(())
    }

    pub fn data_form(&self) -> Result<SmoothForm> {
        named_form(&self.form, self.n, self.k)
    }

    /// Partner form; its degree is `n - k - 1` for the adjoint study and `k - 1` for the inner one.
    pub fn partner_form(&self) -> Result<SmoothForm> {
        let deg = match self.kind {
            StudyKind::Adjoint => self.n - self.k - 1,
            StudyKind::AdjointInner => self.k - 1,
            _ => self.k,
        };
        named_form(&self.partner, self.n, deg)
    }

    /// Stable hash of the configuration (output paths excluded).
    pub fn hash(&self) -> String {
        let mut h = DefaultHasher::new();
        (self.kind, self.family.to_string(), self.n, &self.levels, self.r, self.k, self.scalar).hash(&mut h);
        (&self.form, &self.partner, self.quad_order, self.seed, self.split).hash(&mut h);
        format!("{:016x}", h.finish())
    }
}

/// Looks up a named smooth form: `bump`, `clamped`, `trig`, `sin-dy` or `poly<deg>`.
pub fn named_form(name: &str, n: usize, k: usize) -> Result<SmoothForm> {
    if let Some(deg) = name.strip_prefix("poly") {
        let deg: usize = deg.parse().map_err(|_| Error::Config(format!("bad polynomial form '{name}'")))?;
        return Ok(library::polynomial(n, k, deg));
    }
    library::by_name(name, n, k).ok_or_else(|| Error::Config(format!("unknown form '{name}' for n = {n}, k = {k}")))
}

/// One refinement level of a rate table.
#[derive(Clone, Debug, Serialize)]
pub struct RateRow {
    pub level: usize,
    pub h: f64,
    pub ndof: usize,
    pub residual: f64,
    /// Slope fitted on the rows up to this one (`None` on the first row).
    pub slope_running: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateTable {
    pub name: String,
    pub rows: Vec<RateRow>,
    pub slope: Option<f64>,
    /// Every residual is at rounding level, so the quantity is reproduced exactly.
    pub exact: bool,
    /// Reported only; does not enter the pass decision.
    pub informational: bool,
}

/// Residuals at or below this value count as rounding noise.
pub const ROUNDING_LEVEL: f64 = 1e-12;

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || y.iter().any(|v| *v <= 0.0 || !v.is_finite()) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Slope over the last `max(2, L - 1)` of `L` points.
pub fn fitted_slope(h: &[f64], y: &[f64]) -> Option<f64> {
    let l = h.len();
    if l < 2 {
        return None;
    }
    let w = (l - 1).max(2).min(l);
    loglog_slope(&h[l - w..], &y[l - w..])
}

impl RateTable {
    /// Builds a table from `(level, h, ndof, residual)` rows ordered by level.
    pub fn new(name: &str, data: &[(usize, f64, usize, f64)]) -> Result<Self> {
        if data.windows(2).any(|w| w[1].1 >= w[0].1) {
            return Err(Error::Config("mesh sizes must decrease with the level".into()));
        }
        let h: Vec<f64> = data.iter().map(|d| d.1).collect();
        let y: Vec<f64> = data.iter().map(|d| d.3).collect();
        let rows: Vec<RateRow> = data
            .iter()
            .enumerate()
            .map(|(j, &(level, h_j, ndof, residual))| RateRow {
                level,
                h: h_j,
                ndof,
                residual,
                slope_running: fitted_slope(&h[..=j], &y[..=j]),
            })
            .collect();
        let slope = rows.last().and_then(|r| r.slope_running);
        let exact = y.iter().all(|v| v.abs() <= ROUNDING_LEVEL);
        Ok(RateTable { name: name.into(), rows, slope, exact, informational: false })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,h,ndof,residual,slope_running\n");
        for r in &self.rows {
            let slope = r.slope_running.map(|v| format!("{v:.17e}")).unwrap_or_default();
            s.push_str(&format!("{},{:.17e},{},{:.17e},{}\n", r.level, r.h, r.ndof, r.residual, slope));
        }
        s
    }

    /// Two whitespace-separated columns `h residual`.
    pub fn to_plot_data(&self) -> String {
        self.rows.iter().map(|r| format!("{:.17e} {:.17e}\n", r.h, r.residual)).collect()
    }

    /// True when the fitted slope reaches `target` or the quantity is reproduced exactly.
    pub fn meets(&self, target: f64) -> bool {
        self.informational || self.exact || self.slope.is_some_and(|s| s >= target)
    }

    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.residual).fold(0.0, f64::max)
    }
}

/// Outcome of a study: one table per measured quantity, the first being the primary one.
#[derive(Clone, Debug, Serialize)]
pub struct StudyReport {
    pub config: StudyConfig,
    pub config_hash: String,
    pub timestamp: u64,
    pub tables: Vec<RateTable>,
    /// Adjoint residual splits per level, when requested.
    pub splits: Vec<(f64, AdjointSplit)>,
    /// Slope threshold `r + 0.9`.
    pub target: f64,
    pub passed: bool,
}

impl StudyReport {
    /// Writes the CSV and plot-data files named in the configuration. The
    /// primary table goes to the given paths, the others next to them with
    /// the table name inserted before the extension.
    pub fn write_outputs(&self) -> Result<()> {
        for (j, t) in self.tables.iter().enumerate() {
            if let Some(p) = &self.config.out {
                write_file(&sibling(p, j, &t.name), &t.to_csv())?;
            }
            if let Some(p) = &self.config.plot_data {
                write_file(&sibling(p, j, &t.name), &t.to_plot_data())?;
            }
        }
        Ok(())
    }
}

fn sibling(p: &Path, j: usize, name: &str) -> PathBuf {
    if j == 0 {
        return p.to_path_buf();
    }
    let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let file = match p.extension() {
        Some(e) => format!("{stem}.{name}.{}", e.to_string_lossy()),
        None => format!("{stem}.{name}"),
    };
    p.with_file_name(file)
}

fn write_file(p: &Path, s: &str) -> Result<()> {
    let mut f = std::fs::File::create(p)?;
    f.write_all(s.as_bytes())?;
    Ok(())
}

struct LevelResult {
    level: usize,
    h: f64,
    ndof: usize,
    values: Vec<(&'static str, f64)>,
    split: Option<(f64, AdjointSplit)>,
}

/// Runs a study over all configured levels.
pub fn run_study(config: &StudyConfig) -> Result<StudyReport> {
    config.validate()?;
    let mut results = Vec::new();
    for &level in &config.levels {
        let mesh = build_family(FamilySpec::new(config.family, config.n, level))?;
        let res = match config.scalar {
            ScalarKind::Float => run_level::<f64>(config, &mesh, level)?,
            ScalarKind::Exact => run_level::<Rat>(config, &mesh, level)?,
        };
        results.push(res);
    }
    let mut tables = Vec::new();
    for (j, (name, _)) in results[0].values.iter().enumerate() {
        let data: Vec<(usize, f64, usize, f64)> = results.iter().map(|r| (r.level, r.h, r.ndof, r.values[j].1)).collect();
        let mut t = RateTable::new(name, &data)?;
        t.informational = name.ends_with("-random");
        tables.push(t);
    }
    let target = config.r as f64 + 0.9;
    let passed = tables.iter().all(|t| t.meets(target));
    Ok(StudyReport {
        config: config.clone(),
        config_hash: config.hash(),
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        tables,
        splits: results.iter().filter_map(|r| r.split.clone()).collect(),
        target,
        passed,
    })
}

fn run_level<S: Scalar>(config: &StudyConfig, mesh: &Mesh, level: usize) -> Result<LevelResult> {
    let (n, r, k, order) = (mesh.n, config.r, config.k, config.quad_order);
    let data = config.data_form()?;
    let mut split = None;
    let (ndof, values) = match config.kind {
        StudyKind::Approx => {
            let (a, b) = approximation_errors(mesh, r, &data, order);
            let ndof = mesh.num_cells(n) * crate::spaces::trimmed_dim(n, r as i64 + 1, k);
            let mut v = vec![("l2", a)];
            if k < n {
                v.push(("dl2", b));
            }
            (ndof, v)
        }
        StudyKind::Primal => {
            let space = DdrSpace::<S>::new(mesh, r, k)?;
            let e = primal_errors(&space, &data, order, config.seed);
            let mut v = vec![("potential", e.potential)];
            if k < n {
                v.push(("derivative", e.derivative));
            }
            v.push(("inner", e.inner));
            v.push(("inner-random", e.inner_random));
            (space.dim, v)
        }
        StudyKind::Adjoint => {
            let space = DdrSpace::<S>::new(mesh, r, n - k - 1)?;
            let omega = interpolate_smooth(&space, &config.partner_form()?, order);
            let res = adjoint_residual(&space, &data, &omega, order)?;
            if config.split {
                let lifting = Lifting::new(&space)?;
                let total = adjoint_argument(&space, &data, &omega, order);
                split = Some((total, adjoint_split(&space, r, &data, &omega, order, Some(&lifting))));
            }
            (space.dim, vec![("residual", res)])
        }
        StudyKind::AdjointInner => {
            let lower = DdrSpace::<S>::new(mesh, r, k - 1)?;
            let upper = DdrSpace::<S>::new(mesh, r, k)?;
            let mu = interpolate_smooth(&lower, &config.partner_form()?, order);
            (upper.dim, vec![("residual", adjoint_residual_inner(&lower, &upper, &data, &mu, order)?)])
        }
    };
    Ok(LevelResult { level, h: mesh.h(), ndof, values, split })
}

#[cfg(test)]
mod tests;

//! Run configuration, report assembly and rendering.
//!
//! A [`Report`] is a pure function of the [`RunConfig`]: checks run in any
//! order (possibly on several threads) and are merged sorted by name, so the
//! rendered bytes do not depend on scheduling.

use std::fmt::{self, Write as _};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::analysis::{
    check_identity_18, check_identity_23, check_identity_24, check_polylog_odes, check_prop1,
    check_prop2, check_prop3, radius_estimate, valuation_profile, CheckReport, SlopeTrend,
};
use crate::carlitz::{carlitz_exp, BracketCache, QLinearSeries};
use crate::ff::{Field, FieldConfig};
use crate::series::{Exponent, GenSeries};
use crate::special::{
    dwork_carlitz_graded, dwork_coefficient_bound, hypergeom, hypergeom_parameter_budget,
    overconvergent_polylog_graded, random_unit, seeded_rng, HypergeomParams,
};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable that relocates relative output paths.
pub const OUT_DIR_ENV: &str = "OVERCONV_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Markdown,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            "md" | "markdown" => Ok(Self::Markdown),
            _ => Err(format!("unknown format `{s}` (expected json, csv or md)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CheckName {
    ExpOde,
    Pochhammer,
    PolylogOde,
    Prop1,
    Prop2,
    Prop3,
    Prop4,
}

impl CheckName {
    /// All checks, sorted by name.
    pub const ALL: [CheckName; 7] = [
        Self::ExpOde,
        Self::Pochhammer,
        Self::PolylogOde,
        Self::Prop1,
        Self::Prop2,
        Self::Prop3,
        Self::Prop4,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::ExpOde => "exp-ode",
            Self::Pochhammer => "pochhammer",
            Self::PolylogOde => "polylog-ode",
            Self::Prop1 => "prop1",
            Self::Prop2 => "prop2",
            Self::Prop3 => "prop3",
            Self::Prop4 => "prop4",
        }
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown check `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub p: u32,
    pub m: u32,
    pub order: usize,
    pub precision: Exponent,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            p: 3,
            m: 1,
            order: 8,
            precision: Exponent::from(200),
            seed: 0,
            format: Format::Json,
            out: None,
        }
    }
}

/// Polylogarithm indices checked.
pub const POLYLOG_N_MAX: u32 = 4;
pub const POCHHAMMER_N_MAX: usize = 6;
pub const POCHHAMMER_SAMPLES: usize = 20;
pub const HYPERGEOM_N_MAX: usize = 5;
pub const HYPERGEOM_SAMPLES: usize = 10;

impl RunConfig {
    pub fn validate(&self) -> Result<FieldConfig> {
        if self.order < 1 {
            return Err(Error::InvalidConfig("order must be at least 1".into()));
        }
        if self.precision <= Exponent::from(0) {
            return Err(Error::InvalidConfig("precision must be positive".into()));
        }
        FieldConfig::new(self.p, self.m)
    }

    pub fn field(&self) -> Result<Arc<Field>> {
        Ok(Arc::new(Field::new(self.validate()?)))
    }
}

pub fn run_check(field: &Arc<Field>, cfg: &RunConfig, name: CheckName) -> Result<CheckReport> {
    let (n, p) = (cfg.order, cfg.precision);
    match name {
        CheckName::Prop1 => check_prop1(field, n),
        CheckName::Prop2 => check_prop2(field, n),
        CheckName::Prop3 => check_prop3(field, POLYLOG_N_MAX, n),
        CheckName::ExpOde => check_identity_18(field, n, p),
        CheckName::PolylogOde => check_polylog_odes(field, POLYLOG_N_MAX, n, p),
        CheckName::Pochhammer => check_identity_23(
            field,
            n.min(POCHHAMMER_N_MAX),
            POCHHAMMER_SAMPLES,
            cfg.seed,
            p,
        ),
        CheckName::Prop4 => check_identity_24(
            field,
            n.min(HYPERGEOM_N_MAX),
            HYPERGEOM_SAMPLES,
            cfg.seed,
            p,
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub p: u32,
    pub m: u32,
    pub q: u32,
    pub order: usize,
    pub precision: String,
    pub seed: u64,
    pub checks: Vec<CheckReport>,
}

/// Runs `names` on up to `jobs` threads and merges the results by name.
pub fn run_checks(cfg: &RunConfig, names: &[CheckName], jobs: usize) -> Result<Report> {
    let field = cfg.field()?;
    let mut names = names.to_vec();
    names.sort();
    names.dedup();
    let slots: Vec<Mutex<Option<Result<CheckReport>>>> =
        names.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let worker = || loop {
        let i = next.fetch_add(1, Ordering::Relaxed);
        let Some(&name) = names.get(i) else { break };
        let r = run_check(&field, cfg, name);
        *slots[i].lock().expect("slot lock") = Some(r);
    };
    let jobs = jobs.clamp(1, names.len().max(1));
    if jobs == 1 {
        worker();
    } else {
        std::thread::scope(|s| {
            for _ in 0..jobs {
                s.spawn(worker);
            }
        });
    }
    let checks = slots
        .into_iter()
        .map(|s| {
            s.into_inner()
                .expect("slot lock")
                .expect("every slot is filled")
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        p: cfg.p,
        m: cfg.m,
        q: field.q(),
        order: cfg.order,
        precision: cfg.precision.to_string(),
        seed: cfg.seed,
        checks,
    })
}

fn join_map(m: &std::collections::BTreeMap<String, String>) -> String {
    m.iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

impl Report {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// One row per case.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "p",
            "m",
            "check",
            "inputs",
            "measured",
            "bound",
            "printed_bound",
            "pass",
            "notes",
        ])?;
        let (p, m) = (self.p.to_string(), self.m.to_string());
        for check in &self.checks {
            for case in &check.cases {
                w.write_record([
                    p.as_str(),
                    m.as_str(),
                    check.name.as_str(),
                    &join_map(&case.inputs),
                    &case.measured,
                    &case.bound,
                    case.printed_bound.as_deref().unwrap_or(""),
                    if case.pass { "true" } else { "false" },
                    &join_map(&case.notes),
                ])?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        String::from_utf8(bytes).map_err(|e| Error::Malformed(e.to_string()))
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# Report: p = {}, m = {}, q = {}\n\norder {}, precision {}, seed {}\n",
            self.p, self.m, self.q, self.order, self.precision, self.seed
        );
        for check in &self.checks {
            let params = join_map(&check.params).replace(';', ", ");
            let status = if check.pass { "pass" } else { "FAIL" };
            let _ = writeln!(s, "## {} ({status})\n\n{params}\n", check.name);
            s.push_str("| inputs | measured | bound | printed bound | pass | notes |\n");
            s.push_str("|---|---|---|---|---|---|\n");
            for c in &check.cases {
                let _ = writeln!(
                    s,
                    "| {} | {} | {} | {} | {} | {} |",
                    join_map(&c.inputs).replace(';', ", "),
                    c.measured,
                    c.bound,
                    c.printed_bound.as_deref().unwrap_or(""),
                    if c.pass { "yes" } else { "**no**" },
                    join_map(&c.notes).replace(';', ", "),
                );
            }
            s.push('\n');
        }
        s
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
            Format::Markdown => Ok(self.to_markdown()),
        }
    }
}

/// Resolves a relative `out` against [`OUT_DIR_ENV`] when it is set.
pub fn resolve_out_path(out: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if out.is_relative() && !dir.is_empty() => Path::new(&dir).join(out),
        _ => out.to_path_buf(),
    }
}

/// Writes `content` to `path` via a temporary file in the same directory and
/// a rename.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(content.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Series available to the `radius` command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    /// `e_C`.
    Ec,
    /// `E(t) = e_C(σ(t − t^q))`.
    Dwork,
    /// `L_n(t) = l_n(t) − l_n(t^q)`.
    Polylog(u32),
    /// `F(a, b; c; t)` for a seeded unit triple.
    Hypergeom,
    /// `F(a, b; c; x t)`, the right-hand side of the shift identity.
    Rhs24,
}

impl FromStr for SeriesKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ec" => Ok(Self::Ec),
            "dwork" => Ok(Self::Dwork),
            "hypergeom" => Ok(Self::Hypergeom),
            "rhs24" => Ok(Self::Rhs24),
            _ => match s.strip_prefix("polylog=").map(str::parse::<u32>) {
                Some(Ok(n)) if n >= 1 => Ok(Self::Polylog(n)),
                _ => Err(format!(
                    "unknown series `{s}` (expected ec, dwork, polylog=<n>, hypergeom or rhs24)"
                )),
            },
        }
    }
}

impl fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ec => f.write_str("ec"),
            Self::Dwork => f.write_str("dwork"),
            Self::Polylog(n) => write!(f, "polylog={n}"),
            Self::Hypergeom => f.write_str("hypergeom"),
            Self::Rhs24 => f.write_str("rhs24"),
        }
    }
}

/// The series and the index its tail starts at.
pub fn radius_series(
    field: &Arc<Field>,
    cfg: &RunConfig,
    kind: SeriesKind,
) -> Result<(QLinearSeries, usize)> {
    let (n, prec) = (cfg.order, cfg.precision);
    let q = field.q();
    let hypergeometric = || -> Result<QLinearSeries> {
        let cache = BracketCache::new(field, n)?;
        let budget = hypergeom_parameter_budget(q, n, prec).ceil().to_integer();
        let mut rng = seeded_rng(cfg.seed);
        let mut unit = || random_unit(field, &mut rng, budget);
        let params = HypergeomParams::new(unit()?, unit()?, unit()?, n)?;
        hypergeom(&cache, &params, n, prec)
    };
    match kind {
        SeriesKind::Ec => Ok((carlitz_exp(&BracketCache::new(field, n)?, n, prec)?, 1)),
        SeriesKind::Dwork => {
            let precs: Vec<Exponent> = (0..=n)
                .map(|k| dwork_coefficient_bound(q, k) * 2 + 2)
                .collect();
            Ok((
                dwork_carlitz_graded(&BracketCache::new(field, n)?, &precs)?,
                2,
            ))
        }
        SeriesKind::Polylog(idx) => {
            let precs: Vec<Exponent> = (0..=n)
                .map(|j| {
                    let qj = u32::try_from(j.saturating_sub(1))
                        .ok()
                        .and_then(|e| (q as i64).checked_pow(e))
                        .ok_or_else(|| Error::ExponentOverflow(format!("{q}^{j}")))?;
                    Ok(Exponent::from(idx as i64 * qj + idx as i64 + 2))
                })
                .collect::<Result<_>>()?;
            Ok((overconvergent_polylog_graded(field, idx, &precs)?, 2))
        }
        SeriesKind::Hypergeom => Ok((hypergeometric()?, 1)),
        SeriesKind::Rhs24 => {
            let budget = hypergeom_parameter_budget(q, n, prec).ceil().to_integer();
            let x = GenSeries::from_x_power(field, 1, budget + 2)?;
            Ok((hypergeometric()?.scale_argument(&x)?, 1))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProfileRow {
    pub k: usize,
    pub valuation: String,
    pub slope: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RadiusReport {
    pub schema_version: u32,
    pub p: u32,
    pub m: u32,
    pub q: u32,
    pub order: usize,
    pub series: String,
    pub profile: Vec<ProfileRow>,
    /// Coefficients zero to their cap; `valuation` holds the cap.
    pub lower_bounds: Vec<ProfileRow>,
    pub tail_start: usize,
    pub radius_exponent: String,
    pub last_slope: String,
    pub trend: SlopeTrend,
    pub monotone_tail: bool,
}

pub fn radius_report(cfg: &RunConfig, kind: SeriesKind) -> Result<RadiusReport> {
    let field = cfg.field()?;
    let (series, tail_start) = radius_series(&field, cfg, kind)?;
    let profile = valuation_profile(&series)?;
    let est = radius_estimate(&profile, tail_start)?;
    let rows = |entries: &[crate::analysis::ProfileEntry]| {
        entries
            .iter()
            .map(|e| ProfileRow {
                k: e.k,
                valuation: e.valuation.to_string(),
                slope: e.slope.to_string(),
            })
            .collect()
    };
    Ok(RadiusReport {
        schema_version: SCHEMA_VERSION,
        p: cfg.p,
        m: cfg.m,
        q: field.q(),
        order: cfg.order,
        series: kind.to_string(),
        profile: rows(&profile.entries),
        lower_bounds: rows(&profile.lower_bounds),
        tail_start,
        radius_exponent: est.radius_exponent().to_string(),
        last_slope: est.last_slope.to_string(),
        trend: est.trend,
        monotone_tail: est.monotone_tail,
    })
}

impl RadiusReport {
    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["series", "k", "valuation", "slope", "exact"])?;
                let mut rows: Vec<(&ProfileRow, bool)> =
                    self.profile.iter().map(|r| (r, true)).collect();
                rows.extend(self.lower_bounds.iter().map(|r| (r, false)));
                rows.sort_by_key(|(r, _)| r.k);
                for (r, exact) in rows {
                    let k = r.k.to_string();
                    let exact = if exact { "true" } else { "false" };
                    w.write_record([self.series.as_str(), &k, &r.valuation, &r.slope, exact])?;
                }
                let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
                String::from_utf8(bytes).map_err(|e| Error::Malformed(e.to_string()))
            }
            Format::Markdown => {
                let mut s = format!(
                    "# Radius of {} (q = {}, order {})\n\n| k | v(c_k) | slope |\n|---|---|---|\n",
                    self.series, self.q, self.order
                );
                for r in &self.profile {
                    let _ = writeln!(s, "| {} | {} | {} |", r.k, r.valuation, r.slope);
                }
                for r in &self.lower_bounds {
                    let _ = writeln!(s, "| {} | >= {} | >= {} |", r.k, r.valuation, r.slope);
                }
                let _ = writeln!(
                    s,
                    "\nradius exponent (tail min from k = {}): {}; last slope {}; trend {:?}; monotone {}",
                    self.tail_start, self.radius_exponent, self.last_slope, self.trend, self.monotone_tail
                );
                Ok(s)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorialTerm {
    pub exponent: String,
    /// Canonical index of the coefficient; for `F_p` coefficients this is the
    /// residue in `0..p`.
    pub coefficient: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorialReport {
    pub schema_version: u32,
    pub p: u32,
    pub m: u32,
    pub q: u32,
    pub n: usize,
    pub valuation: String,
    pub expansion: String,
    pub terms: Vec<FactorialTerm>,
}

pub fn factorial_report(cfg: &RunConfig, n: usize) -> Result<FactorialReport> {
    let field = cfg.field()?;
    let d = BracketCache::new(&field, n)?.factorial_exact(n)?;
    let shown = d.to_string();
    let expansion = shown
        .rsplit_once(" + O(")
        .map_or(shown.as_str(), |(e, _)| e)
        .to_string();
    Ok(FactorialReport {
        schema_version: SCHEMA_VERSION,
        p: cfg.p,
        m: cfg.m,
        q: field.q(),
        n,
        valuation: d.valuation()?.to_string(),
        expansion,
        terms: d
            .terms()
            .map(|(r, c)| FactorialTerm {
                exponent: r.to_string(),
                coefficient: field.index(c),
            })
            .collect(),
    })
}

impl FactorialReport {
    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["n", "exponent", "coefficient"])?;
                let n = self.n.to_string();
                for t in &self.terms {
                    w.write_record([n.as_str(), &t.exponent, &t.coefficient.to_string()])?;
                }
                let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
                String::from_utf8(bytes).map_err(|e| Error::Malformed(e.to_string()))
            }
            Format::Markdown => Ok(format!(
                "D_{} = {}\nvaluation: {}\n",
                self.n, self.expansion, self.valuation
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunConfig {
        RunConfig {
            p: 2,
            order: 3,
            precision: Exponent::from(12),
            ..RunConfig::default()
        }
    }

    #[test]
    fn parallel_matches_sequential() {
        let cfg = small();
        let a = run_checks(&cfg, &CheckName::ALL, 1).unwrap();
        let b = run_checks(&cfg, &CheckName::ALL, 4).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert!(a.pass());
        let names: Vec<_> = a.checks.iter().map(|c| c.name.as_str()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
    }

    #[test]
    fn renderings_have_no_floats() {
        let r = run_checks(&small(), &[CheckName::Prop2, CheckName::Prop3], 2).unwrap();
        let json = r.to_json().unwrap();
        assert!(json.contains("\"printed_bound\""));
        let csv = r.to_csv().unwrap();
        assert_eq!(
            csv.lines().count(),
            1 + r.checks.iter().map(|c| c.cases.len()).sum::<usize>()
        );
        assert!(r.to_markdown().contains("## prop3 (pass)"));
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        fn no_floats(v: &serde_json::Value) -> bool {
            match v {
                serde_json::Value::Number(n) => !n.is_f64(),
                serde_json::Value::Array(a) => a.iter().all(no_floats),
                serde_json::Value::Object(o) => o.values().all(no_floats),
                _ => true,
            }
        }
        assert!(no_floats(&v));
    }

    #[test]
    fn invalid_configs() {
        let cfg = RunConfig {
            p: 7,
            m: 0,
            ..RunConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        let cfg = RunConfig {
            precision: Exponent::from(0),
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn factorial_d2_q3() {
        let r = factorial_report(&RunConfig::default(), 2).unwrap();
        assert_eq!(r.valuation, "4");
        assert_eq!(r.expansion, "x^4 - x^10 - x^12 + x^18");
    }

    #[test]
    fn series_kinds_parse() {
        assert_eq!("polylog=3".parse(), Ok(SeriesKind::Polylog(3)));
        assert!("polylog=0".parse::<SeriesKind>().is_err());
        assert!("nope".parse::<SeriesKind>().is_err());
        for k in ["ec", "dwork", "polylog=2", "hypergeom", "rhs24"] {
            assert_eq!(k.parse::<SeriesKind>().unwrap().to_string(), k);
        }
    }

    #[test]
    fn radius_reports() {
        let cfg = RunConfig {
            order: 4,
            precision: Exponent::from(30),
            ..RunConfig::default()
        };
        let r = radius_report(&cfg, SeriesKind::Ec).unwrap();
        assert_eq!(r.last_slope, "-40/81");
        let r = radius_report(&cfg, SeriesKind::Rhs24).unwrap();
        assert_eq!(
            r.last_slope,
            (Exponent::from(1) - Exponent::new(40, 81)).to_string()
        );
        for kind in ["dwork", "polylog=2", "hypergeom"] {
            let r = radius_report(&cfg, kind.parse().unwrap()).unwrap();
            for f in [Format::Json, Format::Csv, Format::Markdown] {
                assert!(!r.render(f).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn atomic_write() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/report.json");
        write_atomic(&path, "x").unwrap();
        write_atomic(&path, "yz").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "yz");
    }
}

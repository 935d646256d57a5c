//! Command-line front end. Every command prints one JSON report (or CSV)
//! carrying `"schema": 1`, the resolved configuration, the result and a list
//! of tagged inequality checks.
//!
//! Exit codes: 0 on success, 2 when a reported inequality fails, 1 on usage,
//! input or numerical errors.

use crate::bounds::{planar_bound_certificate_with, sphere_modified_quotient, Branch, CertificateOptions};
use crate::caps::{rearrange, Cap};
use crate::directions::{
    canonicalize, classify, default_r_grid, default_theta_grid, scan_caps, sphere_degree_check,
    sphere_grid, sphere_scan, SCAN_EPS,
};
use crate::error::{Error, Result};
use crate::fem::{build_mesh, default_corpus, neck_family, neumann_eigs, verify_corpus, CorpusEntry, DomainSpec, FEM_TOLERANCE};
use crate::measures::{direction_form, pullback_measure, sphere_quadrature, ConformalDomain, DiscreteMeasure, Space};
use crate::moebius::renormalize;
use crate::specfun::{bound_constants, find_zeta, mu1_disk, planar_bound, polya_bound, radial_l2, szego_bound};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "foldspec", version, about = "Conformal eigenvalue bounds: rearrangement pipeline and FEM cross-checks")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// key=value file merged under the flags
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub n_r: Option<usize>,
    #[arg(long, global = true)]
    pub n_theta: Option<usize>,
    #[arg(long, global = true)]
    pub h: Option<f64>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ζ, μ₁(D), the planar bounds and the sphere constants for dimension n
    Constants {
        #[arg(long)]
        n: Option<u32>,
    },
    /// Pulled-back measure of a conformal domain, as measure JSON
    Pullback { domain: PathBuf },
    /// Renormalizing Möbius point of a measure
    Renormalize { measure: PathBuf },
    /// Rearrangement of a measure along a cap
    Rearrange {
        measure: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        r: f64,
        /// Cap direction angle (disk measures)
        #[arg(long, allow_hyphen_values = true)]
        angle: Option<f64>,
        /// Cap direction as comma-separated components (sphere measures)
        #[arg(long, allow_hyphen_values = true)]
        p: Option<String>,
    },
    /// Direction field, winding table and multiple cap of a conformal domain
    Scan { domain: PathBuf },
    /// Planar Rayleigh-quotient certificate of a conformal domain
    Certify { domain: PathBuf },
    /// Neumann eigenvalues of a domain by P1 finite elements
    Fem {
        spec: String,
        #[arg(long, default_value_t = 4)]
        k: usize,
    },
    /// FEM sweep over a list of domains (`default`, `neck`, or a JSON file)
    Corpus { specs: String },
    /// Sphere pipeline: modified quotient and degree check
    Sphere {
        #[arg(long)]
        n: usize,
        /// Coefficient c of the density 1 + c x₁²
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        perturb: f64,
    },
}

/// Resolved configuration embedded in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub seed: u64,
    pub n_r: Option<usize>,
    pub n_theta: Option<usize>,
    pub h: Option<f64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

const CONFIG_KEYS: [&str; 7] = ["seed", "n_r", "n_theta", "h", "tol", "out", "format"];

/// Parses a `key=value` file; blank lines and `#` comments are skipped and
/// unknown keys rejected.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("config line {}: expected key=value", lineno + 1)))?;
        let k = k.trim();
        if !CONFIG_KEYS.contains(&k) {
            return Err(Error::InvalidInput(format!("config line {}: unknown key `{k}`", lineno + 1)));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::InvalidInput(format!("config key `{key}`: cannot parse `{v}`")))
}

/// Merges the config file under the flags.
pub fn resolve(common: &Common, command: &str) -> Result<RunConfig> {
    let file = match &common.config {
        Some(p) => parse_config_text(&std::fs::read_to_string(p)?)?,
        None => BTreeMap::new(),
    };
    let get = |k: &str| file.get(k).map(String::as_str);
    let seed = match (common.seed, get("seed")) {
        (Some(s), _) => s,
        (None, Some(v)) => parse_value("seed", v)?,
        (None, None) => 0,
    };
    let n_r = common.n_r.map(Ok).or_else(|| get("n_r").map(|v| parse_value("n_r", v))).transpose()?;
    let n_theta = common
        .n_theta
        .map(Ok)
        .or_else(|| get("n_theta").map(|v| parse_value("n_theta", v)))
        .transpose()?;
    let h = common.h.map(Ok).or_else(|| get("h").map(|v| parse_value("h", v))).transpose()?;
    let tol = common.tol.map(Ok).or_else(|| get("tol").map(|v| parse_value("tol", v))).transpose()?;
    let out = common.out.clone().or_else(|| get("out").map(PathBuf::from));
    let format = match (common.format, get("format")) {
        (Some(f), _) => f,
        (None, Some("json")) => Format::Json,
        (None, Some("csv")) => Format::Csv,
        (None, Some(v)) => return Err(Error::InvalidInput(format!("config key `format`: unknown `{v}`"))),
        (None, None) => Format::Json,
    };
    Ok(RunConfig {
        command: command.to_string(),
        seed,
        n_r,
        n_theta,
        h,
        tol,
        out,
        format,
    })
}

/// One tagged inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub tag: String,
    pub statement: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Check {
    pub fn le(tag: &str, statement: &str, lhs: f64, rhs: f64) -> Self {
        Check {
            tag: tag.into(),
            statement: statement.into(),
            lhs,
            rhs,
            holds: lhs <= rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub config: RunConfig,
    pub result: Value,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// A conformal domain file: `{"id": "...", "coeffs": [[re, im], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainFile {
    #[serde(default)]
    pub id: Option<String>,
    pub coeffs: Vec<[f64; 2]>,
}

pub fn read_domain(path: &Path) -> Result<(String, ConformalDomain)> {
    let file: DomainFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let id = file.id.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "domain".into())
    });
    let domain = ConformalDomain::new(file.coeffs.iter().map(|c| Complex64::new(c[0], c[1])).collect())?;
    Ok((id, domain))
}

fn read_measure(path: &Path) -> Result<DiscreteMeasure> {
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    // accept the report of `pullback` or `rearrange` as well as a bare measure
    let inner = v
        .get("result")
        .and_then(|r| r.get("measure").or_else(|| r.get("nu")))
        .unwrap_or(&v);
    DiscreteMeasure::from_json(inner)
}

fn to_value<T: Serialize>(t: &T) -> Result<Value> {
    Ok(serde_json::to_value(t)?)
}

/// What a command produced: a report, plus optional CSV for `--format csv`.
pub struct Output {
    pub report: Report,
    pub csv: Option<String>,
}

/// Runs a parsed command and returns its output.
pub fn execute(cli: &Cli) -> Result<Output> {
    let name = match &cli.command {
        Command::Constants { .. } => "constants",
        Command::Pullback { .. } => "pullback",
        Command::Renormalize { .. } => "renormalize",
        Command::Rearrange { .. } => "rearrange",
        Command::Scan { .. } => "scan",
        Command::Certify { .. } => "certify",
        Command::Fem { .. } => "fem",
        Command::Corpus { .. } => "corpus",
        Command::Sphere { .. } => "sphere",
    };
    let config = resolve(&cli.common, name)?;
    let mut checks = Vec::new();
    let mut csv = None;
    let n_r = config.n_r.unwrap_or(96);
    let n_theta = config.n_theta.unwrap_or(192);
    let result = match &cli.command {
        Command::Constants { n } => {
            let z = find_zeta();
            let mut v = json!({
                "zeta": z,
                "mu1_disk": mu1_disk(),
                "radial_l2": radial_l2(),
                "szego_bound": szego_bound(),
                "planar_bound": planar_bound(),
                "polya_bound_k2": polya_bound(2),
            });
            checks.push(Check::le("szego", "μ₁(D)π ≤ 2μ₁(D)π", szego_bound(), planar_bound()));
            checks.push(Check::le("polya-k2", "2μ₁(D)π ≤ 8π", planar_bound(), polya_bound(2)));
            if let Some(n) = n {
                let c = bound_constants(*n);
                v["sphere"] = to_value(&c)?;
                if *n >= 2 && !c.even_dimension_warning {
                    checks.push(Check::le(
                        "thm1.2",
                        "conjectured constant ≤ theorem constant",
                        c.conjecture_constant,
                        c.theorem_constant,
                    ));
                    checks.push(Check::le("thm1.2", "theorem/conjecture ratio < 1.04", c.ratio, 1.04));
                }
            }
            v
        }
        Command::Pullback { domain } => {
            let (id, d) = read_domain(domain)?;
            let mu = pullback_measure(&d, n_r, n_theta)?;
            json!({ "domain_id": id, "area": d.area, "measure": mu.to_json() })
        }
        Command::Renormalize { measure } => {
            let m = read_measure(measure)?;
            let r = renormalize(&m, config.tol.unwrap_or(1e-10), config.seed)?;
            to_value(&r)?
        }
        Command::Rearrange { measure, r, angle, p } => {
            let m = read_measure(measure)?;
            let cap = match (m.space, angle, p) {
                (Space::Disk, Some(a), None) => Cap::disk(*r, *a)?,
                (_, None, Some(p)) => {
                    let comps: Vec<f64> = p
                        .split(',')
                        .map(|s| parse_value("p", s.trim()))
                        .collect::<Result<_>>()?;
                    Cap::new(m.space, *r, comps)?
                }
                _ => {
                    return Err(Error::InvalidInput(
                        "give --angle for disk measures or --p for sphere measures".into(),
                    ))
                }
            };
            let (nu, trace) = rearrange(&m, &cap)?;
            json!({ "nu": nu.to_json(), "trace": to_value(&trace)? })
        }
        Command::Scan { domain } => {
            let (id, d) = read_domain(domain)?;
            let mu = pullback_measure(&d, n_r, n_theta)?.with_mass(std::f64::consts::PI)?;
            let canon = canonicalize(&mu)?;
            let scan = scan_caps(
                &canon.measure,
                &default_r_grid(),
                &default_theta_grid(36),
                config.tol.unwrap_or(SCAN_EPS),
            )?;
            csv = Some(scan.to_csv());
            let mut v = to_value(&scan)?;
            v["domain_id"] = json!(id);
            v["measure_gap"] = json!(canon.form.gap());
            checks.push(Check::le("prop2.7", "gap of the scanned cap ≤ eps", scan.gap, config.tol.unwrap_or(SCAN_EPS)));
            v
        }
        Command::Certify { domain } => {
            let (id, d) = read_domain(domain)?;
            let opts = CertificateOptions {
                n_r,
                n_theta,
                eps: config.tol.unwrap_or(SCAN_EPS),
                ..CertificateOptions::default()
            };
            let rep = planar_bound_certificate_with(&d, &id, &opts)?;
            let tag = match rep.branch {
                Branch::SimpleFolded => "thm1.1",
                Branch::MultipleDirect => "szego",
            };
            checks.push(Check::le(
                tag,
                "sup of the Rayleigh quotient ≤ branch bound × (1 + slack)",
                rep.quotient_sup,
                rep.bound * (1.0 + rep.slack),
            ));
            to_value(&rep)?
        }
        Command::Fem { spec, k } => {
            let spec = load_spec(spec)?;
            let h = config.h.unwrap_or(0.02);
            let mesh = build_mesh(&spec, h)?;
            let res = neumann_eigs(&mesh, (*k).max(2))?;
            csv = Some(res.to_csv());
            let tol = 1.0 + FEM_TOLERANCE;
            checks.push(Check::le("szego", "μ₁·Area ≤ μ₁(D)π (FEM tolerance)", res.products[1], szego_bound() * tol));
            checks.push(Check::le("thm1.1", "μ₂·Area ≤ 2μ₁(D)π (FEM tolerance)", res.products[2], planar_bound() * tol));
            checks.push(Check::le("polya-k2", "μ₂·Area ≤ 8π (FEM tolerance)", res.products[2], polya_bound(2) * tol));
            let mut v = to_value(&res)?;
            v["spec"] = to_value(&spec)?;
            v["vertices"] = json!(mesh.vertices.len());
            v["triangles"] = json!(mesh.triangles.len());
            v
        }
        Command::Corpus { specs } => {
            let entries = load_corpus(specs, config.seed)?;
            let h = config.h.unwrap_or(0.02);
            let rep = verify_corpus(&entries, h);
            let tol = 1.0 + FEM_TOLERANCE;
            for row in &rep.rows {
                if let (Some(m1), Some(m2)) = (row.mu1_area, row.mu2_area) {
                    checks.push(Check::le("szego", &format!("{}: μ₁·Area ≤ μ₁(D)π", row.id), m1, rep.szego * tol));
                    checks.push(Check::le("thm1.1", &format!("{}: μ₂·Area ≤ 2μ₁(D)π", row.id), m2, rep.thm11 * tol));
                    checks.push(Check::le("polya-k2", &format!("{}: μ₂·Area ≤ 8π", row.id), m2, rep.polya_k2 * tol));
                }
            }
            let mut table = String::from("id,area,mu1,mu2,mu1_area,mu2_area,violations,error\n");
            for r in &rep.rows {
                let f = |x: Option<f64>| x.map(|v| format!("{v:.10e}")).unwrap_or_default();
                table.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.id,
                    f(r.area),
                    f(r.mu1),
                    f(r.mu2),
                    f(r.mu1_area),
                    f(r.mu2_area),
                    r.violations.join(";"),
                    r.error.clone().unwrap_or_default().replace(',', ";")
                ));
            }
            csv = Some(table);
            if let Some(r) = rep.rows.iter().find(|r| r.error.is_some()) {
                return Err(Error::InvalidInput(format!(
                    "corpus member {} failed: {}",
                    r.id,
                    r.error.clone().unwrap_or_default()
                )));
            }
            to_value(&rep)?
        }
        Command::Sphere { n, perturb } => {
            let c = *perturb;
            let g = sphere_quadrature(*n, 12, 24, |x| 1.0 + c * x[0] * x[0])?;
            let canon = canonicalize(&g)?;
            let eps = config.tol.unwrap_or(SCAN_EPS);
            let cls = classify(&canon.measure, eps);
            let quotient = if cls.is_multiple() {
                let s = canon.form.max_direction.clone();
                sphere_modified_quotient(&canon.measure, None, &s)?
            } else {
                let (cap, _) = sphere_scan(&canon.measure, eps, config.seed)?;
                let (nu, _) = rearrange(&canon.measure.with_mass(1.0)?, &cap)?;
                let s = direction_form(&nu).max_direction.clone();
                sphere_modified_quotient(&canon.measure, Some(&cap), &s)?
            };
            checks.push(Check::le(
                "prop4.6",
                "modified Rayleigh quotient < (n+1)(2K_n)^{2/n}",
                quotient.ratio,
                quotient.bound,
            ));
            let nn = *n as f64;
            checks.push(Check::le(
                "denomin",
                "1/(n+1) − 1e-3 ≤ denominator",
                1.0 / (nn + 1.0) - 1e-3,
                quotient.denominator,
            ));
            let degree = sphere_degree_check(*n, &sphere_grid(*n, 8, 16), config.seed)?;
            json!({
                "perturb": c,
                "measure_gap": cls.gap(),
                "quotient": to_value(&quotient)?,
                "degree": to_value(&degree)?,
            })
        }
    };
    Ok(Output {
        report: Report {
            schema: SCHEMA,
            config,
            result,
            checks,
        },
        csv,
    })
}

fn load_spec(text: &str) -> Result<DomainSpec> {
    let path = Path::new(text);
    if path.extension().is_some_and(|e| e == "json") && path.exists() {
        let raw = std::fs::read_to_string(path)?;
        if let Ok(file) = serde_json::from_str::<DomainFile>(&raw) {
            let d = ConformalDomain::new(file.coeffs.iter().map(|c| Complex64::new(c[0], c[1])).collect())?;
            return Ok(DomainSpec::conformal(&d));
        }
        return DomainSpec::parse(&raw);
    }
    DomainSpec::parse(text)
}

fn load_corpus(text: &str, seed: u64) -> Result<Vec<CorpusEntry>> {
    match text {
        "default" => default_corpus(seed),
        "neck" => Ok(neck_family()),
        path => {
            let raw = std::fs::read_to_string(path)?;
            let entries: Vec<CorpusEntry> = serde_json::from_str(&raw)?;
            for e in &entries {
                e.spec.check()?;
            }
            Ok(entries)
        }
    }
}

/// Parses `argv`, runs the command, writes the output and returns the exit
/// code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let output = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let text = match (output.report.config.format, &output.csv) {
        (Format::Csv, Some(csv)) => csv.clone(),
        _ => match serde_json::to_string_pretty(&output.report) {
            Ok(s) => s + "\n",
            Err(e) => {
                eprintln!("error: {e}");
                return 1;
            }
        },
    };
    match &output.report.config.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 1;
            }
        }
        None => print!("{text}"),
    }
    let failed: Vec<&Check> = output.report.checks.iter().filter(|c| !c.holds).collect();
    if failed.is_empty() {
        0
    } else {
        for c in failed {
            eprintln!("violated [{}]: {} ({} > {})", c.tag, c.statement, c.lhs, c.rhs);
        }
        2
    }
}

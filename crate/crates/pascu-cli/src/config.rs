//! Input assembly: the flat config-file format, the kernel mini-language,
//! and the merged run configuration. Flags always win over file entries.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use pascu_core::kernels::Kernel;
use pascu_core::{
    resolve_mu_nu_with, MuAssignment, MuNuPair, QuadratureSpec, TruncationPolicy,
};

use crate::render::Format;
use crate::CommonArgs;

/// Failure classes mapped onto the exit-code contract: `Input` exits 2,
/// `Numeric` exits 3. Condition failures are not errors; commands return
/// `Ok(false)` for those (exit 1).
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numeric(String),
}

impl CliError {
    pub fn input(msg: impl Display) -> Self {
        Self::Input(msg.to_string())
    }
}

impl From<pascu_core::Error> for CliError {
    fn from(e: pascu_core::Error) -> Self {
        use pascu_core::Error as E;
        match &e {
            // Bad parameters and unusable grids are caller mistakes; the
            // rest are runtime numeric failures.
            E::Domain(_) | E::Kernel(_) | E::Grid(_) => Self::Input(e.to_string()),
            _ => Self::Numeric(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Parsed flat config file: `key = value` lines with `#` comments and
/// section-prefixed keys (kernel.c, spec.alpha, grids.order, quad.rel_tol,
/// output.format).
struct FileConfig {
    entries: BTreeMap<String, String>,
}

impl FileConfig {
    fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::input(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::input(format!(
                    "config {}:{}: expected key=value, got {raw:?}",
                    path.display(),
                    lineno + 1
                )));
            };
            entries.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self { entries })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    fn get_f64(&self, key: &str) -> CliResult<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>().map_err(|_| {
                    CliError::input(format!("config key {key}: not a number: {v:?}"))
                })
            })
            .transpose()
    }

    fn get_usize(&self, key: &str) -> CliResult<Option<usize>> {
        self.get(key)
            .map(|v| {
                v.parse::<usize>().map_err(|_| {
                    CliError::input(format!("config key {key}: not an integer: {v:?}"))
                })
            })
            .transpose()
    }
}

/// Everything a command needs, fully merged and validated as far as syntax
/// goes; semantic validation (parameter ranges) happens when the kernel and
/// the pair are built.
#[derive(Clone)]
pub struct RunConfig {
    pub family: String,
    pub params: BTreeMap<String, f64>,
    table: Option<(Vec<f64>, Vec<f64>)>,
    pub alpha: f64,
    pub gamma: f64,
    pub xi: f64,
    pub rho: f64,
    pub assignment: MuAssignment,
    pub policy: TruncationPolicy,
    pub radius: f64,
    pub quad: QuadratureSpec,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_args(args: &CommonArgs, default_format: Format) -> CliResult<Self> {
        let file = match &args.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::empty(),
        };

        let (family, params, table_path) = match &args.kernel {
            Some(s) => parse_kernel_flag(s)?,
            None => kernel_from_file(&file)?,
        };
        let table = if family == "tabulated" {
            let p = table_path.ok_or_else(|| {
                CliError::input("tabulated kernel needs file=PATH (or kernel.file)")
            })?;
            Some(load_table(&p)?)
        } else {
            None
        };

        let alpha = args
            .alpha
            .or(file.get_f64("spec.alpha")?)
            .ok_or_else(|| CliError::input("alpha is required (--alpha or spec.alpha)"))?;
        let gamma = args
            .gamma
            .or(file.get_f64("spec.gamma")?)
            .ok_or_else(|| CliError::input("gamma is required (--gamma or spec.gamma)"))?;
        let xi = args.xi.or(file.get_f64("spec.xi")?).unwrap_or(0.0);
        if !(0.0..=1.0).contains(&xi) {
            return Err(CliError::input(format!("xi must lie in [0, 1], got {xi}")));
        }
        let rho = args.rho.or(file.get_f64("spec.rho")?).unwrap_or(0.0);
        if !(rho < 1.0) {
            return Err(CliError::input(format!("rho must be < 1, got {rho}")));
        }

        let assignment = match args.mu_assignment {
            Some(a) => a.into(),
            None => match file.get("spec.mu_assignment") {
                None => MuAssignment::default(),
                Some("max") => MuAssignment::Max,
                Some("unit_root") => MuAssignment::UnitRoot,
                Some(other) => {
                    return Err(CliError::input(format!(
                        "spec.mu_assignment: expected max or unit_root, got {other:?}"
                    )))
                }
            },
        };

        let mut policy = TruncationPolicy::default();
        if let Some(n) = args.order.or(file.get_usize("grids.order")?) {
            if n < 8 {
                return Err(CliError::input(format!("order must be >= 8, got {n}")));
            }
            policy.order = n;
        }
        let radius = args.radius.or(file.get_f64("grids.radius")?).unwrap_or(0.95);
        if !(radius > 0.0 && radius < 1.0) {
            return Err(CliError::input(format!(
                "radius must lie in (0, 1), got {radius}"
            )));
        }

        let mut quad = QuadratureSpec::default();
        if let Some(v) = file.get_f64("quad.rel_tol")? {
            quad.rel_tol = v;
        }
        if let Some(v) = file.get_f64("quad.abs_tol")? {
            quad.abs_tol = v;
        }
        if let Some(v) = file.get_usize("quad.max_subdivisions")? {
            quad.max_subdivisions = v;
        }

        let format = match args.format {
            Some(f) => f,
            None => match file.get("output.format") {
                None => default_format,
                Some("text") => Format::Text,
                Some("csv") => Format::Csv,
                Some("json") => Format::Json,
                Some(other) => {
                    return Err(CliError::input(format!(
                        "output.format: expected text, csv, or json, got {other:?}"
                    )))
                }
            },
        };
        let out = args
            .out
            .clone()
            .or_else(|| file.get("output.path").map(PathBuf::from));

        Ok(Self {
            family,
            params,
            table,
            alpha,
            gamma,
            xi,
            rho,
            assignment,
            policy,
            radius,
            quad,
            format,
            out,
        })
    }

    pub fn munu(&self) -> CliResult<MuNuPair> {
        resolve_mu_nu_with(self.alpha, self.gamma, self.assignment)
            .map_err(|e| CliError::input(format!("cannot resolve (mu, nu): {e}")))
    }

    pub fn kernel(&self) -> CliResult<Kernel> {
        let take = |name: &str| -> CliResult<f64> {
            self.params.get(name).copied().ok_or_else(|| {
                CliError::input(format!(
                    "kernel family {} needs parameter {name}",
                    self.family
                ))
            })
        };
        let built = match self.family.as_str() {
            "bernardi" => {
                self.expect_params(&["c"])?;
                Kernel::bernardi(take("c")?, &self.quad)
            }
            "ab" => {
                self.expect_params(&["a", "b"])?;
                Kernel::ab_power(take("a")?, take("b")?, &self.quad)
            }
            "komatu" => {
                self.expect_params(&["c", "p"])?;
                Kernel::komatu(take("c")?, take("p")?, &self.quad)
            }
            "hypergeom" => {
                self.expect_params(&["a", "b", "c"])?;
                Kernel::hypergeom_constant(take("a")?, take("b")?, take("c")?, &self.quad)
            }
            "tabulated" => {
                let (ts, vals) = self
                    .table
                    .clone()
                    .expect("table loaded at config time for tabulated kernels");
                Kernel::tabulated(ts, vals)
            }
            other => {
                return Err(CliError::input(format!(
                    "unknown kernel family {other:?} (known: bernardi, ab, komatu, hypergeom, tabulated)"
                )))
            }
        };
        // Keep the numeric/input split: a quadrature blow-up while
        // normalizing the kernel is not a caller mistake.
        built.map_err(|e| match CliError::from(e) {
            CliError::Input(msg) => CliError::Input(format!("kernel: {msg}")),
            CliError::Numeric(msg) => CliError::Numeric(format!("kernel: {msg}")),
        })
    }

    fn expect_params(&self, allowed: &[&str]) -> CliResult<()> {
        for k in self.params.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(CliError::input(format!(
                    "kernel family {} does not take parameter {k} (takes: {})",
                    self.family,
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    /// Copy with one swept parameter replaced. Kernel parameters are set
    /// blindly here; the per-family check in [`Self::kernel`] rejects names
    /// the family does not take.
    pub fn with_param(&self, name: &str, value: f64) -> CliResult<RunConfig> {
        let mut next = self.clone();
        match name {
            "alpha" => next.alpha = value,
            "gamma" => next.gamma = value,
            "xi" => {
                if !(0.0..=1.0).contains(&value) {
                    return Err(CliError::input(format!(
                        "swept xi leaves [0, 1] at {value}"
                    )));
                }
                next.xi = value;
            }
            "rho" => {
                if !(value < 1.0) {
                    return Err(CliError::input(format!("swept rho reaches {value} >= 1")));
                }
                next.rho = value;
            }
            _ => {
                next.params.insert(name.to_string(), value);
            }
        }
        Ok(next)
    }
}

fn parse_kernel_flag(s: &str) -> CliResult<(String, BTreeMap<String, f64>, Option<PathBuf>)> {
    let (family, rest) = match s.split_once(':') {
        Some((f, r)) => (f, r),
        None => (s, ""),
    };
    let mut params = BTreeMap::new();
    let mut path = None;
    for piece in rest.split(',').filter(|p| !p.is_empty()) {
        let Some((k, v)) = piece.split_once('=') else {
            return Err(CliError::input(format!(
                "kernel parameter {piece:?}: expected key=value"
            )));
        };
        if k == "file" {
            path = Some(PathBuf::from(v));
        } else {
            let num: f64 = v.parse().map_err(|_| {
                CliError::input(format!("kernel parameter {k}: not a number: {v:?}"))
            })?;
            params.insert(k.to_string(), num);
        }
    }
    Ok((family.to_string(), params, path))
}

fn kernel_from_file(file: &FileConfig) -> CliResult<(String, BTreeMap<String, f64>, Option<PathBuf>)> {
    let family = file
        .get("kernel.family")
        .ok_or_else(|| CliError::input("kernel is required (--kernel or kernel.family)"))?
        .to_string();
    let mut params = BTreeMap::new();
    for key in ["a", "b", "c", "p"] {
        if let Some(v) = file.get_f64(&format!("kernel.{key}"))? {
            params.insert(key.to_string(), v);
        }
    }
    let path = file.get("kernel.file").map(PathBuf::from);
    Ok((family, params, path))
}

/// Two numeric columns per line (whitespace or comma separated), `#`
/// comments allowed: abscissa in [0, 1], kernel value.
fn load_table(path: &Path) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::input(format!("cannot read samples {}: {e}", path.display()))
    })?;
    let mut ts = Vec::new();
    let mut vals = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split(|ch: char| ch == ',' || ch.is_whitespace()).filter(|c| !c.is_empty());
        let bad = || {
            CliError::input(format!(
                "samples {}:{}: expected two numbers, got {raw:?}",
                path.display(),
                lineno + 1
            ))
        };
        let t: f64 = cols.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let v: f64 = cols.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if cols.next().is_some() {
            return Err(bad());
        }
        ts.push(t);
        vals.push(v);
    }
    Ok((ts, vals))
}

//! Run configuration: a flat `section.key = value` text format, its parser,
//! load-time validation, and the builders that turn a parsed configuration
//! into core objects (grid, exponent field, initial datum).
//!
//! Every failure in this module is a configuration error: the caller maps it
//! to the "malformed input" exit code. Semantic assumption violations (an
//! exponent dipping below 1, a missing regularization) surface later, when
//! the exponent field and step parameters are constructed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ptxlap::exponent::ExponentSpec;
use ptxlap::initial;
use ptxlap::mesh::MAX_DIM;
use ptxlap::norms::lp_norm;
use ptxlap::{Error, ExponentField, Grid, GridField, RExp, SpaceTimeBox, StepParams};

/// A configuration problem: unreadable file, syntax error, unknown or
/// duplicate key, missing required key, or an inconsistent combination.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type CResult<T> = std::result::Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> CResult<T> {
    Err(ConfigError(msg.into()))
}

/// Values set on the command line that override their config-file
/// counterparts.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
}

// ---------------------------------------------------------------------------
// Raw key-value layer
// ---------------------------------------------------------------------------

/// Parsed `section.key = value` lines with duplicate detection and
/// consumed-key tracking, so that leftover keys can be reported as unknown.
struct Reader {
    entries: BTreeMap<String, (String, usize)>,
    used: BTreeSet<String>,
}

impl Reader {
    fn parse(text: &str) -> CResult<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some(eq) = line.find('=') else {
                return err(format!("line {line_no}: expected `section.key = value`"));
            };
            let key = line[..eq].trim();
            let value = line[eq + 1..].trim();
            if key.is_empty() {
                return err(format!("line {line_no}: empty key"));
            }
            let dots = key.chars().filter(|c| *c == '.').count();
            if dots != 1 || key.starts_with('.') || key.ends_with('.') {
                return err(format!("line {line_no}: key {key:?} must have the form section.name"));
            }
            if !key.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '.') {
                return err(format!("line {line_no}: key {key:?} has characters outside [a-z0-9_.]"));
            }
            if let Some((_, first)) = entries.insert(key.to_string(), (value.to_string(), line_no)) {
                return err(format!("line {line_no}: duplicate key {key:?} (first set on line {first})"));
            }
        }
        Ok(Reader { entries, used: BTreeSet::new() })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        match self.entries.get(key) {
            Some((value, _)) => {
                self.used.insert(key.to_string());
                Some(value.clone())
            }
            None => None,
        }
    }

    fn require(&mut self, key: &str) -> CResult<String> {
        self.take(key).ok_or_else(|| ConfigError(format!("missing required key {key:?}")))
    }

    fn has_section(&self, section: &str) -> bool {
        let prefix = format!("{section}.");
        self.entries.keys().any(|k| k.starts_with(&prefix))
    }

    /// Errors if any key was never consumed.
    fn finish(self) -> CResult<()> {
        for (key, (_, line_no)) in &self.entries {
            if !self.used.contains(key) {
                return err(format!("line {line_no}: unknown key {key:?}"));
            }
        }
        Ok(())
    }
}

// Typed parse helpers. All attach the key name to the message.

fn parse_f64(key: &str, s: &str) -> CResult<f64> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => err(format!("{key}: expected a finite number, got {s:?}")),
    }
}

fn parse_usize(key: &str, s: &str) -> CResult<usize> {
    s.parse::<usize>().map_err(|_| ConfigError(format!("{key}: expected a non-negative integer, got {s:?}")))
}

fn parse_u64(key: &str, s: &str) -> CResult<u64> {
    s.parse::<u64>().map_err(|_| ConfigError(format!("{key}: expected a non-negative integer, got {s:?}")))
}

fn parse_bool(key: &str, s: &str) -> CResult<bool> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => err(format!("{key}: expected true or false, got {s:?}")),
    }
}

fn parse_pair(key: &str, s: &str) -> CResult<[f64; 2]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return err(format!("{key}: expected two comma-separated numbers, got {s:?}"));
    }
    Ok([parse_f64(key, parts[0])?, parse_f64(key, parts[1])?])
}

fn parse_f64_list(key: &str, s: &str) -> CResult<Vec<f64>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|p| parse_f64(key, p.trim())).collect()
}

fn parse_rexp(key: &str, s: &str) -> CResult<RExp<f64>> {
    RExp::parse(s).map_err(|e| ConfigError(format!("{key}: {e}")))
}

fn parse_rexp_list(key: &str, s: &str) -> CResult<Vec<RExp<f64>>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|p| parse_rexp(key, p.trim())).collect()
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    let mut out = String::new();
    for (i, v) in items.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{v}");
    }
    out
}

// ---------------------------------------------------------------------------
// Typed configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct GridBlock {
    pub dim: usize,
    pub cells: Vec<usize>,
    pub extents: Vec<[f64; 2]>,
    pub components: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExponentKind {
    Constant { value: f64 },
    Affine { intercept: f64, slope: [f64; MAX_DIM] },
    Sinusoid { base: f64, amplitude: f64, freq_t: f64, freq_x: [f64; MAX_DIM], phase: f64 },
    Table { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentBlock {
    pub kind: ExponentKind,
    pub floor_at_two: bool,
    pub resolution: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialKind {
    Sine,
    Spike { center: Option<Vec<f64>>, width: Option<f64>, normalize_r0: RExp<f64> },
    Random { seed: u64, normalize_r0: Option<RExp<f64>> },
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamsBlock {
    pub mu: f64,
    pub nu: f64,
    pub tau: f64,
    pub horizon: f64,
    pub inner_tol: f64,
    pub max_inner_iters: usize,
    pub dense: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputBlock {
    pub snapshots: Vec<f64>,
    pub norms: Vec<RExp<f64>>,
    /// Resolved output directory; `--out` wins over `output.dir`. Not part of
    /// the canonical text, so artifacts are byte-identical wherever they land.
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsBlock {
    pub r0: RExp<f64>,
    pub r_list: Vec<RExp<f64>>,
    pub contraction_tol: f64,
    pub ledger: bool,
    pub ledger_tol: f64,
    pub max_principle_slack: f64,
    pub continuity_window: Option<f64>,
    pub continuity_tol: f64,
    pub fit_window: [f64; 2],
    pub log_holder_pairs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdjointBlock {
    pub epsilons: Vec<f64>,
    pub probes: usize,
    pub seed: u64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridBlock,
    pub exponent: ExponentBlock,
    pub initial: InitialKind,
    pub params: ParamsBlock,
    pub output: OutputBlock,
    pub diagnostics: DiagnosticsBlock,
    pub ladder: Option<Vec<(f64, f64)>>,
    pub adjoint: Option<AdjointBlock>,
}

impl RunConfig {
    /// Reads and validates a configuration file. Relative paths inside the
    /// file resolve against the file's directory.
    pub fn load(path: &Path, overrides: &Overrides) -> CResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_text(&text, base, overrides)
    }

    /// Parses configuration text. `base` anchors relative paths.
    pub fn from_text(text: &str, base: &Path, overrides: &Overrides) -> CResult<Self> {
        let mut r = Reader::parse(text)?;

        let resolve = |raw: &str| -> PathBuf {
            let p = Path::new(raw);
            if p.is_absolute() { p.to_path_buf() } else { base.join(p) }
        };

        // grid
        let dim = parse_usize("grid.dim", &r.require("grid.dim")?)?;
        if dim == 0 || dim > MAX_DIM {
            return err(format!("grid.dim: must be 1 or 2, got {dim}"));
        }
        let cells_raw = r.require("grid.cells")?;
        let cells: Vec<usize> = cells_raw
            .split(',')
            .map(|p| parse_usize("grid.cells", p.trim()))
            .collect::<CResult<_>>()?;
        if cells.len() != dim {
            return err(format!("grid.cells: expected {dim} counts, got {}", cells.len()));
        }
        if cells.iter().any(|&c| c < 2) {
            return err("grid.cells: each axis needs at least 2 cells");
        }
        let mut extents = Vec::with_capacity(dim);
        let ext1 = r.take("grid.extent_x1").unwrap_or_else(|| "0,1".to_string());
        extents.push(parse_pair("grid.extent_x1", &ext1)?);
        match r.take("grid.extent_x2") {
            Some(v) if dim == 2 => extents.push(parse_pair("grid.extent_x2", &v)?),
            Some(_) => return err("grid.extent_x2: only meaningful when grid.dim = 2"),
            None if dim == 2 => extents.push([0.0, 1.0]),
            None => {}
        }
        for (axis, e) in extents.iter().enumerate() {
            if e[1] <= e[0] {
                return err(format!("grid.extent_x{}: interval must have positive length", axis + 1));
            }
        }
        let components = match r.take("grid.components") {
            Some(v) => parse_usize("grid.components", &v)?,
            None => 1,
        };
        if components == 0 {
            return err("grid.components: must be at least 1");
        }
        let grid = GridBlock { dim, cells, extents, components };

        // exponent
        let kind_raw = r.require("exponent.kind")?;
        let kind = match kind_raw.as_str() {
            "constant" => {
                ExponentKind::Constant { value: parse_f64("exponent.value", &r.require("exponent.value")?)? }
            }
            "affine" => {
                let intercept = parse_f64("exponent.intercept", &r.require("exponent.intercept")?)?;
                let mut slope = [0.0; MAX_DIM];
                if let Some(v) = r.take("exponent.slope_x1") {
                    slope[0] = parse_f64("exponent.slope_x1", &v)?;
                }
                match r.take("exponent.slope_x2") {
                    Some(v) if dim == 2 => slope[1] = parse_f64("exponent.slope_x2", &v)?,
                    Some(_) => return err("exponent.slope_x2: only meaningful when grid.dim = 2"),
                    None => {}
                }
                ExponentKind::Affine { intercept, slope }
            }
            "sinusoid" => {
                let base_v = parse_f64("exponent.base", &r.require("exponent.base")?)?;
                let amplitude = parse_f64("exponent.amplitude", &r.require("exponent.amplitude")?)?;
                let freq_t = match r.take("exponent.freq_t") {
                    Some(v) => parse_f64("exponent.freq_t", &v)?,
                    None => 0.0,
                };
                let mut freq_x = [0.0; MAX_DIM];
                if let Some(v) = r.take("exponent.freq_x1") {
                    freq_x[0] = parse_f64("exponent.freq_x1", &v)?;
                }
                match r.take("exponent.freq_x2") {
                    Some(v) if dim == 2 => freq_x[1] = parse_f64("exponent.freq_x2", &v)?,
                    Some(_) => return err("exponent.freq_x2: only meaningful when grid.dim = 2"),
                    None => {}
                }
                let phase = match r.take("exponent.phase") {
                    Some(v) => parse_f64("exponent.phase", &v)?,
                    None => 0.0,
                };
                ExponentKind::Sinusoid { base: base_v, amplitude, freq_t, freq_x, phase }
            }
            "table" => ExponentKind::Table { path: resolve(&r.require("exponent.table")?) },
            other => return err(format!("exponent.kind: unknown kind {other:?}")),
        };
        let floor_at_two = match r.take("exponent.floor_at_two") {
            Some(v) => parse_bool("exponent.floor_at_two", &v)?,
            None => false,
        };
        let resolution = match r.take("exponent.resolution") {
            Some(v) => parse_usize("exponent.resolution", &v)?,
            None => 64,
        };
        if resolution < 2 {
            return err("exponent.resolution: must be at least 2");
        }
        let exponent = ExponentBlock { kind, floor_at_two, resolution };

        // diagnostics (read before initial: the spike default norm is r0)
        let r0 = match r.take("diagnostics.r0") {
            Some(v) => parse_rexp("diagnostics.r0", &v)?,
            None => RExp::Finite(2.0),
        };
        let r_list = match r.take("diagnostics.r_list") {
            Some(v) => parse_rexp_list("diagnostics.r_list", &v)?,
            None => Vec::new(),
        };
        let contraction_tol = match r.take("diagnostics.contraction_tol") {
            Some(v) => parse_f64("diagnostics.contraction_tol", &v)?,
            None => 1e-8,
        };
        let ledger = match r.take("diagnostics.ledger") {
            Some(v) => parse_bool("diagnostics.ledger", &v)?,
            None => false,
        };
        let ledger_tol = match r.take("diagnostics.ledger_tol") {
            Some(v) => parse_f64("diagnostics.ledger_tol", &v)?,
            None => 1e-6,
        };
        let max_principle_slack = match r.take("diagnostics.max_principle_slack") {
            Some(v) => parse_f64("diagnostics.max_principle_slack", &v)?,
            None => 1e-8,
        };
        let continuity_window = match r.take("diagnostics.continuity_window") {
            Some(v) => Some(parse_f64("diagnostics.continuity_window", &v)?),
            None => None,
        };
        let continuity_tol = match r.take("diagnostics.continuity_tol") {
            Some(v) => parse_f64("diagnostics.continuity_tol", &v)?,
            None => 0.5,
        };
        if contraction_tol <= 0.0 || ledger_tol <= 0.0 || max_principle_slack <= 0.0 || continuity_tol <= 0.0 {
            return err("diagnostics tolerances must be positive");
        }
        let log_holder_pairs = match r.take("diagnostics.log_holder_pairs") {
            Some(v) => parse_usize("diagnostics.log_holder_pairs", &v)?,
            None => 2000,
        };

        // initial
        let init_kind = r.require("initial.kind")?;
        let initial = match init_kind.as_str() {
            "sine" => InitialKind::Sine,
            "spike" => {
                let width = match r.take("initial.width") {
                    Some(v) => Some(parse_f64("initial.width", &v)?),
                    None => None,
                };
                let mut center: Option<Vec<f64>> = None;
                if let Some(v) = r.take("initial.center_x1") {
                    let mut c = vec![parse_f64("initial.center_x1", &v)?];
                    match r.take("initial.center_x2") {
                        Some(v2) if dim == 2 => c.push(parse_f64("initial.center_x2", &v2)?),
                        Some(_) => return err("initial.center_x2: only meaningful when grid.dim = 2"),
                        None if dim == 2 => return err("initial.center_x2: required when center_x1 is set on a 2-d grid"),
                        None => {}
                    }
                    center = Some(c);
                } else if r.take("initial.center_x2").is_some() {
                    return err("initial.center_x2: set initial.center_x1 as well");
                }
                let normalize_r0 = match r.take("initial.normalize_r0") {
                    Some(v) => parse_rexp("initial.normalize_r0", &v)?,
                    None => r0,
                };
                InitialKind::Spike { center, width, normalize_r0 }
            }
            "random" => {
                let seed = match r.take("initial.seed") {
                    Some(v) => parse_u64("initial.seed", &v)?,
                    None => 0,
                };
                let seed = overrides.seed.unwrap_or(seed);
                let normalize_r0 = match r.take("initial.normalize_r0") {
                    Some(v) => Some(parse_rexp("initial.normalize_r0", &v)?),
                    None => None,
                };
                InitialKind::Random { seed, normalize_r0 }
            }
            "file" => InitialKind::File { path: resolve(&r.require("initial.path")?) },
            other => return err(format!("initial.kind: unknown kind {other:?}")),
        };

        // params
        let mu = match r.take("params.mu") {
            Some(v) => parse_f64("params.mu", &v)?,
            None => 0.0,
        };
        let nu = match r.take("params.nu") {
            Some(v) => parse_f64("params.nu", &v)?,
            None => 0.0,
        };
        let tau = parse_f64("params.tau", &r.require("params.tau")?)?;
        let horizon = parse_f64("params.horizon", &r.require("params.horizon")?)?;
        if tau <= 0.0 {
            return err("params.tau: must be positive");
        }
        if horizon < tau {
            return err("params.horizon: must be at least params.tau");
        }
        let inner_tol = match r.take("params.inner_tol") {
            Some(v) => parse_f64("params.inner_tol", &v)?,
            None => 1e-10,
        };
        if inner_tol <= 0.0 {
            return err("params.inner_tol: must be positive");
        }
        let max_inner_iters = match r.take("params.max_inner_iters") {
            Some(v) => parse_usize("params.max_inner_iters", &v)?,
            None => 500,
        };
        if max_inner_iters == 0 {
            return err("params.max_inner_iters: must be at least 1");
        }
        let dense = match r.take("params.dense") {
            Some(v) => parse_bool("params.dense", &v)?,
            None => false,
        };
        let params = ParamsBlock { mu, nu, tau, horizon, inner_tol, max_inner_iters, dense };

        // output
        let snapshots = match r.take("output.snapshots") {
            Some(v) => parse_f64_list("output.snapshots", &v)?,
            None => Vec::new(),
        };
        if snapshots.iter().any(|&t| t < 0.0 || t > horizon) {
            return err("output.snapshots: times must lie in [0, params.horizon]");
        }
        let norms = match r.take("output.norms") {
            Some(v) => {
                let list = parse_rexp_list("output.norms", &v)?;
                if list.is_empty() {
                    return err("output.norms: list must not be empty");
                }
                list
            }
            None => vec![RExp::Finite(2.0), RExp::Inf],
        };
        let dir = match &overrides.out_dir {
            Some(d) => d.clone(),
            None => match r.take("output.dir") {
                Some(v) => PathBuf::from(v),
                None => PathBuf::from("out"),
            },
        };
        if overrides.out_dir.is_some() {
            // Mark the key consumed even when the flag wins.
            let _ = r.take("output.dir");
        }
        let output = OutputBlock { snapshots, norms, dir };

        // diagnostics continued: the fit window defaults to the trailing two
        // decades of the run once the horizon is known.
        let fit_window = match r.take("diagnostics.fit_window") {
            Some(v) => parse_pair("diagnostics.fit_window", &v)?,
            None => [horizon / 100.0, horizon],
        };
        if !(fit_window[0] > 0.0 && fit_window[0] < fit_window[1] && fit_window[1] <= horizon) {
            return err("diagnostics.fit_window: need 0 < start < end <= params.horizon");
        }
        let diagnostics = DiagnosticsBlock {
            r0,
            r_list,
            contraction_tol,
            ledger,
            ledger_tol,
            max_principle_slack,
            continuity_window,
            continuity_tol,
            fit_window,
            log_holder_pairs,
        };

        // ladder
        let ladder = match r.take("ladder.rungs") {
            Some(v) => {
                let mut rungs = Vec::new();
                for part in v.split(',') {
                    let part = part.trim();
                    let Some((m, n)) = part.split_once(':') else {
                        return err(format!("ladder.rungs: expected mu:nu, got {part:?}"));
                    };
                    rungs.push((parse_f64("ladder.rungs", m.trim())?, parse_f64("ladder.rungs", n.trim())?));
                }
                if rungs.len() < 2 {
                    return err("ladder.rungs: need at least two rungs");
                }
                for w in rungs.windows(2) {
                    let (m0, n0) = w[0];
                    let (m1, n1) = w[1];
                    if m1 > m0 || n1 > n0 || (m1 == m0 && n1 == n0) {
                        return err("ladder.rungs: rungs must decrease, with mu and nu each nonincreasing");
                    }
                }
                Some(rungs)
            }
            None => None,
        };

        // adjoint
        let adjoint = if r.has_section("adjoint") {
            let epsilons = parse_f64_list("adjoint.epsilons", &r.require("adjoint.epsilons")?)?;
            if epsilons.is_empty() {
                return err("adjoint.epsilons: list must not be empty");
            }
            if epsilons.iter().any(|&e| e < 0.0) {
                return err("adjoint.epsilons: values must be nonnegative");
            }
            let probes = match r.take("adjoint.probes") {
                Some(v) => parse_usize("adjoint.probes", &v)?,
                None => 8,
            };
            if probes == 0 {
                return err("adjoint.probes: must be at least 1");
            }
            let seed = match r.take("adjoint.seed") {
                Some(v) => parse_u64("adjoint.seed", &v)?,
                None => 0,
            };
            let seed = overrides.seed.unwrap_or(seed);
            let t = match r.take("adjoint.t") {
                Some(v) => parse_f64("adjoint.t", &v)?,
                None => horizon,
            };
            if !(t > 0.0 && t <= horizon) {
                return err("adjoint.t: must lie in (0, params.horizon]");
            }
            Some(AdjointBlock { epsilons, probes, seed, t })
        } else {
            None
        };

        r.finish()?;

        let cfg = RunConfig { grid, exponent, initial, params, output, diagnostics, ladder, adjoint };
        cfg.check_consistency()?;
        Ok(cfg)
    }

    fn check_consistency(&self) -> CResult<()> {
        if (self.adjoint.is_some() || self.diagnostics.ledger) && !self.params.dense {
            return err("params.dense = true is required when the adjoint block or diagnostics.ledger is set");
        }
        if self.ladder.is_some() && self.adjoint.is_some() {
            return err("ladder and adjoint blocks cannot be combined in one run");
        }
        if self.diagnostics.ledger {
            match self.diagnostics.r0 {
                RExp::Finite(v) if v >= 2.0 => {}
                _ => return err("diagnostics.ledger needs a finite diagnostics.r0 of at least 2"),
            }
        }
        Ok(())
    }

    /// Regenerates the configuration as deterministic text: fixed block
    /// order, every default materialized, shortest round-trip number format.
    /// Parsing the result yields an equal configuration. The output
    /// directory is deliberately omitted; it does not affect any computed
    /// value.
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        let g = &self.grid;
        let _ = writeln!(s, "grid.dim = {}", g.dim);
        let _ = writeln!(s, "grid.cells = {}", join(&g.cells));
        for (axis, e) in g.extents.iter().enumerate() {
            let _ = writeln!(s, "grid.extent_x{} = {},{}", axis + 1, e[0], e[1]);
        }
        let _ = writeln!(s, "grid.components = {}", g.components);

        match &self.exponent.kind {
            ExponentKind::Constant { value } => {
                let _ = writeln!(s, "exponent.kind = constant");
                let _ = writeln!(s, "exponent.value = {value}");
            }
            ExponentKind::Affine { intercept, slope } => {
                let _ = writeln!(s, "exponent.kind = affine");
                let _ = writeln!(s, "exponent.intercept = {intercept}");
                let _ = writeln!(s, "exponent.slope_x1 = {}", slope[0]);
                if g.dim == 2 {
                    let _ = writeln!(s, "exponent.slope_x2 = {}", slope[1]);
                }
            }
            ExponentKind::Sinusoid { base, amplitude, freq_t, freq_x, phase } => {
                let _ = writeln!(s, "exponent.kind = sinusoid");
                let _ = writeln!(s, "exponent.base = {base}");
                let _ = writeln!(s, "exponent.amplitude = {amplitude}");
                let _ = writeln!(s, "exponent.freq_t = {freq_t}");
                let _ = writeln!(s, "exponent.freq_x1 = {}", freq_x[0]);
                if g.dim == 2 {
                    let _ = writeln!(s, "exponent.freq_x2 = {}", freq_x[1]);
                }
                let _ = writeln!(s, "exponent.phase = {phase}");
            }
            ExponentKind::Table { path } => {
                let _ = writeln!(s, "exponent.kind = table");
                let _ = writeln!(s, "exponent.table = {}", path.display());
            }
        }
        let _ = writeln!(s, "exponent.floor_at_two = {}", self.exponent.floor_at_two);
        let _ = writeln!(s, "exponent.resolution = {}", self.exponent.resolution);

        match &self.initial {
            InitialKind::Sine => {
                let _ = writeln!(s, "initial.kind = sine");
            }
            InitialKind::Spike { center, width, normalize_r0 } => {
                let _ = writeln!(s, "initial.kind = spike");
                if let Some(c) = center {
                    let _ = writeln!(s, "initial.center_x1 = {}", c[0]);
                    if g.dim == 2 {
                        let _ = writeln!(s, "initial.center_x2 = {}", c[1]);
                    }
                }
                if let Some(w) = width {
                    let _ = writeln!(s, "initial.width = {w}");
                }
                let _ = writeln!(s, "initial.normalize_r0 = {normalize_r0}");
            }
            InitialKind::Random { seed, normalize_r0 } => {
                let _ = writeln!(s, "initial.kind = random");
                let _ = writeln!(s, "initial.seed = {seed}");
                if let Some(r0) = normalize_r0 {
                    let _ = writeln!(s, "initial.normalize_r0 = {r0}");
                }
            }
            InitialKind::File { path } => {
                let _ = writeln!(s, "initial.kind = file");
                let _ = writeln!(s, "initial.path = {}", path.display());
            }
        }

        let p = &self.params;
        let _ = writeln!(s, "params.mu = {}", p.mu);
        let _ = writeln!(s, "params.nu = {}", p.nu);
        let _ = writeln!(s, "params.tau = {}", p.tau);
        let _ = writeln!(s, "params.horizon = {}", p.horizon);
        let _ = writeln!(s, "params.inner_tol = {}", p.inner_tol);
        let _ = writeln!(s, "params.max_inner_iters = {}", p.max_inner_iters);
        let _ = writeln!(s, "params.dense = {}", p.dense);

        if !self.output.snapshots.is_empty() {
            let _ = writeln!(s, "output.snapshots = {}", join(&self.output.snapshots));
        }
        let _ = writeln!(s, "output.norms = {}", join(&self.output.norms));

        let d = &self.diagnostics;
        let _ = writeln!(s, "diagnostics.r0 = {}", d.r0);
        if !d.r_list.is_empty() {
            let _ = writeln!(s, "diagnostics.r_list = {}", join(&d.r_list));
        }
        let _ = writeln!(s, "diagnostics.contraction_tol = {}", d.contraction_tol);
        let _ = writeln!(s, "diagnostics.ledger = {}", d.ledger);
        let _ = writeln!(s, "diagnostics.ledger_tol = {}", d.ledger_tol);
        let _ = writeln!(s, "diagnostics.max_principle_slack = {}", d.max_principle_slack);
        if let Some(w) = d.continuity_window {
            let _ = writeln!(s, "diagnostics.continuity_window = {w}");
        }
        let _ = writeln!(s, "diagnostics.continuity_tol = {}", d.continuity_tol);
        let _ = writeln!(s, "diagnostics.fit_window = {},{}", d.fit_window[0], d.fit_window[1]);
        let _ = writeln!(s, "diagnostics.log_holder_pairs = {}", d.log_holder_pairs);

        if let Some(rungs) = &self.ladder {
            let parts: Vec<String> = rungs.iter().map(|(m, n)| format!("{m}:{n}")).collect();
            let _ = writeln!(s, "ladder.rungs = {}", parts.join(","));
        }
        if let Some(a) = &self.adjoint {
            let _ = writeln!(s, "adjoint.epsilons = {}", join(&a.epsilons));
            let _ = writeln!(s, "adjoint.probes = {}", a.probes);
            let _ = writeln!(s, "adjoint.seed = {}", a.seed);
            let _ = writeln!(s, "adjoint.t = {}", a.t);
        }
        s
    }

    // -- builders ----------------------------------------------------------

    pub fn build_grid(&self) -> ptxlap::Result<Grid<f64>> {
        Grid::new(&self.grid.extents, &self.grid.cells, self.grid.components)
    }

    /// The space-time box covered by this run: `[0, horizon]` in time, the
    /// grid extents in space.
    pub fn domain(&self) -> ptxlap::Result<SpaceTimeBox<f64>> {
        SpaceTimeBox::new([0.0, self.params.horizon], &self.grid.extents)
    }

    pub fn build_exponent(&self) -> ptxlap::Result<ExponentField<f64>> {
        let spec = match &self.exponent.kind {
            ExponentKind::Constant { value } => ExponentSpec::Constant(*value),
            ExponentKind::Affine { intercept, slope } => {
                ExponentSpec::Affine { intercept: *intercept, slope: *slope }
            }
            ExponentKind::Sinusoid { base, amplitude, freq_t, freq_x, phase } => ExponentSpec::Sinusoid {
                base: *base,
                amplitude: *amplitude,
                freq_t: *freq_t,
                freq_x: *freq_x,
                phase: *phase,
            },
            ExponentKind::Table { path } => {
                let file = fs::File::open(path)
                    .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
                let table = ptxlap::io::read_exponent_table_csv(file, self.grid.dim)?;
                ExponentSpec::Table(table)
            }
        };
        let spec = if self.exponent.floor_at_two {
            ExponentSpec::FlooredAtTwo(Box::new(spec))
        } else {
            spec
        };
        ExponentField::new(spec, self.domain()?, self.exponent.resolution)
    }

    pub fn build_initial(&self, grid: &Grid<f64>) -> ptxlap::Result<GridField<f64>> {
        match &self.initial {
            InitialKind::Sine => Ok(initial::sine_datum(grid)),
            InitialKind::Spike { center, width, normalize_r0 } => {
                let center = center.as_ref().map(|c| {
                    let mut arr = [0.0; MAX_DIM];
                    arr[..c.len()].copy_from_slice(c);
                    arr
                });
                initial::spike_datum(grid, center, *width, *normalize_r0)
            }
            InitialKind::Random { seed, normalize_r0 } => {
                let mut f = initial::random_datum(grid, *seed);
                if let Some(r0) = normalize_r0 {
                    let norm = lp_norm(grid, &f, *r0)?;
                    if norm == 0.0 {
                        return Err(Error::InvalidArgument(
                            "random datum vanished; cannot normalize".into(),
                        ));
                    }
                    for v in &mut f.data {
                        *v /= norm;
                    }
                }
                Ok(f)
            }
            InitialKind::File { path } => {
                let file = fs::File::open(path)
                    .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
                ptxlap::io::read_field_csv(file, grid)
            }
        }
    }

    pub fn step_params(&self) -> StepParams<f64> {
        StepParams {
            mu: self.params.mu,
            nu: self.params.nu,
            tau: self.params.tau,
            inner_tol: self.params.inner_tol,
            max_inner_iters: self.params.max_inner_iters,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
grid.dim = 1
grid.cells = 64
exponent.kind = constant
exponent.value = 2.5
initial.kind = sine
params.tau = 0.001
params.horizon = 0.05
";

    fn load(text: &str) -> CResult<RunConfig> {
        RunConfig::from_text(text, Path::new("/tmp"), &Overrides::default())
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = load(MINIMAL).unwrap();
        assert_eq!(cfg.grid.cells, vec![64]);
        assert_eq!(cfg.grid.components, 1);
        assert_eq!(cfg.params.inner_tol, 1e-10);
        assert_eq!(cfg.output.norms, vec![RExp::Finite(2.0), RExp::Inf]);
        assert_eq!(cfg.diagnostics.r0, RExp::Finite(2.0));
        assert!(cfg.ladder.is_none());
        assert!(cfg.adjoint.is_none());
    }

    #[test]
    fn canonical_text_round_trips() {
        let text = format!(
            "{MINIMAL}params.mu = 0.1\nparams.nu = 0.001\noutput.snapshots = 0.01,0.05\n\
             diagnostics.r_list = 2,4,inf\nladder.rungs = 0.1:0.1,0.01:0.01\n",
        );
        let cfg = load(&text).unwrap();
        let canon = cfg.canonical_text();
        let back = load(&canon).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(canon, back.canonical_text());
    }

    #[test]
    fn unknown_and_duplicate_keys_are_rejected() {
        let with_unknown = format!("{MINIMAL}params.theta = 1\n");
        let e = load(&with_unknown).unwrap_err();
        assert!(e.0.contains("unknown key"), "{}", e.0);
        assert!(e.0.contains("params.theta"), "{}", e.0);

        let with_dup = format!("{MINIMAL}params.tau = 0.01\n");
        let e = load(&with_dup).unwrap_err();
        assert!(e.0.contains("duplicate"), "{}", e.0);
    }

    #[test]
    fn syntax_errors_name_the_line() {
        let e = load("grid.dim 1\n").unwrap_err();
        assert!(e.0.contains("line 1"), "{}", e.0);
        let e = load("# fine\nnodots = 3\n").unwrap_err();
        assert!(e.0.contains("line 2"), "{}", e.0);
    }

    #[test]
    fn dense_storage_is_required_for_ledger_and_adjoint() {
        let ledger = format!("{MINIMAL}diagnostics.ledger = true\n");
        assert!(load(&ledger).unwrap_err().0.contains("dense"));

        let adjoint = format!("{MINIMAL}adjoint.epsilons = 0.01\n");
        assert!(load(&adjoint).unwrap_err().0.contains("dense"));

        let ok = format!("{MINIMAL}diagnostics.ledger = true\nparams.dense = true\n");
        assert!(load(&ok).is_ok());
    }

    #[test]
    fn seed_override_wins_over_config() {
        let text = format!("{MINIMAL}initial.seed = 7\n").replace("initial.kind = sine", "initial.kind = random");
        let plain = RunConfig::from_text(&text, Path::new("/tmp"), &Overrides::default()).unwrap();
        let forced = RunConfig::from_text(
            &text,
            Path::new("/tmp"),
            &Overrides { out_dir: None, seed: Some(99) },
        )
        .unwrap();
        assert_eq!(plain.initial, InitialKind::Random { seed: 7, normalize_r0: None });
        assert_eq!(forced.initial, InitialKind::Random { seed: 99, normalize_r0: None });
    }

    #[test]
    fn ladder_rungs_must_decrease() {
        let bad = format!("{MINIMAL}ladder.rungs = 0.01:0.01,0.1:0.1\n");
        assert!(load(&bad).unwrap_err().0.contains("decrease"));
        let flat = format!("{MINIMAL}ladder.rungs = 0.1:0.1,0.1:0.1\n");
        assert!(load(&flat).unwrap_err().0.contains("decrease"));
    }

    #[test]
    fn two_dimensional_keys_need_a_two_dimensional_grid() {
        let e = load(&format!("{MINIMAL}grid.extent_x2 = 0,1\n")).unwrap_err();
        assert!(e.0.contains("extent_x2"), "{}", e.0);

        let text = MINIMAL
            .replace("grid.dim = 1", "grid.dim = 2")
            .replace("grid.cells = 64", "grid.cells = 8,8");
        let cfg = load(&text).unwrap();
        assert_eq!(cfg.grid.extents.len(), 2);
    }
}

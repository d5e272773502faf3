//! Run configuration: a flat, human-diffable sectioned key=value format.
//!
//! Sections and keys are closed sets; unknown or duplicated entries are
//! parse errors carrying the `[section] key` path, so experiment definitions
//! stay reviewable. Example:
//!
//! ```text
//! [run]
//! mode = sweep
//! seed = 42
//!
//! [grid]
//! dim = 1
//! points = 241
//! radius = 6.0
//!
//! [operator1]
//! spec = pucci-plus lambda=1 Lambda=2
//!
//! [operator2]
//! spec = pucci-minus lambda=1 Lambda=2
//!
//! [coupling]
//! p_min = 1.5
//! p_max = 4.5
//! p_steps = 4
//! q_min = 1.5
//! q_max = 4.5
//! q_steps = 4
//!
//! [initial]
//! kind = gaussian
//! amplitude = 5.0
//! width = 1.0
//! ```

use crate::{HarnessError, Result};
use fnparab::evolve::StepControl;
use fnparab::grid::Grid;
use fnparab::operators::{EllipticOperator, SymMatrix};
use fnparab::selfsim::PowerOpts;
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

fn err(path: &str, msg: impl fmt::Display) -> HarnessError {
    HarnessError::Config(format!("{path}: {msg}"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Evolve,
    Eigen,
    Certify,
    Sweep,
    Selfcheck,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Evolve => "evolve",
            Mode::Eigen => "eigen",
            Mode::Certify => "certify",
            Mode::Sweep => "sweep",
            Mode::Selfcheck => "selfcheck",
        }
    }
}

impl FromStr for Mode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "evolve" => Ok(Mode::Evolve),
            "eigen" => Ok(Mode::Eigen),
            "certify" => Ok(Mode::Certify),
            "sweep" => Ok(Mode::Sweep),
            "selfcheck" => Ok(Mode::Selfcheck),
            other => Err(HarnessError::Config(format!(
                "unknown mode '{other}' (expected evolve|eigen|certify|sweep|selfcheck)"
            ))),
        }
    }
}

/// Inclusive range sampled at evenly spaced points; steps = 1 means just min.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRange {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl SweepRange {
    pub fn values(&self) -> Vec<f64> {
        if self.steps <= 1 {
            return vec![self.min];
        }
        let span = self.max - self.min;
        (0..self.steps)
            .map(|i| self.min + span * i as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CouplingSpec {
    Fixed { p: f64, q: f64 },
    Ranges { p: SweepRange, q: SweepRange },
}

impl CouplingSpec {
    /// Fixed exponents, if this is not a real sweep.
    pub fn fixed(&self) -> Option<(f64, f64)> {
        match self {
            CouplingSpec::Fixed { p, q } => Some((*p, *q)),
            CouplingSpec::Ranges { p, q } if p.steps == 1 && q.steps == 1 => Some((p.min, q.min)),
            _ => None,
        }
    }

    /// Both axes as ranges; a fixed pair becomes two 1-step ranges.
    pub fn ranges(&self) -> (SweepRange, SweepRange) {
        match *self {
            CouplingSpec::Fixed { p, q } => (
                SweepRange { min: p, max: p, steps: 1 },
                SweepRange { min: q, max: q, steps: 1 },
            ),
            CouplingSpec::Ranges { p, q } => (p, q),
        }
    }

    fn min_product(&self) -> f64 {
        match self {
            CouplingSpec::Fixed { p, q } => p * q,
            CouplingSpec::Ranges { p, q } => p.min * q.min,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialData {
    Gaussian { amplitude: f64, width: f64 },
    BarrierSeeded,
    File { path: PathBuf },
}

#[derive(Clone, Copy, Debug)]
pub struct StepSpec {
    pub cfl_safety: f64,
    pub blowup_threshold: f64,
    pub t_end: f64,
    pub snapshots: usize,
}

impl Default for StepSpec {
    fn default() -> Self {
        StepSpec {
            cfl_safety: 0.9,
            blowup_threshold: 1e6,
            t_end: 1.0,
            snapshots: 50,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EigenSpec {
    pub tol: f64,
    pub max_tau: f64,
    pub renorm_interval: f64,
    pub min_tau: f64,
}

impl Default for EigenSpec {
    fn default() -> Self {
        let d = PowerOpts::default();
        EigenSpec {
            tol: d.tol,
            max_tau: d.max_tau,
            renorm_interval: d.renorm_interval,
            min_tau: d.min_tau,
        }
    }
}

impl EigenSpec {
    pub fn power_opts(&self, cfl_safety: f64) -> PowerOpts {
        PowerOpts {
            tol: self.tol,
            max_tau: self.max_tau,
            renorm_interval: self.renorm_interval,
            min_tau: self.min_tau,
            cfl_safety,
            guess: None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CertifySpec {
    pub t_long: f64,
    pub order_tol: f64,
    pub residual_tol: f64,
    pub stride: usize,
}

impl Default for CertifySpec {
    fn default() -> Self {
        CertifySpec {
            t_long: 50.0,
            order_tol: 1e-3,
            residual_tol: 1e-3,
            stride: 2000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub grid: Grid,
    pub operator1: Option<EllipticOperator>,
    pub operator2: Option<EllipticOperator>,
    pub coupling: Option<CouplingSpec>,
    pub initial: InitialData,
    pub step: StepSpec,
    pub eigen: EigenSpec,
    pub certify: CertifySpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: None,
            seed: 0,
            out_dir: None,
            workers: None,
            grid: Grid::new(1, 241, 6.0).expect("default grid is valid"),
            operator1: None,
            operator2: None,
            coupling: None,
            initial: InitialData::Gaussian {
                amplitude: 1.0,
                width: 1.0,
            },
            step: StepSpec::default(),
            eigen: EigenSpec::default(),
            certify: CertifySpec::default(),
        }
    }
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("run", &["mode", "seed", "out", "workers"]),
    ("grid", &["dim", "points", "radius"]),
    ("operator1", &["spec"]),
    ("operator2", &["spec"]),
    (
        "coupling",
        &["p", "q", "p_min", "p_max", "p_steps", "q_min", "q_max", "q_steps"],
    ),
    ("initial", &["kind", "amplitude", "width", "path"]),
    ("step", &["cfl_safety", "blowup_threshold", "t_end", "snapshots"]),
    ("eigen", &["tol", "max_tau", "renorm_interval", "min_tau"]),
    ("certify", &["t_long", "order_tol", "residual_tol", "stride"]),
];

struct Table {
    entries: BTreeMap<(String, String), String>,
}

impl Table {
    fn scan(text: &str) -> Result<Table> {
        let mut entries = BTreeMap::new();
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| {
                    HarnessError::Config(format!("line {line_no}: unterminated section header"))
                })?;
                let name = name.trim();
                if !SECTIONS.iter().any(|(s, _)| *s == name) {
                    return Err(HarnessError::Config(format!(
                        "line {line_no}: unknown section [{name}]"
                    )));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HarnessError::Config(format!("line {line_no}: expected 'key = value', got '{line}'"))
            })?;
            let key = key.trim();
            let value = value.trim();
            let sec = section.as_ref().ok_or_else(|| {
                HarnessError::Config(format!("line {line_no}: key '{key}' outside any section"))
            })?;
            let keys = SECTIONS
                .iter()
                .find(|(s, _)| s == sec)
                .map(|(_, k)| *k)
                .expect("section validated on entry");
            if !keys.contains(&key) {
                return Err(err(&format!("[{sec}] {key}"), "unknown key"));
            }
            if entries
                .insert((sec.clone(), key.to_string()), value.to_string())
                .is_some()
            {
                return Err(err(&format!("[{sec}] {key}"), "duplicate key"));
            }
        }
        Ok(Table { entries })
    }

    fn take(&mut self, section: &str, key: &str) -> Option<String> {
        self.entries.remove(&(section.to_string(), key.to_string()))
    }

    fn has_any(&self, section: &str) -> bool {
        self.entries.keys().any(|(s, _)| s == section)
    }
}

fn parse_value<T: FromStr>(path: &str, raw: &str, what: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    raw.parse()
        .map_err(|e| err(path, format!("invalid {what} '{raw}': {e}")))
}

fn parse_float(path: &str, raw: &str) -> Result<f64> {
    let v: f64 = parse_value(path, raw, "number")?;
    if !v.is_finite() {
        return Err(err(path, format!("value must be finite, got {raw}")));
    }
    Ok(v)
}

impl RunConfig {
    /// Parses the sectioned key=value format; every diagnostic carries the
    /// offending `[section] key` path.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut t = Table::scan(text)?;
        let mut cfg = RunConfig::default();

        if let Some(v) = t.take("run", "mode") {
            cfg.mode = Some(v.parse()?);
        }
        if let Some(v) = t.take("run", "seed") {
            cfg.seed = parse_value("[run] seed", &v, "integer")?;
        }
        if let Some(v) = t.take("run", "out") {
            if v.is_empty() {
                return Err(err("[run] out", "empty path"));
            }
            cfg.out_dir = Some(PathBuf::from(v));
        }
        if let Some(v) = t.take("run", "workers") {
            let w: usize = parse_value("[run] workers", &v, "integer")?;
            if w == 0 {
                return Err(err("[run] workers", "must be at least 1"));
            }
            cfg.workers = Some(w);
        }

        let dim = match t.take("grid", "dim") {
            Some(v) => parse_value("[grid] dim", &v, "integer")?,
            None => cfg.grid.dim(),
        };
        let points = match t.take("grid", "points") {
            Some(v) => parse_value("[grid] points", &v, "integer")?,
            None => cfg.grid.points(),
        };
        let radius = match t.take("grid", "radius") {
            Some(v) => parse_float("[grid] radius", &v)?,
            None => cfg.grid.radius(),
        };
        cfg.grid = Grid::new(dim, points, radius).map_err(|e| err("[grid]", e))?;

        if let Some(v) = t.take("operator1", "spec") {
            cfg.operator1 =
                Some(parse_operator_spec(&v, cfg.grid.dim()).map_err(|e| err("[operator1] spec", e))?);
        }
        if let Some(v) = t.take("operator2", "spec") {
            cfg.operator2 =
                Some(parse_operator_spec(&v, cfg.grid.dim()).map_err(|e| err("[operator2] spec", e))?);
        }

        cfg.coupling = Self::parse_coupling(&mut t)?;
        cfg.initial = Self::parse_initial(&mut t)?;

        if let Some(v) = t.take("step", "cfl_safety") {
            cfg.step.cfl_safety = parse_float("[step] cfl_safety", &v)?;
            if cfg.step.cfl_safety <= 0.0 {
                return Err(err("[step] cfl_safety", "must be positive"));
            }
        }
        if let Some(v) = t.take("step", "blowup_threshold") {
            cfg.step.blowup_threshold = parse_float("[step] blowup_threshold", &v)?;
            if cfg.step.blowup_threshold <= 0.0 {
                return Err(err("[step] blowup_threshold", "must be positive"));
            }
        }
        if let Some(v) = t.take("step", "t_end") {
            cfg.step.t_end = parse_float("[step] t_end", &v)?;
            if cfg.step.t_end <= 0.0 {
                return Err(err("[step] t_end", "must be positive"));
            }
        }
        if let Some(v) = t.take("step", "snapshots") {
            cfg.step.snapshots = parse_value("[step] snapshots", &v, "integer")?;
            if cfg.step.snapshots == 0 {
                return Err(err("[step] snapshots", "must be at least 1"));
            }
        }

        if let Some(v) = t.take("eigen", "tol") {
            cfg.eigen.tol = parse_float("[eigen] tol", &v)?;
        }
        if let Some(v) = t.take("eigen", "max_tau") {
            cfg.eigen.max_tau = parse_float("[eigen] max_tau", &v)?;
        }
        if let Some(v) = t.take("eigen", "renorm_interval") {
            cfg.eigen.renorm_interval = parse_float("[eigen] renorm_interval", &v)?;
        }
        if let Some(v) = t.take("eigen", "min_tau") {
            cfg.eigen.min_tau = parse_float("[eigen] min_tau", &v)?;
        }

        if let Some(v) = t.take("certify", "t_long") {
            cfg.certify.t_long = parse_float("[certify] t_long", &v)?;
            if cfg.certify.t_long <= 0.0 {
                return Err(err("[certify] t_long", "must be positive"));
            }
        }
        if let Some(v) = t.take("certify", "order_tol") {
            cfg.certify.order_tol = parse_float("[certify] order_tol", &v)?;
        }
        if let Some(v) = t.take("certify", "residual_tol") {
            cfg.certify.residual_tol = parse_float("[certify] residual_tol", &v)?;
        }
        if let Some(v) = t.take("certify", "stride") {
            cfg.certify.stride = parse_value("[certify] stride", &v, "integer")?;
            if cfg.certify.stride == 0 {
                return Err(err("[certify] stride", "must be at least 1"));
            }
        }

        debug_assert!(t.entries.is_empty(), "all recognized keys consumed");
        Ok(cfg)
    }

    fn parse_coupling(t: &mut Table) -> Result<Option<CouplingSpec>> {
        let p = t.take("coupling", "p");
        let q = t.take("coupling", "q");
        let range_keys = [
            t.take("coupling", "p_min"),
            t.take("coupling", "p_max"),
            t.take("coupling", "p_steps"),
            t.take("coupling", "q_min"),
            t.take("coupling", "q_max"),
            t.take("coupling", "q_steps"),
        ];
        let has_fixed = p.is_some() || q.is_some();
        let has_range = range_keys.iter().any(Option::is_some);
        if has_fixed && has_range {
            return Err(err(
                "[coupling]",
                "give either fixed p, q or the *_min/*_max/*_steps ranges, not both",
            ));
        }
        if has_fixed {
            let p = parse_float(
                "[coupling] p",
                &p.ok_or_else(|| err("[coupling] p", "missing (q was given)"))?,
            )?;
            let q = parse_float(
                "[coupling] q",
                &q.ok_or_else(|| err("[coupling] q", "missing (p was given)"))?,
            )?;
            for (name, v) in [("p", p), ("q", q)] {
                if v < 1.0 {
                    return Err(err(&format!("[coupling] {name}"), "exponents must be >= 1"));
                }
            }
            return Ok(Some(CouplingSpec::Fixed { p, q }));
        }
        if !has_range {
            return Ok(None);
        }
        let [p_min, p_max, p_steps, q_min, q_max, q_steps] = range_keys;
        let range = |axis: &str, min: Option<String>, max: Option<String>, steps: Option<String>| {
            let path = |k: &str| format!("[coupling] {axis}_{k}");
            let min = parse_float(
                &path("min"),
                &min.ok_or_else(|| err(&path("min"), "missing"))?,
            )?;
            let max = match max {
                Some(v) => parse_float(&path("max"), &v)?,
                None => min,
            };
            let steps: usize = match steps {
                Some(v) => parse_value(&path("steps"), &v, "integer")?,
                None => 1,
            };
            if min < 1.0 {
                return Err(err(&path("min"), "exponents must be >= 1"));
            }
            if max < min {
                return Err(err(&path("max"), "must be >= the minimum"));
            }
            if steps == 0 {
                return Err(err(&path("steps"), "must be at least 1"));
            }
            if steps == 1 && max != min {
                return Err(err(&path("steps"), "a 1-step range needs min = max"));
            }
            if steps > 1 && max == min {
                return Err(err(&path("steps"), "a multi-step range needs max > min"));
            }
            Ok(SweepRange { min, max, steps })
        };
        Ok(Some(CouplingSpec::Ranges {
            p: range("p", p_min, p_max, p_steps)?,
            q: range("q", q_min, q_max, q_steps)?,
        }))
    }

    fn parse_initial(t: &mut Table) -> Result<InitialData> {
        let kind = t.take("initial", "kind");
        let amplitude = t.take("initial", "amplitude");
        let width = t.take("initial", "width");
        let path = t.take("initial", "path");
        let kind = match kind {
            None => {
                if amplitude.is_some() || width.is_some() || path.is_some() {
                    return Err(err("[initial] kind", "missing (other initial keys given)"));
                }
                return Ok(RunConfig::default().initial);
            }
            Some(k) => k,
        };
        match kind.as_str() {
            "gaussian" => {
                if path.is_some() {
                    return Err(err("[initial] path", "not used by kind = gaussian"));
                }
                let amplitude = match amplitude {
                    Some(v) => parse_float("[initial] amplitude", &v)?,
                    None => 1.0,
                };
                let width = match width {
                    Some(v) => parse_float("[initial] width", &v)?,
                    None => 1.0,
                };
                if amplitude <= 0.0 {
                    return Err(err("[initial] amplitude", "must be positive"));
                }
                if width <= 0.0 {
                    return Err(err("[initial] width", "must be positive"));
                }
                Ok(InitialData::Gaussian { amplitude, width })
            }
            "barrier-seeded" => {
                if amplitude.is_some() || width.is_some() || path.is_some() {
                    return Err(err(
                        "[initial]",
                        "kind = barrier-seeded takes no other keys",
                    ));
                }
                Ok(InitialData::BarrierSeeded)
            }
            "file" => {
                if amplitude.is_some() || width.is_some() {
                    return Err(err("[initial]", "kind = file takes only a path"));
                }
                let path = path.ok_or_else(|| err("[initial] path", "missing"))?;
                if path.is_empty() {
                    return Err(err("[initial] path", "empty path"));
                }
                Ok(InitialData::File {
                    path: PathBuf::from(path),
                })
            }
            other => Err(err(
                "[initial] kind",
                format!("unknown kind '{other}' (expected gaussian|barrier-seeded|file)"),
            )),
        }
    }

    /// Mode-specific completeness checks, run after flag/env resolution.
    pub fn validate_for(&self, mode: Mode) -> Result<()> {
        if let Some(declared) = self.mode {
            if declared != mode {
                return Err(HarnessError::Config(format!(
                    "config declares mode = {}, but the {} subcommand was invoked",
                    declared.as_str(),
                    mode.as_str()
                )));
            }
        }
        let need_op1 = |path: &str| {
            self.operator1
                .as_ref()
                .ok_or_else(|| err(path, "missing, required by this mode"))
        };
        match mode {
            Mode::Selfcheck => Ok(()),
            Mode::Eigen => {
                need_op1("[operator1] spec")?;
                Ok(())
            }
            Mode::Evolve | Mode::Certify | Mode::Sweep => {
                need_op1("[operator1] spec")?;
                self.operator2
                    .as_ref()
                    .ok_or_else(|| err("[operator2] spec", "missing, required by this mode"))?;
                let coupling = self
                    .coupling
                    .as_ref()
                    .ok_or_else(|| err("[coupling]", "missing, required by this mode"))?;
                if coupling.min_product() <= 1.0 {
                    return Err(err("[coupling]", "coupled modes need p * q > 1"));
                }
                if (mode == Mode::Evolve || mode == Mode::Certify) && coupling.fixed().is_none() {
                    return Err(err(
                        "[coupling]",
                        "this mode needs fixed exponents, not sweep ranges",
                    ));
                }
                if mode == Mode::Sweep && matches!(self.initial, InitialData::BarrierSeeded) {
                    return Err(err(
                        "[initial] kind",
                        "sweep cells classify configured data; use gaussian or file",
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn step_control(&self) -> StepControl {
        StepControl {
            cfl_safety: self.step.cfl_safety,
            dt_cap: None,
            blowup_threshold: self.step.blowup_threshold,
        }
    }

    /// True when the text mentions a section at all; used for friendlier
    /// missing-vs-empty diagnostics in the CLI.
    pub fn mentions_section(text: &str, section: &str) -> bool {
        Table::scan(text).map(|t| t.has_any(section)).unwrap_or(false)
    }
}

const MAX_SPEC_DEPTH: usize = 8;

/// Parses an operator description like `pucci-plus lambda=1 Lambda=2`,
/// `linear-trace scale=1`, `barenblatt gamma=0.5`, `minmax-2d`, or
/// `scaled factor=2.5 (linear-trace scale=1)`. Round-trips the strings
/// produced by [`EllipticOperator::describe`].
pub fn parse_operator_spec(spec: &str, dim: usize) -> Result<EllipticOperator> {
    parse_spec_depth(spec, dim, 0)
}

fn parse_spec_depth(spec: &str, dim: usize, depth: usize) -> Result<EllipticOperator> {
    if depth >= MAX_SPEC_DEPTH {
        return Err(HarnessError::Config(
            "operator spec nests too deeply".into(),
        ));
    }
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(HarnessError::Config("empty operator spec".into()));
    }
    let head = spec.split_whitespace().next().expect("nonempty");
    if head == "scaled" {
        let open = spec
            .find('(')
            .ok_or_else(|| HarnessError::Config("scaled needs an (inner operator)".into()))?;
        let close = spec
            .rfind(')')
            .filter(|c| *c > open)
            .ok_or_else(|| HarnessError::Config("unclosed (inner operator)".into()))?;
        if !spec[close + 1..].trim().is_empty() {
            return Err(HarnessError::Config(
                "trailing text after the inner operator".into(),
            ));
        }
        let args = parse_kv(&spec[head.len()..open], &["factor"])?;
        let factor = require_num(&args, "factor", "scaled")?;
        let inner = parse_spec_depth(&spec[open + 1..close], dim, depth + 1)?;
        return Ok(EllipticOperator::scaled(factor, inner)?);
    }
    let rest = &spec[head.len()..];
    match head {
        "linear-trace" => {
            let args = parse_kv(rest, &["scale", "diag", "matrix"])?;
            let given: Vec<&str> = ["scale", "diag", "matrix"]
                .into_iter()
                .filter(|k| args.contains_key(*k))
                .collect();
            if given.len() != 1 {
                return Err(HarnessError::Config(
                    "linear-trace needs exactly one of scale=, diag=, matrix=".into(),
                ));
            }
            let a = match given[0] {
                "scale" => {
                    let s = require_num(&args, "scale", "linear-trace")?;
                    SymMatrix::identity(dim).scaled(s)
                }
                "diag" => {
                    let vals = num_list(&args["diag"], dim, "diag")?;
                    let mut m = SymMatrix::zeros(dim);
                    for (i, v) in vals.iter().enumerate() {
                        m.set(i, i, *v);
                    }
                    m
                }
                _ => {
                    let vals = num_list(&args["matrix"], dim * dim, "matrix")?;
                    SymMatrix::from_rows(dim, &vals)?
                }
            };
            Ok(EllipticOperator::linear_trace(a)?)
        }
        "pucci-plus" | "pucci-minus" => {
            let args = parse_kv(rest, &["lambda", "Lambda"])?;
            let lambda = require_num(&args, "lambda", head)?;
            let big = require_num(&args, "Lambda", head)?;
            if head == "pucci-plus" {
                Ok(EllipticOperator::pucci_plus_op(dim, lambda, big)?)
            } else {
                Ok(EllipticOperator::pucci_minus_op(dim, lambda, big)?)
            }
        }
        "barenblatt" => {
            let args = parse_kv(rest, &["gamma"])?;
            let gamma = require_num(&args, "gamma", head)?;
            Ok(EllipticOperator::barenblatt(dim, gamma)?)
        }
        "minmax-2d" => {
            parse_kv(rest, &[])?;
            if dim != 2 {
                return Err(HarnessError::Config(format!(
                    "minmax-2d is two-dimensional, grid has dim = {dim}"
                )));
            }
            Ok(EllipticOperator::minmax_2d())
        }
        other => Err(HarnessError::Config(format!(
            "unknown operator kind '{other}' (expected linear-trace|pucci-plus|pucci-minus|barenblatt|minmax-2d|scaled)"
        ))),
    }
}

fn parse_kv(rest: &str, allowed: &[&str]) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for tok in rest.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| {
            HarnessError::Config(format!("expected key=value in operator spec, got '{tok}'"))
        })?;
        if !allowed.contains(&k) {
            return Err(HarnessError::Config(format!(
                "unknown operator spec key '{k}'"
            )));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(HarnessError::Config(format!(
                "duplicate operator spec key '{k}'"
            )));
        }
    }
    Ok(out)
}

fn require_num(args: &BTreeMap<String, String>, key: &str, kind: &str) -> Result<f64> {
    let raw = args
        .get(key)
        .ok_or_else(|| HarnessError::Config(format!("{kind} needs {key}=")))?;
    let v: f64 = raw
        .parse()
        .map_err(|e| HarnessError::Config(format!("invalid number '{raw}' for {key}: {e}")))?;
    if !v.is_finite() {
        return Err(HarnessError::Config(format!(
            "{key} must be finite, got {raw}"
        )));
    }
    Ok(v)
}

fn num_list(raw: &str, expect: usize, key: &str) -> Result<Vec<f64>> {
    let vals: Vec<f64> = raw
        .split(',')
        .map(|s| {
            let v: f64 = s
                .trim()
                .parse()
                .map_err(|e| HarnessError::Config(format!("invalid number '{s}' in {key}: {e}")))?;
            if !v.is_finite() {
                return Err(HarnessError::Config(format!(
                    "non-finite entry '{s}' in {key}"
                )));
            }
            Ok(v)
        })
        .collect::<Result<_>>()?;
    if vals.len() != expect {
        return Err(HarnessError::Config(format!(
            "{key} needs {expect} comma-separated entries, got {}",
            vals.len()
        )));
    }
    Ok(vals)
}

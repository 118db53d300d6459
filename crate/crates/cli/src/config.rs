//! Run configuration: a flat `key = value` file with optional per-command
//! sections, overridden by command-line flags.
//!
//! Keys before the first section apply to every command; a `[solve]`
//! section (and so on) applies only to that command. Lines starting with
//! `#` are comments.

use std::fmt;
use std::path::PathBuf;

use extremal::radial::{ContinuationConfig, GridKind};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Certificate,
    Solve,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Certificate => "certificate",
            Command::Solve => "solve",
            Command::Sweep => "sweep",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        [Command::Analyze, Command::Certificate, Command::Solve, Command::Sweep]
            .into_iter()
            .find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Csv,
    Json,
    Gnuplot,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Gnuplot => "gnuplot",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XiChoice {
    Thm11,
    Thm12,
}

/// A configuration problem; maps to exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

fn err<T>(message: impl Into<String>) -> Result<T> {
    Err(ConfigError(message.into()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub f: String,
    pub params: Vec<f64>,
    pub n: Vec<f64>,
    pub out: PathBuf,
    pub formats: Vec<Format>,
    pub grid: usize,
    pub grid_kind: GridKind,
    pub jobs: usize,
    pub beta1: Option<f64>,
    pub beta3: Option<f64>,
    pub xi: XiChoice,
    pub t0: Option<f64>,
    pub t_max: Option<f64>,
    pub tail_start: f64,
    pub tail_end: f64,
    pub samples: usize,
    pub tolerance: f64,
    /// Norm exponents for `solve`; norms are only tracked when `gamma` is set.
    pub gamma: Option<f64>,
    pub sigma: f64,
    pub continuation: ContinuationConfig,
}

/// Keys accepted in files and via `--set`, in canonical order.
pub const KEYS: &[&str] = &[
    "f",
    "params",
    "n",
    "out",
    "format",
    "grid",
    "grid_kind",
    "jobs",
    "beta1",
    "beta3",
    "xi",
    "t0",
    "t_max",
    "tail_start",
    "tail_end",
    "samples",
    "tolerance",
    "gamma",
    "sigma",
    "lambda_initial_step",
    "lambda_min_step",
    "newton_tol",
    "newton_max_iter",
    "sup_norm_cap",
    "eigen_tol",
    "lambda_cap",
];

/// Keys that do not change any computed number and stay out of the hash.
const UNHASHED: &[&str] = &["out", "jobs"];

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        RunConfig {
            command,
            f: String::new(),
            params: Vec::new(),
            n: Vec::new(),
            out: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json],
            grid: 2049,
            grid_kind: GridKind::default(),
            jobs: 1,
            beta1: None,
            beta3: None,
            xi: XiChoice::Thm11,
            t0: None,
            t_max: None,
            tail_start: 10.0,
            tail_end: 1e5,
            samples: extremal::certificate::CertificateOptions::default().samples,
            tolerance: extremal::certificate::DEFAULT_CERTIFICATE_TOLERANCE,
            gamma: None,
            sigma: 0.0,
            continuation: ContinuationConfig::default(),
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let c = &mut self.continuation;
        match key {
            "f" => self.f = value.to_string(),
            "params" => self.params = parse_list(key, value)?,
            "n" => self.n = parse_dimensions(value)?,
            "out" => self.out = PathBuf::from(value),
            "format" => self.formats = parse_formats(value)?,
            "grid" => self.grid = parse_num(key, value)?,
            "grid_kind" => self.grid_kind = parse_grid_kind(value)?,
            "jobs" => self.jobs = parse_num(key, value)?,
            "beta1" => self.beta1 = Some(parse_num(key, value)?),
            "beta3" => self.beta3 = Some(parse_num(key, value)?),
            "xi" => {
                self.xi = match value {
                    "thm11" => XiChoice::Thm11,
                    "thm12" | "thm12_half" => XiChoice::Thm12,
                    _ => return err(format!("xi must be thm11 or thm12, got `{value}`")),
                }
            }
            "t0" => self.t0 = Some(parse_num(key, value)?),
            "t_max" => self.t_max = Some(parse_num(key, value)?),
            "tail_start" => self.tail_start = parse_num(key, value)?,
            "tail_end" => self.tail_end = parse_num(key, value)?,
            "samples" => self.samples = parse_num(key, value)?,
            "tolerance" => self.tolerance = parse_num(key, value)?,
            "gamma" => self.gamma = Some(parse_num(key, value)?),
            "sigma" => self.sigma = parse_num(key, value)?,
            "lambda_initial_step" => c.lambda_initial_step = parse_num(key, value)?,
            "lambda_min_step" => c.lambda_min_step = parse_num(key, value)?,
            "newton_tol" => c.newton_tol = parse_num(key, value)?,
            "newton_max_iter" => c.newton_max_iter = parse_num(key, value)?,
            "sup_norm_cap" => c.sup_norm_cap = parse_num(key, value)?,
            "eigen_tol" => c.eigen_tol = parse_num(key, value)?,
            "lambda_cap" => c.lambda_cap = parse_num(key, value)?,
            _ => return err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Option<String> {
        let c = &self.continuation;
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        Some(match key {
            "f" => self.f.clone(),
            "params" if self.params.is_empty() => return None,
            "params" => join(&self.params),
            "n" if self.n.is_empty() => return None,
            "n" => join(&self.n),
            "out" => self.out.display().to_string(),
            "format" => self.formats.iter().map(|f| f.name()).collect::<Vec<_>>().join(","),
            "grid" => self.grid.to_string(),
            "grid_kind" => match self.grid_kind {
                GridKind::Uniform => "uniform".into(),
                GridKind::Graded { exponent } => format!("graded:{exponent}"),
            },
            "jobs" => self.jobs.to_string(),
            "beta1" => self.beta1?.to_string(),
            "beta3" => self.beta3?.to_string(),
            "xi" => match self.xi {
                XiChoice::Thm11 => "thm11".into(),
                XiChoice::Thm12 => "thm12".into(),
            },
            "t0" => self.t0?.to_string(),
            "t_max" => self.t_max?.to_string(),
            "tail_start" => self.tail_start.to_string(),
            "tail_end" => self.tail_end.to_string(),
            "samples" => self.samples.to_string(),
            "tolerance" => self.tolerance.to_string(),
            "gamma" => self.gamma?.to_string(),
            "sigma" => self.sigma.to_string(),
            "lambda_initial_step" => c.lambda_initial_step.to_string(),
            "lambda_min_step" => c.lambda_min_step.to_string(),
            "newton_tol" => c.newton_tol.to_string(),
            "newton_max_iter" => c.newton_max_iter.to_string(),
            "sup_norm_cap" => c.sup_norm_cap.to_string(),
            "eigen_tol" => c.eigen_tol.to_string(),
            "lambda_cap" => c.lambda_cap.to_string(),
            _ => return None,
        })
    }

    /// Applies a config file: global keys first, then the section for
    /// this command. Sections for other commands are ignored.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        let mut global = Vec::new();
        let mut own = Vec::new();
        let mut section: Option<Command> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = Some(Command::from_name(name.trim()).ok_or_else(|| {
                    ConfigError(format!("line {}: unknown section `{name}`", lineno + 1))
                })?);
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(format!("line {}: expected `key = value`", lineno + 1));
            };
            let entry = (lineno + 1, key.trim().to_string(), value.trim().to_string());
            match section {
                None => global.push(entry),
                Some(c) if c == self.command => own.push(entry),
                Some(_) => {}
            }
        }
        for (lineno, key, value) in global.into_iter().chain(own) {
            self.set(&key, &value).map_err(|e| ConfigError(format!("line {lineno}: {e}")))?;
        }
        Ok(())
    }

    /// The file form: one `[command]` section listing every set key.
    pub fn to_file(&self) -> String {
        self.render(|_| true)
    }

    fn render(&self, keep: impl Fn(&str) -> bool) -> String {
        let mut out = format!("[{}]\n", self.command.name());
        for key in KEYS.iter().copied().filter(|k| keep(k)) {
            if let Some(value) = self.get(key) {
                out.push_str(&format!("{key} = {value}\n"));
            }
        }
        out
    }

    /// SHA-256 of the file form without the output directory and job count.
    pub fn hash(&self) -> String {
        let canonical = self.render(|k| !UNHASHED.contains(&k));
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.f.trim().is_empty() {
            return err("no nonlinearity given (--f)");
        }
        if self.grid < 3 {
            return err(format!("grid must have at least 3 nodes, got {}", self.grid));
        }
        if self.jobs == 0 {
            return err("jobs must be positive");
        }
        if self.formats.is_empty() {
            return err("no output format selected");
        }
        if !(self.tail_start > 0.0 && self.tail_end > self.tail_start) {
            return err(format!("need 0 < tail_start < tail_end, got {} and {}", self.tail_start, self.tail_end));
        }
        if self.n.iter().any(|&n| !(n.is_finite() && n > 0.0)) {
            return err("dimensions must be positive");
        }
        match self.command {
            Command::Analyze | Command::Sweep if self.n.is_empty() => err("no dimension given (--n)"),
            Command::Solve if self.n.len() != 1 => err("solve takes exactly one dimension; use sweep for a list"),
            Command::Solve | Command::Sweep => {
                self.continuation.validate().map_err(|e| ConfigError(e.to_string()))
            }
            _ => Ok(()),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| ConfigError(format!("{key}: cannot parse `{value}`")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|s| parse_num(key, s.trim())).collect()
}

/// `5`, `3,4,5` or an inclusive range `a:b:step`.
pub fn parse_dimensions(value: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = value.split(':').collect();
    match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step): (f64, f64, f64) =
                (parse_num("n", a.trim())?, parse_num("n", b.trim())?, parse_num("n", step.trim())?);
            if !(step > 0.0 && b >= a) {
                return err(format!("range `{value}` needs a positive step and start <= end"));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize;
            Ok((0..=count).map(|k| a + k as f64 * step).collect())
        }
        [_] => parse_list("n", value),
        _ => err(format!("n: expected a value, a list or a:b:step, got `{value}`")),
    }
}

fn parse_formats(value: &str) -> Result<Vec<Format>> {
    let mut out = Vec::new();
    for name in value.split(',').map(str::trim) {
        let f = match name {
            "csv" => Format::Csv,
            "json" => Format::Json,
            "gnuplot" => Format::Gnuplot,
            _ => return err(format!("unknown format `{name}`")),
        };
        if !out.contains(&f) {
            out.push(f);
        }
    }
    out.sort();
    Ok(out)
}

fn parse_grid_kind(value: &str) -> Result<GridKind> {
    match value.split_once(':') {
        None if value == "uniform" => Ok(GridKind::Uniform),
        None if value == "graded" => Ok(GridKind::default()),
        Some(("graded", e)) => {
            let exponent: f64 = parse_num("grid_kind", e)?;
            if exponent >= 1.0 {
                Ok(GridKind::Graded { exponent })
            } else {
                err("grading exponent must be at least 1")
            }
        }
        _ => err(format!("grid_kind must be uniform, graded or graded:<exponent>, got `{value}`")),
    }
}

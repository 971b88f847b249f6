//! Run configuration: defaults, a flat `key = value` file, environment
//! variables and flags, in increasing priority.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Rational,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Exact,
    Heuristic,
}

fn enum_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

/// Inclusive range of exponents `a..=b` for `ε = 2^{-k}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsGrid {
    pub first: u32,
    pub last: u32,
}

impl FromStr for EpsGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected a:b, got {s:?}"))?;
        let first: u32 = a.trim().parse().map_err(|_| format!("bad exponent {a:?}"))?;
        let last: u32 = b.trim().parse().map_err(|_| format!("bad exponent {b:?}"))?;
        if first < 2 || last < first {
            return Err(format!("need 2 <= a <= b, got {first}:{last}"));
        }
        Ok(EpsGrid { first, last })
    }
}

impl fmt::Display for EpsGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.first, self.last)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// suite-specific default when absent
    pub depth: Option<u32>,
    pub backend: Backend,
    pub seed: u64,
    /// suite-specific default when absent
    pub trials: Option<usize>,
    pub pad: u32,
    pub eps_grid: EpsGrid,
    pub h_ratio: f64,
    pub lambda: String,
    pub eps0: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub strategy: Strategy,
    pub symbol: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            depth: None,
            backend: Backend::Rational,
            seed: 0,
            trials: None,
            pad: 1,
            eps_grid: EpsGrid { first: 3, last: 7 },
            h_ratio: 16.0,
            lambda: "1/16".into(),
            eps0: 0.01,
            eps1: 0.01,
            eps2: 1e-4,
            strategy: Strategy::Exact,
            symbol: None,
            out: PathBuf::from("dyadlab-out"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}:{line}: {msg}")]
    File { path: String, line: usize, msg: String },
    #[error("cannot read {0}: {1}")]
    Read(String, std::io::Error),
    #[error("invalid value for {key}: {msg}")]
    Value { key: String, msg: String },
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    v.parse::<T>().map_err(|e| ConfigError::Value { key: key.into(), msg: e.to_string() })
}

fn parse_enum<T: ValueEnum>(key: &str, v: &str) -> Result<T, ConfigError> {
    T::from_str(v, true).map_err(|e| ConfigError::Value { key: key.into(), msg: e })
}

impl RunConfig {
    /// Applies one `key = value` pair; `-` and `_` are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key.trim().replace('_', "-").as_str() {
            "depth" => self.depth = Some(parse(key, v)?),
            "backend" => self.backend = parse_enum(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "trials" => self.trials = Some(parse(key, v)?),
            "pad" => self.pad = parse(key, v)?,
            "eps-grid" => self.eps_grid = parse(key, v)?,
            "h-ratio" => self.h_ratio = parse(key, v)?,
            "lambda" => self.lambda = v.to_string(),
            "eps0" => self.eps0 = parse(key, v)?,
            "eps1" => self.eps1 = parse(key, v)?,
            "eps2" => self.eps2 = parse(key, v)?,
            "strategy" => self.strategy = parse_enum(key, v)?,
            "symbol" => self.symbol = Some(PathBuf::from(v)),
            "out" => self.out = PathBuf::from(v),
            other => return Err(ConfigError::Value { key: other.into(), msg: "unknown key".into() }),
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| ConfigError::File { path: origin.into(), line: k + 1, msg };
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key = value".into()))?;
            self.set(key, value).map_err(|e| err(e.to_string()))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read(path.display().to_string(), e))?;
        self.apply_text(&text, &path.display().to_string())
    }

    pub fn lambda(&self) -> Result<Rational64, ConfigError> {
        let err = |msg: &str| ConfigError::Value { key: "lambda".into(), msg: msg.into() };
        let l: Rational64 = self.lambda.trim().parse().map_err(|_| err("expected a rational such as 1/16"))?;
        if l <= Rational64::from_integer(0) || l >= Rational64::from_integer(1) {
            return Err(err("must lie in (0, 1)"));
        }
        Ok(l)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, msg: &str| Err(ConfigError::Value { key: key.into(), msg: msg.into() });
        self.lambda()?;
        if !(self.h_ratio >= 8.0) {
            return bad("h-ratio", "must be at least 8");
        }
        if !(self.eps2 > 0.0 && self.eps2 < self.eps1) || !(self.eps0 > 0.0) {
            return bad("eps", "need 0 < eps2 < eps1 and eps0 > 0");
        }
        if self.trials == Some(0) {
            return bad("trials", "must be positive");
        }
        if self.pad > 2 {
            return bad("pad", "at most 2");
        }
        Ok(())
    }

    /// The canonical flat text; loading it reproduces the configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        if let Some(d) = self.depth {
            put("depth", d.to_string());
        }
        put("backend", enum_name(&self.backend));
        put("seed", self.seed.to_string());
        if let Some(t) = self.trials {
            put("trials", t.to_string());
        }
        put("pad", self.pad.to_string());
        put("eps-grid", self.eps_grid.to_string());
        put("h-ratio", self.h_ratio.to_string());
        put("lambda", self.lambda.clone());
        put("eps0", self.eps0.to_string());
        put("eps1", self.eps1.to_string());
        put("eps2", self.eps2.to_string());
        put("strategy", enum_name(&self.strategy));
        if let Some(p) = &self.symbol {
            put("symbol", p.display().to_string());
        }
        s
    }

    /// First 12 hex digits of the SHA-256 of the canonical text (output
    /// directory excluded).
    pub fn hash(&self) -> String {
        let d = Sha256::digest(self.to_text().as_bytes());
        d.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }
}

/// Flag and environment overrides; unset fields leave the file values alone.
#[derive(Args, Clone, Debug, Default)]
pub struct Overrides {
    /// Flat key = value configuration file
    #[arg(long, global = true, env = "DYADLAB_CONFIG")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, env = "DYADLAB_DEPTH")]
    pub depth: Option<u32>,
    #[arg(long, global = true, value_enum, env = "DYADLAB_BACKEND")]
    pub backend: Option<Backend>,
    #[arg(long, global = true, env = "DYADLAB_SEED")]
    pub seed: Option<u64>,
    #[arg(long, global = true, env = "DYADLAB_TRIALS")]
    pub trials: Option<usize>,
    /// Grid levels below the finest Haar level of random symbols
    #[arg(long, global = true, env = "DYADLAB_PAD")]
    pub pad: Option<u32>,
    /// Exponent range a:b for the strip widths 2^-a .. 2^-b
    #[arg(long, global = true, env = "DYADLAB_EPS_GRID")]
    pub eps_grid: Option<EpsGrid>,
    /// Strip width over grid step
    #[arg(long, global = true, env = "DYADLAB_H_RATIO")]
    pub h_ratio: Option<f64>,
    /// Maximal-function threshold of the enlargement, as a rational
    #[arg(long, global = true, env = "DYADLAB_LAMBDA")]
    pub lambda: Option<String>,
    #[arg(long, global = true, env = "DYADLAB_EPS0")]
    pub eps0: Option<f64>,
    #[arg(long, global = true, env = "DYADLAB_EPS1")]
    pub eps1: Option<f64>,
    #[arg(long, global = true, env = "DYADLAB_EPS2")]
    pub eps2: Option<f64>,
    #[arg(long, global = true, value_enum, env = "DYADLAB_STRATEGY")]
    pub strategy: Option<Strategy>,
    /// Symbol JSON for the bmo command
    #[arg(long, global = true, env = "DYADLAB_SYMBOL")]
    pub symbol: Option<PathBuf>,
    #[arg(long, global = true, env = "DYADLAB_OUT")]
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut c = RunConfig::default();
        if let Some(p) = &self.config {
            c.apply_file(p)?;
        }
        macro_rules! take {
            ($($f:ident),*) => { $(if let Some(v) = &self.$f { c.$f = v.clone(); })* };
        }
        take!(backend, seed, pad, eps_grid, h_ratio, lambda, eps0, eps1, eps2, strategy, out);
        if self.depth.is_some() {
            c.depth = self.depth;
        }
        if self.trials.is_some() {
            c.trials = self.trials;
        }
        if self.symbol.is_some() {
            c.symbol = self.symbol.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

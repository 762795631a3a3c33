//! Run configuration: `key = value` text files merged under command-line flags.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ecarith::EllipticCurve;
use crate::error::{invalid, Error, Result};

/// Version stamped into every JSON and CSV output.
pub const SCHEMA_VERSION: u32 = 1;
/// Environment variable naming the coefficient cache directory.
pub const CACHE_DIR_ENV: &str = "DSTAB_CACHE_DIR";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Self::Text),
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            _ => invalid(format!("unknown format {s:?}")),
        }
    }
}

impl OutputFormat {
    fn as_str(self) -> &'static str {
        match self {
            Self::Text => "text",
            Self::Json => "json",
            Self::Csv => "csv",
        }
    }
}

/// Curve given by name or by coefficients and conductor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveSpec {
    Named(String),
    Coefficients { coeffs: [i64; 5], conductor: u64 },
}

impl CurveSpec {
    pub fn build(&self) -> Result<EllipticCurve> {
        match self {
            CurveSpec::Named(n) => match n.to_ascii_lowercase().as_str() {
                "571a1" => Ok(EllipticCurve::curve_571a1()),
                "5906" | "fk" => Ok(EllipticCurve::curve_5906()),
                "11a1" => Ok(EllipticCurve::curve_11a1()),
                _ => invalid(format!("unknown curve {n:?}; use 571a1, 5906, 11a1 or coefficients")),
            },
            CurveSpec::Coefficients { coeffs, conductor } => EllipticCurve::new(*coeffs, *conductor),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub curve: CurveSpec,
    pub ell: u64,
    pub n: u32,
    /// Extra primes added to Sigma (l and the bad primes are always included).
    pub sigma: Vec<u64>,
    pub bound: u64,
    pub eps: f64,
    pub root_number: Option<i8>,
    pub cache_dir: Option<PathBuf>,
    pub format: OutputFormat,
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            curve: CurveSpec::Named("571a1".into()),
            ell: 3,
            n: 1,
            sigma: Vec::new(),
            bound: 100_000,
            eps: crate::lfunc::DEFAULT_EPS,
            root_number: None,
            cache_dir: None,
            format: OutputFormat::Text,
            workers: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::InvalidInput(format!("bad value {v:?} for {key}")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse(key, s)).collect()
}

impl RunConfig {
    /// Parses `key = value` lines; `#` starts a comment. Unknown keys are errors.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::InvalidInput(format!("line {}: expected key = value", i + 1)))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        let mut cfg = Self::default();
        cfg.apply(&map)?;
        Ok(cfg)
    }

    /// Overrides fields from a key/value map (used for both files and flags).
    pub fn apply(&mut self, map: &BTreeMap<String, String>) -> Result<()> {
        let mut coeffs: Option<[i64; 5]> = None;
        let mut conductor: Option<u64> = None;
        for (k, v) in map {
            match k.as_str() {
                "curve" => self.curve = CurveSpec::Named(v.clone()),
                "coeffs" => {
                    let c: Vec<i64> = parse_list(k, v)?;
                    coeffs = Some(c.try_into().map_err(|_| Error::InvalidInput("coeffs needs five integers".into()))?);
                }
                "conductor" => conductor = Some(parse(k, v)?),
                "ell" => self.ell = parse(k, v)?,
                "n" => self.n = parse(k, v)?,
                "sigma" => self.sigma = parse_list(k, v)?,
                "bound" => self.bound = parse(k, v)?,
                "eps" => self.eps = parse(k, v)?,
                "root_number" => self.root_number = if v == "auto" { None } else { Some(parse(k, v)?) },
                "cache_dir" => self.cache_dir = if v.is_empty() { None } else { Some(PathBuf::from(v)) },
                "format" => self.format = v.parse()?,
                "workers" => self.workers = if v == "auto" { None } else { Some(parse(k, v)?) },
                _ => return invalid(format!("unknown configuration key {k:?}")),
            }
        }
        match (coeffs, conductor) {
            (Some(coeffs), Some(conductor)) => self.curve = CurveSpec::Coefficients { coeffs, conductor },
            (None, None) => {}
            _ => return invalid("coeffs and conductor must be given together"),
        }
        Ok(())
    }

    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        match &self.curve {
            CurveSpec::Named(n) => writeln!(s, "curve = {n}").unwrap(),
            CurveSpec::Coefficients { coeffs, conductor } => {
                let c: Vec<String> = coeffs.iter().map(i64::to_string).collect();
                writeln!(s, "coeffs = {}\nconductor = {conductor}", c.join(",")).unwrap();
            }
        }
        let sigma: Vec<String> = self.sigma.iter().map(u64::to_string).collect();
        writeln!(s, "ell = {}\nn = {}\nsigma = {}\nbound = {}", self.ell, self.n, sigma.join(","), self.bound).unwrap();
        writeln!(s, "eps = {:e}", self.eps).unwrap();
        writeln!(s, "root_number = {}", self.root_number.map_or("auto".into(), |w| w.to_string())).unwrap();
        writeln!(s, "cache_dir = {}", self.cache_dir.as_ref().map_or(String::new(), |p| p.display().to_string())).unwrap();
        writeln!(s, "format = {}", self.format.as_str()).unwrap();
        writeln!(s, "workers = {}", self.workers.map_or("auto".into(), |w| w.to_string())).unwrap();
        s
    }

    /// Explicit setting, else the environment variable.
    pub fn resolved_cache_dir(&self) -> Option<PathBuf> {
        self.cache_dir.clone().or_else(|| std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut cfg = RunConfig::default();
        assert_eq!(RunConfig::from_kv(&cfg.to_kv()).unwrap(), cfg);
        cfg.curve = CurveSpec::Coefficients { coeffs: [1, 1, 0, -32, 58], conductor: 5906 };
        cfg.sigma = vec![7, 13];
        cfg.eps = 1e-9;
        cfg.root_number = Some(-1);
        cfg.cache_dir = Some("/tmp/x".into());
        cfg.format = OutputFormat::Csv;
        cfg.workers = Some(2);
        assert_eq!(RunConfig::from_kv(&cfg.to_kv()).unwrap(), cfg);
    }

    #[test]
    fn parse_errors() {
        assert!(RunConfig::from_kv("ell 3").is_err());
        assert!(RunConfig::from_kv("colour = red").is_err());
        assert!(RunConfig::from_kv("coeffs = 1,2,3,4,5").is_err());
        let c = RunConfig::from_kv("# comment\nell = 5 # trailing\n").unwrap();
        assert_eq!(c.ell, 5);
    }
}

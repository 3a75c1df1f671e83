//! Configuration resolution: command-line flags merged over an optional JSON
//! config file, with flags taking precedence, then validated into a fully
//! resolved, hashable run configuration.

use serde::Deserialize;
use sha2::{Digest, Sha256};
use std::path::PathBuf;

use crate::output::to_json_compact;

/// A configuration problem: bad flag value, malformed config file, or a key
/// the chosen subcommand does not accept.  Maps to process exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// JSON config file schema.  Keys mirror the long flags exactly (kebab-case);
/// unknown keys are rejected so typos fail loudly instead of being ignored.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub rho: Option<f64>,
    pub eps: Option<f64>,
    pub theta0: Option<f64>,
    #[serde(rename = "theta0-grid")]
    pub theta0_grid: Option<u32>,
    #[serde(rename = "rho-sweep")]
    pub rho_sweep: Option<String>,
    #[serde(rename = "eps-sweep")]
    pub eps_sweep: Option<String>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub jobs: Option<usize>,
    pub suite: Option<String>,
}

impl FileConfig {
    pub fn load(path: Option<&PathBuf>) -> Result<Self, ConfigError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config file {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| ConfigError(format!("invalid config file {}: {e}", path.display())))
    }

    /// Reject config-file keys the current subcommand has no flag for, so a
    /// config written for one subcommand cannot silently leak settings into
    /// another.
    pub fn restrict_to(&self, command: &str, allowed: &[&str]) -> Result<(), ConfigError> {
        let present: [(&str, bool); 11] = [
            ("rho", self.rho.is_some()),
            ("eps", self.eps.is_some()),
            ("theta0", self.theta0.is_some()),
            ("theta0-grid", self.theta0_grid.is_some()),
            ("rho-sweep", self.rho_sweep.is_some()),
            ("eps-sweep", self.eps_sweep.is_some()),
            ("tol", self.tol.is_some()),
            ("out", self.out.is_some()),
            ("format", self.format.is_some()),
            ("jobs", self.jobs.is_some()),
            ("suite", self.suite.is_some()),
        ];
        for (key, is_set) in present {
            if is_set && !allowed.contains(&key) {
                return Err(ConfigError(format!(
                    "config key \"{key}\" is not supported by the {command} subcommand"
                )));
            }
        }
        Ok(())
    }
}

/// Flag value wins; config file fills gaps; otherwise the default.
pub fn resolve<T: Clone>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Flag value wins; config file fills gaps; otherwise absent.
pub fn resolve_opt<T: Clone>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

/// Output format of the artifact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// Resolve the artifact format: explicit `--format` (or config key) wins,
/// otherwise the `--out` extension decides, otherwise JSON.
pub fn resolve_format(
    explicit: Option<&str>,
    out: Option<&PathBuf>,
) -> Result<Format, ConfigError> {
    if let Some(name) = explicit {
        return match name {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(ConfigError(format!(
                "unknown format \"{other}\" (expected \"json\" or \"csv\")"
            ))),
        };
    }
    if let Some(path) = out {
        if let Some(ext) = path.extension().and_then(|e| e.to_str()) {
            match ext.to_ascii_lowercase().as_str() {
                "json" => return Ok(Format::Json),
                "csv" => return Ok(Format::Csv),
                _ => {}
            }
        }
    }
    Ok(Format::Json)
}

/// Parse a sweep specification into a list of values, preserving order:
///
/// * `"lo:hi:n"` — `n` evenly spaced values from `lo` to `hi` inclusive,
/// * `"a,b,c"` — an explicit comma-separated list,
/// * `"x"` — a single value.
pub fn parse_sweep(spec: &str, what: &str) -> Result<Vec<f64>, ConfigError> {
    let bad = |msg: String| ConfigError(format!("invalid {what} sweep \"{spec}\": {msg}"));
    let parse_num = |s: &str| -> Result<f64, ConfigError> {
        let x: f64 = s
            .trim()
            .parse()
            .map_err(|_| bad(format!("\"{}\" is not a number", s.trim())))?;
        if !x.is_finite() {
            return Err(bad(format!("\"{}\" is not finite", s.trim())));
        }
        Ok(x)
    };

    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("range form is lo:hi:n".to_string()));
        }
        let lo = parse_num(parts[0])?;
        let hi = parse_num(parts[1])?;
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| bad(format!("\"{}\" is not a count", parts[2].trim())))?;
        if n < 2 {
            return Err(bad("range form needs at least 2 points".to_string()));
        }
        let step = (hi - lo) / (n - 1) as f64;
        return Ok((0..n).map(|i| lo + step * i as f64).collect());
    }

    let values: Vec<f64> = spec
        .split(',')
        .map(parse_num)
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(bad("empty sweep".to_string()));
    }
    Ok(values)
}

/// SHA-256 of the compact canonical JSON of the resolved configuration.
/// Only numerics-relevant parameters are hashed (not `--out`, `--format`, or
/// `--jobs`), so the hash identifies the computational task itself.
pub fn config_sha256(resolved: &serde_json::Value) -> String {
    let canonical = to_json_compact(resolved)
        .expect("resolved config must contain only finite numbers and strings");
    let digest = Sha256::digest(canonical.as_bytes());
    let mut hex = String::with_capacity(64);
    for byte in digest {
        use std::fmt::Write as _;
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn sweep_single_value() {
        assert_eq!(parse_sweep("0.35", "eps").unwrap(), vec![0.35]);
    }

    #[test]
    fn sweep_comma_list_keeps_order() {
        assert_eq!(
            parse_sweep("0.5,0.4,0.45", "eps").unwrap(),
            vec![0.5, 0.4, 0.45]
        );
    }

    #[test]
    fn sweep_range_is_inclusive_linspace() {
        let v = parse_sweep("0.3:0.5:5", "eps").unwrap();
        assert_eq!(v.len(), 5);
        assert!((v[0] - 0.3).abs() < 1e-15);
        assert!((v[4] - 0.5).abs() < 1e-15);
        assert!((v[2] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn sweep_rejects_garbage() {
        assert!(parse_sweep("", "eps").is_err());
        assert!(parse_sweep("a,b", "eps").is_err());
        assert!(parse_sweep("0.3:0.5", "eps").is_err());
        assert!(parse_sweep("0.3:0.5:1", "eps").is_err());
        assert!(parse_sweep("nan", "eps").is_err());
        assert!(parse_sweep("inf,1.0", "eps").is_err());
    }

    #[test]
    fn format_resolution_precedence() {
        let csv_path = PathBuf::from("out.csv");
        let dat_path = PathBuf::from("out.dat");
        assert_eq!(
            resolve_format(Some("json"), Some(&csv_path)).unwrap(),
            Format::Json,
            "explicit format must beat extension"
        );
        assert_eq!(resolve_format(None, Some(&csv_path)).unwrap(), Format::Csv);
        assert_eq!(resolve_format(None, Some(&dat_path)).unwrap(), Format::Json);
        assert_eq!(resolve_format(None, None).unwrap(), Format::Json);
        assert!(resolve_format(Some("yaml"), None).is_err());
    }

    #[test]
    fn flags_beat_config_file() {
        assert_eq!(resolve(Some(0.4), Some(0.45), 0.35), 0.4);
        assert_eq!(resolve(None, Some(0.45), 0.35), 0.45);
        assert_eq!(resolve::<f64>(None, None, 0.35), 0.35);
    }

    #[test]
    fn file_config_rejects_unknown_keys() {
        let err = serde_json::from_str::<FileConfig>(r#"{"epsilon": 0.4}"#);
        assert!(err.is_err());
    }

    #[test]
    fn file_config_accepts_kebab_keys() {
        let cfg: FileConfig =
            serde_json::from_str(r#"{"eps-sweep": "0.3,0.4", "theta0-grid": 8}"#).unwrap();
        assert_eq!(cfg.eps_sweep.as_deref(), Some("0.3,0.4"));
        assert_eq!(cfg.theta0_grid, Some(8));
    }

    #[test]
    fn restriction_rejects_foreign_keys() {
        let cfg: FileConfig = serde_json::from_str(r#"{"suite": "all"}"#).unwrap();
        assert!(cfg.restrict_to("melnikov", &["eps", "tol"]).is_err());
        assert!(cfg.restrict_to("verify", &["suite", "jobs"]).is_ok());
    }

    #[test]
    fn config_hash_is_stable_and_key_order_independent() {
        let a = json!({"command": "melnikov", "eps": [0.45], "tol": 1e-13});
        let b = json!({"tol": 1e-13, "eps": [0.45], "command": "melnikov"});
        assert_eq!(config_sha256(&a), config_sha256(&b));
        assert_eq!(config_sha256(&a).len(), 64);
    }
}

//! Flat `key = value` run configuration.
//!
//! ```text
//! # comment
//! p1 = 1
//! q = cos(x)      # trailing comments are allowed
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use delay_sl_core::asymptotics::SignConvention;
use delay_sl_core::expr::ExprError;
use delay_sl_core::spectral::{DEFAULT_SCAN_POINTS, DEFAULT_TOL, MIN_SCAN_POINTS};
use delay_sl_core::{CoefficientExpr, IntegratorConfig, ProblemSpec};
use thiserror::Error;

pub const REQUIRED_KEYS: [&str; 9] = [
    "p1", "p2", "gamma1", "gamma2", "delta1", "delta2", "d", "q", "delay",
];
pub const OPTIONAL_KEYS: [&str; 7] = [
    "steps",
    "n_min",
    "n_max",
    "tol",
    "scan_points",
    "sign",
    "out",
];

pub const DEFAULT_N_MIN: usize = 5;
pub const DEFAULT_N_MAX: usize = 40;
pub const DEFAULT_OUT: &str = "out";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("key `{key}`: {message}")]
    BadValue { key: String, message: String },
    #[error("key `{key}`: {source}")]
    Expression {
        key: String,
        #[source]
        source: ExprError,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: ProblemSpec,
    pub integrator: IntegratorConfig,
    pub n_min: usize,
    pub n_max: usize,
    pub tol: f64,
    pub scan_points: usize,
    pub sign: SignConvention,
    pub output_dir: PathBuf,
}

struct Entries(BTreeMap<String, (usize, String)>);

impl Entries {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(ConfigError::Malformed {
                    line,
                    text: raw.trim().to_string(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Malformed {
                    line,
                    text: raw.trim().to_string(),
                });
            }
            if !REQUIRED_KEYS.contains(&key) && !OPTIONAL_KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            }
            if map
                .insert(key.to_string(), (line, value.to_string()))
                .is_some()
            {
                return Err(ConfigError::DuplicateKey {
                    line,
                    key: key.to_string(),
                });
            }
        }
        Ok(Self(map))
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(|(_, v)| v.as_str())
    }

    fn required(&self, key: &'static str) -> Result<&str, ConfigError> {
        self.get(key).ok_or(ConfigError::MissingKey(key))
    }

    fn real(&self, key: &'static str) -> Result<f64, ConfigError> {
        let raw = self.required(key)?;
        let v: f64 = raw
            .parse()
            .map_err(|_| bad(key, format!("`{raw}` is not a number")))?;
        if !v.is_finite() {
            return Err(bad(key, format!("`{raw}` is not finite")));
        }
        Ok(v)
    }

    fn expr(&self, key: &'static str) -> Result<CoefficientExpr, ConfigError> {
        CoefficientExpr::parse(self.required(key)?).map_err(|source| ConfigError::Expression {
            key: key.to_string(),
            source,
        })
    }

    fn count_or(&self, key: &'static str, default: usize) -> Result<usize, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse()
                .map_err(|_| bad(key, format!("`{raw}` is not a non-negative integer"))),
        }
    }
}

fn bad(key: &str, message: String) -> ConfigError {
    ConfigError::BadValue {
        key: key.to_string(),
        message,
    }
}

impl RunConfig {
    /// Parse config text. Coefficient expressions are parsed here; the
    /// problem constraints are left to [`ProblemSpec::validate`].
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let e = Entries::parse(text)?;
        let spec = ProblemSpec {
            p1: e.real("p1")?,
            p2: e.real("p2")?,
            gamma1: e.real("gamma1")?,
            gamma2: e.real("gamma2")?,
            delta1: e.real("delta1")?,
            delta2: e.real("delta2")?,
            d: e.real("d")?,
            q: e.expr("q")?,
            delay: e.expr("delay")?,
        };

        let integrator = IntegratorConfig::default()
            .with_steps(e.count_or("steps", IntegratorConfig::default().steps_per_piece)?);
        integrator
            .validate()
            .map_err(|err| bad("steps", err.to_string()))?;

        let n_min = e.count_or("n_min", DEFAULT_N_MIN)?;
        let n_max = e.count_or("n_max", DEFAULT_N_MAX)?;
        if n_min < 2 {
            return Err(bad("n_min", format!("must be at least 2, got {n_min}")));
        }
        if n_max < n_min {
            return Err(bad(
                "n_max",
                format!("must be at least n_min = {n_min}, got {n_max}"),
            ));
        }

        let tol = match e.get("tol") {
            None => DEFAULT_TOL,
            Some(raw) => raw
                .parse()
                .map_err(|_| bad("tol", format!("`{raw}` is not a number")))?,
        };
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(bad("tol", format!("must be positive, got {tol}")));
        }

        let scan_points = e.count_or("scan_points", DEFAULT_SCAN_POINTS)?;
        if scan_points < MIN_SCAN_POINTS {
            return Err(bad(
                "scan_points",
                format!("must be at least {MIN_SCAN_POINTS}, got {scan_points}"),
            ));
        }

        let sign = match e.get("sign") {
            None => SignConvention::default(),
            Some(raw) => raw
                .parse()
                .map_err(|_| bad("sign", format!("`{raw}` is not paper|corrected")))?,
        };

        Ok(Self {
            spec,
            integrator,
            n_min,
            n_max,
            tol,
            scan_points,
            sign,
            output_dir: PathBuf::from(e.get("out").unwrap_or(DEFAULT_OUT)),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const C2: &str = "\
# discontinuous, delayed
p1 = 1
p2 = 2
gamma1 = 1
gamma2 = 1
delta1 = 1
delta2 = 2
d = 1
q = cos(x)
delay = 0.4*abs(sin(2*x))   # conditions a), b) hold
";

    #[test]
    fn parses_with_defaults() {
        let c = RunConfig::parse(C2).unwrap();
        assert_eq!(c.spec.p2, 2.0);
        assert_eq!(c.spec.delay.to_string(), "(0.4 * abs(sin((2.0 * x))))");
        assert_eq!((c.n_min, c.n_max, c.scan_points), (5, 40, 64));
        assert_eq!(c.tol, 1e-8);
        assert_eq!(c.sign, SignConvention::Corrected);
        assert_eq!(c.integrator, IntegratorConfig::default());
        assert_eq!(c.output_dir, PathBuf::from("out"));
    }

    #[test]
    fn optional_keys() {
        let text = format!("{C2}steps = 500\nn_min = 3\nn_max = 9\ntol = 1e-10\nscan_points = 32\nsign = paper\nout = /tmp/x\n");
        let c = RunConfig::parse(&text).unwrap();
        assert_eq!(c.integrator.steps_per_piece, 500);
        assert_eq!((c.n_min, c.n_max, c.scan_points), (3, 9, 32));
        assert_eq!(c.sign, SignConvention::Paper);
        assert_eq!(c.output_dir, PathBuf::from("/tmp/x"));
    }

    #[test]
    fn missing_key_is_named() {
        let text = C2.replace("p1 = 1\n", "");
        let err = RunConfig::parse(&text).unwrap_err();
        assert!(matches!(err, ConfigError::MissingKey("p1")));
        assert!(err.to_string().contains("p1"));
    }

    #[test]
    fn rejects_bad_lines() {
        let cases = [
            (format!("{C2}bogus = 1\n"), "unknown key"),
            (format!("{C2}p1 = 3\n"), "twice"),
            (format!("{C2}steps\n"), "expected"),
            (C2.replace("p2 = 2", "p2 = two"), "not a number"),
            (C2.replace("p2 = 2", "p2 = inf"), "not finite"),
            (C2.replace("cos(x)", "cos(y)"), "`q`"),
            (format!("{C2}n_min = 1\n"), "at least 2"),
            (format!("{C2}n_min = 9\nn_max = 8\n"), "n_min"),
            (format!("{C2}tol = 0\n"), "positive"),
            (format!("{C2}scan_points = 4\n"), "scan_points"),
            (format!("{C2}steps = 8\n"), "steps"),
            (format!("{C2}sign = minus\n"), "sign"),
        ];
        for (text, needle) in cases {
            let err = RunConfig::parse(&text).unwrap_err().to_string();
            assert!(err.contains(needle), "{err:?} lacks {needle:?}");
        }
    }
}

//! Plain `key = value` configuration files.

use std::time::Duration;

use thiserror::Error;

use crate::planner::Budget;
use crate::wrapper::{Strategy, WrapperConfig};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value for `{key}`")]
    BadValue { line: usize, key: String },
}

/// Reads a configuration, starting from the defaults. `#` starts a comment.
///
/// Keys: `k`, `strategy` (s1, s2, auto), `simplify`, `symmetry`,
/// `plan_nodes`, `verify_nodes`, `classify_nodes`, `time_limit` (seconds),
/// `complexity`, `depth`, `pool_sample`.
pub fn parse_config(text: &str) -> Result<WrapperConfig, ConfigError> {
    let mut cfg = WrapperConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or(ConfigError::Syntax { line })?;
        let (key, value) = (key.trim(), value.trim());
        let bad = || ConfigError::BadValue {
            line,
            key: key.to_string(),
        };
        let num = || value.parse::<usize>().map_err(|_| bad());
        let flag = || match value {
            "true" | "yes" | "on" | "1" => Ok(true),
            "false" | "no" | "off" | "0" => Ok(false),
            _ => Err(bad()),
        };
        match key {
            "k" => cfg.k = num().and_then(|k| if k == 0 { Err(bad()) } else { Ok(k) })?,
            "strategy" => cfg.strategy = value.parse().map_err(|_| bad())?,
            "simplify" => cfg.simplify = flag()?,
            "symmetry" => cfg.symmetry = flag()?,
            "plan_nodes" => cfg.plan_budget = Budget::nodes(num()?),
            "verify_nodes" => cfg.verify_budget = Budget::nodes(num()?),
            "classify_nodes" => cfg.classify_budget = Budget::nodes(num()?),
            "time_limit" => {
                let secs: f64 = value.parse().map_err(|_| bad())?;
                if secs.is_nan() || secs <= 0.0 {
                    return Err(bad());
                }
                cfg.time_limit = Some(Duration::from_secs_f64(secs));
            }
            "complexity" => cfg.complexity = num()?,
            "depth" => cfg.depth = num()?,
            "pool_sample" => cfg.pool_sample = num()?,
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                })
            }
        }
    }
    Ok(cfg)
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Strategy, String> {
        match s.to_ascii_lowercase().as_str() {
            "s1" => Ok(Strategy::S1),
            "s2" => Ok(Strategy::S2),
            "auto" => Ok(Strategy::Auto),
            _ => Err(format!("unknown strategy `{s}`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_keys_and_comments() {
        let cfg = parse_config("# run\nk = 2\nstrategy = s2 # forced\nsimplify = yes\ntime_limit = 1.5\n").unwrap();
        assert_eq!(cfg.k, 2);
        assert_eq!(cfg.strategy, Strategy::S2);
        assert!(cfg.simplify);
        assert_eq!(cfg.time_limit, Some(Duration::from_millis(1500)));
    }

    #[test]
    fn rejects_bad_lines() {
        assert_eq!(parse_config("k 2"), Err(ConfigError::Syntax { line: 1 }));
        assert!(matches!(parse_config("\nfoo = 1"), Err(ConfigError::UnknownKey { line: 2, .. })));
        assert!(matches!(parse_config("k = 0"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(parse_config("strategy = s3"), Err(ConfigError::BadValue { .. })));
    }
}

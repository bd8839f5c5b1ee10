//! Flat `key = value` sweep configuration files.
//!
//! ```text
//! # fig 1(a)
//! family = qubit
//! grid = default
//! schemes = cms_qubit, direct_pauli, adaptive_2step, tomo_qubit
//! measure = l1
//! repetitions = 1000
//! budget_N = 1200
//! master_seed = 20200101
//! ```
//!
//! | key | required | default |
//! |-----|----------|---------|
//! | `family` | yes | |
//! | `schemes` | yes | comma list of `kind` or `kind:measure` |
//! | `master_seed` | yes | |
//! | `grid` | no | `default` (13 points), or a comma list of radians |
//! | `measure` | no | `l1`, used by schemes without an explicit measure |
//! | `repetitions` | no | 1000 |
//! | `budget_N` | no | 1200 |
//! | `adaptive_step1_fraction` | no | 0.5 |
//! | `oracle` | no | `false` |

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::estimators::{EstimatorSettings, SchemeKind, SchemeSpec};
use crate::harness::{default_grid, SweepConfig};
use crate::measures::Measure;
use crate::states::StateFamily;

pub const DEFAULT_REPETITIONS: u32 = 1000;
pub const DEFAULT_BUDGET: u64 = 1200;

const KEYS: [&str; 9] = [
    "family",
    "grid",
    "schemes",
    "measure",
    "repetitions",
    "budget_N",
    "master_seed",
    "adaptive_step1_fraction",
    "oracle",
];

/// Splits the text into key/value pairs, rejecting unknown and repeated keys.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::Config(format!(
                "line {}: unknown key `{key}`",
                n + 1
            )));
        }
        if out
            .insert(key.to_string(), value.trim().to_string())
            .is_some()
        {
            return Err(Error::Config(format!(
                "line {}: duplicate key `{key}`",
                n + 1
            )));
        }
    }
    Ok(out)
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

fn parse_grid(value: &str) -> Result<Vec<f64>> {
    if value == "default" {
        return Ok(default_grid());
    }
    value
        .split(',')
        .map(|s| number::<f64>("grid", s.trim()))
        .collect()
}

fn parse_schemes(value: &str, measure: Measure, budget: u64) -> Result<Vec<SchemeSpec>> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (kind, m) = match item.split_once(':') {
            Some((k, m)) => (
                k,
                Measure::from_tag(m)
                    .ok_or_else(|| Error::Config(format!("unknown measure `{m}`")))?,
            ),
            None => (item, measure),
        };
        let kind = SchemeKind::from_tag(kind)
            .ok_or_else(|| Error::Config(format!("unknown scheme `{kind}`")))?;
        out.push(SchemeSpec::new(kind, m, budget).map_err(|e| Error::Config(e.to_string()))?);
    }
    if out.is_empty() {
        return Err(Error::Config("`schemes` is empty".into()));
    }
    Ok(out)
}

/// Parses and validates a configuration file's contents.
pub fn parse_sweep_config(text: &str) -> Result<SweepConfig> {
    let pairs = parse_pairs(text)?;
    let required = |key: &str| {
        pairs
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
    };

    let family = required("family")?;
    let family = StateFamily::from_tag(family)
        .ok_or_else(|| Error::Config(format!("unknown family `{family}`")))?;
    let master_seed: u64 = number("master_seed", required("master_seed")?)?;
    let budget: u64 = match pairs.get("budget_N") {
        Some(v) => number("budget_N", v)?,
        None => DEFAULT_BUDGET,
    };
    let repetitions: u32 = match pairs.get("repetitions") {
        Some(v) => number("repetitions", v)?,
        None => DEFAULT_REPETITIONS,
    };
    let measure = match pairs.get("measure") {
        Some(m) => {
            Measure::from_tag(m).ok_or_else(|| Error::Config(format!("unknown measure `{m}`")))?
        }
        None => Measure::L1,
    };
    let grid = match pairs.get("grid") {
        Some(v) => parse_grid(v)?,
        None => default_grid(),
    };
    let schemes = parse_schemes(required("schemes")?, measure, budget)?;
    let mut settings = EstimatorSettings::default();
    if let Some(v) = pairs.get("adaptive_step1_fraction") {
        let f: f64 = number("adaptive_step1_fraction", v)?;
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::Config(format!(
                "adaptive_step1_fraction {f} must lie in (0, 1)"
            )));
        }
        settings.adaptive_step1_fraction = f;
    }
    let oracle = match pairs.get("oracle").map(String::as_str) {
        None | Some("false") => false,
        Some("true") => true,
        Some(v) => {
            return Err(Error::Config(format!(
                "`oracle` must be true or false, got `{v}`"
            )))
        }
    };

    let cfg = SweepConfig {
        family,
        grid,
        schemes,
        repetitions,
        budget,
        master_seed,
        oracle,
        settings,
    };
    cfg.validate().map_err(|e| match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    })?;
    Ok(cfg)
}

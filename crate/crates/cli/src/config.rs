//! Flat `key = value` experiment configs.
//!
//! One assignment per line, `#` starts a comment. Coupling values use the
//! literal grammar of [`pgt_core::parse_coupling`] (integers, rationals,
//! decimals, `sqrt(a/b)`), so irrational couplings stay exact. Unknown keys
//! are rejected before any computation starts.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use pgt_core::{parse_coupling, ChainSpec, ExactValue, FitOptions, SearchBudget};
use rug::ops::Pow;
use rug::Integer;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// A parsed and validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub spec: ChainSpec,
    pub precision_bits: u32,
    pub q_limit: Integer,
    pub max_records: usize,
    pub fit: FitOptions,
    /// Dataset path: written by `scan`, read by `fit`.
    pub csv: Option<PathBuf>,
    /// Plot path used when `--plot` is given.
    pub svg: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn budget(&self) -> SearchBudget {
        SearchBudget {
            q_limit: self.q_limit.clone(),
            max_records: self.max_records,
            precision_bits: self.precision_bits,
            ..Default::default()
        }
    }
}

const KEYS: &[&str] = &[
    "family",
    "n_spins",
    "n_cells",
    "j",
    "j_list",
    "j1",
    "j2",
    "v",
    "w",
    "g",
    "v_list",
    "w_list",
    "g_list",
    "source",
    "target",
    "precision_bits",
    "q_limit",
    "max_records",
    "fit_eps_cut",
    "fit_min_points",
    "fit_tolerance",
    "fit_r2_min",
    "csv",
    "svg",
];

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut kv: BTreeMap<String, String> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return err(format!("line {}: expected `key = value`", lineno + 1));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KEYS.contains(&key.as_str()) {
            return err(format!("line {}: unknown key `{key}`", lineno + 1));
        }
        if value.is_empty() {
            return err(format!("line {}: empty value for `{key}`", lineno + 1));
        }
        if kv.insert(key.clone(), value).is_some() {
            return err(format!("line {}: duplicate key `{key}`", lineno + 1));
        }
    }

    let spec = build_spec(&kv)?;

    let mut precision_bits = parse_uint(&kv, "precision_bits", 320)? as u32;
    if let Ok(v) = std::env::var("PGT_PRECISION_BITS") {
        precision_bits = v
            .parse()
            .map_err(|_| ConfigError(format!("PGT_PRECISION_BITS: bad value `{v}`")))?;
    }
    if !(64..=1 << 20).contains(&precision_bits) {
        return err("precision_bits must be between 64 and 2^20");
    }

    let q_limit = match kv.get("q_limit") {
        Some(v) => parse_big_uint(v).ok_or_else(|| ConfigError(format!("q_limit: bad value `{v}`")))?,
        None => Integer::from(3 * 10u64.pow(12)),
    };
    if q_limit < 1 {
        return err("q_limit must be positive");
    }
    let max_records = parse_uint(&kv, "max_records", 96)? as usize;

    let defaults = FitOptions::default();
    let fit = FitOptions {
        eps_cut: parse_float(&kv, "fit_eps_cut", defaults.eps_cut)?,
        min_points: parse_uint(&kv, "fit_min_points", defaults.min_points as u64)? as usize,
        tolerance: parse_float(&kv, "fit_tolerance", defaults.tolerance)?,
        r2_min: parse_float(&kv, "fit_r2_min", defaults.r2_min)?,
        ..defaults
    };
    if fit.eps_cut <= 0.0 || fit.eps_cut >= 1.0 {
        return err("fit_eps_cut must be in (0, 1)");
    }

    Ok(ExperimentConfig {
        spec,
        precision_bits,
        q_limit,
        max_records,
        fit,
        csv: kv.get("csv").map(PathBuf::from),
        svg: kv.get("svg").map(PathBuf::from),
    })
}

fn build_spec(kv: &BTreeMap<String, String>) -> Result<ChainSpec, ConfigError> {
    let Some(family) = kv.get("family") else {
        return err("missing required key `family`");
    };
    let forbid = |keys: &[&str]| -> Result<(), ConfigError> {
        for k in keys {
            if kv.contains_key(*k) {
                return err(format!("key `{k}` does not apply to family `{family}`"));
            }
        }
        Ok(())
    };
    let mut spec = match family.as_str() {
        "xx" => {
            forbid(&["n_cells", "j1", "j2", "v", "w", "g", "v_list", "w_list", "g_list"])?;
            let n = require_uint(kv, "n_spins")? as usize;
            if let Some(list) = kv.get("j_list") {
                if kv.contains_key("j") {
                    return err("give either `j` or `j_list`, not both");
                }
                ChainSpec::xx_bonds(n, coupling_list(list, "j_list")?)
            } else {
                let j = coupling(kv, "j", "1")?;
                ChainSpec::xx_uniform(n, j)
            }
        }
        "staggered" => {
            forbid(&["n_cells", "j", "j_list", "v", "w", "g", "v_list", "w_list", "g_list"])?;
            let n = require_uint(kv, "n_spins")? as usize;
            ChainSpec::staggered(n, coupling(kv, "j1", "1")?, coupling(kv, "j2", "1")?)
        }
        "ssh" => {
            forbid(&["n_spins", "j", "j_list", "j1", "j2"])?;
            let n_c = require_uint(kv, "n_cells")? as usize;
            if kv.contains_key("v_list") || kv.contains_key("w_list") || kv.contains_key("g_list") {
                let v = coupling_list(kv.get("v_list").map(String::as_str).unwrap_or("1"), "v_list")?;
                let w = coupling_list(kv.get("w_list").map(String::as_str).unwrap_or("1"), "w_list")?;
                let g = coupling_list(kv.get("g_list").map(String::as_str).unwrap_or("1"), "g_list")?;
                ChainSpec::ssh_cells(v, w, g)
            } else {
                ChainSpec::ssh_uniform(
                    n_c,
                    coupling(kv, "v", "1")?,
                    coupling(kv, "w", "1")?,
                    coupling(kv, "g", "1")?,
                )
            }
        }
        other => return err(format!("unknown family `{other}` (expected xx, staggered, ssh)")),
    }
    .map_err(|e| ConfigError(format!("invalid chain: {e}")))?;

    if kv.contains_key("source") || kv.contains_key("target") {
        let source = match kv.get("source") {
            Some(_) => require_uint(kv, "source")? as usize,
            None => spec.source,
        };
        let target = match kv.get("target") {
            Some(_) => require_uint(kv, "target")? as usize,
            None => spec.target,
        };
        spec = spec
            .with_sites(source, target)
            .map_err(|e| ConfigError(format!("invalid sites: {e}")))?;
    }
    Ok(spec)
}

fn coupling(kv: &BTreeMap<String, String>, key: &str, default: &str) -> Result<ExactValue, ConfigError> {
    let lit = kv.get(key).map(String::as_str).unwrap_or(default);
    parse_coupling(lit).map_err(|e| ConfigError(format!("{key}: {e}")))
}

fn coupling_list(list: &str, key: &str) -> Result<Vec<ExactValue>, ConfigError> {
    list.split(',')
        .map(|s| parse_coupling(s.trim()).map_err(|e| ConfigError(format!("{key}: {e}"))))
        .collect()
}

fn require_uint(kv: &BTreeMap<String, String>, key: &str) -> Result<u64, ConfigError> {
    match kv.get(key) {
        Some(v) => v
            .parse()
            .map_err(|_| ConfigError(format!("{key}: bad integer `{v}`"))),
        None => err(format!("missing required key `{key}`")),
    }
}

fn parse_uint(kv: &BTreeMap<String, String>, key: &str, default: u64) -> Result<u64, ConfigError> {
    match kv.get(key) {
        Some(v) => v
            .parse()
            .map_err(|_| ConfigError(format!("{key}: bad integer `{v}`"))),
        None => Ok(default),
    }
}

fn parse_float(kv: &BTreeMap<String, String>, key: &str, default: f64) -> Result<f64, ConfigError> {
    match kv.get(key) {
        Some(v) => match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => err(format!("{key}: bad number `{v}`")),
        },
        None => Ok(default),
    }
}

/// Decimal integer with optional `1e12`-style exponent (integral mantissa).
fn parse_big_uint(s: &str) -> Option<Integer> {
    if let Some((mant, exp)) = s.split_once(['e', 'E']) {
        let mant: Integer = mant.parse().ok()?;
        let exp: u32 = exp.parse().ok()?;
        if mant <= 0 {
            return None;
        }
        return Some(mant * Integer::from(10u32).pow(exp));
    }
    let v: Integer = s.parse().ok()?;
    (v > 0).then_some(v)
}

//! Value parsers for numeric flags and the inline instance shorthand.

use std::path::Path;

use bobw_core::instance::load_instance;
use bobw_core::{BanditError, StochasticInstance};

/// Real number; `e` stands for Euler's number.
pub fn real(s: &str) -> Result<f64, String> {
    match s.trim() {
        "e" => Ok(std::f64::consts::E),
        t => t
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("{s:?} is not a finite number")),
    }
}

/// Non-negative integer, also written in scientific form such as `1e6`.
pub fn count(s: &str) -> Result<u64, String> {
    let t = s.trim();
    if let Ok(n) = t.parse::<u64>() {
        return Ok(n);
    }
    match t.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 => Ok(v as u64),
        _ => Err(format!("{s:?} is not a non-negative integer")),
    }
}

pub fn arms(s: &str) -> Result<usize, String> {
    count(s).map(|n| n as usize)
}

/// `bern:L=<arms>,delta=<gap>` or the path of an instance file.
///
/// The shorthand builds arm 0 with mean 1/2 and `L − 1` arms with mean
/// `1/2 − delta`.
pub fn instance(s: &str) -> Result<StochasticInstance, BanditError> {
    let Some(rest) = s.strip_prefix("bern:") else {
        return load_instance(Path::new(s));
    };
    let bad = |msg: String| BanditError::InvalidParameter(format!("instance {s:?}: {msg}"));
    let (mut l, mut delta) = (None, None);
    for part in rest.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, got {part:?}")))?;
        match key.trim() {
            "L" => l = Some(arms(value).map_err(bad)?),
            "delta" => delta = Some(real(value).map_err(bad)?),
            other => return Err(bad(format!("unknown key {other:?}"))),
        }
    }
    let l = l.ok_or_else(|| bad("missing L".into()))?;
    let delta = delta.ok_or_else(|| bad("missing delta".into()))?;
    StochasticInstance::synthetic_bernoulli(l, delta)
}

/// Fixed-width rendering for terminal summaries.
pub fn show(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return x.to_string();
    }
    let a = x.abs();
    if !(1e-4..1e12).contains(&a) {
        return format!("{x:.6e}");
    }
    let s = format!("{x:.10}");
    let s = s.trim_end_matches('0');
    s.trim_end_matches('.').to_string()
}

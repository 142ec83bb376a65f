//! Dataset CSV: header `q,t,P,epsilon`, one approximation step per row in
//! increasing q, numeric fields as decimal strings carrying the full
//! working precision so a later `fit` reproduces in-process results.

use std::fmt::Write as _;

use pgt_core::ScalingPoint;
use rug::{Float, Integer};

pub const HEADER: &str = "q,t,P,epsilon";

/// Significant decimal digits needed to round-trip `prec` bits.
fn digits(prec: u32) -> usize {
    (prec as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2
}

fn fmt_float(x: &Float, prec: u32) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    // rug renders as `d.dddde±exp`; keep it verbatim (deterministic).
    x.to_string_radix(10, Some(digits(prec)))
}

pub fn render(points: &[ScalingPoint], prec: u32) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for pt in points {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            pt.q,
            fmt_float(&pt.t, prec),
            fmt_float(&pt.probability, prec),
            fmt_float(&pt.epsilon, prec)
        );
    }
    out
}

pub fn parse(text: &str, prec: u32) -> Result<Vec<ScalingPoint>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == HEADER => {}
        _ => return Err(format!("missing `{HEADER}` header")),
    }
    let mut points = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(format!("row {}: expected 4 fields, got {}", i + 1, fields.len()));
        }
        let q: Integer = fields[0]
            .trim()
            .parse()
            .map_err(|_| format!("row {}: bad q `{}`", i + 1, fields[0]))?;
        let mut reals = fields[1..].iter().map(|f| {
            Float::parse(f.trim())
                .map(|v| Float::with_val(prec, v))
                .map_err(|_| format!("row {}: bad number `{f}`", i + 1))
        });
        let t = reals.next().unwrap()?;
        let probability = reals.next().unwrap()?;
        let epsilon = reals.next().unwrap()?;
        points.push(ScalingPoint {
            q,
            t,
            probability,
            epsilon,
        });
    }
    Ok(points)
}

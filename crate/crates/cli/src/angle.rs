//! Angle literals: decimal radians or rational multiples of π.

use std::f64::consts::PI;

/// Parses `0.5`, `pi`, `-pi`, `pi/6`, `-2pi/3`, `2*pi/3`, `π/4`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim().replace('π', "pi").replace(' ', "");
    if !t.contains("pi") {
        return t
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("invalid angle '{s}'"));
    }
    let bad = || format!("invalid angle '{s}'");
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (t.as_str(), None),
    };
    let coef = num.strip_suffix("pi").ok_or_else(bad)?;
    let coef = coef.strip_suffix('*').unwrap_or(coef);
    let k = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    let d = match den {
        Some(d) => d.parse::<f64>().map_err(|_| bad())?,
        None => 1.0,
    };
    if d == 0.0 || !k.is_finite() || !d.is_finite() {
        return Err(bad());
    }
    Ok(k * PI / d)
}

//! Phase arithmetic on the circle.

use std::f64::consts::{PI, TAU};

/// Reduces a phase to `[0, 2π)`.
pub fn wrap(phase: f64) -> f64 {
    let r = phase.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduces a phase to `(-π, π]`.
pub fn wrap_signed(phase: f64) -> f64 {
    let r = wrap(phase);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Shortest distance between two phases on the circle, in `[0, π]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    wrap_signed(a - b).abs()
}

/// Symmetric Hausdorff distance between two multisets of phases on the circle.
///
/// Robust against the `0 ≡ 2π` wrap, which plain sorting is not.
pub fn spectrum_distance(a: &[f64], b: &[f64]) -> f64 {
    let one_way = |x: &[f64], y: &[f64]| {
        x.iter()
            .map(|&p| y.iter().map(|&q| circular_distance(p, q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    one_way(a, b).max(one_way(b, a))
}

/// Parses an angle written as a plain number or as a multiple of π:
/// `0.25pi`, `pi`, `-pi/3`, `2pi/3`, `pi/6`.
pub fn parse_angle(text: &str) -> Option<f64> {
    let s = text.trim();
    if let Ok(v) = s.parse::<f64>() {
        return Some(v);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest.trim()),
        None => (false, s),
    };
    let (numer, denom) = match body.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim().parse::<f64>().ok()?)),
        None => (body, None),
    };
    let coeff = numer.strip_suffix("pi")?.trim();
    let coeff = match coeff {
        "" => 1.0,
        c => c.trim_end_matches('*').parse::<f64>().ok()?,
    };
    let mut value = coeff * PI;
    if let Some(d) = denom {
        if d == 0.0 {
            return None;
        }
        value /= d;
    }
    Some(if neg { -value } else { value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_stays_in_range() {
        assert_eq!(wrap(-1e-300), 0.0);
        assert!((wrap(-PI / 2.0) - 1.5 * PI).abs() < 1e-15);
        assert!((wrap(5.0 * PI) - PI).abs() < 1e-12);
    }

    #[test]
    fn distance_handles_wrap() {
        assert!(circular_distance(1e-9, TAU - 1e-9) < 3e-9);
        let d = spectrum_distance(&[1e-15, TAU - 1e-15], &[1e-15, 2e-15]);
        assert!(d < 1e-14);
    }

    #[test]
    fn angles_with_pi_suffix() {
        assert_eq!(parse_angle("0.5"), Some(0.5));
        assert!((parse_angle("0.25pi").unwrap() - PI / 4.0).abs() < 1e-15);
        assert!((parse_angle("pi/6").unwrap() - PI / 6.0).abs() < 1e-15);
        assert!((parse_angle("-2pi/3").unwrap() + 2.0 * PI / 3.0).abs() < 1e-15);
        assert!((parse_angle("pi").unwrap() - PI).abs() < 1e-15);
        assert_eq!(parse_angle("pie"), None);
        assert_eq!(parse_angle("pi/0"), None);
    }
}

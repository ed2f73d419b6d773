//! Quantity strings such as `"2pi*0.59 GHz"`, `"600 ns"` or `"25 km"`.
//!
//! Every key has a fixed [`Dimension`]. Angular keys are stored in rad/s:
//! a plain frequency (`"0.59 GHz"`) is read as an ordinary frequency and
//! multiplied by 2π, the `2pi*` prefix spells the same thing explicitly, and
//! `rad/s` is taken verbatim. Rate keys are stored in Hz (s⁻¹) and only pick
//! up a 2π when the prefix is written.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    /// Angular frequency, stored in rad/s.
    Angular,
    /// Ordinary frequency or rate, stored in Hz.
    Rate,
    /// Seconds.
    Time,
    /// Meters.
    Length,
    /// Tesla.
    Field,
    /// Meters per second.
    Speed,
    Dimensionless,
    Integer,
}

impl Dimension {
    pub fn canonical_unit(self) -> Option<&'static str> {
        match self {
            Dimension::Angular => Some("rad/s"),
            Dimension::Rate => Some("Hz"),
            Dimension::Time => Some("s"),
            Dimension::Length => Some("m"),
            Dimension::Field => Some("T"),
            Dimension::Speed => Some("m/s"),
            Dimension::Dimensionless | Dimension::Integer => None,
        }
    }
}

fn frequency_scale(unit: &str) -> Option<f64> {
    Some(match unit {
        "Hz" => 1.0,
        "kHz" => 1e3,
        "MHz" => 1e6,
        "GHz" => 1e9,
        _ => return None,
    })
}

fn time_scale(unit: &str) -> Option<f64> {
    Some(match unit {
        "s" => 1.0,
        "ms" => 1e-3,
        "us" | "µs" => 1e-6,
        "ns" => 1e-9,
        "ps" => 1e-12,
        _ => return None,
    })
}

fn length_scale(unit: &str) -> Option<f64> {
    Some(match unit {
        "m" => 1.0,
        "km" => 1e3,
        _ => return None,
    })
}

/// Parses a quantity string for a key of the given dimension and returns
/// the value in internal units.
pub fn parse_quantity(key: &str, dim: Dimension, raw: &str) -> Result<f64> {
    let bad = |reason: &str| Error::BadValue {
        key: key.to_string(),
        value: raw.to_string(),
        reason: reason.to_string(),
    };

    let text = raw.trim();
    let (two_pi, rest) = match text
        .strip_prefix("2pi*")
        .or_else(|| text.strip_prefix("2π*"))
    {
        Some(rest) => (true, rest.trim_start()),
        None => (false, text),
    };

    let mut parts = rest.split_whitespace();
    let number = parts.next().ok_or_else(|| bad("empty value"))?;
    let unit = parts.next();
    if parts.next().is_some() {
        return Err(bad("expected `<number> <unit>`"));
    }
    let x: f64 = number.parse().map_err(|_| bad("not a number"))?;
    if !x.is_finite() {
        return Err(bad("not finite"));
    }

    let unit = match (dim, unit) {
        (Dimension::Dimensionless | Dimension::Integer, None) => {
            if two_pi {
                return Err(bad("2pi* prefix on a dimensionless key"));
            }
            return Ok(x);
        }
        (Dimension::Dimensionless | Dimension::Integer, Some(_)) => {
            return Err(bad("dimensionless key takes no unit"))
        }
        (_, None) => {
            return Err(Error::MissingUnit {
                key: key.to_string(),
                value: raw.to_string(),
            })
        }
        (_, Some(u)) => u,
    };

    let prefix = if two_pi { 2.0 * PI } else { 1.0 };
    match dim {
        Dimension::Angular => {
            if unit == "rad/s" {
                if two_pi {
                    return Err(bad("2pi* prefix cannot be combined with rad/s"));
                }
                return Ok(x);
            }
            let scale = frequency_scale(unit).ok_or_else(|| bad("expected Hz, kHz, MHz, GHz or rad/s"))?;
            Ok(2.0 * PI * x * scale)
        }
        Dimension::Rate => {
            let scale = frequency_scale(unit).ok_or_else(|| bad("expected Hz, kHz, MHz or GHz"))?;
            Ok(prefix * x * scale)
        }
        Dimension::Time => {
            reject_prefix(two_pi, &bad)?;
            time_scale(unit)
                .map(|s| x * s)
                .ok_or_else(|| bad("expected s, ms, us, ns or ps"))
        }
        Dimension::Length => {
            reject_prefix(two_pi, &bad)?;
            length_scale(unit)
                .map(|s| x * s)
                .ok_or_else(|| bad("expected m or km"))
        }
        Dimension::Field => {
            reject_prefix(two_pi, &bad)?;
            if unit == "T" {
                Ok(x)
            } else {
                Err(bad("expected T"))
            }
        }
        Dimension::Speed => {
            reject_prefix(two_pi, &bad)?;
            match unit {
                "m/s" => Ok(x),
                "km/s" => Ok(x * 1e3),
                _ => Err(bad("expected m/s or km/s")),
            }
        }
        Dimension::Dimensionless | Dimension::Integer => unreachable!(),
    }
}

fn reject_prefix(two_pi: bool, bad: &dyn Fn(&str) -> Error) -> Result<()> {
    if two_pi {
        Err(bad("2pi* prefix only applies to frequencies"))
    } else {
        Ok(())
    }
}

/// Formats a value in internal units so that [`parse_quantity`] returns the
/// identical bit pattern.
pub fn format_quantity(dim: Dimension, value: f64) -> String {
    match dim.canonical_unit() {
        Some(unit) => format!("{value:e} {unit}"),
        None => format!("{value:e}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angular_prefix_and_plain_agree() {
        let a = parse_quantity("gamma_r", Dimension::Angular, "2pi*0.59 GHz").unwrap();
        let b = parse_quantity("gamma_r", Dimension::Angular, "0.59 GHz").unwrap();
        assert_eq!(a, b);
        assert!((a - 3.7070e9).abs() < 1e5);
    }

    #[test]
    fn rate_keys_keep_ordinary_frequency() {
        let s = parse_quantity("sigma_Q", Dimension::Rate, "50 kHz").unwrap();
        assert_eq!(s, 5.0e4);
        let w = parse_quantity("sigma_Q", Dimension::Rate, "2pi*50 kHz").unwrap();
        assert!((w - 2.0 * PI * 5.0e4).abs() < 1e-9);
    }

    #[test]
    fn missing_unit_is_rejected() {
        let err = parse_quantity("kappa", Dimension::Angular, "100").unwrap_err();
        assert!(matches!(err, Error::MissingUnit { .. }));
    }

    #[test]
    fn times_and_lengths() {
        assert!((parse_quantity("t", Dimension::Time, "600 ns").unwrap() - 6e-7).abs() < 1e-20);
        assert!((parse_quantity("t", Dimension::Time, "0.2 us").unwrap() - 2e-7).abs() < 1e-20);
        assert_eq!(parse_quantity("l", Dimension::Length, "25 km").unwrap(), 25e3);
        assert!(parse_quantity("l", Dimension::Length, "25 mi").is_err());
        assert!(parse_quantity("l", Dimension::Length, "2pi*25 km").is_err());
    }

    #[test]
    fn canonical_format_round_trips() {
        for (dim, v) in [
            (Dimension::Angular, 2.0 * PI * 0.59e9),
            (Dimension::Rate, 5.0e4),
            (Dimension::Time, 6.0e-7),
            (Dimension::Length, 1.0e6 / 3.0),
            (Dimension::Dimensionless, 0.1 + 0.2),
        ] {
            let s = format_quantity(dim, v);
            assert_eq!(parse_quantity("k", dim, &s).unwrap().to_bits(), v.to_bits(), "{s}");
        }
    }
}

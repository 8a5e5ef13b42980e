//! Angle literals: symbolic multiples of pi (`pi`, `-pi/2`, `3pi/4`, `0.5*pi`)
//! or plain decimal radians.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub fn parse_angle(text: &str) -> Result<f64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::InvalidAngle(text.to_string());
    if s.is_empty() {
        return Err(bad());
    }
    let value = match s.find("pi") {
        None => s.parse::<f64>().map_err(|_| bad())?,
        Some(pos) => {
            let head = s[..pos].trim_end_matches('*');
            let tail = &s[pos + 2..];
            let coeff = match head {
                "" | "+" => 1.0,
                "-" => -1.0,
                h => h.parse::<f64>().map_err(|_| bad())?,
            };
            let divisor = match tail {
                "" => 1.0,
                t => t
                    .strip_prefix('/')
                    .and_then(|d| d.parse::<f64>().ok())
                    .filter(|d| *d != 0.0)
                    .ok_or_else(bad)?,
            };
            coeff * PI / divisor
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

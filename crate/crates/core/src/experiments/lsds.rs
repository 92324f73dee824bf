//! Right shift on `L^2((0, inf); s ds)`, whose norm is computed in closed form
//! for piecewise-constant functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `value` on the interval `(start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub value: f64,
}

/// `||S(t) f||^2 = sum |v|^2 ((b + t)^2 - (a + t)^2) / 2` over the pieces.
pub fn shift_lsds_norm(t: f64, pieces: &[Piece]) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("shift time {t} must be nonnegative")));
    }
    pieces
        .iter()
        .map(|p| {
            if !(p.start >= 0.0 && p.start < p.end && p.end.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "piece ({}, {}) is not a bounded interval in (0, inf)",
                    p.start, p.end
                )));
            }
            let (a, b) = (p.start + t, p.end + t);
            Ok(p.value * p.value * (b * b - a * a) / 2.0)
        })
        .sum()
}

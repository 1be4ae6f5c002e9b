use serde::{Deserialize, Serialize};

use super::Spin;
use crate::error::{contract, Result};

/// Energies in integer units of `10^-precision`; the coupling J is `10^precision`.
pub type Energy = i64;

/// Largest supported decimal precision (J = 10^9 keeps every lattice energy far from overflow).
pub const MAX_PRECISION: u32 = 9;

/// External fields `0 < h1 < h2 < h3 < 1` stored as exact integers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ParamsRepr", into = "ParamsRepr")]
pub struct ModelParams {
    h: [Energy; 3],
    precision: u32,
}

#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    precision: u32,
    h: [String; 3],
}

impl ModelParams {
    /// Parses decimal strings such as `"0.45"` exactly at the given precision.
    pub fn from_decimals(h: [&str; 3], precision: u32) -> Result<Self> {
        let units = [
            parse_decimal(h[0], precision)?,
            parse_decimal(h[1], precision)?,
            parse_decimal(h[2], precision)?,
        ];
        Self::from_units(units, precision)
    }

    pub fn from_units(h: [Energy; 3], precision: u32) -> Result<Self> {
        if precision > MAX_PRECISION {
            return Err(contract(format!("precision {precision} exceeds {MAX_PRECISION}")));
        }
        let j = 10_i64.pow(precision);
        if !(0 < h[0] && h[0] < h[1] && h[1] < h[2] && h[2] < j) {
            return Err(contract(format!(
                "fields must satisfy 0 < h1 < h2 < h3 < 1, got {}, {}, {}",
                format_energy(h[0], precision),
                format_energy(h[1], precision),
                format_energy(h[2], precision)
            )));
        }
        Ok(Self { h, precision })
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// J in energy units.
    pub fn coupling(&self) -> Energy {
        10_i64.pow(self.precision)
    }

    #[inline]
    pub fn field(&self, s: Spin) -> Energy {
        self.h[s.index()]
    }

    pub fn fields(&self) -> [Energy; 3] {
        self.h
    }

    /// `h_j - h_i`.
    pub fn gap(&self, i: Spin, j: Spin) -> Energy {
        self.field(j) - self.field(i)
    }

    pub fn to_f64(&self, e: Energy) -> f64 {
        e as f64 / self.coupling() as f64
    }

    pub fn format(&self, e: Energy) -> String {
        format_energy(e, self.precision)
    }
}

impl TryFrom<ParamsRepr> for ModelParams {
    type Error = crate::Error;
    fn try_from(r: ParamsRepr) -> Result<Self> {
        Self::from_decimals([&r.h[0], &r.h[1], &r.h[2]], r.precision)
    }
}

impl From<ModelParams> for ParamsRepr {
    fn from(p: ModelParams) -> Self {
        ParamsRepr { precision: p.precision, h: p.h.map(|x| p.format(x)) }
    }
}

/// Exact decimal to integer units; rejects strings with more fractional
/// digits than `precision` (after trimming trailing zeros).
pub fn parse_decimal(text: &str, precision: u32) -> Result<Energy> {
    let s = text.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    let valid = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    if (int_part.is_empty() && frac_part.is_empty()) || !valid(int_part) || !valid(frac_part) {
        return Err(contract(format!("'{text}' is not a decimal number")));
    }
    let frac = frac_part.trim_end_matches('0');
    if frac.len() > precision as usize {
        return Err(contract(format!(
            "'{text}' needs {} decimal digits but precision is {precision}",
            frac.len()
        )));
    }
    let scale = 10_i64.pow(precision);
    let int: i64 = if int_part.is_empty() { 0 } else { int_part.parse().map_err(|_| contract(format!("'{text}' out of range")))? };
    let mut f: i64 = if frac.is_empty() { 0 } else { frac.parse().unwrap() };
    f *= 10_i64.pow(precision - frac.len() as u32);
    let v = int
        .checked_mul(scale)
        .and_then(|x| x.checked_add(f))
        .ok_or_else(|| contract(format!("'{text}' out of range")))?;
    Ok(if neg { -v } else { v })
}

/// Inverse of [`parse_decimal`], with at least one fractional digit.
pub fn format_energy(e: Energy, precision: u32) -> String {
    let scale = 10_i64.pow(precision);
    let sign = if e < 0 { "-" } else { "" };
    let a = e.unsigned_abs();
    let int = a / scale as u64;
    let frac = a % scale as u64;
    if precision == 0 {
        return format!("{sign}{int}.0");
    }
    let digits = format!("{frac:0width$}", width = precision as usize);
    let trimmed = digits.trim_end_matches('0');
    let trimmed = if trimmed.is_empty() { "0" } else { trimmed };
    format!("{sign}{int}.{trimmed}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_parse_exactly() {
        assert_eq!(parse_decimal("0.45", 2).unwrap(), 45);
        assert_eq!(parse_decimal("0.450", 2).unwrap(), 45);
        assert_eq!(parse_decimal(".9", 3).unwrap(), 900);
        assert_eq!(parse_decimal("-26.1", 2).unwrap(), -2610);
        assert!(parse_decimal("0.005", 2).is_err());
        assert!(parse_decimal("abc", 2).is_err());
        assert!(parse_decimal("", 2).is_err());
    }

    #[test]
    fn formatting_round_trips() {
        for (e, d) in [(-2610, 2), (605, 2), (0, 2), (5, 3), (-1, 1), (7, 0)] {
            assert_eq!(parse_decimal(&format_energy(e, d), d).unwrap(), e);
        }
        assert_eq!(format_energy(605, 2), "6.05");
        assert_eq!(format_energy(-2610, 2), "-26.1");
    }

    #[test]
    fn field_ordering_is_enforced() {
        assert!(ModelParams::from_decimals(["0.05", "0.45", "0.90"], 2).is_ok());
        assert!(ModelParams::from_decimals(["0.05", "0.95", "0.90"], 2).is_err());
        assert!(ModelParams::from_decimals(["0", "0.45", "0.90"], 2).is_err());
        assert!(ModelParams::from_decimals(["0.05", "0.45", "1.0"], 2).is_err());
    }

    #[test]
    fn serde_uses_decimal_strings() {
        let p = ModelParams::from_decimals(["0.05", "0.45", "0.9"], 2).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"precision":2,"h":["0.05","0.45","0.9"]}"#);
        let back: ModelParams = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }
}

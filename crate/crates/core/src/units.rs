//! Physical quantities written as `"<number> <unit>"` strings, normalized to
//! SI.
//!
//! A unit expression is a sequence of atoms joined by `/` (divide) and
//! `*`, `.` or whitespace (multiply). Each atom is an optional SI prefix
//! (`G M k c m u µ n`), a base unit and an optional integer exponent, e.g.
//! `uA/cm2`, `m^2/s`, `mol-1 m3 s-1`, `g/m2/h`.
//!
//! Base units: `m g s A mol L Pa J N C % h min d day yr year`.

use std::fmt;

/// Exponents of (m, kg, s, A, mol).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dimension(pub [i8; 5]);

impl Dimension {
    pub const NONE: Dimension = Dimension([0, 0, 0, 0, 0]);
    pub const LENGTH: Dimension = Dimension([1, 0, 0, 0, 0]);
    pub const TIME: Dimension = Dimension([0, 0, 1, 0, 0]);
    pub const DIFFUSIVITY: Dimension = Dimension([2, 0, -1, 0, 0]);
    pub const PRESSURE: Dimension = Dimension([-1, 1, -2, 0, 0]);
    pub const ENERGY_PER_AREA: Dimension = Dimension([0, 1, -2, 0, 0]);
    pub const CURRENT_DENSITY: Dimension = Dimension([-2, 0, 0, 1, 0]);
    pub const MOLAR_MASS: Dimension = Dimension([0, 1, 0, 0, -1]);
    pub const DENSITY: Dimension = Dimension([-3, 1, 0, 0, 0]);
    pub const CONCENTRATION: Dimension = Dimension([-3, 0, 0, 0, 1]);
    pub const RATE: Dimension = Dimension([0, 0, -1, 0, 0]);
    pub const SECOND_ORDER_RATE: Dimension = Dimension([3, 0, -1, 0, -1]);
    pub const DEPOSITION: Dimension = Dimension([-2, 1, -1, 0, 0]);

    fn mul(self, other: Dimension, power: i8) -> Dimension {
        let mut d = self.0;
        for (a, b) in d.iter_mut().zip(other.0) {
            *a += b * power;
        }
        Dimension(d)
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["m", "kg", "s", "A", "mol"];
        let parts: Vec<String> = names
            .iter()
            .zip(self.0)
            .filter(|(_, e)| *e != 0)
            .map(|(n, e)| if e == 1 { n.to_string() } else { format!("{n}^{e}") })
            .collect();
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join(" "))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitError(pub String);

impl fmt::Display for UnitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UnitError {}

fn base(name: &str) -> Option<(f64, Dimension)> {
    const DAY: f64 = 86_400.0;
    Some(match name {
        "m" => (1.0, Dimension::LENGTH),
        "g" => (1e-3, Dimension([0, 1, 0, 0, 0])),
        "s" => (1.0, Dimension::TIME),
        "A" => (1.0, Dimension([0, 0, 0, 1, 0])),
        "mol" => (1.0, Dimension([0, 0, 0, 0, 1])),
        "L" => (1e-3, Dimension([3, 0, 0, 0, 0])),
        "Pa" => (1.0, Dimension::PRESSURE),
        "J" => (1.0, Dimension([2, 1, -2, 0, 0])),
        "N" => (1.0, Dimension([1, 1, -2, 0, 0])),
        "C" => (1.0, Dimension([0, 0, 1, 1, 0])),
        "%" => (0.01, Dimension::NONE),
        "min" => (60.0, Dimension::TIME),
        "h" => (3600.0, Dimension::TIME),
        "d" | "day" | "days" => (DAY, Dimension::TIME),
        "yr" | "year" | "years" => (365.25 * DAY, Dimension::TIME),
        _ => return None,
    })
}

fn prefix(c: char) -> Option<f64> {
    Some(match c {
        'G' => 1e9,
        'M' => 1e6,
        'k' => 1e3,
        'c' => 1e-2,
        'm' => 1e-3,
        'u' | 'µ' => 1e-6,
        'n' => 1e-9,
        _ => return None,
    })
}

fn atom(token: &str) -> Result<(f64, Dimension), UnitError> {
    let split = token
        .find(|c: char| c == '^' || c == '-' || c.is_ascii_digit())
        .unwrap_or(token.len());
    let (name, exp) = token.split_at(split);
    let exp = exp.trim_start_matches('^');
    let power: i8 = if exp.is_empty() {
        1
    } else {
        exp.parse().map_err(|_| UnitError(format!("bad exponent in unit {token:?}")))?
    };
    let (factor, dim) = match base(name) {
        Some(b) => b,
        None => {
            let mut chars = name.chars();
            let p = chars.next().and_then(prefix);
            match (p, base(chars.as_str())) {
                (Some(p), Some((f, d))) => (p * f, d),
                _ => return Err(UnitError(format!("unknown unit {name:?}"))),
            }
        }
    };
    Ok((factor.powi(power as i32), Dimension::NONE.mul(dim, power)))
}

/// Conversion factor to SI and dimension of a unit expression.
pub fn parse_unit(expr: &str) -> Result<(f64, Dimension), UnitError> {
    let expr = expr.trim();
    if expr.is_empty() || expr == "-" || expr == "1" {
        return Ok((1.0, Dimension::NONE));
    }
    let mut factor = 1.0;
    let mut dim = Dimension::NONE;
    for (k, group) in expr.split('/').enumerate() {
        let sign = if k == 0 { 1 } else { -1 };
        let mut empty = true;
        for tok in group.split(|c: char| c == '*' || c == '.' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            empty = false;
            if k == 0 && tok == "1" {
                continue;
            }
            let (f, d) = atom(tok)?;
            factor *= f.powi(sign);
            dim = dim.mul(d, sign as i8);
        }
        if empty {
            return Err(UnitError(format!("empty unit factor in {expr:?}")));
        }
    }
    Ok((factor, dim))
}

/// Parse `"<number> <unit>"` and convert to SI, checking the dimension.
pub fn parse_quantity(text: &str, expected: Dimension) -> Result<f64, UnitError> {
    let text = text.trim();
    let split = text
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit() || c == '.' || c == '+' || c == '-' || ((c == 'e' || c == 'E') && i > 0))
        })
        .map_or(text.len(), |(i, _)| i);
    let (num, unit) = text.split_at(split);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| UnitError(format!("cannot read a number from {text:?}")))?;
    let (factor, dim) = parse_unit(unit)?;
    if dim != expected {
        return Err(UnitError(format!(
            "{text:?} has dimension [{dim}] but [{expected}] is required"
        )));
    }
    Ok(value * factor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn current_density() {
        let v = parse_quantity("0.8 uA/cm2", Dimension::CURRENT_DENSITY).unwrap();
        assert_relative_eq!(v, 8e-3, max_relative = 1e-12);
    }

    #[test]
    fn assorted_units() {
        assert_relative_eq!(parse_quantity("29 GPa", Dimension::PRESSURE).unwrap(), 29e9);
        assert_relative_eq!(parse_quantity("20 mm", Dimension::LENGTH).unwrap(), 0.02);
        assert_relative_eq!(parse_quantity("2.7e-12 m2/s", Dimension::DIFFUSIVITY).unwrap(), 2.7e-12);
        assert_relative_eq!(parse_quantity("3 yr", Dimension::TIME).unwrap(), 3.0 * 365.25 * 86400.0);
        assert_relative_eq!(parse_quantity("35.5 g/mol", Dimension::MOLAR_MASS).unwrap(), 0.0355);
        assert_relative_eq!(
            parse_quantity("0.1 mol-1 m3 s-1", Dimension::SECOND_ORDER_RATE).unwrap(),
            0.1
        );
        assert_relative_eq!(parse_quantity("0.1 m3/mol/s", Dimension::SECOND_ORDER_RATE).unwrap(), 0.1);
        assert_relative_eq!(parse_quantity("35 g/L", Dimension::DENSITY).unwrap(), 35.0);
        assert_relative_eq!(
            parse_quantity("5.69 mg/cm2/h", Dimension::DEPOSITION).unwrap(),
            56.9e-3 / 3600.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(parse_quantity("0.22 %", Dimension::NONE).unwrap(), 0.0022);
        assert_relative_eq!(parse_quantity("67 J/m2", Dimension::ENERGY_PER_AREA).unwrap(), 67.0);
        assert_relative_eq!(parse_quantity("2e-4 1/s", Dimension::RATE).unwrap(), 2e-4);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let err = parse_quantity("3 MPa", Dimension::LENGTH).unwrap_err();
        assert!(err.0.contains("dimension"));
        assert!(parse_quantity("3 furlongs", Dimension::LENGTH).is_err());
        assert!(parse_quantity("mm", Dimension::LENGTH).is_err());
    }
}

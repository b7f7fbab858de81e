//! Exact rational arithmetic helpers.
//!
//! Memory sizes, replication factors, and rates are all exact rationals;
//! floats only appear in the optional decimal rendering.

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::{Error, Result};

/// The rational type used throughout the crate.
pub type Rat = Ratio<i128>;

/// Shorthand for an integer-valued rational.
pub fn rat(n: i128) -> Rat {
    Rat::from_integer(n)
}

/// Builds `p/q`, panicking on a zero denominator.
pub fn ratio(p: i128, q: i128) -> Rat {
    Rat::new(p, q)
}

/// Parses `"2"`, `"3/2"`, or `"1.5"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Parameter(format!("cannot parse rational from {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: i128 = p.trim().parse().map_err(|_| bad())?;
        let q: i128 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(Error::Parameter(format!("zero denominator in {s:?}")));
        }
        return Ok(Rat::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let negative = int.trim_start().starts_with('-');
        let int: i128 = if int.is_empty() || int == "-" {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: i128 = frac.parse().map_err(|_| bad())?;
        let scale = 10i128
            .checked_pow(frac.len() as u32)
            .ok_or_else(|| Error::Overflow(format!("decimal {s:?} has too many digits")))?;
        let frac_part = Rat::new(digits, scale);
        let int_part = rat(int);
        return Ok(if negative {
            int_part - frac_part
        } else {
            int_part + frac_part
        });
    }
    let n: i128 = s.parse().map_err(|_| bad())?;
    Ok(rat(n))
}

/// Renders a rational with `sig` significant digits, e.g. for CSV output.
pub fn format_decimal(x: Rat, sig: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let v = x.to_f64().unwrap_or(f64::NAN);
    if !v.is_finite() {
        return format!("{x}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (sig as i32 - 1 - magnitude).max(0) as usize;
    let mut out = format!("{v:.decimals$}");
    if out.contains('.') {
        while out.ends_with('0') {
            out.pop();
        }
        if out.ends_with('.') {
            out.pop();
        }
    }
    out
}

/// Returns the value as an exact integer if it is one.
pub fn as_integer(x: Rat) -> Option<i128> {
    if x.is_integer() {
        Some(x.to_integer())
    } else {
        None
    }
}

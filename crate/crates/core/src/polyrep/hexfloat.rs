//! C99 hexadecimal floating-point literals (`%a` style), lossless for `f64`.

use crate::error::{Error, Result};

/// Formats `x` as a hex float such as `0x1.8p+1` or `-0x0p+0`.
pub fn format_hex(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & ((1u64 << 52) - 1);
    if exp_bits == 0 && mant == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if exp_bits == 0 { (0, -1022) } else { (1, exp_bits - 1023) };
    let mut frac = format!("{mant:013x}");
    while frac.ends_with('0') {
        frac.pop();
    }
    let esign = if exp < 0 { '-' } else { '+' };
    if frac.is_empty() {
        format!("{sign}0x{lead}p{esign}{}", exp.abs())
    } else {
        format!("{sign}0x{lead}.{frac}p{esign}{}", exp.abs())
    }
}

/// Parses a hex float produced by [`format_hex`] (or any exact C99 literal
/// whose significand fits in 53 bits).
pub fn parse_hex(s: &str) -> Result<f64> {
    let bad = || Error::Parse {
        line: 0,
        msg: format!("malformed hex float '{s}'"),
    };
    let t = s.trim();
    match t {
        "nan" => return Ok(f64::NAN),
        "inf" => return Ok(f64::INFINITY),
        "-inf" => return Ok(f64::NEG_INFINITY),
        _ => {}
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let body = body
        .strip_prefix("0x")
        .or_else(|| body.strip_prefix("0X"))
        .ok_or_else(bad)?;
    let (mantissa, exp) = body.split_once(['p', 'P']).ok_or_else(bad)?;
    let exp: i32 = exp.parse().map_err(|_| bad())?;
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() || frac_part.len() > 13 {
        return Err(bad());
    }
    let int_val = u64::from_str_radix(int_part, 16).map_err(|_| bad())?;
    let frac_val = if frac_part.is_empty() {
        0
    } else {
        u64::from_str_radix(frac_part, 16).map_err(|_| bad())?
    };
    if int_val > 1 {
        return Err(bad());
    }
    let frac_bits = 4 * frac_part.len() as i32;
    let sig = (int_val << frac_bits) | frac_val;
    // sig * 2^(exp - frac_bits) is exact: sig < 2^53 and scaling by powers of two.
    let mut v = sig as f64;
    let mut e = exp - frac_bits;
    while e > 0 {
        let step = e.min(1000);
        v *= 2f64.powi(step);
        e -= step;
    }
    while e < 0 {
        let step = (-e).min(1000);
        v *= 2f64.powi(-step);
        e += step;
    }
    Ok(if neg { -v } else { v })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_literals() {
        assert_eq!(format_hex(1.0), "0x1p+0");
        assert_eq!(format_hex(3.0), "0x1.8p+1");
        assert_eq!(format_hex(-0.0), "-0x0p+0");
        assert_eq!(format_hex(0.1), "0x1.999999999999ap-4");
        assert_eq!(parse_hex("0x1.8p+1").unwrap(), 3.0);
    }

    #[test]
    fn roundtrip_extremes() {
        for x in [
            f64::MIN_POSITIVE,
            f64::MIN_POSITIVE / 7.0,
            5e-324,
            f64::MAX,
            -1.0 / 3.0,
            std::f64::consts::PI,
            f64::INFINITY,
        ] {
            assert_eq!(parse_hex(&format_hex(x)).unwrap().to_bits(), x.to_bits());
        }
        assert!(parse_hex(&format_hex(f64::NAN)).unwrap().is_nan());
        assert!(parse_hex("1.5").is_err());
    }
}

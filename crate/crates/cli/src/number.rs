//! Exact number syntax: `"3/7"`, `"0.125"`, `"1e-3"`, `"42"`.

use mixbound::Rational;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

/// Parses a fraction or a decimal (optionally with exponent) exactly.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let t = s.trim();
    if t.is_empty() {
        return Err("empty number".into());
    }
    if let Some((num, den)) = t.split_once('/') {
        let num: BigInt = parse_int(num.trim()).ok_or_else(|| format!("bad numerator in {s:?}"))?;
        let den: BigInt =
            parse_int(den.trim()).ok_or_else(|| format!("bad denominator in {s:?}"))?;
        if !den.is_positive() {
            return Err(format!("denominator must be positive in {s:?}"));
        }
        return Ok(Rational::new(num, den));
    }
    parse_decimal(t).ok_or_else(|| format!("not a fraction or decimal: {s:?}"))
}

fn parse_int(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole
        .bytes()
        .chain(frac.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let digits: BigInt = format!("{whole}{frac}").parse().ok()?;
    let scale = exp.checked_sub(frac.len() as i32)?;
    if scale.unsigned_abs() > 10_000 {
        return None;
    }
    let ten = BigInt::from(10);
    let mut q = if scale >= 0 {
        Rational::from_integer(digits * ten.pow(scale as u32))
    } else {
        Rational::new(digits, ten.pow(scale.unsigned_abs()))
    };
    if neg {
        q = -q;
    }
    Some(q)
}

/// Canonical exact rendering: `"n"` for integers, `"num/den"` otherwise.
pub fn fraction(q: &Rational) -> String {
    q.to_string()
}

/// Decimal rendering with 15 significant digits.
pub fn decimal(q: &Rational) -> String {
    if q.is_zero() {
        return "0".into();
    }
    let f = q.to_f64().unwrap_or(f64::NAN);
    decimal_f64(f)
}

pub fn decimal_f64(f: f64) -> String {
    if f == 0.0 || !f.is_finite() {
        return f.to_string();
    }
    let sci = format!("{f:.14e}");
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        let places = (14 - exp).max(0) as usize;
        trim_zeros(format!("{f:.places$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mant.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

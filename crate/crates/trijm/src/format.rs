//! Decimal rendering shared by every output format.

/// Significant digits written for every real number.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Formats `x` like C's `%.12g`: twelve significant digits, trailing zeros
/// removed, exponent notation outside `1e-4 <= |x| < 1e12`.
///
/// Negative zero is written as `0`. Non-finite values are written as `nan`,
/// `inf` or `-inf`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIGNIFICANT_DIGITS as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs());
    }
    let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `x` rounded to the precision written by [`fmt_num`].
pub fn round_num(x: f64) -> f64 {
    fmt_num(x).parse().unwrap_or(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        let cases = [
            (2.535898384862245, "2.53589838486"),
            (1.0, "1"),
            (-0.0, "0"),
            (0.1875, "0.1875"),
            (1e-5, "1e-05"),
            (1e-4, "0.0001"),
            (1.875e-5, "1.875e-05"),
            (1.5e-7, "1.5e-07"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (-1.23456789012345, "-1.23456789012"),
            (0.000123, "0.000123"),
            (99999999999.99999, "100000000000"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_num(x), want, "{x}");
        }
    }

    #[test]
    fn rounding_is_idempotent() {
        for x in [std::f64::consts::PI, 1.0 / 3.0, 2.0f64.sqrt() * 1e-9, 6.02e23] {
            assert_eq!(fmt_num(round_num(x)), fmt_num(x));
        }
    }
}

//! Fixed numeric formatting shared by every file writer.

/// `x` rounded to six significant digits, without exponent for ordinary
/// magnitudes.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..=9).contains(&mag) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}

/// `x` rounded to six significant digits as a number, for JSON output.
pub fn round6(x: f64) -> f64 {
    sig6(x).parse().unwrap_or(x)
}

#[cfg(test)]
mod tests {
    use super::sig6;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(174.123456), "174.123");
        assert_eq!(sig6(0.0012345678), "0.00123457");
        assert_eq!(sig6(-65.0), "-65");
        assert_eq!(sig6(4000.0), "4000");
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(1.23456789e-7), "1.23457e-7");
        assert_eq!(sig6(f64::NAN), "NaN");
    }

    #[test]
    fn round6_matches_sig6() {
        assert_eq!(super::round6(57.712345678), 57.7123);
        assert_eq!(super::round6(-1.23456789e-7), -1.23457e-7);
        assert!(super::round6(f64::NAN).is_nan());
    }
}

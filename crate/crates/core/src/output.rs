//! Plain-text number formatting shared by the CSV writers.

/// C-style `%.6e`: six fractional digits and a signed, two-digit exponent.
pub fn format_sci(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let s = format!("{x:.6e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

#[cfg(test)]
mod tests {
    use super::format_sci;

    #[test]
    fn matches_printf() {
        assert_eq!(format_sci(0.0), "0.000000e+00");
        assert_eq!(format_sci(1e10), "1.000000e+10");
        assert_eq!(format_sci(-0.000123456789), "-1.234568e-04");
        assert_eq!(format_sci(6.02e123), "6.020000e+123");
        assert_eq!(format_sci(f64::NAN), "nan");
    }
}

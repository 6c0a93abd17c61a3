//! Float formatting shared by every CSV writer in the crate.

/// Formats with 17 significant digits, which round-trips any `f64` exactly.
pub fn float(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_float(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(float(1.0), "1.0000000000000000e0");
        assert_eq!(float(0.1).len(), "1.0000000000000001e-1".len());
    }

    proptest! {
        #[test]
        fn round_trips_bit_exact(x in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
            let back = parse_float(&float(x)).unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}

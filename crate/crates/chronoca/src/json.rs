//! Shared helpers for the JSON interchange formats.

/// Prints a double with 17 significant digits (scientific notation), which
/// is enough to round-trip any finite IEEE-754 double bit-exactly.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON-escapes a label.
pub(crate) fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt_f64_round_trips_bit_exactly() {
        for &x in &[0.0, 1.0, -1.5, 0.1, 4.0 / 15.0, 1e-300, 2.5e17, f64::MIN_POSITIVE] {
            let parsed: f64 = fmt_f64(x).parse().unwrap();
            assert_eq!(parsed.to_bits(), x.to_bits(), "{x} -> {}", fmt_f64(x));
        }
    }

    #[test]
    fn fmt_f64_is_valid_json() {
        let v: f64 = serde_json::from_str(&fmt_f64(0.25)).unwrap();
        assert_eq!(v, 0.25);
    }

    #[test]
    fn json_string_escapes() {
        assert_eq!(json_string("a\"b"), "\"a\\\"b\"");
    }
}

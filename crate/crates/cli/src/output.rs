//! JSON and CSV rendering.

use serde::Serialize;
use serde_json::Value;

/// Rounds to 12 significant digits. Non-finite values pass through.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                *v = serde_json::Number::from_f64(sig12(x)).map_or(Value::Null, Value::Number);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with every float rounded by [`sig12`]; non-finite floats
/// become `null`.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).unwrap_or(Value::Null);
    round_value(&mut v);
    serde_json::to_string_pretty(&v).unwrap_or_else(|_| "null".into())
}

/// Float cell for CSV output: plain decimal notation, 12 significant digits.
pub fn csv_float(x: f64) -> String {
    format!("{}", sig12(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(sig12(0.1 + 0.2), 0.3);
        assert_eq!(sig12(1.0 / 3.0), 0.333333333333);
        assert_eq!(sig12(-2.0 / 3.0 * 1e-7), -6.66666666667e-8);
        assert!(sig12(f64::NAN).is_nan());
    }

    #[test]
    fn json_floats_are_rounded_and_integers_kept() {
        #[derive(Serialize)]
        struct S {
            x: f64,
            n: u64,
            v: Vec<f64>,
            inf: f64,
        }
        let s = to_json(&S {
            x: 2.0 / 3.0,
            n: u64::MAX,
            v: vec![1.0, 1e-20 / 3.0],
            inf: f64::NEG_INFINITY,
        });
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"], 0.666666666667);
        assert_eq!(back["n"], u64::MAX);
        assert_eq!(back["v"][1], 3.33333333333e-21);
        assert!(back["inf"].is_null());
    }

    #[test]
    fn csv_float_has_no_exponent_or_grouping() {
        assert_eq!(csv_float(1234567.25), "1234567.25");
        assert_eq!(csv_float(-0.5), "-0.5");
        assert!(!csv_float(1e-5 / 3.0).contains(','));
    }
}

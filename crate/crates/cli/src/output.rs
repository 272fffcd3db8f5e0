//! JSON rendering with every float written to 12 decimals.

use std::fmt::Write;

use num_rational::BigRational;
use serde::Serialize;
use serde_json::Value;

pub fn rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn float(x: f64) -> String {
    if x.is_finite() {
        let s = format!("{x:.12}");
        if s == "-0.000000000000" {
            "0.000000000000".into()
        } else {
            s
        }
    } else {
        "null".into()
    }
}

pub fn render<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serialisable output");
    let mut out = String::new();
    write_value(&v, &mut out);
    out
}

fn write_value(v: &Value, out: &mut String) {
    match v {
        Value::Number(n) if n.is_f64() => out.push_str(&float(n.as_f64().unwrap_or(f64::NAN))),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}:", Value::String(k.clone()));
                write_value(item, out);
            }
            out.push('}');
        }
        other => {
            let _ = write!(out, "{other}");
        }
    }
}

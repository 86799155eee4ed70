//! Bit-stable text output.
//!
//! Every float written to CSV or JSON goes through [`fmt17`] (17 significant
//! digits), so identical runs produce byte-identical files.

use std::fmt::Write as _;

/// Format a float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Minimal ordered JSON writer; field order is insertion order.
#[derive(Debug, Default)]
pub struct JsonObject {
    entries: Vec<(String, String)>,
}

impl JsonObject {
    pub fn new() -> Self {
        JsonObject::default()
    }

    pub fn number(&mut self, key: &str, value: f64) -> &mut Self {
        self.entries.push((key.to_string(), fmt17(value)));
        self
    }

    pub fn integer(&mut self, key: &str, value: i64) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn boolean(&mut self, key: &str, value: bool) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn string(&mut self, key: &str, value: &str) -> &mut Self {
        self.entries
            .push((key.to_string(), format!("\"{}\"", escape(value))));
        self
    }

    pub fn number_array(&mut self, key: &str, values: &[f64]) -> &mut Self {
        let mut buf = String::from("[");
        for (n, v) in values.iter().enumerate() {
            if n > 0 {
                buf.push(',');
            }
            let _ = write!(buf, "{}", fmt17(*v));
        }
        buf.push(']');
        self.entries.push((key.to_string(), buf));
        self
    }

    pub fn raw(&mut self, key: &str, value: String) -> &mut Self {
        self.entries.push((key.to_string(), value));
        self
    }

    pub fn render(&self) -> String {
        let mut buf = String::from("{\n");
        for (n, (k, v)) in self.entries.iter().enumerate() {
            let _ = write!(buf, "  \"{}\": {}", escape(k), v);
            buf.push_str(if n + 1 < self.entries.len() { ",\n" } else { "\n" });
        }
        buf.push('}');
        buf
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt17_has_17_significant_digits() {
        assert_eq!(fmt17(0.125), "1.2500000000000000e-1");
        assert_eq!(fmt17(-1.0 / 24.0), "-4.1666666666666664e-2");
    }

    #[test]
    fn json_object_is_ordered() {
        let mut obj = JsonObject::new();
        obj.number("b", 1.0).integer("a", 2).boolean("c", true);
        let text = obj.render();
        let pos = |k: &str| text.find(k).unwrap();
        assert!(pos("\"b\"") < pos("\"a\""));
        assert!(pos("\"a\"") < pos("\"c\""));
    }
}

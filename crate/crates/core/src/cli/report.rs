use std::fmt::Display;

use serde_json::{json, Map, Value};

use super::{Command, Format};
use crate::equiv::EquivVerdict;
use crate::loopcore::sets::ClosedSetDescription;
use crate::transport::{CurvatureProbe, HolonomyResult, OrderProbe, CONVENTION};
use crate::words::Reduction;

/// Text or JSON report. Text lines are `key: value`; JSON is one object.
pub struct Report {
    format: Format,
    text: String,
    json: Map<String, Value>,
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

impl Report {
    pub fn new(command: Command, seed: u64, format: Format) -> Report {
        let mut r = Report {
            format,
            text: String::new(),
            json: Map::new(),
        };
        r.text.push_str(&format!("# {CONVENTION}\n# seed: {seed}\n"));
        r.json.insert("convention".into(), json!(CONVENTION));
        r.json.insert("seed".into(), json!(seed));
        r.json.insert("command".into(), json!(format!("{command:?}").to_lowercase()));
        r
    }

    pub fn field(&mut self, key: &str, value: impl Display) {
        self.text.push_str(&format!("{key}: {value}\n"));
        self.json.insert(key.into(), json!(value.to_string()));
    }

    pub fn count(&mut self, key: &str, value: usize) {
        self.text.push_str(&format!("{key}: {value}\n"));
        self.json.insert(key.into(), json!(value));
    }

    pub fn number(&mut self, key: &str, value: f64) {
        self.text.push_str(&format!("{key}: {}\n", sci(value)));
        self.json.insert(key.into(), json!(value));
    }

    fn value(&mut self, key: &str, text: String, value: Value) {
        self.text.push_str(&text);
        self.json.insert(key.into(), value);
    }

    /// Embeds an artifact in the JSON report; text reports leave it out.
    pub fn artifact<T: serde::Serialize>(&mut self, key: &str, value: &T) -> crate::Result<()> {
        if self.format == Format::Json {
            self.json.insert(key.into(), serde_json::to_value(value)?);
        }
        Ok(())
    }

    pub fn holonomy(&mut self, h: &HolonomyResult) {
        let m = &h.element.matrix;
        let mut text = String::from("holonomy:\n");
        let mut rows = Vec::new();
        for i in 0..m.nrows() {
            let row: Vec<String> = (0..m.ncols())
                .map(|j| format!("({} {:+.16e}i)", sci(m[(i, j)].re), m[(i, j)].im))
                .collect();
            text.push_str(&format!("  [{}]\n", row.join(", ")));
            rows.push((0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect::<Vec<_>>());
        }
        self.value("holonomy", text, json!(rows));
        self.number("error_estimate", h.error_estimate);
        self.count("steps", h.steps_used);
        self.number("group_residual", h.element.residual());
    }

    pub fn certificate(&mut self, red: &Reduction) {
        let log = red.certificate_log();
        self.value(
            "certificate",
            format!("certificate:\n{}", log.lines().map(|l| format!("  {l}\n")).collect::<String>()),
            json!(red.cancellations),
        );
    }

    pub fn equiv(&mut self, v: &EquivVerdict) {
        let verdict = serde_json::to_value(v.verdict).unwrap_or(Value::Null);
        self.value(
            "verdict",
            format!("verdict: {}\n", verdict.as_str().unwrap_or("?")),
            verdict.clone(),
        );
        self.number("max_deviation", v.max_deviation);
        self.number("tolerance", v.tolerance);
        self.count("samples", v.samples);
        self.field("above_tolerance", v.above(v.tolerance));
        self.count("divergent", v.divergent.len());
        let mut text = String::from("witnesses:\n");
        for w in &v.witnesses {
            text.push_str(&format!("  seed {} deviation {}\n", w.seed, sci(w.deviation)));
        }
        self.value("witnesses", text, serde_json::to_value(&v.witnesses).unwrap_or(Value::Null));
    }

    pub fn set(&mut self, key: &str, s: &ClosedSetDescription) {
        let mut text = format!("{key}: {:?}, tolerance {}\n", s.exactness, sci(s.tolerance));
        for [a, b] in &s.intervals {
            text.push_str(&format!("  interval [{}, {}]\n", sci(*a), sci(*b)));
        }
        for p in &s.isolated_points {
            text.push_str(&format!("  point {}\n", sci(*p)));
        }
        self.value(key, text, serde_json::to_value(s).unwrap_or(Value::Null));
    }

    pub fn probe(&mut self, p: &OrderProbe) {
        let mut text = String::from("order probe:\n");
        for (n, e) in p.ladder.iter().zip(&p.errors) {
            text.push_str(&format!("  steps {n} error {}\n", sci(*e)));
        }
        match p.order {
            Some(o) => text.push_str(&format!("  fitted order {}\n", sci(o))),
            None => text.push_str("  exact: all rungs agree\n"),
        }
        self.value("order_probe", text, serde_json::to_value(p).unwrap_or(Value::Null));
    }

    pub fn curvature(&mut self, p: &CurvatureProbe) {
        let mut text = String::from("curvature law:\n");
        for (e, d) in p.epsilons.iter().zip(&p.deviations) {
            text.push_str(&format!("  epsilon {e} deviation {}\n", sci(*d)));
        }
        text.push_str(&format!("  fitted order {}\n", sci(p.order)));
        self.value("curvature_law", text, serde_json::to_value(p).unwrap_or(Value::Null));
    }

    pub fn finish(self) -> String {
        match self.format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&Value::Object(self.json)).unwrap_or_default();
                s.push('\n');
                s
            }
            _ => self.text,
        }
    }
}

//! Machine-readable run reports.

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Default)]
pub struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    pub fn new(argv: &[String]) -> Self {
        let mut hasher = Sha256::new();
        for a in argv {
            hasher.update(a.as_bytes());
            hasher.update([0]);
        }
        Inputs { hasher }
    }

    pub fn add_file(&mut self, bytes: &[u8]) {
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(bytes);
    }

    pub fn digest(&self) -> String {
        self.hasher.clone().finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Finite numbers as JSON numbers, infinities and NaN as strings.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

pub struct Outcome {
    pub results: Map<String, Value>,
    /// 0 = true/win, 1 = false/lose.
    pub status: i32,
}

impl Outcome {
    pub fn new(status: bool) -> Self {
        Outcome { results: Map::new(), status: if status { 0 } else { 1 } }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.results.insert(key.to_string(), value.into());
        self
    }

    pub fn set_status(&mut self, ok: bool) {
        if !ok {
            self.status = 1;
        }
    }
}

pub fn render(argv: &[String], inputs: &Inputs, outcome: &Outcome, tol: f64) -> String {
    let report = json!({
        "command": argv,
        "inputs_digest": inputs.digest(),
        "results": Value::Object(outcome.results.clone()),
        "tolerance": tol,
        "exit_status": outcome.status,
    });
    let mut text = serde_json::to_string_pretty(&report).expect("reports are plain JSON");
    text.push('\n');
    text
}

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn new(path: &str, bytes: &[u8]) -> Self {
        let digest = Sha256::digest(bytes);
        let mut hex = String::with_capacity(64);
        for b in digest.iter() {
            let _ = write!(hex, "{b:02x}");
        }
        Self {
            path: path.to_string(),
            sha256: hex,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorObject {
    pub name: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Config {
    pub tol: f64,
    pub seed: u64,
    pub steps: Option<usize>,
    pub fourier_cutoff: usize,
}

/// The single document written per invocation.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub config: Config,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    pub diagnostics: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorObject>,
}

impl Report {
    pub fn structured(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report values are plain data");
        s.push('\n');
        s
    }

    pub fn human(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} ({})", self.command, self.status);
        for i in &self.inputs {
            let _ = writeln!(out, "input {} sha256 {}", i.path, i.sha256);
        }
        if let Some(e) = &self.error {
            let _ = writeln!(out, "error {}: {}", e.name, e.message);
        }
        if let Some(r) = &self.result {
            flatten(&mut out, "", r);
        }
        for d in &self.diagnostics {
            let _ = writeln!(out, "note: {d}");
        }
        out
    }
}

fn flatten(out: &mut String, prefix: &str, v: &Value) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                flatten(out, &key(k), x);
            }
        }
        Value::Array(items) if items.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in items.iter().enumerate() {
                flatten(out, &key(&i.to_string()), x);
            }
        }
        _ => {
            let _ = writeln!(out, "{prefix}: {v}");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        let d = InputDigest::new("x", b"");
        assert_eq!(
            d.sha256,
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn human_lines_flatten_nested_values() {
        let mut out = String::new();
        flatten(&mut out, "", &serde_json::json!({"a": {"b": 1}, "c": [1, 2], "d": [{"e": true}]}));
        assert_eq!(out, "a.b: 1\nc: [1,2]\nd.0.e: true\n");
    }
}

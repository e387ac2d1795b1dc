//! Versioned JSON reports; the human form is rendered from the JSON.

use std::fmt::Write as _;

use blue_core::verdict::{SearchBounds, VerdictKind};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const SCHEMA: &str = "blu.report.v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Proved,
    Refuted,
    Unknown,
    /// A construction that succeeded.
    Ok,
    /// Malformed input.
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Proved | Status::Ok => 0,
            Status::Refuted => 1,
            Status::Unknown => 2,
            Status::Error => 3,
        }
    }
}

impl From<VerdictKind> for Status {
    fn from(k: VerdictKind) -> Self {
        match k {
            VerdictKind::Proved => Status::Proved,
            VerdictKind::Refuted => Status::Refuted,
            VerdictKind::Unknown => Status::Unknown,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub origin: String,
    /// Text of the user document, absent when only the prelude was used.
    pub document: Option<String>,
    pub document_sha256: String,
    pub prelude_sha256: String,
    /// Canonical text of the target declaration.
    pub target_declaration: Option<String>,
    pub target_sha256: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub target: Option<String>,
    /// Command line after the program name, replayed by `check --replay`.
    pub args: Vec<String>,
    pub verdict: Status,
    pub exit_code: i32,
    pub summary: Vec<String>,
    pub evidence: Value,
    pub bounds: SearchBounds,
    pub provenance: Provenance,
    pub notices: Vec<String>,
}

pub fn sha256(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("none".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(items) if items.iter().all(|i| !i.is_object() && !i.is_array()) => {
            Some(format!("[{}]", items.iter().filter_map(scalar).collect::<Vec<_>>().join(", ")))
        }
        Value::Array(items) if items.is_empty() => Some("[]".into()),
        Value::Object(m) if m.is_empty() => Some("{}".into()),
        _ => None,
    }
}

fn render_value(out: &mut String, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                match scalar(v) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}{k}: {s}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}{k}:");
                        render_value(out, v, indent + 1);
                    }
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                match scalar(item) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}- {s}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}-");
                        render_value(out, item, indent + 1);
                    }
                }
            }
        }
        other => {
            let _ = writeln!(out, "{pad}{}", scalar(other).unwrap_or_default());
        }
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Human-readable text derived from the JSON form.
    pub fn render(&self) -> String {
        let v = serde_json::to_value(self).expect("reports serialize");
        let mut out = String::new();
        let verdict = v["verdict"].as_str().unwrap_or_default().to_uppercase();
        let target = v["target"].as_str().map(|t| format!(" {t}")).unwrap_or_default();
        let _ = writeln!(out, "{}{target}: {verdict}", v["command"].as_str().unwrap_or_default());
        for line in v["summary"].as_array().into_iter().flatten() {
            let _ = writeln!(out, "  {}", line.as_str().unwrap_or_default());
        }
        if v["evidence"].as_object().is_some_and(|m| !m.is_empty()) {
            out.push_str("evidence:\n");
            render_value(&mut out, &v["evidence"], 1);
        }
        out
    }
}

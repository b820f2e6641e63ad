//! Run manifests and the CSV/JSON writers.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// Wall time of one stage.
#[derive(Debug, Clone, Serialize)]
pub struct Stage {
    pub name: String,
    pub seconds: f64,
}

/// Embedded verbatim in every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub version: &'static str,
    pub timestamp: String,
    pub command: String,
    /// SHA-256 of the canonical JSON of `config`.
    pub config_hash: String,
    pub config: Value,
    pub stages: Vec<Stage>,
}

impl RunManifest {
    pub fn new(command: &str, config: Value) -> Self {
        Self {
            version: frakolm::VERSION,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            command: command.to_string(),
            config_hash: config_hash(&config),
            config,
            stages: Vec::new(),
        }
    }
}

/// serde_json keeps object keys sorted, so the text is canonical.
pub fn config_hash(config: &Value) -> String {
    let text = serde_json::to_string(config).expect("json value");
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

/// Times named stages.
pub struct Timer {
    stages: Vec<Stage>,
}

impl Timer {
    pub fn new() -> Self {
        Self { stages: Vec::new() }
    }

    pub fn stage<R>(&mut self, name: &str, f: impl FnOnce() -> R) -> R {
        let start = Instant::now();
        let r = f();
        self.stages.push(Stage { name: name.to_string(), seconds: start.elapsed().as_secs_f64() });
        r
    }

    pub fn into_stages(self) -> Vec<Stage> {
        self.stages
    }
}

/// Shortest text that parses back to the same `f64`.
pub fn float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        let s = format!("{v:?}");
        s.strip_suffix(".0").map(str::to_string).unwrap_or(s)
    }
}

/// A table: a manifest comment line, the header row, then records.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    /// `quantity,input,value,residual` tables.
    pub fn quantities() -> Self {
        Self::new(&["quantity", "input", "value", "residual"])
    }

    pub fn push_quantity(&mut self, quantity: &str, input: &str, value: f64, residual: Option<f64>) {
        self.rows.push(vec![
            quantity.to_string(),
            input.to_string(),
            float(value),
            residual.map(float).unwrap_or_default(),
        ]);
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn render(&self, manifest: &RunManifest) -> Result<Vec<u8>, String> {
        let mut out = Vec::new();
        let m = serde_json::to_string(manifest).map_err(|e| e.to_string())?;
        write!(out, "# manifest: {m}\r\n").map_err(|e| e.to_string())?;
        {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(&mut out);
            w.write_record(&self.header).map_err(|e| e.to_string())?;
            for r in &self.rows {
                w.write_record(r).map_err(|e| e.to_string())?;
            }
            w.flush().map_err(|e| e.to_string())?;
        }
        Ok(out)
    }
}

/// JSON report with the manifest under `"manifest"`.
pub fn render_json(manifest: &RunManifest, body: Value) -> Result<Vec<u8>, String> {
    let mut doc = json!({ "manifest": manifest });
    match body {
        Value::Object(map) => {
            for (k, v) in map {
                doc[k] = v;
            }
        }
        other => doc["result"] = other,
    }
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?;
    s.push('\n');
    Ok(s.into_bytes())
}

/// Writes to `path`, or stdout when `None`.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> std::io::Result<()> {
    match path {
        Some(p) => fs::write(p, bytes),
        None => std::io::stdout().write_all(bytes),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for &v in &[0.1, 1.0 / 3.0, 1e-300, 6.02e23, -2.5, 0.0] {
            assert_eq!(float(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(float(1.0), "1");
        assert_eq!(float(0.1), "0.1");
    }

    #[test]
    fn hash_ignores_key_order() {
        let a: Value = serde_json::from_str(r#"{"d":2,"alpha":1.5}"#).unwrap();
        let b: Value = serde_json::from_str(r#"{"alpha":1.5,"d":2}"#).unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 64);
    }

    #[test]
    fn csv_quotes_commas() {
        let mut t = Table::quantities();
        t.push_quantity("kappa_beta", "d=2,beta=0.25", 0.5, None);
        let m = RunManifest::new("constants", json!({}));
        let text = String::from_utf8(t.render(&m).unwrap()).unwrap();
        let lines: Vec<&str> = text.split("\r\n").collect();
        assert!(lines[0].starts_with("# manifest: {"));
        assert_eq!(lines[1], "quantity,input,value,residual");
        assert!(text.contains("kappa_beta,\"d=2,beta=0.25\",0.5,\r\n"));
    }
}

//! Report assembly and output.
//!
//! The report body is a deterministic function of the inputs; wall-clock
//! metadata is segregated under `meta` so the body can be compared
//! byte-for-byte across runs.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

pub struct Report {
    pub command: String,
    pub params: Value,
    pub result: Value,
    pub pass: bool,
}

impl Report {
    /// The deterministic body.
    pub fn body(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "params": self.params,
            "result": self.result,
            "pass": self.pass,
        })
    }

    fn full(&self) -> Value {
        let millis = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0);
        json!({
            "meta": { "generated_at_unix_ms": millis },
            "report": self.body(),
        })
    }

    /// Writes the report to `out`, or to stdout when no path is given.
    pub fn write(&self, out: Option<&Path>) -> Result<(), String> {
        let text = serde_json::to_string_pretty(&self.full()).expect("report serializes");
        match out {
            Some(path) => std::fs::write(path, text.as_bytes())
                .map_err(|e| format!("{}: {e}", path.display())),
            None => {
                println!("{text}");
                Ok(())
            }
        }
    }
}

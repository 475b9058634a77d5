//! Machine-readable run reports: versioned schema, config echo, per-check
//! records with witnesses, and a timing field that consumers exclude from
//! byte comparisons.

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: &str = "1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Serialize)]
pub struct Report {
    pub schema_version: &'static str,
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: String,
    pub config: Value,
    pub seed: u64,
    pub checks: Vec<CheckRecord>,
    pub all_pass: bool,
    pub data: Value,
    pub timing_ms: u128,
}

impl Report {
    pub fn new(command: &str, config: Value, seed: u64) -> Report {
        Report {
            schema_version: SCHEMA_VERSION,
            tool: "foliate",
            tool_version: TOOL_VERSION,
            command: command.to_string(),
            config,
            seed,
            checks: Vec::new(),
            all_pass: true,
            data: Value::Null,
            timing_ms: 0,
        }
    }

    pub fn check(&mut self, name: &str, pass: bool, witness: Option<String>) {
        self.all_pass &= pass;
        self.checks.push(CheckRecord { name: name.to_string(), pass, witness });
    }

    pub fn finish(mut self, started: std::time::Instant) -> Report {
        self.timing_ms = started.elapsed().as_millis();
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_pass {
            0
        } else {
            1
        }
    }
}

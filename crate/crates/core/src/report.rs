//! Machine-readable run reports. Exact values are always strings
//! ("num/den"); floats appear only as diagnostics of approximate methods.

use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Experimental,
}

impl Status {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    /// 0 unless the run failed; an experimental run never fails the exit code.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Fail => 1,
            Status::Pass | Status::Experimental => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub params: Map<String, Value>,
    pub results: Map<String, Value>,
    pub status: Status,
    pub diagnostics: Map<String, Value>,
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            schema: SCHEMA_VERSION,
            command: command.to_string(),
            params: Map::new(),
            results: Map::new(),
            status: Status::Pass,
            diagnostics: Map::new(),
        }
    }

    pub fn param(mut self, key: &str, v: impl Serialize) -> Self {
        self.params.insert(key.to_string(), to_value(v));
        self
    }

    pub fn result(mut self, key: &str, v: impl Serialize) -> Self {
        self.results.insert(key.to_string(), to_value(v));
        self
    }

    pub fn diagnostic(mut self, key: &str, v: impl Serialize) -> Self {
        self.diagnostics.insert(key.to_string(), to_value(v));
        self
    }

    pub fn status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

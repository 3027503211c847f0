use std::process::ExitCode;

use serde_json::{json, Value};

pub const TOOL: &str = concat!("fatcheck ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Yes,
    No,
    Error,
}

impl Outcome {
    fn as_str(self) -> &'static str {
        match self {
            Outcome::Yes => "yes",
            Outcome::No => "no",
            Outcome::Error => "error",
        }
    }

    fn code(self) -> u8 {
        match self {
            Outcome::Yes => 0,
            Outcome::No => 1,
            Outcome::Error => 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub outcome: Outcome,
    pub reason: String,
    pub payload: Value,
    /// One line for stderr.
    pub note: Option<String>,
}

impl Report {
    pub fn yes(reason: &str, payload: Value) -> Report {
        Report {
            outcome: Outcome::Yes,
            reason: reason.into(),
            payload,
            note: None,
        }
    }

    pub fn no(reason: &str, payload: Value) -> Report {
        Report {
            outcome: Outcome::No,
            reason: reason.into(),
            payload,
            note: None,
        }
    }

    pub fn error(reason: &str, payload: Value) -> Report {
        Report {
            outcome: Outcome::Error,
            reason: reason.into(),
            payload,
            note: None,
        }
    }

    pub fn fail(reason: &str, message: impl ToString) -> Report {
        Report::error(reason, json!({"message": message.to_string()}))
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Report {
        self.note = Some(note.into());
        self
    }

    pub fn to_json(&self) -> Value {
        json!({
            "tool": TOOL,
            "result": self.outcome.as_str(),
            "reason": self.reason,
            "payload": self.payload,
        })
    }

    pub fn emit(&self, quiet: bool) -> ExitCode {
        println!("{}", serde_json::to_string_pretty(&self.to_json()).expect("JSON values serialize"));
        if !quiet {
            match (&self.note, self.outcome) {
                (Some(n), _) => eprintln!("fatcheck: {n}"),
                (None, Outcome::Error) => eprintln!("fatcheck: error: {} {}", self.reason, self.payload["message"].as_str().unwrap_or("")),
                (None, o) => eprintln!("fatcheck: {} ({})", o.as_str(), self.reason),
            }
        }
        ExitCode::from(self.outcome.code())
    }
}

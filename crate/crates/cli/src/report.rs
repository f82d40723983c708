//! Report rows and their JSON-lines / text rendering.

use std::io::{self, Write};
use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Value};

/// One sub-check of a command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub check: String,
    pub anchor: String,
    pub pass: bool,
    pub witness: Value,
}

impl Row {
    pub fn new(check: impl Into<String>, anchor: impl Into<String>, pass: bool, witness: Value) -> Self {
        Self {
            check: check.into(),
            anchor: anchor.into(),
            pass,
            witness,
        }
    }

    /// A check that could not be run counts as failed, with the error as witness.
    pub fn error(check: impl Into<String>, anchor: impl Into<String>, err: impl ToString) -> Self {
        Self::new(check, anchor, false, json!({ "error": err.to_string() }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

/// Streams rows as they are produced; text mode buffers to align columns.
pub struct Emitter<W: Write> {
    out: W,
    format: Format,
    command: String,
    rows: Vec<Row>,
}

impl<W: Write> Emitter<W> {
    pub fn new(out: W, format: Format, command: &str) -> Self {
        Self {
            out,
            format,
            command: command.to_string(),
            rows: Vec::new(),
        }
    }

    pub fn emit(&mut self, row: Row) -> io::Result<()> {
        if self.format == Format::Json {
            let mut v = json!({ "command": self.command });
            if let (Value::Object(m), Value::Object(r)) = (&mut v, serde_json::to_value(&row)?) {
                m.extend(r);
            }
            writeln!(self.out, "{v}")?;
            self.out.flush()?;
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// Writes the summary and returns the overall verdict.
    pub fn finish(mut self, inputs: Value, wall: Option<Duration>) -> io::Result<bool> {
        let pass = self.pass();
        let failed: Vec<&str> = self.rows.iter().filter(|r| !r.pass).map(|r| r.check.as_str()).collect();
        match self.format {
            Format::Json => {
                let mut summary = json!({
                    "command": self.command,
                    "inputs": inputs,
                    "pass": pass,
                    "checks": self.rows.len(),
                    "failed": failed,
                });
                if let Some(w) = wall {
                    summary["wall_ms"] = json!(w.as_secs_f64() * 1e3);
                }
                writeln!(self.out, "{summary}")?;
            }
            Format::Text => {
                let wc = self.rows.iter().map(|r| r.check.len()).max().unwrap_or(0);
                let wa = self.rows.iter().map(|r| r.anchor.len()).max().unwrap_or(0);
                for r in &self.rows {
                    writeln!(
                        self.out,
                        "{}  {:wc$}  {:wa$}  {}",
                        if r.pass { "PASS" } else { "FAIL" },
                        r.check,
                        r.anchor,
                        brief(&r.witness),
                    )?;
                }
                write!(
                    self.out,
                    "{}: {} ({} of {} checks pass)",
                    self.command,
                    if pass { "PASS" } else { "FAIL" },
                    self.rows.len() - failed.len(),
                    self.rows.len()
                )?;
                if let Some(w) = wall {
                    write!(self.out, " in {w:.3?}")?;
                }
                writeln!(self.out)?;
            }
        }
        self.out.flush()?;
        Ok(pass)
    }
}

/// Compact one-line rendering of a witness for text output.
fn brief(v: &Value) -> String {
    let s = v.to_string();
    if s.chars().count() > 160 {
        format!("{}...", s.chars().take(157).collect::<String>())
    } else {
        s
    }
}

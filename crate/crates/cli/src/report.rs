//! Command output in text or JSON form, and the failure type that carries
//! an exit status.

use std::path::Path;

use serde_json::{json, Map, Value};

use slax_core::container::ContainerError;
use slax_core::script::ScriptError;
use slax_core::session::CollisionWarning;
use slax_core::validate::{Issue, ModelError, ValidationReport};

/// Exit status for invalid input.
const INVALID: u8 = 1;
/// Exit status for I/O failures.
const IO: u8 = 2;

#[derive(Debug)]
pub struct Failure {
    status: u8,
    code: String,
    message: String,
    issues: Vec<Issue>,
}

impl Failure {
    pub fn io(path: &Path, err: &std::io::Error) -> Self {
        Self {
            status: IO,
            code: "IO".into(),
            message: format!("{}: {err}", path.display()),
            issues: Vec::new(),
        }
    }

    pub fn invalid(code: &str, message: String) -> Self {
        Self {
            status: INVALID,
            code: code.into(),
            message,
            issues: Vec::new(),
        }
    }

    pub fn report(report: ValidationReport) -> Self {
        Self {
            status: INVALID,
            code: "VALIDATION".into(),
            message: format!("{} validation error(s)", report.errors.len()),
            issues: report.errors,
        }
    }

    pub fn container(err: ContainerError) -> Self {
        let code = err.code();
        match err {
            ContainerError::ManifestInvalid(r) | ContainerError::PieceInvalid(r) => Self {
                code: code.into(),
                ..Self::report(r)
            },
            other => Self::invalid(code, other.to_string()),
        }
    }

    pub fn script(err: ScriptError) -> Self {
        match err {
            ScriptError::Syntax(m) => Self::invalid("SCRIPT_SYNTAX", m),
            ScriptError::Order { .. } => Self::invalid("SCRIPT_ORDER", err.to_string()),
            ScriptError::Rejected { .. } => Self::invalid("REJECTED", err.to_string()),
            ScriptError::Piece(ModelError::PieceInvalid(r)) => Self::report(r),
        }
    }

    pub fn status(&self) -> u8 {
        self.status
    }
}

/// Collects a command's results and prints them once it ends: human lines
/// on stdout and diagnostics on stderr, or a single JSON object on stdout.
pub struct Output {
    json: bool,
    fields: Map<String, Value>,
    lines: Vec<String>,
    warnings: Vec<Issue>,
    lint: Vec<CollisionWarning>,
}

impl Output {
    pub fn new(json: bool) -> Self {
        Self {
            json,
            fields: Map::new(),
            lines: Vec::new(),
            warnings: Vec::new(),
            lint: Vec::new(),
        }
    }

    pub fn line(&mut self, text: String) {
        self.lines.push(text);
    }

    pub fn field(&mut self, key: &str, value: Value) {
        self.fields.insert(key.into(), value);
    }

    pub fn warnings(&mut self, issues: &[Issue]) {
        self.warnings.extend_from_slice(issues);
    }

    pub fn lint(&mut self, found: &[CollisionWarning]) {
        self.lint.extend_from_slice(found);
    }

    pub fn finish(self, failure: Option<Failure>) {
        if self.json {
            let mut doc = self.fields;
            doc.insert("ok".into(), json!(failure.is_none()));
            doc.insert("warnings".into(), json!(self.warnings));
            doc.insert("lint".into(), json!(self.lint));
            if let Some(f) = failure {
                doc.insert(
                    "error".into(),
                    json!({ "code": f.code, "message": f.message, "issues": f.issues }),
                );
            }
            let text = slax_core::canonical::to_string(&Value::Object(doc))
                .expect("reports hold no floats");
            println!("{text}");
            return;
        }
        for w in &self.warnings {
            eprintln!("warning: {w}");
        }
        for l in &self.lint {
            eprintln!(
                "warning: {} on track {}: {}",
                l.rule, l.track, l.explanation
            );
        }
        match failure {
            None => {
                for line in &self.lines {
                    println!("{line}");
                }
            }
            Some(f) => {
                eprintln!("error: {}: {}", f.code, f.message);
                for issue in &f.issues {
                    eprintln!("  {issue}");
                }
            }
        }
    }
}

//! JSON reports: sorted keys, floats with 17 significant digits, the tool
//! version and the full configuration echoed back. No timestamps, so equal
//! inputs give byte-identical files.

use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const TOOL: &str = "spr-lab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Pretty printing with every float written as `d.ddddddddddddddddde±x`.
struct ReportFormatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl Formatter for ReportFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// Converts to a `Value` first so object keys come out sorted.
pub fn render<T: Serialize>(value: &T) -> Result<String, CliError> {
    let value = serde_json::to_value(value).map_err(|e| CliError::config(e.to_string()))?;
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut buf,
        ReportFormatter { inner: PrettyFormatter::with_indent(b"  ") },
    );
    value.serialize(&mut ser).map_err(|e| CliError::config(e.to_string()))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn build(config: &ExperimentConfig, results: Value, example: Option<&str>) -> Value {
    let mut report = json!({
        "tool": TOOL,
        "version": VERSION,
        "command": config.command_name(),
        "config": config,
        "results": results,
    });
    if let Some(name) = example {
        report["paper_example"] = Value::String(name.to_string());
    }
    report
}

/// Writes the report to `path`, or returns it for standard output.
pub fn emit(report: &Value, path: Option<&Path>) -> Result<Option<String>, CliError> {
    let text = render(report)?;
    match path {
        Some(p) => {
            std::fs::write(p, &text)
                .map_err(|e| CliError::config(format!("cannot write {}: {e}", p.display())))?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_17_digits_and_round_trip() {
        let v = json!({"b": 0.1, "a": [1.0 / 3.0, 2], "c": f64::NAN});
        let text = render(&v).unwrap();
        assert!(text.contains("1.0000000000000001e-1"));
        assert!(text.find("\"a\"").unwrap() < text.find("\"b\"").unwrap());
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["a"][0].as_f64().unwrap(), 1.0 / 3.0);
        assert_eq!(back["a"][1].as_u64().unwrap(), 2);
        assert!(back["c"].is_null());
    }
}

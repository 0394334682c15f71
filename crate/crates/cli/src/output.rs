//! CSV and JSON writers. Floats use the shortest representation that parses
//! back to the same bits.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::CliError;

pub fn join(values: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let a = v.abs();
        if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
            let _ = write!(s, "{v:e}");
        } else {
            let _ = write!(s, "{v}");
        }
    }
    s
}

/// Writes the whole document at once, to `path` or stdout.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}")))
        }
    }
}

pub fn json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(format!("cannot serialize: {e}")))?;
    s.push('\n');
    Ok(s)
}

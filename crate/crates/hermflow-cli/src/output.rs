use hermflow::notation::format_complex;
use hermflow::tol::Tolerances;
use hermflow::{HermError, C64};
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt;
use std::io::Write;
use std::path::Path;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or inputs (exit 2).
    Invalid(String),
    /// A verification failed (exit 1).
    Mismatch(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Mismatch(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "invalid input: {m}"),
            CliError::Mismatch(m) => write!(f, "mismatch: {m}"),
        }
    }
}

impl From<HermError> for CliError {
    fn from(e: HermError) -> Self {
        match e {
            HermError::FormulaAlarm { .. } => CliError::Mismatch(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

/// Twelve significant digits; round-off below `1e-12` and negative zero print as 0.
pub fn tidy(x: f64) -> f64 {
    let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    if r.abs() < 1e-12 {
        0.0
    } else {
        r
    }
}

pub fn cx(z: C64) -> String {
    format_complex(C64::new(tidy(z.re), tidy(z.im)))
}

/// Comma-separated, with entries below `1e-9` of the largest shown as 0.
pub fn vector(v: &[C64]) -> String {
    let big = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let snap = |x: f64| if x.abs() < 1e-9 * big { 0.0 } else { x };
    v.iter().map(|z| cx(C64::new(snap(z.re), snap(z.im)))).collect::<Vec<_>>().join(",")
}

/// `{command, seed, tolerances, result}`.
pub fn envelope(command: &str, seed: u64, tol: &Tolerances, result: impl Serialize) -> String {
    let v: Value = json!({
        "command": command,
        "seed": seed,
        "tolerances": tol,
        "result": result,
    });
    serde_json::to_string_pretty(&v).expect("serializable") + "\n"
}

/// Writes to `path` or stdout.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Invalid(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tidy_rounds() {
        assert_eq!(tidy(0.30000000000000004), 0.3);
        assert_eq!(tidy(-1e-300 * 0.0), 0.0);
        assert_eq!(cx(C64::new(1.0, -0.5)), "1-0.5i");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(HermError::InvalidParameter("x".into())).code(), 2);
        assert_eq!(CliError::Mismatch("x".into()).code(), 1);
    }
}

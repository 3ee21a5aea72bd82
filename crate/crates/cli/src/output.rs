//! CSV emission: fixed column order, header always present, numbers in
//! fixed decimal notation with nine significant digits.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::CliError;

/// Fixed decimal notation with nine significant digits.
pub fn sig9(value: f64) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    if value == 0.0 {
        return format!("{:.8}", 0.0);
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    let s = format!("{value:.decimals$}");
    // rounding can carry into a new leading digit
    let digits = s.chars().filter(char::is_ascii_digit).count();
    let leading_zeros = s
        .trim_start_matches('-')
        .chars()
        .take_while(|c| *c == '0' || *c == '.')
        .filter(|c| *c == '0')
        .count();
    if digits - leading_zeros > 9 && decimals > 0 {
        let decimals = decimals - 1;
        return format!("{value:.decimals$}");
    }
    s
}

/// Builds a CSV document in memory.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[String]) -> Result<Self, CliError> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(header).map_err(CliError::runtime)?;
        Ok(Self { writer })
    }

    pub fn with_columns(header: &[&str]) -> Result<Self, CliError> {
        Self::new(&header.iter().map(|s| s.to_string()).collect::<Vec<_>>())
    }

    pub fn row(&mut self, fields: &[String]) -> Result<(), CliError> {
        self.writer.write_record(fields).map_err(CliError::runtime)
    }

    pub fn into_bytes(self) -> Result<Vec<u8>, CliError> {
        self.writer.into_inner().map_err(|e| CliError::Runtime(e.to_string()))
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::Runtime(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, bytes),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Runtime(e.to_string())),
    }
}

//! Tabular and JSON documents, written atomically.

use std::io::Write;
use std::path::Path;

use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A command's result in both output forms.
#[derive(Debug, Clone)]
pub struct Document {
    /// `#` lines above the header.
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// `#` lines after the last row.
    pub trailer: Vec<String>,
    pub json: Value,
}

/// 17 significant digits; NaN as `nan`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

impl Document {
    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Json => {
                let mut out = serde_json::to_vec_pretty(&self.json)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                out.push(b'\n');
                Ok(out)
            }
            Format::Csv => self.csv(),
        }
    }

    fn csv(&self) -> Result<Vec<u8>, CliError> {
        let mut out = Vec::new();
        for line in &self.comments {
            writeln!(out, "# {line}")?;
        }
        {
            let mut writer = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(&mut out);
            writer.write_record(&self.header).map_err(csv_error)?;
            for row in &self.rows {
                writer.write_record(row).map_err(csv_error)?;
            }
            writer.flush()?;
        }
        for line in &self.trailer {
            writeln!(out, "# {line}")?;
        }
        Ok(out)
    }
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e))
}

/// Writes through a temporary file in the destination directory so that an
/// interrupted or failed run never leaves a partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

//! Point-file reading and writing, synthetic generators and run configuration.

mod config;
mod synthetic;

pub use config::FitConfig;
pub use synthetic::{gen_synthetic, GroundTruth, SyntheticKind, SyntheticParams};

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Result, WqisaError};

/// Column separator of a point file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CloudFormat {
    /// Commas or whitespace, chosen per line.
    #[default]
    Auto,
    /// Whitespace-separated.
    Xyz,
    /// Comma-separated; a non-numeric first row is taken as a header.
    Csv,
}

impl FromStr for CloudFormat {
    type Err = WqisaError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(CloudFormat::Auto),
            "xyz" => Ok(CloudFormat::Xyz),
            "csv" => Ok(CloudFormat::Csv),
            other => Err(WqisaError::InvalidParameter(format!(
                "unknown format '{other}'"
            ))),
        }
    }
}

fn split_fields(line: &str, format: CloudFormat) -> Vec<&str> {
    let comma = match format {
        CloudFormat::Auto => line.contains(','),
        CloudFormat::Xyz => false,
        CloudFormat::Csv => true,
    };
    if comma {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

/// Parses point-file text: one point per line, last column is the response,
/// `#` lines and blank lines are skipped.
pub fn parse_cloud(text: &str, format: CloudFormat) -> Result<PointCloud> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    let mut seen_data = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields = split_fields(line, format);
        let first = !seen_data;
        seen_data = true;
        if first && format == CloudFormat::Csv && fields.iter().all(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        let mut row = Vec::with_capacity(fields.len());
        for f in &fields {
            let v = f.parse::<f64>().map_err(|_| WqisaError::Parse {
                line: line_no,
                message: format!("'{f}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(WqisaError::Parse {
                    line: line_no,
                    message: format!("'{f}' is not finite"),
                });
            }
            row.push(v);
        }
        if row.len() < 2 {
            return Err(WqisaError::Parse {
                line: line_no,
                message: format!("need at least 2 columns, found {}", row.len()),
            });
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(WqisaError::Parse {
                    line: line_no,
                    message: format!("expected {w} columns, found {}", row.len()),
                })
            }
            _ => {}
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(WqisaError::EmptyInput);
    }
    PointCloud::from_rows(&rows)
}

pub fn load_cloud(path: impl AsRef<Path>, format: CloudFormat) -> Result<PointCloud> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| WqisaError::Io(format!("{}: {e}", path.display())))?;
    let format = match format {
        CloudFormat::Auto if path.extension().is_some_and(|e| e == "csv") => CloudFormat::Csv,
        f => f,
    };
    parse_cloud(&text, format)
}

/// Point-file text with numbers in shortest round-trip form.
pub fn format_cloud(cloud: &PointCloud, format: CloudFormat) -> String {
    let sep = if format == CloudFormat::Csv { "," } else { " " };
    let mut out = String::new();
    for i in 0..cloud.len() {
        for (j, v) in cloud.record(i).iter().enumerate() {
            if j > 0 {
                out.push_str(sep);
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

pub fn save_cloud(path: impl AsRef<Path>, cloud: &PointCloud, format: CloudFormat) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_cloud(cloud, format))
        .map_err(|e| WqisaError::Io(format!("{}: {e}", path.display())))
}

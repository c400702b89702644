use std::fmt;
use std::path::Path;

use choi_sqpt::{BackendConfig, Error};
use num_complex::Complex64;
use serde::Serialize;

pub const EXIT_BAD_ARGS: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_PHYSICALITY: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn bad_args(message: impl fmt::Display) -> Self {
        Self {
            code: EXIT_BAD_ARGS,
            message: message.to_string(),
        }
    }

    pub fn parse(message: impl fmt::Display) -> Self {
        Self {
            code: EXIT_PARSE,
            message: message.to_string(),
        }
    }

    pub fn physicality(message: impl fmt::Display) -> Self {
        Self {
            code: EXIT_PHYSICALITY,
            message: message.to_string(),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        match err {
            Error::NotTracePreserving { .. } | Error::NonPhysicalProbability(_) | Error::InvalidState(_) => {
                Self::physicality(err)
            }
            Error::Json(_) | Error::Format(_) => Self::parse(err),
            _ => Self::bad_args(err),
        }
    }
}

/// Where the channel came from, echoed into every report.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum ChannelDescriptor {
    Preset { name: String, params: Vec<f64>, dim: usize },
    File { path: String, dim: usize, kraus_count: usize },
}

#[derive(Debug, Default, Serialize)]
pub struct SettingCounts {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distinct: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inferred: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct RunReport<R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub args: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelDescriptor>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backend: Option<BackendConfig>,
    pub results: R,
    pub settings: SettingCounts,
    pub duration_ms: f64,
}

pub fn complex(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Prints the report (JSON, or `pretty` when requested) and writes it to `output`.
pub fn emit<R: Serialize>(
    report: &RunReport<R>,
    output: Option<&Path>,
    pretty: Option<String>,
) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    if let Some(path) = output {
        std::fs::write(path, format!("{json}\n"))
            .map_err(|e| CliError::bad_args(format!("cannot write {}: {e}", path.display())))?;
    }
    match pretty {
        Some(table) => print!("{table}"),
        None => println!("{json}"),
    }
    Ok(())
}

//! Structured scenario configuration: a JSON file with the detection-model
//! fields, the sensing channel given either as the gram matrix directly or
//! as the channel matrix to be squared.
//!
//! Complex entries are written as two-element arrays [re, im].

use std::fmt;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::CMatrix;
use crate::radar::{RadarError, RadarScenario};

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Io { path: String, message: String },
    Parse(String),
    Field { field: String, message: String },
    Radar(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, message } => write!(f, "cannot read {path}: {message}"),
            ConfigError::Parse(msg) => write!(f, "malformed scenario config: {msg}"),
            ConfigError::Field { field, message } => {
                write!(f, "scenario field `{field}`: {message}")
            }
            ConfigError::Radar(msg) => write!(f, "invalid scenario: {msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl From<RadarError> for ConfigError {
    fn from(e: RadarError) -> Self {
        ConfigError::Radar(e.to_string())
    }
}

/// On-disk scenario: exactly one of `gram` (Hermitian, sensing-channel gram
/// matrix) or `h_s` (arbitrary channel matrix, gram formed internally).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_s: Option<Vec<Vec<[f64; 2]>>>,
    pub mean_square_amp: f64,
    pub snapshots: usize,
    pub noise_psd: f64,
    pub pfa: f64,
    pub power_budget: f64,
}

fn matrix_from_rows(field: &str, rows: &[Vec<[f64; 2]>]) -> Result<CMatrix, ConfigError> {
    if rows.is_empty() {
        return Err(ConfigError::Field {
            field: field.into(),
            message: "matrix has no rows".into(),
        });
    }
    let cols = rows[0].len();
    if cols == 0 {
        return Err(ConfigError::Field {
            field: field.into(),
            message: "matrix has no columns".into(),
        });
    }
    let mut entries = Vec::with_capacity(rows.len() * cols);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(ConfigError::Field {
                field: field.into(),
                message: format!("row {i} has {} entries, expected {cols}", row.len()),
            });
        }
        for &[re, im] in row {
            if !re.is_finite() || !im.is_finite() {
                return Err(ConfigError::Field {
                    field: field.into(),
                    message: format!("row {i} contains a non-finite entry"),
                });
            }
            entries.push(Complex64::new(re, im));
        }
    }
    Ok(CMatrix::from_rows(rows.len(), cols, &entries))
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn to_scenario(&self) -> Result<RadarScenario, ConfigError> {
        let gram = match (&self.gram, &self.h_s) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::Field {
                    field: "gram".into(),
                    message: "give either `gram` or `h_s`, not both".into(),
                })
            }
            (None, None) => {
                return Err(ConfigError::Field {
                    field: "gram".into(),
                    message: "one of `gram` or `h_s` is required".into(),
                })
            }
            (Some(rows), None) => {
                let m = matrix_from_rows("gram", rows)?;
                if !m.is_square() {
                    return Err(ConfigError::Field {
                        field: "gram".into(),
                        message: format!("must be square, got {}x{}", m.rows(), m.cols()),
                    });
                }
                if !m.is_hermitian(1e-12 * m.frobenius_norm().max(1.0)) {
                    return Err(ConfigError::Field {
                        field: "gram".into(),
                        message: "must be Hermitian".into(),
                    });
                }
                m
            }
            (None, Some(rows)) => {
                let h = matrix_from_rows("h_s", rows)?;
                h.dagger().mul(&h)
            }
        };
        let scenario = RadarScenario {
            gram,
            mean_square_amp: self.mean_square_amp,
            snapshots: self.snapshots,
            noise_psd: self.noise_psd,
            pfa: self.pfa,
            power_budget: self.power_budget,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

//! Tabular records for every CLI output, with comma-separated writers and
//! the matching parsers so emitted tables round-trip.
//!
//! Numbers are written with 12 significant digits in scientific notation.
//! Fields containing commas or quotes are quoted CSV-style; empty cells are
//! absent optional values. Every record type also serializes to JSON for the
//! structured output mode.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::grid::{DesignEntry, DesignGrid};
use crate::lp::FuzzRow;

#[derive(Debug, Clone, PartialEq)]
pub enum TableError {
    MissingHeader { expected: String },
    BadRow { line: usize, message: String },
}

impl fmt::Display for TableError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableError::MissingHeader { expected } => {
                write!(f, "table header missing or wrong, expected `{expected}`")
            }
            TableError::BadRow { line, message } => write!(f, "line {line}: {message}"),
        }
    }
}

impl std::error::Error for TableError {}

pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn quote(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Split one CSV line honoring double-quoted fields.
fn split_row(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut chars = line.chars().peekable();
    let mut in_quotes = false;
    while let Some(ch) = chars.next() {
        match ch {
            '"' if in_quotes => {
                if chars.peek() == Some(&'"') {
                    chars.next();
                    cur.push('"');
                } else {
                    in_quotes = false;
                }
            }
            '"' => in_quotes = true,
            ',' if !in_quotes => {
                fields.push(std::mem::take(&mut cur));
            }
            _ => cur.push(ch),
        }
    }
    fields.push(cur);
    fields
}

fn parse_f64(line: usize, field: &str, s: &str) -> Result<f64, TableError> {
    s.parse().map_err(|_| TableError::BadRow {
        line,
        message: format!("field `{field}`: cannot parse `{s}` as a number"),
    })
}

fn parse_opt_f64(line: usize, field: &str, s: &str) -> Result<Option<f64>, TableError> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_f64(line, field, s).map(Some)
    }
}

fn parse_usize(line: usize, field: &str, s: &str) -> Result<usize, TableError> {
    s.parse().map_err(|_| TableError::BadRow {
        line,
        message: format!("field `{field}`: cannot parse `{s}` as an integer"),
    })
}

fn parse_u64(line: usize, field: &str, s: &str) -> Result<u64, TableError> {
    s.parse().map_err(|_| TableError::BadRow {
        line,
        message: format!("field `{field}`: cannot parse `{s}` as an integer"),
    })
}

fn parse_bool(line: usize, field: &str, s: &str) -> Result<bool, TableError> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(TableError::BadRow {
            line,
            message: format!("field `{field}`: expected true or false, got `{s}`"),
        }),
    }
}

fn body_rows(
    text: &str,
    header: &str,
    ncols: usize,
) -> Result<Vec<(usize, Vec<String>)>, TableError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first.trim_end() == header => {}
        _ => {
            return Err(TableError::MissingHeader {
                expected: header.to_string(),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_row(line.trim_end());
        if fields.len() != ncols {
            return Err(TableError::BadRow {
                line: idx + 1,
                message: format!("expected {ncols} fields, got {}", fields.len()),
            });
        }
        rows.push((idx + 1, fields));
    }
    Ok(rows)
}

/// One front row: the sampled point, whether it is an envelope contact, and
/// for contacts the supporting-line multipliers of the hull edge starting
/// there (absent on the last contact and on non-contacts).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontRecord {
    pub xi: f64,
    pub g: f64,
    pub is_contact: bool,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
}

pub const FRONT_HEADER: &str = "xi,g,is_contact,lambda,mu";

pub fn write_front_table(rows: &[FrontRecord]) -> String {
    let mut out = String::from(FRONT_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_num(r.xi),
            fmt_num(r.g),
            r.is_contact,
            fmt_opt(r.lambda),
            fmt_opt(r.mu),
        ));
    }
    out
}

pub fn parse_front_table(text: &str) -> Result<Vec<FrontRecord>, TableError> {
    body_rows(text, FRONT_HEADER, 5)?
        .into_iter()
        .map(|(line, f)| {
            Ok(FrontRecord {
                xi: parse_f64(line, "xi", &f[0])?,
                g: parse_f64(line, "g", &f[1])?,
                is_contact: parse_bool(line, "is_contact", &f[2])?,
                lambda: parse_opt_f64(line, "lambda", &f[3])?,
                mu: parse_opt_f64(line, "mu", &f[4])?,
            })
        })
        .collect()
}

/// One mixture atom of a plan, with the curve landmarks repeated per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub budget: f64,
    pub atom: usize,
    pub weight: f64,
    pub power: f64,
    pub rho: f64,
    pub pd: f64,
    pub expected_pd: f64,
    pub deterministic_pd: f64,
    pub inflection_power: f64,
    pub tangent_power: f64,
}

pub const PLAN_HEADER: &str =
    "budget,atom,weight,power,rho,pd,expected_pd,deterministic_pd,inflection_power,tangent_power";

pub fn write_plan_table(rows: &[PlanRecord]) -> String {
    let mut out = String::from(PLAN_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            fmt_num(r.budget),
            r.atom,
            fmt_num(r.weight),
            fmt_num(r.power),
            fmt_num(r.rho),
            fmt_num(r.pd),
            fmt_num(r.expected_pd),
            fmt_num(r.deterministic_pd),
            fmt_num(r.inflection_power),
            fmt_num(r.tangent_power),
        ));
    }
    out
}

pub fn parse_plan_table(text: &str) -> Result<Vec<PlanRecord>, TableError> {
    body_rows(text, PLAN_HEADER, 10)?
        .into_iter()
        .map(|(line, f)| {
            Ok(PlanRecord {
                budget: parse_f64(line, "budget", &f[0])?,
                atom: parse_usize(line, "atom", &f[1])?,
                weight: parse_f64(line, "weight", &f[2])?,
                power: parse_f64(line, "power", &f[3])?,
                rho: parse_f64(line, "rho", &f[4])?,
                pd: parse_f64(line, "pd", &f[5])?,
                expected_pd: parse_f64(line, "expected_pd", &f[6])?,
                deterministic_pd: parse_f64(line, "deterministic_pd", &f[7])?,
                inflection_power: parse_f64(line, "inflection_power", &f[8])?,
                tangent_power: parse_f64(line, "tangent_power", &f[9])?,
            })
        })
        .collect()
}

/// One Monte Carlo report row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRecord {
    pub label: String,
    pub trials: usize,
    pub hits: usize,
    pub empirical: f64,
    pub target: f64,
    pub ci_half_width: f64,
    pub seed: u64,
    pub z_mean: Option<f64>,
    pub z_standard_error: Option<f64>,
    pub z_expected: Option<f64>,
}

pub const MC_HEADER: &str =
    "label,trials,hits,empirical,target,ci_half_width,seed,z_mean,z_standard_error,z_expected";

pub fn write_mc_table(rows: &[McRecord]) -> String {
    let mut out = String::from(MC_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            quote(&r.label),
            r.trials,
            r.hits,
            fmt_num(r.empirical),
            fmt_num(r.target),
            fmt_num(r.ci_half_width),
            r.seed,
            fmt_opt(r.z_mean),
            fmt_opt(r.z_standard_error),
            fmt_opt(r.z_expected),
        ));
    }
    out
}

pub fn parse_mc_table(text: &str) -> Result<Vec<McRecord>, TableError> {
    body_rows(text, MC_HEADER, 10)?
        .into_iter()
        .map(|(line, f)| {
            Ok(McRecord {
                label: f[0].clone(),
                trials: parse_usize(line, "trials", &f[1])?,
                hits: parse_usize(line, "hits", &f[2])?,
                empirical: parse_f64(line, "empirical", &f[3])?,
                target: parse_f64(line, "target", &f[4])?,
                ci_half_width: parse_f64(line, "ci_half_width", &f[5])?,
                seed: parse_u64(line, "seed", &f[6])?,
                z_mean: parse_opt_f64(line, "z_mean", &f[7])?,
                z_standard_error: parse_opt_f64(line, "z_standard_error", &f[8])?,
                z_expected: parse_opt_f64(line, "z_expected", &f[9])?,
            })
        })
        .collect()
}

pub const FUZZ_HEADER: &str = "case_id,budget,oracle_value,mixture_value,delta,pass";

pub fn write_fuzz_table(rows: &[FuzzRow]) -> String {
    let mut out = String::from(FUZZ_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.case_id,
            fmt_num(r.budget),
            fmt_num(r.oracle_value),
            fmt_num(r.mixture_value),
            fmt_num(r.delta),
            r.pass,
        ));
    }
    out
}

pub fn parse_fuzz_table(text: &str) -> Result<Vec<FuzzRow>, TableError> {
    body_rows(text, FUZZ_HEADER, 6)?
        .into_iter()
        .map(|(line, f)| {
            Ok(FuzzRow {
                case_id: parse_u64(line, "case_id", &f[0])?,
                budget: parse_f64(line, "budget", &f[1])?,
                oracle_value: parse_f64(line, "oracle_value", &f[2])?,
                mixture_value: parse_f64(line, "mixture_value", &f[3])?,
                delta: parse_f64(line, "delta", &f[4])?,
                pass: parse_bool(line, "pass", &f[5])?,
            })
        })
        .collect()
}

/// One verification check outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

pub const CHECK_HEADER: &str = "check,pass,detail";

pub fn write_check_table(rows: &[CheckRecord]) -> String {
    let mut out = String::from(CHECK_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{},{}\n", quote(&r.name), r.pass, quote(&r.detail)));
    }
    out
}

pub fn parse_check_table(text: &str) -> Result<Vec<CheckRecord>, TableError> {
    body_rows(text, CHECK_HEADER, 3)?
        .into_iter()
        .map(|(line, f)| {
            Ok(CheckRecord {
                name: f[0].clone(),
                pass: parse_bool(line, "pass", &f[1])?,
                detail: f[2].clone(),
            })
        })
        .collect()
}

pub const GRID_HEADER: &str = "design_id,cost,perf";

pub fn write_grid_table(grid: &DesignGrid) -> String {
    let mut out = String::from(GRID_HEADER);
    out.push('\n');
    for e in &grid.entries {
        out.push_str(&format!(
            "{},{},{}\n",
            quote(&e.id),
            fmt_num(e.cost),
            fmt_num(e.perf)
        ));
    }
    out
}

pub fn parse_grid_table(text: &str) -> Result<DesignGrid, TableError> {
    let entries = body_rows(text, GRID_HEADER, 3)?
        .into_iter()
        .map(|(line, f)| {
            Ok(DesignEntry {
                id: f[0].clone(),
                cost: parse_f64(line, "cost", &f[1])?,
                perf: parse_f64(line, "perf", &f[2])?,
            })
        })
        .collect::<Result<Vec<_>, TableError>>()?;
    Ok(DesignGrid::new(entries))
}

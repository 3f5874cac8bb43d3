use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{BenchError, StageReport};

pub const STAGE_CSV_HEADER: &str = "stage,e1,e2,p,h,mean_us,median_us,backend";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown report format {other:?} (csv, json)")),
        }
    }
}

#[derive(Serialize)]
struct StageRow<'a> {
    stage: &'a str,
    e1: u64,
    e2: u64,
    p: u64,
    h: u64,
    mean_us: Option<String>,
    median_us: Option<String>,
    backend: &'a str,
}

/// Timing cells are empty for counters-only reports.
pub fn stage_csv(reports: &[StageReport]) -> Result<String, BenchError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        w.serialize(StageRow {
            stage: &r.stage,
            e1: r.e1,
            e2: r.e2,
            p: r.p,
            h: r.h,
            mean_us: r.mean_us.map(|v| format!("{v:.3}")),
            median_us: r.median_us.map(|v| format!("{v:.3}")),
            backend: &r.backend,
        })?;
    }
    if reports.is_empty() {
        return Ok(format!("{STAGE_CSV_HEADER}\n"));
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_stage_csv(path: &Path, reports: &[StageReport]) -> Result<(), BenchError> {
    fs::write(path, stage_csv(reports)?)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), BenchError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Reads a report back, rejecting unknown or missing fields.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, BenchError> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

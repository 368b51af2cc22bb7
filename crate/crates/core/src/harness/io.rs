//! CSV output for experiment records and JSON run plans.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::experiment::{sort_records, ExperimentRecord, Family};
use crate::bilinear::{Method, WeightKind};
use crate::counting::CountMethod;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 15] = [
    "q",
    "M",
    "N",
    "L",
    "seed",
    "weight_kind",
    "norm1",
    "norm2",
    "norm_inf",
    "abs_sum",
    "error_bound",
    "bound_name",
    "bound_value",
    "ratio",
    "wall_time_seconds",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn row(r: &ExperimentRecord) -> [String; 15] {
    [
        r.q.to_string(),
        r.m.to_string(),
        r.n.to_string(),
        r.l.to_string(),
        r.seed.to_string(),
        r.weight_kind.clone(),
        format_float(r.norm1),
        format_float(r.norm2),
        format_float(r.norm_inf),
        format_float(r.abs_sum),
        format_float(r.error_bound),
        r.bound_name.clone(),
        format_float(r.bound_value),
        format_float(r.ratio),
        format_float(r.wall_time_seconds),
    ]
}

/// Writes the header and the records in canonical order.
pub fn write_records<W: Write>(
    records: &[ExperimentRecord],
    out: W,
) -> std::result::Result<(), csv::Error> {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &sorted {
        w.write_record(row(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn records_to_string(records: &[ExperimentRecord]) -> String {
    let mut buf = Vec::new();
    write_records(records, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("records are valid UTF-8")
}

pub fn emit_csv(records: &[ExperimentRecord], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_records(records, file).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_records(text: &str) -> std::result::Result<Vec<ExperimentRecord>, csv::Error> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(csv::Error::from(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!(
                "unexpected header: {}",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        )));
    }
    rdr.deserialize().collect()
}

pub fn read_csv(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_records(&text).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

/// Every CLI parameter, loadable from a JSON file. Keys match the flag names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunPlan {
    pub q: u64,
    pub m: i64,
    pub n: i64,
    #[serde(rename = "K")]
    pub k: u64,
    pub r: u32,
    pub epsilon: f64,
    #[serde(rename = "Q")]
    pub big_q: u64,
    #[serde(rename = "N")]
    pub big_n: u64,
    #[serde(rename = "L")]
    pub l: u64,
    /// Support size; `null` means full support.
    #[serde(rename = "M")]
    pub big_m: Option<usize>,
    pub weights: WeightKind,
    pub seed: u64,
    pub method: Method,
    pub count_method: CountMethodName,
    pub family: Family,
    pub out: Option<PathBuf>,
}

/// Serializable mirror of [`CountMethod`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMethodName {
    #[default]
    Convolution,
    Exhaustive,
}

impl From<CountMethodName> for CountMethod {
    fn from(m: CountMethodName) -> Self {
        match m {
            CountMethodName::Convolution => CountMethod::Convolution,
            CountMethodName::Exhaustive => CountMethod::Exhaustive,
        }
    }
}

impl Default for RunPlan {
    fn default() -> Self {
        RunPlan {
            q: 101,
            m: 1,
            n: 1,
            k: 10,
            r: 2,
            epsilon: 0.1,
            big_q: 256,
            big_n: 16,
            l: 0,
            big_m: None,
            weights: WeightKind::Const,
            seed: 0,
            method: Method::Fast,
            count_method: CountMethodName::Convolution,
            family: Family::Kloosterman,
            out: None,
        }
    }
}

impl RunPlan {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run plans always serialize")
    }
}

pub fn load_config(path: &Path) -> Result<RunPlan> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    RunPlan::from_json(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn save_config(plan: &RunPlan, path: &Path) -> Result<()> {
    fs::write(path, plan.to_json()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

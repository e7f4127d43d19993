//! CSV and JSON artifacts.
//!
//! Every CSV starts with `#` comment lines: the tool version and the full
//! configuration, then one line per column naming the operation that
//! produced it. Eigenvalues are printed with 15 significant digits.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::Group;
use crate::rep::Irrep;
use crate::shift::{BlockSpectrum, SpectrumReport, CLUSTER_TOLERANCE};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// A CSV body plus its column documentation.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    /// `(column, producing operation)` in column order.
    pub columns: Vec<(&'static str, &'static str)>,
    /// Header row and data rows.
    pub body: String,
}

impl CsvTable {
    pub fn from_rows<T: Serialize>(columns: Vec<(&'static str, &'static str)>, rows: &[T]) -> Result<Self> {
        let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(Vec::new());
        if rows.is_empty() {
            w.write_record(columns.iter().map(|c| c.0)).map_err(csv_error)?;
        }
        for r in rows {
            w.serialize(r).map_err(csv_error)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        let body = String::from_utf8(bytes).map_err(|e| Error::Io(std::io::Error::other(e)))?;
        Ok(CsvTable { columns, body })
    }

    /// The full file: comment header, then the CSV.
    pub fn render(&self, config: &str) -> String {
        let mut out = format!("# hslab {TOOL_VERSION} config={config}\n");
        for (name, source) in &self.columns {
            let _ = writeln!(out, "# column {name}: {source}");
        }
        out.push_str(&self.body);
        out
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Eigenvalue text with 15 significant digits.
pub fn format_eigenvalue(v: f64) -> String {
    // normalize -0 so reruns and platforms agree on the sign of zero
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.14e}")
}

/// `[2,1]|[2,1]` style label of an irrep tuple.
pub fn tuple_label(irreps: &[Irrep], tuple: &[usize]) -> String {
    tuple
        .iter()
        .map(|&t| irreps[t].label.to_string())
        .collect::<Vec<_>>()
        .join("|")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub group: String,
    pub k: usize,
    pub tuple_label: String,
    pub eigenvalue: String,
    pub multiplicity: usize,
}

pub const SPECTRUM_COLUMNS: [(&str, &str); 5] = [
    ("group", "group descriptor"),
    ("k", "number of copies"),
    ("tuple_label", "irrep tuple of the Fourier block (block_b)"),
    ("eigenvalue", "eigenvalue of the unnormalized block B (spectrum)"),
    (
        "multiplicity",
        "eigenvalue multiplicity inside the block; the block itself repeats prod d_rho times",
    ),
];

/// Clusters the eigenvalues of one block (descending input).
pub fn cluster_block(eigenvalues: &[f64]) -> Vec<(f64, usize)> {
    let weighted: Vec<(f64, usize)> = eigenvalues.iter().map(|&v| (v, 1)).collect();
    SpectrumReport::from_weighted(&weighted)
        .clusters
        .into_iter()
        .map(|c| (c.value, c.multiplicity))
        .collect()
}

pub fn spectrum_rows(group: &Group, irreps: &[Irrep], k: usize, sweep: &[BlockSpectrum]) -> Vec<SpectrumRow> {
    let mut rows = Vec::new();
    for b in sweep {
        let label = tuple_label(irreps, &b.tuple);
        for (value, multiplicity) in cluster_block(&b.eigenvalues) {
            rows.push(SpectrumRow {
                group: group.descriptor().to_string(),
                k,
                tuple_label: label.clone(),
                eigenvalue: format_eigenvalue(value),
                multiplicity,
            });
        }
    }
    rows
}

/// A JSON-friendly eigenvalue cluster.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterJson {
    pub value: String,
    pub multiplicity: usize,
}

pub fn clusters_json(report: &SpectrumReport) -> Vec<ClusterJson> {
    report
        .clusters
        .iter()
        .map(|c| ClusterJson {
            value: format_eigenvalue(c.value),
            multiplicity: c.multiplicity,
        })
        .collect()
}

/// Block spectrum in JSON form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockJson {
    pub tuple: Vec<usize>,
    pub label: String,
    pub multiplicity: usize,
    pub eigenvalues: Vec<ClusterJson>,
}

pub fn blocks_json(irreps: &[Irrep], sweep: &[BlockSpectrum]) -> Vec<BlockJson> {
    sweep
        .iter()
        .map(|b| BlockJson {
            tuple: b.tuple.clone(),
            label: tuple_label(irreps, &b.tuple),
            multiplicity: b.multiplicity,
            eigenvalues: cluster_block(&b.eigenvalues)
                .into_iter()
                .map(|(v, m)| ClusterJson {
                    value: format_eigenvalue(v),
                    multiplicity: m,
                })
                .collect(),
        })
        .collect()
}

/// Tolerance used when grouping eigenvalues in every report.
pub const REPORT_CLUSTER_TOLERANCE: f64 = CLUSTER_TOLERANCE;

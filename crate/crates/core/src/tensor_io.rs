//! Text serialization of adjacency tensors.
//!
//! A tensor file is a single `#`-prefixed JSON header line followed by CSV:
//!
//! ```text
//! # {"n":4,"m":3,"model":{"kind":"gaussian","n":4,"m":3,"rho":0.5},"hypothesis":"h1","seed":7}
//! rank,value
//! 0,0.3183
//! 1,-1.2
//! 2,0.07
//! 3,2.5
//! ```
//!
//! A pair file stores both tensors of a sample with columns `rank,a1,a2`.
//! Ranks are the lexicographic hyperedge ranks (0-based, dense, ascending).
//! Values use the shortest decimal form that parses back to the same `f64`.
//! The planted permutation of an H₁ sample is never written to a tensor file.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{AdjacencyTensor, Hypothesis, ModelSpec, SamplePair};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorHeader {
    pub n: usize,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypothesis: Option<Hypothesis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Which tensor to read out of a file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Column {
    A1,
    A2,
}

impl Column {
    fn name(self) -> &'static str {
        match self {
            Column::A1 => "a1",
            Column::A2 => "a2",
        }
    }
}

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn write_rows(path: &Path, header: &TensorHeader, columns: &[&str], data: &[&[f64]]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let json = serde_json::to_string(header).expect("header serializes");
    writeln!(out, "# {json}").map_err(|e| Error::io(path, e))?;
    let mut writer = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::io(path, e.into());
    let mut names = vec!["rank"];
    names.extend_from_slice(columns);
    writer.write_record(&names).map_err(io)?;
    let len = data.first().map_or(0, |d| d.len());
    let mut record = Vec::with_capacity(columns.len() + 1);
    for r in 0..len {
        record.clear();
        record.push(r.to_string());
        record.extend(data.iter().map(|d| d[r].to_string()));
        writer.write_record(&record).map_err(io)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

pub fn write_tensor(
    path: impl AsRef<Path>,
    header: &TensorHeader,
    tensor: &AdjacencyTensor,
) -> Result<()> {
    let path = path.as_ref();
    check_header(path, header, tensor)?;
    write_rows(path, header, &["value"], &[tensor.values()])
}

pub fn write_pair(path: impl AsRef<Path>, header: &TensorHeader, pair: &SamplePair) -> Result<()> {
    let path = path.as_ref();
    check_header(path, header, &pair.a1)?;
    check_header(path, header, &pair.a2)?;
    write_rows(
        path,
        header,
        &["a1", "a2"],
        &[pair.a1.values(), pair.a2.values()],
    )
}

fn check_header(path: &Path, header: &TensorHeader, tensor: &AdjacencyTensor) -> Result<()> {
    if header.n != tensor.n() || header.m != tensor.m() {
        return Err(format_err(path, "header shape disagrees with tensor"));
    }
    Ok(())
}

/// Reads one tensor. Single-tensor files serve either column; pair files
/// serve the requested one.
pub fn read_tensor(
    path: impl AsRef<Path>,
    column: Column,
) -> Result<(TensorHeader, AdjacencyTensor)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut first = String::new();
    reader
        .read_line(&mut first)
        .map_err(|e| Error::io(path, e))?;
    let json = first
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| format_err(path, "missing '# {json}' header line"))?;
    let header: TensorHeader = serde_json::from_str(json.trim())
        .map_err(|e| format_err(path, format!("bad header: {e}")))?;

    let mut csv_reader = csv::Reader::from_reader(reader);
    let names = csv_reader
        .headers()
        .map_err(|e| format_err(path, e.to_string()))?
        .clone();
    if names.get(0) != Some("rank") {
        return Err(format_err(path, "first column must be 'rank'"));
    }
    let col = names
        .iter()
        .position(|h| h == column.name())
        .or_else(|| names.iter().position(|h| h == "value"))
        .ok_or_else(|| format_err(path, format!("no '{}' or 'value' column", column.name())))?;

    let mut values = Vec::new();
    for (line, record) in csv_reader.records().enumerate() {
        let record = record.map_err(|e| format_err(path, e.to_string()))?;
        let rank: usize = record
            .get(0)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| format_err(path, format!("bad rank on data row {}", line + 1)))?;
        if rank != values.len() {
            return Err(format_err(
                path,
                format!(
                    "ranks must be dense and ascending; expected {}, found {rank}",
                    values.len()
                ),
            ));
        }
        let value: f64 = record
            .get(col)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| format_err(path, format!("bad value on data row {}", line + 1)))?;
        values.push(value);
    }
    let tensor = AdjacencyTensor::from_values(header.n, header.m, values)
        .map_err(|e| format_err(path, e.to_string()))?;
    Ok((header, tensor))
}

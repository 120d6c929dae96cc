use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{ClassDataset, ClassId, Embedding};
use crate::scalar::Scalar;

/// Leading bytes of the binary layout. Followed by little-endian `u32 dim`,
/// `u32 count`, then `count` records of `u32 label` and `dim` `f32` values.
pub const BINARY_MAGIC: &[u8; 8] = b"TEALEMB1";
const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFormat {
    Csv,
    Binary,
}

impl EmbeddingFormat {
    /// `.csv` is CSV, anything else binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => EmbeddingFormat::Csv,
            _ => EmbeddingFormat::Binary,
        }
    }
}

impl FromStr for EmbeddingFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(EmbeddingFormat::Csv),
            "binary" | "bin" => Ok(EmbeddingFormat::Binary),
            other => Err(Error::invalid(format!("unknown embedding format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRecord {
    pub label: u32,
    pub values: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingFile {
    pub dim: usize,
    pub records: Vec<EmbeddingRecord>,
}

impl EmbeddingFile {
    pub fn new(dim: usize, records: Vec<EmbeddingRecord>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("embedding dimension must be positive"));
        }
        for (i, r) in records.iter().enumerate() {
            if r.values.len() != dim {
                return Err(Error::invalid(format!(
                    "record {i} has {} values, expected {dim}",
                    r.values.len()
                )));
            }
            if r.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("record {i} has a non-finite value")));
            }
        }
        Ok(EmbeddingFile { dim, records })
    }
}

pub fn encode_binary(file: &EmbeddingFile) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + file.records.len() * (4 + 4 * file.dim));
    out.extend_from_slice(BINARY_MAGIC);
    out.extend_from_slice(&(file.dim as u32).to_le_bytes());
    out.extend_from_slice(&(file.records.len() as u32).to_le_bytes());
    for r in &file.records {
        out.extend_from_slice(&r.label.to_le_bytes());
        for v in &r.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn parse_err(location: String, message: impl Into<String>) -> Error {
    Error::Parse { location, message: message.into() }
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4-byte slice"))
}

pub fn decode_binary(bytes: &[u8]) -> Result<EmbeddingFile> {
    if bytes.len() < BINARY_MAGIC.len() || &bytes[..BINARY_MAGIC.len()] != BINARY_MAGIC {
        return Err(parse_err("byte 0".into(), "missing TEALEMB1 magic"));
    }
    if bytes.len() < HEADER_LEN {
        return Err(parse_err(
            format!("byte {}", bytes.len()),
            format!("truncated header: expected {HEADER_LEN} bytes, found {}", bytes.len()),
        ));
    }
    let dim = u32_at(bytes, 8) as usize;
    let count = u32_at(bytes, 12) as usize;
    if dim == 0 {
        return Err(parse_err("byte 8".into(), "dimension must be positive"));
    }
    let record_len = 4 + 4 * dim;
    let expected = HEADER_LEN + count * record_len;
    if bytes.len() != expected {
        return Err(parse_err(
            format!("byte {}", bytes.len().min(expected)),
            format!(
                "{}: expected {expected} bytes for {count} records of dimension {dim}, found {}",
                if bytes.len() < expected { "truncated payload" } else { "trailing bytes" },
                bytes.len()
            ),
        ));
    }
    let mut records = Vec::with_capacity(count);
    for i in 0..count {
        let start = HEADER_LEN + i * record_len;
        let label = u32_at(bytes, start);
        let mut values = Vec::with_capacity(dim);
        for k in 0..dim {
            let at = start + 4 + 4 * k;
            let v = f32::from_le_bytes(bytes[at..at + 4].try_into().expect("4-byte slice"));
            if !v.is_finite() {
                return Err(parse_err(format!("byte {at}"), format!("non-finite value {v}")));
            }
            values.push(v);
        }
        records.push(EmbeddingRecord { label, values });
    }
    Ok(EmbeddingFile { dim, records })
}

/// Header `label,f0,…,f{d-1}`; values printed in shortest round-trip form.
pub fn encode_csv(file: &EmbeddingFile) -> String {
    let mut out = String::from("label");
    for k in 0..file.dim {
        write!(out, ",f{k}").expect("writing to a String");
    }
    out.push('\n');
    for r in &file.records {
        write!(out, "{}", r.label).expect("writing to a String");
        for v in &r.values {
            write!(out, ",{v}").expect("writing to a String");
        }
        out.push('\n');
    }
    out
}

pub fn decode_csv(text: &str) -> Result<EmbeddingFile> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err("line 1".into(), "empty file"))?;
    let cols: Vec<&str> = header.trim().split(',').collect();
    if cols.len() < 2 || cols[0] != "label" {
        return Err(parse_err("line 1".into(), "header must be `label,f0,...`"));
    }
    for (k, c) in cols[1..].iter().enumerate() {
        if *c != format!("f{k}") {
            return Err(parse_err("line 1".into(), format!("column {} should be f{k}, found `{c}`", k + 1)));
        }
    }
    let dim = cols.len() - 1;
    let mut records = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 1 {
            return Err(parse_err(
                format!("line {lineno}"),
                format!("expected {} fields, found {}", dim + 1, fields.len()),
            ));
        }
        let label = fields[0]
            .trim()
            .parse::<u32>()
            .map_err(|e| parse_err(format!("line {lineno}"), format!("bad label `{}`: {e}", fields[0])))?;
        let values = fields[1..]
            .iter()
            .map(|f| {
                let v = f
                    .trim()
                    .parse::<f32>()
                    .map_err(|e| parse_err(format!("line {lineno}"), format!("bad value `{f}`: {e}")))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(parse_err(format!("line {lineno}"), format!("non-finite value `{f}`")))
                }
            })
            .collect::<Result<Vec<f32>>>()?;
        records.push(EmbeddingRecord { label, values });
    }
    Ok(EmbeddingFile { dim, records })
}

pub fn read_embedding_file(path: &Path, format: EmbeddingFormat) -> Result<EmbeddingFile> {
    match format {
        EmbeddingFormat::Binary => decode_binary(&std::fs::read(path)?),
        EmbeddingFormat::Csv => decode_csv(&std::fs::read_to_string(path)?),
    }
}

pub fn write_embedding_file(path: &Path, format: EmbeddingFormat, file: &EmbeddingFile) -> Result<()> {
    match format {
        EmbeddingFormat::Binary => super::write_atomic(path, &encode_binary(file)),
        EmbeddingFormat::Csv => super::write_atomic(path, encode_csv(file).as_bytes()),
    }
}

/// Splits records by label. Exemplar ids are zero-based record positions.
pub fn group_by_class<S: Scalar>(file: &EmbeddingFile) -> Result<BTreeMap<ClassId, ClassDataset<S>>> {
    let mut grouped: BTreeMap<ClassId, Vec<(usize, Embedding<S>)>> = BTreeMap::new();
    for (pos, r) in file.records.iter().enumerate() {
        let values = r.values.iter().map(|&v| S::from_f64_lossy(v as f64)).collect();
        grouped.entry(r.label).or_default().push((pos, Embedding::new(values)?));
    }
    grouped
        .into_iter()
        .map(|(c, items)| ClassDataset::new(c, items).map(|d| (c, d)))
        .collect()
}

pub fn read_embeddings<S: Scalar>(
    path: &Path,
    format: EmbeddingFormat,
) -> Result<BTreeMap<ClassId, ClassDataset<S>>> {
    group_by_class(&read_embedding_file(path, format)?)
}

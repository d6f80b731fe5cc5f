//! Benchmark records and their CSV schema (v1).
//!
//! The column set is fixed and documented in the README; numeric fields
//! round-trip losslessly (floats are written in shortest form that parses
//! back to the same value). Schema violations are reported with the line
//! and column name.

use std::collections::HashMap;
use std::io::{Read, Write};
use thiserror::Error;

pub const CSV_COLUMNS: [&str; 19] = [
    "kernel",
    "size",
    "backend",
    "mqx_mode",
    "mqx_variant",
    "algo",
    "modulus_bits",
    "lanes",
    "iterations",
    "warmup",
    "total_ns",
    "unit",
    "unit_count",
    "normalized_ns",
    "checksum",
    "pinned",
    "host",
    "seed",
    "timestamp",
];

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("missing column '{0}' in CSV header")]
    MissingColumn(&'static str),
    #[error("empty input: no CSV header row")]
    NoHeader,
    #[error("line {line}: column '{column}': invalid value '{value}'")]
    BadField {
        line: usize,
        column: &'static str,
        value: String,
    },
    #[error("line {line}: {source}")]
    Malformed { line: usize, source: csv::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One measured configuration: what ran, under which protocol, and the
/// per-iteration and per-unit (butterfly or element) runtimes.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub kernel: String,
    pub size: u64,
    pub backend: String,
    pub mqx_mode: String,
    pub mqx_variant: String,
    pub algo: String,
    pub modulus_bits: u32,
    pub lanes: u32,
    /// Total runs; the timed batch is `iterations - warmup`.
    pub iterations: u32,
    pub warmup: u32,
    /// Mean wall time of one iteration, nanoseconds.
    pub total_ns: f64,
    /// "butterfly" for transforms, "element" for point-wise kernels.
    pub unit: String,
    /// Exact integer divisor: (n/2)*log2(n) butterflies or n elements.
    pub unit_count: u64,
    pub normalized_ns: f64,
    /// Output checksum, hex; defeats dead-code elimination and pins
    /// determinism for a fixed seed.
    pub checksum: String,
    pub pinned: bool,
    pub host: String,
    pub seed: u64,
    pub timestamp: u64,
}

pub fn write_csv<W: Write>(w: W, records: &[BenchRecord]) -> Result<(), CsvError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_COLUMNS)?;
    for r in records {
        out.write_record([
            r.kernel.as_str(),
            &r.size.to_string(),
            r.backend.as_str(),
            r.mqx_mode.as_str(),
            r.mqx_variant.as_str(),
            r.algo.as_str(),
            &r.modulus_bits.to_string(),
            &r.lanes.to_string(),
            &r.iterations.to_string(),
            &r.warmup.to_string(),
            &r.total_ns.to_string(),
            r.unit.as_str(),
            &r.unit_count.to_string(),
            &r.normalized_ns.to_string(),
            r.checksum.as_str(),
            &r.pinned.to_string(),
            r.host.as_str(),
            &r.seed.to_string(),
            &r.timestamp.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

impl From<csv::Error> for CsvError {
    fn from(e: csv::Error) -> Self {
        if let Some(pos) = e.position() {
            CsvError::Malformed {
                line: pos.line() as usize,
                source: e,
            }
        } else {
            CsvError::Malformed { line: 0, source: e }
        }
    }
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<BenchRecord>, CsvError> {
    let mut reader = csv::Reader::from_reader(r);
    let header = reader.headers().map_err(CsvError::from)?.clone();
    if header.is_empty() {
        return Err(CsvError::NoHeader);
    }
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, name) in header.iter().enumerate() {
        index.insert(name, i);
    }
    let mut cols = [0usize; CSV_COLUMNS.len()];
    for (slot, name) in cols.iter_mut().zip(CSV_COLUMNS.iter()) {
        *slot = *index.get(name).ok_or(CsvError::MissingColumn(name))?;
    }

    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 2; // header is line 1
        let row = row.map_err(CsvError::from)?;
        let field = |slot: usize| -> &str { row.get(cols[slot]).unwrap_or("") };
        macro_rules! parse {
            ($slot:expr, $ty:ty) => {{
                let raw = field($slot);
                raw.parse::<$ty>().map_err(|_| CsvError::BadField {
                    line,
                    column: CSV_COLUMNS[$slot],
                    value: raw.to_string(),
                })?
            }};
        }
        out.push(BenchRecord {
            kernel: field(0).to_string(),
            size: parse!(1, u64),
            backend: field(2).to_string(),
            mqx_mode: field(3).to_string(),
            mqx_variant: field(4).to_string(),
            algo: field(5).to_string(),
            modulus_bits: parse!(6, u32),
            lanes: parse!(7, u32),
            iterations: parse!(8, u32),
            warmup: parse!(9, u32),
            total_ns: parse!(10, f64),
            unit: field(11).to_string(),
            unit_count: parse!(12, u64),
            normalized_ns: parse!(13, f64),
            checksum: field(14).to_string(),
            pinned: parse!(15, bool),
            host: field(16).to_string(),
            seed: parse!(17, u64),
            timestamp: parse!(18, u64),
        });
    }
    Ok(out)
}

pub fn print_table(records: &[BenchRecord]) {
    println!(
        "{:<6} {:>8} {:<34} {:<10} {:>5}/{:<5} {:>14} {:>14}  {:<9} {:<16}",
        "kernel",
        "size",
        "engine",
        "algo",
        "iters",
        "warm",
        "ns/iter",
        "ns/unit",
        "unit",
        "checksum"
    );
    for r in records {
        let engine = if r.mqx_variant == "base" {
            r.backend.clone()
        } else {
            format!("{}[{},{}]", r.backend, r.mqx_mode, r.mqx_variant)
        };
        println!(
            "{:<6} {:>8} {:<34} {:<10} {:>5}/{:<5} {:>14.3} {:>14.4}  {:<9} {:<16}",
            r.kernel,
            r.size,
            engine,
            r.algo,
            r.iterations,
            r.warmup,
            r.total_ns,
            r.normalized_ns,
            r.unit,
            r.checksum
        );
    }
}

//! Property-check reports and the CSV conventions shared by every emitter:
//! comma separator, `\n` terminators, shortest round-trip reals and `inf`
//! for `+inf`.

use std::io::Write;

use crate::model::ExtendedReal;

/// Shortest representation that parses back to the same `f64`. Both zeros
/// print as `0.0`.
pub fn format_real(v: f64) -> String {
    if v == 0.0 {
        "0.0".to_string()
    } else if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:?}")
    }
}

pub fn format_extended(v: ExtendedReal) -> String {
    format_real(v.to_f64())
}

pub fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

/// One named inequality or identity checked over a batch of samples.
///
/// `worst` is the largest observed violation measure; the check passes when
/// `worst <= limit`, no evaluation failed and at least one sample was taken.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyRow {
    pub suite: String,
    pub check: String,
    pub function: String,
    pub samples: usize,
    pub worst: f64,
    pub limit: f64,
    pub passed: bool,
    pub seed: u64,
    pub detail: String,
}

impl PropertyRow {
    pub fn slack(&self) -> f64 {
        self.limit - self.worst
    }
}

pub const REPORT_HEADER: [&str; 10] =
    ["suite", "check", "function", "samples", "worst", "limit", "slack", "passed", "seed", "detail"];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PropertyReport {
    pub seed: u64,
    pub rows: Vec<PropertyRow>,
}

impl PropertyReport {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyRow> {
        self.rows.iter().filter(|r| !r.passed)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv_writer(out);
        w.write_record(REPORT_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.suite.clone(),
                r.check.clone(),
                r.function.clone(),
                r.samples.to_string(),
                format_real(r.worst),
                format_real(r.limit),
                format_real(r.slack()),
                r.passed.to_string(),
                r.seed.to_string(),
                r.detail.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

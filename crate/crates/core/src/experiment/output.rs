use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::run::{ExperimentResult, SummaryRow, TrialRecord};
use crate::error::{Error, Result};
use crate::estimators::Method;

pub const RECORDS_HEADER: [&str; 8] = ["estimator", "T", "trial", "err_A", "err_B", "err_max", "gram_condition", "failed"];
pub const SUMMARY_HEADER: [&str; 7] = ["estimator", "T", "n_ok", "n_failed", "median", "q1", "q3"];

/// 17 significant digits, enough to reproduce any f64 exactly.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

pub fn write_records<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORDS_HEADER)?;
    for r in records {
        w.write_record([
            r.estimator.as_str().to_string(),
            r.horizon.to_string(),
            r.trial.to_string(),
            opt(r.err_a),
            opt(r.err_b),
            opt(r.err_max),
            opt(r.gram_condition),
            r.failed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(res: &ExperimentResult, path: impl AsRef<Path>) -> Result<()> {
    write_records(&res.records, BufWriter::new(File::create(path)?))
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<TrialRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(RECORDS_HEADER) {
        return Err(Error::InvalidInput(format!("unexpected records header: {}", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut out = Vec::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row?;
        let ctx = |field: &str| Error::InvalidInput(format!("record {}: bad {field}", line + 1));
        let float = |i: usize| -> Result<Option<f64>> {
            match &row[i] {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|_| ctx(RECORDS_HEADER[i])),
            }
        };
        out.push(TrialRecord {
            estimator: row[0].parse::<Method>()?,
            horizon: row[1].parse().map_err(|_| ctx("T"))?,
            trial: row[2].parse().map_err(|_| ctx("trial"))?,
            err_a: float(3)?,
            err_b: float(4)?,
            err_max: float(5)?,
            gram_condition: float(6)?,
            failed: row[7].parse().map_err(|_| ctx("failed"))?,
        });
    }
    Ok(out)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<TrialRecord>> {
    read_records(File::open(path)?)
}

pub fn write_summary<W: Write>(summary: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for s in summary {
        w.write_record([
            s.estimator.as_str().to_string(),
            s.horizon.to_string(),
            s.n_ok.to_string(),
            s.n_failed.to_string(),
            opt(s.median),
            opt(s.q1),
            opt(s.q3),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_summary_csv(res: &ExperimentResult, path: impl AsRef<Path>) -> Result<()> {
    write_summary(&res.summary, BufWriter::new(File::create(path)?))
}

pub fn emit_config_echo(res: &ExperimentResult, path: impl AsRef<Path>) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, &res.config)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

//! Sweep result CSV: header row, LF line endings, floats with 17 significant
//! digits. Failed rows leave the numeric fields empty and carry the message
//! in `status`.

use std::io::{Read, Write};
use std::path::Path;

use super::{ExperimentError, RowStats, SweepResult, SweepRow, SweepVariable};
use crate::csvfmt::{float, parse_float};
use crate::links::Scheme;

pub const CSV_HEADER: [&str; 10] = [
    "scheme",
    "variable",
    "value",
    "error_rate",
    "halfwidth",
    "overhead_fraction",
    "slots_per_sample",
    "n_test",
    "trials",
    "status",
];

const OK: &str = "ok";
const FAILED: &str = "failed: ";

pub fn write_csv<W: Write>(result: &SweepResult, writer: W) -> Result<(), ExperimentError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for row in &result.rows {
        let head = [row.scheme.id().to_string(), row.variable.id().to_string(), float(row.value)];
        let tail: [String; 7] = match &row.stats {
            Ok(s) => [
                float(s.error_rate),
                float(s.halfwidth),
                float(s.overhead_fraction),
                s.slots_per_sample.to_string(),
                s.n_test.to_string(),
                row.trials.to_string(),
                OK.to_string(),
            ],
            Err(msg) => [
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                row.trials.to_string(),
                format!("{FAILED}{}", msg.replace(['\n', '\r'], " ")),
            ],
        };
        w.write_record(head.iter().chain(tail.iter()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<(), ExperimentError> {
    let mut buf = Vec::new();
    write_csv(result, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn parse_csv<R: Read>(reader: R) -> Result<SweepResult, ExperimentError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(ExperimentError::Malformed {
            record: 0,
            reason: format!("unexpected header {header:?}"),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let record = i + 1;
        let bad = |reason: String| ExperimentError::Malformed { record, reason };
        let num = |k: usize| parse_float(&rec[k]).ok_or_else(|| bad(format!("bad number {:?} in {}", &rec[k], CSV_HEADER[k])));
        let int = |k: usize| {
            rec[k]
                .parse::<usize>()
                .map_err(|_| bad(format!("bad count {:?} in {}", &rec[k], CSV_HEADER[k])))
        };
        let scheme = Scheme::from_id(&rec[0]).ok_or_else(|| bad(format!("unknown scheme {:?}", &rec[0])))?;
        let variable = SweepVariable::from_id(&rec[1]).ok_or_else(|| bad(format!("unknown variable {:?}", &rec[1])))?;
        let status = &rec[9];
        let stats = if status == OK {
            Ok(RowStats {
                error_rate: num(3)?,
                halfwidth: num(4)?,
                overhead_fraction: num(5)?,
                slots_per_sample: int(6)?,
                n_test: int(7)?,
            })
        } else if let Some(msg) = status.strip_prefix(FAILED) {
            Err(msg.to_string())
        } else {
            return Err(bad(format!("unknown status {status:?}")));
        };
        rows.push(SweepRow {
            scheme,
            variable,
            value: num(2)?,
            trials: int(8)?,
            stats,
        });
    }
    Ok(SweepResult { rows })
}

pub fn read_csv(path: &Path) -> Result<SweepResult, ExperimentError> {
    parse_csv(std::fs::File::open(path)?)
}

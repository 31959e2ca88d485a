//! File formats: run logs (CSV or JSONL), loss series, token corpora.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use dlmscale::ingest::{LossSeries, RunFields, RunRecord};
use serde::{Deserialize, Serialize};

/// Input or output problem attributable to the user's data.
#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("cannot open {path}")]
    Open { path: String, source: io::Error },
    #[error("row {row}: field `{field}`: {reason}")]
    Field { row: usize, field: String, reason: String },
    #[error("row {row}: {reason}")]
    Row { row: usize, reason: String },
    #[error("missing column `{0}`")]
    MissingColumn(&'static str),
    #[error(transparent)]
    Record(#[from] dlmscale::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RunsFormat {
    Csv,
    Jsonl,
}

impl RunsFormat {
    /// `.jsonl`/`.ndjson` means JSONL, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl" | "ndjson") => RunsFormat::Jsonl,
            _ => RunsFormat::Csv,
        }
    }
}

pub fn open(path: &Path) -> Result<BufReader<File>, FormatError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| FormatError::Open { path: path.display().to_string(), source })
}

pub const RUN_COLUMNS: [&str; 8] = [
    "run_id",
    "n_params",
    "unique_tokens",
    "total_tokens",
    "epochs",
    "flops",
    "final_train_loss",
    "final_val_loss",
];

const REQUIRED: [&str; 5] = ["run_id", "n_params", "unique_tokens", "total_tokens", "final_train_loss"];

/// Rows are numbered from 1, not counting the CSV header.
pub fn parse_runs<R: Read>(source: R, format: RunsFormat) -> Result<Vec<RunRecord>, FormatError> {
    match format {
        RunsFormat::Csv => parse_runs_csv(source),
        RunsFormat::Jsonl => parse_runs_jsonl(source),
    }
}

fn number(row: usize, field: &str, raw: &str) -> Result<f64, FormatError> {
    raw.trim().parse::<f64>().map_err(|e| FormatError::Field {
        row,
        field: field.into(),
        reason: format!("{e} ({raw:?})"),
    })
}

fn optional(row: usize, field: &str, raw: Option<&str>) -> Result<Option<f64>, FormatError> {
    match raw.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => number(row, field, v).map(Some),
    }
}

fn parse_runs_csv<R: Read>(source: R) -> Result<Vec<RunRecord>, FormatError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let header = rdr.headers().map_err(|e| FormatError::Row { row: 0, reason: e.to_string() })?.clone();
    let col = |name: &str| header.iter().position(|h| h == name);
    for name in REQUIRED {
        if col(name).is_none() {
            return Err(FormatError::MissingColumn(name));
        }
    }
    let idx: Vec<Option<usize>> = RUN_COLUMNS.iter().map(|c| col(c)).collect();
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| FormatError::Row { row, reason: e.to_string() })?;
        let get = |k: usize| idx[k].and_then(|j| rec.get(j));
        let req = |k: usize| number(row, RUN_COLUMNS[k], get(k).unwrap_or(""));
        let fields = RunFields {
            run_id: get(0).unwrap_or("").to_string(),
            n_params: req(1)?,
            unique_tokens: req(2)?,
            total_tokens: req(3)?,
            epochs: optional(row, "epochs", get(4))?,
            flops: optional(row, "flops", get(5))?,
            final_train_loss: req(6)?,
            final_val_loss: optional(row, "final_val_loss", get(7))?,
        };
        out.push(RunRecord::from_fields(fields)?);
    }
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonRun {
    run_id: String,
    n_params: f64,
    unique_tokens: f64,
    total_tokens: f64,
    epochs: Option<f64>,
    flops: Option<f64>,
    final_train_loss: f64,
    final_val_loss: Option<f64>,
}

fn parse_runs_jsonl<R: Read>(source: R) -> Result<Vec<RunRecord>, FormatError> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(source).lines().enumerate() {
        let row = i + 1;
        let line = line.map_err(|e| FormatError::Row { row, reason: e.to_string() })?;
        if line.trim().is_empty() {
            continue;
        }
        let j: JsonRun = serde_json::from_str(&line).map_err(|e| FormatError::Row { row, reason: e.to_string() })?;
        out.push(RunRecord::from_fields(RunFields {
            run_id: j.run_id,
            n_params: j.n_params,
            unique_tokens: j.unique_tokens,
            total_tokens: j.total_tokens,
            epochs: j.epochs,
            flops: j.flops,
            final_train_loss: j.final_train_loss,
            final_val_loss: j.final_val_loss,
        })?);
    }
    Ok(out)
}

/// Writes the full run-log schema. Floats use Rust's shortest round-trip form.
pub fn write_runs<W: Write>(out: W, runs: &[RunRecord], format: RunsFormat) -> io::Result<()> {
    match format {
        RunsFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(RUN_COLUMNS)?;
            for r in runs {
                w.write_record([
                    r.run_id.clone(),
                    r.n_params.to_string(),
                    r.unique_tokens.to_string(),
                    r.total_tokens.to_string(),
                    r.epochs.to_string(),
                    r.flops.to_string(),
                    r.final_train_loss.to_string(),
                    r.final_val_loss.map(|v| v.to_string()).unwrap_or_default(),
                ])?;
            }
            w.flush()
        }
        RunsFormat::Jsonl => {
            let mut out = out;
            for r in runs {
                serde_json::to_writer(&mut out, r)?;
                out.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct SeriesRow {
    run_id: String,
    step: u64,
    loss: f64,
}

/// Loss-series CSV (`run_id, step, loss`), grouped by run in order of first appearance.
pub fn parse_loss_series<R: Read>(source: R) -> Result<Vec<LossSeries>, FormatError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let mut runs: Vec<(String, Vec<(u64, f64)>)> = Vec::new();
    for (i, row) in rdr.deserialize::<SeriesRow>().enumerate() {
        let row_no = i + 1;
        let r = row.map_err(|e| match e.kind() {
            csv::ErrorKind::Deserialize { err, .. } => FormatError::Field {
                row: row_no,
                field: err.field().and_then(|f| ["run_id", "step", "loss"].get(f as usize)).unwrap_or(&"?").to_string(),
                reason: err.kind().to_string(),
            },
            _ => FormatError::Row { row: row_no, reason: e.to_string() },
        })?;
        match runs.iter_mut().find(|(id, _)| *id == r.run_id) {
            Some((_, pts)) => pts.push((r.step, r.loss)),
            None => runs.push((r.run_id, vec![(r.step, r.loss)])),
        }
    }
    runs.into_iter().map(|(id, pts)| LossSeries::new(id, pts).map_err(FormatError::from)).collect()
}

pub fn write_loss_series<W: Write>(out: W, series: &[LossSeries]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in series {
        for &(step, loss) in s.points() {
            w.serialize(SeriesRow { run_id: s.run_id.clone(), step, loss })?;
        }
    }
    w.flush()
}

/// Token-id sequences, one per line, comma-separated. Lines may differ in length.
pub fn parse_corpus<R: Read>(source: R) -> Result<Vec<Vec<u32>>, FormatError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(source);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| FormatError::Row { row, reason: e.to_string() })?;
        let seq = rec
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.is_empty())
            .map(|(j, s)| {
                s.parse::<u32>().map_err(|e| FormatError::Field { row, field: format!("column {}", j + 1), reason: e.to_string() })
            })
            .collect::<Result<Vec<u32>, _>>()?;
        if !seq.is_empty() {
            out.push(seq);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derives_epochs_and_flops() {
        let csv = "run_id,n_params,unique_tokens,total_tokens,final_train_loss\na,1e9,96e9,96e9,2.9\n";
        let r = parse_runs(csv.as_bytes(), RunsFormat::Csv).unwrap();
        assert_eq!((r[0].epochs, r[0].flops), (1.0, 5.76e20));
    }

    #[test]
    fn bad_field_names_row_and_column() {
        let csv = "run_id,n_params,unique_tokens,total_tokens,final_train_loss\na,1e9,1e9,1e9,2.9\nb,abc,1e9,1e9,2.9\n";
        let e = parse_runs(csv.as_bytes(), RunsFormat::Csv).unwrap_err().to_string();
        assert!(e.contains("row 2") && e.contains("n_params"), "{e}");
    }

    #[test]
    fn total_below_unique_names_run() {
        let csv = "run_id,n_params,unique_tokens,total_tokens,final_train_loss\nshort,1e9,2e9,1e9,2.9\n";
        let e = parse_runs(csv.as_bytes(), RunsFormat::Csv).unwrap_err().to_string();
        assert!(e.contains("short") && e.contains("total<unique"), "{e}");
    }

    #[test]
    fn missing_column() {
        let csv = "run_id,n_params,total_tokens,final_train_loss\n";
        assert!(matches!(parse_runs(csv.as_bytes(), RunsFormat::Csv), Err(FormatError::MissingColumn("unique_tokens"))));
    }

    #[test]
    fn extra_columns_are_ignored() {
        let csv = "lr,run_id,n_params,unique_tokens,total_tokens,final_train_loss,final_val_loss\n3e-4,a,1e9,1e9,4e9,2.9,\n";
        let r = parse_runs(csv.as_bytes(), RunsFormat::Csv).unwrap();
        assert_eq!((r[0].epochs, r[0].final_val_loss), (4.0, None));
    }

    #[test]
    fn jsonl_rows() {
        let s = "{\"run_id\":\"a\",\"n_params\":1e9,\"unique_tokens\":1e9,\"total_tokens\":2e9,\"final_train_loss\":3.0}\n\n";
        let r = parse_runs(s.as_bytes(), RunsFormat::Jsonl).unwrap();
        assert_eq!(r[0].epochs, 2.0);
        let e = parse_runs("{\"run_id\":1}\n".as_bytes(), RunsFormat::Jsonl).unwrap_err().to_string();
        assert!(e.starts_with("row 1"), "{e}");
    }

    #[test]
    fn series_groups_by_run() {
        let s = "run_id,step,loss\na,0,3\nb,0,4\na,1,2.5\n";
        let v = parse_loss_series(s.as_bytes()).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].points(), &[(0, 3.0), (1, 2.5)]);
        assert!(parse_loss_series("run_id,step,loss\na,1,3\na,0,2\n".as_bytes()).is_err());
    }

    #[test]
    fn corpus_rows() {
        let c = parse_corpus("0,1,2\n2, 1\n\n".as_bytes()).unwrap();
        assert_eq!(c, vec![vec![0, 1, 2], vec![2, 1]]);
        assert!(parse_corpus("0,x\n".as_bytes()).unwrap_err().to_string().contains("column 2"));
    }
}

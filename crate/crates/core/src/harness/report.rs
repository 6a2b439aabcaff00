use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::config::Format;
use crate::harness::trials::CellSummary;

/// Column order of the CSV report.
pub const CSV_COLUMNS: [&str; 13] = [
    "experiment_id",
    "n",
    "delta",
    "trials",
    "freq_mc_exceed",
    "freq_proj_exceed",
    "bound_term_bias",
    "bound_term_variance",
    "bound_total",
    "mean_residual_sq",
    "predicted_mean_residual_sq",
    "binom_stderr",
    "seed",
];

/// One line of the summary report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub experiment_id: String,
    pub n: usize,
    pub delta: f64,
    pub trials: usize,
    pub freq_mc_exceed: Option<f64>,
    pub freq_proj_exceed: Option<f64>,
    pub bound_term_bias: f64,
    pub bound_term_variance: f64,
    pub bound_total: f64,
    pub mean_residual_sq: Option<f64>,
    pub predicted_mean_residual_sq: f64,
    pub binom_stderr: f64,
    pub seed: u64,
}

impl From<&CellSummary> for ReportRow {
    fn from(c: &CellSummary) -> Self {
        ReportRow {
            experiment_id: c.experiment_id.clone(),
            n: c.n,
            delta: c.delta,
            trials: c.trials,
            freq_mc_exceed: c.freq_mc_exceed,
            freq_proj_exceed: c.freq_proj_exceed,
            bound_term_bias: c.bound.term_bias,
            bound_term_variance: c.bound.term_variance,
            bound_total: c.bound.total,
            mean_residual_sq: c.mean_residual_sq,
            predicted_mean_residual_sq: c.predicted_mean_residual_sq,
            binom_stderr: c.binom_stderr,
            seed: c.seed,
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes `rows` as CSV (header always present) or as a JSON array.
pub fn write_report<W: Write>(rows: &[ReportRow], format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_COLUMNS)?;
            for r in rows {
                w.write_record([
                    r.experiment_id.clone(),
                    r.n.to_string(),
                    r.delta.to_string(),
                    r.trials.to_string(),
                    opt(r.freq_mc_exceed),
                    opt(r.freq_proj_exceed),
                    r.bound_term_bias.to_string(),
                    r.bound_term_variance.to_string(),
                    r.bound_total.to_string(),
                    opt(r.mean_residual_sq),
                    r.predicted_mean_residual_sq.to_string(),
                    r.binom_stderr.to_string(),
                    r.seed.to_string(),
                ])?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Writes the summary of a run to `path`.
pub fn emit_report(summary: &[CellSummary], format: Format, path: &Path) -> Result<()> {
    let rows: Vec<ReportRow> = summary.iter().map(ReportRow::from).collect();
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_report(&rows, format, file)
}

/// Reads a CSV report back into rows. Floats go through `str::parse`, which
/// round-trips the shortest representation written by [`write_report`].
pub fn read_csv_report<R: std::io::Read>(input: R) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_reader(input);
    if r.headers()?.iter().ne(CSV_COLUMNS) {
        return Err(Error::Config("report header does not match the expected columns".into()));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let num = |i: usize| -> Result<f64> {
            field(i)
                .parse()
                .map_err(|_| Error::Config(format!("column {} is not a number: {:?}", CSV_COLUMNS[i], field(i))))
        };
        let opt_num = |i: usize| -> Result<Option<f64>> {
            if field(i).is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        let count = |i: usize| -> Result<u64> {
            field(i)
                .parse()
                .map_err(|_| Error::Config(format!("column {} is not a count: {:?}", CSV_COLUMNS[i], field(i))))
        };
        rows.push(ReportRow {
            experiment_id: field(0).to_string(),
            n: count(1)? as usize,
            delta: num(2)?,
            trials: count(3)? as usize,
            freq_mc_exceed: opt_num(4)?,
            freq_proj_exceed: opt_num(5)?,
            bound_term_bias: num(6)?,
            bound_term_variance: num(7)?,
            bound_total: num(8)?,
            mean_residual_sq: opt_num(9)?,
            predicted_mean_residual_sq: num(10)?,
            binom_stderr: num(11)?,
            seed: count(12)?,
        });
    }
    Ok(rows)
}

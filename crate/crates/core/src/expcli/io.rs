use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column order of every results CSV.
pub const CSV_HEADER: &str = "experiment,d,n_queries,trials,successes,success_rate,mean,stderr,seed,backend,elapsed_ms";

/// One aggregated cell of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub d: usize,
    pub n_queries: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean: f64,
    pub stderr: f64,
    pub seed: u64,
    pub backend: String,
    pub elapsed_ms: u64,
}

impl ResultRow {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.successes > self.trials {
            return Err(Error::Validation(format!(
                "{}: {} successes in {} trials",
                self.experiment, self.successes, self.trials
            )));
        }
        if self.success_rate != self.successes as f64 / self.trials as f64 {
            return Err(Error::Validation(format!("{}: success_rate is not successes/trials", self.experiment)));
        }
        if !(self.mean.is_finite() && self.stderr.is_finite()) {
            return Err(Error::Validation(format!("{}: non-finite statistic", self.experiment)));
        }
        Ok(())
    }
}

/// Raw per-trial record written by `--per-trial`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub experiment: String,
    pub d: usize,
    pub n_queries: usize,
    pub trial: usize,
    pub truth: String,
    pub verdict: String,
    pub statistic: f64,
    pub flagged: bool,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Appends `rows` to a CSV file, writing the header only when the file is
/// new or empty. An existing file with a different header is rejected.
pub fn append_csv<R: Serialize>(path: &Path, rows: &[R], header: &str) -> Result<()> {
    let existing_header = match File::open(path) {
        Ok(f) => {
            let mut first = String::new();
            BufReader::new(f).read_line(&mut first).map_err(io_err(path))?;
            Some(first.trim_end().to_string()).filter(|h| !h.is_empty())
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(io_err(path)(e)),
    };
    if let Some(h) = &existing_header {
        if h != header {
            return Err(Error::Validation(format!(
                "{} has header `{h}`, expected `{header}`",
                path.display()
            )));
        }
    }
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err(path))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(existing_header.is_none())
        .from_writer(file);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// Renders rows with the header to a string.
pub fn render_csv(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    if rows.is_empty() {
        return Ok(format!("{CSV_HEADER}\n"));
    }
    let bytes = w.into_inner().map_err(|e| Error::Validation(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Validation(e.to_string()))
}

/// Parses a results CSV, checking the header.
pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let first = text.lines().next().unwrap_or_default();
    if first != CSV_HEADER {
        return Err(Error::Validation(format!("unexpected header `{first}`")));
    }
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in rdr.deserialize() {
        let row: ResultRow = rec?;
        row.validate()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    parse_csv(&std::fs::read_to_string(path).map_err(io_err(path))?)
}

/// `out.csv` → `out.summary.json`.
pub fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.json")
}

/// `out.csv` → `out.trials.csv`.
pub fn trials_path(out: &Path) -> PathBuf {
    out.with_extension("trials.csv")
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut f = File::create(path).map_err(io_err(path))?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n").map_err(io_err(path))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(experiment: &str, d: usize) -> ResultRow {
        ResultRow {
            experiment: experiment.into(),
            d,
            n_queries: 20,
            trials: 3,
            successes: 2,
            success_rate: 2.0 / 3.0,
            mean: 0.1 + 0.2,
            stderr: 1e-17,
            seed: u64::MAX,
            backend: "fast".into(),
            elapsed_ms: 0,
        }
    }

    #[test]
    fn header_matches_field_order() {
        let text = render_csv(&[row("x", 4)]).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    }

    #[test]
    fn render_parse_round_trip() {
        let rows = vec![row("collision", 4), row("measure-twice", 1024)];
        assert_eq!(parse_csv(&render_csv(&rows).unwrap()).unwrap(), rows);
        assert!(parse_csv(&render_csv(&[]).unwrap()).unwrap().is_empty());
    }

    #[test]
    fn append_writes_header_once() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        append_csv(&p, &[row("a", 2)], CSV_HEADER).unwrap();
        append_csv(&p, &[row("b", 3)], CSV_HEADER).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.matches("experiment,").count(), 1);
        assert_eq!(read_csv(&p).unwrap(), vec![row("a", 2), row("b", 3)]);
    }

    #[test]
    fn append_rejects_foreign_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("other.csv");
        std::fs::write(&p, "a,b\n1,2\n").unwrap();
        assert!(matches!(append_csv(&p, &[row("a", 2)], CSV_HEADER), Err(Error::Validation(_))));
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let p = Path::new("/nonexistent-dir/x.csv");
        assert!(matches!(append_csv(p, &[row("a", 2)], CSV_HEADER), Err(Error::Io { .. })));
    }

    #[test]
    fn sidecar_paths() {
        assert_eq!(summary_path(Path::new("r/out.csv")), PathBuf::from("r/out.summary.json"));
        assert_eq!(trials_path(Path::new("out.csv")), PathBuf::from("out.trials.csv"));
    }

    #[test]
    fn validation_rejects_bad_rows() {
        let mut r = row("a", 2);
        r.success_rate = 0.5;
        assert!(r.validate().is_err());
        let mut r = row("a", 2);
        r.mean = f64::NAN;
        assert!(r.validate().is_err());
    }
}

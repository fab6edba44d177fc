use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numkit::DenseMatrix;

/// Reads a samples-by-features CSV and returns the features-by-samples
/// matrix `X` (one column per sample).
pub fn ingest_csv(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_csv(&text)
}

/// [`ingest_csv`] on in-memory text. A first row with any non-numeric cell
/// is taken as a header and skipped. Rows and columns in errors are 1-based
/// and count the header line.
pub fn parse_csv(text: &str) -> Result<DenseMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            col: 0,
            msg: e.to_string(),
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Vec<std::result::Result<f64, usize>> = record
            .iter()
            .enumerate()
            .map(|(c, cell)| cell.parse::<f64>().map_err(|_| c + 1))
            .collect();
        if i == 0 && parsed.iter().any(|p| p.is_err()) {
            continue;
        }
        let values = parsed
            .into_iter()
            .map(|p| {
                p.map_err(|col| Error::Parse {
                    row,
                    col,
                    msg: format!("non-numeric cell {:?}", &record[col - 1]),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(&(w, _)) = width.as_ref() {
            if values.len() != w {
                return Err(Error::Parse {
                    row,
                    col: values.len().min(w) + 1,
                    msg: format!("expected {w} fields, found {}", values.len()),
                });
            }
        } else {
            width = Some((values.len(), row));
        }
        if let Some(c) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parse {
                row,
                col: c + 1,
                msg: "non-finite value".into(),
            });
        }
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::InvalidInput("no numeric rows".into()));
    }
    Ok(DenseMatrix::from_rows(&rows)?.transpose())
}

/// Writes `m` as headerless CSV, one matrix row per line.
pub fn write_csv(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(|e| Error::Io(e.to_string()))?;
    for i in 0..m.rows() {
        w.write_record(m.row(i).iter().map(|v| format!("{v:.17e}")))
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Standard normal `n x m` data drawn from `seed`.
pub fn synthetic_data(n: usize, m: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * m).map(|_| StandardNormal.sample(&mut rng)).collect();
    DenseMatrix::from_row_major(n, m, data).expect("length matches")
}

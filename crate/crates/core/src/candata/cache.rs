use std::io::{BufRead, Write};

use super::dataset::{FeatureVector, LabeledDataset};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// First field of a dataset cache header.
pub const DATASET_MAGIC: &str = "canbench-dataset v1";

/// Writes the cache format: a `canbench-dataset v1,<n_features>,<class,...>`
/// header, then one `f0,...,f{n-1},label` row per sample. Values use the
/// shortest representation that parses back to the same bits.
pub fn write_dataset<S: Scalar, W: Write>(ds: &LabeledDataset<S>, mut out: W) -> Result<()> {
    write!(out, "{DATASET_MAGIC},{}", ds.n_features())?;
    for c in ds.class_names() {
        write!(out, ",{c}")?;
    }
    out.write_all(b"\n")?;
    let mut line = String::new();
    for r in ds.rows() {
        line.clear();
        for v in r.x.iter() {
            line.push_str(&v.to_string());
            line.push(',');
        }
        line.push_str(&ds.class_names()[r.y]);
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_dataset<S: Scalar, R: BufRead>(input: R) -> Result<LabeledDataset<S>> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing dataset header"))??;
    let mut fields = header.split(',');
    if fields.next() != Some(DATASET_MAGIC) {
        return Err(Error::parse(1, format!("expected {DATASET_MAGIC:?} header")));
    }
    let n_features: usize = fields
        .next()
        .and_then(|f| f.trim().parse().ok())
        .ok_or_else(|| Error::parse(1, "bad feature count"))?;
    let classes: Vec<String> = fields.map(str::to_string).collect();
    let mut ds = LabeledDataset::new(classes, n_features).map_err(|e| Error::parse(1, e.to_string()))?;

    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        let mut cols: Vec<&str> = line.split(',').collect();
        if cols.len() != n_features + 1 {
            return Err(Error::parse(
                line_no,
                format!("expected {} columns, found {}", n_features + 1, cols.len()),
            ));
        }
        let label = cols.pop().unwrap_or_default();
        let y = ds
            .class_names()
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| Error::parse(line_no, format!("unknown label {label:?}")))?;
        let values = cols
            .iter()
            .map(|c| {
                c.trim()
                    .parse::<S>()
                    .map_err(|_| Error::parse(line_no, format!("bad value {c:?}")))
            })
            .collect::<Result<Vec<S>>>()?;
        ds.push(FeatureVector::new(values), y)?;
    }
    Ok(ds)
}

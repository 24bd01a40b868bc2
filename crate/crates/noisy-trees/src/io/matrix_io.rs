//! Distance matrix interchange: square CSV with a label header column and
//! row, and lower-triangular PHYLIP for external phylogenetics tools.

use crate::error::{Error, Result};
use crate::metrics::{DistanceMatrix, Provenance};
use crate::tree::NodeLabel;

/// Square CSV: header `label,<l1>,<l2>,...`, then one row per label with the
/// row label first.
pub fn write_distance_csv(d: &DistanceMatrix<f64>) -> String {
    let labels = d.labels();
    let mut out = String::from("label");
    for l in labels {
        out.push(',');
        out.push_str(&l.to_string());
    }
    out.push('\n');
    for (i, l) in labels.iter().enumerate() {
        out.push_str(&l.to_string());
        for j in 0..labels.len() {
            out.push(',');
            out.push_str(&format!("{}", d.get(i, j)));
        }
        out.push('\n');
    }
    out
}

pub fn parse_distance_csv(s: &str, provenance: Provenance) -> Result<DistanceMatrix<f64>> {
    let mut lines = s.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty distance CSV".into()))?;
    let mut fields = header.split(',');
    let first = fields.next().unwrap_or_default();
    if first.trim() != "label" {
        return Err(Error::Parse("distance CSV must start with a 'label' header".into()));
    }
    let labels: Vec<NodeLabel> = fields
        .map(|f| {
            f.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad label '{f}'")))
        })
        .collect::<Result<_>>()?;
    let n = labels.len();
    let mut values = vec![0.0f64; n * n];
    let mut row_count = 0;
    for line in lines {
        let mut fields = line.split(',');
        let row_label: NodeLabel = fields
            .next()
            .unwrap_or_default()
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad row label in '{line}'")))?;
        let i = labels
            .iter()
            .position(|&l| l == row_label)
            .ok_or_else(|| Error::Parse(format!("row label {row_label} not in header")))?;
        for (j, f) in fields.enumerate() {
            if j >= n {
                return Err(Error::Parse(format!("too many columns in row {row_label}")));
            }
            values[i * n + j] = f
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad distance '{f}'")))?;
        }
        row_count += 1;
    }
    if row_count != n {
        return Err(Error::Parse(format!("expected {n} rows, got {row_count}")));
    }
    DistanceMatrix::new(labels, values, provenance)
}

/// Lower-triangular PHYLIP: taxon count, then one line per taxon with its
/// distances to the previous taxa.
pub fn write_distance_phylip(d: &DistanceMatrix<f64>) -> String {
    let labels = d.labels();
    let mut out = format!("{}\n", labels.len());
    for (i, l) in labels.iter().enumerate() {
        out.push_str(&l.to_string());
        for j in 0..i {
            out.push(' ');
            out.push_str(&format!("{}", d.get(i, j)));
        }
        out.push('\n');
    }
    out
}

pub fn parse_distance_phylip(s: &str, provenance: Provenance) -> Result<DistanceMatrix<f64>> {
    let mut lines = s.lines().filter(|l| !l.trim().is_empty());
    let n: usize = lines
        .next()
        .ok_or_else(|| Error::Parse("empty PHYLIP input".into()))?
        .trim()
        .parse()
        .map_err(|_| Error::Parse("first PHYLIP line must be the taxon count".into()))?;
    let mut labels = Vec::with_capacity(n);
    let mut values = vec![0.0f64; n * n];
    for i in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("expected {n} taxon lines")))?;
        let mut fields = line.split_whitespace();
        let label: NodeLabel = fields
            .next()
            .unwrap_or_default()
            .parse()
            .map_err(|_| Error::Parse(format!("bad taxon label in '{line}'")))?;
        labels.push(label);
        for j in 0..i {
            let f = fields
                .next()
                .ok_or_else(|| Error::Parse(format!("row {label} needs {i} distances")))?;
            let v: f64 = f
                .parse()
                .map_err(|_| Error::Parse(format!("bad distance '{f}'")))?;
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
        if fields.next().is_some() {
            return Err(Error::Parse(format!("row {label} has too many distances")));
        }
    }
    DistanceMatrix::new(labels, values, provenance)
}

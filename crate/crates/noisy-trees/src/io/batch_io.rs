//! Sample batch CSV (header row of node labels, one row per draw) and the
//! sidecar JSON manifest recording the seed and shape.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BatchData, SampleBatch};
use crate::tree::NodeLabel;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BatchManifest {
    pub seed: u64,
    pub n: usize,
    pub labels: Vec<NodeLabel>,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
}

impl BatchManifest {
    pub fn for_batch(batch: &SampleBatch<f64>) -> Self {
        BatchManifest {
            seed: batch.seed(),
            n: batch.n(),
            labels: batch.labels().to_vec(),
            kind: if batch.is_discrete() { "discrete" } else { "continuous" }.into(),
            r: batch.r(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

pub fn write_batch_csv(batch: &SampleBatch<f64>) -> String {
    let mut out = String::new();
    let labels = batch.labels();
    for (i, l) in labels.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&l.to_string());
    }
    out.push('\n');
    for row in 0..batch.n() {
        for col in 0..labels.len() {
            if col > 0 {
                out.push(',');
            }
            match batch.data() {
                BatchData::Discrete { .. } => out.push_str(&batch.state(row, col).to_string()),
                BatchData::Continuous(_) => out.push_str(&format!("{}", batch.value(row, col))),
            }
        }
        out.push('\n');
    }
    out
}

/// Parses a batch CSV. Cells must all be state indices (discrete, with `r`
/// inferred as one more than the largest index unless given) or all floats.
pub fn parse_batch_csv(s: &str, r: Option<usize>, seed: u64) -> Result<SampleBatch<f64>> {
    let mut lines = s.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty batch CSV".into()))?;
    let labels: Vec<NodeLabel> = header
        .split(',')
        .map(|f| {
            f.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad column label '{f}'")))
        })
        .collect::<Result<_>>()?;
    let d = labels.len();
    let mut cells: Vec<String> = Vec::new();
    let mut n = 0usize;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d {
            return Err(Error::Parse(format!(
                "row {n} has {} cells, expected {d}",
                fields.len()
            )));
        }
        cells.extend(fields.iter().map(|f| f.trim().to_string()));
        n += 1;
    }
    let all_integers = cells.iter().all(|c| c.parse::<u16>().is_ok());
    if all_integers {
        let states: Vec<u16> = cells.iter().map(|c| c.parse().expect("checked")).collect();
        let max = states.iter().copied().max().unwrap_or(0) as usize;
        let r = r.unwrap_or(max + 1).max(max + 1).max(2);
        SampleBatch::discrete(labels, n, r, states, seed)
    } else {
        let values: Vec<f64> = cells
            .iter()
            .map(|c| {
                c.parse()
                    .map_err(|_| Error::Parse(format!("bad cell value '{c}'")))
            })
            .collect::<Result<_>>()?;
        SampleBatch::continuous(labels, n, values, seed)
    }
}

//! Sample batches: n i.i.d. rows over the tree's nodes, either discrete
//! state indices or continuous values.

use crate::error::{Error, Result};
use crate::num::Real;
use crate::tree::NodeLabel;

#[derive(Clone, Debug)]
pub enum BatchData<F> {
    Discrete { r: usize, states: Vec<u16> },
    Continuous(Vec<F>),
}

/// An n-by-d table of samples with a column-to-node-label map and the seed
/// that produced it.
#[derive(Clone, Debug)]
pub struct SampleBatch<F> {
    labels: Vec<NodeLabel>,
    n: usize,
    data: BatchData<F>,
    seed: u64,
}

impl<F: Real> SampleBatch<F> {
    pub fn discrete(labels: Vec<NodeLabel>, n: usize, r: usize, states: Vec<u16>, seed: u64) -> Result<Self> {
        if states.len() != n * labels.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} cells, got {}",
                n * labels.len(),
                states.len()
            )));
        }
        if states.iter().any(|&s| usize::from(s) >= r) {
            return Err(Error::InvalidParameter(format!("state out of range for r = {r}")));
        }
        Ok(SampleBatch {
            labels,
            n,
            data: BatchData::Discrete { r, states },
            seed,
        })
    }

    pub fn continuous(labels: Vec<NodeLabel>, n: usize, values: Vec<F>, seed: u64) -> Result<Self> {
        if values.len() != n * labels.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} cells, got {}",
                n * labels.len(),
                values.len()
            )));
        }
        Ok(SampleBatch {
            labels,
            n,
            data: BatchData::Continuous(values),
            seed,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> &[NodeLabel] {
        &self.labels
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn column_count(&self) -> usize {
        self.labels.len()
    }

    pub fn column_of(&self, label: NodeLabel) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.data, BatchData::Discrete { .. })
    }

    /// State count for discrete batches.
    pub fn r(&self) -> Option<usize> {
        match &self.data {
            BatchData::Discrete { r, .. } => Some(*r),
            BatchData::Continuous(_) => None,
        }
    }

    pub fn data(&self) -> &BatchData<F> {
        &self.data
    }

    /// State index at (row, column); panics on continuous batches.
    pub fn state(&self, row: usize, col: usize) -> usize {
        match &self.data {
            BatchData::Discrete { states, .. } => usize::from(states[row * self.labels.len() + col]),
            BatchData::Continuous(_) => panic!("state() on a continuous batch"),
        }
    }

    /// Cell value as a scalar (state index cast for discrete batches).
    pub fn value(&self, row: usize, col: usize) -> F {
        match &self.data {
            BatchData::Discrete { states, .. } => {
                F::from_u16(states[row * self.labels.len() + col]).expect("small state index")
            }
            BatchData::Continuous(values) => values[row * self.labels.len() + col],
        }
    }

    /// A new batch containing only the given columns, in the given order.
    pub fn select_columns(&self, labels: &[NodeLabel]) -> Result<SampleBatch<F>> {
        let cols: Vec<usize> = labels
            .iter()
            .map(|&l| self.column_of(l).ok_or(Error::UnknownNode(l)))
            .collect::<Result<_>>()?;
        let d = labels.len();
        let data = match &self.data {
            BatchData::Discrete { r, states } => {
                let mut out = Vec::with_capacity(self.n * d);
                for row in 0..self.n {
                    out.extend(cols.iter().map(|&c| states[row * self.labels.len() + c]));
                }
                BatchData::Discrete { r: *r, states: out }
            }
            BatchData::Continuous(values) => {
                let mut out = Vec::with_capacity(self.n * d);
                for row in 0..self.n {
                    out.extend(cols.iter().map(|&c| values[row * self.labels.len() + c]));
                }
                BatchData::Continuous(out)
            }
        };
        Ok(SampleBatch {
            labels: labels.to_vec(),
            n: self.n,
            data,
            seed: self.seed,
        })
    }
}

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::Decoded;
use crate::design::PoolingDesign;
use crate::error::{Error, Result};
use crate::signal::{histogram, Signal};

/// Summary of one decoding run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeReport {
    /// Histogram of the bulk estimate over labels `0..=d`.
    pub histogram: Vec<usize>,
    /// Mismatches per bulk compartment, when the truth is known.
    pub mismatches_per_compartment: Option<Vec<usize>>,
    pub total_errors: Option<usize>,
    pub runtime_ms: f64,
}

impl DecodeReport {
    pub fn new(design: &PoolingDesign, decoded: &Decoded, d: usize, truth: Option<&Signal>) -> Result<Self> {
        let bulk = &decoded.estimate[design.n_seed()..];
        let mismatches = truth
            .map(|t| {
                if t.labels().len() != decoded.estimate.len() {
                    return Err(Error::Dimension("truth and estimate lengths differ".into()));
                }
                Ok(design
                    .bulk_compartments()
                    .map(|c| {
                        design
                            .items(c)
                            .filter(|&x| decoded.estimate[x] != t.label(x))
                            .count()
                    })
                    .collect::<Vec<_>>())
            })
            .transpose()?;
        Ok(Self {
            histogram: histogram(bulk, d),
            total_errors: mismatches.as_ref().map(|m| m.iter().sum()),
            mismatches_per_compartment: mismatches,
            runtime_ms: decoded.runtime.as_secs_f64() * 1e3,
        })
    }

    /// `Some(true)` when the truth was supplied and matched everywhere.
    pub fn exact(&self) -> Option<bool> {
        self.total_errors.map(|e| e == 0)
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub item: usize,
    pub compartment: usize,
    pub score: f64,
    pub label_true: u8,
    pub label_est: u8,
}

/// Per-item trace CSV `item,compartment,score,label_true,label_est` over bulk items.
pub fn write_trace<W: Write>(design: &PoolingDesign, decoded: &Decoded, truth: &Signal, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for c in design.bulk_compartments() {
        for x in design.items(c) {
            w.serialize(TraceRow {
                item: x,
                compartment: c,
                score: decoded.scores[x],
                label_true: truth.label(x),
                label_est: decoded.estimate[x],
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

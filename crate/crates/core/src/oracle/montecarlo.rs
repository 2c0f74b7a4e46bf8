//! Monte Carlo summaries.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One row of `quantity,n_samples,mean,stderr,reference`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub quantity: String,
    pub n_samples: usize,
    pub mean: f64,
    pub stderr: f64,
    pub reference: f64,
}

impl McSummary {
    pub fn from_samples(quantity: impl Into<String>, samples: &[f64], reference: f64) -> Self {
        let (mean, var) = mean_variance(samples);
        Self {
            quantity: quantity.into(),
            n_samples: samples.len(),
            mean,
            stderr: (var / samples.len() as f64).sqrt(),
            reference,
        }
    }

    /// `|mean - reference| <= z · stderr`.
    pub fn within(&self, z: f64) -> bool {
        (self.mean - self.reference).abs() <= z * self.stderr
    }
}

/// Mean and unbiased sample variance.
pub fn mean_variance(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let ss: f64 = samples.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, if samples.len() > 1 { ss / (n - 1.0) } else { 0.0 })
}

pub fn write_summaries<W: Write>(rows: &[McSummary], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_and_csv() {
        let s = McSummary::from_samples("u", &[1.0, 2.0, 3.0, 4.0], 2.5);
        assert_eq!(s.mean, 2.5);
        assert!((s.stderr - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-12);
        assert!(s.within(0.0));
        let mut buf = Vec::new();
        write_summaries(&[s], &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("quantity,n_samples,mean,stderr,reference\nu,4,2.5,"));
    }
}

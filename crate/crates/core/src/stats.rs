//! Small summary statistics with a fixed accumulation order.

use serde::{Deserialize, Serialize};

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
}

impl MeanEstimate {
    /// Mean and `sd / √len` (sample sd, `len - 1` denominator). Sums run in
    /// slice order so the result depends only on the values.
    pub fn of(xs: &[f64]) -> MeanEstimate {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        if xs.len() < 2 {
            return MeanEstimate { mean, stderr: f64::NAN };
        }
        let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
        MeanEstimate { mean, stderr: (ss / (n - 1.0)).sqrt() / n.sqrt() }
    }

    /// Standard error of the difference with an independent estimate.
    pub fn combined_stderr(&self, other: &MeanEstimate) -> f64 {
        self.stderr.hypot(other.stderr)
    }
}

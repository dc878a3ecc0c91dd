//! Sample summaries and goodness-of-fit helpers.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub std_error: f64,
}

impl Summary {
    /// Mean and spread of `xs`, accumulated in order.
    pub fn of(xs: &[f64]) -> Summary {
        let n = xs.len();
        if n == 0 {
            return Summary::default();
        }
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let delta = x - mean;
            mean += delta / (i + 1) as f64;
            m2 += delta * (x - mean);
        }
        let var = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
        let sd = var.sqrt();
        Summary { n, mean, std_dev: sd, std_error: sd / (n as f64).sqrt() }
    }

    /// Coefficient of variation `std_dev / |mean|`.
    pub fn cv(&self) -> f64 {
        self.std_dev / self.mean.abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson's test of `observed` counts against cell probabilities `probs` (which
/// should sum to one).
pub fn chi_square(observed: &[u64], probs: &[f64]) -> ChiSquare {
    assert_eq!(observed.len(), probs.len());
    let total: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0;
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * total as f64;
        if e <= 0.0 {
            assert_eq!(o, 0, "observed count in a cell of probability zero");
            continue;
        }
        stat += (o as f64 - e).powi(2) / e;
        cells += 1;
    }
    let dof = cells.max(2) - 1;
    let p_value = 1.0 - ChiSquared::new(dof as f64).unwrap().cdf(stat);
    ChiSquare { statistic: stat, dof, p_value }
}

//! Ratio estimators with batch-means standard errors.

/// Accumulates `(increment, duration)` records, e.g. the growth of U over
/// one environment cycle and the cycle's length.
#[derive(Clone, Debug, Default)]
pub struct RatioRecords {
    inc: Vec<f64>,
    dur: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioEstimate {
    pub value: f64,
    pub stderr: f64,
    pub batches: usize,
    pub records: usize,
    pub total_duration: f64,
}

impl RatioRecords {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, increment: f64, duration: f64) {
        self.inc.push(increment);
        self.dur.push(duration);
    }

    pub fn len(&self) -> usize {
        self.inc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inc.is_empty()
    }

    /// Σinc / Σdur with a batch-means stderr over (at most) `batches`
    /// contiguous groups of records. Returns `None` with fewer than two records.
    pub fn estimate(&self, batches: usize) -> Option<RatioEstimate> {
        let n = self.len();
        if n < 2 {
            return None;
        }
        let nb = batches.min(n).max(2);
        let total_inc: f64 = self.inc.iter().sum();
        let total_dur: f64 = self.dur.iter().sum();
        let value = total_inc / total_dur;

        let mut means = Vec::with_capacity(nb);
        let mut weights = Vec::with_capacity(nb);
        for b in 0..nb {
            let lo = b * n / nb;
            let hi = (b + 1) * n / nb;
            let i: f64 = self.inc[lo..hi].iter().sum();
            let d: f64 = self.dur[lo..hi].iter().sum();
            means.push(i / d);
            weights.push(d);
        }
        // Duration-weighted batch means; the weights are nearly equal.
        let wsum: f64 = weights.iter().sum();
        let var = means
            .iter()
            .zip(&weights)
            .map(|(m, w)| w * (m - value).powi(2))
            .sum::<f64>()
            / wsum;
        let stderr = (var / (nb as f64 - 1.0)).sqrt();
        Some(RatioEstimate {
            value,
            stderr,
            batches: nb,
            records: n,
            total_duration: total_dur,
        })
    }
}

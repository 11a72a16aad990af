use serde::Serialize;

/// Mean and order statistics of a set of latencies in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatencyStats {
    pub mean: f64,
    pub p50: f64,
    pub p95: f64,
    pub max: f64,
}

/// Nearest-rank percentile of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = (q * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

impl LatencyStats {
    pub fn of(samples: &[f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        Some(Self {
            mean: s.iter().sum::<f64>() / s.len() as f64,
            p50: percentile(&s, 0.50),
            p95: percentile(&s, 0.95),
            max: s[s.len() - 1],
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct LatencyLog {
    pub forward_ms: Vec<f64>,
    pub end_to_end_ms: Vec<f64>,
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencySummary {
    pub count: usize,
    pub errors: usize,
    pub forward_ms: Option<LatencyStats>,
    pub end_to_end_ms: Option<LatencyStats>,
}

impl LatencyLog {
    pub fn record(&mut self, forward_ms: f64, end_to_end_ms: f64) {
        self.forward_ms.push(forward_ms);
        self.end_to_end_ms.push(end_to_end_ms);
    }

    pub fn merge(&mut self, other: LatencyLog) {
        self.forward_ms.extend(other.forward_ms);
        self.end_to_end_ms.extend(other.end_to_end_ms);
        self.errors += other.errors;
    }

    pub fn summary(&self) -> LatencySummary {
        LatencySummary {
            count: self.forward_ms.len(),
            errors: self.errors,
            forward_ms: LatencyStats::of(&self.forward_ms),
            end_to_end_ms: LatencyStats::of(&self.end_to_end_ms),
        }
    }
}

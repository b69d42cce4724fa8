//! Error norms over whole runs and over time windows.

use serde::{Deserialize, Serialize};

use super::run::RunLog;
use crate::error::{Error, Result};

/// Half-open time window `[start, end)` in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub start: f64,
    pub end: f64,
}

impl Window {
    pub fn new(start: f64, end: f64) -> Self {
        Window { start, end }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t < self.end
    }

    pub fn label(&self) -> String {
        format!("{}-{}s", self.start, self.end)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WindowMetrics {
    pub window: Window,
    pub samples: usize,
    /// Frobenius norm of the joint × sample error block.
    pub frobenius: f64,
    pub joint_frobenius: Vec<f64>,
    /// Mean of `|e|` over samples and joints.
    pub mean_abs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub n_joints: usize,
    pub l2: Vec<f64>,
    pub linf: Vec<f64>,
    pub windows: Vec<WindowMetrics>,
}

impl MetricsReport {
    pub fn window(&self, i: usize) -> &WindowMetrics {
        &self.windows[i]
    }
}

/// Per-joint ℓ2/ℓ∞ over all samples plus Frobenius norms per window.
pub fn compute_metrics(log: &RunLog, windows: &[Window]) -> Result<MetricsReport> {
    if log.is_empty() {
        return Err(Error::Empty("run log"));
    }
    let n = log.n_joints;
    let mut sq = vec![0.0; n];
    let mut linf = vec![0.0f64; n];
    for row in &log.rows {
        for (j, e) in row.e.iter().enumerate() {
            sq[j] += e * e;
            linf[j] = linf[j].max(e.abs());
        }
    }
    let last = log.rows.last().map(|r| r.time).unwrap_or(0.0);
    let mut out = Vec::with_capacity(windows.len());
    for w in windows {
        if !(w.start < w.end) || w.start < 0.0 || w.start > last {
            return Err(Error::Config(format!(
                "window {} outside the run (0 to {last} s)",
                w.label()
            )));
        }
        let mut joint_sq = vec![0.0; n];
        let mut abs_sum = 0.0;
        let mut samples = 0;
        for row in log.rows.iter().filter(|r| w.contains(r.time)) {
            samples += 1;
            for (j, e) in row.e.iter().enumerate() {
                joint_sq[j] += e * e;
                abs_sum += e.abs();
            }
        }
        if samples == 0 {
            return Err(Error::Empty("metrics window"));
        }
        out.push(WindowMetrics {
            window: *w,
            samples,
            frobenius: joint_sq.iter().sum::<f64>().sqrt(),
            joint_frobenius: joint_sq.iter().map(|v| v.sqrt()).collect(),
            mean_abs: abs_sum / (samples * n) as f64,
        });
    }
    Ok(MetricsReport {
        n_joints: n,
        l2: sq.into_iter().map(f64::sqrt).collect(),
        linf,
        windows: out,
    })
}

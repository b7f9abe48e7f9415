//! Convergence measurements and iteration traces.

use std::collections::BTreeMap;

use crate::constraints::ConstraintSet;
use crate::error::{Error, Result};
use crate::objectives::Objective;

/// One recorded iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: u64,
    /// Oracle calls charged by the algorithm up to this iterate.
    pub sfo: u64,
    pub lmo: u64,
    pub f: f64,
    pub gap: Option<f64>,
    pub wall_ns: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    /// Free-form run description (configuration, seed, dataset name).
    pub metadata: BTreeMap<String, String>,
}

impl Trace {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn min_f(&self) -> Option<f64> {
        self.rows.iter().map(|r| r.f).reduce(f64::min)
    }

    pub fn max_f(&self) -> Option<f64> {
        self.rows.iter().map(|r| r.f).reduce(f64::max)
    }

    pub fn min_gap(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.gap).reduce(f64::min)
    }

    /// SFO count at the first row whose relative suboptimality is at most
    /// `threshold`.
    pub fn sfo_to_reach(&self, f_min: f64, threshold: f64) -> Result<Option<u64>> {
        let rel = relative_suboptimality(self, f_min)?;
        Ok(self
            .rows
            .iter()
            .zip(rel)
            .find(|(_, r)| *r <= threshold)
            .map(|(row, _)| row.sfo))
    }
}

/// `max_{x ∈ X} <∇f(y), y − x>`, evaluated with one full gradient and one LMO.
pub fn fw_gap(obj: &Objective<'_>, set: &ConstraintSet, y: &[f64]) -> f64 {
    let g = obj.grad_full(y);
    fw_gap_from_gradient(set, &g, y)
}

/// The gap for a precomputed gradient. Round-off negatives are reported as 0.
pub fn fw_gap_from_gradient(set: &ConstraintSet, grad: &[f64], y: &[f64]) -> f64 {
    let s = set.lmo(grad);
    let mut gap = 0.0;
    let mut mag = 0.0;
    for ((g, yj), sj) in grad.iter().zip(y).zip(&s) {
        gap += g * (yj - sj);
        mag += (g * yj).abs() + (g * sj).abs();
    }
    if gap < 0.0 && gap >= -1e-12 * mag.max(1.0) {
        0.0
    } else {
        gap
    }
}

/// `(f_k − f_min) / (f_max − f_min)` per row, with `f_max` the largest traced value.
pub fn relative_suboptimality(trace: &Trace, f_min: f64) -> Result<Vec<f64>> {
    let (Some(lo), Some(hi)) = (trace.min_f(), trace.max_f()) else {
        return Ok(Vec::new());
    };
    if f_min > lo {
        return Err(Error::InconsistentReference { f_min, observed: lo });
    }
    if hi == f_min {
        return Ok(vec![0.0; trace.rows.len()]);
    }
    let span = hi - f_min;
    Ok(trace.rows.iter().map(|r| (r.f - f_min) / span).collect())
}

/// Running minimum of the recorded gaps.
pub fn min_gap_so_far(trace: &Trace) -> Result<Vec<f64>> {
    let out: Vec<f64> = trace
        .rows
        .iter()
        .filter_map(|r| r.gap)
        .scan(f64::INFINITY, |m, g| {
            *m = m.min(g);
            Some(*m)
        })
        .collect();
    if out.is_empty() {
        return Err(Error::NoGaps);
    }
    Ok(out)
}

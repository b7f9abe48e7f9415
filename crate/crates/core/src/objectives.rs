//! Finite-sum objectives `f(w) = (1/n) Σ f_i(w)` over a linear model.
//!
//! Both losses depend on sample `i` only through the margin `z_i = <x_i, w>`,
//! so `∇f_i(w) = φ'_i(z_i) · x_i`. The estimators exploit this by storing one
//! scalar per sample instead of a full gradient.

use std::fmt;

use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    /// `log(1 + exp(-y z))`, `y ∈ {-1, 1}`.
    Logistic,
    /// `(y - 1/(1 + exp(z)))²`, `y ∈ {0, 1}`.
    Nlls,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Logistic => "logistic",
            LossKind::Nlls => "nlls",
        }
    }

    /// (smaller, larger) label targets.
    pub fn label_targets(self) -> (f64, f64) {
        match self {
            LossKind::Logistic => (-1.0, 1.0),
            LossKind::Nlls => (0.0, 1.0),
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(LossKind::Logistic),
            "nlls" => Ok(LossKind::Nlls),
            other => Err(Error::config(format!("unknown loss `{other}`"))),
        }
    }
}

/// Smoothness constants of the per-sample terms. Reported for diagnostics;
/// no algorithm path depends on them.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothnessInfo {
    pub per_sample: Vec<f64>,
    /// `sqrt((1/n) Σ L_i²)`
    pub l_tilde: f64,
    /// Upper bound on the smoothness of `f` itself.
    pub l_bound: f64,
}

/// Bound on `|d²/dt² (y - σ(-t))²|` valid for every `y ∈ [0, 1]`.
const NLLS_CURVATURE: f64 = 0.3;

#[derive(Debug, Clone, Copy)]
pub struct Objective<'a> {
    kind: LossKind,
    data: &'a Dataset,
}

impl<'a> Objective<'a> {
    /// Fails if the labels are not already normalized for `kind`.
    pub fn new(kind: LossKind, data: &'a Dataset) -> Result<Self> {
        let (lo, hi) = kind.label_targets();
        if data.labels().iter().any(|&y| y != lo && y != hi) {
            return Err(Error::LabelsNotNormalized(kind.name()));
        }
        Ok(Self { kind, data })
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn data(&self) -> &'a Dataset {
        self.data
    }

    pub fn n(&self) -> usize {
        self.data.n()
    }

    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    pub fn margin(&self, i: usize, w: &[f64]) -> f64 {
        self.data.row(i).dot(w)
    }

    /// `f_i(w)`.
    pub fn loss_sample(&self, i: usize, w: &[f64]) -> f64 {
        let z = self.margin(i, w);
        let y = self.data.label(i);
        match self.kind {
            LossKind::Logistic => softplus(-y * z),
            LossKind::Nlls => {
                let r = y - sigmoid(-z);
                r * r
            }
        }
    }

    pub fn loss_full(&self, w: &[f64]) -> f64 {
        let n = self.n();
        (0..n).map(|i| self.loss_sample(i, w)).sum::<f64>() / n as f64
    }

    /// Derivative of `f_i` with respect to its margin, so that
    /// `∇f_i(w) = sample_slope(i, w) · x_i`.
    #[inline]
    pub fn sample_slope(&self, i: usize, w: &[f64]) -> f64 {
        let z = self.margin(i, w);
        let y = self.data.label(i);
        match self.kind {
            LossKind::Logistic => -y * sigmoid(-y * z),
            LossKind::Nlls => {
                let q = sigmoid(-z);
                2.0 * (y - q) * q * (1.0 - q)
            }
        }
    }

    /// `∇f_i(w)` as a dense vector.
    pub fn grad_sample(&self, i: usize, w: &[f64]) -> Result<Vec<f64>> {
        self.check_index(i)?;
        let mut out = vec![0.0; self.dim()];
        self.data.row(i).axpy(self.sample_slope(i, w), &mut out);
        Ok(out)
    }

    /// Mean of `∇f_i(w)` over `batch`, counting repeated indices with multiplicity.
    pub fn grad_batch(&self, batch: &[usize], w: &[f64]) -> Result<Vec<f64>> {
        if batch.is_empty() {
            return Err(Error::EmptyBatch);
        }
        for &i in batch {
            self.check_index(i)?;
        }
        let mut out = vec![0.0; self.dim()];
        self.accumulate_grad(batch.iter().copied(), w, &mut out);
        scale(&mut out, 1.0 / batch.len() as f64);
        Ok(out)
    }

    pub fn grad_full(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.grad_full_into(w, &mut out);
        out
    }

    /// Writes `∇f(w)` into `out`, overwriting it.
    pub fn grad_full_into(&self, w: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        self.accumulate_grad(0..self.n(), w, out);
        scale(out, 1.0 / self.n() as f64);
    }

    fn accumulate_grad(&self, idx: impl Iterator<Item = usize>, w: &[f64], out: &mut [f64]) {
        for i in idx {
            self.data.row(i).axpy(self.sample_slope(i, w), out);
        }
    }

    pub fn smoothness(&self) -> SmoothnessInfo {
        let c = match self.kind {
            LossKind::Logistic => 0.25,
            LossKind::Nlls => NLLS_CURVATURE,
        };
        let per_sample: Vec<f64> = self
            .data
            .rows()
            .iter()
            .map(|r| c * r.squared_norm())
            .collect();
        let mean_sq = per_sample.iter().map(|l| l * l).sum::<f64>() / per_sample.len() as f64;
        let l_tilde = mean_sq.sqrt();
        SmoothnessInfo {
            per_sample,
            l_tilde,
            l_bound: l_tilde,
        }
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n() {
            return Err(Error::SampleIndex { index: i, n: self.n() });
        }
        Ok(())
    }
}

fn scale(v: &mut [f64], c: f64) {
    for x in v {
        *x *= c;
    }
}

/// `log(1 + e^t)` without overflow.
#[inline]
pub fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

#[inline]
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

//! Step-size sequences and parameter defaults.
//!
//! The convex schedules are horizon-dependent: a constant plateau for the
//! first half of the run followed by harmonic decay that starts exactly at
//! the plateau value. None of them needs smoothness constants.

use crate::error::{Error, Result};
use crate::solver::Algorithm;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleKind {
    /// `2 / (k + 2)`
    ClassicFw,
    /// Plateau `p/2`, then `2 / (4/p + k - ⌈K/2⌉)`; for the SARAH estimator.
    Theorem1 { p: f64 },
    /// Plateau `b/(4n)`, then `2 / (8n/b + k - ⌈K/2⌉)`; for the SAGA-SARAH estimator.
    Theorem3 { n: usize, b: usize },
    /// `1 / √K`, the non-convex choice.
    SqrtK,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    kind: ScheduleKind,
    horizon: u64,
}

impl Schedule {
    pub fn new(kind: ScheduleKind, horizon: u64) -> Result<Self> {
        match kind {
            ScheduleKind::Theorem1 { p } if !(p > 0.0 && p <= 1.0) => {
                return Err(Error::config(format!("p must lie in (0, 1], got {p}")));
            }
            ScheduleKind::Theorem3 { n, b } if b == 0 || b > n => {
                return Err(Error::config(format!("batch {b} must lie in [1, n = {n}]")));
            }
            _ => {}
        }
        Ok(Self { kind, horizon })
    }

    pub fn classic(horizon: u64) -> Self {
        Self {
            kind: ScheduleKind::ClassicFw,
            horizon,
        }
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// Step size for iteration `k < K`.
    pub fn eta(&self, k: u64) -> Result<f64> {
        if k >= self.horizon {
            return Err(Error::IterationRange {
                k,
                horizon: self.horizon,
            });
        }
        Ok(self.eta_unchecked(k))
    }

    fn eta_unchecked(&self, k: u64) -> f64 {
        let horizon = self.horizon as f64;
        let half = self.horizon.div_ceil(2);
        // The plateau is the decay branch evaluated at its first step, so the
        // sequence is exactly non-increasing in floating point.
        let two_phase = |offset: f64, short: bool| {
            if short || k < half {
                2.0 / offset
            } else {
                2.0 / (offset + (k - half) as f64)
            }
        };
        match self.kind {
            ScheduleKind::ClassicFw => 2.0 / (k as f64 + 2.0),
            ScheduleKind::SqrtK => 1.0 / horizon.sqrt(),
            ScheduleKind::Theorem1 { p } => two_phase(4.0 / p, horizon <= 2.0 / p),
            ScheduleKind::Theorem3 { n, b } => {
                let ratio = n as f64 / b as f64;
                two_phase(8.0 * ratio, horizon <= 4.0 * ratio)
            }
        }
    }
}

/// Default estimator parameters derived from `n` and `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefaultParams {
    /// Refresh probability `2b / (n + 2b)`, set for the SARAH estimator.
    pub p: Option<f64>,
    /// Mixing weight `b / (2n)`, set for the SAGA-SARAH estimator.
    pub lambda: Option<f64>,
}

pub fn default_params(algorithm: Algorithm, n: usize, b: usize) -> Result<DefaultParams> {
    if b == 0 || b > n {
        return Err(Error::config(format!("batch {b} must lie in [1, n = {n}]")));
    }
    let (n, b) = (n as f64, b as f64);
    Ok(match algorithm {
        Algorithm::SarahFw => DefaultParams {
            p: Some(2.0 * b / (n + 2.0 * b)),
            lambda: None,
        },
        Algorithm::SagaSarahFw => DefaultParams {
            p: None,
            lambda: Some(b / (2.0 * n)),
        },
        Algorithm::Fw | Algorithm::MomentumFw => DefaultParams { p: None, lambda: None },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchRegime {
    /// `⌈n / 100⌉`, at least 1.
    ConvexSmall,
    /// `⌈√n⌉`
    SqrtN,
}

pub fn default_batch(n: usize, regime: BatchRegime) -> usize {
    match regime {
        BatchRegime::ConvexSmall => n.div_ceil(100).max(1),
        BatchRegime::SqrtN => {
            let mut b = (n as f64).sqrt() as usize;
            while b * b < n {
                b += 1;
            }
            while b > 1 && (b - 1) * (b - 1) >= n {
                b -= 1;
            }
            b.max(1)
        }
    }
}

//! Brute-force reference computations.
//!
//! Everything here is deliberately naive: vertices are enumerated, gradients
//! are approximated by central differences and expectations are taken over
//! every possible batch. The routines only touch public, dense quantities
//! (`loss_*`, `grad_sample`) and never the estimators' sparse bookkeeping,
//! so they can validate the fast paths. Results never depend on a seed.

use crate::constraints::{ConstraintKind, ConstraintSet};
use crate::error::{Error, Result};
use crate::estimators::{EstimatorSnapshot, Sampling};
use crate::linalg::dot;
use crate::objectives::Objective;

/// Size limits for exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub max_n: usize,
    pub max_b: usize,
    pub max_d: usize,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self {
            max_n: 8,
            max_b: 4,
            max_d: 10,
        }
    }
}

const MAX_COMBINATIONS: usize = 10_000;

/// Scores every vertex of `set` and keeps the first strict minimizer.
///
/// Vertex order: `+r e_0, −r e_0, +r e_1, …` for the ℓ1 ball, `r e_i` for the
/// simplex, and for the box the corners by bitmask (bit `j` set means
/// coordinate `j` is `−r`).
pub fn lmo_by_enumeration(set: &ConstraintSet, g: &[f64], budget: &EnumerationBudget) -> Result<Vec<f64>> {
    let d = g.len();
    if d == 0 || d > budget.max_d {
        return Err(Error::Budget(format!("dimension {d} outside 1..={}", budget.max_d)));
    }
    let r = set.radius();
    let vertices: Vec<Vec<f64>> = match set.kind() {
        ConstraintKind::L1Ball => (0..d)
            .flat_map(|i| [r, -r].map(|v| unit(d, i, v)))
            .collect(),
        ConstraintKind::Simplex => (0..d).map(|i| unit(d, i, r)).collect(),
        ConstraintKind::LinfBox => (0..1usize << d)
            .map(|mask| {
                (0..d)
                    .map(|j| if mask >> j & 1 == 1 { -r } else { r })
                    .collect()
            })
            .collect(),
    };
    let mut best = &vertices[0];
    let mut best_val = dot(g, best);
    for v in &vertices[1..] {
        let val = dot(g, v);
        if val < best_val {
            best = v;
            best_val = val;
        }
    }
    Ok(best.clone())
}

fn unit(d: usize, i: usize, v: f64) -> Vec<f64> {
    let mut e = vec![0.0; d];
    e[i] = v;
    e
}

/// Central differences of `f` at `w`.
pub fn finite_diff_grad(obj: &Objective<'_>, w: &[f64], h: f64) -> Vec<f64> {
    central_diff(w, h, |x| obj.loss_full(x))
}

/// Central differences of `f_i` at `w`.
pub fn finite_diff_sample_grad(obj: &Objective<'_>, i: usize, w: &[f64], h: f64) -> Vec<f64> {
    central_diff(w, h, |x| obj.loss_sample(i, x))
}

fn central_diff(w: &[f64], h: f64, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    assert!(h > 0.0, "step must be positive");
    let mut x = w.to_vec();
    (0..w.len())
        .map(|j| {
            x[j] = w[j] + h;
            let up = f(&x);
            x[j] = w[j] - h;
            let down = f(&x);
            x[j] = w[j];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Every batch the sampler can produce, each equally likely: all `n^b`
/// ordered tuples with replacement, all `C(n, b)` subsets without.
pub fn enumerate_batches(n: usize, b: usize, sampling: Sampling) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(b);
    fn rec(n: usize, b: usize, start: usize, repl: bool, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == b {
            out.push(cur.clone());
            return;
        }
        let from = if repl { 0 } else { start };
        for i in from..n {
            cur.push(i);
            rec(n, b, i + 1, repl, cur, out);
            cur.pop();
        }
    }
    rec(n, b, 0, sampling == Sampling::WithReplacement, &mut cur, &mut out);
    out
}

fn batch_count(n: usize, b: usize, sampling: Sampling) -> Option<usize> {
    match sampling {
        Sampling::WithReplacement => n.checked_pow(b as u32),
        Sampling::WithoutReplacement => {
            if b > n {
                return Some(0);
            }
            let mut c: usize = 1;
            for k in 0..b {
                c = c.checked_mul(n - k)? / (k + 1);
            }
            Some(c)
        }
    }
}

/// The update rule whose expectation is taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExpectedUpdate {
    /// Refresh with probability `p`, batch recursion otherwise.
    Sarah { p: f64 },
    SagaSarah { lambda: f64 },
    Momentum { rho: f64 },
}

/// Exact `E[g^{k+1}]` by enumerating the refresh coin and every batch.
pub fn expected_estimator_update(
    update: ExpectedUpdate,
    obj: &Objective<'_>,
    state: &EstimatorSnapshot,
    x_new: &[f64],
    x_old: &[f64],
    b: usize,
    sampling: Sampling,
    budget: &EnumerationBudget,
) -> Result<Vec<f64>> {
    let n = obj.n();
    let d = obj.dim();
    if n > budget.max_n || b > budget.max_b || b == 0 {
        return Err(Error::Budget(format!("n = {n}, b = {b}")));
    }
    match batch_count(n, b, sampling) {
        Some(c) if c > 0 && c <= MAX_COMBINATIONS => {}
        other => return Err(Error::Budget(format!("{other:?} batches"))),
    }

    let grad = |i: usize, x: &[f64]| obj.grad_sample(i, x).expect("index in range");
    let new: Vec<Vec<f64>> = (0..n).map(|i| grad(i, x_new)).collect();
    let old: Vec<Vec<f64>> = (0..n).map(|i| grad(i, x_old)).collect();
    let batches = enumerate_batches(n, b, sampling);
    let weight = 1.0 / batches.len() as f64;
    let bf = b as f64;

    // E over batches of the per-batch update
    let mut batch_mean = vec![0.0; d];
    for s in &batches {
        let next: Vec<f64> = match update {
            ExpectedUpdate::Sarah { .. } => (0..d)
                .map(|j| state.g[j] + s.iter().map(|&i| new[i][j] - old[i][j]).sum::<f64>() / bf)
                .collect(),
            ExpectedUpdate::SagaSarah { lambda } => {
                let y = state
                    .table
                    .as_ref()
                    .ok_or_else(|| Error::config("SAGA expectation needs a table"))?;
                (0..d)
                    .map(|j| {
                        let sarah = s.iter().map(|&i| new[i][j] - old[i][j]).sum::<f64>() / bf;
                        let saga = s.iter().map(|&i| old[i][j] - y[i][j]).sum::<f64>() / bf
                            + y.iter().map(|yi| yi[j]).sum::<f64>() / n as f64;
                        sarah + (1.0 - lambda) * state.g[j] + lambda * saga
                    })
                    .collect()
            }
            ExpectedUpdate::Momentum { rho } => (0..d)
                .map(|j| (1.0 - rho) * state.g[j] + rho * s.iter().map(|&i| new[i][j]).sum::<f64>() / bf)
                .collect(),
        };
        for (m, v) in batch_mean.iter_mut().zip(next) {
            *m += weight * v;
        }
    }

    Ok(match update {
        ExpectedUpdate::Sarah { p } => {
            let full_new: Vec<f64> = (0..d)
                .map(|j| new.iter().map(|gi| gi[j]).sum::<f64>() / n as f64)
                .collect();
            (0..d).map(|j| p * full_new[j] + (1.0 - p) * batch_mean[j]).collect()
        }
        _ => batch_mean,
    })
}

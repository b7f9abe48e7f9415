//! Stochastic gradient estimators `g^k` and their oracle accounting.
//!
//! * [`EstimatorConfig::Full`]: `g^k = ∇f(x^k)`, `n` calls per step.
//! * [`EstimatorConfig::Sarah`]: loopless SARAH. With probability `p` the
//!   estimate is refreshed to the full gradient; otherwise a batch `S` of
//!   size `b` updates it recursively,
//!   `g ← g + (1/b) Σ_{i∈S} [∇f_i(x_new) − ∇f_i(x_old)]`.
//! * [`EstimatorConfig::SagaSarah`]: the SARAH recursion mixed with a SAGA
//!   correction of weight `λ`. A table `y_i` holds the last gradient seen
//!   for every sample; no full gradient is needed after initialization.
//! * [`EstimatorConfig::Momentum`]: `g ← (1−ρ_k) g + ρ_k ∇f_S(x_new)`.
//!
//! Every per-sample gradient evaluation is one SFO call. The refresh coin is
//! drawn before the batch, so each step consumes the RNG stream in a fixed
//! order and runs are reproducible from the seed alone.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::objectives::Objective;

/// Default number of SAGA updates between full recomputations of the table mean.
pub const TABLE_REBUILD_EVERY: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampling {
    #[default]
    WithReplacement,
    WithoutReplacement,
}

/// Initialization of the SAGA-SARAH estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SagaInit {
    /// `g⁰ = ∇f(x⁰)`, `y_i = ∇f_i(x⁰)`; one pass, `n` calls.
    #[default]
    Full,
    /// `g⁰ = ∇f_{i₀}(x⁰)` for a random `i₀`, `y_i = 0`; one call.
    Cold,
}

/// Weight `ρ_k` of the fresh batch gradient in the momentum baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentumRule {
    /// `ρ_k = (k + 1)^(−exponent)`
    Power(f64),
    Constant(f64),
}

impl Default for MomentumRule {
    fn default() -> Self {
        MomentumRule::Power(2.0 / 3.0)
    }
}

impl MomentumRule {
    pub fn rho(&self, k: u64) -> f64 {
        match *self {
            MomentumRule::Power(e) => ((k + 1) as f64).powf(-e),
            MomentumRule::Constant(r) => r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorConfig {
    Full,
    Sarah {
        p: f64,
        batch: usize,
        sampling: Sampling,
    },
    SagaSarah {
        lambda: f64,
        batch: usize,
        sampling: Sampling,
        init: SagaInit,
    },
    Momentum {
        rule: MomentumRule,
        batch: usize,
        sampling: Sampling,
    },
}

impl EstimatorConfig {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorConfig::Full => "full",
            EstimatorConfig::Sarah { .. } => "sarah",
            EstimatorConfig::SagaSarah { .. } => "saga_sarah",
            EstimatorConfig::Momentum { .. } => "momentum",
        }
    }

    pub fn batch(&self) -> Option<usize> {
        match *self {
            EstimatorConfig::Full => None,
            EstimatorConfig::Sarah { batch, .. }
            | EstimatorConfig::SagaSarah { batch, .. }
            | EstimatorConfig::Momentum { batch, .. } => Some(batch),
        }
    }

    fn sampling(&self) -> Sampling {
        match *self {
            EstimatorConfig::Full => Sampling::WithReplacement,
            EstimatorConfig::Sarah { sampling, .. }
            | EstimatorConfig::SagaSarah { sampling, .. }
            | EstimatorConfig::Momentum { sampling, .. } => sampling,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must lie in (0, 1], got {v}")))
            }
        };
        match *self {
            EstimatorConfig::Full => {}
            EstimatorConfig::Sarah { p, .. } => unit("p", p)?,
            EstimatorConfig::SagaSarah { lambda, .. } => unit("lambda", lambda)?,
            EstimatorConfig::Momentum { rule, .. } => match rule {
                MomentumRule::Power(e) if !(e.is_finite() && e >= 0.0) => {
                    return Err(Error::config(format!("momentum exponent must be >= 0, got {e}")));
                }
                MomentumRule::Constant(r) => unit("rho", r)?,
                _ => {}
            },
        }
        if let Some(b) = self.batch() {
            if b == 0 {
                return Err(Error::config("batch size must be at least 1"));
            }
            if self.sampling() == Sampling::WithoutReplacement && b > n {
                return Err(Error::config(format!(
                    "batch {b} exceeds n = {n} for sampling without replacement"
                )));
            }
        }
        Ok(())
    }
}

/// Outcome of the SARAH refresh coin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SarahBranch {
    Refresh,
    Batch,
}

/// Per-sample gradients of the SAGA table, stored as margin slopes: the
/// gradient of sample `i` is `slope_i · x_i`, supported on the row of `x_i`.
#[derive(Debug, Clone)]
pub struct SagaTable {
    slopes: Vec<f64>,
    avg: Vec<f64>,
    since_rebuild: u64,
    rebuild_every: Option<u64>,
}

impl SagaTable {
    fn new(slopes: Vec<f64>, avg: Vec<f64>) -> Self {
        Self {
            slopes,
            avg,
            since_rebuild: 0,
            rebuild_every: Some(TABLE_REBUILD_EVERY),
        }
    }

    /// Cached `(1/n) Σ_j y_j`.
    pub fn mean(&self) -> &[f64] {
        &self.avg
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// `y_i` as a dense vector.
    pub fn entry(&self, obj: &Objective<'_>, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; obj.dim()];
        obj.data().row(i).axpy(self.slopes[i], &mut out);
        out
    }

    /// `(1/n) Σ_j y_j` recomputed from the stored entries.
    pub fn recompute_mean(&self, obj: &Objective<'_>) -> Vec<f64> {
        let mut out = vec![0.0; obj.dim()];
        for (row, &s) in obj.data().rows().iter().zip(&self.slopes) {
            row.axpy(s, &mut out);
        }
        let inv_n = 1.0 / self.slopes.len() as f64;
        out.iter_mut().for_each(|v| *v *= inv_n);
        out
    }

    fn set(&mut self, obj: &Objective<'_>, i: usize, slope: f64) {
        let delta = (slope - self.slopes[i]) / self.slopes.len() as f64;
        obj.data().row(i).axpy(delta, &mut self.avg);
        self.slopes[i] = slope;
    }

    fn tick(&mut self, obj: &Objective<'_>) {
        self.since_rebuild += 1;
        if let Some(every) = self.rebuild_every {
            if self.since_rebuild >= every {
                self.avg = self.recompute_mean(obj);
                self.since_rebuild = 0;
            }
        }
    }
}

/// Dense copy of an estimator's state, for reference computations.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSnapshot {
    pub g: Vec<f64>,
    /// `y_i` for every sample, when the estimator keeps a table.
    pub table: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone)]
pub struct GradientEstimator {
    config: EstimatorConfig,
    g: Vec<f64>,
    table: Option<SagaTable>,
    rng: ChaCha8Rng,
    sfo_count: u64,
    refreshes: u64,
    batch_steps: u64,
    forced: Option<SarahBranch>,
    batch: Vec<usize>,
    slopes: Vec<f64>,
    work: Vec<f64>,
    work2: Vec<f64>,
}

impl GradientEstimator {
    /// Builds `g⁰` at `x0` and charges its oracle calls.
    pub fn new(config: EstimatorConfig, obj: &Objective<'_>, x0: &[f64], seed: u64) -> Result<Self> {
        let n = obj.n();
        let d = obj.dim();
        config.validate(n)?;
        if x0.len() != d {
            return Err(Error::Dimension { expected: d, got: x0.len() });
        }
        let mut est = Self {
            config,
            g: vec![0.0; d],
            table: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
            sfo_count: 0,
            refreshes: 0,
            batch_steps: 0,
            forced: None,
            batch: Vec::new(),
            slopes: Vec::new(),
            work: vec![0.0; d],
            work2: vec![0.0; d],
        };
        match config {
            EstimatorConfig::SagaSarah { init: SagaInit::Full, .. } => {
                // g⁰ and the table come out of the same pass
                let slopes: Vec<f64> = (0..n).map(|i| obj.sample_slope(i, x0)).collect();
                for (row, &s) in obj.data().rows().iter().zip(&slopes) {
                    row.axpy(s, &mut est.g);
                }
                let inv_n = 1.0 / n as f64;
                est.g.iter_mut().for_each(|v| *v *= inv_n);
                est.table = Some(SagaTable::new(slopes, est.g.clone()));
                est.sfo_count = n as u64;
            }
            EstimatorConfig::SagaSarah { init: SagaInit::Cold, .. } => {
                let i0 = est.rng.gen_range(0..n);
                obj.data().row(i0).axpy(obj.sample_slope(i0, x0), &mut est.g);
                est.table = Some(SagaTable::new(vec![0.0; n], vec![0.0; d]));
                est.sfo_count = 1;
            }
            _ => {
                obj.grad_full_into(x0, &mut est.g);
                est.sfo_count = n as u64;
            }
        }
        Ok(est)
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }

    /// Current estimate `g^k`.
    pub fn gradient(&self) -> &[f64] {
        &self.g
    }

    /// Per-sample gradient evaluations charged so far.
    pub fn sfo_count(&self) -> u64 {
        self.sfo_count
    }

    pub fn saga_table(&self) -> Option<&SagaTable> {
        self.table.as_ref()
    }

    /// SARAH steps taken on the (refresh, batch) branch.
    pub fn branch_counts(&self) -> (u64, u64) {
        (self.refreshes, self.batch_steps)
    }

    /// Overrides the outcome of the SARAH refresh coin. The coin is still
    /// drawn, so the batch stream is the same as in an unforced run.
    pub fn force_sarah_branch(&mut self, branch: Option<SarahBranch>) {
        self.forced = branch;
    }

    /// Sets how many SAGA updates pass between exact recomputations of the
    /// table mean; `None` disables them.
    pub fn set_table_rebuild_interval(&mut self, every: Option<u64>) {
        if let Some(t) = self.table.as_mut() {
            t.rebuild_every = every.filter(|&e| e > 0);
        }
    }

    pub fn snapshot(&self, obj: &Objective<'_>) -> EstimatorSnapshot {
        EstimatorSnapshot {
            g: self.g.clone(),
            table: self
                .table
                .as_ref()
                .map(|t| (0..obj.n()).map(|i| t.entry(obj, i)).collect()),
        }
    }

    /// Advances the estimate from `x_old = x^k` to `x_new = x^{k+1}`.
    pub fn update(&mut self, obj: &Objective<'_>, x_new: &[f64], x_old: &[f64], k: u64) -> Result<()> {
        match self.config {
            EstimatorConfig::Full => {
                self.refresh(obj, x_new);
                Ok(())
            }
            EstimatorConfig::Sarah { .. } => self.update_sarah(obj, x_new, x_old).map(|_| ()),
            EstimatorConfig::SagaSarah { .. } => self.update_saga_sarah(obj, x_new, x_old),
            EstimatorConfig::Momentum { .. } => self.update_momentum(obj, x_new, k),
        }
    }

    fn refresh(&mut self, obj: &Objective<'_>, x: &[f64]) {
        obj.grad_full_into(x, &mut self.g);
        self.sfo_count += obj.n() as u64;
    }

    fn draw_batch(&mut self, n: usize) {
        let (Some(b), sampling) = (self.config.batch(), self.config.sampling()) else {
            return;
        };
        self.batch.clear();
        match sampling {
            Sampling::WithReplacement => {
                for _ in 0..b {
                    self.batch.push(self.rng.gen_range(0..n));
                }
            }
            Sampling::WithoutReplacement => {
                self.batch.extend(index::sample(&mut self.rng, n, b).iter());
            }
        }
    }

    pub fn update_sarah(&mut self, obj: &Objective<'_>, x_new: &[f64], x_old: &[f64]) -> Result<SarahBranch> {
        let EstimatorConfig::Sarah { p, .. } = self.config else {
            return Err(self.wrong_kind("sarah"));
        };
        let u: f64 = self.rng.gen();
        let branch = self.forced.unwrap_or(if u < p {
            SarahBranch::Refresh
        } else {
            SarahBranch::Batch
        });
        match branch {
            SarahBranch::Refresh => {
                self.refresh(obj, x_new);
                self.refreshes += 1;
            }
            SarahBranch::Batch => {
                self.draw_batch(obj.n());
                let batch = std::mem::take(&mut self.batch);
                self.sarah_batch_step(obj, &batch, x_new, x_old);
                self.batch = batch;
                self.batch_steps += 1;
            }
        }
        Ok(branch)
    }

    /// The non-refresh SARAH step with a caller-chosen batch.
    pub fn apply_sarah_batch(&mut self, obj: &Objective<'_>, batch: &[usize], x_new: &[f64], x_old: &[f64]) -> Result<()> {
        if !matches!(self.config, EstimatorConfig::Sarah { .. }) {
            return Err(self.wrong_kind("sarah"));
        }
        check_batch(obj, batch)?;
        self.sarah_batch_step(obj, batch, x_new, x_old);
        Ok(())
    }

    fn sarah_batch_step(&mut self, obj: &Objective<'_>, batch: &[usize], x_new: &[f64], x_old: &[f64]) {
        self.work.fill(0.0);
        for &i in batch {
            let c = obj.sample_slope(i, x_new) - obj.sample_slope(i, x_old);
            obj.data().row(i).axpy(c, &mut self.work);
        }
        let inv_b = 1.0 / batch.len() as f64;
        for (g, w) in self.g.iter_mut().zip(&self.work) {
            *g += w * inv_b;
        }
        self.sfo_count += 2 * batch.len() as u64;
    }

    pub fn update_saga_sarah(&mut self, obj: &Objective<'_>, x_new: &[f64], x_old: &[f64]) -> Result<()> {
        if !matches!(self.config, EstimatorConfig::SagaSarah { .. }) {
            return Err(self.wrong_kind("saga_sarah"));
        }
        self.draw_batch(obj.n());
        let batch = std::mem::take(&mut self.batch);
        self.saga_sarah_batch_step(obj, &batch, x_new, x_old);
        self.batch = batch;
        Ok(())
    }

    /// The SAGA-SARAH step with a caller-chosen batch.
    pub fn apply_saga_sarah_batch(&mut self, obj: &Objective<'_>, batch: &[usize], x_new: &[f64], x_old: &[f64]) -> Result<()> {
        if !matches!(self.config, EstimatorConfig::SagaSarah { .. }) {
            return Err(self.wrong_kind("saga_sarah"));
        }
        check_batch(obj, batch)?;
        self.saga_sarah_batch_step(obj, batch, x_new, x_old);
        Ok(())
    }

    fn saga_sarah_batch_step(&mut self, obj: &Objective<'_>, batch: &[usize], x_new: &[f64], x_old: &[f64]) {
        let EstimatorConfig::SagaSarah { lambda, .. } = self.config else {
            unreachable!()
        };
        let table = self.table.as_mut().expect("saga estimator owns a table");
        let rows = obj.data().rows();

        // work = Σ [∇f_i(x_new) − ∇f_i(x_old)], work2 = Σ [∇f_i(x_old) − y_i]
        self.work.fill(0.0);
        self.work2.fill(0.0);
        self.slopes.clear();
        for &i in batch {
            let fresh = obj.sample_slope(i, x_new);
            let stale = obj.sample_slope(i, x_old);
            rows[i].axpy(fresh - stale, &mut self.work);
            rows[i].axpy(stale - table.slopes[i], &mut self.work2);
            self.slopes.push(fresh);
        }
        let inv_b = 1.0 / batch.len() as f64;
        for j in 0..self.g.len() {
            self.g[j] = self.work[j] * inv_b
                + (1.0 - lambda) * self.g[j]
                + lambda * (self.work2[j] * inv_b + table.avg[j]);
        }
        // repeated indices see their own earlier write, leaving the mean unchanged
        for (&i, &s) in batch.iter().zip(&self.slopes) {
            table.set(obj, i, s);
        }
        table.tick(obj);
        self.sfo_count += 2 * batch.len() as u64;
    }

    pub fn update_momentum(&mut self, obj: &Objective<'_>, x_new: &[f64], k: u64) -> Result<()> {
        if !matches!(self.config, EstimatorConfig::Momentum { .. }) {
            return Err(self.wrong_kind("momentum"));
        }
        self.draw_batch(obj.n());
        let batch = std::mem::take(&mut self.batch);
        self.momentum_batch_step(obj, &batch, x_new, k);
        self.batch = batch;
        Ok(())
    }

    /// The momentum step with a caller-chosen batch.
    pub fn apply_momentum_batch(&mut self, obj: &Objective<'_>, batch: &[usize], x_new: &[f64], k: u64) -> Result<()> {
        if !matches!(self.config, EstimatorConfig::Momentum { .. }) {
            return Err(self.wrong_kind("momentum"));
        }
        check_batch(obj, batch)?;
        self.momentum_batch_step(obj, batch, x_new, k);
        Ok(())
    }

    fn momentum_batch_step(&mut self, obj: &Objective<'_>, batch: &[usize], x_new: &[f64], k: u64) {
        let EstimatorConfig::Momentum { rule, .. } = self.config else {
            unreachable!()
        };
        let rho = rule.rho(k);
        self.work.fill(0.0);
        for &i in batch {
            obj.data().row(i).axpy(obj.sample_slope(i, x_new), &mut self.work);
        }
        let inv_b = 1.0 / batch.len() as f64;
        for (g, w) in self.g.iter_mut().zip(&self.work) {
            *g = (1.0 - rho) * *g + rho * (w * inv_b);
        }
        self.sfo_count += batch.len() as u64;
    }

    fn wrong_kind(&self, wanted: &str) -> Error {
        Error::config(format!(
            "{wanted} update called on a {} estimator",
            self.config.name()
        ))
    }
}

fn check_batch(obj: &Objective<'_>, batch: &[usize]) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    match batch.iter().find(|&&i| i >= obj.n()) {
        Some(&i) => Err(Error::SampleIndex { index: i, n: obj.n() }),
        None => Ok(()),
    }
}

//! The Frank-Wolfe loop shared by all methods.
//!
//! Each iteration takes one LMO step against the current estimate,
//! `x^{k+1} = x^k + η_k (s^k − x^k)` with `s^k = lmo(g^k)`, then lets the
//! estimator move `g^k` to `g^{k+1}`. Only the estimator differs between
//! deterministic FW, Sarah FW, Saga Sarah FW and momentum FW.

use std::fmt;
use std::time::Instant;

use crate::constraints::{ConstraintKind, ConstraintSet};
use crate::error::{Error, Result};
use crate::estimators::{EstimatorConfig, GradientEstimator, TABLE_REBUILD_EVERY};
use crate::linalg::all_finite;
use crate::metrics::{fw_gap_from_gradient, Trace, TraceRow};
use crate::objectives::Objective;
use crate::schedules::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Fw,
    SarahFw,
    SagaSarahFw,
    MomentumFw,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Fw,
        Algorithm::SarahFw,
        Algorithm::SagaSarahFw,
        Algorithm::MomentumFw,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Fw => "fw",
            Algorithm::SarahFw => "sarah_fw",
            Algorithm::SagaSarahFw => "saga_sarah_fw",
            Algorithm::MomentumFw => "momentum_fw",
        }
    }

    fn matches(self, est: &EstimatorConfig) -> bool {
        matches!(
            (self, est),
            (Algorithm::Fw, EstimatorConfig::Full)
                | (Algorithm::SarahFw, EstimatorConfig::Sarah { .. })
                | (Algorithm::SagaSarahFw, EstimatorConfig::SagaSarah { .. })
                | (Algorithm::MomentumFw, EstimatorConfig::Momentum { .. })
        )
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::config(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    /// Number of iterations `K`; must equal the schedule's horizon.
    pub horizon: u64,
    pub schedule: Schedule,
    pub estimator: EstimatorConfig,
    pub seed: u64,
    /// Evaluate the FW gap every this many iterations; 0 disables it.
    pub gap_every: u64,
    pub record_every: u64,
    /// Fill `wall_ns` in the trace. Off by default so traces are reproducible.
    pub record_wall_time: bool,
    /// SAGA table mean recomputation interval, `None` to never recompute.
    pub table_rebuild_every: Option<u64>,
}

impl SolverConfig {
    pub fn new(
        algorithm: Algorithm,
        schedule: Schedule,
        estimator: EstimatorConfig,
        seed: u64,
    ) -> Self {
        Self {
            algorithm,
            horizon: schedule.horizon(),
            schedule,
            estimator,
            seed,
            gap_every: 0,
            record_every: 1,
            record_wall_time: false,
            table_rebuild_every: Some(TABLE_REBUILD_EVERY),
        }
    }

    /// Deterministic Frank-Wolfe with `η_k = 2/(k+2)`.
    pub fn fw(horizon: u64) -> Self {
        Self::new(Algorithm::Fw, Schedule::classic(horizon), EstimatorConfig::Full, 0)
    }

    pub fn with_gap_every(mut self, every: u64) -> Self {
        self.gap_every = every;
        self
    }

    pub fn with_record_every(mut self, every: u64) -> Self {
        self.record_every = every;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.schedule.horizon() != self.horizon {
            return Err(Error::config(format!(
                "schedule horizon {} differs from K = {}",
                self.schedule.horizon(),
                self.horizon
            )));
        }
        if !self.algorithm.matches(&self.estimator) {
            return Err(Error::config(format!(
                "{} cannot run with a {} estimator",
                self.algorithm,
                self.estimator.name()
            )));
        }
        if self.record_every == 0 {
            return Err(Error::config("record_every must be at least 1"));
        }
        self.estimator.validate(n)
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x_final: Vec<f64>,
    pub trace: Trace,
    /// Oracle calls made by the algorithm itself.
    pub sfo_total: u64,
    pub lmo_total: u64,
    /// LMO calls spent on gap evaluations, not part of `lmo_total`.
    pub gap_lmo_total: u64,
    /// Per-sample gradients spent on gap evaluations, not part of `sfo_total`.
    pub gap_sfo_total: u64,
    /// Final estimator state.
    pub estimator: GradientEstimator,
}

/// Starting point: the origin, or `r e_0` for the simplex.
pub fn default_x0(set: &ConstraintSet, dim: usize) -> Vec<f64> {
    let mut x = vec![0.0; dim];
    if set.kind() == ConstraintKind::Simplex && dim > 0 {
        x[0] = set.radius();
    }
    x
}

pub fn solve(cfg: &SolverConfig, obj: &Objective<'_>, set: &ConstraintSet, x0: &[f64]) -> Result<SolveResult> {
    solve_observed(cfg, obj, set, x0, |_, _| {})
}

/// [`solve`], calling `observe(k, x^k)` at every recorded iterate.
pub fn solve_observed<F>(
    cfg: &SolverConfig,
    obj: &Objective<'_>,
    set: &ConstraintSet,
    x0: &[f64],
    mut observe: F,
) -> Result<SolveResult>
where
    F: FnMut(u64, &[f64]),
{
    let d = obj.dim();
    cfg.validate(obj.n())?;
    if x0.len() != d {
        return Err(Error::Dimension { expected: d, got: x0.len() });
    }
    if !set.contains(x0, 0.0) {
        return Err(Error::InfeasibleStart);
    }

    let mut est = GradientEstimator::new(cfg.estimator, obj, x0, cfg.seed)?;
    est.set_table_rebuild_interval(cfg.table_rebuild_every);

    let mut trace = Trace::default();
    trace.metadata.insert("algorithm".into(), cfg.algorithm.to_string());
    trace.metadata.insert("K".into(), cfg.horizon.to_string());
    trace.metadata.insert("seed".into(), cfg.seed.to_string());
    trace.metadata.insert("schedule".into(), format!("{:?}", cfg.schedule.kind()));
    trace.metadata.insert("estimator".into(), format!("{:?}", cfg.estimator));

    let mut rec = Recorder {
        obj,
        set,
        cfg,
        start: Instant::now(),
        grad: vec![0.0; d],
        gap_lmo: 0,
        gap_sfo: 0,
    };

    let mut x = x0.to_vec();
    let mut x_next = vec![0.0; d];
    let mut s = vec![0.0; d];
    let mut lmo_total = 0u64;

    if cfg.horizon > 0 {
        for k in 0..cfg.horizon {
            if k % cfg.record_every == 0 {
                trace.rows.push(rec.row(k, &x, &est, lmo_total)?);
                observe(k, &x);
            }
            set.lmo_into(est.gradient(), &mut s)?;
            lmo_total += 1;
            let eta = cfg.schedule.eta(k)?;
            for ((xn, &xj), &sj) in x_next.iter_mut().zip(&x).zip(&s) {
                *xn = xj + eta * (sj - xj);
            }
            est.update(obj, &x_next, &x, k)?;
            std::mem::swap(&mut x, &mut x_next);
        }
        trace.rows.push(rec.row(cfg.horizon, &x, &est, lmo_total)?);
        observe(cfg.horizon, &x);
    }

    Ok(SolveResult {
        x_final: x,
        trace,
        sfo_total: est.sfo_count(),
        lmo_total,
        gap_lmo_total: rec.gap_lmo,
        gap_sfo_total: rec.gap_sfo,
        estimator: est,
    })
}

struct Recorder<'a, 'o> {
    obj: &'a Objective<'o>,
    set: &'a ConstraintSet,
    cfg: &'a SolverConfig,
    start: Instant,
    grad: Vec<f64>,
    gap_lmo: u64,
    gap_sfo: u64,
}

impl Recorder<'_, '_> {
    fn row(&mut self, k: u64, x: &[f64], est: &GradientEstimator, lmo: u64) -> Result<TraceRow> {
        let f = self.obj.loss_full(x);
        if !f.is_finite() || !all_finite(est.gradient()) {
            return Err(Error::NonFinite { iteration: k });
        }
        let gap = if self.cfg.gap_every > 0 && k % self.cfg.gap_every == 0 {
            self.obj.grad_full_into(x, &mut self.grad);
            self.gap_lmo += 1;
            self.gap_sfo += self.obj.n() as u64;
            let gap = fw_gap_from_gradient(self.set, &self.grad, x);
            if !gap.is_finite() {
                return Err(Error::NonFinite { iteration: k });
            }
            Some(gap)
        } else {
            None
        };
        let wall_ns = if self.cfg.record_wall_time {
            self.start.elapsed().as_nanos() as u64
        } else {
            0
        };
        Ok(TraceRow {
            k,
            sfo: est.sfo_count(),
            lmo,
            f,
            gap,
            wall_ns,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Dataset, SparseRow};
    use crate::estimators::Sampling;
    use crate::objectives::LossKind;
    use crate::schedules::ScheduleKind;

    fn one_sample() -> Dataset {
        Dataset::new(vec![SparseRow::new(vec![0], vec![1.0]).unwrap()], vec![1.0], 2).unwrap()
    }

    #[test]
    fn fw_decreases_single_sample_logistic() {
        let ds = one_sample();
        let obj = Objective::new(LossKind::Logistic, &ds).unwrap();
        let set = ConstraintSet::l1_ball(1.0).unwrap();
        let res = solve(&SolverConfig::fw(10), &obj, &set, &[0.0, 0.0]).unwrap();
        let fs: Vec<f64> = res.trace.rows.iter().map(|r| r.f).collect();
        assert_eq!(fs.len(), 11);
        assert!(fs.windows(2).all(|w| w[1] <= w[0]), "{fs:?}");
        assert!(fs[10] < fs[0]);
        assert_eq!(res.lmo_total, 10);
        assert_eq!(res.sfo_total, 11);
        assert!(set.contains(&res.x_final, 1e-9));
    }

    #[test]
    fn zero_horizon_returns_start() {
        let ds = one_sample();
        let obj = Objective::new(LossKind::Logistic, &ds).unwrap();
        let set = ConstraintSet::l1_ball(1.0).unwrap();
        let res = solve(&SolverConfig::fw(0), &obj, &set, &[0.25, 0.0]).unwrap();
        assert_eq!(res.x_final, vec![0.25, 0.0]);
        assert!(res.trace.is_empty());
        assert_eq!(res.lmo_total, 0);
    }

    #[test]
    fn rejects_infeasible_start_and_bad_config() {
        let ds = one_sample();
        let obj = Objective::new(LossKind::Logistic, &ds).unwrap();
        let set = ConstraintSet::l1_ball(1.0).unwrap();
        assert!(matches!(
            solve(&SolverConfig::fw(3), &obj, &set, &[1.0, 0.5]),
            Err(Error::InfeasibleStart)
        ));

        let mut cfg = SolverConfig::fw(3);
        cfg.horizon = 4;
        assert!(matches!(solve(&cfg, &obj, &set, &[0.0; 2]), Err(Error::Config(_))));

        let mut cfg = SolverConfig::fw(3);
        cfg.algorithm = Algorithm::SarahFw;
        assert!(matches!(solve(&cfg, &obj, &set, &[0.0; 2]), Err(Error::Config(_))));
    }

    #[test]
    fn gap_rows_follow_gap_every() {
        let ds = one_sample();
        let obj = Objective::new(LossKind::Logistic, &ds).unwrap();
        let set = ConstraintSet::l1_ball(1.0).unwrap();
        let cfg = SolverConfig::fw(10).with_gap_every(3).with_record_every(1);
        let res = solve(&cfg, &obj, &set, &[0.0; 2]).unwrap();
        for r in &res.trace.rows {
            assert_eq!(r.gap.is_some(), r.k % 3 == 0, "k = {}", r.k);
        }
        assert_eq!(res.gap_lmo_total, 4);
        assert_eq!(res.lmo_total, 10);
    }

    #[test]
    fn record_every_thins_rows() {
        let ds = one_sample();
        let obj = Objective::new(LossKind::Logistic, &ds).unwrap();
        let set = ConstraintSet::l1_ball(1.0).unwrap();
        let cfg = SolverConfig::fw(10).with_record_every(4);
        let res = solve(&cfg, &obj, &set, &[0.0; 2]).unwrap();
        let ks: Vec<u64> = res.trace.rows.iter().map(|r| r.k).collect();
        assert_eq!(ks, vec![0, 4, 8, 10]);
    }

    #[test]
    fn default_starting_points() {
        let l1 = ConstraintSet::l1_ball(2.0).unwrap();
        assert_eq!(default_x0(&l1, 3), vec![0.0; 3]);
        let sx = ConstraintSet::simplex(1.0).unwrap();
        assert_eq!(default_x0(&sx, 3), vec![1.0, 0.0, 0.0]);
        let bx = ConstraintSet::linf_box(1.0).unwrap();
        assert_eq!(default_x0(&bx, 2), vec![0.0; 2]);
    }

    #[test]
    fn non_finite_data_aborts() {
        // large weights on a single sample are fine; NaN in the start is not feasible
        let ds = one_sample();
        let obj = Objective::new(LossKind::Logistic, &ds).unwrap();
        let set = ConstraintSet::l1_ball(1.0).unwrap();
        assert!(solve(&SolverConfig::fw(2), &obj, &set, &[f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn sarah_with_unit_probability_matches_fw() {
        let ds = crate::data::synthetic::random_sparse(30, 5, 0.5, 1.0, 7);
        let obj = Objective::new(LossKind::Logistic, &ds).unwrap();
        let set = ConstraintSet::l1_ball(5.0).unwrap();
        let x0 = default_x0(&set, 5);
        let fw = solve(&SolverConfig::fw(50), &obj, &set, &x0).unwrap();
        let sarah = SolverConfig::new(
            Algorithm::SarahFw,
            Schedule::new(ScheduleKind::ClassicFw, 50).unwrap(),
            EstimatorConfig::Sarah {
                p: 1.0,
                batch: 3,
                sampling: Sampling::WithReplacement,
            },
            0,
        );
        let sr = solve(&sarah, &obj, &set, &x0).unwrap();
        assert_eq!(fw.x_final, sr.x_final);
        assert_eq!(fw.trace, {
            let mut t = sr.trace.clone();
            t.metadata = fw.trace.metadata.clone();
            t
        });
    }
}

//! Projection-free stochastic optimization for constrained finite-sum problems.
//!
//! The crate provides the Sarah Frank-Wolfe method (loopless SARAH gradient
//! estimator with probabilistic full-gradient refreshes), the Saga Sarah
//! Frank-Wolfe method (SARAH recursion mixed with a SAGA table, no full
//! gradients after initialization), deterministic Frank-Wolfe and a momentum
//! stochastic Frank-Wolfe baseline, together with:
//!
//! * [`data`]: LibSVM parsing and label normalization,
//! * [`objectives`]: logistic and non-linear least squares finite sums,
//! * [`constraints`]: closed-form linear minimization oracles,
//! * [`schedules`]: horizon-aware step sizes and default parameters,
//! * [`metrics`]: Frank-Wolfe gap, traces and suboptimality reports,
//! * [`oracle`]: brute-force reference computations used by the tests.
//!
//! ```
//! use sfw_core::prelude::*;
//!
//! let ds = parse_libsvm("+1 1:0.5 3:2.0\n-1 2:1.0\n".as_bytes()).unwrap();
//! let ds = normalize_labels(ds, LossKind::Logistic).unwrap();
//! let obj = Objective::new(LossKind::Logistic, &ds).unwrap();
//! let set = ConstraintSet::l1_ball(10.0).unwrap();
//!
//! let cfg = SolverConfig::fw(50);
//! let res = solve(&cfg, &obj, &set, &default_x0(&set, ds.dim())).unwrap();
//! assert!(obj.loss_full(&res.x_final) < std::f64::consts::LN_2);
//! ```

pub mod constraints;
pub mod data;
pub mod error;
pub mod estimators;
pub mod metrics;
pub mod objectives;
pub mod oracle;
pub mod schedules;
pub mod solver;

mod linalg;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::constraints::{ConstraintKind, ConstraintSet};
    pub use crate::data::{normalize_labels, parse_libsvm, Dataset, SparseRow};
    pub use crate::error::{Error, Result};
    pub use crate::estimators::{EstimatorConfig, GradientEstimator, MomentumRule, SagaInit, Sampling};
    pub use crate::metrics::{fw_gap, min_gap_so_far, relative_suboptimality, Trace, TraceRow};
    pub use crate::objectives::{LossKind, Objective, SmoothnessInfo};
    pub use crate::schedules::{default_batch, default_params, BatchRegime, Schedule, ScheduleKind};
    pub use crate::solver::{default_x0, solve, Algorithm, SolveResult, SolverConfig};
}

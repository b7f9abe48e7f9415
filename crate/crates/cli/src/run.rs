use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sfw_core::prelude::*;
use sfw_core::solver::solve_observed;

use crate::config::ExperimentSpec;
use crate::error::{CliError, Result};
use crate::trace_csv::{emit_csv, format_float};

/// Caps the worker pool used for a grid of runs.
pub const THREADS_ENV: &str = "SARAH_FW_THREADS";

pub const SUMMARY_FILE: &str = "summary.csv";
pub const SUMMARY_HEADER: [&str; 10] = [
    "algorithm",
    "seed",
    "K",
    "final_f",
    "min_gap",
    "sfo_total",
    "lmo_total",
    "max_violation",
    "f_min",
    "sfo_to_threshold",
];

#[derive(Debug, Clone)]
pub struct RunReport {
    pub config: SolverConfig,
    pub trace: Trace,
    pub final_f: f64,
    pub min_gap: Option<f64>,
    pub sfo_total: u64,
    pub lmo_total: u64,
    /// Largest [`ConstraintSet::violation`] over the recorded iterates.
    pub max_violation: f64,
    /// Largest `‖x‖₁` over the recorded iterates.
    pub max_l1_norm: f64,
    pub sfo_to_threshold: Option<u64>,
    pub csv: PathBuf,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub runs: Vec<RunReport>,
    /// Set when a reference run was requested.
    pub f_min: Option<f64>,
    pub reference: Option<RunReport>,
    pub summary: PathBuf,
}

pub fn csv_name(alg: Algorithm, seed: u64) -> String {
    format!("{alg}_seed{seed}.csv")
}

pub fn load_dataset(spec: &ExperimentSpec, loss: LossKind) -> Result<Dataset> {
    let err = |source| CliError::Dataset {
        path: spec.dataset.clone(),
        source,
    };
    let ds = sfw_core::data::load_libsvm(&spec.dataset, spec.min_dim).map_err(err)?;
    normalize_labels(ds, loss).map_err(err)
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Spec(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Spec(e.to_string()))
}

/// Solves one configuration and measures feasibility of every recorded iterate.
pub fn execute(cfg: &SolverConfig, obj: &Objective<'_>, set: &ConstraintSet) -> Result<(SolveResult, f64, f64)> {
    let x0 = default_x0(set, obj.dim());
    let mut worst = 0.0f64;
    let mut max_l1 = 0.0f64;
    let res = solve_observed(cfg, obj, set, &x0, |_, x| {
        worst = worst.max(set.violation(x));
        max_l1 = max_l1.max(x.iter().map(|v| v.abs()).sum());
    })
    .map_err(|source| match source {
        sfw_core::Error::NonFinite { iteration } => CliError::NonFinite {
            algorithm: cfg.algorithm.to_string(),
            seed: cfg.seed,
            iteration,
        },
        source => CliError::Solve {
            algorithm: cfg.algorithm.to_string(),
            seed: cfg.seed,
            source,
        },
    })?;
    Ok((res, worst, max_l1))
}

fn report(cfg: SolverConfig, res: SolveResult, violation: f64, max_l1: f64, csv: PathBuf) -> RunReport {
    RunReport {
        config: cfg,
        final_f: res.trace.last().map_or(f64::NAN, |r| r.f),
        min_gap: res.trace.min_gap(),
        sfo_total: res.sfo_total,
        lmo_total: res.lmo_total,
        max_violation: violation,
        max_l1_norm: max_l1,
        sfo_to_threshold: None,
        trace: res.trace,
        csv,
    }
}

/// Runs every (algorithm, seed) pair, writes one trace per run plus a
/// summary into `spec.out`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let loss = spec.loss_kind()?;
    let set = spec.constraint_set()?;
    let ds = load_dataset(spec, loss)?;
    let cfgs = spec.resolve(ds.n())?;
    let obj = Objective::new(loss, &ds).map_err(|e| CliError::Spec(e.to_string()))?;

    std::fs::create_dir_all(&spec.out).map_err(|source| CliError::Output {
        path: spec.out.clone(),
        source,
    })?;

    let name = spec.display_name();
    let tag = |trace: &mut Trace| {
        trace.metadata.insert("dataset".into(), name.clone());
        trace.metadata.insert("loss".into(), loss.to_string());
        trace.metadata.insert("constraint".into(), format!("{}({})", set.kind(), set.radius()));
    };

    let pool = thread_pool()?;
    let solved: Vec<Result<(SolveResult, f64, f64)>> =
        pool.install(|| cfgs.par_iter().map(|cfg| execute(cfg, &obj, &set)).collect());

    let mut runs = Vec::with_capacity(cfgs.len());
    for (cfg, res) in cfgs.into_iter().zip(solved) {
        let (mut res, violation, max_l1) = res?;
        tag(&mut res.trace);
        let path = spec.out.join(csv_name(cfg.algorithm, cfg.seed));
        emit_csv(&res.trace, &path)?;
        runs.push(report(cfg, res, violation, max_l1, path));
    }

    let mut reference = None;
    let mut f_min = None;
    if spec.reference {
        let (r, fm) = reference_run(spec, &runs, &obj, &set)?;
        for run in &mut runs {
            run.sfo_to_threshold = run
                .trace
                .sfo_to_reach(fm, spec.threshold)
                .map_err(|e| CliError::Spec(e.to_string()))?;
        }
        reference = Some(r);
        f_min = Some(fm);
    }

    let summary = spec.out.join(SUMMARY_FILE);
    write_summary(&runs, f_min, &summary)?;
    Ok(ExperimentReport {
        runs,
        f_min,
        reference,
        summary,
    })
}

/// Reruns the run with the lowest final objective for ten times its
/// iterations. `f_min` is the lowest value seen anywhere, so every trace's
/// relative suboptimality stays in `[0, 1]`.
fn reference_run(
    spec: &ExperimentSpec,
    runs: &[RunReport],
    obj: &Objective<'_>,
    set: &ConstraintSet,
) -> Result<(RunReport, f64)> {
    let best = runs
        .iter()
        .min_by(|a, b| a.final_f.total_cmp(&b.final_f))
        .ok_or_else(|| CliError::Spec("no runs to take a reference from".into()))?;
    let mut cfg = best.config.clone();
    cfg.horizon = best.config.horizon * 10;
    cfg.schedule = Schedule::new(cfg.schedule.kind(), cfg.horizon).map_err(|e| CliError::Spec(e.to_string()))?;
    cfg.gap_every = 0;
    let (mut res, violation, max_l1) = execute(&cfg, obj, set)?;
    res.trace.metadata.insert("reference".into(), "true".into());
    let path = spec.out.join(format!("reference_{}", csv_name(cfg.algorithm, cfg.seed)));
    emit_csv(&res.trace, &path)?;
    let f_min = runs
        .iter()
        .filter_map(|r| r.trace.min_f())
        .chain(res.trace.min_f())
        .fold(f64::INFINITY, f64::min);
    Ok((report(cfg, res, violation, max_l1, path), f_min))
}

pub fn write_summary(runs: &[RunReport], f_min: Option<f64>, path: &Path) -> Result<()> {
    let io_err = |source| CliError::Output {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let csv_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(source) => io_err(source),
        other => CliError::Csv(format!("{other:?}")),
    };
    w.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    for r in runs {
        w.write_record([
            r.config.algorithm.to_string(),
            r.config.seed.to_string(),
            r.config.horizon.to_string(),
            format_float(r.final_f),
            r.min_gap.map(format_float).unwrap_or_default(),
            r.sfo_total.to_string(),
            r.lmo_total.to_string(),
            format_float(r.max_violation),
            f_min.map(format_float).unwrap_or_default(),
            r.sfo_to_threshold.map(|s| s.to_string()).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err)
}

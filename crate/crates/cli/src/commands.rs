//! Subcommand implementations. Each returns a report whose `summary` lines
//! the binary prints; all files are written before returning.

use std::path::{Path, PathBuf};

use splinetraj::rrt::{Framework, PlanResult};
use splinetraj::{
    solve_dense_oracle, solve_fixed_time, solve_multidim, FixedTimeProblem, Method,
    MultiDimProblem, OptimizerTrace, Spline,
};

use crate::bench::{
    bench_jevals, bench_scaling, paired_summary, run_planner, trial_metrics, JevalsOptions,
    JevalsRow, PairedSummary, Planner, ScalingOptions, ScalingReport, TrialMetrics,
};
use crate::conditioning::{compare_forms, shifted_instance, ConditioningReport};
use crate::error::{CliError, CliResult};
use crate::formats::{ProblemFile, WorldFile};
use crate::output::{fmt_f64, Table};

pub const DEFAULT_SAMPLES: usize = 101;

/// Rows at `samples` evenly spaced times plus every knot, columns `t` then
/// derivatives `0..k` of each spline in order.
pub fn trajectory_table(
    names: &[String],
    splines: &[Spline<f64>],
    samples: usize,
) -> CliResult<Table> {
    if samples < 2 {
        return Err(CliError::input("--samples must be at least 2"));
    }
    let first = &splines[0];
    let (start, end) = (first.start(), first.end());
    let mut ts: Vec<f64> = (0..samples)
        .map(|j| start + (end - start) * j as f64 / (samples - 1) as f64)
        .chain(first.knots().iter().copied())
        .map(|t| t.clamp(start, end))
        .collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();

    let mut header = vec!["t".to_string()];
    for (name, s) in names.iter().zip(splines) {
        header.extend((0..s.k()).map(|q| format!("{name}_d{q}")));
    }
    let mut table = Table::new(header);
    for t in ts {
        let mut row = vec![fmt_f64(t)];
        for s in splines {
            for q in 0..s.k() {
                row.push(fmt_f64(s.eval(t, q)?));
            }
        }
        table.push(row);
    }
    Ok(table)
}

/// Largest deviation between the fast solver and the dense oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleDeviation {
    /// Infinity norm of the difference of the endpoint derivative vectors.
    pub max_derivative: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedReport {
    pub names: Vec<String>,
    pub costs: Vec<f64>,
    pub oracle: Option<OracleDeviation>,
    pub out: PathBuf,
}

impl FixedReport {
    pub fn total_cost(&self) -> f64 {
        self.costs.iter().sum()
    }

    pub fn summary(&self) -> Vec<String> {
        let mut lines = vec![format!("J = {}", fmt_f64(self.total_cost()))];
        if self.names.len() > 1 {
            for (n, c) in self.names.iter().zip(&self.costs) {
                lines.push(format!("J[{n}] = {}", fmt_f64(*c)));
            }
        }
        if let Some(o) = &self.oracle {
            lines.push(format!(
                "oracle max deviation = {} (cost deviation {})",
                fmt_f64(o.max_derivative),
                fmt_f64(o.cost)
            ));
        }
        lines.push(format!("trajectory written to {}", self.out.display()));
        lines
    }
}

pub struct FixedOptions<'a> {
    pub problem: &'a Path,
    pub out: &'a Path,
    pub oracle: bool,
    pub samples: usize,
}

pub fn cmd_fixed(opts: &FixedOptions) -> CliResult<FixedReport> {
    let file = ProblemFile::load(opts.problem)?;
    let dims = file.dimensions()?;
    let times = file.time_allocation()?;
    let mut names = Vec::new();
    let mut costs = Vec::new();
    let mut splines = Vec::new();
    let mut oracle: Option<OracleDeviation> = None;
    for dim in dims {
        let tag = |e: splinetraj::Error| splinetraj::Error::Dimension {
            name: dim.name.clone(),
            source: Box::new(e),
        };
        let problem = FixedTimeProblem::new(dim.k, times.clone(), dim.pins.clone()).map_err(tag)?;
        let solution = solve_fixed_time(&problem).map_err(tag)?;
        if opts.oracle {
            let dense = solve_dense_oracle(&problem).map_err(tag)?;
            let max_derivative = solution
                .f_star
                .iter()
                .zip(&dense.f_star)
                .map(|(a, b)| (a - b).amax())
                .fold(0.0, f64::max);
            let cost = (solution.cost - dense.cost).abs();
            let o = oracle.get_or_insert(OracleDeviation {
                max_derivative: 0.0,
                cost: 0.0,
            });
            o.max_derivative = o.max_derivative.max(max_derivative);
            o.cost = o.cost.max(cost);
        }
        names.push(dim.name);
        costs.push(solution.cost);
        splines.push(solution.spline);
    }
    trajectory_table(&names, &splines, opts.samples)?.write(opts.out)?;
    Ok(FixedReport {
        names,
        costs,
        oracle,
        out: opts.out.to_path_buf(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableReport {
    pub names: Vec<String>,
    pub costs: Vec<f64>,
    pub deltas: Vec<f64>,
    pub trace: OptimizerTrace<f64>,
    pub out: PathBuf,
    pub trace_out: Option<PathBuf>,
}

impl VariableReport {
    pub fn total_cost(&self) -> f64 {
        self.costs.iter().sum()
    }

    pub fn summary(&self) -> Vec<String> {
        let duration: f64 = self.deltas.iter().map(|d| 2.0 * d).sum();
        let mut lines = vec![
            format!("J = {}", fmt_f64(self.total_cost())),
            format!("total time = {}", fmt_f64(duration)),
            format!(
                "iterations = {}, J evaluations = {}, converged = {}",
                self.trace.entries.len(),
                self.trace.evaluations,
                self.trace.converged
            ),
            format!("trajectory written to {}", self.out.display()),
        ];
        if let Some(p) = &self.trace_out {
            lines.push(format!("trace written to {}", p.display()));
        }
        lines
    }
}

pub fn trace_table(trace: &OptimizerTrace<f64>) -> Table {
    let mut table = Table::new(["iter", "J", "step", "evaluations"]);
    for e in &trace.entries {
        table.push(vec![
            e.iteration.to_string(),
            fmt_f64(e.objective),
            fmt_f64(e.step),
            e.evaluations.to_string(),
        ]);
    }
    table
}

pub struct VariableOptions<'a> {
    pub problem: &'a Path,
    pub out: &'a Path,
    pub method: Method,
    pub trace: Option<&'a Path>,
    pub samples: usize,
    /// Overrides the seed of the problem file.
    pub seed: Option<u64>,
}

pub fn cmd_variable(opts: &VariableOptions) -> CliResult<VariableReport> {
    let file = ProblemFile::load(opts.problem)?;
    let dims = file.dimensions()?;
    let times = file.time_allocation()?;
    let mut config = file.optimizer_config()?;
    if let Some(seed) = opts.seed {
        config.seed = seed;
    }
    let problem = MultiDimProblem::new(dims, times.start(), times.deltas().to_vec())?
        .with_config(config)
        .with_method(opts.method);
    let traj = solve_multidim(&problem)?;
    trajectory_table(&traj.names, &traj.splines, opts.samples)?.write(opts.out)?;
    if let Some(path) = opts.trace {
        trace_table(&traj.trace).write(path)?;
    }
    Ok(VariableReport {
        deltas: traj.deltas().to_vec(),
        names: traj.names,
        costs: traj.costs,
        trace: traj.trace,
        out: opts.out.to_path_buf(),
        trace_out: opts.trace.map(Path::to_path_buf),
    })
}

pub fn edge_table(framework: &Framework) -> Table {
    let mut table = Table::new([
        "parent", "child", "x_parent", "y_parent", "x_child", "y_child",
    ]);
    for (p, c) in framework.edges() {
        let (a, b) = (framework.point(p), framework.point(c));
        table.push(vec![
            p.to_string(),
            c.to_string(),
            fmt_f64(a[0]),
            fmt_f64(a[1]),
            fmt_f64(b[0]),
            fmt_f64(b[1]),
        ]);
    }
    table
}

pub const METRICS_HEADER: [&str; 8] = [
    "trial",
    "method",
    "total_snap",
    "wall_ms",
    "seed",
    "reached_goal",
    "fine_check",
    "vertices",
];

pub fn metrics_table(metrics: &[TrialMetrics]) -> Table {
    let mut table = Table::new(METRICS_HEADER);
    for m in metrics {
        table.push(vec![
            m.trial.to_string(),
            m.planner.name().to_string(),
            m.total_snap.map_or_else(|| "NaN".to_string(), fmt_f64),
            fmt_f64(m.wall_ms),
            m.seed.to_string(),
            m.total_snap.is_some().to_string(),
            m.fine_check.map_or_else(String::new, |b| b.to_string()),
            m.vertices.to_string(),
        ]);
    }
    table
}

#[derive(Debug, Clone)]
pub struct RrtReport {
    pub metrics: Vec<TrialMetrics>,
    pub paired: Option<PairedSummary>,
    pub out_dir: PathBuf,
}

impl RrtReport {
    pub fn summary(&self) -> Vec<String> {
        let mut lines = Vec::new();
        for planner in [Planner::Snap, Planner::Euclidean] {
            let runs: Vec<&TrialMetrics> = self
                .metrics
                .iter()
                .filter(|m| m.planner == planner)
                .collect();
            if runs.is_empty() {
                continue;
            }
            let reached = runs.iter().filter(|m| m.total_snap.is_some()).count();
            lines.push(format!(
                "{}: reached goal in {reached}/{} trials",
                planner.name(),
                runs.len()
            ));
        }
        if let Some(p) = &self.paired {
            lines.push(format!(
                "paired trials = {}: mean total snap {} vs {} (baseline), mean wall ms {} vs {}",
                p.paired,
                fmt_f64(p.mean_snap),
                fmt_f64(p.mean_snap_baseline),
                fmt_f64(p.mean_ms),
                fmt_f64(p.mean_ms_baseline)
            ));
        }
        lines.push(format!("outputs written to {}", self.out_dir.display()));
        lines
    }
}

pub struct RrtOptions<'a> {
    pub world: &'a Path,
    pub out_dir: &'a Path,
    pub baseline: bool,
    pub trials: usize,
    pub samples: usize,
}

fn write_plan(result: &PlanResult, dir: &Path, prefix: &str, samples: usize) -> CliResult<()> {
    edge_table(&result.framework).write(&dir.join(format!("{prefix}edges.csv")))?;
    if let Some(best) = &result.best {
        let traj = &best.snap.trajectory;
        trajectory_table(&traj.names, &traj.splines, samples)?
            .write(&dir.join(format!("{prefix}trajectory.csv")))?;
    }
    Ok(())
}

/// Trial `i` uses seed `config.seed + i`. The edge list and trajectory of
/// trial 0 are written for each planner; metrics cover every trial.
pub fn cmd_rrt(opts: &RrtOptions) -> CliResult<RrtReport> {
    if opts.trials == 0 {
        return Err(CliError::input("--trials must be positive"));
    }
    let world = WorldFile::load(opts.world)?;
    let workspace = world.workspace()?;
    let base = world.planner_config()?;
    let planners: &[Planner] = if opts.baseline {
        &[Planner::Snap, Planner::Euclidean]
    } else {
        &[Planner::Snap]
    };
    let mut metrics = Vec::new();
    for trial in 0..opts.trials {
        let seed = base.seed.wrapping_add(trial as u64);
        let config = splinetraj::rrt::PlannerConfig {
            seed,
            ..base.clone()
        };
        for &planner in planners {
            let (result, ms) = run_planner(planner, &workspace, world.start, &config)?;
            if trial == 0 {
                let prefix = if planner == Planner::Snap {
                    ""
                } else {
                    "baseline_"
                };
                write_plan(&result, opts.out_dir, prefix, opts.samples)?;
            }
            metrics.push(trial_metrics(trial, planner, seed, &result, ms));
        }
    }
    metrics_table(&metrics).write(&opts.out_dir.join("metrics.csv"))?;
    Ok(RrtReport {
        paired: paired_summary(&metrics),
        metrics,
        out_dir: opts.out_dir.to_path_buf(),
    })
}

pub fn scaling_table(report: &ScalingReport) -> Table {
    let mut table = Table::new(["l", "median_ms", "reps"]);
    for r in &report.rows {
        table.push(vec![
            r.l.to_string(),
            fmt_f64(r.median_ms),
            r.reps.to_string(),
        ]);
    }
    table
}

pub fn cmd_bench_scaling(opts: &ScalingOptions, out: &Path) -> CliResult<Vec<String>> {
    let report = bench_scaling(opts)?;
    scaling_table(&report).write(out)?;
    Ok(vec![
        format!("log-log slope = {}", fmt_f64(report.slope)),
        format!("timings written to {}", out.display()),
    ])
}

pub fn jevals_table(rows: &[JevalsRow]) -> Table {
    let mut table = Table::new(["l", "method", "mean_J_evals", "trials", "reached_target"]);
    for r in rows {
        table.push(vec![
            r.l.to_string(),
            r.method.to_string(),
            fmt_f64(r.mean_evaluations),
            r.trials.to_string(),
            r.reached.to_string(),
        ]);
    }
    table
}

pub fn cmd_bench_jevals(opts: &JevalsOptions, out: &Path) -> CliResult<Vec<String>> {
    let rows = bench_jevals(opts)?;
    jevals_table(&rows).write(out)?;
    let mut lines: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "l = {:>3}  {:<8} mean J evaluations = {:.2}",
                r.l, r.method, r.mean_evaluations
            )
        })
        .collect();
    lines.push(format!("counts written to {}", out.display()));
    Ok(lines)
}

pub struct ConditioningOptions {
    pub k: usize,
    pub l: usize,
    pub shift: f64,
    pub seed: u64,
}

pub fn conditioning_table(report: &ConditioningReport) -> Table {
    let mut table = Table::new(["form", "k", "l", "shift", "condition_number", "cost"]);
    let absolute_cost = report
        .absolute_cost
        .map_or_else(|| "NaN".to_string(), fmt_f64);
    for (form, cond, cost) in [
        (
            "normalized",
            report.conditioned_cond,
            fmt_f64(report.conditioned_cost),
        ),
        ("absolute", report.absolute_cond, absolute_cost),
    ] {
        table.push(vec![
            form.to_string(),
            report.k.to_string(),
            report.l.to_string(),
            fmt_f64(report.shift),
            fmt_f64(cond),
            cost,
        ]);
    }
    table
}

pub fn cmd_bench_conditioning(opts: &ConditioningOptions, out: &Path) -> CliResult<Vec<String>> {
    let problem = shifted_instance(opts.k, opts.l, opts.shift, opts.seed)?;
    let report = compare_forms(&problem)?;
    conditioning_table(&report).write(out)?;
    let mut lines = vec![
        format!(
            "condition number (normalized) = {}",
            fmt_f64(report.conditioned_cond)
        ),
        format!(
            "condition number (absolute)   = {}",
            fmt_f64(report.absolute_cond)
        ),
        format!("ratio = {}", fmt_f64(report.ratio())),
    ];
    match report.cost_gap() {
        Some(gap) => lines.push(format!("relative cost gap = {}", fmt_f64(gap))),
        None => lines.push("absolute form could not be solved".to_string()),
    }
    lines.push(format!("report written to {}", out.display()));
    Ok(lines)
}

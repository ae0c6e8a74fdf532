//! Benchmark harness: solver scaling, objective evaluation counts of the
//! time-allocation methods, and planner trials.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use splinetraj::rrt::{plan, plan_euclidean_baseline, PlanResult, PlannerConfig, Point, Workspace};
use splinetraj::{solve_variable_time, FixedTimeSolver, Method, OptimizerConfig};

use crate::error::{CliError, CliResult};
use crate::instances::random_waypoint_problem;

pub const MIN_REPS: usize = 3;

/// Median of a non-empty sample.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingOptions {
    pub k: usize,
    pub lmin: usize,
    pub lmax: usize,
    pub reps: usize,
    pub seed: u64,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        Self {
            k: 5,
            lmin: 1 << 6,
            lmax: 1 << 13,
            reps: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub l: usize,
    /// Median wall time of one solve.
    pub median_ms: f64,
    pub reps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    pub slope: f64,
}

impl ScalingReport {
    /// Median time at `l` divided by the median at `l / 2`.
    pub fn doubling_factor(&self, l: usize) -> Option<f64> {
        let at = |n: usize| self.rows.iter().find(|r| r.l == n).map(|r| r.median_ms);
        Some(at(l)? / at(l / 2)?)
    }
}

/// Times the fixed-time solver on waypoint instances for `l = lmin, 2 lmin,
/// ..` up to `lmax`. Each repetition solves a batch of about 4096 segments so
/// that short solves are not dominated by timer resolution.
pub fn bench_scaling(opts: &ScalingOptions) -> CliResult<ScalingReport> {
    if opts.reps < MIN_REPS {
        return Err(CliError::input(format!(
            "--reps must be at least {MIN_REPS}"
        )));
    }
    if opts.lmin == 0 || opts.lmax < opts.lmin {
        return Err(CliError::input("need 1 <= lmin <= lmax"));
    }
    let solver = FixedTimeSolver::<f64>::new(opts.k)?;
    let mut rows = Vec::new();
    let mut l = opts.lmin;
    while l <= opts.lmax {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(l as u64);
        let problem = random_waypoint_problem(&mut rng, opts.k, l, (0.5, 1.5), 0.0)?;
        let batch = (4096 / l).max(1);
        solver.solve(&problem)?;
        let mut samples = Vec::with_capacity(opts.reps);
        for _ in 0..opts.reps {
            let clock = Instant::now();
            for _ in 0..batch {
                std::hint::black_box(solver.solve(std::hint::black_box(&problem))?);
            }
            samples.push(clock.elapsed().as_secs_f64() * 1e3 / batch as f64);
        }
        rows.push(ScalingRow {
            l,
            median_ms: median(&samples),
            reps: opts.reps,
        });
        l *= 2;
    }
    if rows.len() < 2 {
        return Err(CliError::input("the l grid needs at least two points"));
    }
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.l as f64, r.median_ms)).collect();
    let slope = loglog_slope(&points);
    Ok(ScalingReport { rows, slope })
}

#[derive(Debug, Clone, PartialEq)]
pub struct JevalsOptions {
    pub ls: Vec<usize>,
    pub trials: usize,
    pub k: usize,
    pub seed: u64,
    /// Every method stops once `J <= J_ref * (1 + target_rel)`.
    pub target_rel: f64,
    /// Evaluation budget per run.
    pub max_evaluations: usize,
}

impl Default for JevalsOptions {
    fn default() -> Self {
        Self {
            ls: vec![6, 8, 10],
            trials: 100,
            k: 5,
            seed: 0,
            target_rel: 1e-3,
            max_evaluations: 20_000,
        }
    }
}

pub const METHODS: [(Method, &str); 3] = [
    (Method::Exact, "exact"),
    (Method::FiniteDifference, "findiff"),
    (Method::Random, "random"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct JevalsRow {
    pub l: usize,
    pub method: &'static str,
    pub mean_evaluations: f64,
    pub trials: usize,
    /// Trials that reached the target within the budget.
    pub reached: usize,
}

/// Evaluations spent by each method on one instance, and whether the target
/// was reached.
fn jevals_trial(opts: &JevalsOptions, l: usize, trial: usize) -> CliResult<[(usize, bool); 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(trial as u64));
    rng.set_stream(l as u64);
    let problem = random_waypoint_problem(&mut rng, opts.k, l, (0.3, 1.5), 0.0)?;
    let reference = solve_variable_time(
        &problem,
        &OptimizerConfig {
            tol: Some(1e-12),
            max_iters: 5000,
            ..OptimizerConfig::default()
        },
        Method::Exact,
    )?
    .solution
    .cost;
    let target = reference * (1.0 + opts.target_rel);
    let mut out = [(0, false); 3];
    for (slot, (method, _)) in METHODS.iter().enumerate() {
        let config = OptimizerConfig {
            target_objective: Some(target),
            tol: Some(0.0),
            max_iters: usize::MAX,
            max_evaluations: Some(opts.max_evaluations),
            seed: opts.seed.wrapping_add(trial as u64),
            ..OptimizerConfig::default()
        };
        let res = solve_variable_time(&problem, &config, *method)?;
        out[slot] = (res.trace.evaluations, res.solution.cost <= target);
    }
    Ok(out)
}

/// Mean evaluation counts over seeded trials. Trials run on all available
/// cores; results are aggregated in trial order.
pub fn bench_jevals(opts: &JevalsOptions) -> CliResult<Vec<JevalsRow>> {
    if opts.trials == 0 {
        return Err(CliError::input("--trials must be positive"));
    }
    if opts.ls.is_empty() || opts.ls.contains(&0) {
        return Err(CliError::input("--l values must be positive"));
    }
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut rows = Vec::new();
    for &l in &opts.ls {
        let trials: Vec<usize> = (0..opts.trials).collect();
        let chunk = opts.trials.div_ceil(workers);
        let results: Vec<CliResult<Vec<[(usize, bool); 3]>>> = std::thread::scope(|s| {
            let handles: Vec<_> = trials
                .chunks(chunk)
                .map(|ts| s.spawn(move || ts.iter().map(|&t| jevals_trial(opts, l, t)).collect()))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("benchmark worker panicked"))
                .collect()
        });
        let mut sums = [0usize; 3];
        let mut reached = [0usize; 3];
        for chunk in results {
            for trial in chunk? {
                for (slot, (evals, ok)) in trial.iter().enumerate() {
                    sums[slot] += evals;
                    reached[slot] += usize::from(*ok);
                }
            }
        }
        for (slot, (_, name)) in METHODS.iter().enumerate() {
            rows.push(JevalsRow {
                l,
                method: name,
                mean_evaluations: sums[slot] as f64 / opts.trials as f64,
                trials: opts.trials,
                reached: reached[slot],
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Planner {
    Snap,
    Euclidean,
}

impl Planner {
    pub fn name(self) -> &'static str {
        match self {
            Planner::Snap => "snap_rrt_star",
            Planner::Euclidean => "euclidean_rrt_star",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialMetrics {
    pub trial: usize,
    pub planner: Planner,
    pub seed: u64,
    /// `None` when no goal path was found.
    pub total_snap: Option<f64>,
    pub wall_ms: f64,
    /// Result of the recheck at a tenth of the sampling period.
    pub fine_check: Option<bool>,
    pub vertices: usize,
}

/// Runs one planner and times it.
pub fn run_planner(
    planner: Planner,
    workspace: &Workspace,
    start: Point,
    config: &PlannerConfig,
) -> CliResult<(PlanResult, f64)> {
    let clock = Instant::now();
    let result = match planner {
        Planner::Snap => plan(workspace, start, config)?,
        Planner::Euclidean => plan_euclidean_baseline(workspace, start, config)?,
    };
    Ok((result, clock.elapsed().as_secs_f64() * 1e3))
}

pub fn trial_metrics(
    trial: usize,
    planner: Planner,
    seed: u64,
    result: &PlanResult,
    wall_ms: f64,
) -> TrialMetrics {
    TrialMetrics {
        trial,
        planner,
        seed,
        total_snap: result.best.as_ref().map(|b| b.snap.total_snap),
        wall_ms,
        fine_check: result.best.as_ref().map(|b| b.fine_check_passed),
        vertices: result.framework.len(),
    }
}

/// Means over the trials in which both planners reached the goal.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSummary {
    pub paired: usize,
    pub mean_snap: f64,
    pub mean_snap_baseline: f64,
    pub mean_ms: f64,
    pub mean_ms_baseline: f64,
    /// Every snap-planner goal path passed the fine recheck.
    pub all_fine: bool,
}

pub fn paired_summary(metrics: &[TrialMetrics]) -> Option<PairedSummary> {
    let find =
        |trial: usize, p: Planner| metrics.iter().find(|m| m.trial == trial && m.planner == p);
    let mut pairs = Vec::new();
    for m in metrics.iter().filter(|m| m.planner == Planner::Snap) {
        if let (Some(s), Some(b)) = (m.total_snap, find(m.trial, Planner::Euclidean)) {
            if let Some(bs) = b.total_snap {
                pairs.push((s, bs, m.wall_ms, b.wall_ms));
            }
        }
    }
    if pairs.is_empty() {
        return None;
    }
    let n = pairs.len() as f64;
    let mean = |f: fn(&(f64, f64, f64, f64)) -> f64| pairs.iter().map(f).sum::<f64>() / n;
    Some(PairedSummary {
        paired: pairs.len(),
        mean_snap: mean(|p| p.0),
        mean_snap_baseline: mean(|p| p.1),
        mean_ms: mean(|p| p.2),
        mean_ms_baseline: mean(|p| p.3),
        all_fine: metrics
            .iter()
            .filter(|m| m.planner == Planner::Snap)
            .all(|m| m.fine_check != Some(false)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_even_and_odd_samples() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn slope_of_a_power_law() {
        let pts: Vec<(f64, f64)> = (1..6)
            .map(|i| (2f64.powi(i), 3.0 * 2f64.powi(i).powf(1.5)))
            .collect();
        assert!((loglog_slope(&pts) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn too_few_reps_is_an_input_error() {
        let err = bench_scaling(&ScalingOptions {
            reps: 2,
            ..ScalingOptions::default()
        })
        .unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn paired_summary_skips_unpaired_trials() {
        let m = |trial, planner, snap: Option<f64>, ms| TrialMetrics {
            trial,
            planner,
            seed: trial as u64,
            total_snap: snap,
            wall_ms: ms,
            fine_check: snap.map(|_| true),
            vertices: 1,
        };
        let metrics = vec![
            m(0, Planner::Snap, Some(1.0), 10.0),
            m(0, Planner::Euclidean, Some(3.0), 1.0),
            m(1, Planner::Snap, None, 10.0),
            m(1, Planner::Euclidean, Some(5.0), 1.0),
            m(2, Planner::Snap, Some(2.0), 20.0),
            m(2, Planner::Euclidean, Some(4.0), 2.0),
        ];
        let s = paired_summary(&metrics).unwrap();
        assert_eq!(s.paired, 2);
        assert_eq!(s.mean_snap, 1.5);
        assert_eq!(s.mean_snap_baseline, 3.5);
        assert_eq!(s.mean_ms, 15.0);
        assert!(s.all_fine);
    }
}

//! Time allocation: minimizing the fixed-time optimal cost over the segment
//! half-durations `d = (delta_1, .., delta_l)`.
//!
//! Three update rules share one driver:
//!
//! * [`Method::Exact`] projected steepest descent with the closed-form
//!   gradient (one fixed-time solve per accepted trial point),
//! * [`Method::FiniteDifference`] the same line search on a forward-difference
//!   gradient (`l + 1` solves per gradient),
//! * [`Method::Random`] a Gaussian directional-difference step with decaying
//!   step sizes and no line search.
//!
//! Minimizing the cost alone is unbounded whenever durations can grow without
//! limit, so the feasible set is either a fixed total time (a shifted simplex)
//! or the cost is augmented with `kappa` per second of total duration.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fixed_time::{
    cost_exponent, FixedTimeProblem, FixedTimeSolution, FixedTimeSolver, SegmentBasis,
};
use crate::scalar::{lit, to_f64, Scalar};
use crate::spline::{expand_pins, PinExpansion, PinSet, TimeAllocation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// `sum(2 delta_i)` is held at `total_time`.
    FixedTotalTime,
    /// Minimize `J + kappa * sum(2 delta_i)`.
    TimePenalty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    FiniteDifference,
    Random,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Method::Exact),
            "findiff" | "finite-difference" => Ok(Method::FiniteDifference),
            "random" => Ok(Method::Random),
            other => Err(Error::invalid(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig<T> {
    pub mode: Mode,
    /// Total duration in fixed-total mode; `None` keeps the initial total.
    pub total_time: Option<T>,
    /// Cost per second of total duration in penalty mode.
    pub kappa: T,
    /// Lower bound on every half-duration.
    pub d_min: T,
    pub armijo_c: T,
    pub shrink: T,
    /// First trial step, as a fraction of the mean half-duration moved along
    /// the largest gradient component. Later steps use the short
    /// Barzilai-Borwein step `s.y / y.y`.
    pub alpha_init: T,
    pub max_iters: usize,
    /// Stop once the projected step is below this (infinity norm). `None`
    /// means `1e-8 * (1 + sum(d))`; zero disables the test.
    pub tol: Option<T>,
    /// Forward-difference step relative to `max(delta_j, 1)`.
    pub fd_rel_step: T,
    /// Directional-difference step of the random method.
    pub random_zeta: T,
    /// Initial random step `eps_0`; `None` derives it from the first iterate
    /// so that the first update moves the iterate by about twenty mean
    /// half-durations (most such moves are rejected until the step decays).
    pub random_step0: Option<T>,
    pub seed: u64,
    /// Stop as soon as the objective reaches this value.
    pub target_objective: Option<T>,
    /// Stop once this many objective evaluations have been spent.
    pub max_evaluations: Option<usize>,
}

impl<T: Scalar> Default for OptimizerConfig<T> {
    fn default() -> Self {
        Self {
            mode: Mode::FixedTotalTime,
            total_time: None,
            kappa: T::zero(),
            d_min: lit(1e-6),
            armijo_c: lit(1e-4),
            shrink: lit(0.5),
            alpha_init: lit(0.1),
            max_iters: 500,
            tol: None,
            fd_rel_step: lit(1e-6),
            random_zeta: lit(1e-6),
            random_step0: None,
            seed: 0,
            target_objective: None,
            max_evaluations: None,
        }
    }
}

impl<T: Scalar> OptimizerConfig<T> {
    pub fn fixed_total(total_time: T) -> Self {
        Self {
            mode: Mode::FixedTotalTime,
            total_time: Some(total_time),
            ..Self::default()
        }
    }

    pub fn time_penalty(kappa: T) -> Self {
        Self {
            mode: Mode::TimePenalty,
            kappa,
            ..Self::default()
        }
    }

    fn validate(&self, l: usize) -> Result<()> {
        let positive = |x: T| x > T::zero() && x.is_finite();
        if !positive(self.d_min) {
            return Err(Error::invalid("d_min must be positive"));
        }
        if !(self.armijo_c > T::zero() && self.armijo_c < T::one()) {
            return Err(Error::invalid("armijo_c must lie in (0, 1)"));
        }
        if !(self.shrink > T::zero() && self.shrink < T::one()) {
            return Err(Error::invalid("shrink must lie in (0, 1)"));
        }
        if !positive(self.alpha_init) {
            return Err(Error::invalid("alpha_init must be positive"));
        }
        if self.kappa < T::zero() {
            return Err(Error::invalid("kappa must be non-negative"));
        }
        if self.mode == Mode::FixedTotalTime {
            if let Some(total) = self.total_time {
                if !(total > lit::<T>(2.0 * l as f64) * self.d_min) {
                    return Err(Error::invalid(format!(
                        "total time {total} must exceed 2 * l * d_min"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Knot times `tau_i = tau_0 + 2 sum_{j<=i} delta_j`.
pub fn durations_to_times<T: Scalar>(d: &[T], tau0: T) -> Result<TimeAllocation<T>> {
    TimeAllocation::from_durations(tau0, d.to_vec())
}

pub fn times_to_durations<T: Scalar>(times: &[T]) -> Result<Vec<T>> {
    Ok(TimeAllocation::from_times(times)?.deltas().to_vec())
}

/// Euclidean projection onto `{x >= floor, sum(x) = total}` by the sorted
/// threshold rule.
fn project_shifted_simplex<T: Scalar>(d: &[T], floor: T, total: T) -> Result<Vec<T>> {
    let l = d.len();
    let budget = total - lit::<T>(l as f64) * floor;
    if budget < T::zero() {
        return Err(Error::invalid(format!(
            "fixed total half-duration {total} is below l * d_min"
        )));
    }
    let y: Vec<T> = d.iter().map(|&x| x - floor).collect();
    let mut u = y.clone();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cumsum = T::zero();
    let mut theta = T::zero();
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - budget) / lit::<T>((j + 1) as f64);
        if uj - t > T::zero() {
            theta = t;
        }
    }
    Ok(y.iter()
        .map(|&yi| (yi - theta).max(T::zero()) + floor)
        .collect())
}

/// Projects half-durations onto the feasible set of `config`.
pub fn project_feasible<T: Scalar>(d: &[T], config: &OptimizerConfig<T>) -> Result<Vec<T>> {
    match config.mode {
        Mode::TimePenalty => Ok(d.iter().map(|&x| x.max(config.d_min)).collect()),
        Mode::FixedTotalTime => {
            let total = config
                .total_time
                .ok_or_else(|| Error::invalid("fixed-total mode needs total_time"))?;
            project_shifted_simplex(d, config.d_min, total * lit::<T>(0.5))
        }
    }
}

/// Closed-form gradient of the fixed-time optimal cost with respect to the
/// half-durations, evaluated at the optimal derivative stacks `f_star`.
///
/// The feasible set in derivative-stack space does not depend on `d`, so the
/// derivative of the optimal value is the partial derivative of the segment
/// cost at the optimizer:
///
/// ```text
/// dJ/d(delta_i) = f_i^T ((e / delta_i) M_i + F_i M_i + M_i F_i) f_i
/// ```
///
/// with `e = 3 - 2k` and `F_i = delta_i^-1 diag{0, 1, .., k-1, 0, 1, .., k-1}`.
pub fn grad_j<T: Scalar>(
    basis: &SegmentBasis<T>,
    d: &[T],
    f_star: &[DVector<T>],
) -> Result<Vec<T>> {
    if d.len() != f_star.len() {
        return Err(Error::invalid(
            "half-durations and derivative stacks differ in length",
        ));
    }
    let k = basis.k();
    let e = lit::<T>(cost_exponent(k) as f64);
    let two = lit::<T>(2.0);
    d.iter()
        .zip(f_star)
        .map(|(&delta, f)| {
            let m = basis.cost_matrix(delta)?;
            let mf = &m * f;
            let quad = f.dot(&mf);
            // f^T F M f with F diagonal
            let weighted: T = (0..2 * k)
                .map(|r| f[r] * lit::<T>((r % k) as f64) * mf[r])
                .fold(T::zero(), |a, b| a + b);
            Ok((e * quad + two * weighted) / delta)
        })
        .collect()
}

/// Result of one objective evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation<T> {
    pub cost: T,
    pub gradient: Option<Vec<T>>,
}

/// Optimal fixed-time cost as a function of the half-durations.
pub trait TimeObjective<T: Scalar> {
    fn num_segments(&self) -> usize;

    fn evaluate(&self, d: &[T], with_gradient: bool) -> Result<Evaluation<T>>;
}

/// Single spline: pins and start time fixed, half-durations free.
#[derive(Debug, Clone)]
pub struct SplineObjective<T: Scalar> {
    solver: FixedTimeSolver<T>,
    expansion: PinExpansion<T>,
    start: T,
}

impl<T: Scalar> SplineObjective<T> {
    pub fn new(k: usize, l: usize, start: T, pins: &PinSet<T>) -> Result<Self> {
        Ok(Self {
            solver: FixedTimeSolver::new(k)?,
            expansion: expand_pins(pins, l, k)?,
            start,
        })
    }

    pub fn from_problem(problem: &FixedTimeProblem<T>) -> Result<Self> {
        Self::new(
            problem.k,
            problem.num_segments(),
            problem.times.start(),
            &problem.pins,
        )
    }

    pub fn solver(&self) -> &FixedTimeSolver<T> {
        &self.solver
    }

    pub fn solve_at(&self, d: &[T]) -> Result<FixedTimeSolution<T>> {
        let times = durations_to_times(d, self.start)?;
        self.solver.solve_expanded(&times, &self.expansion)
    }

    pub fn start(&self) -> T {
        self.start
    }
}

impl<T: Scalar> TimeObjective<T> for SplineObjective<T> {
    fn num_segments(&self) -> usize {
        self.expansion.num_segments()
    }

    fn evaluate(&self, d: &[T], with_gradient: bool) -> Result<Evaluation<T>> {
        let sol = self.solve_at(d)?;
        let gradient = if with_gradient {
            Some(grad_j(self.solver.basis(), d, &sol.f_star)?)
        } else {
            None
        };
        Ok(Evaluation {
            cost: sol.cost,
            gradient,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry<T> {
    pub iteration: usize,
    pub d: Vec<T>,
    /// Objective minimized (cost plus the time penalty, if any).
    pub objective: T,
    /// Step size used for the accepted update, zero when none was taken.
    pub step: T,
    /// Cumulative objective evaluations, including the initial one.
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerTrace<T> {
    pub entries: Vec<TraceEntry<T>>,
    pub converged: bool,
    pub stagnated: bool,
    pub evaluations: usize,
}

impl<T> Default for OptimizerTrace<T> {
    fn default() -> Self {
        Self {
            entries: Vec::new(),
            converged: false,
            stagnated: false,
            evaluations: 0,
        }
    }
}

/// Outcome of a single update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport<T> {
    /// Infinity norm of the change in `d`.
    pub step_norm: T,
    pub alpha: T,
    pub converged: bool,
    pub stagnated: bool,
}

const MAX_HALVINGS: usize = 60;

/// Default `eps_0` of the random method in units of `mean(d)^2 / (|J| l)`.
const RANDOM_STEP_SCALE: f64 = 20.0;

/// State of a descent run over half-durations.
pub struct Descent<'a, T: Scalar, O: TimeObjective<T>> {
    objective: &'a O,
    config: OptimizerConfig<T>,
    d: Vec<T>,
    value: T,
    gradient: Option<Vec<T>>,
    previous: Option<(Vec<T>, Vec<T>)>,
    evaluations: usize,
    iteration: usize,
    tol: T,
    random_step0: Option<T>,
    rng: ChaCha8Rng,
    trace: OptimizerTrace<T>,
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

fn inf_norm<T: Scalar>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
}

impl<'a, T: Scalar, O: TimeObjective<T>> Descent<'a, T, O> {
    /// Projects `d0` onto the feasible set and evaluates the objective there.
    pub fn new(
        objective: &'a O,
        config: &OptimizerConfig<T>,
        method: Method,
        d0: &[T],
    ) -> Result<Self> {
        let l = objective.num_segments();
        if d0.len() != l {
            return Err(Error::invalid(format!(
                "{} initial half-durations for {l} segments",
                d0.len()
            )));
        }
        if d0.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("initial half-durations must be finite"));
        }
        let mut config = config.clone();
        if config.mode == Mode::FixedTotalTime && config.total_time.is_none() {
            config.total_time = Some(d0.iter().fold(T::zero(), |a, &b| a + b) * lit::<T>(2.0));
        }
        config.validate(l)?;
        let d = project_feasible(d0, &config)?;
        let sum = d.iter().fold(T::zero(), |a, &b| a + b);
        let tol = config.tol.unwrap_or(lit::<T>(1e-8) * (T::one() + sum));
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        let random_step0 = config.random_step0;
        let mut state = Self {
            objective,
            config,
            d,
            value: T::zero(),
            gradient: None,
            previous: None,
            evaluations: 0,
            iteration: 0,
            tol,
            random_step0,
            rng,
            trace: OptimizerTrace::default(),
        };
        let eval = state.evaluate(&state.d.clone(), method == Method::Exact)?;
        state.value = eval.cost;
        state.gradient = eval.gradient;
        Ok(state)
    }

    pub fn d(&self) -> &[T] {
        &self.d
    }

    pub fn objective_value(&self) -> T {
        self.value
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    pub fn config(&self) -> &OptimizerConfig<T> {
        &self.config
    }

    pub fn trace(&self) -> &OptimizerTrace<T> {
        &self.trace
    }

    pub fn into_trace(self) -> OptimizerTrace<T> {
        self.trace
    }

    fn penalty(&self, d: &[T]) -> T {
        match self.config.mode {
            Mode::TimePenalty => {
                self.config.kappa * lit::<T>(2.0) * d.iter().fold(T::zero(), |a, &b| a + b)
            }
            Mode::FixedTotalTime => T::zero(),
        }
    }

    /// Augmented objective (and gradient); counts one evaluation.
    fn evaluate(&mut self, d: &[T], with_gradient: bool) -> Result<Evaluation<T>> {
        self.evaluations += 1;
        let mut eval = self.objective.evaluate(d, with_gradient)?;
        eval.cost += self.penalty(d);
        if let (Some(g), Mode::TimePenalty) = (eval.gradient.as_mut(), self.config.mode) {
            let slope = self.config.kappa * lit::<T>(2.0);
            g.iter_mut().for_each(|x| *x += slope);
        }
        Ok(eval)
    }

    fn evaluate_value(&mut self, d: &[T]) -> Option<T> {
        match self.evaluate(d, false) {
            Ok(e) if e.cost.is_finite() => Some(e.cost),
            _ => None,
        }
    }

    fn record(&mut self, step: T) {
        self.iteration += 1;
        self.trace.evaluations = self.evaluations;
        self.trace.entries.push(TraceEntry {
            iteration: self.iteration,
            d: self.d.clone(),
            objective: self.value,
            step,
            evaluations: self.evaluations,
        });
    }

    fn initial_alpha(&self, gradient: &[T]) -> T {
        let gmax = inf_norm(gradient);
        if gmax == T::zero() {
            return T::one();
        }
        let mean = self.d.iter().fold(T::zero(), |a, &b| a + b) / lit::<T>(self.d.len() as f64);
        self.config.alpha_init * mean / gmax
    }

    fn trial_alpha(&self, gradient: &[T]) -> T {
        if let Some((s, g_prev)) = &self.previous {
            let y: Vec<T> = gradient.iter().zip(g_prev).map(|(&a, &b)| a - b).collect();
            let sy = dot(s, &y);
            if sy > T::zero() {
                // the short step needs far fewer backtracks on stiff instances
                return (sy / dot(&y, &y)).max(lit(1e-12)).min(lit(1e6));
            }
        }
        self.initial_alpha(gradient)
    }

    /// Armijo backtracking along the projected gradient path. The new point
    /// is evaluated with a gradient when `exact` so the next iteration needs
    /// no further solve.
    fn line_search(&mut self, gradient: Vec<T>, exact: bool) -> Result<StepReport<T>> {
        let mut alpha = self.trial_alpha(&gradient);
        for attempt in 0..MAX_HALVINGS {
            let raw: Vec<T> = self
                .d
                .iter()
                .zip(&gradient)
                .map(|(&x, &g)| x - alpha * g)
                .collect();
            let trial = project_feasible(&raw, &self.config)?;
            let step: Vec<T> = trial.iter().zip(&self.d).map(|(&a, &b)| a - b).collect();
            let step_norm = inf_norm(&step);
            if step_norm == T::zero() || (step_norm < self.tol) {
                // the first trial is the projected-gradient termination test;
                // later ones mean the search collapsed onto the iterate
                let converged = attempt == 0 || step_norm == T::zero();
                self.trace.converged |= converged;
                self.trace.stagnated |= !converged;
                self.record(T::zero());
                return Ok(StepReport {
                    step_norm: T::zero(),
                    alpha,
                    converged,
                    stagnated: !converged,
                });
            }
            let decrease = -dot(&gradient, &step);
            let eval = match self.evaluate(&trial, exact) {
                Ok(e) if e.cost.is_finite() => Some(e),
                _ => None,
            };
            if let Some(eval) = eval {
                if eval.cost <= self.value - self.config.armijo_c * decrease {
                    self.previous = Some((step, gradient));
                    self.d = trial;
                    self.value = eval.cost;
                    self.gradient = eval.gradient;
                    self.record(alpha);
                    return Ok(StepReport {
                        step_norm,
                        alpha,
                        converged: false,
                        stagnated: false,
                    });
                }
            }
            alpha *= self.config.shrink;
        }
        self.trace.stagnated = true;
        self.record(T::zero());
        Ok(StepReport {
            step_norm: T::zero(),
            alpha,
            converged: false,
            stagnated: true,
        })
    }

    /// One projected steepest-descent step with the closed-form gradient.
    pub fn step_exact(&mut self) -> Result<StepReport<T>> {
        let gradient = match self.gradient.take() {
            Some(g) => g,
            None => {
                let d = self.d.clone();
                let eval = self.evaluate(&d, true)?;
                self.value = eval.cost;
                eval.gradient.expect("gradient requested")
            }
        };
        self.line_search(gradient, true)
    }

    /// Forward-difference gradient estimate with `l` extra evaluations.
    pub fn finite_difference_gradient(&mut self) -> Result<Vec<T>> {
        let l = self.d.len();
        let mut g = Vec::with_capacity(l);
        for j in 0..l {
            let gamma = self.config.fd_rel_step * self.d[j].max(T::one());
            let mut probe = self.d.clone();
            probe[j] += gamma;
            let value = self.evaluate(&probe, false)?.cost;
            g.push((value - self.value) / gamma);
        }
        Ok(g)
    }

    /// One projected step on a forward-difference gradient.
    pub fn step_finite_difference(&mut self) -> Result<StepReport<T>> {
        let gradient = self.finite_difference_gradient()?;
        self.gradient = None;
        self.line_search(gradient, false)
    }

    /// One random directional-difference step along a Gaussian direction.
    pub fn step_random(&mut self) -> Result<StepReport<T>> {
        let r: Vec<T> = (0..self.d.len())
            .map(|_| {
                let x: f64 = StandardNormal.sample(&mut self.rng);
                lit::<T>(x)
            })
            .collect();
        self.step_random_along(&r)
    }

    /// Random-search update along a given direction `r`: two evaluations,
    /// at `d + zeta r` and at the candidate iterate, which is kept only if it
    /// does not increase the objective.
    pub fn step_random_along(&mut self, r: &[T]) -> Result<StepReport<T>> {
        if r.len() != self.d.len() {
            return Err(Error::invalid("direction length differs from l"));
        }
        let rmax = inf_norm(r);
        if rmax == T::zero() {
            self.record(T::zero());
            return Ok(StepReport {
                step_norm: T::zero(),
                alpha: T::zero(),
                converged: false,
                stagnated: false,
            });
        }
        let eps0 = match self.random_step0 {
            Some(e) => e,
            None => {
                let l = lit::<T>(self.d.len() as f64);
                let mean = self.d.iter().fold(T::zero(), |a, &b| a + b) / l;
                let e = lit::<T>(RANDOM_STEP_SCALE) * mean * mean
                    / (self.value.abs().max(T::default_epsilon()) * l);
                self.random_step0 = Some(e);
                e
            }
        };
        let eps = eps0 / lit::<T>((self.iteration + 1) as f64).sqrt();
        // keep the probe inside the positive orthant
        let dmin = self
            .d
            .iter()
            .fold(T::max_value().unwrap_or(T::one()), |a, &b| a.min(b));
        let zeta = self.config.random_zeta.min(lit::<T>(0.5) * dmin / rmax);
        let probe: Vec<T> = self
            .d
            .iter()
            .zip(r)
            .map(|(&x, &ri)| x + zeta * ri)
            .collect();
        let probed = self
            .evaluate_value(&probe)
            .ok_or_else(|| Error::NumericalFailure("objective failed at random probe".into()))?;
        let slope = (probed - self.value) / zeta;
        let raw: Vec<T> = self
            .d
            .iter()
            .zip(r)
            .map(|(&x, &ri)| x - eps * slope * ri)
            .collect();
        let next = project_feasible(&raw, &self.config)?;
        let step_norm = inf_norm(
            &next
                .iter()
                .zip(&self.d)
                .map(|(&a, &b)| a - b)
                .collect::<Vec<_>>(),
        );
        // an update that raises the objective (or fails to solve) is
        // discarded, which costs nothing since the value is needed anyway
        if let Some(v) = self.evaluate_value(&next) {
            if v <= self.value {
                self.d = next;
                self.value = v;
            }
        }
        self.record(eps);
        let converged = self.tol > T::zero() && step_norm < self.tol;
        self.trace.converged |= converged;
        Ok(StepReport {
            step_norm,
            alpha: eps,
            converged,
            stagnated: false,
        })
    }

    pub fn step(&mut self, method: Method) -> Result<StepReport<T>> {
        match method {
            Method::Exact => self.step_exact(),
            Method::FiniteDifference => self.step_finite_difference(),
            Method::Random => self.step_random(),
        }
    }

    fn budget_exhausted(&self) -> bool {
        self.config
            .max_evaluations
            .is_some_and(|cap| self.evaluations >= cap)
    }

    fn target_reached(&self) -> bool {
        self.config
            .target_objective
            .is_some_and(|t| self.value <= t)
    }

    /// Iterates `method` until convergence, stagnation, target or budget.
    pub fn run(&mut self, method: Method) -> Result<()> {
        if self.target_reached() {
            self.trace.converged = true;
            return Ok(());
        }
        while self.iteration < self.config.max_iters {
            let report = self.step(method)?;
            if self.target_reached() {
                self.trace.converged = true;
                break;
            }
            if report.converged || report.stagnated || self.budget_exhausted() {
                break;
            }
        }
        self.trace.evaluations = self.evaluations;
        Ok(())
    }
}

/// Optimized half-durations of a generic objective.
#[derive(Debug, Clone, PartialEq)]
pub struct DurationOptimum<T> {
    pub d: Vec<T>,
    /// Objective value at `d` (including any time penalty).
    pub objective: T,
    pub trace: OptimizerTrace<T>,
}

/// Runs the chosen method from `d0` on any [`TimeObjective`].
pub fn optimize_durations<T: Scalar, O: TimeObjective<T>>(
    objective: &O,
    config: &OptimizerConfig<T>,
    method: Method,
    d0: &[T],
) -> Result<DurationOptimum<T>> {
    let mut descent = Descent::new(objective, config, method, d0)?;
    descent.run(method)?;
    Ok(DurationOptimum {
        d: descent.d.clone(),
        objective: descent.value,
        trace: descent.into_trace(),
    })
}

#[derive(Debug, Clone)]
pub struct VariableTimeResult<T: Scalar> {
    pub solution: FixedTimeSolution<T>,
    pub d_star: Vec<T>,
    pub trace: OptimizerTrace<T>,
}

/// Optimizes the knot schedule of `problem`, starting from its current times,
/// and solves the fixed-time problem at the optimum.
pub fn solve_variable_time<T: Scalar>(
    problem: &FixedTimeProblem<T>,
    config: &OptimizerConfig<T>,
    method: Method,
) -> Result<VariableTimeResult<T>> {
    let objective = SplineObjective::from_problem(problem)?;
    let opt = optimize_durations(&objective, config, method, problem.times.deltas())?;
    let solution = objective.solve_at(&opt.d)?;
    Ok(VariableTimeResult {
        solution,
        d_star: opt.d,
        trace: opt.trace,
    })
}

/// Relative error helper used by diagnostics.
pub fn relative_gap<T: Scalar>(a: T, b: T) -> f64 {
    let (a, b) = (to_f64(a), to_f64(b));
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

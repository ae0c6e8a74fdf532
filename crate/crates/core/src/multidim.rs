//! Several splines sharing one knot schedule.
//!
//! At fixed knot times the dimensions are independent problems, so the total
//! cost and its gradient with respect to the half-durations are plain sums of
//! the per-dimension quantities. The time allocation is then optimized with
//! the same descent loop as a single spline.

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Scalar};
use crate::spline::{PinSet, Spline};
use crate::variable_time::{
    optimize_durations, Evaluation, Method, OptimizerConfig, OptimizerTrace, SplineObjective,
    TimeObjective,
};

/// One flat output: its name, cost order and pins.
#[derive(Debug, Clone, PartialEq)]
pub struct Dimension<T> {
    pub name: String,
    pub k: usize,
    pub pins: PinSet<T>,
}

impl<T: Scalar> Dimension<T> {
    pub fn new(name: impl Into<String>, k: usize, pins: PinSet<T>) -> Self {
        Self {
            name: name.into(),
            k,
            pins,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiDimProblem<T: Scalar> {
    pub dims: Vec<Dimension<T>>,
    pub start: T,
    /// Initial half-durations; their number fixes `l` for every dimension.
    pub initial_d: Vec<T>,
    pub config: OptimizerConfig<T>,
    pub method: Method,
}

impl<T: Scalar> MultiDimProblem<T> {
    pub fn new(dims: Vec<Dimension<T>>, start: T, initial_d: Vec<T>) -> Result<Self> {
        let problem = Self {
            dims,
            start,
            initial_d,
            config: OptimizerConfig::default(),
            method: Method::Exact,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn with_config(mut self, config: OptimizerConfig<T>) -> Self {
        self.config = config;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn num_segments(&self) -> usize {
        self.initial_d.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(Error::invalid("at least one dimension is required"));
        }
        if self.initial_d.is_empty() {
            return Err(Error::invalid("at least one segment is required"));
        }
        for (i, a) in self.dims.iter().enumerate() {
            if self.dims[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::invalid(format!(
                    "duplicate dimension name `{}`",
                    a.name
                )));
            }
        }
        for dim in &self.dims {
            dim.pins
                .validate(self.num_segments(), dim.k)
                .map_err(|e| tag(&dim.name, e))?;
        }
        Ok(())
    }

    fn objective(&self) -> Result<MultiObjective<T>> {
        self.validate()?;
        let parts = self
            .dims
            .iter()
            .map(|dim| {
                SplineObjective::new(dim.k, self.num_segments(), self.start, &dim.pins)
                    .map(|o| (dim.name.clone(), o))
                    .map_err(|e| tag(&dim.name, e))
            })
            .collect::<Result<_>>()?;
        Ok(MultiObjective { parts })
    }
}

fn tag(name: &str, source: Error) -> Error {
    Error::Dimension {
        name: name.to_string(),
        source: Box::new(source),
    }
}

/// Sum of the per-dimension optimal costs.
#[derive(Debug, Clone)]
struct MultiObjective<T: Scalar> {
    parts: Vec<(String, SplineObjective<T>)>,
}

impl<T: Scalar> TimeObjective<T> for MultiObjective<T> {
    fn num_segments(&self) -> usize {
        self.parts[0].1.num_segments()
    }

    fn evaluate(&self, d: &[T], with_gradient: bool) -> Result<Evaluation<T>> {
        let mut cost = T::zero();
        let mut gradient = with_gradient.then(|| vec![T::zero(); d.len()]);
        for (name, part) in &self.parts {
            let e = part.evaluate(d, with_gradient).map_err(|e| tag(name, e))?;
            cost += e.cost;
            if let (Some(total), Some(g)) = (gradient.as_mut(), e.gradient) {
                total.iter_mut().zip(g).for_each(|(t, x)| *t += x);
            }
        }
        Ok(Evaluation { cost, gradient })
    }
}

/// Total cost over all dimensions at half-durations `d`, with its gradient.
pub fn multidim_cost_and_grad<T: Scalar>(
    problem: &MultiDimProblem<T>,
    d: &[T],
) -> Result<(T, Vec<T>)> {
    if d.len() != problem.num_segments() {
        return Err(Error::invalid(format!(
            "{} half-durations for {} segments",
            d.len(),
            problem.num_segments()
        )));
    }
    let e = problem.objective()?.evaluate(d, true)?;
    Ok((e.cost, e.gradient.expect("gradient requested")))
}

/// Splines of every dimension over the optimized shared knot schedule.
#[derive(Debug, Clone)]
pub struct FlatTrajectory<T: Scalar> {
    pub names: Vec<String>,
    pub splines: Vec<Spline<T>>,
    /// Optimal cost of each dimension.
    pub costs: Vec<T>,
    pub trace: OptimizerTrace<T>,
}

impl<T: Scalar> FlatTrajectory<T> {
    pub fn knots(&self) -> &[T] {
        self.splines[0].knots()
    }

    pub fn deltas(&self) -> &[T] {
        self.splines[0].times().deltas()
    }

    pub fn total_cost(&self) -> T {
        self.costs.iter().fold(T::zero(), |a, &b| a + b)
    }

    pub fn spline(&self, name: &str) -> Option<&Spline<T>> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.splines[i])
    }

    pub fn start(&self) -> T {
        self.splines[0].start()
    }

    pub fn end(&self) -> T {
        self.splines[0].end()
    }
}

/// Optimizes the shared half-durations and solves every dimension there.
pub fn solve_multidim<T: Scalar>(problem: &MultiDimProblem<T>) -> Result<FlatTrajectory<T>> {
    let objective = problem.objective()?;
    let opt = optimize_durations(
        &objective,
        &problem.config,
        problem.method,
        &problem.initial_d,
    )?;
    let mut splines = Vec::with_capacity(objective.parts.len());
    let mut costs = Vec::with_capacity(objective.parts.len());
    for (name, part) in &objective.parts {
        let sol = part.solve_at(&opt.d).map_err(|e| tag(name, e))?;
        costs.push(sol.cost);
        splines.push(sol.spline);
    }
    Ok(FlatTrajectory {
        names: objective.parts.iter().map(|(n, _)| n.clone()).collect(),
        splines,
        costs,
        trace: opt.trace,
    })
}

/// Uniformly sampled derivatives of a flat trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatSamples<T> {
    /// `t` followed by `<name>_d<q>` for every dimension and order.
    pub header: Vec<String>,
    pub rows: Vec<Vec<T>>,
}

/// Samples every dimension at `tau_0 + j / rate` for
/// `j = 0..=floor((tau_l - tau_0) * rate)`, derivative orders `0..=max_deriv`.
pub fn sample_flat_outputs<T: Scalar>(
    traj: &FlatTrajectory<T>,
    rate: T,
    max_deriv: usize,
) -> Result<FlatSamples<T>> {
    if !(rate > T::zero() && rate.is_finite()) {
        return Err(Error::invalid("sample rate must be positive"));
    }
    let start = traj.start();
    let end = traj.end();
    let span = to_f64(end - start) * to_f64(rate);
    // absorb rounding of products such as 0.3 * 10
    let count = (span * (1.0 + 1e-12)).floor() as usize + 1;

    let mut header = vec!["t".to_string()];
    for name in &traj.names {
        header.extend((0..=max_deriv).map(|q| format!("{name}_d{q}")));
    }
    let mut rows = Vec::with_capacity(count);
    for j in 0..count {
        let tau = (start + lit::<T>(j as f64) / rate).min(end);
        let mut row = Vec::with_capacity(header.len());
        row.push(tau);
        for spline in &traj.splines {
            for q in 0..=max_deriv {
                row.push(spline.eval(tau, q)?);
            }
        }
        rows.push(row);
    }
    Ok(FlatSamples { header, rows })
}

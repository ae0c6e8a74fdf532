//! Diagnosis of the absolute-time monomial formulation.
//!
//! In the absolute form every segment is a polynomial `sum_a c_a t^a` in the
//! absolute time `t`, pins and continuity become constraint rows, and the
//! cost Gram matrix integrates powers of `t` between the knots. The library
//! never solves this form; it exists here to compare its KKT condition
//! number and its optimum against the per-segment normalized solver.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splinetraj::{FixedTimeProblem, FixedTimeSolver, PinSet, Spline, TimeAllocation};

use crate::error::{CliError, CliResult};
use crate::instances::random_waypoint_problem;

/// `a! / (a - q)!`.
fn falling(a: usize, q: usize) -> f64 {
    (a - q + 1..=a).map(|x| x as f64).product()
}

/// Row of the `q`th derivative of `1, t, .., t^(n-1)` at `t`.
fn derivative_row(t: f64, q: usize, n: usize) -> Vec<f64> {
    (0..n)
        .map(|a| {
            if a < q {
                0.0
            } else {
                falling(a, q) * t.powi((a - q) as i32)
            }
        })
        .collect()
}

/// Gram matrix of the `m`th derivatives of the monomials over `[t0, t1]`.
fn absolute_gram(t0: f64, t1: f64, m: usize, n: usize) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(n, n);
    for a in m..n {
        for b in m..n {
            let p = (a + b - 2 * m) as i32 + 1;
            h[(a, b)] = falling(a, m) * falling(b, m) * (t1.powi(p) - t0.powi(p)) / p as f64;
        }
    }
    h
}

/// KKT system of the absolute-time monomial form.
#[derive(Debug, Clone)]
pub struct AbsoluteKkt {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub grams: Vec<DMatrix<f64>>,
    /// Coefficients per segment (`2k`).
    pub width: usize,
}

/// Assembles `[H A^T; A 0]` with pins applied on the segment starting at
/// their knot (the last segment for the final knot) and continuity of the
/// derivatives `0..k` at every interior knot.
pub fn absolute_kkt(problem: &FixedTimeProblem<f64>) -> CliResult<AbsoluteKkt> {
    let k = problem.k;
    let l = problem.num_segments();
    let n = 2 * k;
    let times = problem.times.times();
    let grams: Vec<DMatrix<f64>> = (0..l)
        .map(|i| absolute_gram(times[i], times[i + 1], k - 1, n))
        .collect();

    let mut rows: Vec<(Vec<(usize, Vec<f64>)>, f64)> = Vec::new();
    for pin in problem.pins.iter() {
        let seg = pin.knot.min(l - 1);
        rows.push((
            vec![(seg, derivative_row(times[pin.knot], pin.deriv, n))],
            pin.value,
        ));
    }
    for j in 1..l {
        for q in 0..k {
            let left = derivative_row(times[j], q, n);
            let right: Vec<f64> = derivative_row(times[j], q, n).iter().map(|x| -x).collect();
            rows.push((vec![(j - 1, left), (j, right)], 0.0));
        }
    }

    let nc = n * l;
    let size = nc + rows.len();
    let mut matrix = DMatrix::zeros(size, size);
    let mut rhs = DVector::zeros(size);
    for (i, h) in grams.iter().enumerate() {
        matrix.view_mut((i * n, i * n), (n, n)).copy_from(h);
    }
    for (r, (entries, value)) in rows.iter().enumerate() {
        let row = nc + r;
        for (seg, coeffs) in entries {
            for (a, &c) in coeffs.iter().enumerate() {
                matrix[(row, seg * n + a)] = c;
                matrix[(seg * n + a, row)] = c;
            }
        }
        rhs[row] = *value;
    }
    Ok(AbsoluteKkt {
        matrix,
        rhs,
        grams,
        width: n,
    })
}

/// Optimum of the absolute form.
#[derive(Debug, Clone)]
pub struct AbsoluteSolution {
    /// Monomial coefficients in absolute time, per segment.
    pub coeffs: Vec<DVector<f64>>,
    pub cost: f64,
}

pub fn solve_absolute(problem: &FixedTimeProblem<f64>) -> CliResult<AbsoluteSolution> {
    let kkt = absolute_kkt(problem)?;
    let x = kkt
        .matrix
        .clone()
        .lu()
        .solve(&kkt.rhs)
        .filter(|x| x.iter().all(|v| v.is_finite()))
        .ok_or_else(|| CliError::Numerical("absolute-time KKT system is singular".into()))?;
    let n = kkt.width;
    let coeffs: Vec<DVector<f64>> = (0..problem.num_segments())
        .map(|i| x.rows(i * n, n).into_owned())
        .collect();
    let cost = coeffs
        .iter()
        .zip(&kkt.grams)
        .map(|(c, h)| c.dot(&(h * c)))
        .sum();
    Ok(AbsoluteSolution { coeffs, cost })
}

/// Ratio of the extreme singular values. The SVD flushes singular values
/// below roughly `eps * max` to zero, so an infinite result means the matrix
/// is singular to working precision.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Condition number of the reduced KKT matrix of the normalized form.
pub fn conditioned_condition_number(problem: &FixedTimeProblem<f64>) -> CliResult<f64> {
    let kkt = FixedTimeSolver::new(problem.k)?.dense_kkt(problem)?;
    Ok(condition_number(&kkt.matrix))
}

pub fn absolute_condition_number(problem: &FixedTimeProblem<f64>) -> CliResult<f64> {
    Ok(condition_number(&absolute_kkt(problem)?.matrix))
}

/// Largest jump of the derivatives `0..k` across interior knots, each
/// relative to `1 + |value|`.
pub fn continuity_residual(spline: &Spline<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..spline.num_segments().saturating_sub(1) {
        for q in 0..spline.k() {
            let left = spline.eval_segment(i, 1.0, q);
            let right = spline.eval_segment(i + 1, -1.0, q);
            worst = worst.max((left - right).abs() / (1.0 + left.abs().max(right.abs())));
        }
    }
    worst
}

fn horner(c: &DVector<f64>, t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
}

/// Largest `|s_i(rho) - p_i(delta_i rho + mid_i)|` over `points` evenly
/// spaced values of `rho` per segment, where `s_i` is the normalized piece
/// and `p_i` the absolute-time piece.
pub fn mapping_deviation(spline: &Spline<f64>, absolute: &AbsoluteSolution, points: usize) -> f64 {
    let times = spline.times();
    let mut worst: f64 = 0.0;
    for (i, c) in absolute.coeffs.iter().enumerate() {
        for j in 0..points {
            let rho = -1.0 + 2.0 * j as f64 / (points - 1).max(1) as f64;
            let t = times.deltas()[i] * rho + times.midpoint(i);
            worst = worst.max((spline.eval_segment(i, rho, 0) - horner(c, t)).abs());
        }
    }
    worst
}

/// Waypoint instance with half-durations in `[0.5, 1.5]` starting at `shift`.
pub fn shifted_instance(
    k: usize,
    l: usize,
    shift: f64,
    seed: u64,
) -> CliResult<FixedTimeProblem<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_waypoint_problem(&mut rng, k, l, (0.5, 1.5), shift)
}

/// Waypoint instance whose knots span `[-1, 1]`, so that every power of the
/// absolute time stays bounded by one. Even so, the absolute form is only
/// well conditioned for a few segments of low order: its KKT condition
/// number passes `1e8` around `k = 3, l = 4` or `k = 4, l = 3`.
pub fn well_scaled_instance(k: usize, l: usize, seed: u64) -> CliResult<FixedTimeProblem<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..l).map(|_| rng.gen_range(0.5..1.5)).collect();
    let total: f64 = raw.iter().sum();
    let deltas: Vec<f64> = raw.iter().map(|d| d / total).collect();
    let values: Vec<f64> = (0..=l).map(|_| rng.gen_range(-3.0..3.0)).collect();
    Ok(FixedTimeProblem::new(
        k,
        TimeAllocation::from_durations(-1.0, deltas)?,
        PinSet::rest_to_rest(&values, k),
    )?)
}

/// Both forms on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningReport {
    pub k: usize,
    pub l: usize,
    pub shift: f64,
    pub conditioned_cond: f64,
    pub absolute_cond: f64,
    pub conditioned_cost: f64,
    /// `None` when the absolute form could not be solved.
    pub absolute_cost: Option<f64>,
}

impl ConditioningReport {
    pub fn ratio(&self) -> f64 {
        self.absolute_cond / self.conditioned_cond
    }

    /// Relative cost difference of the two forms.
    pub fn cost_gap(&self) -> Option<f64> {
        self.absolute_cost.map(|a| {
            let c = self.conditioned_cost;
            (a - c).abs() / c.abs().max(a.abs()).max(f64::MIN_POSITIVE)
        })
    }
}

pub fn compare_forms(problem: &FixedTimeProblem<f64>) -> CliResult<ConditioningReport> {
    let solution = splinetraj::solve_fixed_time(problem)?;
    let absolute_cost = solve_absolute(problem).ok().map(|s| s.cost);
    Ok(ConditioningReport {
        k: problem.k,
        l: problem.num_segments(),
        shift: problem.times.start(),
        conditioned_cond: conditioned_condition_number(problem)?,
        absolute_cond: absolute_condition_number(problem)?,
        conditioned_cost: solution.cost,
        absolute_cost,
    })
}

//! Seeded random problem instances for the benchmarks.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use splinetraj::{FixedTimeProblem, Pin, PinSet, TimeAllocation};

use crate::error::CliResult;

/// Every derivative pinned at both ends, a value at every interior knot and
/// each further interior derivative pinned with probability 0.2.
pub fn random_pinned_problem(
    rng: &mut ChaCha8Rng,
    k: usize,
    l: usize,
    delta: (f64, f64),
    start: f64,
) -> CliResult<FixedTimeProblem<f64>> {
    let deltas: Vec<f64> = (0..l).map(|_| rng.gen_range(delta.0..=delta.1)).collect();
    let mut pins = PinSet::new();
    for knot in 0..=l {
        for deriv in 0..k {
            let end = knot == 0 || knot == l;
            if end || deriv == 0 || rng.gen_bool(0.2) {
                pins.push(Pin::new(knot, deriv, rng.gen_range(-3.0..3.0)));
            }
        }
    }
    Ok(FixedTimeProblem::new(
        k,
        TimeAllocation::from_durations(start, deltas)?,
        pins,
    )?)
}

/// Waypoint values in `[-3, 3]` with rest at both ends.
pub fn random_waypoint_problem(
    rng: &mut ChaCha8Rng,
    k: usize,
    l: usize,
    delta: (f64, f64),
    start: f64,
) -> CliResult<FixedTimeProblem<f64>> {
    let deltas: Vec<f64> = (0..l).map(|_| rng.gen_range(delta.0..=delta.1)).collect();
    let values: Vec<f64> = (0..=l).map(|_| rng.gen_range(-3.0..3.0)).collect();
    Ok(FixedTimeProblem::new(
        k,
        TimeAllocation::from_durations(start, deltas)?,
        PinSet::rest_to_rest(&values, k),
    )?)
}

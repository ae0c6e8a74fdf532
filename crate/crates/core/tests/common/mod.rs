#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use splinetraj::{FixedTimeProblem, PinSet, Spline, TimeAllocation};

/// Well-posed instance: every derivative pinned at both ends, a value pin at
/// every interior knot and a few random extra derivative pins.
pub fn random_problem(
    rng: &mut ChaCha8Rng,
    k: usize,
    l: usize,
    delta: (f64, f64),
) -> FixedTimeProblem<f64> {
    let deltas: Vec<f64> = (0..l).map(|_| rng.gen_range(delta.0..=delta.1)).collect();
    let times = TimeAllocation::from_durations(rng.gen_range(-5.0..5.0), deltas).unwrap();
    let mut pins = PinSet::new();
    for knot in 0..=l {
        for deriv in 0..k {
            let end = knot == 0 || knot == l;
            if end || deriv == 0 || rng.gen_bool(0.2) {
                pins.push(splinetraj::Pin::new(knot, deriv, rng.gen_range(-3.0..3.0)));
            }
        }
    }
    FixedTimeProblem::new(k, times, pins).unwrap()
}

/// Waypoint values with rest at both ends.
pub fn random_rest_problem(
    rng: &mut ChaCha8Rng,
    k: usize,
    l: usize,
    delta: (f64, f64),
) -> FixedTimeProblem<f64> {
    let deltas: Vec<f64> = (0..l).map(|_| rng.gen_range(delta.0..=delta.1)).collect();
    let values: Vec<f64> = (0..=l).map(|_| rng.gen_range(-3.0..3.0)).collect();
    FixedTimeProblem::new(
        k,
        TimeAllocation::from_durations(0.0, deltas).unwrap(),
        PinSet::rest_to_rest(&values, k),
    )
    .unwrap()
}

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 40)
}

/// Integral of the squared `q`th derivative, segment by segment.
pub fn squared_derivative_integral(spline: &Spline<f64>, q: usize, rel_tol: f64) -> f64 {
    let knots = spline.knots();
    (0..spline.num_segments())
        .map(|i| {
            let (a, b) = (knots[i], knots[i + 1]);
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a);
            let f = |t: f64| {
                let v = spline.eval_segment(i, (t - mid) / half, q);
                v * v
            };
            // coarse estimate sets the absolute tolerance scale
            let scale = (0..=16)
                .map(|j| f(a + (b - a) * j as f64 / 16.0))
                .fold(0.0, f64::max)
                * (b - a);
            adaptive_simpson(&f, a, b, rel_tol * scale.max(1e-300))
        })
        .sum()
}

mod common;

use common::{random_problem, squared_derivative_integral};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splinetraj::{solve_dense_oracle, solve_fixed_time, FixedTimeProblem, PinSet, TimeAllocation};

#[test]
fn block_sweep_agrees_with_dense_kkt() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..80 {
        let k = rng.gen_range(2..=5);
        let l = rng.gen_range(1..=20);
        let p = random_problem(&mut rng, k, l, (0.1, 10.0));
        let fast = solve_fixed_time(&p).unwrap();
        let dense = solve_dense_oracle(&p).unwrap();
        assert!(
            (fast.cost - dense.cost).abs() <= 1e-8 * (1.0 + fast.cost),
            "k={k} l={l}"
        );
        for (a, b) in fast.f_star.iter().zip(&dense.f_star) {
            assert!((a - b).amax() <= 1e-7, "k={k} l={l}: {}", (a - b).amax());
        }
    }
}

#[test]
fn cost_equals_quadrature_of_recovered_spline() {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    for _ in 0..25 {
        let k = rng.gen_range(2..=5);
        let l = rng.gen_range(1..=8);
        let p = random_problem(&mut rng, k, l, (0.2, 3.0));
        let sol = solve_fixed_time(&p).unwrap();
        let q = squared_derivative_integral(&sol.spline, k - 1, 1e-10);
        assert!(
            (q - sol.cost).abs() <= 1e-6 * sol.cost.max(1e-300),
            "k={k}: {q} vs {}",
            sol.cost
        );
    }
}

#[test]
fn continuity_across_knots_at_two_hundred_segments() {
    let mut rng = ChaCha8Rng::seed_from_u64(300);
    let p = random_problem(&mut rng, 5, 200, (0.2, 2.0));
    let sol = solve_fixed_time(&p).unwrap();
    let s = &sol.spline;
    for i in 0..199 {
        for q in 0..5 {
            let left = s.eval_segment(i, 1.0, q);
            let right = s.eval_segment(i + 1, -1.0, q);
            assert!(
                (left - right).abs() <= 1e-6 * (1.0 + left.abs()),
                "knot {} order {q}",
                i + 1
            );
        }
    }
}

#[test]
fn pins_are_reproduced() {
    let mut rng = ChaCha8Rng::seed_from_u64(400);
    for _ in 0..20 {
        let k = rng.gen_range(2..=5);
        let l = rng.gen_range(1..=10);
        let p = random_problem(&mut rng, k, l, (0.3, 3.0));
        let sol = solve_fixed_time(&p).unwrap();
        for pin in p.pins.iter() {
            let tau = p.times.times()[pin.knot];
            let v = sol.spline.eval(tau, pin.deriv).unwrap();
            assert!((v - pin.value).abs() <= 1e-9 * (1.0 + pin.value.abs()));
        }
    }
}

#[test]
fn shift_leaves_cost_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    for _ in 0..20 {
        let (k, l) = (rng.gen_range(2..=5), rng.gen_range(1..=10));
        let p = random_problem(&mut rng, k, l, (0.1, 10.0));
        let shifted =
            FixedTimeProblem::new(p.k, p.times.shifted(1e6).unwrap(), p.pins.clone()).unwrap();
        assert_eq!(
            solve_fixed_time(&p).unwrap().cost,
            solve_fixed_time(&shifted).unwrap().cost
        );
    }
}

#[test]
fn homogeneity_in_durations() {
    let mut rng = ChaCha8Rng::seed_from_u64(600);
    for _ in 0..30 {
        let k = rng.gen_range(2..=5);
        let l = rng.gen_range(1..=8);
        let values: Vec<f64> = (0..=l).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let pins = if k == 2 {
            values
                .iter()
                .enumerate()
                .fold(PinSet::new(), |p, (i, &v)| p.pin(i, 0, v))
        } else {
            PinSet::rest_to_rest(&values, k)
        };
        let d: Vec<f64> = (0..l).map(|_| rng.gen_range(0.2..3.0)).collect();
        let alpha: f64 = rng.gen_range(0.3..3.0);
        let j = |scale: f64| {
            let times =
                TimeAllocation::from_durations(0.0, d.iter().map(|x| x * scale).collect()).unwrap();
            solve_fixed_time(&FixedTimeProblem::new(k, times, pins.clone()).unwrap())
                .unwrap()
                .cost
        };
        let expected = alpha.powi(3 - 2 * k as i32) * j(1.0);
        assert!(
            (j(alpha) - expected).abs() <= 1e-9 * (1.0 + expected.abs()),
            "k={k}"
        );
    }
}

mod common;

use common::*;
use rand::Rng;
use shapeflow_core::collocation::project_function;
use shapeflow_core::deform::stationarity_norm;
use shapeflow_core::energy::{CircleAttraction, PointAttraction};
use shapeflow_core::flow::{self, arc_length_resample, integrate, sampled_energy, FlowConfig, Method, Status};
use shapeflow_core::{PiecewiseCurve, Point2, SamplingGrid};

fn assert_invariants(curve: &PiecewiseCurve) {
    for w in curve.patches().windows(2) {
        assert_eq!(w[0].last(), w[1].first());
    }
    if curve.is_closed() {
        assert_eq!(curve.patch(curve.patch_count() - 1).last(), curve.patch(0).first());
    }
}

#[test]
fn euler_energy_is_monotone_on_random_trials() {
    let mut rng = rng(20);
    for trial in 0..100 {
        let patches = 2 + trial % 4;
        let degree = 1 + trial % 3;
        let grid = SamplingGrid::regular(patches, degree).unwrap();
        let cfg = FlowConfig {
            max_iters: 40,
            record_every: 1,
            ..FlowConfig::new(Method::Euler, 1e-2)
        };
        let traj = if trial % 2 == 0 {
            let e = CircleAttraction::new(random_point(&mut rng, 1.0), rng.gen_range(1.0..4.0)).unwrap();
            integrate(&random_curve(&mut rng, patches, degree, true), &e, &grid, &cfg).unwrap()
        } else {
            let a = random_point(&mut rng, 3.0);
            let b = random_point(&mut rng, 3.0);
            let e = PointAttraction::new(move |t: f64| a + b * t.sin());
            integrate(&random_curve(&mut rng, patches, degree, false), &e, &grid, &cfg).unwrap()
        };
        assert_ne!(traj.status, Status::Degenerate);
        for w in traj.iterates.windows(2) {
            let (e0, e1) = (w[0].energy.unwrap(), w[1].energy.unwrap());
            assert!(e1 <= e0 + 1e-12, "trial {trial}: {e0} -> {e1}");
        }
    }
}

#[test]
fn rk4_on_a_linear_field_matches_the_exponential() {
    // attraction to the origin: the lifted descent field is exactly -P
    let grid = SamplingGrid::regular(3, 3).unwrap();
    let mut rng = rng(21);
    let curve = random_curve(&mut rng, 3, 3, false);
    let e = PointAttraction::new(|_| Point2::ZERO);
    let h: f64 = 0.1;
    let next = flow::rk4_step(&curve, &e, &grid, h).unwrap();
    let amplification = 1.0 - h + h * h / 2.0 - h.powi(3) / 6.0 + h.powi(4) / 24.0;
    let scale = curve.control_points().map(|p| p.norm()).fold(0.0, f64::max);
    let mut worst_exp = 0.0f64;
    for (p, q) in next.control_points().zip(curve.control_points()) {
        assert!((p - q * amplification).norm() < 1e-13 * scale.max(1.0));
        worst_exp = worst_exp.max((p - q * (-h).exp()).norm());
    }
    // local error of RK4 on y' = -y is h^5/120 relative to |y|
    assert!(worst_exp <= 1.01 * h.powi(5) / 120.0 * scale);
}

#[test]
fn euler_halving_error_is_second_order_locally() {
    let grid = SamplingGrid::regular(8, 3).unwrap();
    let start = circle(&grid, Point2::ZERO, 1.5).map_points(|p| Point2::new(p.x * 1.2, p.y)).unwrap();
    let e = CircleAttraction::new(Point2::ZERO, 1.0).unwrap();
    let gap = |h: f64| {
        let one = flow::euler_step(&start, &e, &grid, h).unwrap();
        let half = flow::euler_step(&flow::euler_step(&start, &e, &grid, h / 2.0).unwrap(), &e, &grid, h / 2.0).unwrap();
        one.control_points().zip(half.control_points()).map(|(a, b)| a.distance(b)).fold(0.0, f64::max)
    };
    let ratio = gap(0.1) / gap(0.05);
    assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
}

#[test]
fn circle_attraction_flow_converges() {
    let grid = SamplingGrid::regular(8, 3).unwrap();
    let start = circle(&grid, Point2::ZERO, 1.5);
    let e = CircleAttraction::new(Point2::ZERO, 1.0).unwrap();
    let cfg = FlowConfig {
        max_iters: 500,
        ..FlowConfig::new(Method::Rk4, 0.2)
    };
    let traj = integrate(&start, &e, &grid, &cfg).unwrap();
    assert_eq!(traj.status, Status::Converged);
    assert!(traj.last().stationarity < 1e-6);
    let pts = traj.final_curve().dense_samples(512);
    let rms = (pts.iter().map(|p| (p.norm() - 1.0).powi(2)).sum::<f64>() / pts.len() as f64).sqrt();
    assert!(rms < 1e-3);
    for it in &traj.iterates {
        assert_invariants(&it.curve);
        assert!(it.curve.is_closed());
    }
}

#[test]
fn trajectories_are_deterministic() {
    let grid = SamplingGrid::regular(6, 3).unwrap();
    let start = circle(&grid, Point2::new(0.3, 0.1), 2.0);
    let e = CircleAttraction::new(Point2::ZERO, 1.0).unwrap();
    let cfg = FlowConfig {
        max_iters: 50,
        resample_every: 7,
        ..FlowConfig::new(Method::Rk4, 0.1)
    };
    let a = integrate(&start, &e, &grid, &cfg).unwrap();
    let b = integrate(&start, &e, &grid, &cfg).unwrap();
    assert_eq!(a, b);
    for it in &a.iterates {
        assert_invariants(&it.curve);
    }
}

#[test]
fn resampling_a_projected_circle_barely_moves_it() {
    let grid = SamplingGrid::regular(8, 3).unwrap();
    let curve = circle(&grid, Point2::ZERO, 1.0);
    let length = std::f64::consts::TAU;
    let once = arc_length_resample(&curve, &grid).unwrap();
    assert!(once.is_closed());
    assert!(relative_net_error(&once, &curve) < 1e-3 * length);
    let twice = arc_length_resample(&once, &grid).unwrap();
    let moved = once.control_points().zip(twice.control_points()).map(|(a, b)| a.distance(b)).fold(0.0, f64::max);
    assert!(moved < 1e-6 * length, "{moved}");
}

#[test]
fn resampling_preserves_the_shape_of_smooth_curves() {
    let grid = SamplingGrid::regular(10, 3).unwrap();
    // an ellipse traversed with a strongly non-uniform speed
    let f = |t: f64| {
        let s = t + 0.12 * (std::f64::consts::TAU * t).sin();
        let a = std::f64::consts::TAU * s;
        Point2::new(3.0 * a.cos(), a.sin())
    };
    let curve = project_function(f, &grid).unwrap();
    let out = arc_length_resample(&curve, &grid).unwrap();
    let dense_a = curve.dense_samples(512);
    let dense_b = out.dense_samples(512);
    let length: f64 = dense_a.windows(2).map(|w| w[0].distance(w[1])).sum();
    assert!(hausdorff(&dense_a, &dense_b) < 0.01 * length);
    // consecutive nodes now sit at nearly equal chord distances
    let nodes: Vec<Point2> = grid.distinct_global_nodes().iter().map(|t| out.eval(*t).unwrap()).collect();
    let chords: Vec<f64> = nodes.windows(2).map(|w| w[0].distance(w[1])).collect();
    let (lo, hi) = chords.iter().fold((f64::INFINITY, 0.0f64), |(l, h), c| (l.min(*c), h.max(*c)));
    assert!(hi / lo < 1.05, "{lo} {hi}");
}

#[test]
fn sampled_energy_counts_distinct_nodes() {
    let grid = SamplingGrid::regular(2, 2).unwrap();
    let curve = PiecewiseCurve::from_net(
        &[Point2::new(1.0, 0.0), Point2::new(2.0, 0.0), Point2::new(3.0, 0.0), Point2::new(3.0, 0.0), Point2::new(4.0, 0.0), Point2::new(5.0, 0.0)],
        2,
        false,
    )
    .unwrap();
    let e = PointAttraction::new(|_| Point2::ZERO);
    // nodes x = 1, 2, 3, 4, 5 -> (1 + 4 + 9 + 16 + 25) / 2
    assert_eq!(sampled_energy(&curve, &e, &grid), Some(27.5));
    assert_eq!(stationarity_norm(&flow::field_at(&curve, &e, &grid).unwrap()), 5.0);
}

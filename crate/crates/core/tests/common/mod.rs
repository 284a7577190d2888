#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shapeflow_core::collocation::project_function;
use shapeflow_core::{ControlPolygon, PiecewiseCurve, Point2, SamplingGrid};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_point(rng: &mut ChaCha8Rng, scale: f64) -> Point2 {
    Point2::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

/// Random C⁰ curve: `patches * degree + 1` free points, joins shared.
pub fn random_curve(rng: &mut ChaCha8Rng, patches: usize, degree: usize, closed: bool) -> PiecewiseCurve {
    let mut pts: Vec<Point2> = (0..patches * degree + 1).map(|_| random_point(rng, 10.0)).collect();
    if closed {
        let last = pts.len() - 1;
        pts[last] = pts[0];
    }
    from_distinct(&pts, patches, degree, closed)
}

pub fn from_distinct(pts: &[Point2], patches: usize, degree: usize, closed: bool) -> PiecewiseCurve {
    let polys = (0..patches)
        .map(|i| ControlPolygon::new(pts[i * degree..=(i + 1) * degree].to_vec()).unwrap())
        .collect();
    PiecewiseCurve::new(polys, closed).unwrap()
}

pub fn circle(grid: &SamplingGrid, center: Point2, r: f64) -> PiecewiseCurve {
    let tau = std::f64::consts::TAU;
    project_function(|t| center + Point2::new(r * (tau * t).cos(), r * (tau * t).sin()), grid).unwrap()
}

/// Largest control-point distance divided by the net's scale.
pub fn relative_net_error(a: &PiecewiseCurve, b: &PiecewiseCurve) -> f64 {
    let scale = b.control_points().map(|p| p.norm()).fold(1.0, f64::max);
    a.control_points()
        .zip(b.control_points())
        .map(|(p, q)| p.distance(q))
        .fold(0.0, f64::max)
        / scale
}

pub fn hausdorff(a: &[Point2], b: &[Point2]) -> f64 {
    let one_sided = |a: &[Point2], b: &[Point2]| {
        a.iter()
            .map(|p| b.iter().map(|q| p.distance(*q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}

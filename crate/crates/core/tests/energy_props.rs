use proptest::prelude::*;
use shapeflow_core::deform::NodeQuery;
use shapeflow_core::energy::{
    edge_stopping_field_with_contrast, gaussian_blur, gaussian_gradient_magnitude, image_shape_gradient,
    ImageEnergyConfig, ScalarField,
};
use shapeflow_core::{Point2, ShapeGradient};

fn impulse(size: usize, cx: usize, cy: usize) -> ScalarField {
    ScalarField::from_fn(size, size, |x, y| if (x, y) == (cx, cy) { 1.0 } else { 0.0 }).unwrap()
}

/// Truncated, renormalized Gaussian weight at integer offset `k`.
fn oracle_weight(k: i64, sigma: f64) -> f64 {
    let r = (3.0 * sigma).ceil() as i64;
    if k.abs() > r {
        return 0.0;
    }
    let total: f64 = (-r..=r).map(|j| (-((j * j) as f64) / (2.0 * sigma * sigma)).exp()).sum();
    (-((k * k) as f64) / (2.0 * sigma * sigma)).exp() / total
}

#[test]
fn impulse_response_matches_the_sampled_gaussian() {
    let (n, c) = (33usize, 16i64);
    let img = impulse(n, 16, 16);
    let blurred = gaussian_blur(&img, 1.0).unwrap();
    let mag = gaussian_gradient_magnitude(&img, 1.0).unwrap();
    let b = |x: i64, y: i64| oracle_weight(x - c, 1.0) * oracle_weight(y - c, 1.0);
    for y in 1..n as i64 - 1 {
        for x in 1..n as i64 - 1 {
            assert!((blurred.get(x as usize, y as usize) - b(x, y)).abs() < 1e-12);
            let gx = 0.5 * (b(x + 1, y) - b(x - 1, y));
            let gy = 0.5 * (b(x, y + 1) - b(x, y - 1));
            let expected = (gx * gx + gy * gy).sqrt();
            assert!((mag.get(x as usize, y as usize) - expected).abs() < 1e-6, "({x},{y})");
        }
    }
}

#[test]
fn blur_preserves_mass_away_from_borders() {
    let img = impulse(41, 20, 20);
    let blurred = gaussian_blur(&img, 2.5).unwrap();
    let total: f64 = blurred.values().iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gradient_magnitude_is_translation_equivariant(dx in 0usize..6, dy in 0usize..6, sigma in 0.5f64..2.0) {
        let (n, r) = (48usize, 6.0f64);
        let disk = |cx: f64, cy: f64| ScalarField::from_fn(n, n, move |x, y| {
            let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
            if d < r { 1.0 } else { 0.0 }
        }).unwrap();
        let a = gaussian_gradient_magnitude(&disk(20.0, 20.0), sigma).unwrap();
        let b = gaussian_gradient_magnitude(&disk(20.0 + dx as f64, 20.0 + dy as f64), sigma).unwrap();
        for y in 8..32 {
            for x in 8..32 {
                prop_assert!((a.get(x, y) - b.get(x + dx, y + dy)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn flat_image_without_balloon_has_zero_gradient() {
    let img = ScalarField::from_fn(64, 64, |_, _| 0.37).unwrap();
    let e = image_shape_gradient(&ImageEnergyConfig::new(1.5, 0.0), &img).unwrap();
    for i in 0..100 {
        for j in 0..100 {
            let p = Point2::new(63.0 * i as f64 / 99.0, 63.0 * j as f64 / 99.0);
            let q = NodeQuery { point: p, normal: Point2::new(1.0, 0.0), t: 0.0, patch: 0, node: 0 };
            assert_eq!(e.gradient(&q).unwrap(), Point2::ZERO);
        }
    }
}

#[test]
fn stopping_field_is_small_on_a_disk_edge() {
    let n = 96usize;
    let img = ScalarField::from_fn(n, n, |x, y| {
        let d = ((x as f64 - 48.0).powi(2) + (y as f64 - 48.0).powi(2)).sqrt();
        if d < 20.0 { 1.0 } else { 0.0 }
    })
    .unwrap();
    let mag = gaussian_gradient_magnitude(&img, 1.0).unwrap();
    let g = edge_stopping_field_with_contrast(&mag, ImageEnergyConfig::DEFAULT_CONTRAST);
    let mut worst_edge = 0.0f64;
    for k in 0..360 {
        let a = (k as f64).to_radians();
        let p = Point2::new(48.0 + 19.5 * a.cos(), 48.0 + 19.5 * a.sin());
        worst_edge = worst_edge.max(g.sample(p));
    }
    assert!(worst_edge < 0.2, "{worst_edge}");
    assert_eq!(g.get(48, 48), 1.0);
    assert_eq!(g.get(2, 2), 1.0);
}

#[test]
fn descent_points_towards_the_edge() {
    let n = 96usize;
    let img = ScalarField::from_fn(n, n, |x, y| {
        let d = ((x as f64 - 48.0).powi(2) + (y as f64 - 48.0).powi(2)).sqrt();
        if d < 20.0 { 1.0 } else { 0.0 }
    })
    .unwrap();
    let e = image_shape_gradient(&ImageEnergyConfig::new(1.0, 0.0), &img).unwrap();
    // just inside and just outside the rim on the +x axis
    for (x, sign) in [(65.5, 1.0), (69.5, -1.0)] {
        let q = NodeQuery { point: Point2::new(x, 48.0), normal: Point2::new(1.0, 0.0), t: 0.0, patch: 0, node: 0 };
        let descent = -e.gradient(&q).unwrap();
        assert!(descent.x * sign > 0.0, "at x = {x}: {descent:?}");
    }
}

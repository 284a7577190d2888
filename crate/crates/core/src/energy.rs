//! Concrete shape gradients.
//!
//! Two analytic energies with known minimizers (attraction to a
//! parametrized target, attraction to a circle) and an image edge energy:
//! an edge-stopping field `g` computed from Gaussian-smoothed image
//! gradients, combined with a balloon force along the outward normal.

use alloc::format;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicBool, Ordering};

use crate::deform::{NodeQuery, ShapeGradient};
use crate::error::{Error, Result};
use crate::math;
use crate::point::Point2;

/// A real-valued image, row-major, sampled at integer pixel centres.
/// `x` runs along columns and `y` along rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(Error::Argument(format!(
                "field must be at least 2x2, got {width}x{height}"
            )));
        }
        if values.len() != width * height {
            return Err(Error::Argument(format!(
                "{width}x{height} field needs {} values, got {}",
                width * height,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scalar field value".into()));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let values = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(width, height, values)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Whether `p` lies inside `[0, width - 1] x [0, height - 1]`.
    pub fn contains(&self, p: Point2) -> bool {
        (0.0..=(self.width - 1) as f64).contains(&p.x) && (0.0..=(self.height - 1) as f64).contains(&p.y)
    }

    /// Clamps `p` into the pixel-centre rectangle.
    pub fn clamp(&self, p: Point2) -> Point2 {
        Point2::new(
            p.x.clamp(0.0, (self.width - 1) as f64),
            p.y.clamp(0.0, (self.height - 1) as f64),
        )
    }

    /// Bilinear interpolation; points outside are clamped to the border.
    pub fn sample(&self, p: Point2) -> f64 {
        let p = self.clamp(p);
        let x0 = (math::floor(p.x) as usize).min(self.width - 2);
        let y0 = (math::floor(p.y) as usize).min(self.height - 2);
        let (fx, fy) = (p.x - x0 as f64, p.y - y0 as f64);
        let top = self.get(x0, y0) * (1.0 - fx) + self.get(x0 + 1, y0) * fx;
        let bottom = self.get(x0, y0 + 1) * (1.0 - fx) + self.get(x0 + 1, y0 + 1) * fx;
        top * (1.0 - fy) + bottom * fy
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            width: self.width,
            height: self.height,
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }
}

pub const MIN_SIGMA: f64 = 0.5;
pub const MAX_SIGMA: f64 = 10.0;

fn check_sigma(sigma: f64) -> Result<()> {
    if !(MIN_SIGMA..=MAX_SIGMA).contains(&sigma) {
        return Err(Error::Argument(format!(
            "sigma {sigma} outside [{MIN_SIGMA}, {MAX_SIGMA}]"
        )));
    }
    Ok(())
}

/// Normalized Gaussian taps for offsets `-r..=r`, `r = ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = math::ceil(3.0 * sigma) as i64;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|k| math::exp(-((k * k) as f64) / (2.0 * sigma * sigma)))
        .collect();
    let total: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|w| *w /= total);
    taps
}

/// Half-sample symmetric reflection of index `i` into `0..n`.
fn reflect(i: i64, n: usize) -> usize {
    let n = n as i64;
    let m = i.rem_euclid(2 * n);
    (if m >= n { 2 * n - 1 - m } else { m }) as usize
}

fn convolve_rows(src: &[f64], width: usize, height: usize, taps: &[f64]) -> Vec<f64> {
    let r = (taps.len() / 2) as i64;
    let mut out = alloc::vec![0.0; src.len()];
    for y in 0..height {
        let row = &src[y * width..(y + 1) * width];
        for x in 0..width {
            out[y * width + x] = taps
                .iter()
                .enumerate()
                .map(|(k, w)| w * row[reflect(x as i64 + k as i64 - r, width)])
                .sum();
        }
    }
    out
}

fn convolve_cols(src: &[f64], width: usize, height: usize, taps: &[f64]) -> Vec<f64> {
    let r = (taps.len() / 2) as i64;
    let mut out = alloc::vec![0.0; src.len()];
    for y in 0..height {
        for x in 0..width {
            out[y * width + x] = taps
                .iter()
                .enumerate()
                .map(|(k, w)| w * src[reflect(y as i64 + k as i64 - r, height) * width + x])
                .sum();
        }
    }
    out
}

/// Separable Gaussian blur with reflected borders.
pub fn gaussian_blur(img: &ScalarField, sigma: f64) -> Result<ScalarField> {
    check_sigma(sigma)?;
    let taps = gaussian_kernel(sigma);
    let (w, h) = (img.width, img.height);
    let rows = convolve_rows(&img.values, w, h, &taps);
    ScalarField::new(w, h, convolve_cols(&rows, w, h, &taps))
}

/// `|grad(G_sigma * I)|` with central differences on the blurred image.
pub fn gaussian_gradient_magnitude(img: &ScalarField, sigma: f64) -> Result<ScalarField> {
    let blurred = gaussian_blur(img, sigma)?;
    let (w, h) = (img.width, img.height);
    let at = |x: i64, y: i64| blurred.get(reflect(x, w), reflect(y, h));
    let values = (0..h as i64)
        .flat_map(|y| (0..w as i64).map(move |x| (x, y)))
        .map(|(x, y)| {
            let gx = 0.5 * (at(x + 1, y) - at(x - 1, y));
            let gy = 0.5 * (at(x, y + 1) - at(x, y - 1));
            math::hypot(gx, gy)
        })
        .collect();
    ScalarField::new(w, h, values)
}

/// `g = 1 / (1 + m^2)` where `m` is the magnitude rescaled to a maximum
/// of 1. A field with no gradient at all maps to `g = 1`.
pub fn edge_stopping_field(mag: &ScalarField) -> ScalarField {
    edge_stopping_field_with_contrast(mag, 1.0)
}

/// `g = 1 / (1 + (m / contrast)^2)` with `m` normalized as in
/// [`edge_stopping_field`]. Smaller `contrast` makes `g` drop further on
/// edges.
pub fn edge_stopping_field_with_contrast(mag: &ScalarField, contrast: f64) -> ScalarField {
    let peak = mag.max();
    if !(peak > 0.0) {
        return mag.map(|_| 1.0);
    }
    mag.map(|m| {
        let u = m / peak / contrast;
        1.0 / (1.0 + u * u)
    })
}

/// Parameters of the image edge energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageEnergyConfig {
    /// Gaussian pre-smoothing in pixels.
    pub sigma: f64,
    /// Balloon speed in pixels per unit time; positive inflates.
    pub balloon: f64,
    /// Edge contrast of the stopping function, relative to the strongest
    /// edge in the image.
    pub contrast: f64,
}

impl ImageEnergyConfig {
    pub const DEFAULT_CONTRAST: f64 = 0.2;

    pub fn new(sigma: f64, balloon: f64) -> Self {
        Self {
            sigma,
            balloon,
            contrast: Self::DEFAULT_CONTRAST,
        }
    }

    pub fn with_contrast(self, contrast: f64) -> Self {
        Self { contrast, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        check_sigma(self.sigma)?;
        if !self.balloon.is_finite() {
            return Err(Error::NonFinite("balloon coefficient".into()));
        }
        if !(self.contrast > 0.0 && self.contrast.is_finite()) {
            return Err(Error::Argument(format!("contrast {} must be positive", self.contrast)));
        }
        Ok(())
    }
}

/// Shape gradient `grad g(M) - balloon * g(M) * n` of the image edge
/// energy; its negative, the descent direction, pulls the contour down
/// `g` towards edges and pushes it along the outward normal when
/// `balloon > 0`.
#[derive(Debug)]
pub struct ImageEdgeGradient {
    stopping: ScalarField,
    balloon: f64,
    warned: AtomicBool,
}

/// Half-width of the central difference taken on the interpolated `g`.
const GRADIENT_HALF_STEP: f64 = 0.5;

impl ImageEdgeGradient {
    pub fn from_stopping_field(stopping: ScalarField, balloon: f64) -> Self {
        Self {
            stopping,
            balloon,
            warned: AtomicBool::new(false),
        }
    }

    /// The edge-stopping field `g`.
    pub fn stopping_field(&self) -> &ScalarField {
        &self.stopping
    }

    pub fn balloon(&self) -> f64 {
        self.balloon
    }

    /// `grad g` by central differences of the bilinear interpolant.
    pub fn stopping_gradient(&self, p: Point2) -> Point2 {
        let g = &self.stopping;
        let h = GRADIENT_HALF_STEP;
        Point2::new(
            (g.sample(Point2::new(p.x + h, p.y)) - g.sample(Point2::new(p.x - h, p.y))) / (2.0 * h),
            (g.sample(Point2::new(p.x, p.y + h)) - g.sample(Point2::new(p.x, p.y - h))) / (2.0 * h),
        )
    }
}

impl ShapeGradient for ImageEdgeGradient {
    fn gradient(&self, query: &NodeQuery) -> Result<Point2> {
        let mut p = query.point;
        if !self.stopping.contains(p) {
            if !self.warned.swap(true, Ordering::Relaxed) {
                log::warn!(
                    "contour point ({}, {}) left the image; clamping to the border",
                    p.x,
                    p.y
                );
            }
            p = self.stopping.clamp(p);
        }
        let g = self.stopping.sample(p);
        Ok(self.stopping_gradient(p) - query.normal * (self.balloon * g))
    }
}

/// Builds the image edge shape gradient for `img`.
pub fn image_shape_gradient(cfg: &ImageEnergyConfig, img: &ScalarField) -> Result<ImageEdgeGradient> {
    cfg.validate()?;
    let mag = gaussian_gradient_magnitude(img, cfg.sigma)?;
    Ok(ImageEdgeGradient::from_stopping_field(
        edge_stopping_field_with_contrast(&mag, cfg.contrast),
        cfg.balloon,
    ))
}

/// Gradient of `1/2 sum |M_k - target(t_k)|^2`: each node is pulled to
/// the target point with the same parameter.
#[derive(Debug, Clone, Copy)]
pub struct PointAttraction<F> {
    target: F,
}

impl<F: Fn(f64) -> Point2> PointAttraction<F> {
    pub fn new(target: F) -> Self {
        Self { target }
    }

    pub fn target(&self, t: f64) -> Point2 {
        (self.target)(t)
    }
}

impl<F: Fn(f64) -> Point2> ShapeGradient for PointAttraction<F> {
    fn gradient(&self, query: &NodeQuery) -> Result<Point2> {
        Ok(query.point - (self.target)(query.t))
    }

    fn energy(&self, point: Point2, t: f64) -> Option<f64> {
        Some(0.5 * (point - (self.target)(t)).norm_squared())
    }
}

pub fn point_attraction_gradient<F: Fn(f64) -> Point2>(target: F) -> PointAttraction<F> {
    PointAttraction::new(target)
}

/// Gradient of `1/2 (|M - c| - r)^2`, pulling points radially onto the
/// circle of centre `c` and radius `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleAttraction {
    center: Point2,
    radius: f64,
}

impl CircleAttraction {
    pub fn new(center: Point2, radius: f64) -> Result<Self> {
        center.checked()?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Argument(format!("radius {radius} must be positive")));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> Point2 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn gradient_at(&self, p: Point2) -> Result<Point2> {
        let offset = p - self.center;
        let d = offset.norm();
        if d == 0.0 {
            return Err(Error::DegenerateGradient(format!(
                "point ({}, {}) is the circle centre",
                p.x, p.y
            )));
        }
        Ok(offset * ((d - self.radius) / d))
    }
}

impl ShapeGradient for CircleAttraction {
    fn gradient(&self, query: &NodeQuery) -> Result<Point2> {
        self.gradient_at(query.point)
    }

    fn energy(&self, point: Point2, _t: f64) -> Option<f64> {
        let e = (point - self.center).norm() - self.radius;
        Some(0.5 * e * e)
    }
}

pub fn circle_attraction_gradient(center: Point2, radius: f64) -> Result<CircleAttraction> {
    CircleAttraction::new(center, radius)
}

//! Bernstein basis, single Bézier patches and piecewise Bézier curves.
//!
//! A patch of degree `D` is given by `D + 1` control points and is
//! evaluated either with the de Casteljau recursion (the default, it only
//! forms convex combinations) or as the Bernstein-form dot product
//! `sum_i P_i * b_{i,D}(t)`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::point::Point2;

/// Largest degree for which binomial coefficients are tabulated exactly.
pub const MAX_DEGREE: usize = 60;

static BINOMIALS: [[u64; MAX_DEGREE + 1]; MAX_DEGREE + 1] = pascal_triangle();

const fn pascal_triangle() -> [[u64; MAX_DEGREE + 1]; MAX_DEGREE + 1] {
    let mut table = [[0u64; MAX_DEGREE + 1]; MAX_DEGREE + 1];
    let mut n = 0;
    while n <= MAX_DEGREE {
        table[n][0] = 1;
        let mut k = 1;
        while k <= n {
            table[n][k] = table[n - 1][k - 1] + table[n - 1][k];
            k += 1;
        }
        n += 1;
    }
    table
}

/// Exact binomial coefficient `C(n, k)` for `n <= MAX_DEGREE`.
pub fn binomial(n: usize, k: usize) -> Result<u64> {
    check_degree(n)?;
    if k > n {
        return Err(Error::Argument(format!("binomial index {k} exceeds {n}")));
    }
    Ok(BINOMIALS[n][k])
}

fn check_degree(degree: usize) -> Result<()> {
    if degree > MAX_DEGREE {
        return Err(Error::Argument(format!(
            "degree {degree} exceeds the supported maximum {MAX_DEGREE}"
        )));
    }
    Ok(())
}

/// The Bernstein polynomial `C(D, i) (1 - t)^(D - i) t^i`.
pub fn bernstein_basis(i: usize, degree: usize, t: f64) -> Result<f64> {
    let c = binomial(degree, i)? as f64;
    Ok(c * powi(1.0 - t, degree - i) * powi(t, i))
}

/// All `D + 1` Bernstein polynomials of degree `D` evaluated at `t`.
pub fn bernstein_row(degree: usize, t: f64) -> Result<Vec<f64>> {
    check_degree(degree)?;
    let mut row = alloc::vec![0.0; degree + 1];
    fill_bernstein_row(degree, t, &mut row);
    Ok(row)
}

/// Writes the degree-`degree` Bernstein row into `row[..=degree]`.
pub(crate) fn fill_bernstein_row(degree: usize, t: f64, row: &mut [f64]) {
    let s = 1.0 - t;
    // row[i] <- t^i, then multiply by (1 - t)^(D - i) walking backwards.
    let mut p = 1.0;
    for r in row.iter_mut().take(degree + 1) {
        *r = p;
        p *= t;
    }
    let mut q = 1.0;
    for i in (0..=degree).rev() {
        row[i] *= q * BINOMIALS[degree][i] as f64;
        q *= s;
    }
}

fn powi(base: f64, exp: usize) -> f64 {
    let mut acc = 1.0;
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

/// The control polygon of a single Bézier patch.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPolygon {
    points: Vec<Point2>,
}

impl ControlPolygon {
    /// Builds a polygon of degree `points.len() - 1`.
    pub fn new(points: Vec<Point2>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Argument("control polygon is empty".into()));
        }
        check_degree(points.len() - 1)?;
        for p in &points {
            p.checked()?;
        }
        Ok(Self { points })
    }

    pub(crate) fn new_unchecked(points: Vec<Point2>) -> Self {
        debug_assert!(!points.is_empty() && points.len() <= MAX_DEGREE + 1);
        Self { points }
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.points.len() - 1
    }

    #[inline]
    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    #[inline]
    pub fn first(&self) -> Point2 {
        self.points[0]
    }

    #[inline]
    pub fn last(&self) -> Point2 {
        self.points[self.points.len() - 1]
    }

    pub fn into_points(self) -> Vec<Point2> {
        self.points
    }

    /// Evaluates the patch with the de Casteljau recursion.
    pub fn eval(&self, t: f64) -> Point2 {
        self.de_casteljau(t)
    }

    pub fn de_casteljau(&self, t: f64) -> Point2 {
        de_casteljau_slice(&self.points, t)
    }

    /// Evaluates `sum_i P_i b_{i,D}(t)`.
    pub fn eval_bernstein_form(&self, t: f64) -> Point2 {
        let degree = self.degree();
        let mut row = [0.0; MAX_DEGREE + 1];
        fill_bernstein_row(degree, t, &mut row);
        self.points
            .iter()
            .zip(row.iter())
            .fold(Point2::ZERO, |acc, (p, b)| acc + *p * *b)
    }

    /// First derivative (hodograph) `D * sum_i (P_{i+1} - P_i) b_{i,D-1}(t)`.
    ///
    /// A degree-0 patch is constant and has zero derivative.
    pub fn derivative(&self, t: f64) -> Point2 {
        let degree = self.degree();
        if degree == 0 {
            return Point2::ZERO;
        }
        let mut diffs = [Point2::ZERO; MAX_DEGREE];
        for (d, w) in diffs.iter_mut().zip(self.points.windows(2)) {
            *d = w[1] - w[0];
        }
        de_casteljau_slice(&diffs[..degree], t) * degree as f64
    }

    /// Applies `f` to every control point.
    pub fn map(&self, f: impl FnMut(Point2) -> Point2) -> ControlPolygon {
        ControlPolygon::new_unchecked(self.points.iter().copied().map(f).collect())
    }
}

fn de_casteljau_slice(points: &[Point2], t: f64) -> Point2 {
    let n = points.len();
    let mut work = [Point2::ZERO; MAX_DEGREE + 1];
    work[..n].copy_from_slice(points);
    for level in (1..n).rev() {
        for i in 0..level {
            work[i] = work[i].lerp(work[i + 1], t);
        }
    }
    work[0]
}

/// Control polygon of a plane polynomial given by its monomial coefficients
/// `c(t) = sum_j a_j t^j`, expressed in the Bernstein basis of degree
/// `coeffs.len() - 1`.
pub fn monomial_to_bernstein(coeffs: &[Point2]) -> Result<ControlPolygon> {
    if coeffs.is_empty() {
        return Err(Error::Argument("no monomial coefficients".into()));
    }
    let degree = coeffs.len() - 1;
    check_degree(degree)?;
    // t^j = sum_{k >= j} C(k, j) / C(D, j) b_{k,D}(t)
    let points = (0..=degree)
        .map(|k| {
            coeffs[..=k].iter().enumerate().fold(Point2::ZERO, |acc, (j, a)| {
                acc + *a * (BINOMIALS[k][j] as f64 / BINOMIALS[degree][j] as f64)
            })
        })
        .collect();
    ControlPolygon::new(points)
}

/// A C⁰ concatenation of Bézier patches of equal degree, parametrized
/// uniformly over `[0, 1]`.
///
/// Invariants, checked on construction: consecutive patches share their
/// join point bitwise; when `closed`, the last point of the last patch is
/// bitwise equal to the first point of the first patch.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseCurve {
    degree: usize,
    closed: bool,
    patches: Vec<ControlPolygon>,
}

impl PiecewiseCurve {
    pub fn new(patches: Vec<ControlPolygon>, closed: bool) -> Result<Self> {
        let first = patches
            .first()
            .ok_or_else(|| Error::Argument("piecewise curve has no patches".into()))?;
        let degree = first.degree();
        if degree == 0 {
            return Err(Error::Argument("piecewise curves need degree >= 1".into()));
        }
        for (i, p) in patches.iter().enumerate() {
            if p.degree() != degree {
                return Err(Error::Argument(format!(
                    "patch {i} has degree {} but patch 0 has degree {degree}",
                    p.degree()
                )));
            }
        }
        for (i, w) in patches.windows(2).enumerate() {
            if w[0].last() != w[1].first() {
                return Err(Error::Discontinuity {
                    patch: i,
                    gap: w[0].last().distance(w[1].first()),
                });
            }
        }
        if closed {
            let (a, b) = (patches[patches.len() - 1].last(), patches[0].first());
            if a != b {
                return Err(Error::Discontinuity {
                    patch: patches.len() - 1,
                    gap: a.distance(b),
                });
            }
        }
        Ok(Self {
            degree,
            closed,
            patches,
        })
    }

    /// Builds a curve from a flat control net of `patch_count * (degree + 1)`
    /// points, patch after patch.
    pub fn from_net(net: &[Point2], degree: usize, closed: bool) -> Result<Self> {
        if degree == 0 || !net.len().is_multiple_of(degree + 1) || net.is_empty() {
            return Err(Error::Argument(format!(
                "control net of {} points does not split into degree-{degree} patches",
                net.len()
            )));
        }
        let patches = net
            .chunks(degree + 1)
            .map(|c| ControlPolygon::new(c.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(patches, closed)
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn patch_count(&self) -> usize {
        self.patches.len()
    }

    #[inline]
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    #[inline]
    pub fn patches(&self) -> &[ControlPolygon] {
        &self.patches
    }

    #[inline]
    pub fn patch(&self, i: usize) -> &ControlPolygon {
        &self.patches[i]
    }

    /// All control points, patch after patch (join points appear twice).
    pub fn control_points(&self) -> impl Iterator<Item = Point2> + '_ {
        self.patches.iter().flat_map(|p| p.points().iter().copied())
    }

    /// Evaluates the global parametrization at `t` in `[0, 1]`.
    pub fn eval(&self, t: f64) -> Result<Point2> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Argument(format!("parameter {t} outside [0, 1]")));
        }
        let (i, s) = self.locate(t);
        Ok(self.patches[i].eval(s))
    }

    /// Derivative with respect to the global parameter.
    pub fn derivative(&self, t: f64) -> Result<Point2> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Argument(format!("parameter {t} outside [0, 1]")));
        }
        let (i, s) = self.locate(t);
        Ok(self.patches[i].derivative(s) * self.patch_count() as f64)
    }

    /// Patch index and local parameter for the global parameter `t`.
    pub fn locate(&self, t: f64) -> (usize, f64) {
        let n = self.patch_count();
        let scaled = t * n as f64;
        let i = (math::floor(scaled) as usize).min(n - 1);
        (i, scaled - i as f64)
    }

    /// `count` points at uniformly spaced global parameters, endpoints
    /// included.
    pub fn dense_samples(&self, count: usize) -> Vec<Point2> {
        let count = count.max(2);
        (0..count)
            .map(|k| {
                let (i, s) = self.locate(k as f64 / (count - 1) as f64);
                self.patches[i].eval(s)
            })
            .collect()
    }

    /// Applies `f` to every control point. Joins stay bitwise consistent
    /// because `f` sees identical inputs at shared points.
    pub fn map_points(&self, mut f: impl FnMut(Point2) -> Point2) -> Result<PiecewiseCurve> {
        let patches = self
            .patches
            .iter()
            .map(|p| ControlPolygon::new(p.points().iter().copied().map(&mut f).collect()))
            .collect::<Result<Vec<_>>>()?;
        PiecewiseCurve::new(patches, self.closed)
    }
}

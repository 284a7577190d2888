//! Lifting deformations of a curve to its control net.
//!
//! A deformation sampled at the grid nodes is mapped to control-point
//! displacements by the block-diagonal inverse collocation operator. The
//! displaced net reproduces the sampled deformation exactly at the nodes,
//! so a shape gradient evaluated at the nodes becomes a vector field on
//! control-net space.

use alloc::format;
use alloc::vec::Vec;

use crate::bezier::{ControlPolygon, PiecewiseCurve};
use crate::collocation::{self, SamplingGrid, SHARED_SAMPLE_TOLERANCE};
use crate::error::{Error, Result};
use crate::point::Point2;

/// Tangents shorter than this are treated as cusps.
pub const CUSP_TOLERANCE: f64 = 1e-12;

/// What a shape gradient sees at one grid node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeQuery {
    pub point: Point2,
    /// Unit normal pointing away from the region enclosed by the curve.
    pub normal: Point2,
    /// Global curve parameter of the node.
    pub t: f64,
    pub patch: usize,
    pub node: usize,
}

/// A shape gradient: a deformation vector for every point of the curve.
///
/// Implementations must be deterministic.
pub trait ShapeGradient {
    fn gradient(&self, query: &NodeQuery) -> Result<Point2>;

    /// Pointwise energy whose gradient is [`ShapeGradient::gradient`], when
    /// such a potential exists.
    fn energy(&self, _point: Point2, _t: f64) -> Option<f64> {
        None
    }
}

impl<G: ShapeGradient + ?Sized> ShapeGradient for &G {
    fn gradient(&self, query: &NodeQuery) -> Result<Point2> {
        (**self).gradient(query)
    }

    fn energy(&self, point: Point2, t: f64) -> Option<f64> {
        (**self).energy(point, t)
    }
}

/// Adapts a closure into a [`ShapeGradient`] without energy.
#[derive(Debug, Clone, Copy)]
pub struct FnGradient<F>(pub F);

impl<F> ShapeGradient for FnGradient<F>
where
    F: Fn(&NodeQuery) -> Point2,
{
    fn gradient(&self, query: &NodeQuery) -> Result<Point2> {
        Ok((self.0)(query))
    }
}

pub fn from_fn<F: Fn(&NodeQuery) -> Point2>(f: F) -> FnGradient<F> {
    FnGradient(f)
}

/// Deformation vectors sampled at the grid nodes, laid out like a
/// [`collocation::SampleMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationSamples {
    patch_count: usize,
    degree: usize,
    closed: bool,
    vectors: Vec<Point2>,
}

impl DeformationSamples {
    pub fn new(patch_count: usize, degree: usize, closed: bool, vectors: Vec<Point2>) -> Result<Self> {
        collocation::check_rows(patch_count, degree, &vectors)?;
        for v in &vectors {
            v.checked()?;
        }
        Ok(Self {
            patch_count,
            degree,
            closed,
            vectors,
        })
    }

    /// Samples `field(t)` at every global node of `grid`.
    pub fn from_fn(grid: &SamplingGrid, closed: bool, field: impl Fn(f64) -> Point2) -> Result<Self> {
        let vectors = grid.global_nodes().into_iter().map(field).collect();
        Self::new(grid.patch_count(), grid.degree(), closed, vectors)
    }

    #[inline]
    pub fn vectors(&self) -> &[Point2] {
        &self.vectors
    }

    #[inline]
    pub fn is_closed(&self) -> bool {
        self.closed
    }
}

/// Displacements of every control point, patch after patch. Entries at a
/// join, and at the closure of a closed curve, are bitwise equal.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlIncrement {
    patch_count: usize,
    degree: usize,
    closed: bool,
    vectors: Vec<Point2>,
}

impl ControlIncrement {
    pub fn new(patch_count: usize, degree: usize, closed: bool, vectors: Vec<Point2>) -> Result<Self> {
        collocation::check_rows(patch_count, degree, &vectors)?;
        for v in &vectors {
            v.checked()?;
        }
        let inc = Self {
            patch_count,
            degree,
            closed,
            vectors,
        };
        if let Some((patch, gap)) = inc.first_inconsistency() {
            return Err(Error::Discontinuity { patch, gap });
        }
        Ok(inc)
    }

    /// The zero increment for curves shaped like `curve`.
    pub fn zeros_like(curve: &PiecewiseCurve) -> Self {
        Self {
            patch_count: curve.patch_count(),
            degree: curve.degree(),
            closed: curve.is_closed(),
            vectors: alloc::vec![Point2::ZERO; curve.patch_count() * (curve.degree() + 1)],
        }
    }

    fn first_inconsistency(&self) -> Option<(usize, f64)> {
        let n = self.degree + 1;
        let pairs = (0..self.patch_count - 1).map(|i| (i, i * n + self.degree, (i + 1) * n));
        let closure = self
            .closed
            .then_some((self.patch_count - 1, self.vectors.len() - 1, 0));
        pairs
            .chain(closure)
            .find(|&(_, a, b)| self.vectors[a] != self.vectors[b])
            .map(|(patch, a, b)| (patch, self.vectors[a].distance(self.vectors[b])))
    }

    #[inline]
    pub fn patch_count(&self) -> usize {
        self.patch_count
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    #[inline]
    pub fn vectors(&self) -> &[Point2] {
        &self.vectors
    }

    pub fn patch(&self, i: usize) -> &[Point2] {
        let n = self.degree + 1;
        &self.vectors[i * n..(i + 1) * n]
    }

    /// `alpha * self`.
    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            vectors: self.vectors.iter().map(|v| *v * alpha).collect(),
            ..self.clone()
        }
    }

    /// `self + alpha * other`; shapes must match.
    pub fn add_scaled(&self, other: &ControlIncrement, alpha: f64) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            vectors: self
                .vectors
                .iter()
                .zip(&other.vectors)
                .map(|(a, b)| *a + *b * alpha)
                .collect(),
            ..self.clone()
        })
    }

    fn check_same_shape(&self, other: &ControlIncrement) -> Result<()> {
        if self.patch_count != other.patch_count || self.degree != other.degree {
            return Err(Error::Argument("increments have different shapes".into()));
        }
        Ok(())
    }

    /// The deformation curve whose control net is this increment.
    pub fn to_curve(&self) -> Result<PiecewiseCurve> {
        PiecewiseCurve::from_net(&self.vectors, self.degree, self.closed)
    }
}

/// Lifts a sampled deformation to control-net displacements, `B^{-1} S`.
///
/// Shared nodes closer than [`SHARED_SAMPLE_TOLERANCE`] are averaged.
pub fn lift_deformation(samples: &DeformationSamples, grid: &SamplingGrid) -> Result<ControlIncrement> {
    grid.check_shape(samples.patch_count, samples.degree)?;
    let rows = collocation::reconcile_shared(
        &samples.vectors,
        samples.patch_count,
        samples.degree,
        samples.closed,
        SHARED_SAMPLE_TOLERANCE,
    )?;
    Ok(ControlIncrement {
        patch_count: samples.patch_count,
        degree: samples.degree,
        closed: samples.closed,
        vectors: collocation::solve_blocks(grid, &rows),
    })
}

/// Moves every control point of `curve` by `step * inc`.
pub fn apply_increment(curve: &PiecewiseCurve, inc: &ControlIncrement, step: f64) -> Result<PiecewiseCurve> {
    if curve.patch_count() != inc.patch_count || curve.degree() != inc.degree {
        return Err(Error::Argument(format!(
            "increment shape ({} x {}) does not match curve ({} x {})",
            inc.patch_count,
            inc.degree,
            curve.patch_count(),
            curve.degree()
        )));
    }
    if curve.is_closed() && inc.vectors[0] != inc.vectors[inc.vectors.len() - 1] {
        return Err(Error::Argument("increment does not preserve closure".into()));
    }
    let patches = curve
        .patches()
        .iter()
        .zip(inc.vectors.chunks(inc.degree + 1))
        .map(|(poly, dv)| {
            ControlPolygon::new(
                poly.points()
                    .iter()
                    .zip(dv)
                    .map(|(p, v)| *p + *v * step)
                    .collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    PiecewiseCurve::new(patches, curve.is_closed())
}

/// Twice the signed area of the polygon through `points`.
fn signed_area2(points: &[Point2]) -> f64 {
    let n = points.len();
    (0..n).map(|k| points[k].cross(points[(k + 1) % n])).sum()
}

/// Evaluates `grad` at every grid node of `curve` and lifts the result:
/// the vector field `B^{-1} T_F` at this curve.
///
/// Normals point away from the enclosed region whichever way the curve is
/// oriented. Values at shared nodes are averaged before lifting.
pub fn lift_shape_gradient<G: ShapeGradient + ?Sized>(
    curve: &PiecewiseCurve,
    grad: &G,
    grid: &SamplingGrid,
) -> Result<ControlIncrement> {
    grid.check_shape(curve.patch_count(), curve.degree())?;
    let degree = curve.degree();
    let nodes = grid.local_nodes();

    let mut points = Vec::with_capacity(grid.row_count());
    let mut tangents = Vec::with_capacity(grid.row_count());
    for (i, patch) in curve.patches().iter().enumerate() {
        for (j, &s) in nodes.iter().enumerate() {
            let tangent = patch.derivative(s);
            if !(tangent.norm() >= CUSP_TOLERANCE) {
                return Err(Error::DegenerateTangent { patch: i, node: j });
            }
            points.push(patch.eval(s));
            tangents.push(tangent);
        }
    }

    let outline: Vec<Point2> = points
        .chunks(degree + 1)
        .flat_map(|c| c[..degree].iter().copied())
        .collect();
    // Counter-clockwise curves have the outside on the right of the tangent.
    let side = if signed_area2(&outline) < 0.0 { -1.0 } else { 1.0 };

    let mut vectors = Vec::with_capacity(grid.row_count());
    for (k, (point, tangent)) in points.iter().zip(&tangents).enumerate() {
        let (i, j) = (k / (degree + 1), k % (degree + 1));
        let unit = *tangent / tangent.norm();
        let query = NodeQuery {
            point: *point,
            normal: Point2::new(unit.y, -unit.x) * side,
            t: grid.global_t(i, j),
            patch: i,
            node: j,
        };
        vectors.push(grad.gradient(&query)?.checked()?);
    }
    collocation::average_shared(&mut vectors, curve.patch_count(), degree, curve.is_closed());
    Ok(ControlIncrement {
        patch_count: curve.patch_count(),
        degree,
        closed: curve.is_closed(),
        vectors: collocation::solve_blocks(grid, &vectors),
    })
}

/// Largest Euclidean length among the control displacements.
pub fn stationarity_norm(inc: &ControlIncrement) -> f64 {
    inc.vectors.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Projects an increment onto the closed subspace by averaging the two
/// displacements of the closure point.
pub fn close_increment(inc: &ControlIncrement) -> ControlIncrement {
    let mut out = inc.clone();
    let last = out.vectors.len() - 1;
    let mid = out.vectors[0].midpoint(out.vectors[last]);
    out.vectors[0] = mid;
    out.vectors[last] = mid;
    out.closed = true;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collocation::{project_function, sample_curve};
    use alloc::vec;

    fn circle(grid: &SamplingGrid, r: f64) -> PiecewiseCurve {
        let tau = core::f64::consts::TAU;
        project_function(|t| Point2::new(r * libm::cos(tau * t), r * libm::sin(tau * t)), grid).unwrap()
    }

    #[test]
    fn zero_samples_lift_to_zero() {
        let grid = SamplingGrid::regular(3, 4).unwrap();
        let s = DeformationSamples::from_fn(&grid, false, |_| Point2::ZERO).unwrap();
        let inc = lift_deformation(&s, &grid).unwrap();
        assert_eq!(stationarity_norm(&inc), 0.0);
    }

    #[test]
    fn degree_one_lift_is_identity() {
        let grid = SamplingGrid::regular(3, 1).unwrap();
        let s = DeformationSamples::from_fn(&grid, false, |t| Point2::new(t, t * t)).unwrap();
        let inc = lift_deformation(&s, &grid).unwrap();
        assert_eq!(inc.vectors(), s.vectors());
    }

    #[test]
    fn lift_recovers_a_known_deformation_curve() {
        let grid = SamplingGrid::regular(2, 3).unwrap();
        let net = [
            Point2::new(0.1, 0.2),
            Point2::new(-1.0, 0.5),
            Point2::new(0.3, 0.3),
            Point2::new(2.0, -1.0),
            Point2::new(2.0, -1.0),
            Point2::new(0.0, 4.0),
            Point2::new(1.0, 1.0),
            Point2::new(-0.5, 0.25),
        ];
        let eps = PiecewiseCurve::from_net(&net, 3, false).unwrap();
        let sampled = sample_curve(&eps, &grid).unwrap();
        let s = DeformationSamples::new(2, 3, false, sampled.rows().to_vec()).unwrap();
        let inc = lift_deformation(&s, &grid).unwrap();
        for (a, b) in inc.vectors().iter().zip(net.iter()) {
            assert!(a.distance(*b) < 1e-12);
        }
    }

    #[test]
    fn lift_rejects_inconsistent_shared_nodes() {
        let grid = SamplingGrid::regular(2, 1).unwrap();
        let v = vec![Point2::ZERO, Point2::new(1.0, 0.0), Point2::ZERO, Point2::ZERO];
        let s = DeformationSamples::new(2, 1, false, v).unwrap();
        assert!(matches!(lift_deformation(&s, &grid), Err(Error::Discontinuity { .. })));
    }

    #[test]
    fn apply_increment_translation_and_zero_step() {
        let grid = SamplingGrid::regular(4, 3).unwrap();
        let curve = circle(&grid, 2.0);
        let v = Point2::new(0.5, -0.25);
        let s = DeformationSamples::from_fn(&grid, true, |_| v).unwrap();
        let inc = lift_deformation(&s, &grid).unwrap();
        assert_eq!(apply_increment(&curve, &inc, 0.0).unwrap(), curve);
        let moved = apply_increment(&curve, &inc, 2.0).unwrap();
        for (a, b) in moved.control_points().zip(curve.control_points()) {
            assert!((a - b - v * 2.0).norm() < 1e-14);
        }
        assert!(moved.is_closed());
    }

    #[test]
    fn apply_increment_checks_shape() {
        let grid = SamplingGrid::regular(4, 3).unwrap();
        let curve = circle(&grid, 1.0);
        let other = circle(&SamplingGrid::regular(5, 3).unwrap(), 1.0);
        let inc = ControlIncrement::zeros_like(&other);
        assert!(apply_increment(&curve, &inc, 1.0).is_err());
    }

    #[test]
    fn constant_and_zero_gradients() {
        let grid = SamplingGrid::regular(6, 3).unwrap();
        let curve = circle(&grid, 1.0);
        let zero = lift_shape_gradient(&curve, &from_fn(|_| Point2::ZERO), &grid).unwrap();
        assert_eq!(stationarity_norm(&zero), 0.0);
        let c = Point2::new(1.0, -2.0);
        let constant = lift_shape_gradient(&curve, &from_fn(|_| c), &grid).unwrap();
        assert!(constant.vectors().iter().all(|v| (*v - c).norm() < 1e-14));
    }

    #[test]
    fn normals_point_outward_for_both_orientations() {
        let grid = SamplingGrid::regular(8, 3).unwrap();
        let ccw = circle(&grid, 1.0);
        let cw = ccw.map_points(|p| Point2::new(p.x, -p.y)).unwrap();
        for curve in [ccw, cw] {
            let check = from_fn(|q: &NodeQuery| {
                assert!(q.normal.dot(q.point) > 0.99, "{q:?}");
                Point2::ZERO
            });
            lift_shape_gradient(&curve, &check, &grid).unwrap();
        }
    }

    #[test]
    fn cusp_is_reported_with_its_node() {
        let grid = SamplingGrid::regular(1, 2).unwrap();
        let net = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 0.0)];
        let curve = PiecewiseCurve::from_net(&net, 2, false).unwrap();
        assert_eq!(
            lift_shape_gradient(&curve, &from_fn(|_| Point2::ZERO), &grid),
            Err(Error::DegenerateTangent { patch: 0, node: 1 })
        );
    }

    #[test]
    fn stationarity_norm_examples() {
        let mut v = vec![Point2::ZERO; 6];
        let inc = ControlIncrement::new(2, 2, false, v.clone()).unwrap();
        assert_eq!(stationarity_norm(&inc), 0.0);
        v[1] = Point2::new(3.0, 4.0);
        let inc = ControlIncrement::new(2, 2, false, v).unwrap();
        assert_eq!(stationarity_norm(&inc), 5.0);
        assert_eq!(stationarity_norm(&inc.scaled(-2.5)), 12.5);
    }

    #[test]
    fn close_increment_projection() {
        let v = vec![
            Point2::new(1.0, 0.0),
            Point2::new(5.0, 5.0),
            Point2::new(5.0, 5.0),
            Point2::new(3.0, 2.0),
        ];
        let inc = ControlIncrement::new(2, 1, false, v).unwrap();
        let closed = close_increment(&inc);
        assert_eq!(closed.vectors()[0], Point2::new(2.0, 1.0));
        assert_eq!(closed.vectors()[3], Point2::new(2.0, 1.0));
        assert_eq!(close_increment(&closed), closed);
        let already = ControlIncrement::new(2, 1, true, closed.vectors().to_vec()).unwrap();
        assert_eq!(close_increment(&already), already);
    }

    #[test]
    fn increment_constructor_enforces_joins() {
        let v = vec![Point2::ZERO, Point2::new(1.0, 0.0), Point2::ZERO, Point2::ZERO];
        assert!(ControlIncrement::new(2, 1, false, v).is_err());
    }
}

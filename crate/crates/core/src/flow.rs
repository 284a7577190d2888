//! Integration of the lifted shape-gradient field on control-net space.
//!
//! The descent field at a curve is `-B^{-1} T_F`, i.e. the negated lift
//! of the shape gradient, projected onto closed nets for closed curves.
//! Plain gradient descent is the explicit Euler method on this field;
//! classical RK4 is offered as the higher-order alternative.

use alloc::vec::Vec;

use crate::bezier::PiecewiseCurve;
use crate::collocation::{fit_curve, SampleMatrix, SamplingGrid};
use crate::deform::{
    apply_increment, close_increment, lift_shape_gradient, stationarity_norm, ControlIncrement,
    ShapeGradient,
};
use crate::error::{Error, Result};
use crate::point::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Euler,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig {
    pub method: Method,
    /// Fixed step size, in `(0, 1]`.
    pub step: f64,
    pub max_iters: usize,
    /// Convergence threshold on [`stationarity_norm`] of the field.
    pub tol: f64,
    /// Arc-length resampling period in iterations; 0 disables it.
    pub resample_every: usize,
    /// Record every k-th iterate (the first and last are always kept).
    pub record_every: usize,
}

impl FlowConfig {
    pub const DEFAULT_TOL: f64 = 1e-6;

    pub fn new(method: Method, step: f64) -> Self {
        Self {
            method,
            step,
            max_iters: 1000,
            tol: Self::DEFAULT_TOL,
            resample_every: 0,
            record_every: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step <= 1.0) {
            return Err(Error::Argument(alloc::format!("step {} not in (0, 1]", self.step)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Argument(alloc::format!("tolerance {} must be positive", self.tol)));
        }
        if self.record_every == 0 {
            return Err(Error::Argument("record_every must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIters,
    Degenerate,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIters => "max_iters",
            Status::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    pub iter: usize,
    pub curve: PiecewiseCurve,
    /// Stationarity norm of the descent field at `curve`.
    pub stationarity: f64,
    pub energy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub iterates: Vec<Iterate>,
    pub status: Status,
    /// Number of steps taken.
    pub steps: usize,
    /// What stopped a degenerate run.
    pub failure: Option<Error>,
}

impl Trajectory {
    /// The last recorded iterate.
    pub fn last(&self) -> &Iterate {
        self.iterates.last().expect("trajectories record their first iterate")
    }

    pub fn final_curve(&self) -> &PiecewiseCurve {
        &self.last().curve
    }
}

/// The descent field `-lift(grad)` at `curve`.
pub fn field_at<G: ShapeGradient + ?Sized>(
    curve: &PiecewiseCurve,
    grad: &G,
    grid: &SamplingGrid,
) -> Result<ControlIncrement> {
    let field = lift_shape_gradient(curve, grad, grid)?.scaled(-1.0);
    Ok(if curve.is_closed() {
        close_increment(&field)
    } else {
        field
    })
}

pub fn euler_step<G: ShapeGradient + ?Sized>(
    curve: &PiecewiseCurve,
    grad: &G,
    grid: &SamplingGrid,
    h: f64,
) -> Result<PiecewiseCurve> {
    apply_increment(curve, &field_at(curve, grad, grid)?, h)
}

pub fn rk4_step<G: ShapeGradient + ?Sized>(
    curve: &PiecewiseCurve,
    grad: &G,
    grid: &SamplingGrid,
    h: f64,
) -> Result<PiecewiseCurve> {
    let k1 = field_at(curve, grad, grid)?;
    rk4_from(curve, &k1, grad, grid, h)
}

fn rk4_from<G: ShapeGradient + ?Sized>(
    curve: &PiecewiseCurve,
    k1: &ControlIncrement,
    grad: &G,
    grid: &SamplingGrid,
    h: f64,
) -> Result<PiecewiseCurve> {
    let k2 = field_at(&apply_increment(curve, k1, 0.5 * h)?, grad, grid)?;
    let k3 = field_at(&apply_increment(curve, &k2, 0.5 * h)?, grad, grid)?;
    let k4 = field_at(&apply_increment(curve, &k3, h)?, grad, grid)?;
    let slope = k1
        .add_scaled(&k2, 2.0)?
        .add_scaled(&k3, 2.0)?
        .add_scaled(&k4, 1.0)?
        .scaled(1.0 / 6.0);
    apply_increment(curve, &slope, h)
}

fn step_from<G: ShapeGradient + ?Sized>(
    method: Method,
    curve: &PiecewiseCurve,
    field: &ControlIncrement,
    grad: &G,
    grid: &SamplingGrid,
    h: f64,
) -> Result<PiecewiseCurve> {
    match method {
        Method::Euler => apply_increment(curve, field, h),
        Method::Rk4 => rk4_from(curve, field, grad, grid, h),
    }
}

/// `sum f(M)` over the distinct grid nodes of `curve`, when the gradient
/// has a pointwise energy.
pub fn sampled_energy<G: ShapeGradient + ?Sized>(
    curve: &PiecewiseCurve,
    grad: &G,
    grid: &SamplingGrid,
) -> Option<f64> {
    let degree = curve.degree();
    let nodes = grid.local_nodes();
    let mut total = 0.0;
    for (i, patch) in curve.patches().iter().enumerate() {
        for j in 0..degree {
            total += grad.energy(patch.eval(nodes[j]), grid.global_t(i, j))?;
        }
    }
    if !curve.is_closed() {
        let last = curve.patch(curve.patch_count() - 1).last();
        total += grad.energy(last, 1.0)?;
    }
    Some(total)
}

/// Integrates the descent field from `start` until the field vanishes
/// (below `cfg.tol`), the iteration budget runs out, or the curve
/// degenerates. Only invalid arguments are reported as `Err`; a
/// degenerate run returns its partial trajectory.
pub fn integrate<G: ShapeGradient + ?Sized>(
    start: &PiecewiseCurve,
    grad: &G,
    grid: &SamplingGrid,
    cfg: &FlowConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    grid.check_shape(start.patch_count(), start.degree())?;

    let mut iterates = Vec::new();
    let mut curve = start.clone();
    let mut pending: Option<Iterate> = None;
    let mut k = 0;
    let (status, failure) = loop {
        let field = match field_at(&curve, grad, grid) {
            Ok(f) => f,
            Err(e) => break (Status::Degenerate, Some(e)),
        };
        let norm = stationarity_norm(&field);
        let it = Iterate {
            iter: k,
            curve: curve.clone(),
            stationarity: norm,
            energy: sampled_energy(&curve, grad, grid),
        };
        let done = if norm < cfg.tol {
            Some(Status::Converged)
        } else if k >= cfg.max_iters {
            Some(Status::MaxIters)
        } else {
            None
        };
        if k % cfg.record_every == 0 || done.is_some() {
            iterates.push(it);
            pending = None;
        } else {
            pending = Some(it);
        }
        if let Some(status) = done {
            break (status, None);
        }

        let next = step_from(cfg.method, &curve, &field, grad, grid, cfg.step).and_then(|c| {
            if cfg.resample_every > 0 && (k + 1) % cfg.resample_every == 0 {
                arc_length_resample(&c, grid)
            } else {
                Ok(c)
            }
        });
        match next {
            Ok(c) => curve = c,
            Err(e) => break (Status::Degenerate, Some(e)),
        }
        k += 1;
    };
    if let Some(it) = pending {
        iterates.push(it);
    }
    if iterates.is_empty() {
        // the start itself was degenerate
        iterates.push(Iterate {
            iter: 0,
            curve: start.clone(),
            stationarity: f64::INFINITY,
            energy: None,
        });
    }
    Ok(Trajectory {
        iterates,
        status,
        steps: k,
        failure,
    })
}

/// Dense evaluations per patch used to measure arc length.
pub const RESAMPLE_DENSITY: usize = 256;

const BISECTION_ROUNDS: usize = 48;

/// Re-fits `curve` so that its grid nodes are equally spaced in arc length
/// (more precisely, at arc length `t * L` for each global node `t`).
///
/// Endpoints stay fixed; a closed curve keeps its start point.
pub fn arc_length_resample(curve: &PiecewiseCurve, grid: &SamplingGrid) -> Result<PiecewiseCurve> {
    grid.check_shape(curve.patch_count(), curve.degree())?;
    let n = RESAMPLE_DENSITY;

    // (patch, local parameter, point, cumulative length)
    let mut dense: Vec<(usize, f64, Point2, f64)> = Vec::with_capacity(curve.patch_count() * n + 1);
    let mut total = 0.0;
    for (i, patch) in curve.patches().iter().enumerate() {
        let first = if i == 0 { 0 } else { 1 };
        for k in first..=n {
            let s = k as f64 / n as f64;
            let p = patch.eval(s);
            if let Some(&(_, _, prev, _)) = dense.last() {
                total += p.distance(prev);
            }
            dense.push((i, s, p, total));
        }
    }
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Degenerate(alloc::format!("curve length is {total}")));
    }

    let locate = |target: f64| -> Point2 {
        // first dense sample whose cumulative length reaches the target
        let b = dense.partition_point(|d| d.3 < target).clamp(1, dense.len() - 1);
        let (_, _, pa, ca) = dense[b - 1];
        let (patch, sb, _, _) = dense[b];
        // the segment may straddle a join; the join point is dense[b - 1]
        let sa = if dense[b - 1].0 == patch { dense[b - 1].1 } else { 0.0 };
        let poly = curve.patch(patch);
        let (mut lo, mut hi) = (sa, sb);
        for _ in 0..BISECTION_ROUNDS {
            let mid = 0.5 * (lo + hi);
            if ca + poly.eval(mid).distance(pa) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        poly.eval(0.5 * (lo + hi))
    };

    let degree = curve.degree();
    let start = curve.patch(0).first();
    let end = curve.patch(curve.patch_count() - 1).last();
    let mut rows = Vec::with_capacity(grid.row_count());
    for i in 0..curve.patch_count() {
        for j in 0..=degree {
            let t = grid.global_t(i, j);
            let p = if t == 0.0 {
                start
            } else if t == 1.0 {
                end
            } else {
                locate(t * total)
            };
            rows.push(p);
        }
    }
    let samples = SampleMatrix::new(curve.patch_count(), degree, curve.is_closed(), rows)?;
    fit_curve(&samples, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collocation::project_function;
    use crate::deform::from_fn;
    use crate::energy::CircleAttraction;

    fn circle(grid: &SamplingGrid, r: f64) -> PiecewiseCurve {
        let tau = core::f64::consts::TAU;
        project_function(|t| Point2::new(r * libm::cos(tau * t), r * libm::sin(tau * t)), grid).unwrap()
    }

    #[test]
    fn zero_and_constant_fields() {
        let grid = SamplingGrid::regular(4, 3).unwrap();
        let curve = circle(&grid, 1.0);
        let zero = field_at(&curve, &from_fn(|_| Point2::ZERO), &grid).unwrap();
        assert_eq!(stationarity_norm(&zero), 0.0);
        let c = Point2::new(0.5, 2.0);
        let constant = field_at(&curve, &from_fn(|_| c), &grid).unwrap();
        assert!(constant.vectors().iter().all(|v| (*v + c).norm() < 1e-14));
    }

    #[test]
    fn steps_at_a_stationary_curve_do_nothing() {
        let grid = SamplingGrid::regular(8, 3).unwrap();
        let curve = circle(&grid, 1.0);
        let zero = from_fn(|_| Point2::ZERO);
        assert_eq!(euler_step(&curve, &zero, &grid, 0.5).unwrap(), curve);
        assert_eq!(rk4_step(&curve, &zero, &grid, 0.5).unwrap(), curve);
    }

    #[test]
    fn constant_field_euler_and_rk4_agree() {
        let grid = SamplingGrid::regular(4, 2).unwrap();
        let curve = circle(&grid, 1.0);
        let c = Point2::new(1.0, -1.0);
        let g = from_fn(|_| c);
        let e = euler_step(&curve, &g, &grid, 0.25).unwrap();
        let r = rk4_step(&curve, &g, &grid, 0.25).unwrap();
        for ((a, b), p) in e.control_points().zip(r.control_points()).zip(curve.control_points()) {
            assert!((a - (p - c * 0.25)).norm() < 1e-14);
            assert!(a.distance(b) < 1e-14);
        }
    }

    #[test]
    fn integrate_bookkeeping() {
        let grid = SamplingGrid::regular(8, 3).unwrap();
        let target = CircleAttraction::new(Point2::ZERO, 1.0).unwrap();

        let at_min = circle(&grid, 1.0);
        let cfg = FlowConfig::new(Method::Rk4, 0.2);
        let traj = integrate(&at_min, &from_fn(|_| Point2::ZERO), &grid, &cfg).unwrap();
        assert_eq!((traj.status, traj.steps, traj.iterates.len()), (Status::Converged, 0, 1));

        let start = circle(&grid, 1.5);
        let cfg = FlowConfig {
            max_iters: 1,
            ..FlowConfig::new(Method::Euler, 0.1)
        };
        let traj = integrate(&start, &target, &grid, &cfg).unwrap();
        assert_eq!(traj.status, Status::MaxIters);
        assert_eq!(traj.iterates.len(), 2);
        assert!(traj.last().stationarity >= cfg.tol);

        let cfg = FlowConfig {
            max_iters: 10,
            record_every: 4,
            ..FlowConfig::new(Method::Euler, 0.1)
        };
        let traj = integrate(&start, &target, &grid, &cfg).unwrap();
        let recorded: Vec<usize> = traj.iterates.iter().map(|i| i.iter).collect();
        assert_eq!(recorded, alloc::vec![0, 4, 8, 10]);
    }

    #[test]
    fn degenerate_runs_keep_a_partial_trajectory() {
        let grid = SamplingGrid::regular(4, 3).unwrap();
        // the first node sits exactly at the attraction centre
        let start = circle(&grid, 1.0);
        let target = CircleAttraction::new(start.patch(0).first(), 1.0).unwrap();
        let traj = integrate(&start, &target, &grid, &FlowConfig::new(Method::Euler, 0.1)).unwrap();
        assert_eq!(traj.status, Status::Degenerate);
        assert!(matches!(traj.failure, Some(Error::DegenerateGradient(_))));
        assert_eq!(traj.iterates.len(), 1);
    }

    #[test]
    fn invalid_config_is_an_error() {
        let grid = SamplingGrid::regular(4, 3).unwrap();
        let curve = circle(&grid, 1.0);
        let zero = from_fn(|_| Point2::ZERO);
        for cfg in [
            FlowConfig::new(Method::Euler, 0.0),
            FlowConfig::new(Method::Euler, 1.5),
            FlowConfig { tol: 0.0, ..FlowConfig::new(Method::Euler, 0.1) },
            FlowConfig { record_every: 0, ..FlowConfig::new(Method::Euler, 0.1) },
        ] {
            assert!(integrate(&curve, &zero, &grid, &cfg).is_err());
        }
    }

    #[test]
    fn resampling_a_zero_length_curve_fails() {
        let grid = SamplingGrid::regular(2, 2).unwrap();
        let curve = PiecewiseCurve::from_net(&[Point2::new(1.0, 1.0); 6], 2, false).unwrap();
        assert!(matches!(arc_length_resample(&curve, &grid), Err(Error::Degenerate(_))));
    }

    #[test]
    fn resampling_a_skewed_segment_spaces_nodes_evenly() {
        let grid = SamplingGrid::regular(2, 2).unwrap();
        // x = t^2 on the first patch, then a straight continuation
        let net = [
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.9, 0.0),
            Point2::new(2.0, 0.0),
        ];
        let curve = PiecewiseCurve::from_net(&net, 2, false).unwrap();
        let out = arc_length_resample(&curve, &grid).unwrap();
        for (k, t) in grid.distinct_global_nodes().iter().enumerate() {
            let p = out.eval(*t).unwrap();
            assert!((p.x - 0.5 * k as f64).abs() < 1e-6, "node {k}: {p:?}");
            assert_eq!(p.y, 0.0);
        }
    }
}

//! Sampling grids, collocation matrices, and the linear isomorphisms
//! between piecewise curves, their samples, and their control nets.
//!
//! For local nodes `0 = s_0 < ... < s_D = 1` the collocation matrix has
//! entries `B[r][c] = b_{c,D}(s_r)`; sampling a patch with control points
//! `P` gives `M = B P`, and fitting solves that system. A piecewise curve
//! uses the same matrix on every patch, so sampling and fitting act
//! block-diagonally.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::bezier::{self, ControlPolygon, PiecewiseCurve};
use crate::error::{Error, Result};
use crate::linalg::{self, Lu};
use crate::math;
use crate::point::Point2;

/// Highest degree accepted for fitting unless explicitly overridden.
pub const DEFAULT_MAX_FIT_DEGREE: usize = 10;

/// Shared samples closer than this are merged into their midpoint.
pub const SHARED_SAMPLE_TOLERANCE: f64 = 1e-9;

/// Placement of the local interpolation nodes inside each patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    /// `s_j = j / D`.
    Regular,
    /// Chebyshev–Lobatto points `(1 - cos(j pi / D)) / 2`.
    Chebyshev,
    /// Caller-supplied nodes.
    Custom,
}

/// The collocation matrix for one set of local nodes, factored once.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationOperator {
    degree: usize,
    nodes: Vec<f64>,
    matrix: Vec<f64>,
    lu: Lu,
    condition: f64,
}

impl CollocationOperator {
    /// Builds and factors the collocation matrix for `nodes`.
    ///
    /// The nodes must be strictly increasing, start at 0 and end at 1.
    pub fn new(nodes: &[f64], degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::Argument("collocation needs degree >= 1".into()));
        }
        if degree > bezier::MAX_DEGREE {
            return Err(Error::Argument(format!("degree {degree} is too large")));
        }
        if nodes.len() != degree + 1 {
            return Err(Error::Argument(format!(
                "degree {degree} needs {} nodes, got {}",
                degree + 1,
                nodes.len()
            )));
        }
        if nodes.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("collocation node".into()));
        }
        if nodes[0] != 0.0 || nodes[degree] != 1.0 {
            return Err(Error::Argument("collocation nodes must start at 0 and end at 1".into()));
        }
        for w in nodes.windows(2) {
            if w[1] == w[0] {
                return Err(Error::Singular(format!("duplicate collocation node {}", w[0])));
            }
            if w[1] < w[0] {
                return Err(Error::Argument("collocation nodes must be increasing".into()));
            }
        }
        let n = degree + 1;
        let mut matrix = alloc::vec![0.0; n * n];
        for (r, &s) in nodes.iter().enumerate() {
            bezier::fill_bernstein_row(degree, s, &mut matrix[r * n..(r + 1) * n]);
        }
        let lu = Lu::factor(&matrix, n)?;
        let condition = linalg::norm_inf(&matrix, n) * linalg::norm_inf(&lu.inverse(), n);
        Ok(Self {
            degree,
            nodes: nodes.to_vec(),
            matrix,
            lu,
            condition,
        })
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Row-major `(D + 1) x (D + 1)` matrix.
    #[inline]
    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.matrix[row * (self.degree + 1) + col]
    }

    /// Infinity-norm condition number of the matrix.
    #[inline]
    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }

    /// Explicit inverse, row-major. Fitting never uses it.
    pub fn inverse(&self) -> Vec<f64> {
        self.lu.inverse()
    }

    /// `B P`: the values of the patch at the nodes.
    pub fn apply(&self, points: &[Point2]) -> Vec<Point2> {
        let n = self.degree + 1;
        self.matrix
            .chunks(n)
            .map(|row| {
                row.iter()
                    .zip(points)
                    .fold(Point2::ZERO, |acc, (b, p)| acc + *p * *b)
            })
            .collect()
    }

    /// Solves `B P = M` coordinate-wise; endpoints are copied from the
    /// samples since the first and last rows of `B` are unit vectors.
    pub(crate) fn solve(&self, samples: &[Point2]) -> Vec<Point2> {
        let n = self.lu.dim();
        debug_assert_eq!(samples.len(), n);
        let mut xs = [0.0f64; bezier::MAX_DEGREE + 1];
        let mut ys = [0.0f64; bezier::MAX_DEGREE + 1];
        for (k, p) in samples.iter().enumerate() {
            xs[k] = p.x;
            ys[k] = p.y;
        }
        self.lu.solve_in_place(&mut xs[..n]);
        self.lu.solve_in_place(&mut ys[..n]);
        let mut out: Vec<Point2> = (0..n).map(|k| Point2::new(xs[k], ys[k])).collect();
        out[0] = samples[0];
        out[n - 1] = samples[n - 1];
        out
    }

    /// The unique patch through `samples` at the operator's nodes.
    pub fn fit_patch(&self, samples: &[Point2]) -> Result<ControlPolygon> {
        if samples.len() != self.degree + 1 {
            return Err(Error::Argument(format!(
                "expected {} samples, got {}",
                self.degree + 1,
                samples.len()
            )));
        }
        for p in samples {
            p.checked()?;
        }
        ControlPolygon::new(self.solve(samples))
    }
}

/// Free-function form of [`CollocationOperator::fit_patch`].
pub fn fit_patch(op: &CollocationOperator, samples: &[Point2]) -> Result<ControlPolygon> {
    op.fit_patch(samples)
}

/// The subdivision of `[0, 1]` used to sample a piecewise curve: the same
/// local nodes on each of `patch_count` patches.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingGrid {
    patch_count: usize,
    degree: usize,
    kind: NodeKind,
    operator: Arc<CollocationOperator>,
}

impl SamplingGrid {
    /// Regular grid, local nodes `j / D`.
    pub fn regular(patch_count: usize, degree: usize) -> Result<Self> {
        Self::new(patch_count, degree, NodeKind::Regular)
    }

    pub fn chebyshev(patch_count: usize, degree: usize) -> Result<Self> {
        Self::new(patch_count, degree, NodeKind::Chebyshev)
    }

    /// Grid with the default degree cap of [`DEFAULT_MAX_FIT_DEGREE`].
    pub fn new(patch_count: usize, degree: usize, kind: NodeKind) -> Result<Self> {
        Self::build(patch_count, degree, kind, false)
    }

    /// Like [`SamplingGrid::new`]; `allow_high_degree` lifts the degree cap
    /// and logs the condition estimate instead.
    pub fn build(
        patch_count: usize,
        degree: usize,
        kind: NodeKind,
        allow_high_degree: bool,
    ) -> Result<Self> {
        let nodes: Vec<f64> = match kind {
            NodeKind::Regular => (0..=degree).map(|j| j as f64 / degree as f64).collect(),
            NodeKind::Chebyshev => (0..=degree)
                .map(|j| match j {
                    0 => 0.0,
                    j if j == degree => 1.0,
                    j => 0.5 * (1.0 - math::cos(core::f64::consts::PI * j as f64 / degree as f64)),
                })
                .collect(),
            NodeKind::Custom => {
                return Err(Error::Argument("use SamplingGrid::with_nodes for custom nodes".into()))
            }
        };
        if degree == 0 {
            return Err(Error::Argument("sampling grids need degree >= 1".into()));
        }
        Self::assemble(patch_count, degree, kind, &nodes, allow_high_degree)
    }

    /// Grid with caller-supplied local nodes.
    pub fn with_nodes(patch_count: usize, nodes: &[f64], allow_high_degree: bool) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Argument("a grid needs at least two local nodes".into()));
        }
        Self::assemble(patch_count, nodes.len() - 1, NodeKind::Custom, nodes, allow_high_degree)
    }

    fn assemble(
        patch_count: usize,
        degree: usize,
        kind: NodeKind,
        nodes: &[f64],
        allow_high_degree: bool,
    ) -> Result<Self> {
        if patch_count == 0 {
            return Err(Error::Argument("a grid needs at least one patch".into()));
        }
        if degree > DEFAULT_MAX_FIT_DEGREE && !allow_high_degree {
            return Err(Error::Argument(format!(
                "degree {degree} exceeds the fitting cap {DEFAULT_MAX_FIT_DEGREE}"
            )));
        }
        let operator = CollocationOperator::new(nodes, degree)?;
        if degree > DEFAULT_MAX_FIT_DEGREE {
            log::warn!(
                "degree {degree} collocation matrix, condition estimate {:e}",
                operator.condition_estimate()
            );
        }
        Ok(Self {
            patch_count,
            degree,
            kind,
            operator: Arc::new(operator),
        })
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
    pub fn kind(&self) -> NodeKind {
        self.kind
    }

    #[inline]
    pub fn local_nodes(&self) -> &[f64] {
        self.operator.nodes()
    }

    #[inline]
    pub fn operator(&self) -> &CollocationOperator {
        &self.operator
    }

    /// Number of sample rows, `patch_count * (degree + 1)`.
    #[inline]
    pub fn row_count(&self) -> usize {
        self.patch_count * (self.degree + 1)
    }

    /// Global parameter of node `j` on patch `i`. Shared nodes
    /// `(i, D)` and `(i + 1, 0)` give bitwise equal values.
    pub fn global_t(&self, patch: usize, node: usize) -> f64 {
        match self.kind {
            NodeKind::Regular => {
                (patch * self.degree + node) as f64 / (self.patch_count * self.degree) as f64
            }
            _ => (patch as f64 + self.local_nodes()[node]) / self.patch_count as f64,
        }
    }

    /// Global parameters of every row, patch after patch.
    pub fn global_nodes(&self) -> Vec<f64> {
        (0..self.patch_count)
            .flat_map(|i| (0..=self.degree).map(move |j| (i, j)))
            .map(|(i, j)| self.global_t(i, j))
            .collect()
    }

    /// Global parameters with shared nodes listed once:
    /// `patch_count * degree + 1` values.
    pub fn distinct_global_nodes(&self) -> Vec<f64> {
        let mut out: Vec<f64> = (0..self.patch_count)
            .flat_map(|i| (0..self.degree).map(move |j| (i, j)))
            .map(|(i, j)| self.global_t(i, j))
            .collect();
        out.push(1.0);
        out
    }

    pub(crate) fn check_shape(&self, patch_count: usize, degree: usize) -> Result<()> {
        if patch_count != self.patch_count || degree != self.degree {
            return Err(Error::Argument(format!(
                "shape {patch_count} patches of degree {degree} does not match grid \
                 ({} patches of degree {})",
                self.patch_count, self.degree
            )));
        }
        Ok(())
    }
}

/// Samples of a piecewise curve at the grid nodes, grouped by patch:
/// row `(i, j)` is stored at `i * (D + 1) + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    patch_count: usize,
    degree: usize,
    closed: bool,
    rows: Vec<Point2>,
}

impl SampleMatrix {
    pub fn new(patch_count: usize, degree: usize, closed: bool, rows: Vec<Point2>) -> Result<Self> {
        check_rows(patch_count, degree, &rows)?;
        for p in &rows {
            p.checked()?;
        }
        Ok(Self {
            patch_count,
            degree,
            closed,
            rows,
        })
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
    pub fn rows(&self) -> &[Point2] {
        &self.rows
    }

    #[inline]
    pub fn row(&self, patch: usize, node: usize) -> Point2 {
        self.rows[patch * (self.degree + 1) + node]
    }

    pub fn patch_rows(&self, patch: usize) -> &[Point2] {
        let n = self.degree + 1;
        &self.rows[patch * n..(patch + 1) * n]
    }
}

pub(crate) fn check_rows(patch_count: usize, degree: usize, rows: &[Point2]) -> Result<()> {
    if patch_count == 0 || degree == 0 {
        return Err(Error::Argument("need at least one patch of degree >= 1".into()));
    }
    if rows.len() != patch_count * (degree + 1) {
        return Err(Error::Argument(format!(
            "expected {} rows for {patch_count} patches of degree {degree}, got {}",
            patch_count * (degree + 1),
            rows.len()
        )));
    }
    Ok(())
}

/// Makes rows that denote the same geometric point bitwise equal by
/// replacing each pair with its midpoint. Pairs further apart than `tol`
/// are a discontinuity.
pub(crate) fn reconcile_shared(
    rows: &[Point2],
    patch_count: usize,
    degree: usize,
    closed: bool,
    tol: f64,
) -> Result<Vec<Point2>> {
    let n = degree + 1;
    let mut out = rows.to_vec();
    let mut merge = |a: usize, b: usize, patch: usize| -> Result<()> {
        let gap = out[a].distance(out[b]);
        if !(gap <= tol) {
            return Err(Error::Discontinuity { patch, gap });
        }
        let mid = out[a].midpoint(out[b]);
        out[a] = mid;
        out[b] = mid;
        Ok(())
    };
    for i in 0..patch_count - 1 {
        merge(i * n + degree, (i + 1) * n, i)?;
    }
    if closed {
        merge(patch_count * n - 1, 0, patch_count - 1)?;
    }
    Ok(out)
}

/// Same as [`reconcile_shared`] without a tolerance: shared values are
/// always averaged.
pub(crate) fn average_shared(rows: &mut [Point2], patch_count: usize, degree: usize, closed: bool) {
    let n = degree + 1;
    let mut merge = |a: usize, b: usize| {
        let mid = rows[a].midpoint(rows[b]);
        rows[a] = mid;
        rows[b] = mid;
    };
    for i in 0..patch_count - 1 {
        merge(i * n + degree, (i + 1) * n);
    }
    if closed {
        merge(patch_count * n - 1, 0);
    }
}

/// Solves every patch block; `rows` must already be reconciled.
pub(crate) fn solve_blocks(grid: &SamplingGrid, rows: &[Point2]) -> Vec<Point2> {
    rows.chunks(grid.degree() + 1)
        .flat_map(|block| grid.operator().solve(block))
        .collect()
}

/// Values of `curve` at every grid node.
pub fn sample_curve(curve: &PiecewiseCurve, grid: &SamplingGrid) -> Result<SampleMatrix> {
    grid.check_shape(curve.patch_count(), curve.degree())?;
    let rows = curve
        .patches()
        .iter()
        .flat_map(|patch| grid.local_nodes().iter().map(move |&s| patch.eval(s)))
        .collect();
    Ok(SampleMatrix {
        patch_count: curve.patch_count(),
        degree: curve.degree(),
        closed: curve.is_closed(),
        rows,
    })
}

/// The piecewise curve whose samples at the grid nodes are `samples`.
pub fn fit_curve(samples: &SampleMatrix, grid: &SamplingGrid) -> Result<PiecewiseCurve> {
    grid.check_shape(samples.patch_count, samples.degree)?;
    let rows = reconcile_shared(
        &samples.rows,
        samples.patch_count,
        samples.degree,
        samples.closed,
        SHARED_SAMPLE_TOLERANCE,
    )?;
    let net = solve_blocks(grid, &rows);
    let patches = net
        .chunks(grid.degree() + 1)
        .map(|c| ControlPolygon::new(c.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    PiecewiseCurve::new(patches, samples.closed)
}

/// Projects a parametric curve onto piecewise Bézier curves by sampling it
/// at the grid nodes and fitting. The result is closed when `f(0)` and
/// `f(1)` agree within [`SHARED_SAMPLE_TOLERANCE`].
pub fn project_function<F>(f: F, grid: &SamplingGrid) -> Result<PiecewiseCurve>
where
    F: Fn(f64) -> Point2,
{
    let rows = grid
        .global_nodes()
        .into_iter()
        .map(|t| f(t).checked())
        .collect::<Result<Vec<_>>>()?;
    let closed = rows[0].distance(rows[rows.len() - 1]) <= SHARED_SAMPLE_TOLERANCE;
    let samples = SampleMatrix::new(grid.patch_count(), grid.degree(), closed, rows)?;
    fit_curve(&samples, grid)
}

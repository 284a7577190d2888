//! Plane shapes as piecewise Bézier curves, and shape optimization as
//! integration of a vector field on control-polygon space.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, image decoding
//! and the command line live in the `shapeflow` companion crate.
//!
//! The pipeline is:
//!
//! * [`bezier`]: Bernstein basis, patch evaluation and [`PiecewiseCurve`].
//! * [`collocation`]: sampling grids, collocation matrices and the
//!   sample/fit isomorphisms between curves and control nets.
//! * [`deform`]: lifting sampled deformations and shape gradients to
//!   control-net increments.
//! * [`energy`]: concrete shape gradients (analytic attractions and an
//!   image edge energy with a balloon force).
//! * [`flow`]: Euler and RK4 integration of the lifted field.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bezier;
pub mod collocation;
pub mod deform;
pub mod energy;
mod error;
pub mod flow;
mod linalg;
mod math;
mod point;

pub use bezier::{ControlPolygon, PiecewiseCurve};
pub use collocation::{CollocationOperator, NodeKind, SampleMatrix, SamplingGrid};
pub use error::{Error, Result};
pub use point::Point2;
pub use deform::{ControlIncrement, DeformationSamples, NodeQuery, ShapeGradient};
pub use flow::{FlowConfig, Method, Status, Trajectory};

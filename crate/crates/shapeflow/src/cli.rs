//! Command-line interface.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use shapeflow_core::collocation::{fit_curve, project_function, sample_curve};
use shapeflow_core::energy::{image_shape_gradient, CircleAttraction, ImageEnergyConfig, PointAttraction};
use shapeflow_core::flow::{integrate, FlowConfig, Method, Status, Trajectory};
use shapeflow_core::{NodeKind, PiecewiseCurve, Point2, SamplingGrid, ShapeGradient};

use crate::error::{Error, Result, EXIT_DEGENERATE, EXIT_MAX_ITERS, EXIT_OK};
use crate::format::{self, Polyline};
use crate::io::{check_output_path, read_bytes, read_to_string, write_atomic};
use crate::pgm;
use crate::svg::{SvgDocument, ViewBox};

#[derive(Debug, Parser)]
#[command(name = "shapeflow", version, about = "Piecewise Bezier curve fitting and shape gradient flows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a curve to samples taken at the collocation nodes.
    Fit(FitArgs),
    /// Sample a curve at the collocation nodes.
    Sample(SampleArgs),
    /// Project a circle or polyline onto the curve space.
    Project(ProjectArgs),
    /// Integrate the gradient flow of an analytic energy.
    Flow(FlowArgs),
    /// Segment a grayscale image with an inflating contour.
    Segment(SegmentArgs),
    /// Render a curve and/or a trajectory as SVG.
    #[command(name = "export-svg")]
    ExportSvg(ExportSvgArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Nodes {
    Regular,
    Chebyshev,
}

impl From<Nodes> for NodeKind {
    fn from(n: Nodes) -> Self {
        match n {
            Nodes::Regular => NodeKind::Regular,
            Nodes::Chebyshev => NodeKind::Chebyshev,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Euler,
    Rk4,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Euler => Method::Euler,
            MethodArg::Rk4 => Method::Rk4,
        }
    }
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Collocation nodes within each patch.
    #[arg(long, value_enum, default_value = "regular")]
    pub nodes: Nodes,
    /// Permit fitting degrees above 10 (ill-conditioned).
    #[arg(long)]
    pub allow_high_degree: bool,
}

impl GridArgs {
    fn grid(&self, patches: usize, degree: usize) -> Result<SamplingGrid> {
        Ok(SamplingGrid::build(patches, degree, self.nodes.into(), self.allow_high_degree)?)
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Sample CSV with header patch,node_index,global_t,x,y.
    #[arg(long)]
    pub samples: PathBuf,
    /// Number of patches (N + 1).
    #[arg(long)]
    pub patches: usize,
    #[arg(long)]
    pub degree: usize,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Output curve JSON.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub curve: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Output sample CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// `circle:cx,cy,r` or `csv:<path>` (columns x,y and optionally global_t).
    #[arg(long)]
    pub target: String,
    #[arg(long)]
    pub patches: usize,
    #[arg(long)]
    pub degree: usize,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    /// Starting curve JSON.
    #[arg(long)]
    pub curve: PathBuf,
    /// `circle:cx,cy,r` (distance to a circle) or `points:<csv>` (attraction
    /// to a parametrized polyline).
    #[arg(long)]
    pub energy: String,
    #[arg(long, value_enum, default_value = "rk4")]
    pub method: MethodArg,
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = FlowConfig::DEFAULT_TOL)]
    pub tol: f64,
    /// Arc-length resampling period in steps; 0 disables it.
    #[arg(long, default_value_t = 0)]
    pub resample_every: usize,
    /// Record every k-th iterate in the trajectory (the last is always kept).
    #[arg(long, default_value_t = 1)]
    pub record_every: usize,
    #[arg(long, value_enum, default_value = "regular")]
    pub nodes: Nodes,
    /// Output trajectory JSON.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    /// 8-bit P2 or P5 PGM image.
    #[arg(long)]
    pub image: PathBuf,
    /// Initial contour `circle:cx,cy,r` in pixel coordinates.
    #[arg(long)]
    pub init: String,
    #[arg(long, default_value_t = 8)]
    pub patches: usize,
    #[arg(long, default_value_t = 3)]
    pub degree: usize,
    /// Gaussian pre-smoothing in pixels.
    #[arg(long, default_value_t = 2.0)]
    pub sigma: f64,
    /// Balloon speed; positive inflates.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub balloon: f64,
    /// Edge contrast of the stopping function relative to the strongest edge.
    #[arg(long, default_value_t = ImageEnergyConfig::DEFAULT_CONTRAST)]
    pub contrast: f64,
    #[arg(long, value_enum, default_value = "rk4")]
    pub method: MethodArg,
    #[arg(long, default_value_t = 0.5)]
    pub step: f64,
    #[arg(long, default_value_t = 2000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-2)]
    pub tol: f64,
    #[arg(long, default_value_t = 25)]
    pub resample_every: usize,
    /// Output contour JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional SVG overlay of the initial and final contours on the image.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Optional trajectory JSON of every iterate.
    #[arg(long)]
    pub traj: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("input").required(true).multiple(true).args(["curve", "traj"])))]
pub struct ExportSvgArgs {
    #[arg(long)]
    pub curve: Option<PathBuf>,
    /// Trajectory JSON; iterates are overlaid with increasing opacity.
    #[arg(long)]
    pub traj: Option<PathBuf>,
    /// Draw every k-th recorded iterate (the last is always drawn).
    #[arg(long, default_value_t = 1)]
    pub every: usize,
    /// Optional PGM drawn underneath.
    #[arg(long)]
    pub image: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Target curves accepted by `project`, `flow` and `segment`.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Circle { center: Point2, radius: f64 },
    Polyline(PathBuf),
}

impl Target {
    /// Parses `circle:cx,cy,r` or `<file_prefix>:<path>`.
    pub fn parse(spec: &str, file_prefix: &str) -> Result<Self> {
        let bad = || {
            Error::Usage(format!(
                "invalid target {spec:?}: expected circle:cx,cy,r or {file_prefix}:<path>"
            ))
        };
        let (kind, rest) = spec.split_once(':').ok_or_else(bad)?;
        match kind {
            "circle" => {
                let v: Vec<f64> = rest
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad())?;
                match v[..] {
                    [cx, cy, r] if cx.is_finite() && cy.is_finite() && r.is_finite() && r > 0.0 => {
                        Ok(Target::Circle { center: Point2::new(cx, cy), radius: r })
                    }
                    _ => Err(bad()),
                }
            }
            k if k == file_prefix && !rest.is_empty() => Ok(Target::Polyline(PathBuf::from(rest))),
            _ => Err(bad()),
        }
    }
}

/// The circle `center + r (cos 2 pi t, sin 2 pi t)`.
pub fn circle_point(center: Point2, radius: f64, t: f64) -> Point2 {
    let a = TAU * t;
    center + Point2::new(a.cos(), a.sin()) * radius
}

fn load_polyline(path: &Path) -> Result<Polyline> {
    format::polyline_from_csv(&read_to_string(path)?, path)
}

fn load_curve(path: &Path) -> Result<PiecewiseCurve> {
    format::curve_from_json(&read_to_string(path)?, path)
}

fn status_code(status: Status) -> u8 {
    match status {
        Status::Converged => EXIT_OK,
        Status::MaxIters => EXIT_MAX_ITERS,
        Status::Degenerate => EXIT_DEGENERATE,
    }
}

fn report(traj: &Trajectory) {
    let last = traj.last();
    log::info!(
        "{} after {} steps, stationarity {}",
        traj.status.as_str(),
        traj.steps,
        last.stationarity
    );
    if let Some(e) = &traj.failure {
        eprintln!("flow stopped: {e}");
    }
}

/// Runs one command and returns its exit code. Errors map to codes via
/// [`Error::exit_code`].
pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Fit(a) => fit(&a),
        Command::Sample(a) => sample(&a),
        Command::Project(a) => project(&a),
        Command::Flow(a) => flow(&a),
        Command::Segment(a) => segment(&a),
        Command::ExportSvg(a) => export_svg(&a),
    }
}

fn fit(a: &FitArgs) -> Result<u8> {
    check_output_path(&a.out)?;
    let grid = a.grid.grid(a.patches, a.degree)?;
    let rows = format::samples_from_csv(&read_to_string(&a.samples)?, &a.samples)?;
    let samples = format::assemble_samples(&rows, &grid, &a.samples)?;
    let curve = fit_curve(&samples, &grid)?;
    write_atomic(&a.out, format::curve_to_json(&curve).as_bytes())?;
    Ok(EXIT_OK)
}

fn sample(a: &SampleArgs) -> Result<u8> {
    check_output_path(&a.out)?;
    let curve = load_curve(&a.curve)?;
    let grid = a.grid.grid(curve.patch_count(), curve.degree())?;
    let samples = sample_curve(&curve, &grid)?;
    write_atomic(&a.out, format::samples_to_csv(&samples, &grid).as_bytes())?;
    Ok(EXIT_OK)
}

fn project(a: &ProjectArgs) -> Result<u8> {
    check_output_path(&a.out)?;
    let target = Target::parse(&a.target, "csv")?;
    let grid = a.grid.grid(a.patches, a.degree)?;
    let curve = match target {
        Target::Circle { center, radius } => project_function(|t| circle_point(center, radius, t), &grid)?,
        Target::Polyline(path) => {
            let line = load_polyline(&path)?;
            project_function(|t| line.eval(t), &grid)?
        }
    };
    write_atomic(&a.out, format::curve_to_json(&curve).as_bytes())?;
    Ok(EXIT_OK)
}

fn flow_config(method: MethodArg, step: f64, max_iters: usize, tol: f64, resample_every: usize, record_every: usize) -> Result<FlowConfig> {
    let cfg = FlowConfig {
        max_iters,
        tol,
        resample_every,
        record_every,
        ..FlowConfig::new(method.into(), step)
    };
    cfg.validate()?;
    Ok(cfg)
}

fn flow(a: &FlowArgs) -> Result<u8> {
    check_output_path(&a.out)?;
    let target = Target::parse(&a.energy, "points")?;
    let cfg = flow_config(a.method, a.step, a.max_iters, a.tol, a.resample_every, a.record_every)?;
    let start = load_curve(&a.curve)?;
    let grid = SamplingGrid::new(start.patch_count(), start.degree(), a.nodes.into())?;
    let traj = match target {
        Target::Circle { center, radius } => {
            let energy = CircleAttraction::new(center, radius)?;
            integrate(&start, &energy as &dyn ShapeGradient, &grid, &cfg)?
        }
        Target::Polyline(path) => {
            let line = load_polyline(&path)?;
            let energy = PointAttraction::new(|t| line.eval(t));
            integrate(&start, &energy as &dyn ShapeGradient, &grid, &cfg)?
        }
    };
    report(&traj);
    write_atomic(&a.out, format::trajectory_to_json(&traj).as_bytes())?;
    Ok(status_code(traj.status))
}

fn segment(a: &SegmentArgs) -> Result<u8> {
    for out in [Some(&a.out), a.svg.as_ref(), a.traj.as_ref()].into_iter().flatten() {
        check_output_path(out)?;
    }
    let Target::Circle { center, radius } = Target::parse(&a.init, "circle")? else {
        return Err(Error::Usage(format!("--init must be circle:cx,cy,r, got {:?}", a.init)));
    };
    let energy_cfg = ImageEnergyConfig::new(a.sigma, a.balloon).with_contrast(a.contrast);
    energy_cfg.validate()?;
    let record_every = if a.traj.is_some() { 1 } else { a.max_iters.max(1) };
    let cfg = flow_config(a.method, a.step, a.max_iters, a.tol, a.resample_every, record_every)?;

    let bytes = read_bytes(&a.image)?;
    let image = pgm::decode(&bytes).map_err(|source| Error::Pgm { path: a.image.clone(), source })?;
    let (w, h) = (image.width() as f64, image.height() as f64);
    let inside = center.x - radius >= 0.0
        && center.y - radius >= 0.0
        && center.x + radius <= w - 1.0
        && center.y + radius <= h - 1.0;
    if !inside {
        return Err(Error::Usage(format!(
            "initial circle centre ({}, {}) radius {radius} leaves the {}x{} image",
            center.x,
            center.y,
            image.width(),
            image.height()
        )));
    }

    let grid = SamplingGrid::regular(a.patches, a.degree)?;
    let start = project_function(|t| circle_point(center, radius, t), &grid)?;
    let energy = image_shape_gradient(&energy_cfg, &image)?;
    let traj = integrate(&start, &energy, &grid, &cfg)?;
    report(&traj);

    let contour = format::curve_to_json(traj.final_curve());
    let overlay = a.svg.as_ref().map(|_| {
        SvgDocument::new(ViewBox::image(image.width(), image.height()))
            .raster(&image)
            .curve(&start, "#1f77b4", 0.6)
            .curve(traj.final_curve(), "#d62728", 1.0)
            .finish()
    });
    if let (Some(path), Some(svg)) = (&a.svg, overlay) {
        write_atomic(path, svg.as_bytes())?;
    }
    if let Some(path) = &a.traj {
        write_atomic(path, format::trajectory_to_json(&traj).as_bytes())?;
    }
    write_atomic(&a.out, contour.as_bytes())?;
    Ok(status_code(traj.status))
}

fn export_svg(a: &ExportSvgArgs) -> Result<u8> {
    check_output_path(&a.out)?;
    if a.every == 0 {
        return Err(Error::Usage("--every must be at least 1".into()));
    }
    let curve = a.curve.as_deref().map(load_curve).transpose()?;
    let record = match &a.traj {
        Some(path) => Some(format::trajectory_from_json(&read_to_string(path)?, path)?),
        None => None,
    };
    let image = match &a.image {
        Some(path) => {
            let bytes = read_bytes(path)?;
            Some(pgm::decode(&bytes).map_err(|source| Error::Pgm { path: path.clone(), source })?)
        }
        None => None,
    };

    let mut iterates: Vec<&PiecewiseCurve> = Vec::new();
    if let Some(record) = &record {
        let n = record.iterates.len();
        iterates.extend(
            record
                .iterates
                .iter()
                .enumerate()
                .filter(|(k, _)| k % a.every == 0 || *k == n - 1)
                .map(|(_, it)| &it.curve),
        );
    }
    let view = match &image {
        Some(img) => ViewBox::image(img.width(), img.height()),
        None => ViewBox::around(iterates.iter().copied().chain(curve.as_ref())),
    };
    let mut doc = SvgDocument::new(view);
    if let Some(img) = &image {
        doc.raster(img);
    }
    doc.trajectory(&iterates, "#1f77b4");
    if let Some(c) = &curve {
        doc.curve(c, "#d62728", 1.0);
    }
    write_atomic(&a.out, doc.finish().as_bytes())?;
    Ok(EXIT_OK)
}

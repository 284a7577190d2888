//! Curve, increment and trajectory JSON; sample and polyline CSV.
//!
//! Writers are deterministic and print every number with 17 significant
//! digits, so reading a file back yields bit-identical values.

use std::path::Path;

use serde::Deserialize;
use shapeflow_core::collocation::SHARED_SAMPLE_TOLERANCE;
use shapeflow_core::flow::Trajectory;
use shapeflow_core::{ControlIncrement, ControlPolygon, PiecewiseCurve, Point2, SampleMatrix, SamplingGrid};

use crate::error::{Error, Result};
use crate::number::format_f64;

fn push_point(out: &mut String, p: Point2) {
    out.push('[');
    out.push_str(&format_f64(p.x));
    out.push_str(", ");
    out.push_str(&format_f64(p.y));
    out.push(']');
}

fn push_patch(out: &mut String, points: &[Point2]) {
    out.push('[');
    for (k, p) in points.iter().enumerate() {
        if k > 0 {
            out.push_str(", ");
        }
        push_point(out, *p);
    }
    out.push(']');
}

/// `{"degree": D, "closed": b, "patches": [...]}` on one line.
fn push_net_inline<'a>(out: &mut String, degree: usize, closed: bool, patches: impl Iterator<Item = &'a [Point2]>) {
    out.push_str(&format!("{{\"degree\": {degree}, \"closed\": {closed}, \"patches\": ["));
    for (i, patch) in patches.enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        push_patch(out, patch);
    }
    out.push_str("]}");
}

/// Same object, one patch per line.
fn net_document<'a>(degree: usize, closed: bool, patches: impl Iterator<Item = &'a [Point2]>) -> String {
    let mut out = format!("{{\n  \"degree\": {degree},\n  \"closed\": {closed},\n  \"patches\": [\n");
    let mut first = true;
    for patch in patches {
        if !first {
            out.push_str(",\n");
        }
        first = false;
        out.push_str("    ");
        push_patch(&mut out, patch);
    }
    out.push_str("\n  ]\n}\n");
    out
}

pub fn curve_to_json(curve: &PiecewiseCurve) -> String {
    net_document(curve.degree(), curve.is_closed(), curve.patches().iter().map(ControlPolygon::points))
}

pub fn increment_to_json(inc: &ControlIncrement) -> String {
    net_document(inc.degree(), inc.is_closed(), (0..inc.patch_count()).map(|i| inc.patch(i)))
}

pub fn trajectory_to_json(traj: &Trajectory) -> String {
    let mut out = format!("{{\n  \"status\": \"{}\",\n  \"iterates\": [\n", traj.status.as_str());
    for (k, it) in traj.iterates.iter().enumerate() {
        if k > 0 {
            out.push_str(",\n");
        }
        let energy = it.energy.map_or_else(|| "null".to_owned(), format_f64);
        out.push_str(&format!(
            "    {{\"iter\": {}, \"stationarity\": {}, \"energy\": {energy}, \"curve\": ",
            it.iter,
            format_f64(it.stationarity)
        ));
        let c = &it.curve;
        push_net_inline(&mut out, c.degree(), c.is_closed(), c.patches().iter().map(ControlPolygon::points));
        out.push('}');
    }
    out.push_str("\n  ]\n}\n");
    out
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NetDoc {
    degree: usize,
    closed: bool,
    patches: Vec<Vec<[f64; 2]>>,
}

impl NetDoc {
    /// Flattened points after checking the patch shapes.
    fn into_points(self, path: &Path) -> Result<(usize, bool, usize, Vec<Point2>)> {
        if self.patches.is_empty() {
            return Err(Error::format(path, "\"patches\" is empty"));
        }
        let count = self.patches.len();
        let mut points = Vec::with_capacity(count * (self.degree + 1));
        for (i, patch) in self.patches.into_iter().enumerate() {
            if patch.len() != self.degree + 1 {
                return Err(Error::format(
                    path,
                    format!("patch {i} has {} points, degree {} needs {}", patch.len(), self.degree, self.degree + 1),
                ));
            }
            points.extend(patch.into_iter().map(Point2::from));
        }
        Ok((self.degree, self.closed, count, points))
    }

    fn into_curve(self, path: &Path) -> Result<PiecewiseCurve> {
        let (degree, closed, count, points) = self.into_points(path)?;
        let patches = points
            .chunks(degree + 1)
            .map(|c| ControlPolygon::new(c.to_vec()))
            .collect::<Result<Vec<_>, _>>()?;
        debug_assert_eq!(patches.len(), count);
        Ok(PiecewiseCurve::new(patches, closed)?)
    }
}

fn parse_json<'a, T: Deserialize<'a>>(text: &'a str, path: &Path) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::format(path, e.to_string()))
}

/// Reads a curve, enforcing exact joins (and closure when `"closed"`).
pub fn curve_from_json(text: &str, path: &Path) -> Result<PiecewiseCurve> {
    parse_json::<NetDoc>(text, path)?.into_curve(path)
}

pub fn increment_from_json(text: &str, path: &Path) -> Result<ControlIncrement> {
    let (degree, closed, count, points) = parse_json::<NetDoc>(text, path)?.into_points(path)?;
    Ok(ControlIncrement::new(count, degree, closed, points)?)
}

/// A trajectory as read back from JSON.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub status: String,
    pub iterates: Vec<RecordedIterate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordedIterate {
    pub iter: usize,
    pub stationarity: Option<f64>,
    pub energy: Option<f64>,
    pub curve: PiecewiseCurve,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TrajectoryDoc {
    status: String,
    iterates: Vec<IterateDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IterateDoc {
    iter: usize,
    stationarity: Option<f64>,
    energy: Option<f64>,
    curve: NetDoc,
}

pub fn trajectory_from_json(text: &str, path: &Path) -> Result<TrajectoryRecord> {
    let doc: TrajectoryDoc = parse_json(text, path)?;
    let iterates = doc
        .iterates
        .into_iter()
        .map(|it| {
            Ok(RecordedIterate {
                iter: it.iter,
                stationarity: it.stationarity,
                energy: it.energy,
                curve: it.curve.into_curve(path)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if iterates.is_empty() {
        return Err(Error::format(path, "trajectory has no iterates"));
    }
    Ok(TrajectoryRecord {
        status: doc.status,
        iterates,
    })
}

const SAMPLE_HEADER: [&str; 5] = ["patch", "node_index", "global_t", "x", "y"];

/// One line per grid node: `patch,node_index,global_t,x,y`.
pub fn samples_to_csv(samples: &SampleMatrix, grid: &SamplingGrid) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SAMPLE_HEADER).expect("in-memory write");
    for i in 0..samples.patch_count() {
        for j in 0..=samples.degree() {
            let p = samples.row(i, j);
            w.write_record([
                i.to_string(),
                j.to_string(),
                format_f64(grid.global_t(i, j)),
                format_f64(p.x),
                format_f64(p.y),
            ])
            .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct SampleRow {
    pub patch: usize,
    pub node_index: usize,
    pub global_t: f64,
    pub x: f64,
    pub y: f64,
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes())
}

fn csv_error(path: &Path, e: &csv::Error) -> Error {
    Error::format(path, e.to_string())
}

pub fn samples_from_csv(text: &str, path: &Path) -> Result<Vec<SampleRow>> {
    let mut rdr = csv_reader(text);
    let headers = rdr.headers().map_err(|e| csv_error(path, &e))?.clone();
    if headers.iter().ne(SAMPLE_HEADER) {
        return Err(Error::format(
            path,
            format!("expected header {}, found {}", SAMPLE_HEADER.join(","), headers.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    rdr.deserialize().map(|r| r.map_err(|e| csv_error(path, &e))).collect()
}

/// Arranges CSV rows into a sample matrix for `grid`.
///
/// Every `(patch, node_index)` pair must appear exactly once. Rows whose
/// `global_t` disagrees with the grid, or shared rows that do not match,
/// are inconsistent data rather than format errors. The curve is taken as
/// closed when its first and last samples agree.
pub fn assemble_samples(rows: &[SampleRow], grid: &SamplingGrid, path: &Path) -> Result<SampleMatrix> {
    let (count, degree) = (grid.patch_count(), grid.degree());
    if rows.len() != grid.row_count() {
        return Err(Error::format(
            path,
            format!("expected {} rows for {count} patches of degree {degree}, found {}", grid.row_count(), rows.len()),
        ));
    }
    let mut slots: Vec<Option<Point2>> = vec![None; rows.len()];
    for (line, r) in rows.iter().enumerate() {
        if r.patch >= count || r.node_index > degree {
            return Err(Error::format(
                path,
                format!("data row {}: (patch {}, node {}) is outside the grid", line + 1, r.patch, r.node_index),
            ));
        }
        let slot = &mut slots[r.patch * (degree + 1) + r.node_index];
        if slot.is_some() {
            return Err(Error::format(
                path,
                format!("data row {}: (patch {}, node {}) appears twice", line + 1, r.patch, r.node_index),
            ));
        }
        let expected = grid.global_t(r.patch, r.node_index);
        if (r.global_t - expected).abs() > SHARED_SAMPLE_TOLERANCE {
            return Err(Error::Inconsistent(format!(
                "{}: (patch {}, node {}) has global_t {} but the grid places it at {}",
                path.display(),
                r.patch,
                r.node_index,
                r.global_t,
                expected
            )));
        }
        *slot = Some(Point2::new(r.x, r.y));
    }
    let points: Vec<Point2> = slots.into_iter().map(|p| p.expect("all slots filled")).collect();
    let closed = points[0].distance(points[points.len() - 1]) <= SHARED_SAMPLE_TOLERANCE;
    Ok(SampleMatrix::new(count, degree, closed, points)?)
}

/// A polyline target, interpolated linearly in its parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    points: Vec<Point2>,
    params: Vec<f64>,
}

impl Polyline {
    /// Parametrizes `points` by normalized cumulative chord length.
    pub fn by_chord_length(points: Vec<Point2>) -> Option<Self> {
        if points.is_empty() {
            return None;
        }
        let mut params = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        params.push(0.0);
        for w in points.windows(2) {
            acc += w[0].distance(w[1]);
            params.push(acc);
        }
        if acc > 0.0 {
            params.iter_mut().for_each(|s| *s /= acc);
        }
        Some(Self { points, params })
    }

    /// `params` must be finite and non-decreasing.
    pub fn with_params(points: Vec<Point2>, params: Vec<f64>) -> Option<Self> {
        let ok = !points.is_empty()
            && points.len() == params.len()
            && params.iter().all(|s| s.is_finite())
            && params.windows(2).all(|w| w[0] <= w[1]);
        ok.then_some(Self { points, params })
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    /// Position at parameter `t`, clamped to the parameter range.
    pub fn eval(&self, t: f64) -> Point2 {
        let n = self.points.len();
        let upper = self.params.partition_point(|s| *s <= t);
        if upper == 0 {
            return self.points[0];
        }
        if upper == n {
            return self.points[n - 1];
        }
        let (s0, s1) = (self.params[upper - 1], self.params[upper]);
        let u = (t - s0) / (s1 - s0);
        self.points[upper - 1].lerp(self.points[upper], u)
    }
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h == name)
}

/// Reads a polyline from CSV with `x` and `y` columns. A `global_t` column,
/// when present, supplies the parameters; otherwise chord length does.
pub fn polyline_from_csv(text: &str, path: &Path) -> Result<Polyline> {
    let mut rdr = csv_reader(text);
    let headers = rdr.headers().map_err(|e| csv_error(path, &e))?.clone();
    let (Some(xi), Some(yi)) = (column(&headers, "x"), column(&headers, "y")) else {
        return Err(Error::format(path, "header must name columns x and y"));
    };
    let ti = column(&headers, "global_t");
    let mut points = Vec::new();
    let mut params = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, &e))?;
        let field = |k: usize| -> Result<f64> {
            let raw = record.get(k).unwrap_or("");
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::format(path, format!("data row {}: {raw:?} is not a finite number", line + 1)))
        };
        points.push(Point2::new(field(xi)?, field(yi)?));
        if let Some(ti) = ti {
            params.push(field(ti)?);
        }
    }
    if points.is_empty() {
        return Err(Error::format(path, "polyline has no points"));
    }
    match ti {
        Some(_) => Polyline::with_params(points, params)
            .ok_or_else(|| Error::format(path, "global_t must be non-decreasing")),
        None => Ok(Polyline::by_chord_length(points).expect("non-empty")),
    }
}

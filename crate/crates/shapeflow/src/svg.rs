//! SVG 1.1 rendering of curves, trajectories and image overlays.

use std::fmt::Write as _;
use std::io::Cursor;

use base64::Engine as _;
use image::{GrayImage, ImageFormat};
use shapeflow_core::energy::ScalarField;
use shapeflow_core::PiecewiseCurve;

/// Points per patch when a patch has no native SVG segment.
pub const POLYLINE_POINTS: usize = 64;

const HEADER_NOTE: &str = "Coordinates follow the image convention: origin at the top-left, \
x to the right, y downwards. Curve coordinates are written unchanged, so pixel (column, row) \
is centred at (x, y) = (column, row).";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewBox {
    pub min_x: f64,
    pub min_y: f64,
    pub width: f64,
    pub height: f64,
}

impl ViewBox {
    /// The pixel area of a `width x height` image.
    pub fn image(width: usize, height: usize) -> Self {
        Self {
            min_x: -0.5,
            min_y: -0.5,
            width: width as f64,
            height: height as f64,
        }
    }

    /// Bounding box of the control points with a 5% margin.
    pub fn around<'a>(curves: impl IntoIterator<Item = &'a PiecewiseCurve>) -> Self {
        let (mut lo_x, mut lo_y, mut hi_x, mut hi_y) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in curves.into_iter().flat_map(|c| c.control_points()) {
            lo_x = lo_x.min(p.x);
            lo_y = lo_y.min(p.y);
            hi_x = hi_x.max(p.x);
            hi_y = hi_y.max(p.y);
        }
        if !lo_x.is_finite() {
            return Self { min_x: 0.0, min_y: 0.0, width: 1.0, height: 1.0 };
        }
        let span = (hi_x - lo_x).max(hi_y - lo_y).max(1e-9);
        let margin = 0.05 * span;
        Self {
            min_x: lo_x - margin,
            min_y: lo_y - margin,
            width: hi_x - lo_x + 2.0 * margin,
            height: hi_y - lo_y + 2.0 * margin,
        }
    }
}

/// Path data for `curve`: one `M`, then per patch an `L`, `Q` or `C`
/// segment with the control points verbatim when the degree is at most 3,
/// otherwise a polyline through [`POLYLINE_POINTS`] points of the patch.
/// Closed curves end with `Z`.
pub fn path_data(curve: &PiecewiseCurve) -> String {
    let mut d = String::new();
    let start = curve.patch(0).first();
    write!(d, "M {} {}", start.x, start.y).unwrap();
    for patch in curve.patches() {
        let pts = patch.points();
        match curve.degree() {
            1 => write!(d, " L {} {}", pts[1].x, pts[1].y).unwrap(),
            2 => write!(d, " Q {} {} {} {}", pts[1].x, pts[1].y, pts[2].x, pts[2].y).unwrap(),
            3 => write!(
                d,
                " C {} {} {} {} {} {}",
                pts[1].x, pts[1].y, pts[2].x, pts[2].y, pts[3].x, pts[3].y
            )
            .unwrap(),
            _ => {
                d.push_str(" L");
                for k in 1..POLYLINE_POINTS {
                    let p = patch.eval(k as f64 / (POLYLINE_POINTS - 1) as f64);
                    write!(d, " {} {}", p.x, p.y).unwrap();
                }
            }
        }
    }
    if curve.is_closed() {
        d.push_str(" Z");
    }
    d
}

/// Incrementally assembled SVG document.
#[derive(Debug, Clone)]
pub struct SvgDocument {
    view: ViewBox,
    body: String,
}

impl SvgDocument {
    pub fn new(view: ViewBox) -> Self {
        Self {
            view,
            body: String::new(),
        }
    }

    fn stroke_width(&self) -> f64 {
        0.004 * self.view.width.max(self.view.height)
    }

    /// Embeds `field` (values in `[0, 1]`) as a grayscale PNG raster, one
    /// SVG unit per pixel.
    pub fn raster(&mut self, field: &ScalarField) -> &mut Self {
        let bytes: Vec<u8> = field
            .values()
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect();
        let img = GrayImage::from_raw(field.width() as u32, field.height() as u32, bytes)
            .expect("buffer matches dimensions");
        let mut png = Cursor::new(Vec::new());
        img.write_to(&mut png, ImageFormat::Png).expect("in-memory PNG encode");
        let data = base64::engine::general_purpose::STANDARD.encode(png.into_inner());
        writeln!(
            self.body,
            "  <image x=\"-0.5\" y=\"-0.5\" width=\"{}\" height=\"{}\" style=\"image-rendering:pixelated\" xlink:href=\"data:image/png;base64,{data}\"/>",
            field.width(),
            field.height()
        )
        .unwrap();
        self
    }

    pub fn curve(&mut self, curve: &PiecewiseCurve, color: &str, opacity: f64) -> &mut Self {
        writeln!(
            self.body,
            "  <path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"{}\" stroke-opacity=\"{}\"/>",
            path_data(curve),
            self.stroke_width(),
            opacity
        )
        .unwrap();
        self
    }

    /// Draws `curves` oldest first with opacity rising linearly to 1.
    pub fn trajectory(&mut self, curves: &[&PiecewiseCurve], color: &str) -> &mut Self {
        let n = curves.len();
        for (k, c) in curves.iter().enumerate() {
            let opacity = if n == 1 { 1.0 } else { 0.15 + 0.85 * k as f64 / (n - 1) as f64 };
            self.curve(c, color, opacity);
        }
        self
    }

    pub fn finish(&self) -> String {
        let v = self.view;
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <!-- shapeflow {} -->\n\
             <!-- {HEADER_NOTE} -->\n\
             <svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:xlink=\"http://www.w3.org/1999/xlink\" version=\"1.1\" viewBox=\"{} {} {} {}\">\n\
             {}</svg>\n",
            env!("CARGO_PKG_VERSION"),
            v.min_x,
            v.min_y,
            v.width,
            v.height,
            self.body
        )
    }
}

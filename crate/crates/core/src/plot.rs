//! The self-stability counterexample figure: image disks of `|z| <= r`
//! under `H`, the curve `G(r e^{i theta})` and the marked point `G(z0)`.
//!
//! Rendering depends only on the point lists, so a figure re-read from its
//! CSV export renders to the same bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::janowski::JanowskiParams;
use crate::output::{csv_string, format_f64, format_fixed, write_atomic};
use crate::series::RayOptions;
use crate::subordination::{mobius_image_disk, published_disk, GFunction};

pub const MIN_CURVE_POINTS: usize = 1024;
pub const DISK_POINTS: usize = 1024;

/// Longer side of the drawing in SVG user units.
const CANVAS: f64 = 800.0;
const PAD: f64 = 0.05;
const DECIMALS: usize = 6;

pub const CSV_FILES: [&str; 4] = ["disk_boundary.csv", "disk_boundary_published.csv", "g_curve.csv", "point.csv"];

#[derive(Debug, Clone, PartialEq)]
pub struct FigureData {
    /// Boundary of the image disk of `|z| <= r` under `H`.
    pub mobius_disk: Vec<Complex64>,
    /// Boundary of the disk from the published closed form; empty when it
    /// degenerates.
    pub published_disk: Vec<Complex64>,
    pub g_curve: Vec<Complex64>,
    pub point: Complex64,
}

/// Samples the figure; a branch failure anywhere on the curve is an error.
pub fn figure_data(
    params: &JanowskiParams,
    n: usize,
    r: f64,
    z0: Complex64,
    curve_points: usize,
    ray: RayOptions,
) -> Result<FigureData> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidArgument(format!("need 0 < r < 1, got {r}")));
    }
    if curve_points < MIN_CURVE_POINTS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_CURVE_POINTS} curve points, got {curve_points}"
        )));
    }
    if !(z0.norm() < 1.0) {
        return Err(Error::InvalidArgument(format!("z0 = {z0} is not in the open unit disk")));
    }
    let g = GFunction::new(params, n, ray);
    let g_curve = (0..curve_points)
        .map(|k| g.eval(Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / curve_points as f64)))
        .collect::<Result<Vec<_>>>()?;
    let published = match published_disk(params, r) {
        Ok(d) => d.boundary_points(DISK_POINTS),
        Err(Error::DegenerateDisk { .. }) => Vec::new(),
        Err(e) => return Err(e),
    };
    Ok(FigureData {
        mobius_disk: mobius_image_disk(params, r)?.boundary_points(DISK_POINTS),
        published_disk: published,
        g_curve,
        point: g.eval(z0)?,
    })
}

fn points_csv(points: &[Complex64]) -> String {
    csv_string(&["re", "im"], points.iter().map(|z| vec![format_f64(z.re), format_f64(z.im)]))
}

/// Writes the four CSV files into `dir`, which must exist.
pub fn write_csvs(data: &FigureData, dir: &Path) -> std::io::Result<()> {
    let files = [
        points_csv(&data.mobius_disk),
        points_csv(&data.published_disk),
        points_csv(&data.g_curve),
        points_csv(&[data.point]),
    ];
    for (name, body) in CSV_FILES.iter().zip(files) {
        write_atomic(&dir.join(name), body.as_bytes())?;
    }
    Ok(())
}

fn read_points(path: &Path) -> Result<Vec<Complex64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let bad = |msg: String| Error::InvalidArgument(format!("{}: {msg}", path.display()));
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["re", "im"] {
        return Err(bad(format!("expected header re,im, got {}", headers.iter().collect::<Vec<_>>().join(","))));
    }
    rdr.records()
        .map(|rec| {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| bad("short row".into()))?
                    .parse::<f64>()
                    .map_err(|e| bad(e.to_string()))
            };
            Ok(Complex64::new(parse(0)?, parse(1)?))
        })
        .collect()
}

/// Reads a figure back from [`write_csvs`] output.
pub fn read_csvs(dir: &Path) -> Result<FigureData> {
    let mut sets = CSV_FILES
        .iter()
        .map(|name| read_points(&dir.join(name)))
        .collect::<Result<Vec<_>>>()?;
    let point = match sets.pop().as_deref() {
        Some([p]) => *p,
        _ => return Err(Error::InvalidArgument("point.csv must hold exactly one point".into())),
    };
    let g_curve = sets.pop().unwrap();
    let published_disk = sets.pop().unwrap();
    let mobius_disk = sets.pop().unwrap();
    if mobius_disk.is_empty() || g_curve.is_empty() {
        return Err(Error::InvalidArgument("disk boundary and G curve must be nonempty".into()));
    }
    Ok(FigureData {
        mobius_disk,
        published_disk,
        g_curve,
        point,
    })
}

struct Frame {
    x_min: f64,
    y_max: f64,
    scale: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn fit(data: &FigureData) -> Frame {
        let all = data
            .mobius_disk
            .iter()
            .chain(&data.published_disk)
            .chain(&data.g_curve)
            .chain(std::iter::once(&data.point));
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for z in all {
            x0 = x0.min(z.re);
            x1 = x1.max(z.re);
            y0 = y0.min(z.im);
            y1 = y1.max(z.im);
        }
        let span = (x1 - x0).max(y1 - y0).max(1e-9);
        let pad = PAD * span;
        let (x0, x1, y0, y1) = (x0 - pad, x1 + pad, y0 - pad, y1 + pad);
        let scale = CANVAS / (x1 - x0).max(y1 - y0);
        Frame {
            x_min: x0,
            y_max: y1,
            scale,
            width: (x1 - x0) * scale,
            height: (y1 - y0) * scale,
        }
    }

    fn x(&self, re: f64) -> String {
        format_fixed((re - self.x_min) * self.scale, DECIMALS)
    }

    fn y(&self, im: f64) -> String {
        format_fixed((self.y_max - im) * self.scale, DECIMALS)
    }

    fn re_range(&self) -> (f64, f64) {
        (self.x_min, self.x_min + self.width / self.scale)
    }

    fn im_range(&self) -> (f64, f64) {
        (self.y_max - self.height / self.scale, self.y_max)
    }

    fn polygon(&self, points: &[Complex64]) -> String {
        points
            .iter()
            .map(|z| format!("{},{}", self.x(z.re), self.y(z.im)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn integer_ticks(lo: f64, hi: f64) -> impl Iterator<Item = i64> {
    (lo.ceil() as i64)..=(hi.floor() as i64)
}

/// SVG 1.1 document for the figure.
pub fn render_svg(data: &FigureData) -> String {
    let f = Frame::fit(data);
    let (w, h) = (format_fixed(f.width, DECIMALS), format_fixed(f.height, DECIMALS));
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(s, "<rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>");

    let (re0, re1) = f.re_range();
    let (im0, im1) = f.im_range();
    s.push_str("<g class=\"axes\" stroke=\"#999999\" stroke-width=\"1\">\n");
    if (im0..=im1).contains(&0.0) {
        let _ = writeln!(s, "<line x1=\"0.000000\" y1=\"{y}\" x2=\"{w}\" y2=\"{y}\"/>", y = f.y(0.0));
    }
    if (re0..=re1).contains(&0.0) {
        let _ = writeln!(s, "<line x1=\"{x}\" y1=\"0.000000\" x2=\"{x}\" y2=\"{h}\"/>", x = f.x(0.0));
    }
    let y_axis = if (im0..=im1).contains(&0.0) { 0.0 } else { im0 };
    let x_axis = if (re0..=re1).contains(&0.0) { 0.0 } else { re0 };
    for t in integer_ticks(re0, re1) {
        let (x, y) = (f.x(t as f64), f.y(y_axis));
        let _ = writeln!(s, "<line x1=\"{x}\" y1=\"{y}\" x2=\"{x}\" y2=\"{}\"/>", format_fixed(
            (f.y_max - y_axis) * f.scale - 6.0,
            DECIMALS
        ));
        let _ = writeln!(s, "<text x=\"{x}\" y=\"{}\" font-size=\"12\" stroke=\"none\" fill=\"#555555\">{t}</text>", format_fixed(
            (f.y_max - y_axis) * f.scale + 14.0,
            DECIMALS
        ));
    }
    for t in integer_ticks(im0, im1) {
        let (x, y) = (f.x(x_axis), f.y(t as f64));
        let x2 = format_fixed((x_axis - f.x_min) * f.scale + 6.0, DECIMALS);
        let _ = writeln!(s, "<line x1=\"{x}\" y1=\"{y}\" x2=\"{x2}\" y2=\"{y}\"/>");
        let _ = writeln!(s, "<text x=\"{x2}\" y=\"{y}\" font-size=\"12\" stroke=\"none\" fill=\"#555555\">{t}i</text>");
    }
    s.push_str("</g>\n");

    let _ = writeln!(
        s,
        "<polygon class=\"mobius-image-disk\" points=\"{}\" fill=\"#1f77b4\" fill-opacity=\"0.08\" stroke=\"#1f77b4\" stroke-width=\"2\"/>",
        f.polygon(&data.mobius_disk)
    );
    if !data.published_disk.is_empty() {
        let _ = writeln!(
            s,
            "<polygon class=\"published-formula-disk\" points=\"{}\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\" stroke-dasharray=\"8 5\"/>",
            f.polygon(&data.published_disk)
        );
    }
    let _ = writeln!(
        s,
        "<polygon class=\"g-curve\" points=\"{}\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"1.5\"/>",
        f.polygon(&data.g_curve)
    );
    let (px, py) = (f.x(data.point.re), f.y(data.point.im));
    let _ = writeln!(s, "<circle class=\"g-point\" cx=\"{px}\" cy=\"{py}\" r=\"4\" fill=\"black\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-size=\"14\" fill=\"black\">G(z0)</text>",
        format_fixed((data.point.re - f.x_min) * f.scale + 8.0, DECIMALS),
        format_fixed((f.y_max - data.point.im) * f.scale - 8.0, DECIMALS)
    );

    s.push_str("<g class=\"legend\" font-size=\"13\">\n");
    let legend = [
        ("#1f77b4", "", "H image disk"),
        ("#d62728", " stroke-dasharray=\"8 5\"", "published formula disk"),
        ("#2ca02c", "", "G(|z| = r)"),
    ];
    for (i, (color, dash, label)) in legend.iter().enumerate() {
        let y = 20.0 + 18.0 * i as f64;
        let _ = writeln!(
            s,
            "<line x1=\"10.000000\" y1=\"{y:.6}\" x2=\"40.000000\" y2=\"{y:.6}\" stroke=\"{color}\" stroke-width=\"2\"{dash}/>"
        );
        let _ = writeln!(s, "<text x=\"46.000000\" y=\"{:.6}\">{label}</text>", y + 4.0);
    }
    s.push_str("</g>\n</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subordination::published;

    fn published_figure(r: f64) -> FigureData {
        let params = JanowskiParams::new(published::A, published::B, published::LAMBDA).unwrap();
        figure_data(&params, published::N, r, published::Z0, 1024, RayOptions::default()).unwrap()
    }

    #[test]
    fn published_point_lies_outside_both_disks() {
        let data = published_figure(published::R0);
        let params = JanowskiParams::new(published::A, published::B, published::LAMBDA).unwrap();
        assert!(mobius_image_disk(&params, published::R0).unwrap().margin(data.point) > 0.0);
        assert!(published_disk(&params, published::R0).unwrap().margin(data.point) > 0.0);
        assert_eq!(data.g_curve.len(), 1024);
        assert_eq!(data.mobius_disk.len(), DISK_POINTS);
    }

    #[test]
    fn small_radius_curve_sits_inside_disk() {
        let params = JanowskiParams::new(published::A, published::B, published::LAMBDA).unwrap();
        let data = published_figure(0.1);
        let disk = mobius_image_disk(&params, 0.1).unwrap();
        assert!(data.g_curve.iter().all(|&w| disk.margin(w) < 0.0));
    }

    #[test]
    fn svg_shape() {
        let svg = render_svg(&published_figure(published::R0));
        assert!(svg.starts_with("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg "));
        assert!(svg.ends_with("</svg>\n"));
        for class in ["mobius-image-disk", "published-formula-disk", "g-curve", "g-point"] {
            assert!(svg.contains(&format!("class=\"{class}\"")), "{class}");
        }
        assert!(svg.contains(">G(z0)</text>"));
        assert!(!svg.contains('\r'));
        assert_eq!(svg, render_svg(&published_figure(published::R0)));
    }

    #[test]
    fn csv_round_trip_renders_identically() {
        let data = published_figure(published::R0);
        let dir = tempfile::tempdir().unwrap();
        write_csvs(&data, dir.path()).unwrap();
        let back = read_csvs(dir.path()).unwrap();
        assert_eq!(back, data);
        assert_eq!(render_svg(&back), render_svg(&data));
    }

    #[test]
    fn rejects_bad_inputs() {
        let params = JanowskiParams::new(published::A, published::B, published::LAMBDA).unwrap();
        let ray = RayOptions::default();
        assert!(figure_data(&params, 1, 1.0, published::Z0, 1024, ray).is_err());
        assert!(figure_data(&params, 1, 0.98, published::Z0, 100, ray).is_err());
        assert!(figure_data(&params, 1, 0.98, Complex64::new(1.0, 0.0), 1024, ray).is_err());
        let dir = tempfile::tempdir().unwrap();
        assert!(read_csvs(dir.path()).is_err());
    }
}

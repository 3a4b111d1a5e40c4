//! Aggregate CSV and a log–log SVG plot of a sweep.

use std::fmt::Write as _;
use std::io::Write;

use super::fit::FitMode;
use super::SweepResult;
use crate::error::Result;

/// Columns `epsilon, t_blow, t_blow_secondary, censored`; empty cells for missing times.
pub fn write_aggregate_csv<W: Write>(sweep: &SweepResult, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["epsilon", "t_blow", "t_blow_secondary", "censored"])?;
    for r in &sweep.records {
        w.serialize((r.epsilon, r.t_blow, r.t_secondary, r.censored))?;
    }
    w.flush()?;
    Ok(())
}

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 50.0;

/// `ln T` against `ln(1/ε)` with the fitted line (solid) and the predicted slope
/// through the data centroid (dashed).
pub fn write_svg_plot<W: Write>(sweep: &SweepResult, mut writer: W) -> Result<()> {
    let pts: Vec<(f64, f64)> = sweep
        .points()
        .iter()
        .map(|(e, t)| ((1.0 / e).ln(), t.ln()))
        .collect();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if !pts.is_empty() {
        let (mut x0, mut x1) = bounds(pts.iter().map(|p| p.0));
        let (mut y0, mut y1) = bounds(pts.iter().map(|p| p.1));
        pad(&mut x0, &mut x1);
        pad(&mut y0, &mut y1);
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
        let _ = writeln!(
            svg,
            r#"<g stroke="black" fill="none"><rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}"/></g>"#,
            WIDTH - 2.0 * MARGIN,
            HEIGHT - 2.0 * MARGIN
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">ln(1/epsilon)</text>"#,
            WIDTH / 2.0,
            HEIGHT - 15.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="15" y="{}" font-size="12" transform="rotate(-90 15 {})" text-anchor="middle">ln T</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0
        );
        for (x, y) in &pts {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="black"/>"#,
                sx(*x),
                sy(*y)
            );
        }
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
        let mut line = |slope: f64, intercept: f64, style: &str| {
            let _ = writeln!(
                svg,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" {style}/>"#,
                sx(x0),
                sy(slope * x0 + intercept),
                sx(x1),
                sy(slope * x1 + intercept)
            );
        };
        if let Ok(fit) = sweep.fit(FitMode::PowerLaw) {
            line(fit.slope, fit.intercept, "");
        }
        if let Some(k) = sweep.prediction.power_exponent() {
            line(k, my - k * mx, r#"stroke-dasharray="6 4""#);
        }
    }
    svg.push_str("</svg>\n");
    writer.write_all(svg.as_bytes())?;
    Ok(())
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

fn pad(lo: &mut f64, hi: &mut f64) {
    let span = (*hi - *lo).max(1e-3);
    *lo -= 0.05 * span;
    *hi += 0.05 * span;
}

//! Byte-stable SVG output.
//!
//! Coordinates are printed with two decimals and elements are emitted in a
//! fixed order (title, axes, gridlines, series, legend), so equal specs
//! always produce equal bytes.

use std::fmt::Write;

use super::{tick_decimals, PlotError, PlotKind, PlotSpec, MARGIN, PALETTE, ROTATE_LABELS_ABOVE};

const MARKER_RADIUS: f64 = 3.0;
const LEGEND_ROW: f64 = 16.0;
const CHAR_WIDTH: f64 = 7.0;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

struct Frame {
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
    y_min: f64,
    y_max: f64,
    bands: usize,
}

impl Frame {
    fn new(spec: &PlotSpec) -> Self {
        let m = f64::from(MARGIN);
        Frame {
            left: m,
            right: f64::from(spec.width) - m,
            top: m,
            bottom: f64::from(spec.height) - m,
            y_min: spec.y_ticks[0],
            y_max: *spec.y_ticks.last().unwrap(),
            bands: spec.x_categories.len(),
        }
    }

    fn band_width(&self) -> f64 {
        (self.right - self.left) / self.bands as f64
    }

    fn x(&self, i: usize) -> f64 {
        self.left + (i as f64 + 0.5) * self.band_width()
    }

    fn y(&self, v: f64) -> f64 {
        let t = (v - self.y_min) / (self.y_max - self.y_min);
        (self.bottom - t * (self.bottom - self.top)).clamp(self.top, self.bottom)
    }
}

/// Renders a validated spec as a standalone SVG 1.1 document.
pub fn render_svg(spec: &PlotSpec) -> Result<Vec<u8>, PlotError> {
    spec.validate()?;
    let f = Frame::new(spec);
    let mut s = String::new();
    // writes to a String cannot fail
    let _ = write_document(&mut s, spec, &f);
    Ok(s.into_bytes())
}

fn write_document(s: &mut String, spec: &PlotSpec, f: &Frame) -> std::fmt::Result {
    let (w, h) = (spec.width, spec.height);
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif">"#
    )?;
    writeln!(s, r##"<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>"##)?;
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="16" text-anchor="middle">{}</text>"#,
        f64::from(w) / 2.0,
        f64::from(MARGIN) / 2.0 + 5.0,
        escape(&spec.title)
    )?;
    write_axes(s, spec, f)?;
    write_gridlines(s, spec, f)?;
    match spec.kind {
        PlotKind::Line => write_lines(s, spec, f)?,
        PlotKind::Bar => write_bars(s, spec, f)?,
    }
    write_legend(s, spec, f)?;
    writeln!(s, "</svg>")
}

fn write_axes(s: &mut String, spec: &PlotSpec, f: &Frame) -> std::fmt::Result {
    writeln!(s, r##"<g id="axes" stroke="#000000" stroke-width="1">"##)?;
    writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
        f.left, f.bottom, f.right, f.bottom
    )?;
    writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
        f.left, f.top, f.left, f.bottom
    )?;
    writeln!(s, "</g>")?;

    writeln!(s, r#"<g id="x-labels" font-size="11">"#)?;
    let rotate = spec.x_categories.len() > ROTATE_LABELS_ABOVE;
    for (i, cat) in spec.x_categories.iter().enumerate() {
        let (x, y) = (f.x(i), f.bottom + 16.0);
        if rotate {
            writeln!(
                s,
                r#"<text x="{x:.2}" y="{y:.2}" text-anchor="start" transform="rotate(45 {x:.2} {y:.2})">{}</text>"#,
                escape(cat)
            )?;
        } else {
            writeln!(s, r#"<text x="{x:.2}" y="{y:.2}" text-anchor="middle">{}</text>"#, escape(cat))?;
        }
    }
    writeln!(s, "</g>")?;

    let decimals = tick_decimals(spec.y_ticks[1] - spec.y_ticks[0]);
    writeln!(s, r#"<g id="y-labels" font-size="11" text-anchor="end">"#)?;
    for &t in &spec.y_ticks {
        let label = format!("{t:.decimals$}");
        let label = if label.starts_with('-') && label.trim_start_matches(['-', '0', '.']).is_empty() {
            label[1..].to_string()
        } else {
            label
        };
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{label}</text>"#,
            f.left - 6.0,
            f.y(t) + 4.0
        )?;
    }
    writeln!(s, "</g>")?;

    let cx = (f.left + f.right) / 2.0;
    let cy = (f.top + f.bottom) / 2.0;
    writeln!(
        s,
        r#"<text x="{cx:.2}" y="{:.2}" font-size="13" text-anchor="middle">{}</text>"#,
        f64::from(spec.height) - 8.0,
        escape(&spec.x_label)
    )?;
    writeln!(
        s,
        r#"<text x="16.00" y="{cy:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 16.00 {cy:.2})">{}</text>"#,
        escape(&spec.y_label)
    )
}

fn write_gridlines(s: &mut String, spec: &PlotSpec, f: &Frame) -> std::fmt::Result {
    writeln!(s, r##"<g id="grid" stroke="#dddddd" stroke-width="1">"##)?;
    for &t in &spec.y_ticks {
        let y = f.y(t);
        writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}"/>"#,
            f.left, f.right
        )?;
    }
    writeln!(s, "</g>")
}

fn write_lines(s: &mut String, spec: &PlotSpec, f: &Frame) -> std::fmt::Result {
    for (si, series) in spec.series.iter().enumerate() {
        let color = PALETTE[series.palette_index];
        writeln!(s, r#"<g id="series-{si}" stroke="{color}" fill="{color}">"#)?;
        let mut d = String::new();
        let mut pen_down = false;
        for (i, p) in series.points.iter().enumerate() {
            match p {
                Some(v) => {
                    let cmd = if pen_down { 'L' } else { 'M' };
                    if !d.is_empty() {
                        d.push(' ');
                    }
                    write!(d, "{cmd} {:.2} {:.2}", f.x(i), f.y(*v))?;
                    pen_down = true;
                }
                None => pen_down = false,
            }
        }
        if !d.is_empty() {
            writeln!(s, r#"<path d="{d}" fill="none" stroke-width="2"/>"#)?;
        }
        for (i, p) in series.points.iter().enumerate() {
            if let Some(v) = p {
                writeln!(
                    s,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="{MARKER_RADIUS:.2}"/>"#,
                    f.x(i),
                    f.y(*v)
                )?;
            }
        }
        writeln!(s, "</g>")?;
    }
    Ok(())
}

fn write_bars(s: &mut String, spec: &PlotSpec, f: &Frame) -> std::fmt::Result {
    let n = spec.series.len() as f64;
    let group = f.band_width() * 0.8;
    let bar = group / n;
    let base = f.y(0.0f64.clamp(f.y_min, f.y_max));
    for (si, series) in spec.series.iter().enumerate() {
        let color = PALETTE[series.palette_index];
        writeln!(s, r#"<g id="series-{si}" fill="{color}">"#)?;
        for (i, p) in series.points.iter().enumerate() {
            if let Some(v) = p {
                let x = f.x(i) - group / 2.0 + si as f64 * bar;
                let y = f.y(*v);
                let (top, height) = if y <= base { (y, base - y) } else { (base, y - base) };
                writeln!(
                    s,
                    r#"<rect x="{x:.2}" y="{top:.2}" width="{bar:.2}" height="{height:.2}"/>"#
                )?;
            }
        }
        writeln!(s, "</g>")?;
    }
    Ok(())
}

fn write_legend(s: &mut String, spec: &PlotSpec, f: &Frame) -> std::fmt::Result {
    let longest = spec
        .series
        .iter()
        .map(|x| x.name.chars().count())
        .max()
        .unwrap_or(0) as f64;
    let width = 30.0 + longest * CHAR_WIDTH;
    let height = 8.0 + LEGEND_ROW * spec.series.len() as f64;
    let x0 = f.right - width - 8.0;
    let y0 = f.top + 8.0;
    writeln!(s, r#"<g id="legend" font-size="11">"#)?;
    writeln!(
        s,
        r##"<rect x="{x0:.2}" y="{y0:.2}" width="{width:.2}" height="{height:.2}" fill="#ffffff" fill-opacity="0.85" stroke="#999999"/>"##
    )?;
    for (i, series) in spec.series.iter().enumerate() {
        let row_y = y0 + 4.0 + LEGEND_ROW * i as f64;
        writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="10.00" height="10.00" fill="{}"/>"#,
            x0 + 6.0,
            row_y + 3.0,
            PALETTE[series.palette_index]
        )?;
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            x0 + 22.0,
            row_y + 12.0,
            escape(&series.name)
        )?;
    }
    writeln!(s, "</g>")
}

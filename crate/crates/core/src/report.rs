//! SVG plots and CSV files for bounds curves.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::bounds::{BoundsCurves, StepAxis};
use crate::error::{Error, Result};

pub const CURVES_HEADER: &str = "step_amount,min,median,max";

#[derive(Clone, Debug, PartialEq)]
pub struct PlotStyle {
    pub width: u32,
    pub height: u32,
    pub max_color: String,
    pub median_color: String,
    pub min_color: String,
    pub operating_fill: String,
    pub guarantee_fill: String,
    pub x_label: String,
    pub y_label: String,
}

impl Default for PlotStyle {
    fn default() -> Self {
        Self {
            width: 640,
            height: 420,
            max_color: "#1f77b4".into(),
            median_color: "#2ca02c".into(),
            min_color: "#d62728".into(),
            operating_fill: "#9ecae1".into(),
            guarantee_fill: "#fdd0a2".into(),
            x_label: "transformation amount (%)".into(),
            y_label: "repeatability".into(),
        }
    }
}

const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 52.0;

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
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
    top: f64,
    width: f64,
    height: f64,
    a0: f64,
    span: f64,
}

impl Frame {
    fn x(&self, amount: f64) -> f64 {
        self.left + (amount - self.a0) / self.span * self.width
    }

    /// Higher repeatability sits higher on the canvas.
    fn y(&self, value: f64) -> f64 {
        self.top + (1.0 - value) * self.height
    }

    fn points(&self, amounts: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
        amounts
            .iter()
            .zip(values)
            .map(|(&a, &v)| (self.x(a), self.y(v)))
            .collect()
    }
}

fn point_list(points: &[(f64, f64)]) -> String {
    points
        .iter()
        .map(|(x, y)| format!("{x:.2},{y:.2}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Max, median and min curves over the operating band and the guarantee
/// area, on a fixed [0, 1] repeatability axis.
pub fn render_bounds_plot(curves: &BoundsCurves, style: &PlotStyle, title: &str) -> String {
    let w = style.width.max(100) as f64;
    let h = style.height.max(100) as f64;
    let amounts = curves.axis.amounts();
    let a0 = amounts[0];
    let a_last = amounts[amounts.len() - 1];
    let frame = Frame {
        left: MARGIN_LEFT,
        top: MARGIN_TOP,
        width: (w - MARGIN_LEFT - MARGIN_RIGHT).max(10.0),
        height: (h - MARGIN_TOP - MARGIN_BOTTOM).max(10.0),
        a0,
        span: a_last - a0,
    };
    let max_pts = frame.points(amounts, &curves.max_curve);
    let min_pts = frame.points(amounts, &curves.min_curve);
    let median_pts = frame.points(amounts, &curves.median_curve);
    let baseline = frame.y(0.0);

    let mut s = String::new();
    let mut line = |text: String| {
        s.push_str(&text);
        s.push('\n');
    };
    line(r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#.into());
    line(format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    ));
    line(format!(r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#));
    line(format!(
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        frame.left + frame.width / 2.0,
        escape(title)
    ));

    // regions first so curves draw on top
    let mut guarantee = min_pts.clone();
    guarantee.push((frame.x(a_last), baseline));
    guarantee.push((frame.x(a0), baseline));
    line(format!(
        r#"<polygon class="guarantee-region" points="{}" fill="{}" fill-opacity="0.6" stroke="none"/>"#,
        point_list(&guarantee),
        escape(&style.guarantee_fill)
    ));
    let mut operating = max_pts.clone();
    operating.extend(min_pts.iter().rev());
    line(format!(
        r#"<polygon class="operating-region" points="{}" fill="{}" fill-opacity="0.6" stroke="none"/>"#,
        point_list(&operating),
        escape(&style.operating_fill)
    ));

    // axes and grid
    let (x_left, x_right) = (frame.left, frame.left + frame.width);
    line(format!(
        r##"<line x1="{x_left:.2}" y1="{baseline:.2}" x2="{x_right:.2}" y2="{baseline:.2}" stroke="#333"/>"##
    ));
    line(format!(
        r##"<line x1="{x_left:.2}" y1="{:.2}" x2="{x_left:.2}" y2="{baseline:.2}" stroke="#333"/>"##,
        frame.top
    ));
    for i in 0..=5 {
        let v = i as f64 / 5.0;
        let y = frame.y(v);
        line(format!(
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{x_right:.2}" y2="{y:.2}" stroke="#ddd" stroke-width="0.5"/>"##,
            x_left - 4.0
        ));
        line(format!(
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.1}</text>"#,
            x_left - 8.0,
            y + 4.0
        ));
    }
    for &a in amounts {
        let x = frame.x(a);
        line(format!(
            r##"<line x1="{x:.2}" y1="{baseline:.2}" x2="{x:.2}" y2="{:.2}" stroke="#333"/>"##,
            baseline + 4.0
        ));
        line(format!(
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle" font-size="10">{a}</text>"#,
            baseline + 16.0
        ));
    }
    line(format!(
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        frame.left + frame.width / 2.0,
        h - 12.0,
        escape(&style.x_label)
    ));
    line(format!(
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        frame.top + frame.height / 2.0,
        frame.top + frame.height / 2.0,
        escape(&style.y_label)
    ));

    let curves_drawn = [
        ("max-curve", &max_pts, &style.max_color),
        ("median-curve", &median_pts, &style.median_color),
        ("min-curve", &min_pts, &style.min_color),
    ];
    for (class, pts, color) in curves_drawn {
        line(format!(
            r#"<polyline class="{class}" points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            point_list(pts),
            escape(color)
        ));
    }

    // legend
    let lx = x_right + 16.0;
    let entries = [
        ("max", &style.max_color, false),
        ("median", &style.median_color, false),
        ("min", &style.min_color, false),
        ("operating region", &style.operating_fill, true),
        ("guarantee region", &style.guarantee_fill, true),
    ];
    line(r#"<g class="legend">"#.into());
    for (i, (label, color, filled)) in entries.into_iter().enumerate() {
        let y = frame.top + 8.0 + 20.0 * i as f64;
        if filled {
            line(format!(
                r#"<rect x="{lx:.2}" y="{:.2}" width="18" height="10" fill="{}" fill-opacity="0.6"/>"#,
                y - 5.0,
                escape(color)
            ));
        } else {
            line(format!(
                r#"<rect x="{lx:.2}" y="{:.2}" width="18" height="3" fill="{}"/>"#,
                y - 1.5,
                escape(color)
            ));
        }
        line(format!(
            r#"<text x="{:.2}" y="{:.2}">{label}</text>"#,
            lx + 24.0,
            y + 4.0
        ));
    }
    line("</g>".into());
    line("</svg>".into());
    s
}

pub fn format_curves_csv(curves: &BoundsCurves) -> String {
    let mut out = String::from(CURVES_HEADER);
    out.push('\n');
    for (k, amount) in curves.axis.amounts().iter().enumerate() {
        writeln!(
            out,
            "{amount},{},{},{}",
            curves.min_curve[k], curves.median_curve[k], curves.max_curve[k]
        )
        .expect("writing to a String");
    }
    writeln!(
        out,
        "# operating_area={} guarantee_area={}",
        curves.operating_area, curves.guarantee_area
    )
    .expect("writing to a String");
    out
}

pub fn write_curves_csv(curves: &BoundsCurves, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_curves_csv(curves)).map_err(|e| Error::io(path, e))
}

pub fn read_curves_csv(path: impl AsRef<Path>) -> Result<BoundsCurves> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_curves_csv(&text, &path.display().to_string())
}

pub fn parse_curves_csv(text: &str, source_name: &str) -> Result<BoundsCurves> {
    let parse_err = |line: usize, message: String| Error::Parse {
        source_name: source_name.to_string(),
        line: line as u64,
        message,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, CURVES_HEADER)) => {}
        other => {
            return Err(parse_err(
                1,
                format!("expected header {CURVES_HEADER:?}, found {:?}", other.map(|o| o.1)),
            ))
        }
    }
    let mut amounts = Vec::new();
    let (mut min_curve, mut median_curve, mut max_curve) = (Vec::new(), Vec::new(), Vec::new());
    let mut areas = None;
    for (n, l) in lines {
        if let Some(comment) = l.strip_prefix('#') {
            let mut op = None;
            let mut guar = None;
            for token in comment.split_whitespace() {
                let parsed = |v: &str| {
                    v.parse::<f64>()
                        .map_err(|_| parse_err(n, format!("bad area value {v:?}")))
                };
                if let Some(v) = token.strip_prefix("operating_area=") {
                    op = Some(parsed(v)?);
                } else if let Some(v) = token.strip_prefix("guarantee_area=") {
                    guar = Some(parsed(v)?);
                }
            }
            match (op, guar) {
                (Some(o), Some(g)) => areas = Some((o, g)),
                _ => return Err(parse_err(n, "comment line lacks operating_area/guarantee_area".into())),
            }
            continue;
        }
        if l.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = l.split(',').collect();
        if fields.len() != 4 {
            return Err(parse_err(n, format!("expected 4 fields, found {}", fields.len())));
        }
        let mut vals = [0.0f64; 4];
        for (slot, raw) in vals.iter_mut().zip(&fields) {
            *slot = raw
                .trim()
                .parse()
                .map_err(|_| parse_err(n, format!("not a number: {raw:?}")))?;
        }
        amounts.push(vals[0]);
        min_curve.push(vals[1]);
        median_curve.push(vals[2]);
        max_curve.push(vals[3]);
    }
    let (operating_area, guarantee_area) =
        areas.ok_or_else(|| parse_err(0, "missing area comment line".into()))?;
    let axis = StepAxis::new(amounts).map_err(|e| parse_err(0, e.to_string()))?;
    Ok(BoundsCurves {
        axis,
        max_curve,
        min_curve,
        median_curve,
        operating_area,
        guarantee_area,
    })
}

//! Static SVG drawing of an instance and, optionally, its plan.

use std::fmt::Write as _;

use mulepatrol::deploy::DeploymentPlan;
use mulepatrol::euler::point_at_clamped;
use mulepatrol::model::{Instance, Point};

#[derive(Debug, Clone)]
pub struct RenderStyle {
    /// Canvas width in px; height follows the geometry's aspect ratio.
    pub width: f64,
    pub margin: f64,
    pub segment_color: &'static str,
    pub segment_width: f64,
    pub connector_color: &'static str,
    pub connector_width: f64,
    pub euler_colors: &'static [&'static str],
    pub euler_width: f64,
    pub euler_offset: f64,
    pub tick_color: &'static str,
    pub tick_length: f64,
    pub mule_color: &'static str,
    pub mule_radius: f64,
    pub sensor_color: &'static str,
    pub sensor_radius: f64,
}

impl Default for RenderStyle {
    fn default() -> Self {
        RenderStyle {
            width: 800.0,
            margin: 40.0,
            segment_color: "#222222",
            segment_width: 3.0,
            connector_color: "#888888",
            connector_width: 1.5,
            euler_colors: &[
                "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
            ],
            euler_width: 2.0,
            euler_offset: 4.0,
            tick_color: "#000000",
            tick_length: 10.0,
            mule_color: "#d62728",
            mule_radius: 4.0,
            sensor_color: "#17becf",
            sensor_radius: 3.5,
        }
    }
}

/// Maps world meters onto the canvas, y pointing up.
struct Viewport {
    min: Point,
    scale: f64,
    margin: f64,
    height: f64,
}

impl Viewport {
    fn fit(inst: &Instance, style: &RenderStyle) -> Self {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for s in inst.segments() {
            for p in [s.a, s.b] {
                min = Point::new(min.x.min(p.x), min.y.min(p.y));
                max = Point::new(max.x.max(p.x), max.y.max(p.y));
            }
        }
        let span = (max.x - min.x).max(max.y - min.y).max(1e-9);
        let scale = (style.width - 2.0 * style.margin) / span;
        Viewport {
            min,
            scale,
            margin: style.margin,
            height: (max.y - min.y) * scale + 2.0 * style.margin,
        }
    }

    fn map(&self, p: Point) -> (f64, f64) {
        (
            self.margin + (p.x - self.min.x) * self.scale,
            self.height - self.margin - (p.y - self.min.y) * self.scale,
        )
    }
}

fn line(out: &mut String, class: &str, a: (f64, f64), b: (f64, f64), attrs: &str) {
    let _ = writeln!(
        out,
        r#"  <line class="{class}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" {attrs}/>"#,
        a.0, a.1, b.0, b.1
    );
}

fn circle(out: &mut String, class: &str, c: (f64, f64), r: f64, fill: &str) {
    let _ = writeln!(
        out,
        r#"  <circle class="{class}" cx="{:.2}" cy="{:.2}" r="{r:.2}" fill="{fill}"/>"#,
        c.0, c.1
    );
}

pub fn render_svg(inst: &Instance, plan: Option<&DeploymentPlan>, style: &RenderStyle) -> String {
    let vp = Viewport::fit(inst, style);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#,
        w = style.width,
        h = vp.height
    );
    let _ = writeln!(out, r#"  <rect width="100%" height="100%" fill="white"/>"#);

    if let Some(plan) = plan {
        for (t, planned) in plan.trees.iter().enumerate() {
            let color = style.euler_colors[t % style.euler_colors.len()];
            let points: Vec<String> = planned
                .euler
                .polyline
                .iter()
                .map(|v| {
                    let (x, y) = vp.map(v.point());
                    format!(
                        "{:.2},{:.2}",
                        x + style.euler_offset,
                        y - style.euler_offset
                    )
                })
                .collect();
            let _ = writeln!(
                out,
                r#"  <polyline class="euler" points="{}" fill="none" stroke="{color}" stroke-width="{:.2}" stroke-opacity="0.4"/>"#,
                points.join(" "),
                style.euler_width
            );
        }
    }

    for s in inst.segments() {
        line(
            &mut out,
            "segment",
            vp.map(s.a),
            vp.map(s.b),
            &format!(
                r#"stroke="{}" stroke-width="{:.2}" stroke-linecap="round""#,
                style.segment_color, style.segment_width
            ),
        );
    }

    if let Some(plan) = plan {
        for planned in &plan.trees {
            for c in &planned.tree.connectors {
                let a = inst.segment(c.seg_i).end(c.end_i);
                let b = inst.segment(c.seg_j).end(c.end_j);
                line(
                    &mut out,
                    "connector",
                    vp.map(a),
                    vp.map(b),
                    &format!(
                        r#"stroke="{}" stroke-width="{:.2}" stroke-dasharray="6 4""#,
                        style.connector_color, style.connector_width
                    ),
                );
            }
        }
        for planned in &plan.trees {
            let path = &planned.euler;
            let h = 1e-6 * path.total_length.max(1.0);
            let boundaries = planned
                .pieces
                .iter()
                .map(|p| p.s_start)
                .chain([path.total_length]);
            for s in boundaries {
                let (x, y) = vp.map(point_at_clamped(path, s));
                let (ax, ay) = vp.map(point_at_clamped(path, s - h));
                let (bx, by) = vp.map(point_at_clamped(path, s + h));
                let (dx, dy) = (bx - ax, by - ay);
                let norm = dx.hypot(dy);
                let (nx, ny) = if norm > 0.0 {
                    (-dy / norm, dx / norm)
                } else {
                    (0.0, 1.0)
                };
                let half = 0.5 * style.tick_length;
                line(
                    &mut out,
                    "piece-boundary",
                    (x - nx * half, y - ny * half),
                    (x + nx * half, y + ny * half),
                    &format!(r#"stroke="{}" stroke-width="1.50""#, style.tick_color),
                );
            }
            for p in &planned.pieces {
                for s in [p.s_start, p.s_end] {
                    circle(
                        &mut out,
                        "mule",
                        vp.map(point_at_clamped(path, s)),
                        style.mule_radius,
                        style.mule_color,
                    );
                }
            }
        }
    }

    for s in inst.sensors() {
        let p = inst.segment(s.segment_id).point_at(s.offset0);
        circle(
            &mut out,
            "sensor",
            vp.map(p),
            style.sensor_radius,
            style.sensor_color,
        );
    }
    out.push_str("</svg>\n");
    out
}

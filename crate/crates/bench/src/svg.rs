//! Static rollout plots: operator futures dashed red,
//! autonomy futures solid black, the executed path as a blue arrow.

use std::fmt::Write;

use gsc_core::geom::Vec2;
use gsc_core::sim::ModeSummary;
use gsc_core::{ScenarioSpec, Trace, TraceRecord};

/// Pixels per meter.
const SCALE: f64 = 20.0;
/// Meters of padding around the world bounds.
const PAD: f64 = 1.0;

fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

struct Frame {
    min: Vec2<f64>,
    max: Vec2<f64>,
}

impl Frame {
    fn x(&self, p: Vec2<f64>) -> String {
        num((p.x - self.min.x + PAD) * SCALE)
    }

    fn y(&self, p: Vec2<f64>) -> String {
        num((self.max.y - p.y + PAD) * SCALE)
    }

    fn len(&self, d: f64) -> String {
        num(d * SCALE)
    }

    fn points(&self, pts: &[Vec2<f64>]) -> String {
        pts.iter().map(|p| format!("{},{}", self.x(*p), self.y(*p))).collect::<Vec<_>>().join(" ")
    }
}

/// The record whose mode fan best shows the decision: the first one with
/// the most predicted modes.
fn showcase(records: &[TraceRecord]) -> Option<&TraceRecord> {
    let mut best: Option<&TraceRecord> = None;
    for r in records {
        let n = r.operator_modes.len() + r.autonomy_modes.len();
        if n > 0 && best.is_none_or(|b| n > b.operator_modes.len() + b.autonomy_modes.len()) {
            best = Some(r);
        }
    }
    best
}

fn modes(out: &mut String, f: &Frame, modes: &[ModeSummary], class: &str, style: &str) {
    for m in modes {
        if m.mean.is_empty() {
            continue;
        }
        let opacity = m.weight.clamp(0.15, 1.0);
        let _ = writeln!(
            out,
            r#"  <polyline class="{class}" data-label="{}" points="{}" fill="none" {style} stroke-opacity="{}"/>"#,
            escape(&m.label),
            f.points(&m.mean),
            num(opacity)
        );
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Deterministic SVG of a run: same trace and spec, same bytes.
pub fn render_svg(trace: &Trace, spec: &ScenarioSpec) -> String {
    let b = &spec.world.bounds;
    let f = Frame { min: b.min, max: b.max };
    let width = (b.max.x - b.min.x + 2.0 * PAD) * SCALE;
    let height = (b.max.y - b.min.y + 2.0 * PAD) * SCALE;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = num(width),
        h = num(height)
    );
    let _ = writeln!(out, "  <title>{}</title>", escape(&spec.id));
    out.push_str(
        "  <defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"8\" refY=\"5\" markerWidth=\"6\" markerHeight=\"6\" orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\" fill=\"#1f5fbf\"/></marker></defs>\n",
    );
    let _ = writeln!(
        out,
        r##"  <rect class="bounds" x="{}" y="{}" width="{}" height="{}" fill="#fafafa" stroke="#999"/>"##,
        f.x(Vec2::new(b.min.x, 0.0)),
        f.y(Vec2::new(0.0, b.max.y)),
        f.len(b.max.x - b.min.x),
        f.len(b.max.y - b.min.y)
    );
    for r in &spec.world.regions {
        let _ = writeln!(
            out,
            r##"  <rect class="region" data-name="{}" x="{}" y="{}" width="{}" height="{}" fill="#cfe0ff" fill-opacity="0.5"/>"##,
            escape(&r.name),
            f.x(r.rect.min),
            f.y(Vec2::new(0.0, r.rect.max.y)),
            f.len(r.rect.max.x - r.rect.min.x),
            f.len(r.rect.max.y - r.rect.min.y)
        );
    }
    let _ = writeln!(
        out,
        r##"  <circle class="goal" cx="{}" cy="{}" r="{}" fill="none" stroke="#2a9d3a" stroke-width="2"/>"##,
        f.x(spec.world.goal),
        f.y(spec.world.goal),
        f.len(spec.goal_radius.max(0.2))
    );

    if let Some(first) = trace.records.first() {
        for (i, o) in first.obstacles.iter().enumerate() {
            let track: Vec<_> = trace.records.iter().filter_map(|r| r.obstacles.get(i)).map(|s| s.position).collect();
            if track.first() != track.last() {
                let _ = writeln!(
                    out,
                    r##"  <polyline class="obstacle-track" points="{}" fill="none" stroke="#bbb" stroke-width="1"/>"##,
                    f.points(&track)
                );
            }
            let _ = writeln!(
                out,
                r##"  <circle class="obstacle" data-id="{}" cx="{}" cy="{}" r="{}" fill="#888" fill-opacity="{}"/>"##,
                escape(&o.id),
                f.x(o.position),
                f.y(o.position),
                f.len(o.radius),
                if o.visible { "0.8" } else { "0.3" }
            );
        }
    }

    if let Some(r) = showcase(&trace.records) {
        modes(
            &mut out,
            &f,
            &r.operator_modes,
            "operator-mode",
            r##"stroke="#d62728" stroke-width="2" stroke-dasharray="6 4""##,
        );
        modes(&mut out, &f, &r.autonomy_modes, "autonomy-mode", r##"stroke="#000" stroke-width="2""##);
    }

    let path: Vec<_> = trace.records.iter().map(|r| r.robot).collect();
    if !path.is_empty() {
        let _ = writeln!(
            out,
            r##"  <polyline class="robot-path" points="{}" fill="none" stroke="#1f5fbf" stroke-width="2" marker-end="url(#arrow)"/>"##,
            f.points(&path)
        );
        let _ = writeln!(
            out,
            r##"  <circle class="robot" cx="{}" cy="{}" r="{}" fill="#1f5fbf" fill-opacity="0.4"/>"##,
            f.x(path[0]),
            f.y(path[0]),
            f.len(spec.world.robot.radius)
        );
    }
    out.push_str("</svg>\n");
    out
}

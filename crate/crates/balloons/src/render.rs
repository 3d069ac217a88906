//! Deterministic SVG snapshots of a balloon configuration at a fixed time.
//!
//! Active balloons are drawn as filled disks of radius `t`, popped balloons
//! in gray at the radius they reached, and a segment connects the centers of
//! the two balloons that popped each other. Hyperbolic balloons are true
//! model circles: a hyperbolic circle appears in the Poincaré disk as a
//! Euclidean circle with a radially shifted center.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::matching::{pop_times, MatchingResult};
use crate::process::PointSet;
use crate::space::{hyperbolic_circle_euclidean, MetricPoint, Space, Window};

#[derive(Debug, Clone)]
pub struct RenderStyle {
    pub width_px: u32,
    pub active_fill: String,
    pub active_stroke: String,
    pub popped_fill: String,
    pub popped_stroke: String,
    pub link_stroke: String,
    pub stroke_width: f64,
    /// Extra margin around the window, as a fraction of its extent.
    pub margin_frac: f64,
}

impl Default for RenderStyle {
    fn default() -> Self {
        RenderStyle {
            width_px: 720,
            active_fill: "#9ec9e8".into(),
            active_stroke: "#2d6da3".into(),
            popped_fill: "#d9d9d9".into(),
            popped_stroke: "#8c8c8c".into(),
            link_stroke: "#555555".into(),
            stroke_width: 0.8,
            margin_frac: 0.02,
        }
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.6}")
}

/// Render the balloon configuration at time `t` as an SVG 1.1 document.
/// Output bytes are a pure function of the inputs.
pub fn render_svg(ps: &PointSet, mr: &MatchingResult, t: f64, style: &RenderStyle) -> Result<String> {
    if t < 0.0 {
        return Err(Error::InvalidArgument("time must be nonnegative".into()));
    }
    enum Mode {
        Euclid,
        Hyp,
    }
    let mode = match &ps.space {
        Space::Euclidean { dim: 2 } => Mode::Euclid,
        Space::Hyperbolic => Mode::Hyp,
        other => {
            return Err(Error::Unsupported(format!(
                "rendering needs a two-dimensional space, not {other:?}"
            )))
        }
    };

    // World box.
    let (wx, wy, ww, wh) = match (&mode, &ps.window) {
        (Mode::Euclid, Window::Box { corner, sides }) => (corner[0], corner[1], sides[0], sides[1]),
        (Mode::Hyp, _) => (-1.0, -1.0, 2.0, 2.0),
        _ => return Err(Error::SpaceMismatch("window does not fit the space".into())),
    };
    let margin = style.margin_frac * ww.max(wh);
    let (wx, wy, ww, wh) = (wx - margin, wy - margin, ww + 2.0 * margin, wh + 2.0 * margin);
    let scale = style.width_px as f64 / ww;
    let height_px = (wh * scale).ceil() as u32;
    let map = |x: f64, y: f64| ((x - wx) * scale, (wy + wh - y) * scale);

    let pop = pop_times(mr, ps.len());
    let xy = |i: u32| -> (f64, f64) {
        match ps.point(i) {
            MetricPoint::Euclidean(c) => (c[0], c[1]),
            MetricPoint::Hyperbolic { x, y } => (x, y),
            MetricPoint::Tree(_) => unreachable!(),
        }
    };
    // Balloon circle in world coordinates (center + radius) for point i with
    // balloon radius rho.
    let circle = |i: u32, rho: f64| -> (f64, f64, f64) {
        let (x, y) = xy(i);
        match mode {
            Mode::Euclid => (x, y, rho),
            Mode::Hyp => hyperbolic_circle_euclidean(x, y, rho),
        }
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        concat!(
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" "#,
            r#"width="{}" height="{}" viewBox="0 0 {} {}">"#
        ),
        style.width_px, height_px, style.width_px, height_px
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if matches!(mode, Mode::Hyp) {
        let (cx, cy) = map(0.0, 0.0);
        let _ = writeln!(
            svg,
            r#"<circle class="boundary" cx="{}" cy="{}" r="{}" fill="none" stroke="#000000" stroke-width="{}"/>"#,
            fmt(cx),
            fmt(cy),
            fmt(scale),
            fmt(style.stroke_width)
        );
    }

    // Links between partners that have popped by time t.
    for p in &mr.pairs {
        if p.dist / 2.0 <= t {
            let (x1, y1) = xy(p.u);
            let (x2, y2) = xy(p.v);
            let (x1, y1) = map(x1, y1);
            let (x2, y2) = map(x2, y2);
            let _ = writeln!(
                svg,
                r#"<line class="link" x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="{}"/>"#,
                fmt(x1),
                fmt(y1),
                fmt(x2),
                fmt(y2),
                style.link_stroke,
                fmt(style.stroke_width)
            );
        }
    }
    // Popped balloons at their final size, then active balloons at radius t.
    for (class, active_pass) in [("popped", false), ("active", true)] {
        for i in 0..ps.len() as u32 {
            let is_active = pop[i as usize] > t;
            if is_active != active_pass {
                continue;
            }
            let rho = if is_active { t } else { pop[i as usize] };
            let (cx, cy, r) = circle(i, rho);
            let (cx, cy) = map(cx, cy);
            let (fill, stroke) = if is_active {
                (&style.active_fill, &style.active_stroke)
            } else {
                (&style.popped_fill, &style.popped_stroke)
            };
            let _ = writeln!(
                svg,
                r#"<circle class="{}" cx="{}" cy="{}" r="{}" fill="{}" fill-opacity="0.55" stroke="{}" stroke-width="{}"/>"#,
                class,
                fmt(cx),
                fmt(cy),
                fmt(r * scale),
                fill,
                stroke,
                fmt(style.stroke_width)
            );
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::greedy_stable_matching;
    use crate::space::{MetricPoint, Space, Window};

    fn two_point_set() -> PointSet {
        PointSet::from_points(
            Space::Euclidean { dim: 2 },
            Window::cube(2, 10.0),
            0,
            vec![
                MetricPoint::Euclidean(vec![4.0, 5.0]),
                MetricPoint::Euclidean(vec![6.0, 5.0]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn popped_pair_renders_gray_with_link() {
        let ps = two_point_set();
        let mr = greedy_stable_matching(&ps).unwrap();
        // pair distance 2, pops at t = 1; render at t = 2
        let svg = render_svg(&ps, &mr, 2.0, &RenderStyle::default()).unwrap();
        assert_eq!(svg.matches(r#"class="popped""#).count(), 2);
        assert_eq!(svg.matches(r#"class="active""#).count(), 0);
        assert_eq!(svg.matches(r#"class="link""#).count(), 1);
    }

    #[test]
    fn fresh_configuration_is_all_active() {
        let ps = two_point_set();
        let mr = greedy_stable_matching(&ps).unwrap();
        let svg = render_svg(&ps, &mr, 1e-9, &RenderStyle::default()).unwrap();
        assert_eq!(svg.matches(r#"class="active""#).count(), 2);
        assert_eq!(svg.matches(r#"class="link""#).count(), 0);
    }

    #[test]
    fn output_is_deterministic() {
        let ps = two_point_set();
        let mr = greedy_stable_matching(&ps).unwrap();
        let a = render_svg(&ps, &mr, 0.7, &RenderStyle::default()).unwrap();
        let b = render_svg(&ps, &mr, 0.7, &RenderStyle::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tree_space_is_unsupported() {
        let ps = PointSet::from_points(
            Space::RealTree { degree: 3 },
            Window::Ball { radius: 2.0 },
            0,
            vec![],
        )
        .unwrap();
        let mr = MatchingResult::default();
        assert!(render_svg(&ps, &mr, 1.0, &RenderStyle::default()).is_err());
    }
}

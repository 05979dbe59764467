//! SVG rendering of planar scenarios.

use std::fmt::Write;

use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::geometry::Obstacle;
use crate::kinematics::JointConfig;
use crate::planner::Trajectory;
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq)]
pub struct SvgStyle {
    /// Output width in pixels; height follows the scene's aspect ratio.
    pub width: f64,
    pub path_color: String,
    pub destination_color: String,
    pub obstacle_color: String,
    pub start_color: String,
    pub final_color: String,
    pub margin: f64,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle {
            width: 640.0,
            path_color: "#f5c400".into(),
            destination_color: "#1f4fd8".into(),
            obstacle_color: "#8c8c8c".into(),
            start_color: "#b0b0b0".into(),
            final_color: "#202020".into(),
            margin: 5.0,
        }
    }
}

fn num(v: f64) -> String {
    // Fixed precision keeps output stable and free of `-0`.
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

struct Bounds {
    min: [f64; 2],
    max: [f64; 2],
}

impl Bounds {
    fn empty() -> Self {
        Bounds {
            min: [f64::INFINITY; 2],
            max: [f64::NEG_INFINITY; 2],
        }
    }

    fn add(&mut self, x: f64, y: f64) {
        self.min = [self.min[0].min(x), self.min[1].min(y)];
        self.max = [self.max[0].max(x), self.max[1].max(y)];
    }
}

pub fn render_svg(scenario: &Scenario, traj: &Trajectory) -> Result<String> {
    render_svg_with(scenario, traj, &SvgStyle::default())
}

/// Draws obstacles, the start and final chain postures, the destination and
/// the end-effector path. The scene is viewed from +z with y pointing up.
pub fn render_svg_with(scenario: &Scenario, traj: &Trajectory, style: &SvgStyle) -> Result<String> {
    let postures: Vec<JointConfig> = traj.postures().cloned().collect();
    render_postures_svg(scenario, &postures, style)
}

/// Same drawing for a bare posture sequence, such as the rows of a
/// trajectory table.
pub fn render_postures_svg(scenario: &Scenario, postures: &[JointConfig], style: &SvgStyle) -> Result<String> {
    if postures.is_empty() {
        return Err(Error::invalid("nothing to render: no postures"));
    }
    if !scenario.is_planar() {
        return Err(Error::Unsupported("only planar scenarios can be rendered".into()));
    }
    let chain = &scenario.chain;
    for q in postures {
        chain.check_dimension(q)?;
    }
    let start = &postures[0];
    let last = &postures[postures.len() - 1];
    let path: Vec<Point3<f64>> = postures.iter().map(|q| chain.end_effector_at(q.angles())).collect();

    let mut b = Bounds::empty();
    let base = chain.base_isometry().translation.vector;
    let reach = chain.reach();
    b.add(base.x - reach, base.y - reach);
    b.add(base.x + reach, base.y + reach);
    b.add(scenario.destination.x, scenario.destination.y);
    for o in &scenario.env.obstacles {
        match o {
            Obstacle::Circle { center, radius } => {
                b.add(center[0] - radius, center[1] - radius);
                b.add(center[0] + radius, center[1] + radius);
            }
            Obstacle::Polygon { vertices } => vertices.iter().for_each(|v| b.add(v[0], v[1])),
            Obstacle::Sphere { .. } | Obstacle::Aabb { .. } => unreachable!("checked planar"),
        }
    }
    let m = style.margin;
    let (x0, y0) = (b.min[0] - m, b.min[1] - m);
    let (w, h) = (b.max[0] - b.min[0] + 2.0 * m, b.max[1] - b.min[1] + 2.0 * m);
    let px_h = style.width * h / w;
    let stroke = w / 400.0;
    let radius = chain.joints().iter().map(|j| j.link_radius).fold(0.0, f64::max);
    let link_width = (2.0 * radius).max(stroke * 2.0);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="{} {} {} {}">"#,
        num(style.width),
        num(px_h),
        num(x0),
        num(-(y0 + h)),
        num(w),
        num(h)
    );
    if !scenario.name.is_empty() {
        let _ = writeln!(s, "<title>{}</title>", escape(&scenario.name));
    }
    let _ = writeln!(s, r#"<g transform="scale(1,-1)">"#);

    let _ = writeln!(s, r#"<g id="obstacles" fill="{}">"#, style.obstacle_color);
    for o in &scenario.env.obstacles {
        match o {
            Obstacle::Circle { center, radius } => {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{}" cy="{}" r="{}"/>"#,
                    num(center[0]),
                    num(center[1]),
                    num(*radius)
                );
            }
            Obstacle::Polygon { vertices } => {
                let pts: Vec<String> = vertices
                    .iter()
                    .map(|v| format!("{},{}", num(v[0]), num(v[1])))
                    .collect();
                let _ = writeln!(s, r#"<polygon points="{}"/>"#, pts.join(" "));
            }
            _ => {}
        }
    }
    let _ = writeln!(s, "</g>");

    chain_group(&mut s, scenario, start, "start", &style.start_color, link_width);
    chain_group(&mut s, scenario, last, "final", &style.final_color, link_width);

    let pts: Vec<String> = path.iter().map(|p| format!("{},{}", num(p.x), num(p.y))).collect();
    let _ = writeln!(
        s,
        r#"<polyline id="path" fill="none" stroke="{}" stroke-width="{}" points="{}"/>"#,
        style.path_color,
        num(stroke * 2.0),
        pts.join(" ")
    );

    let d = scenario.destination;
    let _ = writeln!(
        s,
        r#"<circle id="destination" cx="{}" cy="{}" r="{}" fill="none" stroke="{}" stroke-width="{}"/>"#,
        num(d.x),
        num(d.y),
        num(scenario.epsilon),
        style.destination_color,
        num(stroke)
    );
    let _ = writeln!(
        s,
        r#"<circle cx="{}" cy="{}" r="{}" fill="{}"/>"#,
        num(d.x),
        num(d.y),
        num(stroke * 2.0),
        style.destination_color
    );
    let _ = writeln!(s, "</g>\n</svg>");
    Ok(s)
}

fn chain_group(s: &mut String, scenario: &Scenario, q: &JointConfig, id: &str, color: &str, width: f64) {
    let segs = scenario.chain.link_segments(q.angles());
    let mut pts = vec![format!("{},{}", num(segs[0].p0.x), num(segs[0].p0.y))];
    pts.extend(segs.iter().map(|g| format!("{},{}", num(g.p1.x), num(g.p1.y))));
    let _ = writeln!(
        s,
        r#"<polyline id="{id}" fill="none" stroke="{color}" stroke-opacity="0.8" stroke-linecap="round" stroke-linejoin="round" stroke-width="{}" points="{}"/>"#,
        num(width),
        pts.join(" ")
    );
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

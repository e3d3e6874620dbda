//! Top-down footstep trace as SVG: one rectangle per footstep (left feet
//! outlined), an arrowhead at each toe, and start and goal pose markers.

use std::fmt::Write as _;

use goto_core::se2::Pose2;
use goto_core::sim::{Foot, StepRecord};

/// Pixels per meter.
const SCALE: f64 = 200.0;
/// m
const MARGIN: f64 = 0.4;
/// m
const FOOT_LEN: f64 = 0.22;
/// m
const FOOT_WIDTH: f64 = 0.1;
/// m
const MARKER_LEN: f64 = 0.2;

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

struct Frame {
    x0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64, y: f64) -> (String, String) {
        (num((x - self.x0) * SCALE), num((self.y1 - y) * SCALE))
    }

    /// `translate(..) rotate(..)` placing body-frame drawing at `p`.
    fn place(&self, p: &Pose2) -> String {
        let (x, y) = self.px(p.x, p.y);
        format!("translate({x} {y}) rotate({})", num(-p.theta.to_degrees()))
    }
}

fn pose_marker(s: &mut String, f: &Frame, p: &Pose2, class: &str, color: &str) {
    let r = num(0.06 * SCALE);
    let tip = num(MARKER_LEN * SCALE);
    writeln!(
        s,
        r#"<g class="{class}" transform="{}"><circle r="{r}" fill="none" stroke="{color}" stroke-width="2"/><line x1="0" y1="0" x2="{tip}" y2="0" stroke="{color}" stroke-width="2"/><polygon points="{tip},-6 {},0 {tip},6" fill="{color}"/></g>"#,
        f.place(p),
        num(MARKER_LEN * SCALE + 10.0)
    )
    .unwrap();
}

/// Deterministic SVG of a trial from `start` to `goal`.
pub fn render_trace(start: &Pose2, goal: &Pose2, steps: &[StepRecord]) -> String {
    let xs = steps.iter().map(|r| r.pose.x).chain([start.x, goal.x]);
    let ys = steps.iter().map(|r| r.pose.y).chain([start.y, goal.y]);
    let (x0, x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (y0, y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let f = Frame { x0: x0 - MARGIN, y1: y1 + MARGIN };
    let w = num((x1 - x0 + 2.0 * MARGIN) * SCALE);
    let h = num((y1 - y0 + 2.0 * MARGIN) * SCALE);

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#).unwrap();
    let (lx, ly) = (num(-FOOT_LEN * SCALE / 2.0), num(-FOOT_WIDTH * SCALE / 2.0));
    let (lw, lh) = (num(FOOT_LEN * SCALE), num(FOOT_WIDTH * SCALE));
    let toe = FOOT_LEN * SCALE / 2.0;
    for r in steps {
        let (class, fill, border) = match r.foot {
            Foot::Left => ("foot left", "#1f77b4", r##" stroke="#0b3050" stroke-width="2""##),
            Foot::Right => ("foot right", "#ff7f0e", ""),
        };
        writeln!(
            s,
            r#"<g class="{class}" transform="{}"><rect x="{lx}" y="{ly}" width="{lw}" height="{lh}" fill="{fill}" fill-opacity="0.5"{border}/><polygon points="{},-7 {},0 {},7" fill="{fill}"/></g>"#,
            f.place(&r.pose),
            num(toe - 8.0),
            num(toe + 6.0),
            num(toe - 8.0),
        )
        .unwrap();
    }
    pose_marker(&mut s, &f, start, "start", "#2ca02c");
    pose_marker(&mut s, &f, goal, "goal", "#d62728");
    s.push_str("</svg>\n");
    s
}

//! SVG rendering of an orbit inside its bounding ellipse.

use std::fmt::Write;

use twocenter::curve::Point;
use twocenter::dynamics::{PRIMARY_E, PRIMARY_M};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 0.05;

pub struct Plot<'a> {
    pub samples: &'a [Point],
    pub markers: &'a [usize],
    pub lambda_max: f64,
    pub arrows: bool,
    pub title: String,
}

struct Frame {
    scale: f64,
}

impl Frame {
    /// Fits the ellipse `lambda = lambda_max` into the view box with margins.
    fn new(lambda_max: f64) -> Self {
        let (a, b) = (lambda_max.cosh(), lambda_max.sinh());
        let scale = ((1.0 - 2.0 * MARGIN) * WIDTH / (2.0 * a)).min((1.0 - 2.0 * MARGIN) * HEIGHT / (2.0 * b));
        Frame { scale }
    }

    fn map(&self, p: Point) -> (f64, f64) {
        (0.5 * WIDTH + self.scale * p.re, 0.5 * HEIGHT - self.scale * p.im)
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render(plot: &Plot) -> String {
    let frame = Frame::new(plot.lambda_max);
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, "  <title>{}</title>", escape(&plot.title));
    let _ = writeln!(s, r#"  <rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"  <ellipse cx="{:.3}" cy="{:.3}" rx="{:.3}" ry="{:.3}" fill="none" stroke="gray" stroke-dasharray="6 4"/>"#,
        0.5 * WIDTH,
        0.5 * HEIGHT,
        frame.scale * plot.lambda_max.cosh(),
        frame.scale * plot.lambda_max.sinh()
    );
    let mut pts = String::new();
    for &p in plot.samples {
        let (x, y) = frame.map(p);
        let _ = write!(pts, "{x:.3},{y:.3} ");
    }
    let _ = writeln!(
        s,
        r#"  <polygon points="{}" fill="none" stroke="black" stroke-width="1.2" stroke-linejoin="round"/>"#,
        pts.trim_end()
    );
    if plot.arrows {
        let n = plot.samples.len();
        let count = 12.min(n);
        for j in 0..count {
            let i = j * n / count;
            let (a, b) = (plot.samples[i], plot.samples[(i + 1) % n]);
            let d = b - a;
            if d.norm() == 0.0 {
                continue;
            }
            let (x, y) = frame.map(a);
            // Screen y points down, so the heading angle flips sign.
            let angle = -d.arg().to_degrees();
            let _ = writeln!(
                s,
                r#"  <path d="M 0 0 L -9 -4 L -9 4 Z" fill="black" transform="translate({x:.3} {y:.3}) rotate({angle:.3})"/>"#
            );
        }
    }
    for (name, q) in [("E", PRIMARY_E), ("M", PRIMARY_M)] {
        let (x, y) = frame.map(q);
        let _ = writeln!(s, r#"  <circle cx="{x:.3}" cy="{y:.3}" r="4" fill="black"/>"#);
        let _ = writeln!(
            s,
            r#"  <text x="{:.3}" y="{:.3}" font-family="serif" font-size="16">{name}</text>"#,
            x + 6.0,
            y - 6.0
        );
    }
    for &m in plot.markers {
        if let Some(&p) = plot.samples.get(m) {
            let (x, y) = frame.map(p);
            let _ = writeln!(
                s,
                r#"  <circle cx="{x:.3}" cy="{y:.3}" r="7" fill="none" stroke="red" stroke-width="2"/>"#
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

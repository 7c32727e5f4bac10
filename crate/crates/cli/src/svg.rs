//! Plain SVG emission: cubes, polygons, paths and arrows in model
//! coordinates (y up).

use std::fmt::Write;

use fracspace_core::geometry::{Point, Rect, WhitneyCover};

/// Canvas width in pixels; the height follows the aspect ratio.
const WIDTH: f64 = 800.0;

pub struct Plot {
    view: Rect,
    scale: f64,
    body: String,
}

impl Plot {
    pub fn new(view: Rect) -> Plot {
        Plot { view, scale: WIDTH / view.width(), body: String::new() }
    }

    fn px(&self, p: Point) -> (f64, f64) {
        ((p.x - self.view.x0) * self.scale, (self.view.y1 - p.y) * self.scale)
    }

    pub fn rect(&mut self, r: &Rect, fill: &str, stroke: &str) {
        let (x, y) = self.px(Point::new(r.x0, r.y1));
        let (w, h) = (r.width() * self.scale, r.height() * self.scale);
        let _ = writeln!(
            self.body,
            r#"<rect x="{x:.3}" y="{y:.3}" width="{w:.3}" height="{h:.3}" fill="{fill}" stroke="{stroke}" stroke-width="0.3"/>"#
        );
    }

    pub fn polygon(&mut self, pts: &[Point], stroke: &str, width: f64) {
        let coords: Vec<String> = pts.iter().map(|&p| self.px(p)).map(|(x, y)| format!("{x:.3},{y:.3}")).collect();
        let _ = writeln!(self.body, r#"<polygon points="{}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#, coords.join(" "));
    }

    pub fn polyline(&mut self, pts: &[Point], stroke: &str, width: f64) {
        let coords: Vec<String> = pts.iter().map(|&p| self.px(p)).map(|(x, y)| format!("{x:.3},{y:.3}")).collect();
        let _ = writeln!(self.body, r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#, coords.join(" "));
    }

    pub fn arrow(&mut self, a: Point, b: Point, stroke: &str) {
        let (x1, y1) = self.px(a);
        let (x2, y2) = self.px(b);
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="{stroke}" stroke-width="0.6" marker-end="url(#head)"/>"#
        );
    }

    pub fn finish(self) -> String {
        let h = self.view.height() * self.scale;
        format!(
            concat!(
                r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.3} {h:.3}">"#,
                "\n",
                r#"<defs><marker id="head" markerWidth="6" markerHeight="6" refX="5" refY="3" orient="auto"><path d="M0,0 L6,3 L0,6 z" fill="black"/></marker></defs>"#,
                "\n{body}</svg>\n"
            ),
            w = WIDTH,
            h = h,
            body = self.body
        )
    }
}

/// Hue ramp from coarse (blue) to fine (red).
pub fn level_color(level: u8, lo: u8, hi: u8) -> String {
    let t = if hi > lo { (level - lo) as f64 / (hi - lo) as f64 } else { 0.0 };
    format!("hsl({:.0},70%,75%)", 240.0 * (1.0 - t))
}

/// White to dark red for `t` in `[0, 1]`.
pub fn heat_color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let g = (255.0 * (1.0 - t)).round() as u8;
    format!("rgb({},{g},{g})", (255.0 - 100.0 * t).round() as u8)
}

/// The cover's cubes colored by level, frontier cubes outlined in red, with
/// the polygon on top.
pub fn cover_plot(covers: &[&WhitneyCover]) -> Plot {
    let mut view = covers[0].region();
    for c in covers {
        let r = c.region();
        view = Rect::new(view.x0.min(r.x0), view.y0.min(r.y0), view.x1.max(r.x1), view.y1.max(r.y1));
    }
    let mut plot = Plot::new(view);
    let levels = covers.iter().flat_map(|c| c.cubes().iter().map(|q| q.level));
    let (lo, hi) = levels.fold((u8::MAX, 0), |(a, b), l| (a.min(l), b.max(l)));
    for c in covers {
        for (i, q) in c.cubes().iter().enumerate() {
            let stroke = if c.is_frontier(i) { "red" } else { "gray" };
            plot.rect(&q.rect(), &level_color(q.level, lo, hi), stroke);
        }
    }
    plot.polygon(covers[0].domain().vertices(), "black", 1.5);
    plot
}

/// Cubes filled by `values` scaled to their maximum.
pub fn heat_plot(cover: &WhitneyCover, values: &[f64]) -> Plot {
    let mut plot = Plot::new(cover.region());
    let top = values.iter().cloned().fold(0.0_f64, f64::max);
    for (q, v) in cover.cubes().iter().zip(values) {
        let t = if top > 0.0 { v / top } else { 0.0 };
        plot.rect(&q.rect(), &heat_color(t), "none");
    }
    plot.polygon(cover.domain().vertices(), "black", 1.5);
    plot
}

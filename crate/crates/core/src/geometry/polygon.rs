use alloc::vec::Vec;

use super::point::{orient, point_segment_distance, segment_rect_distance, segments_intersect, Point, Rect};
use crate::math::Float;
use crate::Error;

/// A bounded open domain given by a simple polygon.
///
/// Vertices are stored counterclockwise. The boundary is excluded from the
/// domain: `contains` is false on every edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    vertices: Vec<Point>,
    diameter: f64,
    area: f64,
    bbox: Rect,
}

/// Signed shoelace area, positive for counterclockwise order.
pub fn shoelace_area(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += vertices[i].cross(vertices[(i + 1) % n]);
    }
    0.5 * acc
}

impl Domain {
    /// Validates and normalizes a polygon.
    pub fn new(mut vertices: Vec<Point>) -> Result<Self, Error> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::TooFewVertices(n));
        }
        for i in 0..n {
            let p = vertices[i];
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::InvalidParameter(alloc::format!("vertex {i} is not finite")));
            }
            if p == vertices[(i + 1) % n] {
                return Err(Error::RepeatedVertex((i + 1) % n));
            }
        }
        for i in 0..n {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            for j in i + 1..n {
                let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    // Shared vertex is fine; folding back along the same line is not.
                    let (shared, other_a, other_b) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                    let u = other_a - shared;
                    let v = other_b - shared;
                    if u.cross(v) == 0.0 && u.dot(v) > 0.0 {
                        return Err(Error::SelfIntersection { edge_a: i, edge_b: j });
                    }
                } else if segments_intersect(a, b, c, d) {
                    return Err(Error::SelfIntersection { edge_a: i, edge_b: j });
                }
            }
        }
        let mut area = shoelace_area(&vertices);
        if area == 0.0 {
            return Err(Error::DegeneratePolygon);
        }
        if area < 0.0 {
            vertices.reverse();
            area = -area;
        }
        let mut diameter: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                diameter = diameter.max(vertices[i].dist(vertices[j]));
            }
        }
        let mut bbox = Rect::new(f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &vertices {
            bbox.x0 = bbox.x0.min(p.x);
            bbox.y0 = bbox.y0.min(p.y);
            bbox.x1 = bbox.x1.max(p.x);
            bbox.y1 = bbox.y1.max(p.y);
        }
        Ok(Domain { vertices, diameter, area, bbox })
    }

    /// Regular `n`-gon inscribed in the circle of radius `r` about `c`.
    pub fn regular_polygon(n: usize, c: Point, r: f64) -> Result<Self, Error> {
        let verts = (0..n)
            .map(|k| {
                let t = 2.0 * core::f64::consts::PI * k as f64 / n as f64;
                Point::new(c.x + r * t.cos(), c.y + r * t.sin())
            })
            .collect();
        Domain::new(verts)
    }

    pub fn unit_square() -> Self {
        Domain::new(alloc::vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0),])
            .expect("unit square is simple")
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn bounding_box(&self) -> Rect {
        self.bbox
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Euclidean distance from `p` to the boundary polygon.
    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        self.edges().map(|(a, b)| point_segment_distance(p, a, b)).fold(f64::INFINITY, f64::min)
    }

    /// Strict interior test; boundary points are outside.
    pub fn contains(&self, p: Point) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if orient(a, b, p) == 0.0 && p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y) {
                return false;
            }
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Set distance between the boundary and a closed rectangle.
    pub fn distance_to_rect(&self, r: &Rect) -> f64 {
        self.edges().map(|(a, b)| segment_rect_distance(a, b, r)).fold(f64::INFINITY, f64::min)
    }

    /// True when some boundary point lies in the open rectangle.
    pub fn boundary_meets_open_rect(&self, r: &Rect) -> bool {
        for (a, b) in self.edges() {
            if let Some((t0, t1)) = r.clip_segment(a, b) {
                // The clipped piece lies in the closed rectangle; if any of it
                // is interior then so is its midpoint (convexity).
                let m = a + (b - a) * (0.5 * (t0 + t1));
                if r.contains_open(m) {
                    return true;
                }
            }
        }
        false
    }

    /// Where a closed rectangle sits relative to the domain.
    pub fn classify_rect(&self, r: &Rect) -> RectClass {
        let d = self.distance_to_rect(r);
        if d == 0.0 && self.boundary_meets_open_rect(r) {
            return RectClass::Straddles;
        }
        let inside = self.contains(r.center());
        RectClass::Clear { inside, dist: d }
    }

    /// Diameter of the part of the boundary inside the closed disk.
    pub fn boundary_diameter_in_disk(&self, c: Point, radius: f64) -> f64 {
        let mut pts: Vec<Point> = Vec::new();
        let r2 = radius * radius;
        for (a, b) in self.edges() {
            let d = b - a;
            let f = a - c;
            let qa = d.norm2();
            let qb = 2.0 * f.dot(d);
            let qc = f.norm2() - r2;
            let disc = qb * qb - 4.0 * qa * qc;
            if disc < 0.0 {
                continue;
            }
            let sq = disc.sqrt();
            let t0 = ((-qb - sq) / (2.0 * qa)).max(0.0);
            let t1 = ((-qb + sq) / (2.0 * qa)).min(1.0);
            if t0 <= t1 {
                pts.push(a + d * t0);
                pts.push(a + d * t1);
            }
        }
        let mut diam: f64 = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                diam = diam.max(pts[i].dist(pts[j]));
            }
        }
        diam
    }

    /// Area of the domain inside a closed rectangle (polygon clipped
    /// against the four half-planes).
    pub fn area_in_rect(&self, r: &Rect) -> f64 {
        let poly = self.clip_to_rect(r);
        if poly.len() < 3 {
            0.0
        } else {
            shoelace_area(&poly).abs()
        }
    }

    /// Area and centroid of the part of the domain inside `r`; `None` when
    /// the part is empty.
    pub fn moments_in_rect(&self, r: &Rect) -> Option<(f64, Point)> {
        polygon_moments(&self.clip_to_rect(r))
    }

    /// The polygon clipped to a closed rectangle.
    pub fn clip_to_rect(&self, r: &Rect) -> Vec<Point> {
        clip_polygon_to_rect(&self.vertices, r)
    }

    /// The same polygon moved by `v`.
    pub fn translated(&self, v: Point) -> Domain {
        Domain::new(self.vertices.iter().map(|&p| p + v).collect()).expect("translation preserves simplicity")
    }

    /// The same polygon scaled by `k > 0` about the origin.
    pub fn scaled(&self, k: f64) -> Domain {
        Domain::new(self.vertices.iter().map(|&p| p * k).collect()).expect("scaling preserves simplicity")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RectClass {
    /// The boundary passes through the open rectangle.
    Straddles,
    /// The open rectangle lies on one side of the boundary.
    Clear { inside: bool, dist: f64 },
}

/// Sutherland–Hodgman clip of a closed polygon against a closed rectangle.
pub fn clip_polygon_to_rect(vertices: &[Point], r: &Rect) -> Vec<Point> {
    let mut poly: Vec<Point> = vertices.to_vec();
    // (axis, bound, keep_greater)
    let planes = [(0, r.x0, true), (0, r.x1, false), (1, r.y0, true), (1, r.y1, false)];
    for (axis, bound, keep_greater) in planes {
        if poly.is_empty() {
            break;
        }
        let coord = |p: &Point| if axis == 0 { p.x } else { p.y };
        let inside = |p: &Point| {
            if keep_greater {
                coord(p) >= bound
            } else {
                coord(p) <= bound
            }
        };
        let mut out = Vec::with_capacity(poly.len() + 4);
        for i in 0..poly.len() {
            let a = poly[i];
            let b = poly[(i + 1) % poly.len()];
            let (ia, ib) = (inside(&a), inside(&b));
            if ia {
                out.push(a);
            }
            if ia != ib {
                let t = (bound - coord(&a)) / (coord(&b) - coord(&a));
                let mut q = a + (b - a) * t;
                if axis == 0 {
                    q.x = bound;
                } else {
                    q.y = bound;
                }
                out.push(q);
            }
        }
        poly = out;
    }
    poly
}

/// Area and centroid of a simple polygon; `None` when degenerate.
pub fn polygon_moments(poly: &[Point]) -> Option<(f64, Point)> {
    if poly.len() < 3 {
        return None;
    }
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        let c = p.cross(q);
        a += c;
        cx += (p.x + q.x) * c;
        cy += (p.y + q.y) * c;
    }
    if a == 0.0 {
        return None;
    }
    Some((0.5 * a.abs(), Point::new(cx / (3.0 * a), cy / (3.0 * a))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    #[test]
    fn unit_square_loads() {
        let d = Domain::new(pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])).unwrap();
        assert!((d.diameter() - 2.0_f64.sqrt()).abs() < 1e-15);
        assert_eq!(d.area(), 1.0);
    }

    #[test]
    fn clockwise_input_is_normalized() {
        let d = Domain::new(pts(&[(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)])).unwrap();
        assert!(shoelace_area(d.vertices()) > 0.0);
    }

    #[test]
    fn bowtie_is_rejected() {
        let e = Domain::new(pts(&[(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)])).unwrap_err();
        assert!(matches!(e, Error::SelfIntersection { .. }));
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(Domain::new(pts(&[(0.0, 0.0), (1.0, 0.0)])).unwrap_err(), Error::TooFewVertices(2));
        let e = Domain::new(pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 1.0)])).unwrap_err();
        assert_eq!(e, Error::RepeatedVertex(2));
        let e = Domain::new(pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)])).unwrap_err();
        assert!(matches!(e, Error::SelfIntersection { .. } | Error::DegeneratePolygon));
    }

    #[test]
    fn sixty_four_gon_area() {
        // Independent oracle: area of the inscribed regular n-gon, (n/2) sin(2 pi / n).
        let d = Domain::regular_polygon(64, Point::new(0.0, 0.0), 1.0).unwrap();
        let oracle = 32.0 * (2.0 * core::f64::consts::PI / 64.0).sin();
        assert!((d.area() - oracle).abs() < 1e-12);
        assert!((d.area() - core::f64::consts::PI).abs() < 1e-2);
    }

    #[test]
    fn boundary_distance_examples() {
        let d = Domain::unit_square();
        assert_eq!(d.distance_to_boundary(Point::new(0.5, 0.5)), 0.5);
        assert_eq!(d.distance_to_boundary(Point::new(0.5, 0.25)), 0.25);
        assert_eq!(d.distance_to_boundary(Point::new(2.0, 0.5)), 1.0);
    }

    #[test]
    fn boundary_is_not_inside() {
        let d = Domain::unit_square();
        assert!(d.contains(Point::new(0.5, 0.5)));
        assert!(!d.contains(Point::new(0.0, 0.5)));
        assert!(!d.contains(Point::new(1.0, 1.0)));
        assert!(!d.contains(Point::new(1.5, 0.5)));
        assert!(d.distance_to_boundary(Point::new(0.0, 0.3)) < 1e-15);
    }

    #[test]
    fn rect_classification() {
        let d = Domain::unit_square();
        let inner = Rect::new(0.0, 0.0, 0.5, 0.5);
        assert_eq!(d.classify_rect(&inner), RectClass::Clear { inside: true, dist: 0.0 });
        let straddle = Rect::new(-0.25, 0.25, 0.25, 0.5);
        assert_eq!(d.classify_rect(&straddle), RectClass::Straddles);
        let outer = Rect::new(1.0, 0.0, 1.5, 0.5);
        assert_eq!(d.classify_rect(&outer), RectClass::Clear { inside: false, dist: 0.0 });
    }

    #[test]
    fn boundary_diameter_in_disk() {
        let d = Domain::unit_square();
        let diam = d.boundary_diameter_in_disk(Point::new(0.5, -0.1), 0.2);
        let chord = 2.0 * (0.2_f64 * 0.2 - 0.1 * 0.1).sqrt();
        assert!((diam - chord).abs() < 1e-12);
        assert_eq!(d.boundary_diameter_in_disk(Point::new(0.5, 0.5), 0.1), 0.0);
    }

    #[test]
    fn clipped_area() {
        let l = Domain::new(pts(&[(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)])).unwrap();
        assert_eq!(l.area(), 3.0);
        assert!((l.area_in_rect(&Rect::new(0.5, 0.5, 1.5, 1.5)) - 0.75).abs() < 1e-15);
        assert_eq!(l.area_in_rect(&Rect::new(1.2, 1.2, 1.8, 1.8)), 0.0);
        let tri = Domain::new(pts(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)])).unwrap();
        let a = tri.area_in_rect(&Rect::new(0.0, 0.0, 0.5, 0.5));
        assert!((a - 0.25).abs() < 1e-15);
    }
}

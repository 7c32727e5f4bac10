use std::collections::BTreeSet;

use fracspace_core::geometry::*;
use fracspace_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn disk() -> Domain {
    Domain::regular_polygon(64, Point::new(0.0, 0.0), 1.0).unwrap()
}

fn lshape() -> Domain {
    let v = [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)];
    Domain::new(v.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
}

fn keys(c: &WhitneyCover) -> BTreeSet<(u8, i64, i64)> {
    c.cubes().iter().map(|q| q.key()).collect()
}

#[test]
fn load_domain_examples() {
    let sq = Domain::unit_square();
    assert!((sq.diameter() - 2f64.sqrt()).abs() < 1e-15);
    let bowtie = [(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)].iter().map(|&(x, y)| Point::new(x, y)).collect();
    assert!(matches!(Domain::new(bowtie), Err(Error::SelfIntersection { .. })));

    // Shoelace by hand: n/2 sin(2 pi/n) for the inscribed regular n-gon.
    let n = 64.0;
    let shoelace = 0.5 * n * (2.0 * std::f64::consts::PI / n).sin();
    let d = disk();
    assert!((d.area() - shoelace).abs() < 1e-12);
    assert!((d.area() - std::f64::consts::PI).abs() < 1e-2);
}

#[test]
fn distance_examples() {
    let sq = Domain::unit_square();
    assert_eq!(sq.distance_to_boundary(Point::new(0.5, 0.5)), 0.5);
    assert_eq!(sq.distance_to_boundary(Point::new(0.5, 0.25)), 0.25);
    assert_eq!(sq.distance_to_boundary(Point::new(2.0, 0.5)), 1.0);
    assert!(!sq.contains(Point::new(0.0, 0.3)));
    assert!(!sq.contains(Point::new(1.0, 1.0)));
}

#[test]
fn long_distance_of_separated_cubes() {
    let q = DyadicCube::new(0, 0, 0, 1.0);
    let s = DyadicCube::new(0, 3, 0, 1.0);
    let direct = q.side() + (s.rect().x0 - q.rect().x1) + s.side();
    assert_eq!(long_distance(&q, &s), direct);
    assert_eq!(direct, 4.0);
    assert_eq!(long_distance(&q, &q), 2.0);
    let t = DyadicCube::new(0, 1, 0, 1.0);
    assert_eq!(long_distance(&q, &t), 2.0);
}

/// Top-down reference construction for the unit square, where the distance
/// from an inner rectangle to the boundary is `min(x0, y0, 1 - x1, 1 - y1)`.
fn square_reference(c_w: f64, max_level: u8, root: f64) -> BTreeSet<(u8, i64, i64)> {
    fn visit(level: u8, ix: i64, iy: i64, c_w: f64, max_level: u8, root: f64, out: &mut BTreeSet<(u8, i64, i64)>) {
        let h = root / (1u64 << level) as f64;
        let (x0, y0) = (ix as f64 * h, iy as f64 * h);
        let (x1, y1) = (x0 + h, y0 + h);
        if x1 <= 0.0 || y1 <= 0.0 || x0 >= 1.0 || y0 >= 1.0 {
            return;
        }
        let inside = x0 >= 0.0 && y0 >= 0.0 && x1 <= 1.0 && y1 <= 1.0;
        if inside {
            let d = x0.min(y0).min(1.0 - x1).min(1.0 - y1);
            if c_w * h <= d && d <= 4.0 * c_w * h {
                out.insert((level, ix, iy));
                return;
            }
            if level == max_level {
                out.insert((level, ix, iy));
                return;
            }
        }
        if level < max_level {
            for (a, b) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                visit(level + 1, 2 * ix + a, 2 * iy + b, c_w, max_level, root, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    let n = (1.0 / root).ceil() as i64;
    for ix in 0..n {
        for iy in 0..n {
            visit(0, ix, iy, c_w, max_level, root, &mut out);
        }
    }
    out
}

#[test]
fn square_cover_matches_exhaustive_scan() {
    for (c_w, level) in [(1.0, 6), (DEFAULT_C_W, 6), (DEFAULT_C_W, 7)] {
        let c = build_cover(&Domain::unit_square(), Side::Interior, c_w, level).unwrap();
        let reference = square_reference(c_w, level, c.root_scale());
        assert_eq!(keys(&c), reference, "c_w = {c_w}, level {level}");
    }
}

#[test]
fn covers_have_no_local_violations() {
    for (name, d) in [("square", Domain::unit_square()), ("disk", disk()), ("lshape", lshape())] {
        for side in [Side::Interior, Side::Exterior] {
            let c = build_cover(&d, side, DEFAULT_C_W, 6).unwrap();
            let r = validate_cover(&c);
            let local: Vec<_> = r.local_violations().collect();
            assert!(local.is_empty(), "{name} {side:?}: {:?}", &local[..local.len().min(5)]);
            assert_eq!(r.cubes, c.len());
        }
    }
}

#[test]
fn bracket_by_independent_distance() {
    // Distance from each cube (as a set) to the boundary, computed from the
    // polygon edges directly.
    let d = lshape();
    let c = build_cover(&d, Side::Interior, DEFAULT_C_W, 6).unwrap();
    for (i, q) in c.cubes().iter().enumerate() {
        let r = q.rect();
        let dist = d.edges().map(|(a, b)| segment_rect_distance(a, b, &r)).fold(f64::INFINITY, f64::min);
        let l = q.side();
        assert!(dist <= 4.0 * c.c_w() * l * (1.0 + 1e-12), "cube {i}");
        if !c.is_frontier(i) {
            assert!(dist >= c.c_w() * l * (1.0 - 1e-12), "cube {i}");
        }
    }
}

#[test]
fn superposition_bound_needs_large_constant() {
    assert_eq!(superposition_bound(DEFAULT_C_W), None);
    assert_eq!(superposition_bound(34.0), None);
    assert!(superposition_bound(40.0).is_some());
    let c = build_cover(&Domain::unit_square(), Side::Interior, DEFAULT_C_W, 5).unwrap();
    let r = validate_cover(&c);
    assert!(r.violations.iter().any(|v| matches!(v, Violation::SuperpositionUnbounded { .. })));
    assert_eq!(r.max_overlap_50q, *overlap_50q_at_centers(&c).iter().max().unwrap());
}

#[test]
fn constructed_faults_are_reported() {
    let c = build_cover(&Domain::unit_square(), Side::Interior, DEFAULT_C_W, 5).unwrap();
    // One of the biggest cubes, away from the frontier.
    let top = c.cubes().iter().map(|q| q.level).min().unwrap();
    let i = (0..c.len()).find(|&i| !c.is_frontier(i) && c.cube(i).level == top).unwrap();
    let holed = c.without_cube(i);
    assert!(validate_cover(&holed).violations.iter().any(|v| matches!(v, Violation::Hole { .. })));

    // A cube with a finer neighbor outside its parent: the merged parent
    // then touches a cube four times smaller.
    let j = (0..c.len())
        .find(|&j| {
            let parent = c.cube(j).parent().unwrap();
            c.neighbors(j).iter().any(|&k| c.cube(k).level > c.cube(j).level && !c.cube(k).is_within(&parent))
        })
        .unwrap();
    let merged = c.with_merged_parent(j).unwrap();
    assert!(validate_cover(&merged).violations.iter().any(|v| matches!(v, Violation::NeighborRatio { .. })));
}

#[test]
fn tiny_domain_has_no_qualifying_cube() {
    let d = Domain::unit_square().scaled(1e-6);
    assert!(matches!(build_cover(&d, Side::Interior, DEFAULT_C_W, 3), Err(Error::NoQualifyingCube { .. })));
}

#[test]
fn random_points_land_in_exactly_one_cube() {
    let d = disk();
    let c = build_cover(&d, Side::Interior, DEFAULT_C_W, 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut tested = 0;
    while tested < 10_000 {
        let p = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if !d.contains(p) {
            continue;
        }
        let owners: Vec<usize> = (0..c.len())
            .filter(|&i| {
                let r = c.cube(i).rect();
                p.x >= r.x0 && p.x < r.x1 && p.y >= r.y0 && p.y < r.y1
            })
            .collect();
        if owners.is_empty() {
            // Point in the uncovered collar: must be close to the boundary.
            assert!(d.distance_to_boundary(p) < 2.0 * c.c_w() * c.root_scale() / 64.0);
            assert_eq!(c.cube_of_point(p), None);
            continue;
        }
        assert_eq!(owners.len(), 1);
        assert_eq!(c.cube_of_point(p), Some(owners[0]));
        tested += 1;
    }
}

#[test]
fn refinement_keeps_settled_cubes() {
    for d in [Domain::unit_square(), disk(), lshape()] {
        let a = build_cover(&d, Side::Interior, DEFAULT_C_W, 5).unwrap();
        let b = keys(&build_cover(&d, Side::Interior, DEFAULT_C_W, 6).unwrap());
        for (i, q) in a.cubes().iter().enumerate() {
            if !a.is_frontier(i) {
                assert!(b.contains(&q.key()));
            }
        }
    }
}

#[test]
fn collar_shrinks_with_level() {
    // Uncovered cells straddle the boundary, so they lie in the band of
    // half-width sqrt2 h around it; on average the measure halves per level.
    let d = disk();
    let perimeter: f64 = d.edges().map(|(a, b)| a.dist(b)).sum();
    for side in [Side::Interior, Side::Exterior] {
        let mut measures = Vec::new();
        for level in 4..=8u8 {
            let c = build_cover(&d, side, DEFAULT_C_W, level).unwrap();
            let h = c.root_scale() / (1u64 << level) as f64;
            let u = c.uncovered_measure();
            assert!(u > 0.0 && u <= 2.0 * 2f64.sqrt() * h * perimeter, "{side:?} {level}");
            let cells = c.collar_cells();
            let total: f64 = cells.iter().map(|q| d.area_in_rect(&q.rect())).sum();
            let expected = if side == Side::Interior { total } else { cells.iter().map(|q| q.rect().area()).sum::<f64>() - total };
            assert!((expected - u).abs() < 1e-9 * u.max(1.0), "{side:?} {level}: {expected} vs {u}");
            measures.push(u);
        }
        let rate = (measures[0] / measures[4]).powf(0.25);
        assert!(rate > 1.9 && rate < 2.1, "{side:?}: {rate}");
    }
    let sq = build_cover(&Domain::unit_square(), Side::Interior, DEFAULT_C_W, 6).unwrap();
    assert_eq!(sq.uncovered_measure(), 0.0);
    assert!(sq.collar_cells().is_empty());
}

#[test]
fn translation_by_lattice_vector_shifts_cover() {
    let d = lshape();
    let a = build_cover(&d, Side::Interior, DEFAULT_C_W, 6).unwrap();
    let b = build_cover(&d.translated(Point::new(2.0, -4.0)), Side::Interior, DEFAULT_C_W, 6).unwrap();
    assert_eq!(a.len(), b.len());
    assert_eq!(a.root_scale(), b.root_scale());
    for (p, q) in a.cubes().iter().zip(b.cubes()) {
        let (cp, cq) = (p.center(), q.center());
        assert_eq!(p.level, q.level);
        assert_eq!((cq.x - cp.x, cq.y - cp.y), (2.0, -4.0));
    }
}

#[test]
fn clipping_and_moments() {
    let tri = vec![Point::new(0.0, 0.0), Point::new(2.0, 0.0), Point::new(0.0, 2.0)];
    let (a, c) = polygon_moments(&tri).unwrap();
    assert!((a - 2.0).abs() < 1e-15);
    assert!((c.x - 2.0 / 3.0).abs() < 1e-15 && (c.y - 2.0 / 3.0).abs() < 1e-15);
    // The unit cell at the origin is fully inside the triangle.
    let clipped = clip_polygon_to_rect(&tri, &Rect::new(0.0, 0.0, 1.0, 1.0));
    let (a, c) = polygon_moments(&clipped).unwrap();
    assert!((a - 1.0).abs() < 1e-15 && (c.x - 0.5).abs() < 1e-15);
    // Cut by the hypotenuse: the triangle (1,0),(2,0),(1,1) minus nothing.
    let clipped = clip_polygon_to_rect(&tri, &Rect::new(1.0, 0.0, 2.0, 1.0));
    let (a, c) = polygon_moments(&clipped).unwrap();
    assert!((a - 0.5).abs() < 1e-15);
    assert!((c.x - 4.0 / 3.0).abs() < 1e-15 && (c.y - 1.0 / 3.0).abs() < 1e-15);
    assert!(polygon_moments(&clip_polygon_to_rect(&tri, &Rect::new(5.0, 5.0, 6.0, 6.0))).is_none());
    let d = disk();
    let (area, _) = d.moments_in_rect(&Rect::new(-2.0, -2.0, 2.0, 2.0)).unwrap();
    assert!((area - d.area()).abs() < 1e-12);
}

proptest! {
    #[test]
    fn square_distance_is_edge_minimum(x in -2.0f64..3.0, y in -2.0f64..3.0) {
        let sq = Domain::unit_square();
        let p = Point::new(x, y);
        let dx = (x - x.clamp(0.0, 1.0)).abs();
        let dy = (y - y.clamp(0.0, 1.0)).abs();
        let expected = if sq.contains(p) { x.min(y).min(1.0 - x).min(1.0 - y) } else { (dx * dx + dy * dy).sqrt() };
        prop_assert!((sq.distance_to_boundary(p) - expected).abs() < 1e-15);
    }

    #[test]
    fn parent_contains_child(level in 1u8..20, ix in -1000i64..1000, iy in -1000i64..1000) {
        let c = DyadicCube::new(level, ix, iy, 1.0);
        let p = c.parent().unwrap();
        prop_assert!(c.is_within(&p));
        prop_assert!(p.rect().contains_rect(&c.rect()));
        prop_assert!(p.children().contains(&c));
    }

    #[test]
    fn long_distance_is_symmetric_and_bounded_below(a in 0i64..64, b in 0i64..64, c in 0i64..32, d in 0i64..32) {
        let q = DyadicCube::new(6, a, b, 1.0);
        let s = DyadicCube::new(5, c, d, 1.0);
        let ld = long_distance(&q, &s);
        prop_assert_eq!(ld, long_distance(&s, &q));
        prop_assert!(ld >= q.side() + s.side());
        prop_assert!(ld >= q.center().dist(s.center()) - 0.5 * 2f64.sqrt() * (q.side() + s.side()));
    }
}

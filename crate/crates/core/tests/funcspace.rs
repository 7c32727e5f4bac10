use fracspace_core::chains::ShadowIndex;
use fracspace_core::funcspace::*;
use fracspace_core::geometry::*;
use fracspace_core::Error;

fn square(level: u8) -> WhitneyCover {
    build_cover(&Domain::unit_square(), Side::Interior, DEFAULT_C_W, level).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Which nodes a variant integrates over, decided from first principles.
#[derive(Clone, Copy)]
enum Range {
    Full,
    Shadow(f64),
    Ball(f64),
}

/// Brute-force double sum over every node pair (and, with `r > 0`, over the
/// refined sub-nodes of the same and touching cubes), independent of the
/// engine's cube indexing.
fn dense_inner(cover: &WhitneyCover, f: &dyn Fn(Point) -> f64, m: usize, r: u8, sp: SeminormParams, range: Range) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..cover.len() {
        let qi = cover.cube(i);
        for node in 0..m * m {
            let x = node_point(cover, m, i, node);
            let fx = f(x);
            let limit = match range {
                Range::Ball(rho) => rho * cover.domain().distance_to_boundary(x),
                _ => f64::INFINITY,
            };
            let mut acc = 0.0;
            for j in 0..cover.len() {
                let qj = cover.cube(j);
                let member = match range {
                    Range::Full | Range::Ball(_) => true,
                    Range::Shadow(rho) => {
                        let c = qi.center();
                        qj.rect().corners().iter().all(|k| k.dist(c) <= rho * qi.side())
                    }
                };
                if !member {
                    continue;
                }
                let refine = r > 0 && (i == j || qi.touches(qj));
                let mj = if refine { m << r } else { m };
                let h = qj.side() / mj as f64;
                for k in 0..mj * mj {
                    if !refine && j == i && k == node {
                        continue;
                    }
                    let y = node_point(cover, mj, j, k);
                    let d = x.dist(y);
                    if d >= limit {
                        continue;
                    }
                    acc += h * h * (fx - f(y)).abs().powf(sp.q) / d.powf(sp.s * sp.q + 2.0);
                }
            }
            out.push(acc);
        }
    }
    out
}

fn dense_seminorm(cover: &WhitneyCover, f: &dyn Fn(Point) -> f64, m: usize, r: u8, sp: SeminormParams, range: Range) -> f64 {
    let inner = dense_inner(cover, f, m, r, sp, range);
    let mut acc = 0.0;
    for (k, v) in inner.iter().enumerate() {
        let h = cover.cube(k / (m * m)).side() / m as f64;
        acc += h * h * v.powf(sp.p / sp.q);
    }
    acc.powf(1.0 / sp.p)
}

#[test]
fn constant_samples_and_coordinate_samples() {
    let cov = square(4);
    let one = sample_function(&cov, |_| 1.0, 2).unwrap();
    assert!(one.re().iter().all(|&v| v == 1.0));
    let x1 = GridFunction::builtin(&cov, Builtin::X1, 3).unwrap();
    for k in 0..x1.len() {
        assert_eq!(x1.re()[k], x1.point(k).x);
    }
}

#[test]
fn pole_at_a_node_is_rejected() {
    let cov = square(4);
    let pole = node_point(&cov, 2, 5, 3).x;
    let err = sample_function(&cov, |p| 1.0 / (p.x - pole), 2).unwrap_err();
    assert!(matches!(err, Error::NonFiniteSample { .. }), "{err:?}");
}

#[test]
fn lp_norm_of_one_tracks_the_collar() {
    let disk = Domain::regular_polygon(64, Point::new(0.0, 0.0), 0.5).unwrap();
    let mut gaps = Vec::new();
    for level in [4u8, 6] {
        let cov = build_cover(&disk, Side::Interior, DEFAULT_C_W, level).unwrap();
        let f = sample_function(&cov, |_| 1.0, 1).unwrap();
        let v = lp_norm(&f, 2.5);
        let expect = cov.covered_measure().powf(1.0 / 2.5);
        assert!(rel(v, expect) < 1e-12, "{v} {expect}");
        gaps.push(disk.area().powf(1.0 / 2.5) - v);
    }
    assert!(gaps[0] > gaps[1] && gaps[1] > 0.0, "{gaps:?}");
    // Dyadic square: the frontier cubes reach the boundary exactly.
    let sq = lp_norm(&sample_function(&square(5), |_| 1.0, 1).unwrap(), 2.0);
    assert!((sq - 1.0).abs() < 1e-14, "{sq}");
}

#[test]
fn lp_norm_of_x1() {
    let cov = square(7);
    let f = GridFunction::builtin(&cov, Builtin::X1, 3).unwrap();
    let v = lp_norm(&f, 2.0);
    assert!((v - (1.0_f64 / 3.0).sqrt()).abs() < 1e-3, "{v}");
    let g = f.scaled(2.0);
    assert!(rel(lp_norm(&g, 3.0), 2.0 * lp_norm(&f, 3.0)) < 1e-14);
}

#[test]
fn constants_have_zero_seminorm_in_every_variant() {
    let cov = square(4);
    let ix = ShadowIndex::build(&cov, 5.0).unwrap();
    let f = sample_function(&cov, |_| 2.5, 2).unwrap();
    let sp = SeminormParams::new(0.5, 3.0, 2.0).unwrap();
    for v in [Variant::Full, Variant::Shadow(&ix), Variant::Ball(0.5)] {
        let r = seminorm(&f, sp, v).unwrap();
        assert_eq!(r.seminorm_part, 0.0);
        assert_eq!(r.total, r.lp_part);
    }
}

#[test]
fn seminorm_is_absolutely_homogeneous() {
    let cov = square(4);
    let ix = ShadowIndex::build(&cov, 5.0).unwrap();
    let f = GridFunction::builtin(&cov, Builtin::X1, 2).unwrap();
    let g = f.scaled(-3.0);
    let sp = SeminormParams::new(0.5, 3.0, 2.0).unwrap();
    for v in [Variant::Full, Variant::Shadow(&ix), Variant::Ball(0.5)] {
        let a = seminorm(&f, sp, v).unwrap().seminorm_part;
        let b = seminorm(&g, sp, v).unwrap().seminorm_part;
        assert!(rel(b, 3.0 * a) < 1e-13, "{a} {b}");
    }
}

#[test]
fn hypotheses_are_enforced() {
    let cov = square(4);
    let f = GridFunction::builtin(&cov, Builtin::X1, 1).unwrap();
    // s = 0.1 <= 2/2 - 2/8
    let sub = SeminormParams::new(0.1, 2.0, 8.0).unwrap();
    assert_eq!(seminorm(&f, sub, Variant::Full).unwrap_err(), Error::Hypothesis("s > d/p - d/q"));
    let qp = SeminormParams::new(0.5, 2.0, 3.0).unwrap();
    assert!(matches!(seminorm(&f, qp, Variant::Ball(0.5)), Err(Error::Hypothesis(_))));
    let ok = SeminormParams::new(0.5, 3.0, 2.0).unwrap();
    assert!(matches!(seminorm(&f, ok, Variant::Ball(1.0)), Err(Error::InvalidParameter(_))));
    assert!(SeminormParams::new(1.0, 2.0, 2.0).is_err());
    assert!(SeminormParams::new(0.5, 1.0, 2.0).is_err());
}

#[test]
fn engine_matches_dense_oracle_in_every_variant() {
    let cov = square(4);
    assert!(cov.len() <= 500, "{}", cov.len());
    let c = Point::new(0.5, 0.5);
    let f = move |p: Point| (p - c).norm().powf(0.7) + 0.3 * p.y;
    let g = sample_function(&cov, f, 2).unwrap();
    let sp = SeminormParams::new(0.5, 3.0, 2.0).unwrap();
    let ix = ShadowIndex::build(&cov, 5.0).unwrap();
    let cases = [(Variant::Full, Range::Full), (Variant::Shadow(&ix), Range::Shadow(5.0)), (Variant::Ball(0.5), Range::Ball(0.5))];
    for (v, range) in cases {
        for r in [0u8, 1] {
            let opts = SeminormOptions { refine: r, source: Some(&f) };
            let fast = seminorm_with(&g, sp, v, opts).unwrap().seminorm_part;
            let slow = dense_seminorm(&cov, &f, 2, r, sp, range);
            assert!(rel(fast, slow) < 1e-12, "{:?} r={r}: {fast} vs {slow}", v.tag());
        }
    }
}

#[test]
fn x1_full_seminorm_against_dense_oracle_at_level_5() {
    let cov = square(5);
    let f = |p: Point| p.x;
    let g = sample_function(&cov, f, 2).unwrap();
    let sp = SeminormParams::new(0.5, 2.0, 2.0).unwrap();
    let fast = seminorm(&g, sp, Variant::Full).unwrap();
    let slow = dense_seminorm(&cov, &f, 2, 0, sp, Range::Full);
    assert!(rel(fast.seminorm_part, slow) < 1e-12);
    assert_eq!(fast.m, 2);
    assert_eq!(fast.max_level, 5);
    assert!(fast.diagnostics.near_diagonal_bound > 0.0);
}

#[test]
fn refinement_converges_for_x1() {
    let cov = square(5);
    let f = |p: Point| p.x;
    let g = sample_function(&cov, f, 1).unwrap();
    let sp = SeminormParams::new(0.5, 2.0, 2.0).unwrap();
    let vals: Vec<f64> = (0..3)
        .map(|r| seminorm_with(&g, sp, Variant::Full, SeminormOptions { refine: r, source: Some(&f) }).unwrap().seminorm_part)
        .collect();
    let d1 = (vals[1] - vals[0]).abs();
    let d2 = (vals[2] - vals[1]).abs();
    assert!(d2 < d1, "{vals:?}");
    assert!(seminorm_with(&g, sp, Variant::Full, SeminormOptions { refine: 1, source: None }).is_err());
}

#[test]
fn ball_shadow_full_nest() {
    let cov = square(5);
    let m = 2;
    let rho_ball = 0.25;
    let ix = ShadowIndex::build(&cov, 34.0).unwrap();
    // Node-level inclusion: every node of the ball at x sits in a shadow cube.
    let g = GridFunction::builtin(&cov, Builtin::Bump { center: Point::new(0.5, 0.5), radius: 0.4 }, m).unwrap();
    let mut pairs = 0usize;
    for k in 0..g.len() {
        let x = g.point(k);
        let i = k / (m * m);
        let r = rho_ball * cov.domain().distance_to_boundary(x);
        for y in 0..g.len() {
            if g.point(y).dist(x) < r {
                assert!(ix.contains(i, y / (m * m)), "node {y} in the ball at node {k} but outside the shadow");
                pairs += 1;
            }
        }
    }
    assert!(pairs > g.len());
    let sp = SeminormParams::new(0.5, 3.0, 2.0).unwrap();
    let b = seminorm(&g, sp, Variant::Ball(rho_ball)).unwrap().seminorm_part;
    let s = seminorm(&g, sp, Variant::Shadow(&ix)).unwrap().seminorm_part;
    let f = seminorm(&g, sp, Variant::Full).unwrap().seminorm_part;
    assert!(0.0 < b && b <= s && s <= f, "{b} {s} {f}");
}

#[test]
fn full_seminorm_is_translation_invariant() {
    let dom = Domain::unit_square();
    let cov = build_cover(&dom, Side::Interior, DEFAULT_C_W, 4).unwrap();
    let shift = Point::new(3.0, -2.0);
    let moved = build_cover(&dom.translated(shift), Side::Interior, DEFAULT_C_W, 4).unwrap();
    assert_eq!(cov.len(), moved.len());
    let f = |p: Point| (3.0 * p.x).sin() * p.y;
    let a = sample_function(&cov, f, 2).unwrap();
    let b = sample_function(&moved, |p| f(p - shift), 2).unwrap();
    let sp = SeminormParams::new(0.4, 2.0, 3.0).unwrap();
    let va = seminorm(&a, sp, Variant::Full).unwrap().seminorm_part;
    let vb = seminorm(&b, sp, Variant::Full).unwrap().seminorm_part;
    assert!(rel(va, vb) < 1e-12, "{va} {vb}");
}

#[test]
fn full_seminorm_obeys_the_scaling_law() {
    let dom = Domain::unit_square();
    let lambda = 2.0;
    let cov = build_cover(&dom, Side::Interior, DEFAULT_C_W, 4).unwrap();
    let big = build_cover(&dom.scaled(lambda), Side::Interior, DEFAULT_C_W, 4).unwrap();
    assert_eq!(cov.len(), big.len());
    let f = |p: Point| p.x * p.x - 0.5 * p.y;
    let a = sample_function(&cov, f, 2).unwrap();
    let b = sample_function(&big, |p| f(Point::new(p.x / lambda, p.y / lambda)), 2).unwrap();
    let sp = SeminormParams::new(0.5, 3.0, 2.0).unwrap();
    let va = seminorm(&a, sp, Variant::Full).unwrap().seminorm_part.powf(sp.p);
    let vb = seminorm(&b, sp, Variant::Full).unwrap().seminorm_part.powf(sp.p);
    let expect = lambda.powf(2.0 - sp.s * sp.p);
    assert!(rel(vb / va, expect) < 1e-12, "{} {expect}", vb / va);
}

#[test]
fn fractional_gradient_matches_oracle_and_recomposes() {
    let cov = square(4);
    let f = |p: Point| p.x;
    let g = sample_function(&cov, f, 2).unwrap();
    let sp = SeminormParams::new(0.5, 3.0, 2.0).unwrap();
    let ix3 = ShadowIndex::build(&cov, 3.0).unwrap();
    let k = g.nearest_node(Point::new(0.5, 0.5)).unwrap();
    let x = g.point(k);
    let v = fractional_gradient(&g, sp, &ix3, x).unwrap();
    let dense = dense_inner(&cov, &f, 2, 0, sp, Range::Shadow(3.0))[k].powf(1.0 / sp.q);
    assert!(rel(v, dense) < 1e-12, "{v} {dense}");

    let ix2 = ShadowIndex::build(&cov, 2.0).unwrap();
    let ix5 = ShadowIndex::build(&cov, 5.0).unwrap();
    for k in (0..g.len()).step_by(7) {
        let x = g.point(k);
        assert!(fractional_gradient(&g, sp, &ix2, x).unwrap() <= fractional_gradient(&g, sp, &ix5, x).unwrap());
    }

    let mut acc = 0.0;
    for k in 0..g.len() {
        acc += g.weight(k) * fractional_gradient(&g, sp, &ix3, g.point(k)).unwrap().powf(sp.p);
    }
    let whole = seminorm(&g, sp, Variant::Shadow(&ix3)).unwrap().seminorm_part;
    assert!(rel(acc.powf(1.0 / sp.p), whole) < 1e-12);

    let c = sample_function(&cov, |_| 4.0, 2).unwrap();
    assert_eq!(fractional_gradient(&c, sp, &ix3, x).unwrap(), 0.0);
    assert_eq!(fractional_gradient(&g, sp, &ix3, Point::new(0.5001, 0.5)).unwrap_err(), Error::NotANode);
}

#[test]
fn maximal_of_an_indicator() {
    let cov = square(5);
    let target = *cov.cubes().iter().max_by(|a, b| a.side().total_cmp(&b.side())).unwrap();
    let tr = target.rect();
    let chi = sample_function(&cov, |p| if tr.contains_open(p) { 1.0 } else { 0.0 }, 2).unwrap();
    let inside = chi.nearest_node(target.center()).unwrap();
    let v = maximal(&chi, chi.point(inside)).unwrap();
    assert!((v - 1.0).abs() < 1e-14, "{v}");

    // Nodes within one side length of the cube. (At distance exactly l(Q)
    // the half-open family cells put x two cells away and only the 4l cube
    // reaches Q, giving 1/16.)
    let mut seen = 0;
    for k in 0..chi.len() {
        let x = chi.point(k);
        let d = tr.dist_to_point(x);
        if !(d > 0.0 && d < target.side()) {
            continue;
        }
        let v = maximal(&chi, x).unwrap();
        assert!((1.0 / 9.0..=1.0).contains(&v), "{v} at {x:?}");
        let brute = maximal_family(&cov, x).iter().map(|r| rect_mean(&chi, r)).fold(0.0, f64::max);
        assert!(rel(v, brute) < 1e-12, "{v} {brute}");
        seen += 1;
    }
    assert!(seen > 10, "{seen}");
}

#[test]
fn maximal_of_constant_and_homogeneity() {
    let cov = square(4);
    let c = sample_function(&cov, |_| 0.7, 2).unwrap();
    let all = maximal_all(&c).unwrap();
    assert!(all.iter().all(|v| (v - 0.7).abs() < 1e-14), "{:?}", all.iter().fold(0.0_f64, |a, v| a.max((v - 0.7).abs())));

    let g = GridFunction::random_uniform(&cov, 2, 0.0, 1.0, 3);
    let g3 = g.scaled(3.0);
    for k in (0..g.len()).step_by(11) {
        let x = g.point(k);
        let a = maximal(&g, x).unwrap();
        assert!(rel(maximal(&g3, x).unwrap(), 3.0 * a) < 1e-14);
        for r in maximal_family(&cov, x) {
            assert!(rect_mean(&g, &r) <= a * (1.0 + 1e-14));
        }
    }
    let neg = g.scaled(-1.0);
    assert_eq!(maximal(&neg, g.point(0)).unwrap_err(), Error::NegativeValues);
}

#[test]
fn maximal_lemma_basic_cases() {
    let cov = square(5);
    let zero = sample_function(&cov, |_| 0.0, 1).unwrap();
    let r = check_maximal_lemma(&cov, &zero, 10, 0.5, 0.25).unwrap();
    assert_eq!(r.nonlocal_ratio, 0.0);
    assert_eq!(r.local_ratio, 0.0);
    assert!(r.size_ratio > 0.0 && r.size_ratio.is_finite());

    let dom = Domain::unit_square();
    let q = DyadicCube::new(2, 1, 1, 1.0);
    let single =
        WhitneyCover::from_cubes(dom, Side::Interior, DEFAULT_C_W, 1.0, 2, Rect::new(0.0, 0.0, 1.0, 1.0), vec![q], vec![false], 0.0);
    let g = sample_function(&single, |_| 1.0, 1).unwrap();
    for eta in [0.5, 0.25, 1.0] {
        let r = check_maximal_lemma(&single, &g, 0, eta, 0.25).unwrap();
        let expect = 2.0_f64.powf(-2.0 - eta);
        assert!((r.size_ratio - expect).abs() <= 4.0 * f64::EPSILON * expect, "{} {expect}", r.size_ratio);
    }
}

#[test]
fn sharpness_guards() {
    let valid = SeminormParams::new(0.5, 2.0, 2.0).unwrap();
    assert!(matches!(sharpness_experiment(valid, &[4.0, 8.0]), Err(Error::Refused(_))));
    let bad = SeminormParams::new(0.3, 2.0, 8.0).unwrap();
    assert!(sharpness_experiment(bad, &[4.0]).is_err());
    assert!(sharpness_experiment(bad, &[8.0, 4.0]).is_err());
}

#[test]
fn builtin_parsing() {
    let cov = square(4);
    assert_eq!(Builtin::parse("x1", &cov).unwrap(), Builtin::X1);
    assert_eq!(Builtin::parse("const", &cov).unwrap(), Builtin::Const(1.0));
    assert!(matches!(Builtin::parse("holder:0.7", &cov).unwrap(), Builtin::Holder { a, .. } if a == 0.7));
    assert!(Builtin::parse("holder", &cov).is_err());
    assert!(Builtin::parse("sinh", &cov).is_err());
}

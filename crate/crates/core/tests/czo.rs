use std::f64::consts::PI;

use fracspace_core::chains::ShadowIndex;
use fracspace_core::czo::*;
use fracspace_core::funcspace::*;
use fracspace_core::geometry::*;
use num_complex::Complex64;

fn c(p: Point) -> Complex64 {
    Complex64::new(p.x, p.y)
}

/// Beurling transform of a polygon's indicator in closed form:
/// `T chi(z) = 1/(2 pi i) sum_edges conj(b-a)/(b-a) Log((z-a)/(z-b))`
/// (Cauchy–Green applied edge by edge).
fn beurling_polygon(vertices: &[Point], z: Point) -> Complex64 {
    let z = c(z);
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..vertices.len() {
        let a = c(vertices[i]);
        let b = c(vertices[(i + 1) % vertices.len()]);
        let d = b - a;
        acc += d.conj() / d * ((z - a) / (z - b)).ln();
    }
    acc / Complex64::new(0.0, 2.0 * PI)
}

fn square(level: u8) -> WhitneyCover {
    build_cover(&Domain::unit_square(), Side::Interior, DEFAULT_C_W, level).unwrap()
}

fn value(g: &GridFunction<'_>, k: usize) -> Complex64 {
    Complex64::new(g.re()[k], g.im().map_or(0.0, |v| v[k]))
}

#[test]
fn polygon_oracle_is_sane() {
    // Far from a small square the transform is -area/(pi z^2).
    let sq = [Point::new(0.0, 0.0), Point::new(0.01, 0.0), Point::new(0.01, 0.01), Point::new(0.0, 0.01)];
    let z = Point::new(3.0, 1.0);
    let v = beurling_polygon(&sq, z);
    let w = -1e-4 / (PI * (c(z) - Complex64::new(0.005, 0.005)).powi(2));
    assert!((v - w).norm() < 1e-9 * w.norm().max(1e-12) + 1e-12, "{v} {w}");
}

#[test]
fn beurling_values_and_size() {
    let k = KernelSpec::beurling();
    let v = k.eval(Point::new(1.0, 0.0));
    assert!((v - Complex64::new(-1.0 / PI, 0.0)).norm() < 1e-16);
    let z = Point::new(0.3, -1.7);
    let direct = -1.0 / (PI * c(z) * c(z));
    assert!((k.eval(z) - direct).norm() < 1e-15 * direct.norm());
    let audit = verify_kernel(&k, 2000, 5);
    assert!((audit.max_size - 1.0 / PI).abs() < 1e-14);
    assert!(audit.size_ok && audit.smoothness_ok);
}

#[test]
fn beurling_smoothness_constant_is_six_over_pi() {
    // |K(x-y) - K(x)| |x|^3/|y| = |2-w|/(pi |1-w|^2), w = y/x, |w| <= 1/2:
    // maximized at w = 1/2.
    let grid_max = (0..=400)
        .flat_map(|i| (0..=400).map(move |j| (i, j)))
        .map(|(i, j)| Complex64::new(-0.5 + i as f64 / 400.0, -0.5 + j as f64 / 400.0))
        .filter(|w| w.norm() <= 0.5)
        .map(|w| (Complex64::new(2.0, 0.0) - w).norm() / (PI * (Complex64::new(1.0, 0.0) - w).norm_sqr()))
        .fold(0.0, f64::max);
    assert!((grid_max - 6.0 / PI).abs() < 1e-12);

    let audit = verify_kernel(&KernelSpec::beurling(), 10_000, 7);
    assert!(audit.max_smoothness <= 6.0 / PI + 1e-12);
    assert!(audit.max_smoothness > 3.0 / PI, "{}", audit.max_smoothness);
    let claimed = KernelSpec::custom("beurling-3/pi", |z| KernelSpec::beurling().eval(z), 3.0 / PI, 1.0);
    assert!(!verify_kernel(&claimed, 10_000, 7).smoothness_ok);
}

#[test]
fn riesz_kernels_pass_and_have_zero_circle_means() {
    for k in [KernelSpec::riesz1(), KernelSpec::riesz2(), KernelSpec::beurling()] {
        let a = verify_kernel(&k, 5000, 3);
        assert!(a.size_ok && a.smoothness_ok, "{}: {a:?}", k.name());
        assert!(a.max_circle_mean < 1e-14, "{}: {}", k.name(), a.max_circle_mean);
    }
    assert!(KernelSpec::by_name("riesz2").is_some());
    assert!(KernelSpec::by_name("hilbert").is_none());
}

#[test]
fn beurling_of_disk_indicator() {
    let sq = Domain::new(vec![Point::new(-1.25, -1.25), Point::new(1.25, -1.25), Point::new(1.25, 1.25), Point::new(-1.25, 1.25)]).unwrap();
    let cover = build_cover(&sq, Side::Interior, DEFAULT_C_W, 4).unwrap();
    let disk = Domain::regular_polygon(2048, Point::new(0.0, 0.0), 1.0).unwrap();
    let f = indicator_fractions(&cover, &disk, 2).unwrap();
    let quad = PvQuadrature::default();
    for p in [Point::new(0.0, 0.0), Point::new(0.5, 0.0)] {
        let v = pv_apply(&KernelSpec::beurling(), &f, p, &quad).unwrap();
        assert!(v.value.norm() < 5e-3, "{p:?} {}", v.value);
        assert!(v.converged);
        assert_eq!(v.sequence.len(), quad.levels as usize + 1);
    }
    let z = Point::new(2.0, 0.0);
    let v = pv_apply(&KernelSpec::beurling(), &f, z, &quad).unwrap();
    assert!((v.value + Complex64::new(0.25, 0.0)).norm() < 5e-3, "{}", v.value);
}

#[test]
fn symmetric_density_has_zero_principal_value() {
    // The square's cover and a radial bump about its center are invariant
    // under quarter turns, which flip the sign of z^-2.
    let cover = square(5);
    let x = Point::new(0.5, 0.5);
    let f = GridFunction::builtin(&cover, Builtin::Bump { center: x, radius: 0.4 }, 2).unwrap();
    let v = pv_apply(&KernelSpec::beurling(), &f, x, &PvQuadrature::default()).unwrap();
    assert!(v.value.norm() < 1e-13, "{}", v.value);
}

#[test]
fn far_support_is_a_plain_sum() {
    let cover = square(5);
    let m = 2;
    let i = (0..cover.len()).max_by(|&a, &b| cover.cube(a).side().total_cmp(&cover.cube(b).side())).unwrap();
    let q = *cover.cube(i);
    let vals: Vec<f64> = (0..cover.len() * m * m).map(|k| if k / (m * m) == i { 1.0 + (k % 4) as f64 } else { 0.0 }).collect();
    let f = GridFunction::from_values(&cover, m, vals, None).unwrap();
    let diam = q.side() * 2f64.sqrt();
    let x = Point::new(q.center().x + 5.0 * diam, q.center().y + 0.3);
    let spec = KernelSpec::riesz1();
    let mut direct = Complex64::new(0.0, 0.0);
    for k in i * m * m..(i + 1) * m * m {
        let y = f.point(k);
        direct += spec.eval(Point::new(x.x - y.x, x.y - y.y)) * (f.weight(k) * f.re()[k]);
    }
    let v = pv_apply(&spec, &f, x, &PvQuadrature::default()).unwrap();
    assert!((v.value - direct).norm() < 1e-12 * direct.norm(), "{} {}", v.value, direct);
}

#[test]
fn unit_square_one_matches_closed_form() {
    let cover = square(6);
    let one = GridFunction::builtin(&cover, Builtin::Const(1.0), 1).unwrap();
    let k = one.nearest_node(Point::new(0.25, 0.25)).unwrap();
    let x = one.point(k);
    let v = pv_apply(&KernelSpec::beurling(), &one, x, &PvQuadrature::default()).unwrap();
    let exact = beurling_polygon(Domain::unit_square().vertices(), x);
    assert!((v.value - exact).norm() < 1e-3, "{} {}", v.value, exact);
}

#[test]
fn one_on_polygon_matches_closed_form_everywhere() {
    let dom = Domain::regular_polygon(64, Point::new(0.0, 0.0), 1.0).unwrap();
    let cover = build_cover(&dom, Side::Interior, DEFAULT_C_W, 4).unwrap();
    let g = apply_to_one(&KernelSpec::beurling(), &cover, 1, &PvQuadrature::default()).unwrap();
    assert_eq!(g.nonconverged(), 0);
    for k in 0..g.values.len() {
        let e = (value(&g.values, k) - beurling_polygon(dom.vertices(), g.values.point(k))).norm();
        assert!(e < 2e-3, "node {k}: {e}");
    }
}

#[test]
fn linear_in_f() {
    let cover = square(4);
    let f = GridFunction::builtin(&cover, Builtin::X1, 2).unwrap();
    let g = GridFunction::builtin(&cover, Builtin::Bump { center: Point::new(0.4, 0.6), radius: 0.3 }, 2).unwrap();
    let spec = KernelSpec::beurling();
    let quad = PvQuadrature::default();
    let tf = truncated_apply(&spec, &f, &quad).unwrap().values;
    let tg = truncated_apply(&spec, &g, &quad).unwrap().values;
    // Powers of two commute with rounding: exact.
    let t2 = truncated_apply(&spec, &f.scaled(2.0), &quad).unwrap().values;
    for k in 0..f.len() {
        assert_eq!(value(&t2, k), value(&tf, k) * 2.0);
    }
    let comb = f.combine(0.3, &g, -1.7).unwrap();
    let tc = truncated_apply(&spec, &comb, &quad).unwrap().values;
    let scale = (0..f.len()).map(|k| value(&tf, k).norm() + value(&tg, k).norm()).fold(0.0, f64::max);
    for k in 0..f.len() {
        let want = value(&tf, k) * 0.3 + value(&tg, k) * -1.7;
        assert!((value(&tc, k) - want).norm() < 1e-13 * scale);
    }
}

#[test]
fn halving_the_exclusion_radius_is_harmless() {
    let cover = square(5);
    let f = GridFunction::builtin(&cover, Builtin::Bump { center: Point::new(0.5, 0.5), radius: 0.45 }, 2).unwrap();
    let spec = KernelSpec::beurling();
    let base = PvQuadrature::default();
    for k in [0, 17, 101, f.len() / 2] {
        let x = f.point(k);
        let a = pv_apply(&spec, &f, x, &base).unwrap();
        let h = cover.cube(k / 4).side() / 2.0;
        let b = pv_apply(&spec, &f, x, &PvQuadrature { delta0: Some(0.25 * h), ..base }).unwrap();
        assert!(a.converged && b.converged);
        assert!((a.value - b.value).norm() < base.tol * a.value.norm().max(1.0), "{} {}", a.value, b.value);
    }
}

#[test]
fn truncated_apply_wants_an_interior_cover() {
    let dom = Domain::unit_square();
    let ext = build_cover(&dom, Side::Exterior, DEFAULT_C_W, 3).unwrap();
    let f = GridFunction::builtin(&ext, Builtin::Const(1.0), 1).unwrap();
    assert!(truncated_apply(&KernelSpec::beurling(), &f, &PvQuadrature::default()).is_err());
    let bad = PvQuadrature { angular: 2, ..PvQuadrature::default() };
    let cover = square(4);
    let g = GridFunction::builtin(&cover, Builtin::Const(1.0), 1).unwrap();
    assert!(pv_apply(&KernelSpec::beurling(), &g, Point::new(0.5, 0.5), &bad).is_err());
}

#[test]
fn t1_check_reports_and_warns() {
    let cover = square(4);
    let index = ShadowIndex::build(&cover, 21.0).unwrap();
    let quad = PvQuadrature::default();
    let spec = KernelSpec::beurling();
    let r = t1_check(&spec, &cover, SeminormParams::new(0.2, 2.0, 2.0).unwrap(), &index, 1, &quad).unwrap();
    assert!(r.warning.is_some());
    assert!(r.total.is_finite() && r.total > 0.0);
    let r = t1_check(&spec, &cover, SeminormParams::new(0.6, 4.0, 2.0).unwrap(), &index, 1, &quad).unwrap();
    assert!(r.warning.is_none());
    assert!(r.collar_excluded_variant.total <= r.total);
    assert_eq!(r.worst_cubes.len(), 10);
    assert!(r.worst_cubes.windows(2).all(|w| w[0].share >= w[1].share));
    assert_eq!(r.nonconverged_nodes, 0);
}

#[test]
fn key_lemma_constant_and_homogeneity() {
    let cover = square(4);
    let index = ShadowIndex::build(&cover, 21.0).unwrap();
    let quad = PvQuadrature::default();
    let spec = KernelSpec::beurling();
    let sp = SeminormParams::new(0.6, 4.0, 2.0).unwrap();
    let c = GridFunction::builtin(&cover, Builtin::Const(3.0), 1).unwrap();
    let r = key_lemma_ratio(&spec, &c, sp, &index, &quad).unwrap();
    assert_eq!(r.lhs, 0.0);
    assert_eq!(r.ratio, Some(0.0));
    let f = GridFunction::builtin(&cover, Builtin::X1, 1).unwrap();
    let a = key_lemma_ratio(&spec, &f, sp, &index, &quad).unwrap();
    let b = key_lemma_ratio(&spec, &f.scaled(2.0), sp, &index, &quad).unwrap();
    let (ra, rb) = (a.ratio.unwrap(), b.ratio.unwrap());
    assert!(ra > 0.0 && ra.is_finite());
    assert!((ra - rb).abs() < 1e-12 * ra);
    assert!((b.lhs / a.lhs - 16.0).abs() < 1e-12 * 16.0);
}

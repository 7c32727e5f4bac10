use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use super::kernel::KernelSpec;
use crate::funcspace::GridFunction;
use crate::geometry::{DyadicCube, Point, Rect};
use crate::math::{gauss_legendre, Float};
use crate::{par, Error};

/// Principal-value quadrature parameters.
///
/// Around `x` the disk `B(x, R0)` is integrated in polar coordinates with
/// `angular` equally spaced angles (exact cancellation of kernels with zero
/// circle means against locally constant data) and `radial` Gauss points
/// per octave. `R0` is the distance from `x` to the boundary of its Whitney
/// cube (or `near_cells` node cells if that is larger). Cells outside the disk are
/// summed by the midpoint rule, split until pieces are at most `far_ratio`
/// times their distance from `x`; cells cut by the circle use pieces of at
/// most `R0 / subcells`. Exclusion radii are `delta_j = 2^-j delta_0`,
/// `j = 0..=levels`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PvQuadrature {
    /// Defaults to half the side of the node cell holding `x`.
    pub delta0: Option<f64>,
    pub levels: u32,
    pub angular: usize,
    pub radial: usize,
    pub subcells: usize,
    pub near_cells: f64,
    /// Largest piece size relative to its distance from `x` in the far sums.
    pub far_ratio: f64,
    pub tol: f64,
}

impl Default for PvQuadrature {
    fn default() -> Self {
        PvQuadrature { delta0: None, levels: 6, angular: 64, radial: 6, subcells: 32, near_cells: 0.0, far_ratio: 0.25, tol: 1e-8 }
    }
}

impl PvQuadrature {
    fn check(&self) -> Result<(), Error> {
        if self.angular < 3
            || self.radial == 0
            || self.subcells == 0
            || !(self.near_cells >= 0.0)
            || !(self.far_ratio > 0.0)
            || !(self.tol > 0.0)
        {
            return Err(Error::InvalidParameter(
                "quadrature needs angular >= 3, radial >= 1, subcells >= 1, far_ratio > 0, tol > 0".into(),
            ));
        }
        if let Some(d) = self.delta0 {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::InvalidParameter(alloc::format!("delta0 must be positive, got {d}")));
            }
        }
        Ok(())
    }
}

/// Value of the truncated integrals at every exclusion radius.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PvValue {
    pub value: Complex64,
    /// Integral over `|y - x| > delta_j`, `j = 0..=levels`.
    pub sequence: Vec<Complex64>,
    pub converged: bool,
}

/// A `max_level` cell outside the cover, resolved into `side x side`
/// pieces (row-major), each with a value and the point its mass sits at.
#[derive(Debug, Clone)]
pub(crate) struct ExtraCell {
    pub cell: DyadicCube,
    pub side: usize,
    pub pieces: Vec<(f64, Point)>,
}

/// Piecewise-constant density: the node cells of `f`, plus optional extra
/// cells (the uncovered collar).
pub(crate) struct Density<'f, 'c> {
    f: &'f GridFunction<'c>,
    cx: Vec<f64>,
    cy: Vec<f64>,
    /// Where the cell's mass sits for the plain midpoint term.
    mx: Vec<f64>,
    my: Vec<f64>,
    h: Vec<f64>,
    val: Vec<Complex64>,
    first_extra: usize,
    extra: Vec<ExtraCell>,
    extra_at: BTreeMap<(i64, i64), usize>,
}

impl<'f, 'c> Density<'f, 'c> {
    pub(crate) fn new(f: &'f GridFunction<'c>) -> Self {
        let n = f.len();
        let m = f.m();
        let cover = f.cover();
        let (mut cx, mut cy, mut h, mut val) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for k in 0..n {
            let p = f.point(k);
            cx.push(p.x);
            cy.push(p.y);
            h.push(cover.cube(k / (m * m)).side() / m as f64);
            val.push(Complex64::new(f.re()[k], f.im().map_or(0.0, |v| v[k])));
        }
        Density { f, mx: cx.clone(), my: cy.clone(), cx, cy, h, val, first_extra: n, extra: Vec::new(), extra_at: BTreeMap::new() }
    }

    /// Adds cells outside the cover.
    pub(crate) fn with_extra(mut self, cells: Vec<ExtraCell>) -> Self {
        for e in cells {
            let c = e.cell.center();
            let total: f64 = e.pieces.iter().map(|p| p.0).sum();
            let (mut ax, mut ay) = (0.0, 0.0);
            for (v, at) in &e.pieces {
                ax += v * at.x;
                ay += v * at.y;
            }
            let at = if total != 0.0 { Point::new(ax / total, ay / total) } else { c };
            self.cx.push(c.x);
            self.cy.push(c.y);
            self.mx.push(at.x);
            self.my.push(at.y);
            self.h.push(e.cell.side());
            self.val.push(Complex64::new(total / e.pieces.len() as f64, 0.0));
            self.extra_at.insert((e.cell.ix, e.cell.iy), self.extra.len());
            self.extra.push(e);
        }
        self
    }

    /// Piecewise-constant value at `p`. `hint` is the cube to try first.
    fn value_at(&self, p: Point, hint: Option<usize>) -> Complex64 {
        let cover = self.f.cover();
        let inside = |i: usize| {
            let r = cover.cube(i).rect();
            p.x >= r.x0 && p.x < r.x1 && p.y >= r.y0 && p.y < r.y1
        };
        let cube = match hint {
            Some(i) if inside(i) => Some(i),
            Some(i) => cover.neighbors(i).iter().copied().find(|&j| inside(j)).or_else(|| cover.cube_of_point(p)),
            None => cover.cube_of_point(p),
        };
        let Some(i) = cube else {
            if self.extra.is_empty() {
                return Complex64::new(0.0, 0.0);
            }
            let hc = DyadicCube::new(cover.max_level(), 0, 0, cover.root_scale()).side();
            let key = ((p.x / hc).floor() as i64, (p.y / hc).floor() as i64);
            let Some(&e) = self.extra_at.get(&key) else { return Complex64::new(0.0, 0.0) };
            let e = &self.extra[e];
            let r = e.cell.rect();
            let hs = hc / e.side as f64;
            let a = (((p.x - r.x0) / hs) as usize).min(e.side - 1);
            let b = (((p.y - r.y0) / hs) as usize).min(e.side - 1);
            return Complex64::new(e.pieces[a + e.side * b].0, 0.0);
        };
        let m = self.f.m();
        let c = cover.cube(i);
        let r = c.rect();
        let h = c.side() / m as f64;
        let a = (((p.x - r.x0) / h) as usize).min(m - 1);
        let b = (((p.y - r.y0) / h) as usize).min(m - 1);
        self.val[self.f.flat(i, a + m * b)]
    }
}

/// Applies the kernel to `f` at `x` as a principal value.
pub fn pv_apply(spec: &KernelSpec, f: &GridFunction<'_>, x: Point, quad: &PvQuadrature) -> Result<PvValue, Error> {
    quad.check()?;
    let d = Density::new(f);
    Ok(pv_at(spec, &d, x, quad, &Rules::new(quad)))
}

/// Reused quadrature rules.
pub(crate) struct Rules {
    gx: Vec<f64>,
    gw: Vec<f64>,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Rules {
    pub(crate) fn new(quad: &PvQuadrature) -> Rules {
        let (gx, gw) = gauss_legendre(quad.radial);
        let n = quad.angular;
        let th = |t: usize| (t as f64 + 0.5) * 2.0 * PI / n as f64;
        Rules { gx, gw, cos: (0..n).map(|t| th(t).cos()).collect(), sin: (0..n).map(|t| th(t).sin()).collect() }
    }
}

pub(crate) fn pv_at(spec: &KernelSpec, d: &Density<'_, '_>, x: Point, quad: &PvQuadrature, rules: &Rules) -> PvValue {
    let cover = d.f.cover();
    let home = cover.cube_of_point(x);
    let (cell, r0) = match home {
        Some(i) => {
            let c = cover.cube(i);
            let cell = c.side() / d.f.m() as f64;
            let r = c.rect();
            let edge = (x.x - r.x0).min(r.x1 - x.x).min(x.y - r.y0).min(r.y1 - x.y);
            (cell, edge.max(quad.near_cells * cell))
        }
        None => (0.0, 0.0),
    };
    let delta0 = quad.delta0.unwrap_or(0.5 * cell);
    let far = far_sum(spec, d, x, r0, quad);

    let mut sequence = Vec::with_capacity(quad.levels as usize + 1);
    if r0 == 0.0 || delta0 == 0.0 {
        // Off the cover: no singularity, plain sums.
        sequence.resize(quad.levels as usize + 1, far);
        return PvValue { value: far, sequence, converged: true };
    }
    // Near zone from delta0 out to R0, then ring by ring inward.
    let mut near = if delta0 < r0 { annulus(spec, d, x, delta0, r0, home, rules) } else { Complex64::new(0.0, 0.0) };
    let start = if delta0 >= r0 { far_sum(spec, d, x, delta0, quad) } else { far };
    let mut outer = delta0;
    for j in 0..=quad.levels {
        if j > 0 {
            let inner = delta0 / (1u64 << j) as f64;
            near += annulus(spec, d, x, inner, outer, home, rules);
            outer = inner;
        }
        sequence.push(start + near);
    }
    let last = sequence[sequence.len() - 1];
    let prev = sequence[sequence.len().saturating_sub(2)];
    let converged = (last - prev).norm() <= quad.tol * last.norm().max(1.0);
    PvValue { value: last, sequence, converged }
}

/// `int_{a < |y-x| < b} K(x-y) f(y) dy` in polar coordinates, octave panels
/// in the radius.
fn annulus(spec: &KernelSpec, d: &Density<'_, '_>, x: Point, a: f64, b: f64, hint: Option<usize>, rules: &Rules) -> Complex64 {
    let dth = 2.0 * PI / rules.cos.len() as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut hi = b;
    while hi > a * (1.0 + 1e-12) {
        let lo = (0.5 * hi).max(a);
        // u = ln rho, d rho = rho du
        let (ul, uh) = (lo.ln(), hi.ln());
        let (mid, half) = (0.5 * (ul + uh), 0.5 * (uh - ul));
        for (t, wt) in rules.gx.iter().zip(&rules.gw) {
            let rho = (mid + half * t).exp();
            let mut ring = Complex64::new(0.0, 0.0);
            for (c, s) in rules.cos.iter().zip(&rules.sin) {
                let e = Point::new(*c, *s);
                let y = Point::new(x.x + rho * c, x.y + rho * s);
                let fv = d.value_at(y, hint);
                if fv.re != 0.0 || fv.im != 0.0 {
                    // K(x - y) = K(-rho e)
                    ring += spec.eval(Point::new(-rho * e.x, -rho * e.y)) * fv;
                }
            }
            acc += ring * (wt * half * rho * rho * dth);
        }
        hi = lo;
    }
    acc
}

/// Midpoint sums over cells outside `B(x, r0)`. A cell is split into
/// `k x k` pieces with `k` large enough that each piece is at most
/// `far_ratio` times its distance from `x` (midpoint error is then fourth
/// order for harmonic kernels); in cells cut by the circle pieces are at
/// most `r0 / subcells`, each weighted by its linearized share outside.
fn far_sum(spec: &KernelSpec, d: &Density<'_, '_>, x: Point, r0: f64, quad: &PvQuadrature) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..d.val.len() {
        let v = d.val[k];
        if v.re == 0.0 && v.im == 0.0 {
            continue;
        }
        let h = d.h[k];
        let cell = Rect::new(d.cx[k] - 0.5 * h, d.cy[k] - 0.5 * h, d.cx[k] + 0.5 * h, d.cy[k] + 0.5 * h);
        let near = cell.dist_to_point(x);
        let cut = near < r0;
        if cut && cell.farthest_from(x) <= r0 {
            continue;
        }
        let need = (h / (quad.far_ratio * near.max(r0))).ceil().min(MAX_SPLIT as f64) as usize;
        let n = if cut { need.max((h * quad.subcells as f64 / r0).ceil().min(MAX_SPLIT as f64) as usize) } else { need.max(1) };
        if n == 1 {
            acc += spec.eval(Point::new(x.x - d.mx[k], x.y - d.my[k])) * (v * (h * h));
            continue;
        }
        if k >= d.first_extra {
            acc += extra_sum(spec, &d.extra[k - d.first_extra], x, r0, cut);
            continue;
        }
        let hs = h / n as f64;
        let mut part = Complex64::new(0.0, 0.0);
        for b in 0..n {
            for a in 0..n {
                let y = Point::new(cell.x0 + (a as f64 + 0.5) * hs, cell.y0 + (b as f64 + 0.5) * hs);
                let z = Point::new(x.x - y.x, x.y - y.y);
                if !cut {
                    part += spec.eval(z);
                    continue;
                }
                // Fraction of the piece outside the circle, to first order
                // in the signed distance of its center.
                let t = ((z.x * z.x + z.y * z.y).sqrt() - r0) / hs + 0.5;
                if t > 0.0 {
                    part += spec.eval(z) * t.min(1.0);
                }
            }
        }
        acc += part * (v * (hs * hs));
    }
    acc
}

const MAX_SPLIT: usize = 128;

/// An extra cell piece by piece, mass at each piece's own point.
fn extra_sum(spec: &KernelSpec, e: &ExtraCell, x: Point, r0: f64, cut: bool) -> Complex64 {
    let hs = e.cell.side() / e.side as f64;
    let mut part = Complex64::new(0.0, 0.0);
    for (v, at) in &e.pieces {
        if *v == 0.0 {
            continue;
        }
        let z = Point::new(x.x - at.x, x.y - at.y);
        let w = if cut { (((z.x * z.x + z.y * z.y).sqrt() - r0) / hs + 0.5).clamp(0.0, 1.0) } else { 1.0 };
        if w > 0.0 {
            part += spec.eval(z) * (v * w);
        }
    }
    part * (hs * hs)
}

/// [`pv_apply`] at many points, in order.
pub fn pv_apply_many(spec: &KernelSpec, f: &GridFunction<'_>, points: &[Point], quad: &PvQuadrature) -> Result<Vec<PvValue>, Error> {
    quad.check()?;
    let d = Density::new(f);
    let rules = Rules::new(quad);
    Ok(par::map_range(points.len(), |i| pv_at(spec, &d, points[i], quad, &rules)))
}

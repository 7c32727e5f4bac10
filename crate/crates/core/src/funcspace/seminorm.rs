use alloc::vec::Vec;
use core::f64::consts::PI;

use super::grid::{lp_norm, GridFunction};
use crate::chains::ShadowIndex;
use crate::geometry::{Point, Rect, Side, WhitneyCover};
use crate::math::{abs_pow, inv_dist_pow, pow_nonneg, Float};
use crate::{par, Error, DIM};

const D: f64 = DIM as f64;

/// Smoothness and integrability exponents `(s, p, q)`, `d = 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeminormParams {
    pub s: f64,
    pub p: f64,
    pub q: f64,
}

impl SeminormParams {
    /// Checks `s in (0,1)` and `p, q in (1, inf)`.
    pub fn new(s: f64, p: f64, q: f64) -> Result<Self, Error> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidParameter(alloc::format!("s must lie in (0,1), got {s}")));
        }
        for (name, v) in [("p", p), ("q", q)] {
            if !(v > 1.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(alloc::format!("{name} must lie in (1,inf), got {v}")));
            }
        }
        Ok(SeminormParams { s, p, q })
    }

    /// `d/p - d/q`.
    pub fn critical_s(&self) -> f64 {
        D / self.p - D / self.q
    }

    /// `s > d/p - d/q`: smooth compactly supported functions have finite norm.
    pub fn is_supercritical(&self) -> bool {
        self.s > self.critical_s()
    }

    /// Hypotheses of the requested variant.
    pub fn check(&self, variant: &Variant<'_>) -> Result<(), Error> {
        // The variant's own restriction first: it names the choice to change.
        if let Variant::Ball(rho) = *variant {
            if self.q > self.p {
                return Err(Error::Hypothesis("1 < q <= p < inf (use the shadow variant for q > p)"));
            }
            if !(rho > 0.0 && rho < 1.0) {
                return Err(Error::InvalidParameter(alloc::format!("ball ratio must lie in (0,1), got {rho}")));
            }
        }
        if !self.is_supercritical() {
            return Err(Error::Hypothesis("s > d/p - d/q"));
        }
        Ok(())
    }
}

/// Integration range of the inner integral at `x`.
#[derive(Debug, Clone, Copy)]
pub enum Variant<'a> {
    /// All of the covered region.
    Full,
    /// The shadow of the cube holding `x`.
    Shadow(&'a ShadowIndex),
    /// `B(x, rho delta(x))`, `0 < rho < 1`.
    Ball(f64),
}

impl Variant<'_> {
    pub fn tag(&self) -> VariantTag {
        match *self {
            Variant::Full => VariantTag::Full,
            Variant::Shadow(ix) => VariantTag::Shadow { rho: ix.rho() },
            Variant::Ball(rho) => VariantTag::Ball { rho },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum VariantTag {
    Full,
    Shadow { rho: f64 },
    Ball { rho: f64 },
}

/// Near-diagonal refinement. With `refine = r > 0`, pairs whose cubes are
/// equal or touching use a `2^r`-times finer tensor grid on the inner cube,
/// sampled from `source`.
#[derive(Clone, Copy, Default)]
pub struct SeminormOptions<'s> {
    pub refine: u8,
    pub source: Option<&'s (dyn Fn(Point) -> f64 + Sync)>,
}

impl core::fmt::Debug for SeminormOptions<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SeminormOptions").field("refine", &self.refine).field("source", &self.source.is_some()).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormDiagnostics {
    pub outer_nodes: usize,
    /// Number of `(x, y)` kernel evaluations.
    pub pair_terms: u64,
    /// Upper estimate of what the unresolved cell around each `x` could add
    /// to the seminorm (local Lipschitz proxy times the kernel's integral
    /// over the cell's circumscribed disk). Reported, not added.
    pub near_diagonal_bound: f64,
    /// Measure of the uncovered collar next to the boundary.
    pub collar_measure: f64,
    pub frontier_cubes: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormReport {
    pub lp_part: f64,
    pub seminorm_part: f64,
    pub variant: VariantTag,
    pub m: usize,
    pub max_level: u8,
    pub r: u8,
    /// Bound on what the region outside the computation box could add to
    /// the seminorm (zero unless the cover is an extension box).
    pub tail_estimate: f64,
    pub total: f64,
    pub diagnostics: NormDiagnostics,
}

/// `L^p` part plus seminorm, without near-diagonal refinement.
pub fn seminorm(f: &GridFunction<'_>, params: SeminormParams, variant: Variant<'_>) -> Result<NormReport, Error> {
    seminorm_with(f, params, variant, SeminormOptions::default())
}

pub fn seminorm_with(
    f: &GridFunction<'_>,
    params: SeminormParams,
    variant: Variant<'_>,
    opts: SeminormOptions<'_>,
) -> Result<NormReport, Error> {
    params.check(&variant)?;
    let cover = f.cover();
    let engine = Engine::new(f, params, variant, opts)?;
    let inner = engine.all_inner();
    let (p, q) = (params.p, params.q);
    let e = p / q;

    let mut outer = 0.0;
    let mut with_near = 0.0;
    let mut terms = 0u64;
    for (k, &(v, n, near)) in inner.iter().enumerate() {
        let w = f.weight(k);
        outer += w * pow_nonneg(v, e);
        with_near += w * pow_nonneg(v + near, e);
        terms += n;
    }
    let seminorm_part = outer.powf(1.0 / p);
    let near_diagonal_bound = (with_near.powf(1.0 / p) - seminorm_part).max(0.0);

    let tail_estimate =
        if cover.side() == Side::Combined && matches!(variant, Variant::Full) { box_tail(f, params, &inner, outer) } else { 0.0 };

    let lp_part = lp_norm(f, p);
    Ok(NormReport {
        lp_part,
        seminorm_part,
        variant: variant.tag(),
        m: f.m(),
        max_level: cover.max_level(),
        r: opts.refine,
        tail_estimate,
        total: lp_part + seminorm_part,
        diagnostics: NormDiagnostics {
            outer_nodes: f.len(),
            pair_terms: terms,
            near_diagonal_bound,
            collar_measure: cover.uncovered_measure(),
            frontier_cubes: cover.frontier_count(),
        },
    })
}

/// Inner integrals `I(x) = sum_y w_y |f(x)-f(y)|^q / |x-y|^(sq+d)` at every
/// node, in node order.
pub fn inner_integrals(
    f: &GridFunction<'_>,
    params: SeminormParams,
    variant: Variant<'_>,
    opts: SeminormOptions<'_>,
) -> Result<Vec<f64>, Error> {
    params.check(&variant)?;
    let engine = Engine::new(f, params, variant, opts)?;
    Ok(engine.all_inner().into_iter().map(|t| t.0).collect())
}

/// `grad^s_q f(x)`: the shadow inner integral at node `x` to the power `1/q`.
pub fn fractional_gradient(f: &GridFunction<'_>, params: SeminormParams, index: &ShadowIndex, x: Point) -> Result<f64, Error> {
    fractional_gradient_with(f, params, index, x, SeminormOptions::default())
}

pub fn fractional_gradient_with(
    f: &GridFunction<'_>,
    params: SeminormParams,
    index: &ShadowIndex,
    x: Point,
    opts: SeminormOptions<'_>,
) -> Result<f64, Error> {
    let variant = Variant::Shadow(index);
    params.check(&variant)?;
    let k = f.node_at(x)?;
    let engine = Engine::new(f, params, variant, opts)?;
    Ok(pow_nonneg(engine.inner(k).0, 1.0 / params.q))
}

/// Per-cube share `sum_{x in Q} w_x I(x)^(p/q)` of the seminorm's `p`-th power.
pub fn cube_contributions(f: &GridFunction<'_>, inner: &[f64], params: SeminormParams) -> Vec<f64> {
    let mm = f.nodes_per_cube();
    let e = params.p / params.q;
    (0..f.cover().len()).map(|i| (i * mm..(i + 1) * mm).map(|k| f.weight(k) * pow_nonneg(inner[k], e)).sum()).collect()
}

/// Node coordinates, weights and values on a tensor grid of `m x m` per cube.
struct Table {
    mm: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    w: Vec<f64>,
    re: Vec<f64>,
    im: Option<Vec<f64>>,
}

impl Table {
    fn of(f: &GridFunction<'_>) -> Table {
        let n = f.len();
        let (mut x, mut y, mut w) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for k in 0..n {
            let p = f.point(k);
            x.push(p.x);
            y.push(p.y);
            w.push(f.weight(k));
        }
        Table { mm: f.nodes_per_cube(), x, y, w, re: f.re().to_vec(), im: f.im().map(|v| v.to_vec()) }
    }

    fn sampled(cover: &WhitneyCover, m: usize, g: &(dyn Fn(Point) -> f64 + Sync)) -> Result<Table, Error> {
        let f = super::grid::sample_function(cover, g, m)?;
        Ok(Table::of(&f))
    }
}

struct Engine<'a> {
    cover: &'a WhitneyCover,
    params: SeminormParams,
    variant: Variant<'a>,
    nodes: Table,
    fine: Option<Table>,
    /// Side of the unresolved cell around an outer node.
    cell: f64,
    alpha: f64,
}

impl<'a> Engine<'a> {
    fn new(f: &GridFunction<'a>, params: SeminormParams, variant: Variant<'a>, opts: SeminormOptions<'_>) -> Result<Self, Error> {
        let cover = f.cover();
        match variant {
            Variant::Shadow(ix) if ix.len() != cover.len() => return Err(Error::CoverMismatch),
            Variant::Ball(_) if cover.side() != Side::Interior => {
                return Err(Error::InvalidParameter("the ball variant needs an interior cover".into()))
            }
            _ => {}
        }
        let nodes = Table::of(f);
        let fine = if opts.refine > 0 {
            let src = opts.source.ok_or_else(|| Error::InvalidParameter("refinement needs the source function".into()))?;
            if f.is_complex() {
                return Err(Error::InvalidParameter("refinement is only available for real functions".into()));
            }
            if opts.refine > 8 {
                return Err(Error::InvalidParameter(alloc::format!("refinement level {} is too deep", opts.refine)));
            }
            Some(Table::sampled(cover, f.m() << opts.refine, src)?)
        } else {
            None
        };
        let cell = match &fine {
            Some(t) => 1.0 / (t.mm as f64).sqrt(),
            None => 1.0 / f.m() as f64,
        };
        Ok(Engine { cover, params, variant, nodes, fine, cell, alpha: params.s * params.q + D })
    }

    fn all_inner(&self) -> Vec<(f64, u64, f64)> {
        par::map_range(self.nodes.x.len(), |k| self.inner(k))
    }

    /// `(I(x), number of terms, near-diagonal estimate)` at node `k`.
    fn inner(&self, k: usize) -> (f64, u64, f64) {
        let t = &self.nodes;
        let i = k / t.mm;
        let x = Point::new(t.x[k], t.y[k]);
        let fx = (t.re[k], t.im.as_ref().map_or(0.0, |v| v[k]));
        let touching: Vec<usize> = if self.fine.is_some() {
            let mut v = self.cover.neighbors(i).to_vec();
            v.push(i);
            v.sort_unstable();
            v
        } else {
            Vec::new()
        };
        let limit2 = match self.variant {
            Variant::Ball(rho) => {
                let r = rho * self.cover.domain().distance_to_boundary(x);
                r * r
            }
            _ => f64::INFINITY,
        };
        let mut acc = 0.0;
        let mut terms = 0u64;
        let mut visit = |j: usize| {
            if !touching.is_empty() && touching.binary_search(&j).is_ok() {
                let ft = self.fine.as_ref().expect("refined table");
                let (s, n) = self.sum_cube(ft, j, usize::MAX, x, fx, limit2);
                acc += s;
                terms += n;
            } else {
                let (s, n) = self.sum_cube(t, j, k, x, fx, limit2);
                acc += s;
                terms += n;
            }
        };
        match self.variant {
            Variant::Full => (0..self.cover.len()).for_each(&mut visit),
            Variant::Shadow(ix) => ix.members(i).iter().for_each(|&j| visit(j as usize)),
            Variant::Ball(_) => {
                let r = limit2.sqrt();
                let b = Rect::new(x.x - r, x.y - r, x.x + r, x.y + r);
                self.cover.cubes_near(&b, 0.0).into_iter().for_each(&mut visit)
            }
        }
        (acc, terms, self.near_diagonal(k))
    }

    #[inline]
    fn sum_cube(&self, t: &Table, j: usize, skip: usize, x: Point, fx: (f64, f64), limit2: f64) -> (f64, u64) {
        let q = self.params.q;
        let alpha = self.alpha;
        let mut acc = 0.0;
        let mut n = 0u64;
        for y in j * t.mm..(j + 1) * t.mm {
            if y == skip {
                continue;
            }
            let dx = t.x[y] - x.x;
            let dy = t.y[y] - x.y;
            let r2 = dx * dx + dy * dy;
            if r2 >= limit2 {
                continue;
            }
            let diff = match &t.im {
                None => fx.0 - t.re[y],
                Some(im) => (fx.0 - t.re[y]).hypot(fx.1 - im[y]),
            };
            acc += t.w[y] * abs_pow(diff, q) * inv_dist_pow(r2, alpha);
            n += 1;
        }
        (acc, n)
    }

    /// `L^q * 2 pi R^((1-s)q) / ((1-s)q)` with `L` the largest difference
    /// quotient from `x` to nodes of its own and touching cubes and `R` the
    /// circumradius of the unresolved cell.
    fn near_diagonal(&self, k: usize) -> f64 {
        let t = &self.nodes;
        let i = k / t.mm;
        let mut lip = 0.0_f64;
        for j in core::iter::once(i).chain(self.cover.neighbors(i).iter().copied()) {
            for y in j * t.mm..(j + 1) * t.mm {
                if y == k {
                    continue;
                }
                let r = (t.x[y] - t.x[k]).hypot(t.y[y] - t.y[k]);
                let diff = match &t.im {
                    None => t.re[k] - t.re[y],
                    Some(im) => (t.re[k] - t.re[y]).hypot(im[k] - im[y]),
                };
                lip = lip.max(diff.abs() / r);
            }
        }
        let h = self.cover.cube(i).side() * self.cell;
        let e = (1.0 - self.params.s) * self.params.q;
        let radius = h * core::f64::consts::FRAC_1_SQRT_2;
        abs_pow(lip, self.params.q) * 2.0 * PI * pow_nonneg(radius, e) / e
    }
}

/// Far-field bound for extension-box seminorms. Inner part: for `y` outside
/// the box, `f(y) = 0` and `|x-y| >= dist(x, box boundary)`. Outer part: for
/// `x` outside the box, the box is approximated by its inscribed disk of
/// radius `R` around the box center and the support of `f` by the disk
/// `R_s` through its farthest nonzero node.
fn box_tail(f: &GridFunction<'_>, params: SeminormParams, inner: &[(f64, u64, f64)], outer: f64) -> f64 {
    let SeminormParams { s, p, q } = params;
    let region = f.cover().region();
    let c = region.center();
    let big_r = 0.5 * region.width().min(region.height());
    let e = p / q;
    let mut grown = 0.0;
    let mut lq = 0.0;
    let mut r_s = 0.0_f64;
    for (k, &(v, _, _)) in inner.iter().enumerate() {
        let x = f.point(k);
        let a = f.abs_at(k);
        let gap = (x.x - region.x0).min(region.x1 - x.x).min(x.y - region.y0).min(region.y1 - x.y);
        let t = abs_pow(a, q) * 2.0 * PI * pow_nonneg(gap, -s * q) / (s * q);
        grown += f.weight(k) * pow_nonneg(v + t, e);
        lq += f.weight(k) * abs_pow(a, q);
        if a != 0.0 {
            r_s = r_s.max(x.dist(c) + f.cover().cube(k / f.nodes_per_cube()).side());
        }
    }
    let alpha = (s * q + D) * e;
    let outside = if lq == 0.0 {
        0.0
    } else if r_s >= big_r {
        f64::INFINITY
    } else {
        let shrink = 1.0 - r_s / big_r;
        pow_nonneg(lq, e) * pow_nonneg(shrink, -alpha) * 2.0 * PI * pow_nonneg(big_r, D - alpha) / (alpha - D)
    };
    ((grown + outside).powf(1.0 / p) - outer.powf(1.0 / p)).max(0.0)
}

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::grid::GridFunction;
use crate::geometry::{long_distance, Point, Rect, WhitneyCover};
use crate::math::{pow_nonneg, Float};
use crate::{par, Error, DIM};

const D: f64 = DIM as f64;

/// Midpoint-rule integrals of `g` (extended by zero) over lattice cubes,
/// memoized by `(level, ix, iy)`.
struct LatticeIntegrals<'g, 'c> {
    g: &'g GridFunction<'c>,
    cube_total: Vec<f64>,
    memo: BTreeMap<(u8, i64, i64), f64>,
}

impl<'g, 'c> LatticeIntegrals<'g, 'c> {
    fn new(g: &'g GridFunction<'c>) -> Result<Self, Error> {
        if g.is_complex() {
            return Err(Error::InvalidParameter("maximal operator needs a real function".into()));
        }
        if g.re().iter().any(|&v| v < 0.0) {
            return Err(Error::NegativeValues);
        }
        let cube_total = (0..g.cover().len()).map(|i| cube_integral(g, i)).collect();
        Ok(LatticeIntegrals { g, cube_total, memo: BTreeMap::new() })
    }

    fn side(&self, level: u8) -> f64 {
        self.g.cover().root_scale() / (1u64 << level) as f64
    }

    fn integral(&mut self, level: u8, ix: i64, iy: i64) -> f64 {
        if let Some(&v) = self.memo.get(&(level, ix, iy)) {
            return v;
        }
        let cover = self.g.cover();
        let v = match cover.cube_covering_cell(level, ix, iy) {
            Some(i) if cover.cube(i).level == level => self.cube_total[i],
            Some(i) => {
                let h = self.side(level);
                let cell = Rect::new(ix as f64 * h, iy as f64 * h, (ix + 1) as f64 * h, (iy + 1) as f64 * h);
                partial_integral(self.g, i, &cell)
            }
            None if level > cover.max_level() => 0.0,
            None => {
                let (cx, cy) = (2 * ix, 2 * iy);
                self.integral(level + 1, cx, cy)
                    + self.integral(level + 1, cx + 1, cy)
                    + self.integral(level + 1, cx, cy + 1)
                    + self.integral(level + 1, cx + 1, cy + 1)
            }
        };
        self.memo.insert((level, ix, iy), v);
        v
    }

    /// Means over the family at `x`: for each level `k`, the dyadic cube
    /// containing `x` and its translates by half a side along x, y and both.
    fn family_max(&mut self, x: Point) -> f64 {
        let mut best = 0.0_f64;
        for_each_family_cube(self.g.cover(), x, |level, cx, cy| {
            let child = level + 1;
            let total = self.integral(child, cx, cy)
                + self.integral(child, cx + 1, cy)
                + self.integral(child, cx, cy + 1)
                + self.integral(child, cx + 1, cy + 1);
            let h = self.side(level);
            best = best.max(total / (h * h));
        });
        best
    }
}

/// Calls `visit(level, cx, cy)` for every cube of the search family at `x`;
/// the cube is the union of the four level-`level+1` cells `(cx + {0,1},
/// cy + {0,1})`.
fn for_each_family_cube(cover: &WhitneyCover, x: Point, mut visit: impl FnMut(u8, i64, i64)) {
    for level in 0..=cover.max_level() {
        let hc = cover.root_scale() / (1u64 << (level + 1)) as f64;
        let fx = (x.x / hc).floor() as i64;
        let fy = (x.y / hc).floor() as i64;
        for (a, b) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            visit(level, fx - (fx - a).rem_euclid(2), fy - (fy - b).rem_euclid(2));
        }
    }
}

/// Rectangles of the search family at `x`, largest first.
pub fn maximal_family(cover: &WhitneyCover, x: Point) -> Vec<Rect> {
    let mut out = Vec::new();
    for_each_family_cube(cover, x, |level, cx, cy| {
        let hc = cover.root_scale() / (1u64 << (level + 1)) as f64;
        out.push(Rect::new(cx as f64 * hc, cy as f64 * hc, (cx + 2) as f64 * hc, (cy + 2) as f64 * hc));
    });
    out
}

/// `sum_nodes w g` over cover cube `i`.
pub fn cube_integral(g: &GridFunction<'_>, i: usize) -> f64 {
    let mm = g.nodes_per_cube();
    (i * mm..(i + 1) * mm).map(|k| g.weight(k) * g.re()[k]).sum()
}

/// Integral of `g` over `rect`, a subset of cover cube `i`, with exact node
/// cell overlaps.
fn partial_integral(g: &GridFunction<'_>, i: usize, rect: &Rect) -> f64 {
    let m = g.m();
    let c = g.cover().cube(i);
    let h = c.side() / m as f64;
    let r = c.rect();
    let mut acc = 0.0;
    for b in 0..m {
        for a in 0..m {
            let cell = Rect::new(r.x0 + a as f64 * h, r.y0 + b as f64 * h, r.x0 + (a + 1) as f64 * h, r.y0 + (b + 1) as f64 * h);
            let ov = cell.intersection_area(rect);
            if ov > 0.0 {
                acc += ov * g.re()[g.flat(i, a + m * b)];
            }
        }
    }
    acc
}

/// Midpoint-rule mean of `g` (zero outside the cover) over an arbitrary
/// rectangle. Slow reference used to cross-check the family search.
pub fn rect_mean(g: &GridFunction<'_>, rect: &Rect) -> f64 {
    let cover = g.cover();
    let mut acc = 0.0;
    for i in 0..cover.len() {
        if cover.cube(i).rect().intersection_area(rect) > 0.0 {
            acc += partial_integral(g, i, rect);
        }
    }
    acc / rect.area()
}

/// Non-centered maximal function of `g >= 0` at node `x`, over the search
/// family of [`maximal_family`].
pub fn maximal(g: &GridFunction<'_>, x: Point) -> Result<f64, Error> {
    g.node_at(x)?;
    let mut li = LatticeIntegrals::new(g)?;
    Ok(li.family_max(x))
}

/// `Mg` at every node, in node order.
pub fn maximal_all(g: &GridFunction<'_>) -> Result<Vec<f64>, Error> {
    let mut li = LatticeIntegrals::new(g)?;
    Ok((0..g.len()).map(|k| li.family_max(g.point(k))).collect())
}

/// Both sides of the three cube-sum inequalities at one cube `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MaximalLemmaRatios {
    /// `inf_{y in Q} Mg(y)` over the nodes of `Q`.
    pub inf_mg: f64,
    /// `sum_{D(Q,S) > r} int_S g / D^(d+eta)` against `inf Mg / r^eta`.
    pub nonlocal_lhs: f64,
    pub nonlocal_ratio: f64,
    /// `sum_{D(Q,S) < r} int_S g / D^(d-eta)` against `inf Mg r^eta`.
    pub local_lhs: f64,
    pub local_ratio: f64,
    /// `sum_S l(S)^d / D^(d+eta)` against `l(Q)^-eta`.
    pub size_lhs: f64,
    pub size_ratio: f64,
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

fn check_params(eta: f64, r: f64) -> Result<(), Error> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("eta must be positive, got {eta}")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("r must be positive, got {r}")));
    }
    Ok(())
}

fn lemma_at(cover: &WhitneyCover, integrals: &[f64], inf_mg: f64, qi: usize, eta: f64, r: f64) -> MaximalLemmaRatios {
    let q = cover.cube(qi);
    let (mut nonlocal, mut local, mut size) = (0.0, 0.0, 0.0);
    for (si, s) in cover.cubes().iter().enumerate() {
        let dq = long_distance(q, s);
        let ls = s.side();
        size += ls * ls * pow_nonneg(dq, -(D + eta));
        if dq > r {
            nonlocal += integrals[si] * pow_nonneg(dq, -(D + eta));
        } else if dq < r {
            local += integrals[si] * pow_nonneg(dq, -(D - eta));
        }
    }
    MaximalLemmaRatios {
        inf_mg,
        nonlocal_lhs: nonlocal,
        nonlocal_ratio: ratio(nonlocal, inf_mg * pow_nonneg(r, -eta)),
        local_lhs: local,
        local_ratio: ratio(local, inf_mg * pow_nonneg(r, eta)),
        size_lhs: size,
        size_ratio: ratio(size, pow_nonneg(q.side(), -eta)),
    }
}

/// Ratios LHS / RHS of the three cube-sum inequalities at cube `q` (0/0
/// counts as 0).
pub fn check_maximal_lemma(cover: &WhitneyCover, g: &GridFunction<'_>, q: usize, eta: f64, r: f64) -> Result<MaximalLemmaRatios, Error> {
    check_params(eta, r)?;
    if !core::ptr::eq(cover, g.cover()) && cover.cubes() != g.cover().cubes() {
        return Err(Error::CoverMismatch);
    }
    if q >= cover.len() {
        return Err(Error::InvalidParameter(alloc::format!("cube {q} out of range")));
    }
    let mut li = LatticeIntegrals::new(g)?;
    let mm = g.nodes_per_cube();
    let inf_mg = (q * mm..(q + 1) * mm).map(|k| li.family_max(g.point(k))).fold(f64::INFINITY, f64::min);
    Ok(lemma_at(cover, &li.cube_total, inf_mg, q, eta, r))
}

/// Largest of each ratio over all cubes of the cover.
pub fn max_maximal_lemma_ratios(g: &GridFunction<'_>, eta: f64, r: f64) -> Result<MaximalLemmaRatios, Error> {
    check_params(eta, r)?;
    let cover = g.cover();
    let mg = maximal_all(g)?;
    let integrals: Vec<f64> = (0..cover.len()).map(|i| cube_integral(g, i)).collect();
    let mm = g.nodes_per_cube();
    let per_cube = par::map_range(cover.len(), |q| {
        let inf_mg = mg[q * mm..(q + 1) * mm].iter().copied().fold(f64::INFINITY, f64::min);
        lemma_at(cover, &integrals, inf_mg, q, eta, r)
    });
    let mut out = MaximalLemmaRatios::default();
    for v in per_cube {
        if v.nonlocal_ratio > out.nonlocal_ratio {
            out.nonlocal_ratio = v.nonlocal_ratio;
            out.nonlocal_lhs = v.nonlocal_lhs;
        }
        if v.local_ratio > out.local_ratio {
            out.local_ratio = v.local_ratio;
            out.local_lhs = v.local_lhs;
        }
        if v.size_ratio > out.size_ratio {
            out.size_ratio = v.size_ratio;
            out.size_lhs = v.size_lhs;
        }
    }
    out.inf_mg = mg.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(out)
}

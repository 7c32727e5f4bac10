use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::kernel::KernelSpec;
use super::pv::{pv_at, Density, ExtraCell, PvQuadrature, Rules};
use crate::chains::ShadowIndex;
use crate::funcspace::{cube_contributions, inner_integrals, seminorm, GridFunction, SeminormOptions, SeminormParams, Variant};
use crate::geometry::{clip_polygon_to_rect, polygon_moments, Domain, Point, Rect, RectClass, Side, WhitneyCover};
use crate::math::{abs_pow, inv_dist_pow, pow_nonneg};
use crate::{par, Error, DIM};

/// Node values of `T_Omega f` with per-node convergence flags.
#[derive(Debug, Clone)]
pub struct Applied<'c> {
    pub values: GridFunction<'c>,
    pub converged: Vec<bool>,
}

impl Applied<'_> {
    pub fn nonconverged(&self) -> usize {
        self.converged.iter().filter(|c| !**c).count()
    }
}

fn apply_density<'c>(spec: &KernelSpec, d: &Density<'_, 'c>, f: &GridFunction<'c>, quad: &PvQuadrature) -> Result<Applied<'c>, Error> {
    let rules = Rules::new(quad);
    let vals = par::map_range(f.len(), |k| pv_at(spec, d, f.point(k), quad, &rules));
    let re = vals.iter().map(|v| v.value.re).collect();
    let im = vals.iter().map(|v| v.value.im).collect();
    let converged = vals.iter().map(|v| v.converged).collect();
    Ok(Applied { values: GridFunction::from_values(f.cover(), f.m(), re, Some(im))?, converged })
}

/// `T_Omega f = chi_Omega T(chi_Omega f)` at every node of `f`, which must
/// live on an interior cover; `f` is zero off the cover.
pub fn truncated_apply<'c>(spec: &KernelSpec, f: &GridFunction<'c>, quad: &PvQuadrature) -> Result<Applied<'c>, Error> {
    if f.cover().side() != Side::Interior {
        return Err(Error::InvalidParameter("truncated_apply needs a function on an interior cover".into()));
    }
    apply_density(spec, &Density::new(f), f, quad)
}

/// Pieces per side of a collar cell.
const COLLAR_PIECES: usize = 8;

/// `T_Omega 1` at every node, with the uncovered boundary collar filled in
/// so the density is `chi_Omega`: each collar cell is split into pieces
/// carrying the exact area of `Omega` in them, lumped at its centroid.
pub fn apply_to_one<'c>(spec: &KernelSpec, cover: &'c WhitneyCover, m: usize, quad: &PvQuadrature) -> Result<Applied<'c>, Error> {
    if cover.side() != Side::Interior {
        return Err(Error::InvalidParameter("T(1) needs an interior cover".into()));
    }
    let one = GridFunction::builtin(cover, crate::funcspace::Builtin::Const(1.0), m)?;
    let cells = cover.collar_cells();
    let collar: Vec<ExtraCell> = par::map_range(cells.len(), |i| {
        let c = cells[i];
        let r = c.rect();
        let clipped = cover.domain().clip_to_rect(&r);
        let hs = c.side() / COLLAR_PIECES as f64;
        let mut pieces = Vec::with_capacity(COLLAR_PIECES * COLLAR_PIECES);
        for b in 0..COLLAR_PIECES {
            for a in 0..COLLAR_PIECES {
                let piece = Rect::new(r.x0 + a as f64 * hs, r.y0 + b as f64 * hs, r.x0 + (a + 1) as f64 * hs, r.y0 + (b + 1) as f64 * hs);
                pieces.push(match polygon_moments(&clip_polygon_to_rect(&clipped, &piece)) {
                    Some((area, at)) => (area / piece.area(), at),
                    None => (0.0, piece.center()),
                });
            }
        }
        ExtraCell { cell: c, side: COLLAR_PIECES, pieces }
    });
    let d = Density::new(&one).with_extra(collar);
    apply_density(spec, &d, &one, quad)
}

/// Node-cell area fractions of `shape` on `cover`: the indicator of
/// `shape` as a piecewise-constant density.
pub fn indicator_fractions<'c>(cover: &'c WhitneyCover, shape: &Domain, m: usize) -> Result<GridFunction<'c>, Error> {
    let n = cover.len() * m * m;
    let vals = par::map_range(n, |k| {
        let i = k / (m * m);
        let p = crate::funcspace::node_point(cover, m, i, k % (m * m));
        let h = 0.5 * cover.cube(i).side() / m as f64;
        let r = Rect::new(p.x - h, p.y - h, p.x + h, p.y + h);
        match shape.classify_rect(&r) {
            RectClass::Clear { inside, .. } => {
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
            RectClass::Straddles => shape.area_in_rect(&r) / r.area(),
        }
    });
    GridFunction::from_values(cover, m, vals, None)
}

/// `L^p` part, fractional-gradient part and their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormParts {
    pub lp: f64,
    pub grad_lp: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CubeShare {
    pub cube: usize,
    pub level: u8,
    pub center: Point,
    pub frontier: bool,
    /// Share of `||grad^s_q g||_p^p`.
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct T1Report {
    pub kernel: String,
    pub params: SeminormParams,
    pub m: usize,
    pub max_level: u8,
    /// Norm of `g = T_Omega 1` over every node.
    pub lp: f64,
    pub grad_lp: f64,
    pub total: f64,
    /// The same with frontier-collar cubes left out of the outer sums.
    pub collar_excluded_variant: NormParts,
    pub worst_cubes: Vec<CubeShare>,
    pub nonconverged_nodes: usize,
    pub warning: Option<String>,
}

/// Computes `g = T_Omega 1` and its shadow norm `||g||_p + ||grad^s_q g||_p`.
pub fn t1_check(
    spec: &KernelSpec,
    cover: &WhitneyCover,
    params: SeminormParams,
    index: &ShadowIndex,
    m: usize,
    quad: &PvQuadrature,
) -> Result<T1Report, Error> {
    let variant = Variant::Shadow(index);
    params.check(&variant)?;
    let d = DIM as f64;
    let warning = (params.s <= d / params.p)
        .then(|| alloc::format!("s = {} <= d/p = {}: outside the range where the T(1) criterion applies", params.s, d / params.p));
    let g = apply_to_one(spec, cover, m, quad)?;
    let gv = &g.values;
    let inner = inner_integrals(gv, params, variant, SeminormOptions::default())?;
    let shares = cube_contributions(gv, &inner, params);
    let mm = m * m;
    let (mut lp_all, mut lp_in, mut gr_all, mut gr_in) = (0.0, 0.0, 0.0, 0.0);
    for (i, share) in shares.iter().enumerate() {
        let lp: f64 = (i * mm..(i + 1) * mm).map(|k| gv.weight(k) * abs_pow(gv.abs_at(k), params.p)).sum();
        lp_all += lp;
        gr_all += share;
        if !cover.is_frontier(i) {
            lp_in += lp;
            gr_in += share;
        }
    }
    let root = |v: f64| pow_nonneg(v, 1.0 / params.p);
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| shares[b].total_cmp(&shares[a]).then(a.cmp(&b)));
    let worst_cubes = order
        .into_iter()
        .take(10)
        .map(|i| {
            let c = cover.cube(i);
            CubeShare { cube: i, level: c.level, center: c.center(), frontier: cover.is_frontier(i), share: shares[i] }
        })
        .collect();
    Ok(T1Report {
        kernel: spec.name().into(),
        params,
        m,
        max_level: cover.max_level(),
        lp: root(lp_all),
        grad_lp: root(gr_all),
        total: root(lp_all) + root(gr_all),
        collar_excluded_variant: NormParts { lp: root(lp_in), grad_lp: root(gr_in), total: root(lp_in) + root(gr_in) },
        worst_cubes,
        nonconverged_nodes: g.nonconverged(),
        warning,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KeyLemmaReport {
    /// `sum_Q ||grad^s_q T_Omega (f - f_Q)||_{L^p(Q)}^p`.
    pub lhs: f64,
    /// `||f||^p` in the shadow norm; `None` when it vanishes.
    pub denominator: Option<f64>,
    pub ratio: Option<f64>,
    pub nonconverged_nodes: usize,
}

/// The key-lemma harness for one `f`. Uses
/// `T_Omega(f - f_Q) = T_Omega(f - c) - (f_Q - c) T_Omega 1` with `c` the
/// first node value, so constants give exactly zero.
pub fn key_lemma_ratio(
    spec: &KernelSpec,
    f: &GridFunction<'_>,
    params: SeminormParams,
    index: &ShadowIndex,
    quad: &PvQuadrature,
) -> Result<KeyLemmaReport, Error> {
    let variant = Variant::Shadow(index);
    params.check(&variant)?;
    if f.is_complex() {
        return Err(Error::InvalidParameter("key_lemma_ratio takes a real function".into()));
    }
    let cover = f.cover();
    if index.len() != cover.len() {
        return Err(Error::InvalidParameter("shadow index does not match the cover".into()));
    }
    let m = f.m();
    let mm = m * m;
    let c0 = f.re().first().copied().unwrap_or(0.0);
    let shifted: Vec<f64> = f.re().iter().map(|v| v - c0).collect();
    let fs = GridFunction::from_values(cover, m, shifted, None)?;
    let gf = truncated_apply(spec, &fs, quad)?;
    let one = GridFunction::builtin(cover, crate::funcspace::Builtin::Const(1.0), m)?;
    let g1 = truncated_apply(spec, &one, quad)?;
    let cplx = |g: &GridFunction<'_>| -> Vec<Complex64> {
        let im = g.im().unwrap_or(&[]);
        g.re().iter().enumerate().map(|(k, r)| Complex64::new(*r, im.get(k).copied().unwrap_or(0.0))).collect()
    };
    let (a, b) = (cplx(&gf.values), cplx(&g1.values));
    let alpha = params.s * params.q + DIM as f64;
    let e = params.p / params.q;

    let per_cube = par::map_range(cover.len(), |qi| {
        let shift = f.cube_mean(qi).0 - c0;
        if a.iter().all(|v| *v == Complex64::new(0.0, 0.0)) && shift == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for x in qi * mm..(qi + 1) * mm {
            let gx = a[x] - b[x] * shift;
            let px = f.point(x);
            let mut inner = 0.0;
            for &s in index.members(qi) {
                let s = s as usize;
                for y in s * mm..(s + 1) * mm {
                    if y == x {
                        continue;
                    }
                    let diff = gx - (a[y] - b[y] * shift);
                    let py = f.point(y);
                    let r2 = (px.x - py.x) * (px.x - py.x) + (px.y - py.y) * (px.y - py.y);
                    inner += f.weight(y) * abs_pow(diff.norm(), params.q) * inv_dist_pow(r2, alpha);
                }
            }
            acc += f.weight(x) * pow_nonneg(inner, e);
        }
        acc
    });
    let lhs: f64 = per_cube.iter().sum();
    let norm = seminorm(f, params, variant)?.total;
    let denominator = (norm > 0.0).then(|| pow_nonneg(norm, params.p));
    Ok(KeyLemmaReport { lhs, denominator, ratio: denominator.map(|d| lhs / d), nonconverged_nodes: gf.nonconverged() + g1.nonconverged() })
}

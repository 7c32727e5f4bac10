//! Jones-type extension `Lambda_0 f = f chi_Omega + sum_{Q in W3} psi_Q f_{Q*}`
//! from interior samples to the exterior cover.
//!
//! Every exterior cube `Q` small enough gets a same-size interior partner
//! `Q*` (the symmetrized cube); `psi_Q` are tensor cubic plateaus equal to 1
//! on `Q`, vanishing outside `1.1 Q`, normalized by the local sum.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::funcspace::{lp_norm, node_point, seminorm, GridFunction, NormReport, SeminormParams, Variant};
use crate::geometry::{long_distance, Point, Side, WhitneyCover};
use crate::{par, Error};

/// Partners are searched within `PARTNER_SEARCH_FACTOR * c_w * l(Q)`.
pub const PARTNER_SEARCH_FACTOR: f64 = 8.0;

/// Support of `psi_Q` is `(1 + 2 * BUMP_MARGIN) Q`.
pub const BUMP_MARGIN: f64 = 0.05;

/// `W2` (the exterior cover), `W3`, `W4`, partners and overlap statistics.
#[derive(Debug, Clone)]
pub struct ExteriorStructure<'a> {
    interior: &'a WhitneyCover,
    exterior: &'a WhitneyCover,
    combined: WhitneyCover,
    partner: Vec<Option<usize>>,
    in_w3: Vec<bool>,
    in_w4: Vec<bool>,
    size_cap: f64,
    search_radius_factor: f64,
}

/// Summary numbers of an [`ExteriorStructure`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StructureStats {
    pub w2: usize,
    pub w3: usize,
    pub w4: usize,
    /// Largest side admitted to `W3`.
    pub size_cap: f64,
    /// `max_{Q in W3} D(Q, Q*) / l(Q)`.
    pub partner_constant: f64,
    /// `max_S #{Q in W3 : Q* = S}`.
    pub max_overlap: usize,
    pub mean_overlap: f64,
}

/// Smoothstep plateau in one variable: 1 on `[a, b]`, 0 beyond `margin`.
#[inline]
fn plateau_1d(t: f64, a: f64, b: f64, margin: f64) -> f64 {
    let out = if t < a {
        a - t
    } else if t > b {
        t - b
    } else {
        return 1.0;
    };
    if out >= margin {
        return 0.0;
    }
    let u = out / margin;
    1.0 - u * u * (3.0 - 2.0 * u)
}

/// Unnormalized bump of cube `q` at `x`.
pub fn raw_bump(cover: &WhitneyCover, q: usize, x: Point) -> f64 {
    let c = cover.cube(q);
    let r = c.rect();
    let margin = BUMP_MARGIN * c.side();
    plateau_1d(x.x, r.x0, r.x1, margin) * plateau_1d(x.y, r.y0, r.y1, margin)
}

/// Builds `W3`, `W4` and the partner map.
///
/// `size_cap_factor` scales the largest side `l*` below which every exterior
/// cube has a partner; `W3` holds the partnered cubes with side at most
/// `size_cap_factor * l*`.
pub fn build_exterior_structure<'a>(
    interior: &'a WhitneyCover,
    exterior: &'a WhitneyCover,
    size_cap_factor: f64,
) -> Result<ExteriorStructure<'a>, Error> {
    if !(size_cap_factor > 0.0 && size_cap_factor.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("size cap factor must be positive, got {size_cap_factor}")));
    }
    let combined = WhitneyCover::union(interior, exterior)?;
    let factor = PARTNER_SEARCH_FACTOR * interior.c_w();

    // Interior cubes grouped by level; partners are same-level.
    let mut by_level: Vec<Vec<usize>> = vec![Vec::new(); 64];
    for (j, c) in interior.cubes().iter().enumerate() {
        by_level[c.level as usize].push(j);
    }
    let partner: Vec<Option<usize>> = par::map_range(exterior.len(), |i| {
        let q = exterior.cube(i);
        let qr = q.rect();
        let reach = factor * q.side();
        let mut best: Option<(f64, usize)> = None;
        for &j in &by_level[q.level as usize] {
            let d = interior.cube(j).rect().dist_to_rect(&qr);
            if d <= reach && best.is_none_or(|b| d < b.0) {
                best = Some((d, j));
            }
        }
        best.map(|b| b.1)
    });

    if let Some(i) = (0..exterior.len()).find(|&i| exterior.is_frontier(i) && partner[i].is_none()) {
        return Err(Error::OrphanCube { cube: i });
    }
    // l*: sides at and below the coarsest level from which on every cube is
    // partnered.
    let mut worst_missing: Option<u8> = None;
    for (i, p) in partner.iter().enumerate() {
        if p.is_none() {
            let l = exterior.cube(i).level;
            worst_missing = Some(worst_missing.map_or(l, |w| w.max(l)));
        }
    }
    let cap_level = worst_missing.map_or(0, |l| l + 1);
    let size_cap = size_cap_factor * exterior.root_scale() / (1u64 << cap_level) as f64;

    let in_w3: Vec<bool> =
        (0..exterior.len()).map(|i| partner[i].is_some() && exterior.cube(i).side() <= size_cap * (1.0 + 1e-12)).collect();
    let in_w4: Vec<bool> = (0..exterior.len()).map(|i| in_w3[i] && exterior.neighbors(i).iter().all(|&j| in_w3[j])).collect();

    Ok(ExteriorStructure { interior, exterior, combined, partner, in_w3, in_w4, size_cap, search_radius_factor: factor })
}

impl<'a> ExteriorStructure<'a> {
    pub fn interior(&self) -> &'a WhitneyCover {
        self.interior
    }

    pub fn exterior(&self) -> &'a WhitneyCover {
        self.exterior
    }

    /// Interior and exterior cubes together, over the computation box.
    pub fn combined(&self) -> &WhitneyCover {
        &self.combined
    }

    /// Interior partner of exterior cube `i`, if `i` is in `W3`.
    pub fn partner(&self, i: usize) -> Option<usize> {
        if self.in_w3[i] {
            self.partner[i]
        } else {
            None
        }
    }

    pub fn in_w3(&self, i: usize) -> bool {
        self.in_w3[i]
    }

    pub fn in_w4(&self, i: usize) -> bool {
        self.in_w4[i]
    }

    pub fn search_radius_factor(&self) -> f64 {
        self.search_radius_factor
    }

    /// `#{Q in W3 : Q* = S}` for every interior cube `S`.
    pub fn overlap_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.interior.len()];
        for i in 0..self.exterior.len() {
            if let Some(s) = self.partner(i) {
                counts[s] += 1;
            }
        }
        counts
    }

    pub fn stats(&self) -> StructureStats {
        let counts = self.overlap_counts();
        let used: Vec<usize> = counts.iter().copied().filter(|&c| c > 0).collect();
        let mut partner_constant = 0.0_f64;
        for i in 0..self.exterior.len() {
            if let Some(s) = self.partner(i) {
                let q = self.exterior.cube(i);
                partner_constant = partner_constant.max(long_distance(q, self.interior.cube(s)) / q.side());
            }
        }
        StructureStats {
            w2: self.exterior.len(),
            w3: self.in_w3.iter().filter(|&&b| b).count(),
            w4: self.in_w4.iter().filter(|&&b| b).count(),
            size_cap: self.size_cap,
            partner_constant,
            max_overlap: used.iter().copied().max().unwrap_or(0),
            mean_overlap: if used.is_empty() { 0.0 } else { used.iter().sum::<usize>() as f64 / used.len() as f64 },
        }
    }

    /// `(psi_Q(x))` for the `W3` cubes whose support holds `x`, where `x`
    /// lies in exterior cube `i`. Normalized by `max(1, sum raw)`.
    pub fn bumps_at(&self, i: usize, x: Point) -> Vec<(usize, f64)> {
        let mut raw: Vec<(usize, f64)> = core::iter::once(i)
            .chain(self.exterior.neighbors(i).iter().copied())
            .filter(|&j| self.in_w3[j])
            .map(|j| (j, raw_bump(self.exterior, j, x)))
            .filter(|t| t.1 > 0.0)
            .collect();
        raw.sort_unstable_by_key(|t| t.0);
        let total: f64 = raw.iter().map(|t| t.1).sum();
        let norm = total.max(1.0);
        for t in &mut raw {
            t.1 /= norm;
        }
        raw
    }

    /// `sum_Q psi_Q(x)` for `x` in exterior cube `i`.
    pub fn partition_sum(&self, i: usize, x: Point) -> f64 {
        self.bumps_at(i, x).iter().map(|t| t.1).sum()
    }

    /// `D(Q1*, Q2*) / D(Q1, Q2)` over seeded random pairs of `W3` cubes.
    pub fn long_distance_distortion(&self, n_pairs: usize, seed: u64) -> (f64, f64) {
        let w3: Vec<usize> = (0..self.exterior.len()).filter(|&i| self.in_w3[i]).collect();
        if w3.len() < 2 {
            return (1.0, 1.0);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
        for _ in 0..n_pairs {
            let a = w3[rng.gen_range(0..w3.len())];
            let b = w3[rng.gen_range(0..w3.len())];
            if a == b {
                continue;
            }
            let (sa, sb) = (self.partner[a].unwrap_or(0), self.partner[b].unwrap_or(0));
            let d = long_distance(self.exterior.cube(a), self.exterior.cube(b));
            let ds = long_distance(self.interior.cube(sa), self.interior.cube(sb));
            lo = lo.min(ds / d);
            hi = hi.max(ds / d);
        }
        (lo, hi)
    }
}

/// Partition-of-unity audit over the exterior nodes of an `m x m` grid.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PartitionCheck {
    /// `max |sum psi - 1|` over nodes inside `W4` cubes.
    pub w4_plateau_residual: f64,
    pub w4_nodes: usize,
    pub min_sum: f64,
    pub max_sum: f64,
}

pub fn partition_check(structure: &ExteriorStructure<'_>, m: usize) -> PartitionCheck {
    let ext = structure.exterior;
    let rows = par::map_range(ext.len(), |i| {
        let mut out = (0.0_f64, 0usize, f64::INFINITY, 0.0_f64);
        for k in 0..m * m {
            let s = structure.partition_sum(i, node_point(ext, m, i, k));
            if structure.in_w4[i] {
                out.0 = out.0.max((s - 1.0).abs());
                out.1 += 1;
            }
            out.2 = out.2.min(s);
            out.3 = out.3.max(s);
        }
        out
    });
    let mut c = PartitionCheck { w4_plateau_residual: 0.0, w4_nodes: 0, min_sum: f64::INFINITY, max_sum: 0.0 };
    for r in rows {
        c.w4_plateau_residual = c.w4_plateau_residual.max(r.0);
        c.w4_nodes += r.1;
        c.min_sum = c.min_sum.min(r.2);
        c.max_sum = c.max_sum.max(r.3);
    }
    c
}

/// `Lambda_0 f` on the combined cover. Interior nodes copy `f`; exterior
/// nodes get `sum psi_Q(x) f_{Q*}` with `f_{Q*}` the node mean over `Q*`.
pub fn extend<'s>(f: &GridFunction<'_>, structure: &'s ExteriorStructure<'_>) -> Result<GridFunction<'s>, Error> {
    let interior = structure.interior;
    if !core::ptr::eq(f.cover(), interior) && f.cover().cubes() != interior.cubes() {
        return Err(Error::CoverMismatch);
    }
    let m = f.m();
    let mm = m * m;
    let means: Vec<(f64, f64)> = (0..interior.len()).map(|i| f.cube_mean(i)).collect();
    let complex = f.is_complex();
    let combined = &structure.combined;
    let blocks = par::map_range(combined.len(), |c| {
        let cube = combined.cube(c);
        if let Some(i) = interior.index_of(cube) {
            let re = f.cube_values(i).to_vec();
            let im = f.im().map(|v| v[i * mm..(i + 1) * mm].to_vec());
            return (re, im);
        }
        let e = structure.exterior.index_of(cube).expect("combined cube is interior or exterior");
        let mut re = vec![0.0; mm];
        let mut im = if complex { Some(vec![0.0; mm]) } else { None };
        for k in 0..mm {
            let x = node_point(combined, m, c, k);
            for (q, w) in structure.bumps_at(e, x) {
                let s = structure.partner[q].expect("W3 cube has a partner");
                re[k] += w * means[s].0;
                if let Some(im) = im.as_mut() {
                    im[k] += w * means[s].1;
                }
            }
        }
        (re, im)
    });
    let mut re = Vec::with_capacity(combined.len() * mm);
    let mut im = if complex { Some(Vec::with_capacity(combined.len() * mm)) } else { None };
    for (r, i) in blocks {
        re.extend_from_slice(&r);
        if let (Some(all), Some(i)) = (im.as_mut(), i) {
            all.extend_from_slice(&i);
        }
    }
    GridFunction::from_values(combined, m, re, im)
}

/// `||Lambda_0 f||_{A(box)} / ||f||_{A(Omega)}`, both with the full seminorm.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExtensionRatio {
    pub ratio: f64,
    pub extended: NormReport,
    pub original: NormReport,
    /// `true` when `f` is discretely constant and only the `L^p` parts are compared.
    pub lp_only: bool,
}

pub fn extension_norm_ratio(
    f: &GridFunction<'_>,
    params: SeminormParams,
    structure: &ExteriorStructure<'_>,
) -> Result<ExtensionRatio, Error> {
    params.check(&Variant::Full)?;
    if structure.interior.side() != Side::Interior {
        return Err(Error::CoverMismatch);
    }
    let ext = extend(f, structure)?;
    let extended = seminorm(&ext, params, Variant::Full)?;
    let original = seminorm(f, params, Variant::Full)?;
    let constant = {
        let re = f.re();
        let first = re.first().copied().unwrap_or(0.0);
        re.iter().all(|&v| v == first) && f.im().is_none_or(|im| im.iter().all(|&v| v == im[0]))
    };
    let (num, den) = if constant { (lp_norm(&ext, params.p), lp_norm(f, params.p)) } else { (extended.total, original.total) };
    if den == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(ExtensionRatio { ratio: num / den, extended, original, lp_only: constant })
}

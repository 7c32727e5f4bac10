use alloc::vec;
use alloc::vec::Vec;

use super::cover::{Side, WhitneyCover};
use super::cube::side_at;
use super::point::Point;
use super::polygon::RectClass;
use crate::math::Float;

/// One failed cover invariant.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Violation {
    /// Cube lies (partly) on the wrong side of the boundary.
    WrongSide {
        cube: usize,
    },
    /// `c_w l <= dist <= 4 c_w l` fails (frontier cubes: upper half only).
    Bracket {
        cube: usize,
        dist: f64,
        side: f64,
    },
    /// Two cubes overlap (one contains the other).
    Overlap {
        a: usize,
        b: usize,
    },
    /// A cell of the region next to `cube` is not covered.
    Hole {
        cube: usize,
        x: f64,
        y: f64,
    },
    NeighborRatio {
        a: usize,
        b: usize,
    },
    /// `s` sits inside `5q` but is smaller than half of `q`.
    Absorption {
        q: usize,
        s: usize,
    },
    /// More dilates `50Q` than the depth-independent bound overlap at the
    /// center of `cube`.
    Superposition {
        cube: usize,
        count: usize,
        cap: usize,
    },
    /// `c_w` is too small for any depth-independent bound on the overlap of
    /// `{50Q}`; `max_overlap` is what this truncated cover reaches.
    SuperpositionUnbounded {
        c_w: f64,
        threshold: f64,
        max_overlap: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub cubes: usize,
    pub frontier: usize,
    /// Largest number of `50Q` containing a cube center.
    pub max_overlap_50q: usize,
    pub overlap_cap: Option<usize>,
    pub uncovered_measure: f64,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// Violations other than the `{50Q}` superposition family: the ones a
    /// single cube or pair of cubes can be blamed for.
    pub fn local_violations(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| !matches!(v, Violation::Superposition { .. } | Violation::SuperpositionUnbounded { .. }))
    }
}

/// Depth-independent bound on the pointwise overlap of the open dilates
/// `50Q`, when one exists.
///
/// If `x in 50Q` then `dist(x, Q) < 24.5 sqrt2 l(Q)`, so the bracket gives
/// `(c_w - 24.5 sqrt2) l(Q) < delta(x) < (4 c_w + 25.5 sqrt2) l(Q)`. For
/// `c_w > 24.5 sqrt2` this confines `l(Q)` to a fixed number of dyadic
/// levels, each contributing at most `50^2` cubes. Below that threshold
/// cubes of every size reach `x` and no bound independent of depth holds.
pub fn superposition_bound(c_w: f64) -> Option<usize> {
    let r2 = core::f64::consts::SQRT_2;
    let lo = c_w - 24.5 * r2;
    if lo <= 0.0 {
        return None;
    }
    let ratio = (4.0 * c_w + 25.5 * r2) / lo;
    let levels = ratio.log2().floor() as usize + 1;
    Some(2500 * levels)
}

/// Checks every cover invariant. Frontier cubes are exempt from the lower
/// distance bound and from coverage of the collar; everything else applies.
pub fn validate_cover(cover: &WhitneyCover) -> ValidationReport {
    let mut violations = Vec::new();
    let domain = cover.domain();
    let c_w = cover.c_w();
    let checks_bracket = cover.side() != Side::Combined;
    let want_inside = cover.side() == Side::Interior;

    for (i, q) in cover.cubes().iter().enumerate() {
        let r = q.rect();
        let h = q.side();
        if checks_bracket {
            match domain.classify_rect(&r) {
                RectClass::Straddles => violations.push(Violation::WrongSide { cube: i }),
                RectClass::Clear { inside, dist } => {
                    if inside != want_inside {
                        violations.push(Violation::WrongSide { cube: i });
                    } else if dist > 4.0 * c_w * h || (!cover.is_frontier(i) && dist < c_w * h) {
                        violations.push(Violation::Bracket { cube: i, dist, side: h });
                    }
                }
            }
        }
        let mut a = *q;
        while let Some(p) = a.parent() {
            if let Some(j) = cover.index_of(&p) {
                violations.push(Violation::Overlap { a: j, b: i });
            }
            a = p;
        }
    }

    // Coverage: every max_level cell touching a cube either belongs to a
    // cube, lies outside the region, or is crossed by the boundary.
    let fine = cover.max_level();
    let hf = side_at(cover.root_scale(), fine);
    let region = cover.region();
    for i in 0..cover.len() {
        let (nb, empty) = cover.probe_neighbors(i);
        for &j in &nb {
            if i < j && cover.cube(i).level.abs_diff(cover.cube(j).level) > 1 {
                violations.push(Violation::NeighborRatio { a: i, b: j });
            }
        }
        for (fx, fy) in empty {
            let cell = super::point::Rect::new(fx as f64 * hf, fy as f64 * hf, (fx + 1) as f64 * hf, (fy + 1) as f64 * hf);
            if !region.contains_rect(&cell) {
                continue;
            }
            let hole = match domain.classify_rect(&cell) {
                RectClass::Straddles => false,
                RectClass::Clear { inside, .. } => match cover.side() {
                    Side::Interior => inside,
                    Side::Exterior => !inside,
                    Side::Combined => true,
                },
            };
            if hole {
                let c = cell.center();
                violations.push(Violation::Hole { cube: i, x: c.x, y: c.y });
            }
        }
    }
    dedup_holes(&mut violations);

    // Absorption: S inside 5Q forces l(S) >= l(Q)/2.
    for (si, s) in cover.cubes().iter().enumerate() {
        let sr = s.rect();
        for level in 0..s.level.saturating_sub(1) {
            if cover.levels_mask() & (1 << level) == 0 {
                continue;
            }
            let anc = s.ancestor(level);
            for dy in -2..=2 {
                for dx in -2..=2 {
                    if let Some(qi) = cover.find(level, anc.ix + dx, anc.iy + dy) {
                        if cover.cube(qi).rect().dilate(5.0).contains_rect(&sr) {
                            violations.push(Violation::Absorption { q: qi, s: si });
                        }
                    }
                }
            }
        }
    }

    let cap = superposition_bound(c_w);
    let counts = overlap_50q_at_centers(cover);
    let max_overlap = counts.iter().copied().max().unwrap_or(0);
    match cap {
        Some(cap) => {
            for (i, &n) in counts.iter().enumerate() {
                if n > cap {
                    violations.push(Violation::Superposition { cube: i, count: n, cap });
                }
            }
        }
        None => violations.push(Violation::SuperpositionUnbounded { c_w, threshold: 24.5 * core::f64::consts::SQRT_2, max_overlap }),
    }

    ValidationReport {
        violations,
        cubes: cover.len(),
        frontier: cover.frontier_count(),
        max_overlap_50q: max_overlap,
        overlap_cap: cap,
        uncovered_measure: cover.uncovered_measure(),
    }
}

fn dedup_holes(v: &mut Vec<Violation>) {
    let mut seen: Vec<(u64, u64)> = Vec::new();
    v.retain(|x| match x {
        Violation::Hole { x, y, .. } => {
            let key = (x.to_bits(), y.to_bits());
            if seen.contains(&key) {
                false
            } else {
                seen.push(key);
                true
            }
        }
        _ => true,
    });
}

/// For every cube, the number of cubes `Q` whose open dilate `50Q` holds its
/// center. Uses per-level prefix sums over cube-center occupancy.
pub fn overlap_50q_at_centers(cover: &WhitneyCover) -> Vec<usize> {
    let region = cover.region();
    let mut totals = vec![0usize; cover.len()];
    let mut bits = cover.levels_mask();
    while bits != 0 {
        let level = bits.trailing_zeros() as u8;
        bits &= bits - 1;
        let h = side_at(cover.root_scale(), level);
        let x0 = (region.x0 / h).round() as i64;
        let y0 = (region.y0 / h).round() as i64;
        let nx = ((region.x1 / h).round() as i64 - x0) as usize;
        let ny = ((region.y1 / h).round() as i64 - y0) as usize;
        // prefix[(y)*(nx+1)+x] = number of level cubes with ix-x0 < x, iy-y0 < y.
        let w = nx + 1;
        let mut prefix = vec![0u32; w * (ny + 1)];
        for q in cover.cubes().iter().filter(|q| q.level == level) {
            let (cx, cy) = ((q.ix - x0) as usize, (q.iy - y0) as usize);
            prefix[(cy + 1) * w + cx + 1] += 1;
        }
        for y in 1..=ny {
            for x in 1..=nx {
                prefix[y * w + x] += prefix[(y - 1) * w + x] + prefix[y * w + x - 1] - prefix[(y - 1) * w + x - 1];
            }
        }
        let range = |t: f64, origin: i64, n: usize| -> (usize, usize) {
            // Level indices i with |t - (i + 1/2)| < 25, as [lo, hi) offsets.
            let lo = (t - 25.5).floor() as i64 + 1;
            let hi = (t + 24.5).ceil() as i64;
            let lo = (lo - origin).clamp(0, n as i64) as usize;
            let hi = (hi - origin).clamp(0, n as i64) as usize;
            (lo, hi.max(lo))
        };
        for (i, p) in cover.cubes().iter().enumerate() {
            let c: Point = p.center();
            let (xl, xh) = range(c.x / h, x0, nx);
            let (yl, yh) = range(c.y / h, y0, ny);
            let n = prefix[yh * w + xh] + prefix[yl * w + xl] - prefix[yl * w + xh] - prefix[yh * w + xl];
            totals[i] += n as usize;
        }
    }
    totals
}

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::cube::{side_at, DyadicCube};
use super::point::{Point, Rect};
use super::polygon::{Domain, RectClass};
use crate::math::Float;
use crate::Error;

/// Which part of the plane a cover fills.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Side {
    Interior,
    Exterior,
    /// Interior and exterior cubes together, used for extended functions.
    Combined,
}

/// Default Whitney constant. Smaller values break the absorption property
/// for cubes selected by the maximal rule (see `validate_cover`).
pub const DEFAULT_C_W: f64 = 6.5;

/// Dilation factor of the exterior computation box.
pub const EXTERIOR_BOX_FACTOR: f64 = 4.0;

/// A finite Whitney cover on one side of a polygon boundary.
#[derive(Debug, Clone)]
pub struct WhitneyCover {
    domain: Domain,
    side: Side,
    c_w: f64,
    root_scale: f64,
    max_level: u8,
    region: Rect,
    cubes: Vec<DyadicCube>,
    frontier: Vec<bool>,
    adjacency: Vec<Vec<usize>>,
    index: BTreeMap<(u8, i64, i64), usize>,
    levels_present: u64,
    uncovered: f64,
}

/// Smallest power of two `>= diam / 2`.
pub fn root_scale_for(domain: &Domain) -> f64 {
    let target = 0.5 * domain.diameter();
    let mut r = 1.0_f64;
    while r < target {
        r *= 2.0;
    }
    while r * 0.5 >= target {
        r *= 0.5;
    }
    r
}

fn snap_out(r: &Rect, h: f64) -> Rect {
    Rect::new((r.x0 / h).floor() * h, (r.y0 / h).floor() * h, (r.x1 / h).ceil() * h, (r.y1 / h).ceil() * h)
}

/// Level-0 aligned box holding the cover's cubes.
pub fn computation_box(domain: &Domain, side: Side, root_scale: f64) -> Rect {
    let bb = domain.bounding_box();
    match side {
        Side::Interior => snap_out(&bb, root_scale),
        _ => {
            // Dilate about the center so the box is square-ish around the domain.
            let c = bb.center();
            let half = 0.5 * EXTERIOR_BOX_FACTOR * bb.width().max(bb.height());
            snap_out(&Rect::new(c.x - half, c.y - half, c.x + half, c.y + half), root_scale)
        }
    }
}

/// Builds the Whitney cover of `side` of `domain` by the maximal rule: a
/// dyadic cube enters iff it lies on the right side with
/// `c_w l <= dist(Q, boundary) <= 4 c_w l` and no ancestor does.
///
/// Cells at `max_level` that lie on the right side but are still too close
/// to the boundary are kept as frontier cubes. Cells crossed by the
/// boundary at `max_level` are dropped; their part of the region is the
/// uncovered collar.
pub fn build_cover(domain: &Domain, side: Side, c_w: f64, max_level: u8) -> Result<WhitneyCover, Error> {
    if !(c_w > 0.0 && c_w.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("c_w must be positive, got {c_w}")));
    }
    if side == Side::Combined {
        return Err(Error::InvalidParameter("combined covers are assembled with WhitneyCover::union".into()));
    }
    if max_level > 40 {
        return Err(Error::InvalidParameter(alloc::format!("max_level {max_level} exceeds 40")));
    }
    let root = root_scale_for(domain);
    let region = computation_box(domain, side, root);
    let want_inside = side == Side::Interior;

    let mut stack: Vec<DyadicCube> = Vec::new();
    let (nx0, ny0) = ((region.x0 / root).round() as i64, (region.y0 / root).round() as i64);
    let (nx1, ny1) = ((region.x1 / root).round() as i64, (region.y1 / root).round() as i64);
    for iy in (ny0..ny1).rev() {
        for ix in (nx0..nx1).rev() {
            stack.push(DyadicCube::new(0, ix, iy, root));
        }
    }

    let mut cubes = Vec::new();
    let mut frontier = Vec::new();
    let mut uncovered = 0.0;
    let mut regular = 0usize;
    while let Some(c) = stack.pop() {
        let r = c.rect();
        let h = c.side();
        match domain.classify_rect(&r) {
            RectClass::Straddles => {
                if c.level < max_level {
                    stack.extend(c.children().iter().rev().copied());
                } else {
                    let inner = domain.area_in_rect(&r);
                    uncovered += if want_inside { inner } else { r.area() - inner };
                }
            }
            RectClass::Clear { inside, dist } => {
                if inside != want_inside {
                    continue;
                }
                let fits = dist >= c_w * h && dist <= 4.0 * c_w * h;
                if fits {
                    cubes.push(c);
                    frontier.push(false);
                    regular += 1;
                } else if c.level < max_level {
                    stack.extend(c.children().iter().rev().copied());
                } else if dist < c_w * h {
                    cubes.push(c);
                    frontier.push(true);
                } else {
                    // Too far from the boundary even at max_level: only
                    // reachable with max_level 0 on a huge box.
                    return Err(Error::NoQualifyingCube { max_level });
                }
            }
        }
    }
    if regular == 0 {
        return Err(Error::NoQualifyingCube { max_level });
    }
    let cover = WhitneyCover::from_cubes(domain.clone(), side, c_w, root, max_level, region, cubes, frontier, uncovered);
    if let Some((a, b)) = cover.first_ratio_violation() {
        return Err(Error::NeighborRatio { a, b });
    }
    Ok(cover)
}

impl WhitneyCover {
    /// Assembles a cover from an explicit cube list. Cubes are sorted by
    /// `(level, ix, iy)`; index, adjacency and flags follow that order.
    pub fn from_cubes(
        domain: Domain,
        side: Side,
        c_w: f64,
        root_scale: f64,
        max_level: u8,
        region: Rect,
        cubes: Vec<DyadicCube>,
        frontier: Vec<bool>,
        uncovered: f64,
    ) -> WhitneyCover {
        assert_eq!(cubes.len(), frontier.len());
        let mut pairs: Vec<(DyadicCube, bool)> = cubes.into_iter().zip(frontier).collect();
        pairs.sort_by_key(|a| a.0.key());
        let cubes: Vec<DyadicCube> = pairs.iter().map(|p| p.0).collect();
        let frontier: Vec<bool> = pairs.iter().map(|p| p.1).collect();
        let mut index = BTreeMap::new();
        let mut levels_present = 0u64;
        for (i, c) in cubes.iter().enumerate() {
            index.insert(c.key(), i);
            levels_present |= 1 << c.level;
        }
        let mut cover = WhitneyCover {
            domain,
            side,
            c_w,
            root_scale,
            max_level,
            region,
            cubes,
            frontier,
            adjacency: Vec::new(),
            index,
            levels_present,
            uncovered,
        };
        cover.adjacency = (0..cover.cubes.len()).map(|i| cover.probe_neighbors(i).0).collect();
        cover
    }

    /// Interior and exterior cubes in one cover over the exterior box.
    pub fn union(interior: &WhitneyCover, exterior: &WhitneyCover) -> Result<WhitneyCover, Error> {
        if interior.side != Side::Interior
            || exterior.side != Side::Exterior
            || interior.root_scale != exterior.root_scale
            || interior.domain != exterior.domain
        {
            return Err(Error::CoverMismatch);
        }
        let mut cubes = interior.cubes.clone();
        cubes.extend_from_slice(&exterior.cubes);
        let mut frontier = interior.frontier.clone();
        frontier.extend_from_slice(&exterior.frontier);
        Ok(WhitneyCover::from_cubes(
            interior.domain.clone(),
            Side::Combined,
            interior.c_w,
            interior.root_scale,
            interior.max_level.max(exterior.max_level),
            exterior.region,
            cubes,
            frontier,
            interior.uncovered + exterior.uncovered,
        ))
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn c_w(&self) -> f64 {
        self.c_w
    }

    pub fn root_scale(&self) -> f64 {
        self.root_scale
    }

    pub fn max_level(&self) -> u8 {
        self.max_level
    }

    /// The computation box (the truncation of exterior covers).
    pub fn region(&self) -> Rect {
        self.region
    }

    pub fn cubes(&self) -> &[DyadicCube] {
        &self.cubes
    }

    pub fn cube(&self, i: usize) -> &DyadicCube {
        &self.cubes[i]
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn is_frontier(&self, i: usize) -> bool {
        self.frontier[i]
    }

    pub fn frontier_count(&self) -> usize {
        self.frontier.iter().filter(|&&f| f).count()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    /// Measure of the region left uncovered at `max_level` (cells crossed by
    /// the boundary).
    pub fn uncovered_measure(&self) -> f64 {
        self.uncovered
    }

    /// Total area of the cubes.
    pub fn covered_measure(&self) -> f64 {
        self.cubes.iter().map(|c| c.side() * c.side()).sum()
    }

    pub fn find(&self, level: u8, ix: i64, iy: i64) -> Option<usize> {
        self.index.get(&(level, ix, iy)).copied()
    }

    pub fn index_of(&self, c: &DyadicCube) -> Option<usize> {
        self.find(c.level, c.ix, c.iy)
    }

    /// The cube whose half-open cell `[x0,x1) x [y0,y1)` holds `p`.
    pub fn cube_of_point(&self, p: Point) -> Option<usize> {
        let mut bits = self.levels_present;
        while bits != 0 {
            let level = bits.trailing_zeros() as u8;
            bits &= bits - 1;
            let h = side_at(self.root_scale, level);
            let ix = (p.x / h).floor() as i64;
            let iy = (p.y / h).floor() as i64;
            if let Some(i) = self.find(level, ix, iy) {
                return Some(i);
            }
        }
        None
    }

    /// Index of some cube whose closure contains the `level`-cell
    /// `(ix, iy)`, scanning coarser levels first.
    pub(crate) fn cube_covering_cell(&self, level: u8, ix: i64, iy: i64) -> Option<usize> {
        let mut bits = self.levels_present & ((2u64 << level) - 1);
        while bits != 0 {
            let l = bits.trailing_zeros() as u8;
            bits &= bits - 1;
            let k = level - l;
            if let Some(i) = self.find(l, ix >> k, iy >> k) {
                return Some(i);
            }
        }
        None
    }

    /// Returns the neighbors of cube `i` and the `max_level` cells along its
    /// outer ring that no cube covers.
    pub(crate) fn probe_neighbors(&self, i: usize) -> (Vec<usize>, Vec<(i64, i64)>) {
        let c = self.cubes[i];
        let fine = self.max_level.max(c.level);
        let k = fine - c.level;
        let n = 1i64 << k;
        let (bx, by) = (c.ix << k, c.iy << k);
        let mut found = Vec::new();
        let mut empty = Vec::new();
        let mut probe = |fx: i64, fy: i64| match self.cube_covering_cell(fine, fx, fy) {
            Some(j) => found.push(j),
            None => empty.push((fx, fy)),
        };
        for t in -1..=n {
            probe(bx + t, by - 1);
            probe(bx + t, by + n);
        }
        for t in 0..n {
            probe(bx - 1, by + t);
            probe(bx + n, by + t);
        }
        found.sort_unstable();
        found.dedup();
        found.retain(|&j| j != i);
        (found, empty)
    }

    /// The `max_level` cells crossed by the boundary inside the computation
    /// box: the uncovered collar.
    pub fn collar_cells(&self) -> Vec<DyadicCube> {
        let root = self.root_scale;
        let r = self.region;
        let (nx0, ny0) = ((r.x0 / root).round() as i64, (r.y0 / root).round() as i64);
        let (nx1, ny1) = ((r.x1 / root).round() as i64, (r.y1 / root).round() as i64);
        let mut stack: Vec<DyadicCube> = Vec::new();
        for iy in (ny0..ny1).rev() {
            for ix in (nx0..nx1).rev() {
                stack.push(DyadicCube::new(0, ix, iy, root));
            }
        }
        let mut out = Vec::new();
        while let Some(c) = stack.pop() {
            if let RectClass::Straddles = self.domain.classify_rect(&c.rect()) {
                if c.level < self.max_level {
                    stack.extend(c.children().iter().rev().copied());
                } else {
                    out.push(c);
                }
            }
        }
        out
    }

    fn first_ratio_violation(&self) -> Option<(usize, usize)> {
        for (i, nb) in self.adjacency.iter().enumerate() {
            for &j in nb {
                if i < j && self.cubes[i].level.abs_diff(self.cubes[j].level) > 1 {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Same cover with cube `i` removed.
    pub fn without_cube(&self, i: usize) -> WhitneyCover {
        let mut cubes = self.cubes.clone();
        let mut frontier = self.frontier.clone();
        cubes.remove(i);
        frontier.remove(i);
        WhitneyCover::from_cubes(
            self.domain.clone(),
            self.side,
            self.c_w,
            self.root_scale,
            self.max_level,
            self.region,
            cubes,
            frontier,
            self.uncovered,
        )
    }

    /// Same cover with cube `i` and its siblings replaced by their parent.
    /// Siblings absent from the cover (covered by other cubes) are dropped
    /// along with any cube inside the parent.
    pub fn with_merged_parent(&self, i: usize) -> Option<WhitneyCover> {
        let parent = self.cubes[i].parent()?;
        let mut cubes = Vec::new();
        let mut frontier = Vec::new();
        for (c, &f) in self.cubes.iter().zip(&self.frontier) {
            if !c.is_within(&parent) {
                cubes.push(*c);
                frontier.push(f);
            }
        }
        cubes.push(parent);
        frontier.push(false);
        Some(WhitneyCover::from_cubes(
            self.domain.clone(),
            self.side,
            self.c_w,
            self.root_scale,
            self.max_level,
            self.region,
            cubes,
            frontier,
            self.uncovered,
        ))
    }

    /// Cubes whose closure lies within closed distance `r` of `c` (in the sup
    /// sense, scanning the index cell by cell), used for local searches.
    pub(crate) fn cubes_near(&self, c: &Rect, r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        let mut bits = self.levels_present;
        while bits != 0 {
            let level = bits.trailing_zeros() as u8;
            bits &= bits - 1;
            let h = side_at(self.root_scale, level);
            let x0 = ((c.x0 - r) / h).floor() as i64 - 1;
            let x1 = ((c.x1 + r) / h).ceil() as i64 + 1;
            let y0 = ((c.y0 - r) / h).floor() as i64 - 1;
            let y1 = ((c.y1 + r) / h).ceil() as i64 + 1;
            let span = ((x1 - x0) as u128) * ((y1 - y0) as u128);
            if span as usize > 4 * self.cubes.len() + 16 {
                // Window larger than the cover: filter all cubes of this level.
                for (j, q) in self.cubes.iter().enumerate() {
                    if q.level == level && q.rect().dist_to_rect(c) <= r {
                        out.push(j);
                    }
                }
                continue;
            }
            for iy in y0..y1 {
                for ix in x0..x1 {
                    if let Some(j) = self.find(level, ix, iy) {
                        if self.cubes[j].rect().dist_to_rect(c) <= r {
                            out.push(j);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub(crate) fn levels_mask(&self) -> u64 {
        self.levels_present
    }
}

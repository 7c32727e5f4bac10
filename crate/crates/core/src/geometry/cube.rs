use super::point::{Point, Rect};
use crate::math::Float;

/// Open dyadic square `(ix, ix+1) x (iy, iy+1)` scaled by `root_scale * 2^-level`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DyadicCube {
    pub level: u8,
    pub ix: i64,
    pub iy: i64,
    pub root_scale: f64,
}

impl DyadicCube {
    pub fn new(level: u8, ix: i64, iy: i64, root_scale: f64) -> Self {
        DyadicCube { level, ix, iy, root_scale }
    }

    /// Side length.
    pub fn side(&self) -> f64 {
        side_at(self.root_scale, self.level)
    }

    pub fn key(&self) -> (u8, i64, i64) {
        (self.level, self.ix, self.iy)
    }

    pub fn rect(&self) -> Rect {
        let h = self.side();
        Rect::new(self.ix as f64 * h, self.iy as f64 * h, (self.ix + 1) as f64 * h, (self.iy + 1) as f64 * h)
    }

    pub fn center(&self) -> Point {
        let h = self.side();
        Point::new((self.ix as f64 + 0.5) * h, (self.iy as f64 + 0.5) * h)
    }

    pub fn parent(&self) -> Option<DyadicCube> {
        if self.level == 0 {
            return None;
        }
        Some(DyadicCube::new(self.level - 1, self.ix.div_euclid(2), self.iy.div_euclid(2), self.root_scale))
    }

    /// Ancestor at `level <= self.level`.
    pub fn ancestor(&self, level: u8) -> DyadicCube {
        let k = self.level - level;
        DyadicCube::new(level, self.ix >> k, self.iy >> k, self.root_scale)
    }

    pub fn children(&self) -> [DyadicCube; 4] {
        let (l, x, y, r) = (self.level + 1, 2 * self.ix, 2 * self.iy, self.root_scale);
        [DyadicCube::new(l, x, y, r), DyadicCube::new(l, x + 1, y, r), DyadicCube::new(l, x, y + 1, r), DyadicCube::new(l, x + 1, y + 1, r)]
    }

    /// True when `self` is `other` or one of its descendants.
    pub fn is_within(&self, other: &DyadicCube) -> bool {
        self.level >= other.level && self.ancestor(other.level).key() == other.key()
    }

    /// Closures intersect (edge or corner contact, or overlap).
    pub fn touches(&self, other: &DyadicCube) -> bool {
        self.rect().dist_to_rect(&other.rect()) == 0.0
    }
}

pub(crate) fn side_at(root_scale: f64, level: u8) -> f64 {
    root_scale * (0.5).powi(level as i32)
}

/// `D(Q,S) = l(Q) + dist(Q,S) + l(S)`.
pub fn long_distance(q: &DyadicCube, s: &DyadicCube) -> f64 {
    q.side() + q.rect().dist_to_rect(&s.rect()) + s.side()
}

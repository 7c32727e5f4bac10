use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{chains_for_pairs, ChainMetric};
use crate::geometry::{Rect, WhitneyCover};
use crate::math::pow_nonneg;
use crate::{par, Error};

/// For every cube `P`, the cubes contained in the ball `B(x_P, rho l(P))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowIndex {
    rho: f64,
    offsets: Vec<usize>,
    members: Vec<u32>,
}

impl ShadowIndex {
    pub fn build(cover: &WhitneyCover, rho: f64) -> Result<ShadowIndex, Error> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!("shadow ratio must be positive, got {rho}")));
        }
        let lists: Vec<Vec<u32>> = par::map_range(cover.len(), |p| {
            let pc = cover.cube(p);
            let x = pc.center();
            let r = rho * pc.side();
            let ball_box = Rect::new(x.x - r, x.y - r, x.x + r, x.y + r);
            cover.cubes_near(&ball_box, 0.0).into_iter().filter(|&q| cover.cube(q).rect().farthest_from(x) <= r).map(|q| q as u32).collect()
        });
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        let mut members = Vec::new();
        offsets.push(0);
        for l in lists {
            members.extend_from_slice(&l);
            offsets.push(members.len());
        }
        Ok(ShadowIndex { rho, offsets, members })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sorted member list of `SH_rho(P)`.
    pub fn members(&self, p: usize) -> &[u32] {
        &self.members[self.offsets[p]..self.offsets[p + 1]]
    }

    pub fn contains(&self, p: usize, q: usize) -> bool {
        self.members(p).binary_search(&(q as u32)).is_ok()
    }

    /// Total number of (P, Q) memberships.
    pub fn total_members(&self) -> usize {
        self.members.len()
    }
}

/// Cubes of the shadow of `p`.
pub fn shadow(index: &ShadowIndex, p: usize) -> Vec<usize> {
    index.members(p).iter().map(|&q| q as usize).collect()
}

/// Maxima of the geometric-sum ratios over the cover.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RemarkSums {
    pub s: f64,
    /// `max_Q l(Q)^s * sum_{L : Q in SH(L)} l(L)^-s`.
    pub ascending: f64,
    /// `max sum_{L in [Q,P]} l(L)^s / l(P)^s` over sampled `Q in SH(P)`.
    pub path_up: f64,
    /// `max l(Q)^s * sum_{L in [Q,P]} l(L)^-s` over the same chains.
    pub path_down: f64,
    pub chains_sampled: usize,
}

/// Evaluates the shadow sums on every cube and the chain sums on up to
/// `n_chains` seeded pairs `(Q, P)` with `Q in SH(P)`.
pub fn check_remark_sums(
    cover: &WhitneyCover,
    index: &ShadowIndex,
    s: f64,
    n_chains: usize,
    seed: u64,
    metric: ChainMetric,
) -> Result<RemarkSums, Error> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("s must lie in (0,1), got {s}")));
    }
    let n = cover.len();
    let mut inverse = vec![0.0_f64; n];
    for p in 0..n {
        let w = pow_nonneg(cover.cube(p).side(), -s);
        for &q in index.members(p) {
            inverse[q as usize] += w;
        }
    }
    let mut ascending = 0.0_f64;
    for (q, inv) in inverse.iter().enumerate() {
        ascending = ascending.max(inv * pow_nonneg(cover.cube(q).side(), s));
    }

    let total = index.total_members();
    let mut pairs = Vec::new();
    if total > 0 {
        if total <= n_chains {
            for p in 0..n {
                for &q in index.members(p) {
                    pairs.push((q as usize, p));
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..n_chains {
                let k = rng.gen_range(0..total);
                let p = index.offsets.partition_point(|&o| o <= k) - 1;
                pairs.push((index.members[k] as usize, p));
            }
        }
    }
    let chains = chains_for_pairs(cover, &pairs, metric)?;
    let mut path_up = 0.0_f64;
    let mut path_down = 0.0_f64;
    for (&(q, p), ch) in pairs.iter().zip(&chains) {
        let lp = cover.cube(p).side();
        let lq = cover.cube(q).side();
        let mut up = 0.0;
        let mut down = 0.0;
        for &l in &ch.cubes {
            let ll = cover.cube(l).side();
            up += pow_nonneg(ll / lp, s);
            down += pow_nonneg(lq / ll, s);
        }
        path_up = path_up.max(up);
        path_down = path_down.max(down);
    }
    Ok(RemarkSums { s, ascending, path_up, path_down, chains_sampled: pairs.len() })
}

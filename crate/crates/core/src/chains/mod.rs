//! Admissible chains between Whitney cubes, uniformity certificates and
//! shadows.

mod shadow;

pub use shadow::{check_remark_sums, shadow, RemarkSums, ShadowIndex};

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{long_distance, WhitneyCover};
use crate::{par, Error};

/// Shadow ratios tried by [`certify_uniform`], smallest first.
pub const RHO_GRID: [f64; 8] = [1.5, 2.0, 3.0, 5.0, 8.0, 13.0, 21.0, 34.0];

/// Covers with at most this many cubes are certified on all pairs.
pub const ALL_PAIRS_LIMIT: usize = 200;

/// A neighbor path of cubes `Q_1 = Q, ..., Q_M = S`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Chain {
    pub cubes: Vec<usize>,
    /// Position of the central cube in `cubes`.
    pub central_index: usize,
    pub achieved_eps: f64,
    /// Sum of side lengths.
    pub length: f64,
}

impl Chain {
    /// Builds a chain from a cube path. The central cube is a largest cube
    /// of the path; among several of the same size, the one giving the best
    /// admissibility (then the earliest) is taken.
    pub fn from_path(cover: &WhitneyCover, cubes: Vec<usize>) -> Chain {
        assert!(!cubes.is_empty());
        let biggest = cubes.iter().map(|&c| cover.cube(c).level).min().unwrap();
        let mut central = usize::MAX;
        let mut achieved_eps = f64::NEG_INFINITY;
        for (j, &c) in cubes.iter().enumerate() {
            if cover.cube(c).level != biggest {
                continue;
            }
            let e = admissibility(cover, &cubes, j);
            if e > achieved_eps {
                achieved_eps = e;
                central = j;
            }
        }
        let length = cubes.iter().map(|&c| cover.cube(c).side()).sum();
        Chain { cubes, central_index: central, achieved_eps, length }
    }

    pub fn first(&self) -> usize {
        self.cubes[0]
    }

    pub fn last(&self) -> usize {
        *self.cubes.last().unwrap()
    }

    pub fn central(&self) -> usize {
        self.cubes[self.central_index]
    }
}

/// Largest `eps` for which `cubes` with central position `j0` is
/// eps-admissible: the minimum of `D(Q,S)/l([Q,S])`, `l(Q_j)/D(Q_1,Q_j)` for
/// `j <= j0` and `l(Q_j)/D(Q_j,Q_M)` for `j >= j0`.
pub fn admissibility(cover: &WhitneyCover, cubes: &[usize], j0: usize) -> f64 {
    let first = cover.cube(cubes[0]);
    let last = cover.cube(*cubes.last().unwrap());
    let length: f64 = cubes.iter().map(|&c| cover.cube(c).side()).sum();
    let mut eps = long_distance(first, last) / length;
    for (j, &c) in cubes.iter().enumerate() {
        let q = cover.cube(c);
        if j <= j0 {
            eps = eps.min(q.side() / long_distance(first, q));
        }
        if j >= j0 {
            eps = eps.min(q.side() / long_distance(q, last));
        }
    }
    eps
}

/// Path cost minimized by [`find_chain`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ChainMetric {
    /// Total side length `sum l(Q_j)`.
    Length,
    /// Number of cubes first, total side length to break ties.
    #[default]
    HopsThenLength,
    /// Number of cubes first; among those, the largest total side length.
    HopsThenBigger,
}

#[derive(Clone, Copy, PartialEq)]
struct Cost {
    hops: u32,
    len: f64,
}

impl Cost {
    fn cmp_with(&self, o: &Cost, metric: ChainMetric) -> Ordering {
        match metric {
            ChainMetric::Length => self.len.total_cmp(&o.len),
            ChainMetric::HopsThenLength => self.hops.cmp(&o.hops).then(self.len.total_cmp(&o.len)),
            ChainMetric::HopsThenBigger => self.hops.cmp(&o.hops).then(o.len.total_cmp(&self.len)),
        }
    }
}

struct HeapItem {
    cost: Cost,
    node: usize,
    metric: ChainMetric,
}

impl PartialEq for HeapItem {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for HeapItem {
    // Reversed: BinaryHeap is a max-heap and we pop the cheapest, lowest index.
    fn cmp(&self, o: &Self) -> Ordering {
        o.cost.cmp_with(&self.cost, self.metric).then(o.node.cmp(&self.node))
    }
}

/// Shortest-path tree from one source cube with node weights `l(Q)`.
pub struct PathTree {
    source: usize,
    pred: Vec<usize>,
}

const NONE: usize = usize::MAX;

impl PathTree {
    pub fn new(cover: &WhitneyCover, source: usize, metric: ChainMetric) -> PathTree {
        let n = cover.len();
        let mut best: Vec<Option<Cost>> = vec![None; n];
        let mut pred = vec![NONE; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        let c0 = Cost { hops: 1, len: cover.cube(source).side() };
        best[source] = Some(c0);
        pred[source] = source;
        heap.push(HeapItem { cost: c0, node: source, metric });
        while let Some(HeapItem { cost, node, .. }) = heap.pop() {
            if done[node] {
                continue;
            }
            done[node] = true;
            for &nb in cover.neighbors(node) {
                if done[nb] {
                    continue;
                }
                let cand = Cost { hops: cost.hops + 1, len: cost.len + cover.cube(nb).side() };
                let better = match best[nb] {
                    None => true,
                    Some(b) => match cand.cmp_with(&b, metric) {
                        Ordering::Less => true,
                        // Deterministic tie-break: the lower predecessor index wins.
                        Ordering::Equal => node < pred[nb],
                        Ordering::Greater => false,
                    },
                };
                if better {
                    best[nb] = Some(cand);
                    pred[nb] = node;
                    heap.push(HeapItem { cost: cand, node: nb, metric });
                }
            }
        }
        PathTree { source, pred }
    }

    /// Cube path from the source to `target`, if reachable.
    pub fn path_to(&self, target: usize) -> Option<Vec<usize>> {
        if self.pred[target] == NONE {
            return None;
        }
        let mut path = vec![target];
        let mut at = target;
        while at != self.source {
            at = self.pred[at];
            path.push(at);
        }
        path.reverse();
        Some(path)
    }
}

/// Chain from `q` to `s` minimizing `metric` over the adjacency graph.
pub fn find_chain(cover: &WhitneyCover, q: usize, s: usize, metric: ChainMetric) -> Result<Chain, Error> {
    if q >= cover.len() || s >= cover.len() {
        return Err(Error::InvalidParameter(alloc::format!("cube index out of range ({q}, {s})")));
    }
    let tree = PathTree::new(cover, q, metric);
    let path = tree.path_to(s).ok_or(Error::Disconnected { a: q, b: s })?;
    Ok(Chain::from_path(cover, path))
}

/// Knobs for [`certify_uniform`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CertifyOptions {
    pub metric: ChainMetric,
    /// Allowed factor between `diam(boundary ∩ closed shadow of P)` and `l(P)`.
    /// `None` scales the factor with the Whitney constant as `10 c_w`.
    pub comparability: Option<f64>,
}

/// Evidence that the cover's domain is uniform: the worst admissibility over
/// sampled pairs and a shadow ratio that works on every sampled chain.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpsCertificate {
    pub eps: f64,
    pub pairs_tested: usize,
    pub worst_pair: (usize, usize),
    pub rho_eps: f64,
    pub seed: u64,
    pub comparability: f64,
    pub metric: ChainMetric,
}

/// Sampled unordered pairs of distinct cubes (or every pair on small covers),
/// grouped by first cube.
pub fn sample_pairs(n: usize, n_pairs: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    if n <= 1 {
        if n == 1 {
            pairs.push((0, 0));
        }
        return pairs;
    }
    if n <= ALL_PAIRS_LIMIT {
        for a in 0..n {
            for b in a + 1..n {
                pairs.push((a, b));
            }
        }
        return pairs;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while pairs.len() < n_pairs {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            pairs.push((a.min(b), a.max(b)));
        }
    }
    pairs
}

/// Smallest shadow ratios for which the chain satisfies the chain-related
/// shadow properties: every cube up to the central one has `Q` in its
/// shadow, and every chain cube lies in the shadow of the central cube.
pub fn chain_rho_requirements(cover: &WhitneyCover, chain: &Chain) -> (f64, f64) {
    let q = cover.cube(chain.first()).rect();
    let mut need_first = 0.0_f64;
    for &p in &chain.cubes[..=chain.central_index] {
        let pc = cover.cube(p);
        need_first = need_first.max(q.farthest_from(pc.center()) / pc.side());
    }
    let central = cover.cube(chain.central());
    let mut need_central = 0.0_f64;
    for &p in &chain.cubes {
        need_central = need_central.max(cover.cube(p).rect().farthest_from(central.center()) / central.side());
    }
    (need_first, need_central)
}

/// `diam(boundary ∩ closed ball(x_P, rho l(P))) / l(P)`.
///
/// The closed shadow of `P` meets the boundary in the limit of the untruncated
/// cover exactly where the ball does, since arbitrarily small Whitney cubes
/// accumulate at every boundary point inside the ball.
pub fn boundary_diameter_ratio(cover: &WhitneyCover, p: usize, rho: f64) -> f64 {
    let c = cover.cube(p);
    cover.domain().boundary_diameter_in_disk(c.center(), rho * c.side()) / c.side()
}

/// Worst admissibility over sampled pairs, before any shadow ratio is fixed.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpsEstimate {
    pub eps: f64,
    pub pairs_tested: usize,
    pub worst_pair: (usize, usize),
    pub seed: u64,
    /// Smallest shadow ratio the sampled chains need for the two chain
    /// properties (before rounding up to the grid).
    pub rho_needed: f64,
    /// Pair whose chain needs `rho_needed`.
    pub rho_pair: (usize, usize),
}

/// Chains for `n_pairs` sampled pairs and their worst admissibility.
pub fn estimate_eps(cover: &WhitneyCover, n_pairs: usize, seed: u64, metric: ChainMetric) -> Result<(EpsEstimate, Vec<Chain>), Error> {
    if n_pairs == 0 {
        return Err(Error::InvalidParameter("n_pairs must be at least 1".into()));
    }
    if cover.is_empty() {
        return Err(Error::InvalidParameter("empty cover".into()));
    }
    let pairs = sample_pairs(cover.len(), n_pairs, seed);
    let chains = chains_for_pairs(cover, &pairs, metric)?;
    let mut eps = f64::INFINITY;
    let mut worst_pair = pairs[0];
    let mut rho_needed = 0.0_f64;
    let mut rho_pair = pairs[0];
    for (pair, ch) in pairs.iter().zip(&chains) {
        if ch.achieved_eps < eps {
            eps = ch.achieved_eps;
            worst_pair = *pair;
        }
        let (a, b) = chain_rho_requirements(cover, ch);
        if a.max(b) > rho_needed {
            rho_needed = a.max(b);
            rho_pair = *pair;
        }
    }
    Ok((EpsEstimate { eps, pairs_tested: pairs.len(), worst_pair, seed, rho_needed, rho_pair }, chains))
}

/// Certifies uniformity on `n_pairs` sampled cube pairs.
pub fn certify_uniform(cover: &WhitneyCover, n_pairs: usize, seed: u64) -> Result<EpsCertificate, Error> {
    certify_uniform_with(cover, n_pairs, seed, CertifyOptions::default())
}

pub fn certify_uniform_with(cover: &WhitneyCover, n_pairs: usize, seed: u64, opts: CertifyOptions) -> Result<EpsCertificate, Error> {
    let comparability = opts.comparability.unwrap_or(10.0 * cover.c_w());
    let (est, chains) = estimate_eps(cover, n_pairs, seed, opts.metric)?;
    let mut members: Vec<usize> = chains.iter().flat_map(|c| c.cubes.iter().copied()).collect();
    members.sort_unstable();
    members.dedup();

    for &rho in RHO_GRID.iter() {
        if rho < est.rho_needed {
            continue;
        }
        let ok = members.iter().all(|&p| {
            let r = boundary_diameter_ratio(cover, p, rho);
            r >= 1.0 / comparability && r <= comparability
        });
        if ok {
            return Ok(EpsCertificate {
                eps: est.eps,
                pairs_tested: est.pairs_tested,
                worst_pair: est.worst_pair,
                rho_eps: rho,
                seed,
                comparability,
                metric: opts.metric,
            });
        }
    }
    let (q, s) = est.rho_pair;
    Err(Error::NoShadowRatio { q, s })
}

/// Chains for a list of pairs, one shortest-path tree per distinct first cube.
pub fn chains_for_pairs(cover: &WhitneyCover, pairs: &[(usize, usize)], metric: ChainMetric) -> Result<Vec<Chain>, Error> {
    let mut sources: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    sources.sort_unstable();
    sources.dedup();
    let per_source: Vec<Vec<(usize, Result<Chain, Error>)>> = par::map_range(sources.len(), |k| {
        let src = sources[k];
        let tree = PathTree::new(cover, src, metric);
        pairs
            .iter()
            .enumerate()
            .filter(|(_, p)| p.0 == src)
            .map(|(i, p)| {
                let res = tree.path_to(p.1).map(|path| Chain::from_path(cover, path)).ok_or(Error::Disconnected { a: p.0, b: p.1 });
                (i, res)
            })
            .collect()
    });
    let mut out: Vec<Option<Chain>> = vec![None; pairs.len()];
    for group in per_source {
        for (i, res) in group {
            out[i] = Some(res?);
        }
    }
    Ok(out.into_iter().map(|c| c.expect("every pair has a source tree")).collect())
}

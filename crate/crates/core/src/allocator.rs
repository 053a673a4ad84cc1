//! Greedy, priority-guided land-use assignment.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use geo::{Area, BooleanOps, Coord, LineString, MinimumRotatedRect, MultiPolygon, Polygon};
use serde::{Deserialize, Serialize};

use crate::basins::{eligible_clusters, ClusterHierarchy};
use crate::blockmap::{AccessibilityTensor, Block};
use crate::error::{Error, Result};
use crate::landuse::{LandUse, PriorityOrder, UseMap};
use crate::tier::Tier;

/// Areas below this (m²) count as zero.
pub const AREA_EPS: f64 = 1e-9;

/// `LevelPct(ℓ) = w_ℓ / Σ w_k` over the active tiers.
pub fn level_pct(tiers: &[Tier], rank_overrides: Option<&[f64]>) -> Result<Vec<f64>> {
    if tiers.is_empty() {
        return Err(Error::EmptyTiers);
    }
    let weights: Vec<f64> = match rank_overrides {
        Some(w) if w.len() != tiers.len() => {
            return Err(Error::DimensionMismatch { what: "tier ranks", expected: tiers.len(), actual: w.len() })
        }
        Some(w) => w.to_vec(),
        None => tiers.iter().map(|t| t.rank_weight()).collect(),
    };
    if let Some(&bad) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return Err(Error::OutOfRange { name: "tier rank".into(), value: bad });
    }
    let total: f64 = weights.iter().sum();
    Ok(weights.iter().map(|w| w / total).collect())
}

/// How achieved shares are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Accounting {
    /// Sum of assigned areas per use.
    #[default]
    Mixed,
    /// Whole lot area credited to the block's dominant use.
    Dominant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationConfig {
    pub target_shares: UseMap<f64>,
    pub priority: PriorityOrder,
    /// Active tiers, coarse to fine, aligned with tensor columns.
    pub tiers: Vec<Tier>,
    pub rank_overrides: Option<Vec<f64>>,
    /// `m_ℓ` per active tier.
    pub min_parcel: Vec<f64>,
    pub tau_int: f64,
}

impl AllocationConfig {
    pub fn new(target_shares: UseMap<f64>, priority: PriorityOrder, tiers: Vec<Tier>) -> Self {
        let min_parcel = tiers.iter().map(|t| t.default_min_parcel()).collect();
        AllocationConfig {
            target_shares,
            priority,
            tiers,
            rank_overrides: None,
            min_parcel,
            tau_int: crate::basins::DEFAULT_TAU_INT,
        }
    }
}

/// One heap pop that placed area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grant {
    pub tier: usize,
    pub cluster: usize,
    #[serde(rename = "use")]
    pub land_use: LandUse,
    pub block: usize,
    pub amount: f64,
    /// Took the whole remainder to avoid a sub-minimum leftover.
    pub forced: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationResult {
    /// `x_{i,u}` in m².
    pub x: Vec<UseMap<f64>>,
    pub dominant: Vec<LandUse>,
    pub lot_area: Vec<f64>,
    pub grants: Vec<Grant>,
    /// Pool area per use that no tier could place; it ended up residential.
    pub lapsed: UseMap<f64>,
}

impl AllocationResult {
    pub fn total_area(&self) -> f64 {
        self.lot_area.iter().sum()
    }

    pub fn area_by_use(&self) -> UseMap<f64> {
        let mut out = UseMap([0.0; 8]);
        for row in &self.x {
            for (u, v) in row.iter() {
                out[u] += v;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key {
    score: f64,
    block: usize,
}

// Max-heap on score; among equal scores the lower block index pops first.
impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score.total_cmp(&other.score).then(other.block.cmp(&self.block))
    }
}
impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Eq for Key {}

enum Queue {
    MaxFirst(BinaryHeap<Key>),
    MinFirst(BinaryHeap<Reverse<MinKey>>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct MinKey(Key);

// Reverse of this pops the lowest score, lower block index first.
impl Ord for MinKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.score.total_cmp(&other.0.score).then(self.0.block.cmp(&other.0.block))
    }
}
impl PartialOrd for MinKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Eq for MinKey {}

impl Queue {
    fn new(min_first: bool, keys: impl Iterator<Item = Key>) -> Self {
        if min_first {
            Queue::MinFirst(keys.map(|k| Reverse(MinKey(k))).collect())
        } else {
            Queue::MaxFirst(keys.collect())
        }
    }

    fn pop(&mut self) -> Option<usize> {
        match self {
            Queue::MaxFirst(h) => h.pop().map(|k| k.block),
            Queue::MinFirst(h) => h.pop().map(|Reverse(MinKey(k))| k.block),
        }
    }
}

fn validate(
    blocks: &[Block],
    tensor: &AccessibilityTensor,
    hierarchy: &ClusterHierarchy,
    cfg: &AllocationConfig,
) -> Result<()> {
    if blocks.is_empty() {
        return Err(Error::Infeasible("no blocks".into()));
    }
    let l = cfg.tiers.len();
    if l == 0 {
        return Err(Error::EmptyTiers);
    }
    for (what, actual) in [
        ("tensor tiers", tensor.tier_count),
        ("cluster tiers", hierarchy.tiers.len()),
        ("min parcel sizes", cfg.min_parcel.len()),
    ] {
        if actual != l {
            return Err(Error::DimensionMismatch { what, expected: l, actual });
        }
    }
    if tensor.block_count() != blocks.len() {
        return Err(Error::DimensionMismatch {
            what: "tensor rows",
            expected: blocks.len(),
            actual: tensor.block_count(),
        });
    }
    for (_, s) in cfg.target_shares.iter() {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::OutOfRange { name: "target share".into(), value: s });
        }
    }
    let sum = cfg.target_shares.sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(Error::OutOfRange { name: "target share sum".into(), value: sum });
    }
    if let Some(&m) = cfg.min_parcel.iter().find(|m| !(**m >= 0.0)) {
        return Err(Error::OutOfRange { name: "min parcel".into(), value: m });
    }
    Ok(())
}

/// Runs the tier-by-tier greedy assignment. Whatever no tier places ends up
/// residential, so every block is fully assigned on return.
pub fn allocate(
    blocks: &[Block],
    tensor: &AccessibilityTensor,
    hierarchy: &ClusterHierarchy,
    cfg: &AllocationConfig,
) -> Result<AllocationResult> {
    validate(blocks, tensor, hierarchy, cfg)?;
    let lot_area: Vec<f64> = blocks.iter().map(|b| b.lot_area).collect();
    let total: f64 = lot_area.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroArea);
    }
    let pct = level_pct(&cfg.tiers, cfg.rank_overrides.as_deref())?;
    let s = &cfg.target_shares;

    let mut remaining = lot_area.clone();
    let mut x = vec![UseMap([0.0; 8]); blocks.len()];
    let mut grants = Vec::new();
    let mut carry = UseMap([0.0; 8]);

    for (tier, &level) in pct.iter().enumerate() {
        let mut need = carry;
        for &u in &LandUse::GOOD {
            need[u] += s[u] * level * total;
        }
        if tier == 0 {
            for &u in &LandUse::BAD {
                need[u] += s[u] * total;
            }
        }
        carry = UseMap([0.0; 8]);

        let tc = hierarchy.tier(tier);
        let eligible = eligible_clusters(hierarchy, tier, &remaining, &lot_area, cfg.tau_int)?;
        let cluster_area: Vec<f64> = tc.clusters.iter().map(|c| c.members.iter().map(|&i| lot_area[i]).sum()).collect();
        let eligible_area: f64 = eligible.iter().map(|&c| cluster_area[c]).sum();
        let m = cfg.min_parcel[tier];

        for &u in cfg.priority.uses() {
            if u.is_residential() || need[u] <= AREA_EPS {
                continue;
            }
            if eligible.is_empty() {
                carry[u] += need[u];
                continue;
            }
            for &c in &eligible {
                let mut target = need[u] * cluster_area[c] / eligible_area;
                let keys = tc.clusters[c]
                    .members
                    .iter()
                    .filter(|&&i| remaining[i] > AREA_EPS)
                    .map(|&i| Key { score: tensor.get(i, tier), block: i });
                let mut queue = Queue::new(u.is_bad(), keys);
                while target > AREA_EPS {
                    let Some(i) = queue.pop() else { break };
                    let r = remaining[i];
                    let mut g = r.min(target);
                    let forced = r - g < m && r >= m && g < r;
                    if forced {
                        g = r;
                    }
                    x[i][u] += g;
                    remaining[i] = if forced || r - g <= AREA_EPS { 0.0 } else { r - g };
                    target = (target - g).max(0.0);
                    grants.push(Grant { tier, cluster: c, land_use: u, block: i, amount: g, forced });
                }
                carry[u] += target;
            }
        }
    }

    for (i, r) in remaining.iter_mut().enumerate() {
        x[i][LandUse::R] += *r;
        *r = 0.0;
    }
    let dominant = x.iter().map(|row| dominant_use(row, &cfg.priority)).collect();
    Ok(AllocationResult { x, dominant, lot_area, grants, lapsed: carry })
}

/// `argmax_u x_u`, ties to the earlier use in `priority`.
pub fn dominant_use(row: &UseMap<f64>, priority: &PriorityOrder) -> LandUse {
    let mut best = priority.uses()[0];
    for &u in priority.uses() {
        if row[u] > row[best] {
            best = u;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShareReport {
    pub achieved: UseMap<f64>,
    pub d_lu: f64,
    pub mae: f64,
    pub rmse: f64,
}

/// `D_LU = Σ (ŝ_u − s*_u)²`, with MAE and RMSE over all eight uses.
pub fn share_deviation(achieved: &UseMap<f64>, target: &UseMap<f64>) -> ShareReport {
    let diffs: Vec<f64> = LandUse::ALL.iter().map(|&u| achieved[u] - target[u]).collect();
    let n = diffs.len() as f64;
    let d_lu: f64 = diffs.iter().map(|d| d * d).sum();
    ShareReport {
        achieved: *achieved,
        d_lu,
        mae: diffs.iter().map(|d| d.abs()).sum::<f64>() / n,
        rmse: (d_lu / n).sqrt(),
    }
}

pub fn achieved_shares(result: &AllocationResult, target: &UseMap<f64>, accounting: Accounting) -> ShareReport {
    let total = result.total_area();
    let mut area = UseMap([0.0; 8]);
    match accounting {
        Accounting::Mixed => area = result.area_by_use(),
        Accounting::Dominant => {
            for (i, &u) in result.dominant.iter().enumerate() {
                area[u] += result.lot_area[i];
            }
        }
    }
    let achieved = UseMap(area.0.map(|a| a / total));
    share_deviation(&achieved, target)
}

/// Ratios below this are merged into the preceding strip.
pub const MIN_SPLIT_RATIO: f64 = 1e-6;

/// Cuts `polygon` into strips across the major axis of its minimum rotated
/// rectangle, strip `k` holding `ratios[k]` of the area. Merged ratios get an
/// empty geometry so the output stays aligned with the input.
pub fn split_geometry(polygon: &Polygon<f64>, ratios: &[f64]) -> Result<Vec<MultiPolygon<f64>>> {
    if ratios.is_empty() {
        return Err(Error::InvalidConfig("no split ratios".into()));
    }
    if let Some(&bad) = ratios.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::OutOfRange { name: "split ratio".into(), value: bad });
    }
    let sum: f64 = ratios.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(Error::OutOfRange { name: "split ratio sum".into(), value: sum });
    }
    let whole = MultiPolygon(vec![polygon.clone()]);
    let kept: Vec<usize> = (0..ratios.len()).filter(|&k| ratios[k] >= MIN_SPLIT_RATIO).collect();
    if kept.len() <= 1 {
        let keep = kept.first().copied().unwrap_or(0);
        return Ok((0..ratios.len()).map(|k| if k == keep { whole.clone() } else { MultiPolygon(vec![]) }).collect());
    }

    let rect = polygon
        .minimum_rotated_rect()
        .ok_or_else(|| Error::InvalidBlock { id: String::new(), reason: "degenerate polygon".into() })?;
    let rc = &rect.exterior().0;
    let (e0, e1) = (sub(rc[1], rc[0]), sub(rc[2], rc[1]));
    let major = if norm(e0) >= norm(e1) { e0 } else { e1 };
    let len = norm(major);
    let axis = Coord { x: major.x / len, y: major.y / len };
    let perp = Coord { x: -axis.y, y: axis.x };

    let proj = |c: Coord<f64>| (c.x * axis.x + c.y * axis.y, c.x * perp.x + c.y * perp.y);
    let (mut tmin, mut tmax, mut smin, mut smax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &c in &polygon.exterior().0 {
        let (t, s) = proj(c);
        tmin = tmin.min(t);
        tmax = tmax.max(t);
        smin = smin.min(s);
        smax = smax.max(s);
    }
    let pad = (tmax - tmin + smax - smin).max(1.0);
    let band = |lo: f64, hi: f64| -> Polygon<f64> {
        let at = |t: f64, s: f64| Coord { x: axis.x * t + perp.x * s, y: axis.y * t + perp.y * s };
        let (s0, s1) = (smin - pad, smax + pad);
        Polygon::new(LineString(vec![at(lo, s0), at(hi, s0), at(hi, s1), at(lo, s1), at(lo, s0)]), vec![])
    };
    let area = polygon.unsigned_area();
    let below = |t: f64| polygon.intersection(&band(tmin - pad, t)).unsigned_area();

    // Merged ratios fold into the previous kept strip (or the first one).
    let mut merged = vec![0.0; ratios.len()];
    let mut last = kept[0];
    for (k, &r) in ratios.iter().enumerate() {
        if r >= MIN_SPLIT_RATIO {
            last = k;
        } else {
            log::warn!("split ratio {r} below resolution, merged into neighbouring strip");
        }
        merged[last] += r;
    }

    let mut cuts = vec![tmin - pad];
    let mut cum = 0.0;
    for &k in &kept[..kept.len() - 1] {
        cum += merged[k];
        let goal = cum * area;
        let (mut lo, mut hi) = (tmin, tmax);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if below(mid) < goal {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        cuts.push(0.5 * (lo + hi));
    }
    cuts.push(tmax + pad);

    let mut out = vec![MultiPolygon(vec![]); ratios.len()];
    for (j, &k) in kept.iter().enumerate() {
        out[k] = polygon.intersection(&band(cuts[j], cuts[j + 1]));
    }
    Ok(out)
}

fn sub(a: Coord<f64>, b: Coord<f64>) -> Coord<f64> {
    Coord { x: a.x - b.x, y: a.y - b.y }
}

fn norm(c: Coord<f64>) -> f64 {
    c.x.hypot(c.y)
}

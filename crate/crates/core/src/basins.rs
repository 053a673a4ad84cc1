//! Peak-seeded service basins and the cluster integrity gate.

use std::collections::BTreeSet;

use geo::{Distance, Euclidean, Point};
use serde::{Deserialize, Serialize};

use crate::blockmap::{AccessibilityTensor, Block};
use crate::error::{Error, Result};

pub const DEFAULT_TAU_INT: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    /// Block index of the seed.
    pub center: usize,
    /// Member block indices, ascending. Always contains `center`.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierClusters {
    pub threshold: f64,
    pub clusters: Vec<Cluster>,
    /// `cluster_of[i]` is the index into `clusters` holding block `i`.
    pub cluster_of: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterHierarchy {
    pub tiers: Vec<TierClusters>,
}

impl ClusterHierarchy {
    pub fn tier(&self, tier: usize) -> &TierClusters {
        &self.tiers[tier]
    }
}

/// Greedy peak seeding: the best unassigned block (ties to the lower index)
/// becomes a center and absorbs every unassigned block whose centroid lies
/// within the tier threshold.
pub fn build_clusters(blocks: &[Block], tensor: &AccessibilityTensor, thresholds: &[f64]) -> Result<ClusterHierarchy> {
    if thresholds.len() != tensor.tier_count {
        return Err(Error::DimensionMismatch {
            what: "cluster thresholds",
            expected: tensor.tier_count,
            actual: thresholds.len(),
        });
    }
    if blocks.len() != tensor.block_count() {
        return Err(Error::DimensionMismatch {
            what: "tensor rows",
            expected: blocks.len(),
            actual: tensor.block_count(),
        });
    }
    if let Some(&bad) = thresholds.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(Error::OutOfRange { name: "cluster threshold".into(), value: bad });
    }
    let centroids: Vec<Point<f64>> = blocks.iter().map(|b| Point(b.centroid)).collect();
    let tier_ids: Vec<usize> = (0..thresholds.len()).collect();
    let tiers =
        crate::par::map_collect(&tier_ids, |&tier| seed_tier(&centroids, &tensor.column(tier), thresholds[tier]));
    Ok(ClusterHierarchy { tiers })
}

fn seed_tier(centroids: &[Point<f64>], scores: &[f64], threshold: f64) -> TierClusters {
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut cluster_of = vec![usize::MAX; n];
    let mut clusters = Vec::new();
    for &center in &order {
        if cluster_of[center] != usize::MAX {
            continue;
        }
        let id = clusters.len();
        let members: Vec<usize> = (0..n)
            .filter(|&j| {
                cluster_of[j] == usize::MAX && Euclidean.distance(centroids[center], centroids[j]) <= threshold
            })
            .collect();
        for &j in &members {
            cluster_of[j] = id;
        }
        clusters.push(Cluster { center, members });
    }
    TierClusters { threshold, clusters, cluster_of }
}

/// Clusters whose remaining area is at least `tau_int` of their lot area.
pub fn eligible_clusters(
    hierarchy: &ClusterHierarchy,
    tier: usize,
    remaining: &[f64],
    lot_area: &[f64],
    tau_int: f64,
) -> Result<BTreeSet<usize>> {
    if !(0.0..=1.0).contains(&tau_int) {
        return Err(Error::OutOfRange { name: "tau_int".into(), value: tau_int });
    }
    let tc = hierarchy.tiers.get(tier).ok_or_else(|| Error::UnknownTier(tier.to_string()))?;
    Ok(tc
        .clusters
        .iter()
        .enumerate()
        .filter(|(_, c)| {
            let rem: f64 = c.members.iter().map(|&i| remaining[i]).sum();
            let area: f64 = c.members.iter().map(|&i| lot_area[i]).sum();
            rem >= tau_int * area - 1e-9
        })
        .map(|(k, _)| k)
        .collect())
}

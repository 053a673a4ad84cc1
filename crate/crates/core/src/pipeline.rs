//! Site snapshot and the per-policy evaluation chain.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::allocator::{achieved_shares, allocate, Accounting, AllocationConfig, AllocationResult, ShareReport};
use crate::basins::{build_clusters, ClusterHierarchy, DEFAULT_TAU_INT};
use crate::blockmap::{
    associate_segments, block_accessibility, normalize_per_tier, AccessibilityTensor, Aggregation, Block,
    BlockAdjacency, DEFAULT_BUFFER,
};
use crate::error::{Error, Result};
use crate::intensity::{
    run_intensity, weighted_accessibility, FitMode, IntensityConfig, IntensityResult, DEFAULT_FAR_ANCHOR,
    DEFAULT_FOOTPRINT_RATIO, DEFAULT_STOREY_HEIGHT,
};
use crate::landuse::{default_construction_shares, UseMap};
use crate::netgraph::{
    build_segment_graph, compute_centrality, mix_scores, CentralityField, CentralityKind, MixCosts, SegmentGraph,
    SegmentScoreMix, StreetNetwork, DEFAULT_SNAP_TOLERANCE,
};
use crate::policy::{
    accessibility_utility, jobs_housing_penalty, normalize_objectives, ObjectiveRecord, Policy, RawObjectives,
    DEFAULT_JOBS_HOUSING_TARGET,
};

/// `B_total` per m² of lot area when no explicit total is configured.
pub const DEFAULT_B_TOTAL_PER_AREA: f64 = 2.4;

/// Everything about an evaluation that is not a policy decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub buffer: f64,
    pub snap_tolerance: f64,
    pub aggregation: Aggregation,
    pub mix_costs: MixCosts,
    /// Cluster radii `C_ℓ`; the policy radii when absent.
    pub thresholds: Option<Vec<f64>>,
    /// `m_ℓ`; tier defaults when absent.
    pub min_parcel: Option<Vec<f64>>,
    pub rank_overrides: Option<Vec<f64>>,
    pub tau_int: f64,
    pub accounting: Accounting,
    pub b_total: Option<f64>,
    pub construction_shares: UseMap<f64>,
    pub far_anchor: f64,
    pub footprint_ratio: f64,
    pub footprint_by_use: Option<UseMap<f64>>,
    pub storey_height: f64,
    pub fit: FitMode,
    pub r0: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            buffer: DEFAULT_BUFFER,
            snap_tolerance: DEFAULT_SNAP_TOLERANCE,
            aggregation: Aggregation::Max,
            mix_costs: MixCosts::default(),
            thresholds: None,
            min_parcel: None,
            rank_overrides: None,
            tau_int: DEFAULT_TAU_INT,
            accounting: Accounting::Mixed,
            b_total: None,
            construction_shares: default_construction_shares(),
            far_anchor: DEFAULT_FAR_ANCHOR,
            footprint_ratio: DEFAULT_FOOTPRINT_RATIO,
            footprint_by_use: None,
            storey_height: DEFAULT_STOREY_HEIGHT,
            fit: FitMode::PerUse,
            r0: DEFAULT_JOBS_HOUSING_TARGET,
        }
    }
}

/// Immutable inputs shared by every evaluation.
#[derive(Debug, Clone)]
pub struct Site {
    pub network: StreetNetwork,
    pub blocks: Vec<Block>,
    pub graph: SegmentGraph,
    pub adjacency: BlockAdjacency,
}

impl Site {
    pub fn new(network: StreetNetwork, blocks: Vec<Block>, buffer: f64, snap_tolerance: f64) -> Result<Self> {
        let graph = build_segment_graph(&network, snap_tolerance)?;
        let adjacency = associate_segments(&blocks, &network, buffer)?;
        Ok(Site { network, blocks, graph, adjacency })
    }

    pub fn total_area(&self) -> f64 {
        self.blocks.iter().map(|b| b.lot_area).sum()
    }
}

/// Raw centrality fields keyed by radius, so a batch computes each radius once.
#[derive(Debug, Default)]
pub struct FieldCache {
    costs: Option<MixCosts>,
    fields: HashMap<u64, (CentralityField, CentralityField)>,
}

impl FieldCache {
    pub fn build(site: &Site, radii: impl IntoIterator<Item = f64>, costs: MixCosts) -> Result<Self> {
        let mut uniq: Vec<f64> = radii.into_iter().collect();
        uniq.sort_by(f64::total_cmp);
        uniq.dedup();
        let computed = crate::par::map_collect(&uniq, |&r| -> Result<(u64, (CentralityField, CentralityField))> {
            let c = compute_centrality(&site.graph, CentralityKind::Choice, costs.choice, r)?;
            let i = compute_centrality(&site.graph, CentralityKind::Integration, costs.integration, r)?;
            Ok((r.to_bits(), (c, i)))
        });
        Ok(FieldCache { costs: Some(costs), fields: computed.into_iter().collect::<Result<_>>()? })
    }

    fn get(&self, radius: f64, costs: MixCosts) -> Option<&(CentralityField, CentralityField)> {
        (self.costs == Some(costs)).then(|| self.fields.get(&radius.to_bits())).flatten()
    }
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub policy: Policy,
    pub segment_scores: Vec<SegmentScoreMix>,
    /// Per-tier normalized block accessibility.
    pub tensor: AccessibilityTensor,
    pub hierarchy: ClusterHierarchy,
    pub allocation: AllocationResult,
    /// `Ã` per block.
    pub access: Vec<f64>,
    pub intensity: IntensityResult,
    pub shares: ShareReport,
    pub raw: RawObjectives,
}

/// Segment scores and the per-tier normalized block tensor.
pub fn site_access(
    site: &Site,
    policy: &Policy,
    cfg: &EvalConfig,
    cache: Option<&FieldCache>,
) -> Result<(Vec<SegmentScoreMix>, AccessibilityTensor)> {
    policy.validate()?;
    let mut segment_scores = Vec::with_capacity(policy.tiers.len());
    for (&r, &sigma) in policy.radii.iter().zip(&policy.sigma) {
        let mix = match cache.and_then(|c| c.get(r, cfg.mix_costs)) {
            Some((c, i)) => mix_scores(c, i, sigma)?,
            None => {
                let c = compute_centrality(&site.graph, CentralityKind::Choice, cfg.mix_costs.choice, r)?;
                let i = compute_centrality(&site.graph, CentralityKind::Integration, cfg.mix_costs.integration, r)?;
                mix_scores(&c, &i, sigma)?
            }
        };
        segment_scores.push(mix);
    }
    let raw = block_accessibility(&segment_scores, &site.adjacency, cfg.aggregation)?;
    Ok((segment_scores, normalize_per_tier(&raw)))
}

pub fn site_clusters(
    site: &Site,
    policy: &Policy,
    cfg: &EvalConfig,
    tensor: &AccessibilityTensor,
) -> Result<ClusterHierarchy> {
    let thresholds = cfg.thresholds.clone().unwrap_or_else(|| policy.radii.clone());
    build_clusters(&site.blocks, tensor, &thresholds)
}

pub fn allocation_config(policy: &Policy, cfg: &EvalConfig) -> AllocationConfig {
    let mut alloc_cfg = AllocationConfig::new(policy.target_shares, policy.priority.clone(), policy.tiers.clone());
    if let Some(m) = &cfg.min_parcel {
        alloc_cfg.min_parcel = m.clone();
    }
    alloc_cfg.rank_overrides = cfg.rank_overrides.clone();
    alloc_cfg.tau_int = cfg.tau_int;
    alloc_cfg
}

pub fn intensity_config(site: &Site, cfg: &EvalConfig) -> IntensityConfig {
    IntensityConfig {
        b_total: cfg.b_total.unwrap_or(DEFAULT_B_TOTAL_PER_AREA * site.total_area()),
        construction_shares: cfg.construction_shares,
        far_anchor: cfg.far_anchor,
        footprint_ratio: cfg.footprint_ratio,
        footprint_by_use: cfg.footprint_by_use,
        storey_height: cfg.storey_height,
        fit: cfg.fit,
    }
}

pub fn evaluate_policy(
    site: &Site,
    policy: &Policy,
    cfg: &EvalConfig,
    cache: Option<&FieldCache>,
) -> Result<Evaluation> {
    policy.validate()?;
    let total = site.total_area();
    if site.blocks.is_empty() || !(total > 0.0) {
        return Err(Error::ZeroArea);
    }
    let (segment_scores, tensor) = site_access(site, policy, cfg, cache)?;
    let hierarchy = site_clusters(site, policy, cfg, &tensor)?;
    let allocation = allocate(&site.blocks, &tensor, &hierarchy, &allocation_config(policy, cfg))?;
    let shares = achieved_shares(&allocation, &policy.target_shares, cfg.accounting);

    let access = weighted_accessibility(&tensor, &policy.normalized_rho())?;
    let intensity = run_intensity(&allocation, &access, &intensity_config(site, cfg))?;

    let raw = RawObjectives {
        au: accessibility_utility(&intensity.lots, &intensity.far)?,
        d_b: intensity.report.d_b,
        d_lu: shares.d_lu,
        d_cs: intensity.report.d_cs,
        jh: jobs_housing_penalty(&allocation.area_by_use(), cfg.r0)?,
    };
    Ok(Evaluation {
        policy: policy.clone(),
        segment_scores,
        tensor,
        hierarchy,
        allocation,
        access,
        intensity,
        shares,
        raw,
    })
}

/// Evaluates every policy (failures become invalid records) and normalizes
/// the batch. Output order follows the input order.
pub fn evaluate_batch(site: &Site, policies: &[Policy], cfg: &EvalConfig) -> Vec<ObjectiveRecord> {
    let radii = policies.iter().flat_map(|p| p.radii.iter().copied()).filter(|r| *r > 0.0);
    let cache = match FieldCache::build(site, radii, cfg.mix_costs) {
        Ok(c) => Some(c),
        Err(e) => {
            log::warn!("field cache unavailable: {e}");
            None
        }
    };
    let mut records = crate::par::map_collect(policies, |p| match evaluate_policy(site, p, cfg, cache.as_ref()) {
        Ok(ev) => ObjectiveRecord::ok(p.clone(), ev.raw),
        Err(e) => ObjectiveRecord::invalid(p.clone(), &e),
    });
    normalize_objectives(&mut records);
    records
}

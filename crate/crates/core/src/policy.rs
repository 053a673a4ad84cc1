//! Policy sampling, objectives, Pareto extraction and reporting.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intensity::Lot;
use crate::landuse::{default_target_shares, LandUse, PriorityOrder, UseMap};
use crate::netgraph::check_tier_radii;
use crate::norm::{min_max, quantile};
use crate::tier::Tier;

pub const DEFAULT_JOBS_HOUSING_TARGET: f64 = 1.2;

/// One point of the decision space. Missing fields default to the knee preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Policy {
    pub id: usize,
    /// Coarse to fine.
    pub tiers: Vec<Tier>,
    pub radii: Vec<f64>,
    /// Choice weight per tier.
    pub sigma: Vec<f64>,
    /// Tier weights for `Ã`; renormalized before use.
    pub rho: Vec<f64>,
    pub target_shares: UseMap<f64>,
    pub priority: PriorityOrder,
}

impl Default for Policy {
    fn default() -> Self {
        Policy::knee_preset()
    }
}

impl Policy {
    /// Radii, mixes and weights in the reported knee configuration.
    pub fn knee_preset() -> Self {
        Policy {
            id: 0,
            tiers: vec![Tier::District, Tier::CommunityCluster, Tier::Community],
            radii: vec![1200.0, 900.0, 350.0],
            sigma: vec![0.2, 0.2, 0.8],
            rho: vec![0.5, 0.25, 0.25],
            target_shares: default_target_shares(),
            priority: PriorityOrder::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.tiers.len();
        for (what, actual) in [("radii", self.radii.len()), ("sigma", self.sigma.len()), ("rho", self.rho.len())] {
            if actual != l {
                return Err(Error::DimensionMismatch { what, expected: l, actual });
            }
        }
        check_tier_radii(&self.radii)?;
        if let Some(&s) = self.sigma.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::OutOfRange { name: "sigma".into(), value: s });
        }
        if let Some(&r) = self.rho.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
            return Err(Error::OutOfRange { name: "rho".into(), value: r });
        }
        let rho_sum: f64 = self.rho.iter().sum();
        if !(rho_sum > 0.0) {
            return Err(Error::OutOfRange { name: "rho sum".into(), value: rho_sum });
        }
        for (_, s) in self.target_shares.iter() {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::OutOfRange { name: "target share".into(), value: s });
            }
        }
        let sum = self.target_shares.sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::OutOfRange { name: "target share sum".into(), value: sum });
        }
        Ok(())
    }

    pub fn normalized_rho(&self) -> Vec<f64> {
        let s: f64 = self.rho.iter().sum();
        self.rho.iter().map(|r| r / s).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Continuous { lo: f64, hi: f64 },
    Grid(Vec<f64>),
}

impl Dimension {
    fn check(&self, name: &str) -> Result<()> {
        match self {
            Dimension::Continuous { lo, hi } if !(lo <= hi && lo.is_finite() && hi.is_finite()) => {
                Err(Error::InvalidConfig(format!("{name}: bounds [{lo}, {hi}]")))
            }
            Dimension::Grid(g) if g.is_empty() => Err(Error::InvalidConfig(format!("{name}: empty grid"))),
            _ => Ok(()),
        }
    }

    /// Maps a stratified unit draw onto the dimension.
    fn at(&self, u: f64) -> f64 {
        match self {
            Dimension::Continuous { lo, hi } => lo + u * (hi - lo),
            Dimension::Grid(g) => g[((u * g.len() as f64) as usize).min(g.len() - 1)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicySpace {
    pub tiers: Vec<Tier>,
    pub radii: Vec<Dimension>,
    pub sigma: (f64, f64),
    pub rho: (f64, f64),
    pub priority: PriorityOrder,
    pub target_shares: UseMap<f64>,
    /// Draw a fresh priority order per policy by sorting random keys.
    pub sample_priority: bool,
    /// Draw target shares on the simplex instead of using `target_shares`.
    pub sample_shares: bool,
}

impl Default for PolicySpace {
    fn default() -> Self {
        PolicySpace {
            tiers: vec![Tier::District, Tier::CommunityCluster, Tier::Community],
            radii: vec![
                Dimension::Grid(vec![1200.0, 1400.0, 1600.0]),
                Dimension::Grid(vec![600.0, 700.0, 800.0, 900.0]),
                Dimension::Grid(vec![250.0, 300.0, 350.0, 400.0]),
            ],
            sigma: (0.0, 1.0),
            rho: (0.0, 1.0),
            priority: PriorityOrder::default(),
            target_shares: default_target_shares(),
            sample_priority: false,
            sample_shares: false,
        }
    }
}

impl PolicySpace {
    pub fn validate(&self) -> Result<()> {
        if self.tiers.is_empty() {
            return Err(Error::EmptyTiers);
        }
        if self.radii.len() != self.tiers.len() {
            return Err(Error::DimensionMismatch {
                what: "radius dimensions",
                expected: self.tiers.len(),
                actual: self.radii.len(),
            });
        }
        for (t, d) in self.tiers.iter().zip(&self.radii) {
            d.check(&format!("{t} radius"))?;
        }
        for (name, (lo, hi)) in [("sigma", self.sigma), ("rho", self.rho)] {
            if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                return Err(Error::InvalidConfig(format!("{name}: bounds [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

/// Latin hypercube draws: `n × dims` unit values where each column puts
/// exactly one value in each of the `n` equal strata.
pub fn latin_hypercube(n: usize, dims: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; dims]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for d in 0..dims {
        strata.shuffle(rng);
        for (row, &s) in out.iter_mut().zip(&strata) {
            row[d] = (s as f64 + rng.random::<f64>()) / n as f64;
        }
    }
    out
}

pub fn sample_policies(space: &PolicySpace, n: usize, seed: u64) -> Result<Vec<Policy>> {
    if n == 0 {
        return Err(Error::OutOfRange { name: "n".into(), value: 0.0 });
    }
    space.validate()?;
    let l = space.tiers.len();
    let keys = if space.sample_priority { 8 } else { 0 };
    let shares = if space.sample_shares { 8 } else { 0 };
    let dims = 3 * l + keys + shares;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws = latin_hypercube(n, dims, &mut rng);
    let span = |(lo, hi): (f64, f64), u: f64| lo + u * (hi - lo);

    Ok(draws
        .iter()
        .enumerate()
        .map(|(id, u)| {
            let radii = (0..l).map(|k| space.radii[k].at(u[k])).collect();
            let sigma = (0..l).map(|k| span(space.sigma, u[l + k])).collect();
            let rho = (0..l).map(|k| span(space.rho, u[2 * l + k])).collect();
            let priority = if space.sample_priority {
                let mut order: Vec<(f64, LandUse)> = LandUse::ALL.iter().map(|&x| (u[3 * l + x.index()], x)).collect();
                order.sort_by(|a, b| b.0.total_cmp(&a.0));
                PriorityOrder::new(order.into_iter().map(|(_, x)| x).collect()).expect("permutation")
            } else {
                space.priority.clone()
            };
            let target_shares = if space.sample_shares {
                let raw = UseMap::from_fn(|x| u[3 * l + keys + x.index()]);
                raw.normalized().unwrap_or(space.target_shares)
            } else {
                space.target_shares
            };
            Policy { id, tiers: space.tiers.clone(), radii, sigma, rho, target_shares, priority }
        })
        .collect())
}

/// `AU = Σ 1[use ∉ {I,T}]·FAR·area·Ã / Σ FAR·area`.
pub fn accessibility_utility(lots: &[Lot], far: &[f64]) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (lot, f) in lots.iter().zip(far) {
        let w = f * lot.area;
        den += w;
        if !lot.land_use.is_bad() {
            num += w * lot.access;
        }
    }
    if !(den > 0.0) {
        return Err(Error::ZeroBuiltArea);
    }
    Ok(num / den)
}

/// `((B + F) / R − r0)²` on assigned areas.
pub fn jobs_housing_penalty(area_by_use: &UseMap<f64>, r0: f64) -> Result<f64> {
    let housing = area_by_use[LandUse::R];
    if !(housing > 0.0) {
        return Err(Error::ZeroHousing);
    }
    let jobs = area_by_use[LandUse::B] + area_by_use[LandUse::F];
    Ok((jobs / housing - r0).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawObjectives {
    pub au: f64,
    pub d_b: f64,
    pub d_lu: f64,
    pub d_cs: f64,
    pub jh: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NormObjectives {
    pub one_minus_au: f64,
    pub d_b: f64,
    pub d_lu: f64,
    pub d_cs: f64,
    pub d_total: f64,
    pub jh: f64,
}

impl NormObjectives {
    /// The three minimized objectives.
    pub fn triple(&self) -> [f64; 3] {
        [self.one_minus_au, self.d_total, self.jh]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveRecord {
    pub policy: Policy,
    pub valid: bool,
    pub error: Option<String>,
    pub raw: Option<RawObjectives>,
    pub norm: Option<NormObjectives>,
}

impl ObjectiveRecord {
    pub fn id(&self) -> usize {
        self.policy.id
    }

    pub fn ok(policy: Policy, raw: RawObjectives) -> Self {
        ObjectiveRecord { policy, valid: true, error: None, raw: Some(raw), norm: None }
    }

    pub fn invalid(policy: Policy, error: &Error) -> Self {
        ObjectiveRecord { policy, valid: false, error: Some(error.to_string()), raw: None, norm: None }
    }
}

/// Min-max over the valid records; `D_total` is the min-max of the summed
/// normalized deviations. Invalid records keep `norm = None`.
pub fn normalize_objectives(records: &mut [ObjectiveRecord]) {
    let idx: Vec<usize> = (0..records.len()).filter(|&k| records[k].valid && records[k].raw.is_some()).collect();
    let col = |f: &dyn Fn(&RawObjectives) -> f64| -> Vec<f64> {
        min_max(&idx.iter().map(|&k| f(records[k].raw.as_ref().unwrap())).collect::<Vec<_>>())
    };
    let au = col(&|r| 1.0 - r.au);
    let d_b = col(&|r| r.d_b);
    let d_lu = col(&|r| r.d_lu);
    let d_cs = col(&|r| r.d_cs);
    let jh = col(&|r| r.jh);
    let sum: Vec<f64> = (0..idx.len()).map(|j| d_b[j] + d_lu[j] + d_cs[j]).collect();
    let d_total = min_max(&sum);
    for (j, &k) in idx.iter().enumerate() {
        records[k].norm = Some(NormObjectives {
            one_minus_au: au[j],
            d_b: d_b[j],
            d_lu: d_lu[j],
            d_cs: d_cs[j],
            d_total: d_total[j],
            jh: jh[j],
        });
    }
}

fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

/// Fast non-dominated sort. Returns fronts of point indices, best first.
pub fn non_dominated_sort(points: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for p in 0..n {
        for q in (p + 1)..n {
            if dominates(&points[p], &points[q]) {
                dominates_list[p].push(q);
                dominated_by[q] += 1;
            } else if dominates(&points[q], &points[p]) {
                dominates_list[q].push(p);
                dominated_by[p] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&p| dominated_by[p] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominates_list[p] {
                dominated_by[q] -= 1;
                if dominated_by[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Indices of the non-dominated points.
pub fn pareto_front(points: &[Vec<f64>]) -> Vec<usize> {
    non_dominated_sort(points).into_iter().next().unwrap_or_default()
}

/// Ids of non-dominated valid records on the normalized triple.
pub fn pareto_records(records: &[ObjectiveRecord]) -> Vec<usize> {
    let valid: Vec<&ObjectiveRecord> = records.iter().filter(|r| r.norm.is_some()).collect();
    let pts: Vec<Vec<f64>> = valid.iter().map(|r| r.norm.unwrap().triple().to_vec()).collect();
    let mut ids: Vec<usize> = pareto_front(&pts).into_iter().map(|k| valid[k].id()).collect();
    ids.sort_unstable();
    ids
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KneeCandidate {
    pub id: usize,
    pub objectives: [f64; 3],
    pub d_cs: f64,
    pub d_lu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Knee {
    pub id: usize,
    pub distance: f64,
}

const TIE: f64 = 1e-12;

/// Closest front member to the origin after min-max within the front; ties
/// go to lower `D_CS`, then lower `D_LU`, then lower id.
pub fn knee_point(front: &[KneeCandidate]) -> Option<Knee> {
    if front.is_empty() {
        return None;
    }
    let cols: Vec<Vec<f64>> =
        (0..3).map(|k| min_max(&front.iter().map(|c| c.objectives[k]).collect::<Vec<_>>())).collect();
    let dist: Vec<f64> = (0..front.len()).map(|j| cols.iter().map(|c| c[j] * c[j]).sum::<f64>().sqrt()).collect();
    let better = |a: usize, b: usize| -> bool {
        let (ca, cb) = (&front[a], &front[b]);
        if (dist[a] - dist[b]).abs() > TIE {
            return dist[a] < dist[b];
        }
        (ca.d_cs, ca.d_lu, ca.id) < (cb.d_cs, cb.d_lu, cb.id)
    };
    let mut best = 0;
    for j in 1..front.len() {
        if better(j, best) {
            best = j;
        }
    }
    Some(Knee { id: front[best].id, distance: dist[best] })
}

pub fn knee_of_records(records: &[ObjectiveRecord], front_ids: &[usize]) -> Option<Knee> {
    let by_id: BTreeMap<usize, &ObjectiveRecord> = records.iter().map(|r| (r.id(), r)).collect();
    let cands: Vec<KneeCandidate> = front_ids
        .iter()
        .filter_map(|id| by_id.get(id))
        .filter_map(|r| {
            let n = r.norm?;
            Some(KneeCandidate { id: r.id(), objectives: n.triple(), d_cs: n.d_cs, d_lu: n.d_lu })
        })
        .collect();
    knee_point(&cands)
}

fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman ρ with average ranks for ties. `None` when either side is
/// constant or the lengths differ.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

pub const METRIC_NAMES: [&str; 6] = ["one_minus_au", "d_b", "d_lu", "d_cs", "d_total", "jh"];

fn metric_values(n: &NormObjectives) -> [f64; 6] {
    [n.one_minus_au, n.d_b, n.d_lu, n.d_cs, n.d_total, n.jh]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpearmanMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

/// Pairwise Spearman over normalized metrics of the given records.
pub fn rank_correlations(records: &[&ObjectiveRecord]) -> Result<SpearmanMatrix> {
    let rows: Vec<[f64; 6]> = records.iter().filter_map(|r| r.norm.as_ref().map(metric_values)).collect();
    if rows.len() < 3 {
        return Err(Error::Infeasible(format!("need at least 3 records, got {}", rows.len())));
    }
    let cols: Vec<Vec<f64>> = (0..6).map(|k| rows.iter().map(|r| r[k]).collect()).collect();
    let values = (0..6).map(|a| (0..6).map(|b| spearman(&cols[a], &cols[b])).collect()).collect();
    Ok(SpearmanMatrix { names: METRIC_NAMES.iter().map(|s| s.to_string()).collect(), values })
}

/// A policy input that takes discrete values, e.g. `district_radius`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SensitivityParam(pub Tier);

impl std::str::FromStr for SensitivityParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let stem = lower
            .strip_suffix("radius")
            .or_else(|| lower.strip_prefix("radius"))
            .ok_or_else(|| Error::Parse(format!("unknown parameter {s:?}")))?;
        Ok(SensitivityParam(stem.trim_matches('_').parse()?))
    }
}

impl std::fmt::Display for SensitivityParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}_radius", self.0.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

impl Quartiles {
    pub fn of(v: &[f64]) -> Self {
        Quartiles { q1: quantile(v, 0.25), median: quantile(v, 0.5), q3: quantile(v, 0.75) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub value: f64,
    pub count: usize,
    pub one_minus_au: Quartiles,
    pub d_total: Quartiles,
    pub jh: Quartiles,
}

/// Objective quartiles grouped by the parameter's value. Groups appear in
/// ascending value order; values nobody chose are simply absent.
pub fn sensitivity_groups(records: &[&ObjectiveRecord], param: SensitivityParam) -> Vec<GroupSummary> {
    let mut groups: BTreeMap<u64, (f64, Vec<[f64; 3]>)> = BTreeMap::new();
    for r in records {
        let (Some(n), Some(k)) = (r.norm, r.policy.tiers.iter().position(|&t| t == param.0)) else { continue };
        let v = r.policy.radii[k];
        groups.entry(v.to_bits()).or_insert((v, Vec::new())).1.push(n.triple());
    }
    let mut out: Vec<GroupSummary> = groups
        .into_values()
        .map(|(value, pts)| {
            let col = |k: usize| pts.iter().map(|p| p[k]).collect::<Vec<_>>();
            GroupSummary {
                value,
                count: pts.len(),
                one_minus_au: Quartiles::of(&col(0)),
                d_total: Quartiles::of(&col(1)),
                jh: Quartiles::of(&col(2)),
            }
        })
        .collect();
    out.sort_by(|a, b| a.value.total_cmp(&b.value));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lot(u: LandUse, area: f64, access: f64) -> Lot {
        Lot { block: 0, land_use: u, area, access }
    }

    #[test]
    fn lhs_one_per_stratum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = latin_hypercube(4, 1, &mut rng);
        let mut strata: Vec<usize> = d.iter().map(|r| (r[0] * 4.0) as usize).collect();
        strata.sort();
        assert_eq!(strata, vec![0, 1, 2, 3]);
    }

    #[test]
    fn sampling_is_deterministic_and_in_bounds() {
        let space = PolicySpace::default();
        let a = sample_policies(&space, 50, 7).unwrap();
        assert_eq!(a, sample_policies(&space, 50, 7).unwrap());
        assert_ne!(a, sample_policies(&space, 50, 8).unwrap());
        for p in &a {
            p.validate().unwrap();
            assert!([1200.0, 1400.0, 1600.0].contains(&p.radii[0]));
        }
        assert!(sample_policies(&space, 0, 7).is_err());
    }

    #[test]
    fn sampled_priority_and_shares() {
        let space = PolicySpace { sample_priority: true, sample_shares: true, ..PolicySpace::default() };
        let ps = sample_policies(&space, 20, 1).unwrap();
        assert!(ps.iter().any(|p| p.priority != PriorityOrder::default()));
        for p in &ps {
            assert!((p.target_shares.sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_dimension_covers_every_value_when_n_is_a_multiple() {
        let space = PolicySpace::default();
        let ps = sample_policies(&space, 12, 5).unwrap();
        for (k, grid) in [vec![1200.0, 1400.0, 1600.0], vec![600.0, 700.0, 800.0, 900.0]].iter().enumerate() {
            for v in grid {
                let c = ps.iter().filter(|p| p.radii[k] == *v).count();
                assert_eq!(c, 12 / grid.len());
            }
        }
    }

    #[test]
    fn au_examples() {
        assert_eq!(accessibility_utility(&[lot(LandUse::B, 1.0, 1.0)], &[1.0]).unwrap(), 1.0);
        assert_eq!(
            accessibility_utility(&[lot(LandUse::I, 1.0, 1.0), lot(LandUse::T, 2.0, 0.5)], &[1.0, 1.0]).unwrap(),
            0.0
        );
        let two = [lot(LandUse::B, 10.0, 1.0), lot(LandUse::R, 10.0, 0.0)];
        assert_eq!(accessibility_utility(&two, &[2.0, 2.0]).unwrap(), 0.5);
        assert!(accessibility_utility(&two, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn jh_examples() {
        let mut a = UseMap([0.0; 8]);
        a[LandUse::R] = 100.0;
        a[LandUse::B] = 90.0;
        a[LandUse::F] = 30.0;
        assert!(jobs_housing_penalty(&a, 1.2).unwrap().abs() < 1e-24);
        a[LandUse::B] = 190.0;
        assert!((jobs_housing_penalty(&a, 1.2).unwrap() - 1.0).abs() < 1e-12);
        a[LandUse::R] = 0.0;
        assert!(matches!(jobs_housing_penalty(&a, 1.2), Err(Error::ZeroHousing)));
    }

    fn rec(id: usize, raw: RawObjectives) -> ObjectiveRecord {
        let mut p = Policy::knee_preset();
        p.id = id;
        ObjectiveRecord::ok(p, raw)
    }

    #[test]
    fn normalization_and_d_total() {
        let raws = [
            RawObjectives { au: 0.8, d_b: 0.0, d_lu: 0.1, d_cs: 0.3, jh: 2.0 },
            RawObjectives { au: 0.6, d_b: 2.0, d_lu: 0.3, d_cs: 0.1, jh: 4.0 },
            RawObjectives { au: 0.4, d_b: 4.0, d_lu: 0.2, d_cs: 0.2, jh: 6.0 },
        ];
        let mut recs: Vec<ObjectiveRecord> = raws.iter().enumerate().map(|(k, r)| rec(k, *r)).collect();
        let mut bad = rec(3, raws[0]);
        bad.valid = false;
        bad.raw = None;
        recs.push(bad);
        normalize_objectives(&mut recs);
        let n: Vec<NormObjectives> = recs[..3].iter().map(|r| r.norm.unwrap()).collect();
        assert_eq!(n.iter().map(|x| x.jh).collect::<Vec<_>>(), vec![0.0, 0.5, 1.0]);
        assert!((n[0].one_minus_au - 0.0).abs() < 1e-12 && (n[2].one_minus_au - 1.0).abs() < 1e-12);
        // sums: 0+0+1 = 1, 0.5+1+0 = 1.5, 1+0.5+0.5 = 2 -> 0, 0.5, 1.
        let dt: Vec<f64> = n.iter().map(|x| x.d_total).collect();
        for (a, b) in dt.iter().zip([0.0, 0.5, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(recs[3].norm.is_none());
    }

    #[test]
    fn constant_metric_normalizes_to_zero() {
        let r = RawObjectives { au: 0.5, d_b: 1.0, d_lu: 1.0, d_cs: 1.0, jh: 1.0 };
        let mut recs = vec![rec(0, r), rec(1, r)];
        normalize_objectives(&mut recs);
        assert_eq!(recs[0].norm.unwrap(), NormObjectives::default());
    }

    #[test]
    fn front_examples() {
        assert_eq!(pareto_front(&[vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 1.0]]), vec![0]);
        assert_eq!(pareto_front(&[vec![0.0, 1.0], vec![1.0, 0.0]]), vec![0, 1]);
        let fronts = non_dominated_sort(&[vec![2.0, 2.0], vec![0.0, 0.0], vec![1.0, 1.0]]);
        assert_eq!(fronts, vec![vec![1], vec![2], vec![0]]);
    }

    fn cand(id: usize, o: [f64; 3], d_cs: f64, d_lu: f64) -> KneeCandidate {
        KneeCandidate { id, objectives: o, d_cs, d_lu }
    }

    #[test]
    fn knee_examples() {
        assert_eq!(knee_point(&[cand(4, [0.3, 0.3, 0.3], 0.0, 0.0)]).unwrap().id, 4);
        let front = [
            cand(0, [0.1, 0.9, 0.0], 0.0, 0.0),
            cand(1, [0.5, 0.5, 0.0], 0.0, 0.0),
            cand(2, [0.9, 0.1, 0.0], 0.0, 0.0),
        ];
        let k = knee_point(&front).unwrap();
        assert_eq!(k.id, 1);
        assert!((k.distance - 0.5f64.sqrt()).abs() < 1e-12);
        let tie = [cand(0, [0.0, 1.0, 0.0], 0.4, 0.0), cand(1, [1.0, 0.0, 0.0], 0.3, 0.9)];
        assert_eq!(knee_point(&tie).unwrap().id, 1);
        let tie = [cand(0, [0.0, 1.0, 0.0], 0.3, 0.2), cand(1, [1.0, 0.0, 0.0], 0.3, 0.1)];
        assert_eq!(knee_point(&tie).unwrap().id, 1);
        let tie = [cand(5, [0.0, 1.0, 0.0], 0.3, 0.1), cand(2, [1.0, 0.0, 0.0], 0.3, 0.1)];
        assert_eq!(knee_point(&tie).unwrap().id, 2);
        assert!(knee_point(&[]).is_none());
    }

    #[test]
    fn spearman_examples() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!((spearman(&x, &[2.0, 4.0, 6.0, 8.0, 10.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman(&x, &[5.0, 4.0, 3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        // Hand ranks: y -> (2, 1, 4, 3, 5), d² = 1+1+1+1+0 = 4, ρ = 1 − 6·4/(5·24) = 0.8.
        assert!((spearman(&x, &[20.0, 10.0, 40.0, 30.0, 50.0]).unwrap() - 0.8).abs() < 1e-12);
        assert!(spearman(&x, &[1.0; 5]).is_none());
        assert_eq!(average_ranks(&[1.0, 2.0, 2.0, 3.0]), vec![1.0, 2.5, 2.5, 4.0]);
    }

    #[test]
    fn sensitivity_param_parsing() {
        for s in ["district_radius", "DistrictRadius", "radius_district"] {
            assert_eq!(s.parse::<SensitivityParam>().unwrap(), SensitivityParam(Tier::District));
        }
        assert!("district_sigma".parse::<SensitivityParam>().is_err());
        assert_eq!(SensitivityParam(Tier::CommunityCluster).to_string(), "community_cluster_radius");
    }

    #[test]
    fn sensitivity_groups_by_radius() {
        let mut recs = Vec::new();
        for (k, (r, jh)) in [(1200.0, 0.1), (1200.0, 0.3), (1400.0, 0.5), (1600.0, 0.2), (1600.0, 0.4), (1600.0, 0.9)]
            .iter()
            .enumerate()
        {
            let mut x = rec(k, RawObjectives { au: 0.5, d_b: 0.0, d_lu: 0.0, d_cs: 0.0, jh: 0.0 });
            x.policy.radii[0] = *r;
            x.norm = Some(NormObjectives { jh: *jh, ..NormObjectives::default() });
            recs.push(x);
        }
        let refs: Vec<&ObjectiveRecord> = recs.iter().collect();
        let g = sensitivity_groups(&refs, SensitivityParam(Tier::District));
        assert_eq!(
            g.iter().map(|s| (s.value, s.count)).collect::<Vec<_>>(),
            vec![(1200.0, 2), (1400.0, 1), (1600.0, 3)]
        );
        assert!((g[0].jh.median - 0.2).abs() < 1e-12);
        assert!((g[2].jh.median - 0.4).abs() < 1e-12);
        assert!((g[2].jh.q1 - 0.3).abs() < 1e-12);
        let one = sensitivity_groups(&refs[3..4], SensitivityParam(Tier::District));
        assert_eq!(one.len(), 1);
    }
}

//! Street-segment dual graph and radius-bounded segment centralities.
//!
//! Every street segment is a vertex of the dual graph. Two segments are
//! adjacent when they meet at a street node; the step between them carries a
//! metric cost (half of each segment's length, i.e. midpoint to midpoint
//! through the junction) and an angular cost (heading change in degrees).
//!
//! Step costs are stored as integer micro-units (µm, µ°) so that path costs
//! add exactly and equal-cost shortest paths tie exactly. Under angular cost
//! the shortest path is the straightest one, with metric length breaking
//! ties between equally straight routes; without that secondary key a run of
//! collinear (zero-turn) steps would admit non-simple "shortest" paths.
//!
//! The radius cutoff is always the metric shortest-path distance between the
//! two segments, whichever cost the centrality uses.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use geo::{Coord, Euclidean, InterpolateLine, Length, LineString};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norm::min_max;
use crate::par;

pub const DEFAULT_SNAP_TOLERANCE: f64 = 0.5;
/// Fraction of a segment's length used for its heading chord at a junction.
pub const HEADING_CHORD_FRACTION: f64 = 0.1;
/// Floor on the Integration denominator (zero-turn paths under angular cost).
pub const INTEGRATION_FLOOR: f64 = 1e-9;

const COST_SCALE: f64 = 1e6;
const UNREACHED: (u64, u64) = (u64::MAX, u64::MAX);

pub(crate) fn quantize(x: f64) -> u64 {
    (x * COST_SCALE).round() as u64
}

pub(crate) fn dequantize(q: u64) -> f64 {
    q as f64 / COST_SCALE
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreetSegment {
    pub id: String,
    pub start: usize,
    pub end: usize,
    pub geometry: LineString<f64>,
    /// Meters.
    pub length: f64,
}

/// Planar street network in a projected meter CRS.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StreetNetwork {
    pub nodes: Vec<Coord<f64>>,
    pub segments: Vec<StreetSegment>,
}

impl StreetNetwork {
    /// Builds a network from raw polylines, creating one node per cluster of
    /// endpoints that lie within `snap_tolerance` of each other.
    pub fn from_polylines(
        lines: impl IntoIterator<Item = (String, LineString<f64>)>,
        snap_tolerance: f64,
    ) -> Result<Self> {
        let mut index = NodeIndex::new(snap_tolerance);
        let mut nodes = Vec::new();
        let mut segments = Vec::new();
        for (id, geometry) in lines {
            if geometry.0.len() < 2 {
                return Err(Error::InvalidNetwork(format!("segment {id} has fewer than 2 vertices")));
            }
            let first = geometry.0[0];
            let last = *geometry.0.last().unwrap();
            let start = index.find_or_insert(first, &mut nodes);
            let end = index.find_or_insert(last, &mut nodes);
            let length = Euclidean.length(&geometry);
            segments.push(StreetSegment { id, start, end, geometry, length });
        }
        let network = StreetNetwork { nodes, segments };
        network.validate(snap_tolerance)?;
        Ok(network)
    }

    pub fn validate(&self, snap_tolerance: f64) -> Result<()> {
        if !(snap_tolerance >= 0.0) {
            return Err(Error::OutOfRange { name: "snap_tolerance".into(), value: snap_tolerance });
        }
        let slack = snap_tolerance + 1e-9;
        for seg in &self.segments {
            if !(seg.length > 0.0) || !seg.length.is_finite() {
                return Err(Error::InvalidNetwork(format!("segment {} has non-positive length", seg.id)));
            }
            let (Some(a), Some(b)) = (self.nodes.get(seg.start), self.nodes.get(seg.end)) else {
                return Err(Error::InvalidNetwork(format!("segment {} has an invalid endpoint id", seg.id)));
            };
            let (Some(first), Some(last)) = (seg.geometry.0.first(), seg.geometry.0.last()) else {
                return Err(Error::InvalidNetwork(format!("segment {} has empty geometry", seg.id)));
            };
            if dist(*first, *a) > slack || dist(*last, *b) > slack {
                return Err(Error::InvalidNetwork(format!(
                    "segment {} geometry does not meet its endpoint nodes",
                    seg.id
                )));
            }
        }
        Ok(())
    }
}

fn dist(a: Coord<f64>, b: Coord<f64>) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Spatial hash for endpoint snapping.
struct NodeIndex {
    tolerance: f64,
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl NodeIndex {
    fn new(tolerance: f64) -> Self {
        NodeIndex { tolerance, cells: HashMap::new() }
    }

    fn cell(&self, c: Coord<f64>) -> (i64, i64) {
        let size = self.tolerance.max(1e-6);
        ((c.x / size).floor() as i64, (c.y / size).floor() as i64)
    }

    fn find_or_insert(&mut self, c: Coord<f64>, nodes: &mut Vec<Coord<f64>>) -> usize {
        let (cx, cy) = self.cell(c);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.cells.get(&(cx + dx, cy + dy)) {
                    for &id in ids {
                        if dist(nodes[id], c) <= self.tolerance {
                            return id;
                        }
                    }
                }
            }
        }
        nodes.push(c);
        let id = nodes.len() - 1;
        self.cells.entry((cx, cy)).or_default().push(id);
        id
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostKind {
    Metric,
    Angular,
}

impl std::fmt::Display for CostKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CostKind::Metric => "metric",
            CostKind::Angular => "angular",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CentralityKind {
    Choice,
    Integration,
}

impl std::fmt::Display for CentralityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CentralityKind::Choice => "choice",
            CentralityKind::Integration => "integration",
        })
    }
}

/// One dual-graph step from a segment to an adjacent segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub to: usize,
    /// Micro-meters, > 0.
    pub metric: u64,
    /// Micro-degrees, in [0, 180e6].
    pub angular: u64,
}

impl Step {
    pub fn metric_m(&self) -> f64 {
        dequantize(self.metric)
    }

    pub fn angular_deg(&self) -> f64 {
        dequantize(self.angular)
    }

    fn key(&self, cost: CostKind) -> (u64, u64) {
        match cost {
            CostKind::Metric => (self.metric, 0),
            CostKind::Angular => (self.angular, self.metric),
        }
    }
}

/// Immutable segment dual graph.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentGraph {
    ids: Vec<String>,
    adjacency: Vec<Vec<Step>>,
}

impl SegmentGraph {
    /// Builds a graph from explicit symmetric step costs (meters, degrees).
    /// Each undirected pair is listed once.
    pub fn from_steps(ids: Vec<String>, steps: &[(usize, usize, f64, f64)]) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let n = ids.len();
        let mut pairs: BTreeMap<(usize, usize), (u64, u64)> = BTreeMap::new();
        for &(a, b, metric, angular) in steps {
            if a >= n || b >= n || a == b {
                return Err(Error::InvalidNetwork(format!("bad step {a}-{b}")));
            }
            if !(metric > 0.0) || !(0.0..=180.0).contains(&angular) {
                return Err(Error::InvalidNetwork(format!("bad step cost {metric}/{angular}")));
            }
            let key = (a.min(b), a.max(b));
            let q = (quantize(metric), quantize(angular));
            let e = pairs.entry(key).or_insert(q);
            *e = (e.0.min(q.0), e.1.min(q.1));
        }
        Self::from_pairs(ids, pairs)
    }

    fn from_pairs(ids: Vec<String>, pairs: BTreeMap<(usize, usize), (u64, u64)>) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); ids.len()];
        for (&(a, b), &(metric, angular)) in &pairs {
            if metric == 0 {
                return Err(Error::InvalidNetwork(format!(
                    "segments {} and {} have zero metric step cost",
                    ids[a], ids[b]
                )));
            }
            adjacency[a].push(Step { to: b, metric, angular });
            adjacency[b].push(Step { to: a, metric, angular });
        }
        for list in &mut adjacency {
            list.sort_by_key(|s| s.to);
        }
        Ok(SegmentGraph { ids, adjacency })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn neighbors(&self, segment: usize) -> &[Step] {
        &self.adjacency[segment]
    }

    pub fn step(&self, a: usize, b: usize) -> Option<&Step> {
        self.adjacency[a].iter().find(|s| s.to == b)
    }

    /// Number of undirected adjacencies.
    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// Outward unit-free direction of `seg` at one of its ends, from the
/// junction towards the point at [`HEADING_CHORD_FRACTION`] along the line.
fn outward_direction(seg: &StreetSegment, at_start: bool) -> Coord<f64> {
    let ratio = if at_start { HEADING_CHORD_FRACTION } else { 1.0 - HEADING_CHORD_FRACTION };
    let pts = &seg.geometry.0;
    let junction = if at_start { pts[0] } else { pts[pts.len() - 1] };
    let other = if at_start { pts[pts.len() - 1] } else { pts[0] };
    let inner = Euclidean.point_at_ratio_from_start(&seg.geometry, ratio).map(|p| p.0).unwrap_or(other);
    let d = inner - junction;
    if d.x.hypot(d.y) > 0.0 {
        d
    } else {
        other - junction
    }
}

/// Heading change in degrees when leaving one segment for another through a
/// shared junction, given both segments' outward directions there.
pub fn turn_angle(out_a: Coord<f64>, out_b: Coord<f64>) -> f64 {
    let na = out_a.x.hypot(out_a.y);
    let nb = out_b.x.hypot(out_b.y);
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let cos = ((out_a.x * out_b.x + out_a.y * out_b.y) / (na * nb)).clamp(-1.0, 1.0);
    (180.0 - cos.acos().to_degrees()).clamp(0.0, 180.0)
}

/// Builds the segment dual graph. Street nodes closer than `snap_tolerance`
/// are merged into one junction before adjacency is derived.
pub fn build_segment_graph(network: &StreetNetwork, snap_tolerance: f64) -> Result<SegmentGraph> {
    if network.segments.is_empty() {
        return Err(Error::EmptyGraph);
    }
    network.validate(snap_tolerance)?;

    // Merge nodes within tolerance (union-find via the spatial hash).
    let mut index = NodeIndex::new(snap_tolerance);
    let mut reps = Vec::new();
    let junction_of: Vec<usize> = network.nodes.iter().map(|&c| index.find_or_insert(c, &mut reps)).collect();

    let mut ends: BTreeMap<usize, Vec<(usize, Coord<f64>)>> = BTreeMap::new();
    for (i, seg) in network.segments.iter().enumerate() {
        ends.entry(junction_of[seg.start]).or_default().push((i, outward_direction(seg, true)));
        ends.entry(junction_of[seg.end]).or_default().push((i, outward_direction(seg, false)));
    }

    let mut pairs: BTreeMap<(usize, usize), (u64, u64)> = BTreeMap::new();
    for list in ends.values() {
        for (x, &(a, dir_a)) in list.iter().enumerate() {
            for &(b, dir_b) in &list[x + 1..] {
                if a == b {
                    continue;
                }
                let metric = 0.5 * (network.segments[a].length + network.segments[b].length);
                let angular = turn_angle(dir_a, dir_b);
                let q = (quantize(metric), quantize(angular));
                let e = pairs.entry((a.min(b), a.max(b))).or_insert(q);
                *e = (e.0.min(q.0), e.1.min(q.1));
            }
        }
    }
    let ids = network.segments.iter().map(|s| s.id.clone()).collect();
    SegmentGraph::from_pairs(ids, pairs)
}

/// Shortest-path tree from one source with exact path counts.
struct PathTree {
    dist: Vec<(u64, u64)>,
    sigma: Vec<f64>,
    preds: Vec<Vec<usize>>,
    /// Settled vertices in nondecreasing distance order.
    order: Vec<usize>,
}

fn shortest_paths(graph: &SegmentGraph, source: usize, cost: CostKind, primary_limit: u64) -> PathTree {
    let n = graph.len();
    let mut dist = vec![UNREACHED; n];
    let mut sigma = vec![0.0; n];
    let mut preds = vec![Vec::new(); n];
    let mut settled = vec![false; n];
    let mut order = Vec::new();
    let mut heap = BinaryHeap::new();
    dist[source] = (0, 0);
    sigma[source] = 1.0;
    heap.push(Reverse(((0u64, 0u64), source)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if settled[v] || d > dist[v] {
            continue;
        }
        settled[v] = true;
        order.push(v);
        for step in &graph.adjacency[v] {
            let (p, s) = step.key(cost);
            let nd = (d.0 + p, d.1 + s);
            if nd.0 > primary_limit {
                continue;
            }
            let w = step.to;
            if nd < dist[w] {
                dist[w] = nd;
                sigma[w] = sigma[v];
                preds[w].clear();
                preds[w].push(v);
                heap.push(Reverse((nd, w)));
            } else if nd == dist[w] {
                // Keys strictly increase along every step, so w is not settled yet.
                sigma[w] += sigma[v];
                preds[w].push(v);
            }
        }
    }
    PathTree { dist, sigma, preds, order }
}

fn radius_limit(radius: f64) -> u64 {
    if radius.is_infinite() {
        u64::MAX
    } else {
        quantize(radius)
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange { name: "radius".into(), value: radius })
    }
}

/// Per-segment centrality scores for one (kind, cost, radius) combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityField {
    pub kind: CentralityKind,
    pub cost: CostKind,
    /// Meters; `f64::INFINITY` for unbounded.
    pub radius: f64,
    pub scores: Vec<f64>,
}

struct SourceContribution {
    integration: f64,
    choice: Vec<f64>,
}

fn source_contribution(
    graph: &SegmentGraph,
    source: usize,
    kind: CentralityKind,
    cost: CostKind,
    limit: u64,
) -> SourceContribution {
    let metric_tree = shortest_paths(graph, source, CostKind::Metric, limit);
    let within = |t: usize| t != source && metric_tree.dist[t].0 <= limit;
    let angular_tree;
    let tree = match cost {
        CostKind::Metric => &metric_tree,
        CostKind::Angular => {
            angular_tree = shortest_paths(graph, source, CostKind::Angular, u64::MAX);
            &angular_tree
        }
    };
    match kind {
        CentralityKind::Integration => {
            let mut total = 0.0;
            let mut reached = 0usize;
            for t in 0..graph.len() {
                if within(t) && tree.dist[t] != UNREACHED {
                    total += dequantize(tree.dist[t].0);
                    reached += 1;
                }
            }
            let integration = if reached == 0 { 0.0 } else { 1.0 / total.max(INTEGRATION_FLOOR) };
            SourceContribution { integration, choice: Vec::new() }
        }
        CentralityKind::Choice => {
            let mut delta = vec![0.0; graph.len()];
            let mut choice = vec![0.0; graph.len()];
            for &w in tree.order.iter().rev() {
                let coeff = if within(w) { 1.0 } else { 0.0 } + delta[w];
                for &v in &tree.preds[w] {
                    delta[v] += tree.sigma[v] / tree.sigma[w] * coeff;
                }
                if w != source {
                    choice[w] += delta[w];
                }
            }
            SourceContribution { integration: 0.0, choice }
        }
    }
}

const SOURCE_CHUNK: usize = 32;

/// Radius-bounded Choice (betweenness over unordered segment pairs) or
/// Integration (reciprocal total path cost) on the segment graph.
pub fn compute_centrality(
    graph: &SegmentGraph,
    kind: CentralityKind,
    cost: CostKind,
    radius: f64,
) -> Result<CentralityField> {
    if graph.is_empty() {
        return Err(Error::EmptyGraph);
    }
    check_radius(radius)?;
    let limit = radius_limit(radius);
    let n = graph.len();
    let sources: Vec<usize> = (0..n).collect();
    let chunks: Vec<&[usize]> = sources.chunks(SOURCE_CHUNK).collect();

    // Chunks are merged in source order so results do not depend on scheduling.
    let partials = par::map_collect(&chunks, |chunk| {
        let mut acc = vec![0.0; n];
        for &s in chunk.iter() {
            let c = source_contribution(graph, s, kind, cost, limit);
            match kind {
                CentralityKind::Integration => acc[s] = c.integration,
                CentralityKind::Choice => {
                    for (a, v) in acc.iter_mut().zip(&c.choice) {
                        *a += v;
                    }
                }
            }
        }
        acc
    });
    let mut scores = vec![0.0; n];
    for part in partials {
        for (s, v) in scores.iter_mut().zip(part) {
            *s += v;
        }
    }
    if kind == CentralityKind::Choice {
        // Ordered source-target sums count each unordered pair twice.
        for s in &mut scores {
            *s *= 0.5;
        }
    }
    Ok(CentralityField { kind, cost, radius, scores })
}

/// `sigma · norm(choice) + (1 − sigma) · norm(integration)` per segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentScoreMix {
    pub sigma: f64,
    pub scores: Vec<f64>,
}

pub fn mix_scores(choice: &CentralityField, integration: &CentralityField, sigma: f64) -> Result<SegmentScoreMix> {
    if !(0.0..=1.0).contains(&sigma) {
        return Err(Error::OutOfRange { name: "sigma".into(), value: sigma });
    }
    if choice.scores.len() != integration.scores.len() {
        return Err(Error::DimensionMismatch {
            what: "segment fields",
            expected: choice.scores.len(),
            actual: integration.scores.len(),
        });
    }
    let c = min_max(&choice.scores);
    let i = min_max(&integration.scores);
    let scores = c.iter().zip(&i).map(|(c, i)| (sigma * c + (1.0 - sigma) * i).clamp(0.0, 1.0)).collect();
    Ok(SegmentScoreMix { sigma, scores })
}

/// Which cost each half of the score mix uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixCosts {
    pub choice: CostKind,
    pub integration: CostKind,
}

impl Default for MixCosts {
    /// Metric Choice with angular Integration.
    fn default() -> Self {
        MixCosts { choice: CostKind::Metric, integration: CostKind::Angular }
    }
}

/// Raw fields and their mix for one tier.
#[derive(Debug, Clone, PartialEq)]
pub struct TierScores {
    pub choice: CentralityField,
    pub integration: CentralityField,
    pub mix: SegmentScoreMix,
}

/// Checks radii are nonempty, positive and strictly decreasing coarse to fine.
pub fn check_tier_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::EmptyTiers);
    }
    for &r in radii {
        check_radius(r)?;
    }
    if radii.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::RadiiNotDecreasing(radii.to_vec()));
    }
    Ok(())
}

pub fn tiered_fields(graph: &SegmentGraph, radii: &[f64], sigmas: &[f64], costs: MixCosts) -> Result<Vec<TierScores>> {
    check_tier_radii(radii)?;
    if sigmas.len() != radii.len() {
        return Err(Error::DimensionMismatch { what: "sigma per tier", expected: radii.len(), actual: sigmas.len() });
    }
    radii
        .iter()
        .zip(sigmas)
        .map(|(&r, &sigma)| {
            let choice = compute_centrality(graph, CentralityKind::Choice, costs.choice, r)?;
            let integration = compute_centrality(graph, CentralityKind::Integration, costs.integration, r)?;
            let mix = mix_scores(&choice, &integration, sigma)?;
            Ok(TierScores { choice, integration, mix })
        })
        .collect()
}

/// One mixed segment field per tier, radii ordered coarse to fine.
pub fn tiered_scores(
    graph: &SegmentGraph,
    radii: &[f64],
    sigmas: &[f64],
    costs: MixCosts,
) -> Result<Vec<SegmentScoreMix>> {
    Ok(tiered_fields(graph, radii, sigmas, costs)?.into_iter().map(|t| t.mix).collect())
}

//! Segment scores → block accessibility.

use geo::{Area, BoundingRect, Centroid, Coord, Distance, Euclidean, Polygon, Rect, Validation};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::{SegmentScoreMix, StreetNetwork};
use crate::norm::{min_max, quantile};

pub const DEFAULT_BUFFER: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub id: String,
    pub polygon: Polygon<f64>,
    /// m², equal to the polygon area.
    pub lot_area: f64,
    pub centroid: Coord<f64>,
}

impl Block {
    pub fn new(id: impl Into<String>, polygon: Polygon<f64>) -> Result<Self> {
        let id = id.into();
        if !polygon.is_valid() {
            return Err(Error::InvalidBlock { id, reason: "polygon is not simple/valid".into() });
        }
        let lot_area = polygon.unsigned_area();
        if !(lot_area > 0.0) {
            return Err(Error::InvalidBlock { id, reason: "zero area".into() });
        }
        let centroid = polygon
            .centroid()
            .map(|p| p.0)
            .ok_or_else(|| Error::InvalidBlock { id: id.clone(), reason: "no centroid".into() })?;
        Ok(Block { id, polygon, lot_area, centroid })
    }

    /// Like [`Block::new`] but checks a declared lot area against the polygon.
    pub fn with_declared_area(id: impl Into<String>, polygon: Polygon<f64>, declared: f64) -> Result<Self> {
        let block = Self::new(id, polygon)?;
        if (declared - block.lot_area).abs() > 1e-6 * block.lot_area {
            return Err(Error::InvalidBlock {
                id: block.id,
                reason: format!("lot_area {declared} differs from polygon area {}", block.lot_area),
            });
        }
        Ok(block)
    }
}

/// 𝒩(i): the street segments touching each block.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BlockAdjacency {
    pub segments_of: Vec<Vec<usize>>,
    /// Ids of blocks with no adjacent segment.
    pub isolated: Vec<String>,
}

fn expand(r: Rect<f64>, by: f64) -> Rect<f64> {
    Rect::new(Coord { x: r.min().x - by, y: r.min().y - by }, Coord { x: r.max().x + by, y: r.max().y + by })
}

fn overlaps(a: &Rect<f64>, b: &Rect<f64>) -> bool {
    a.min().x <= b.max().x && b.min().x <= a.max().x && a.min().y <= b.max().y && b.min().y <= a.max().y
}

/// A segment is adjacent to a block iff its geometry intersects the block
/// polygon dilated by `buffer` meters.
pub fn associate_segments(blocks: &[Block], network: &StreetNetwork, buffer: f64) -> Result<BlockAdjacency> {
    if !(buffer >= 0.0) {
        return Err(Error::OutOfRange { name: "buffer".into(), value: buffer });
    }
    let seg_boxes: Vec<Option<Rect<f64>>> = network.segments.iter().map(|s| s.geometry.bounding_rect()).collect();
    let mut out = BlockAdjacency::default();
    for block in blocks {
        let bbox = block.polygon.bounding_rect().map(|r| expand(r, buffer));
        let adjacent: Vec<usize> = network
            .segments
            .iter()
            .enumerate()
            .filter(|(k, _)| match (&bbox, &seg_boxes[*k]) {
                (Some(b), Some(s)) => overlaps(b, s),
                _ => false,
            })
            .filter(|(_, seg)| Euclidean.distance(&seg.geometry, &block.polygon) <= buffer)
            .map(|(k, _)| k)
            .collect();
        if adjacent.is_empty() {
            log::warn!("block {} has no adjacent street segment", block.id);
            out.isolated.push(block.id.clone());
        }
        out.segments_of.push(adjacent);
    }
    Ok(out)
}

/// How segment scores are reduced onto a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Maximum adjacent segment score.
    #[default]
    Max,
    /// Maximum times the share of adjacent segments above the tier's 75th
    /// percentile segment score.
    FrontageWeighted,
}

/// Per-block, per-tier accessibility. Rows are blocks, columns are tiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessibilityTensor {
    pub values: Vec<Vec<f64>>,
    pub tier_count: usize,
}

impl AccessibilityTensor {
    pub fn new(values: Vec<Vec<f64>>, tier_count: usize) -> Result<Self> {
        if let Some(row) = values.iter().find(|r| r.len() != tier_count) {
            return Err(Error::DimensionMismatch { what: "tensor row", expected: tier_count, actual: row.len() });
        }
        Ok(AccessibilityTensor { values, tier_count })
    }

    pub fn block_count(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, block: usize, tier: usize) -> f64 {
        self.values[block][tier]
    }

    pub fn column(&self, tier: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[tier]).collect()
    }
}

/// `A_{i,ℓ} = max_{e ∈ 𝒩(i)} S_e` (or the frontage-weighted variant); blocks
/// without adjacent segments score 0.
pub fn block_accessibility(
    scores: &[SegmentScoreMix],
    adjacency: &BlockAdjacency,
    aggregation: Aggregation,
) -> Result<AccessibilityTensor> {
    let thresholds: Vec<f64> = scores.iter().map(|s| quantile(&s.scores, 0.75)).collect();
    let mut values = Vec::with_capacity(adjacency.segments_of.len());
    for segs in &adjacency.segments_of {
        let mut row = Vec::with_capacity(scores.len());
        for (tier, mix) in scores.iter().enumerate() {
            let mut max = 0.0f64;
            let mut above = 0usize;
            for &e in segs {
                let s = *mix.scores.get(e).ok_or(Error::DimensionMismatch {
                    what: "segment scores",
                    expected: e + 1,
                    actual: mix.scores.len(),
                })?;
                max = max.max(s);
                if s > thresholds[tier] {
                    above += 1;
                }
            }
            row.push(match aggregation {
                Aggregation::Max => max,
                Aggregation::FrontageWeighted if segs.is_empty() => 0.0,
                Aggregation::FrontageWeighted => max * above as f64 / segs.len() as f64,
            });
        }
        values.push(row);
    }
    AccessibilityTensor::new(values, scores.len())
}

/// Per-tier min-max; a constant tier becomes all zeros.
pub fn normalize_per_tier(tensor: &AccessibilityTensor) -> AccessibilityTensor {
    let columns: Vec<Vec<f64>> = (0..tensor.tier_count).map(|t| min_max(&tensor.column(t))).collect();
    let values = (0..tensor.block_count()).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
    AccessibilityTensor { values, tier_count: tensor.tier_count }
}

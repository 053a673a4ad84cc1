//! Accessibility-weighted FAR, heights and construction diagnostics.

use serde::{Deserialize, Serialize};

use crate::allocator::{AllocationResult, AREA_EPS};
use crate::blockmap::AccessibilityTensor;
use crate::error::{Error, Result};
use crate::landuse::{LandUse, UseMap};

pub const DEFAULT_FAR_ANCHOR: f64 = 0.8;
pub const DEFAULT_FOOTPRINT_RATIO: f64 = 0.5;
pub const DEFAULT_STOREY_HEIGHT: f64 = 3.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    /// One line per use against `B_u = γ*_u · B_total`.
    #[default]
    PerUse,
    /// One line over every lot against `B_total`.
    Joint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityConfig {
    pub b_total: f64,
    pub construction_shares: UseMap<f64>,
    pub far_anchor: f64,
    pub footprint_ratio: f64,
    /// Per-use overrides of `footprint_ratio`.
    #[serde(default)]
    pub footprint_by_use: Option<UseMap<f64>>,
    pub storey_height: f64,
    #[serde(default)]
    pub fit: FitMode,
}

impl IntensityConfig {
    pub fn new(b_total: f64, construction_shares: UseMap<f64>) -> Self {
        IntensityConfig {
            b_total,
            construction_shares,
            far_anchor: DEFAULT_FAR_ANCHOR,
            footprint_ratio: DEFAULT_FOOTPRINT_RATIO,
            footprint_by_use: None,
            storey_height: DEFAULT_STOREY_HEIGHT,
            fit: FitMode::PerUse,
        }
    }

    fn footprint(&self, u: LandUse) -> f64 {
        self.footprint_by_use.map_or(self.footprint_ratio, |m| m[u])
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("b_total", self.b_total, self.b_total > 0.0),
            ("far_anchor", self.far_anchor, self.far_anchor > 0.0),
            ("storey_height", self.storey_height, self.storey_height > 0.0),
        ];
        for (name, value, ok) in checks {
            if !(ok && value.is_finite()) {
                return Err(Error::OutOfRange { name: name.into(), value });
            }
        }
        let fps: Vec<f64> = match self.footprint_by_use {
            Some(m) => m.0.to_vec(),
            None => vec![self.footprint_ratio],
        };
        if let Some(&f) = fps.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
            return Err(Error::BadFootprint(f));
        }
        for (_, g) in self.construction_shares.iter() {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(Error::OutOfRange { name: "construction share".into(), value: g });
            }
        }
        Ok(())
    }
}

/// `Ã_i = Σ_ℓ ρ_ℓ A_{i,ℓ}`. Weights not summing to one are renormalized.
pub fn weighted_accessibility(tensor: &AccessibilityTensor, rho: &[f64]) -> Result<Vec<f64>> {
    if rho.len() != tensor.tier_count {
        return Err(Error::DimensionMismatch { what: "tier weights", expected: tensor.tier_count, actual: rho.len() });
    }
    if let Some(&bad) = rho.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
        return Err(Error::OutOfRange { name: "tier weight".into(), value: bad });
    }
    let sum: f64 = rho.iter().sum();
    if !(sum > 0.0) {
        return Err(Error::OutOfRange { name: "tier weight sum".into(), value: sum });
    }
    if (sum - 1.0).abs() > 1e-9 {
        log::warn!("tier weights sum to {sum}, renormalizing");
    }
    Ok(tensor.values.iter().map(|row| row.iter().zip(rho).map(|(a, r)| a * r / sum).sum()).collect())
}

/// One buildable piece: the area of a block given to one use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lot {
    pub block: usize,
    #[serde(rename = "use")]
    pub land_use: LandUse,
    pub area: f64,
    pub access: f64,
}

/// Splits every block into per-use lots.
pub fn lots_from_allocation(allocation: &AllocationResult, access: &[f64]) -> Result<Vec<Lot>> {
    if access.len() != allocation.x.len() {
        return Err(Error::DimensionMismatch {
            what: "accessibility",
            expected: allocation.x.len(),
            actual: access.len(),
        });
    }
    let mut lots = Vec::new();
    for (block, row) in allocation.x.iter().enumerate() {
        for (land_use, area) in row.iter() {
            if area > AREA_EPS {
                lots.push(Lot { block, land_use, area, access: access[block] });
            }
        }
    }
    Ok(lots)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarLine {
    pub alpha: f64,
    pub beta: f64,
}

/// Slope anchored so the least accessible lot sits at `far_anchor`, clamped
/// non-negative; the intercept then meets `b_target` exactly.
pub fn fit_far_line(lots: &[(f64, f64)], b_target: f64, far_anchor: f64) -> Result<FarLine> {
    let area: f64 = lots.iter().map(|l| l.0).sum();
    if lots.is_empty() || !(area > 0.0) {
        return Err(Error::ZeroArea);
    }
    let avg = b_target / area;
    let mean_access = lots.iter().map(|(a, x)| a * x).sum::<f64>() / area;
    let min_access = lots.iter().map(|l| l.1).fold(f64::INFINITY, f64::min);
    let denom = min_access - mean_access;
    let alpha =
        if denom.abs() <= 1e-12 * mean_access.abs().max(1.0) { 0.0 } else { ((far_anchor - avg) / denom).max(0.0) };
    Ok(FarLine { alpha, beta: avg - mean_access * alpha })
}

/// `FAR = α·Ã + β`, floored at zero. When the floor bites the positive part is
/// rescaled so `Σ FAR·area` still equals the line's implied total.
pub fn assign_far(lots: &[(f64, f64)], line: FarLine) -> Vec<f64> {
    let raw: Vec<f64> = lots.iter().map(|&(_, x)| line.alpha * x + line.beta).collect();
    if raw.iter().all(|&f| f >= 0.0) {
        return raw;
    }
    log::warn!("negative FAR floored at zero");
    let target: f64 = lots.iter().zip(&raw).map(|((a, _), f)| a * f).sum();
    let floored: Vec<f64> = raw.iter().map(|f| f.max(0.0)).collect();
    let built: f64 = lots.iter().zip(&floored).map(|((a, _), f)| a * f).sum();
    if built > 0.0 && target > 0.0 {
        floored.iter().map(|f| f * target / built).collect()
    } else {
        floored
    }
}

/// `H = FAR / footprint_ratio · φ`.
pub fn height(far: f64, footprint_ratio: f64, storey_height: f64) -> Result<f64> {
    if !(footprint_ratio > 0.0 && footprint_ratio <= 1.0) {
        return Err(Error::BadFootprint(footprint_ratio));
    }
    Ok(far / footprint_ratio * storey_height)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstructionReport {
    pub built: UseMap<f64>,
    pub shares: UseMap<f64>,
    pub d_b: f64,
    pub d_cs: f64,
}

/// `B̂_u`, `γ̂_u`, `D_B = (B_total − Σ B̂)²` and `D_CS = Σ (γ̂ − γ*)²`.
pub fn construction_diagnostics(
    lots: &[Lot],
    far: &[f64],
    target: &UseMap<f64>,
    b_total: f64,
) -> Result<ConstructionReport> {
    let mut built = UseMap([0.0; 8]);
    for (lot, f) in lots.iter().zip(far) {
        built[lot.land_use] += f * lot.area;
    }
    let total = built.sum();
    let shares = built.normalized().ok_or(Error::ZeroBuiltArea)?;
    let d_cs = LandUse::ALL.iter().map(|&u| (shares[u] - target[u]).powi(2)).sum();
    Ok(ConstructionReport { built, shares, d_b: (b_total - total).powi(2), d_cs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityResult {
    pub lots: Vec<Lot>,
    pub far: Vec<f64>,
    pub height: Vec<f64>,
    /// Fitted line per use (per-use mode) or a single entry keyed `None`.
    pub lines: Vec<(Option<LandUse>, FarLine)>,
    pub report: ConstructionReport,
}

pub fn run_intensity(allocation: &AllocationResult, access: &[f64], cfg: &IntensityConfig) -> Result<IntensityResult> {
    cfg.validate()?;
    let lots = lots_from_allocation(allocation, access)?;
    let mut far = vec![0.0; lots.len()];
    let mut lines = Vec::new();
    match cfg.fit {
        FitMode::Joint => {
            let pairs: Vec<(f64, f64)> = lots.iter().map(|l| (l.area, l.access)).collect();
            let line = fit_far_line(&pairs, cfg.b_total, cfg.far_anchor)?;
            far = assign_far(&pairs, line);
            lines.push((None, line));
        }
        FitMode::PerUse => {
            for &u in &LandUse::ALL {
                let idx: Vec<usize> = (0..lots.len()).filter(|&k| lots[k].land_use == u).collect();
                if idx.is_empty() {
                    continue;
                }
                let pairs: Vec<(f64, f64)> = idx.iter().map(|&k| (lots[k].area, lots[k].access)).collect();
                let line = fit_far_line(&pairs, cfg.construction_shares[u] * cfg.b_total, cfg.far_anchor)?;
                for (k, f) in idx.into_iter().zip(assign_far(&pairs, line)) {
                    far[k] = f;
                }
                lines.push((Some(u), line));
            }
        }
    }
    let height = lots
        .iter()
        .zip(&far)
        .map(|(l, &f)| height(f, cfg.footprint(l.land_use), cfg.storey_height))
        .collect::<Result<Vec<_>>>()?;
    let report = construction_diagnostics(&lots, &far, &cfg.construction_shares, cfg.b_total)?;
    Ok(IntensityResult { lots, far, height, lines, report })
}

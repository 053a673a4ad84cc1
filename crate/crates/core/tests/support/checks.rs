//! Independent checkers shared by the property suites.

#![allow(dead_code)]

use accessplan::allocator::{AllocationResult, AREA_EPS};
use accessplan::basins::ClusterHierarchy;
use accessplan::blockmap::AccessibilityTensor;
use accessplan::policy::{Dimension, PolicySpace};

/// Replays the grant log and reports every non-forced grant that skipped a
/// better block still holding area in the same cluster. Good uses must take
/// the highest score first, bad uses the lowest.
pub fn grant_order_violations(
    alloc: &AllocationResult,
    tensor: &AccessibilityTensor,
    hierarchy: &ClusterHierarchy,
) -> Vec<String> {
    let mut remaining = alloc.lot_area.clone();
    let mut out = Vec::new();
    for (k, g) in alloc.grants.iter().enumerate() {
        let score = tensor.get(g.block, g.tier);
        if !g.forced {
            for &j in &hierarchy.tier(g.tier).clusters[g.cluster].members {
                if j == g.block || remaining[j] <= AREA_EPS {
                    continue;
                }
                let other = tensor.get(j, g.tier);
                let skipped = if g.land_use.is_bad() { other < score } else { other > score };
                if skipped {
                    out.push(format!(
                        "grant {k}: {} to block {} (score {score}) while block {j} (score {other}) had {}",
                        g.land_use, g.block, remaining[j]
                    ));
                }
            }
        }
        remaining[g.block] -= g.amount;
        if g.forced || remaining[g.block] <= AREA_EPS {
            remaining[g.block] = 0.0;
        }
    }
    out
}

/// O(n²) dominance scan.
pub fn brute_force_front(points: &[Vec<f64>]) -> Vec<usize> {
    let dominates = |a: &[f64], b: &[f64]| {
        let mut strict = false;
        for (x, y) in a.iter().zip(b) {
            if x > y {
                return false;
            }
            strict |= x < y;
        }
        strict
    };
    (0..points.len()).filter(|&i| !(0..points.len()).any(|j| dominates(&points[j], &points[i]))).collect()
}

/// Continuous radius bands that never overlap, with priority and share sampling on.
pub fn wide_policy_space() -> PolicySpace {
    PolicySpace {
        radii: vec![
            Dimension::Continuous { lo: 1000.0, hi: 1600.0 },
            Dimension::Continuous { lo: 500.0, hi: 950.0 },
            Dimension::Continuous { lo: 150.0, hi: 450.0 },
        ],
        sample_priority: true,
        sample_shares: true,
        ..PolicySpace::default()
    }
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

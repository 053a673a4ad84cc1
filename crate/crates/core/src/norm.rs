//! Min-max scaling shared by every stage that normalizes scores.

/// Scales `values` to `[0, 1]`. A constant (or empty) input maps to all zeros.
/// Non-finite entries are treated as missing and map to 0.
pub fn min_max(values: &[f64]) -> Vec<f64> {
    match range(values) {
        Some((lo, hi)) if hi > lo => {
            values.iter().map(|&v| if v.is_finite() { ((v - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 }).collect()
        }
        _ => vec![0.0; values.len()],
    }
}

/// `(min, max)` over the finite entries.
pub fn range(values: &[f64]) -> Option<(f64, f64)> {
    values.iter().copied().filter(|v| v.is_finite()).fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

/// Linear-interpolated quantile of unsorted data (0 for empty input).
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

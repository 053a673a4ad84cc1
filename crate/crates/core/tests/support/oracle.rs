//! Brute-force references used by the centrality and Pareto tests.
//!
//! Nothing here calls the library's search or sorting code: all-pairs costs
//! come from Floyd-Warshall and shortest paths are enumerated one by one.
#![allow(dead_code, clippy::too_many_arguments, clippy::needless_range_loop)]

use accessplan::netgraph::{CostKind, SegmentGraph, StreetNetwork};
use geo::LineString;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INF: u64 = u64::MAX / 4;

fn key(metric: u64, angular: u64, cost: CostKind) -> (u64, u64) {
    match cost {
        CostKind::Metric => (metric, 0),
        CostKind::Angular => (angular, metric),
    }
}

fn add(a: (u64, u64), b: (u64, u64)) -> (u64, u64) {
    if a.0 >= INF || b.0 >= INF {
        (INF, INF)
    } else {
        (a.0 + b.0, a.1 + b.1)
    }
}

fn floyd(graph: &SegmentGraph, cost: CostKind) -> Vec<Vec<(u64, u64)>> {
    let n = graph.len();
    let mut d = vec![vec![(INF, INF); n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = (0, 0);
        for s in graph.neighbors(i) {
            row[s.to] = row[s.to].min(key(s.metric, s.angular, cost));
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = add(d[i][k], d[k][j]);
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

pub struct OracleResult {
    pub choice: Vec<f64>,
    pub integration: Vec<f64>,
    /// True when every counted pair had exactly one shortest path.
    pub unique_paths: bool,
}

/// Enumerates every shortest path from `s` to `t` by depth-first search and
/// counts, per intermediate vertex, how many of them pass through it.
fn enumerate_paths(
    graph: &SegmentGraph,
    dk: &[Vec<(u64, u64)>],
    cost: CostKind,
    s: usize,
    t: usize,
) -> (u64, Vec<u64>) {
    let n = graph.len();
    let target = dk[s][t];
    let mut through = vec![0u64; n];
    let mut total = 0u64;
    let mut path = vec![s];
    let mut on_path = vec![false; n];
    on_path[s] = true;

    fn dfs(
        graph: &SegmentGraph,
        dk: &[Vec<(u64, u64)>],
        cost: CostKind,
        t: usize,
        target: (u64, u64),
        acc: (u64, u64),
        path: &mut Vec<usize>,
        on_path: &mut Vec<bool>,
        total: &mut u64,
        through: &mut Vec<u64>,
    ) {
        let v = *path.last().unwrap();
        if v == t {
            if acc == target {
                *total += 1;
                for &x in &path[1..path.len() - 1] {
                    through[x] += 1;
                }
            }
            return;
        }
        for s in graph.neighbors(v) {
            let w = s.to;
            if on_path[w] {
                continue;
            }
            let next = add(acc, key(s.metric, s.angular, cost));
            // Admissible prune: the remaining cost is at least dk[w][t].
            if add(next, dk[w][t]) > target {
                continue;
            }
            on_path[w] = true;
            path.push(w);
            dfs(graph, dk, cost, t, target, next, path, on_path, total, through);
            path.pop();
            on_path[w] = false;
        }
    }

    dfs(graph, dk, cost, t, target, (0, 0), &mut path, &mut on_path, &mut total, &mut through);
    (total, through)
}

pub fn centrality_oracle(graph: &SegmentGraph, cost: CostKind, radius: f64) -> OracleResult {
    let n = graph.len();
    let dm = floyd(graph, CostKind::Metric);
    let dk = floyd(graph, cost);
    let limit = if radius.is_infinite() { INF - 1 } else { (radius * 1e6).round() as u64 };
    let within = |s: usize, t: usize| s != t && dm[s][t].0 < INF && dm[s][t].0 <= limit;

    let mut choice = vec![0.0; n];
    let mut unique = true;
    for s in 0..n {
        for t in (s + 1)..n {
            if !within(s, t) {
                continue;
            }
            let (total, through) = enumerate_paths(graph, &dk, cost, s, t);
            assert!(total > 0, "reachable pair without a path");
            if total > 1 {
                unique = false;
            }
            for e in 0..n {
                choice[e] += through[e] as f64 / total as f64;
            }
        }
    }

    let integration = (0..n)
        .map(|s| {
            let mut sum = 0.0;
            let mut reached = 0;
            for t in 0..n {
                if within(s, t) {
                    sum += dk[s][t].0 as f64 / 1e6;
                    reached += 1;
                }
            }
            if reached == 0 {
                0.0
            } else {
                1.0 / sum.max(1e-9)
            }
        })
        .collect();
    OracleResult { choice, integration, unique_paths: unique }
}

/// Random street network with at most `max_segments` segments, built on a
/// (possibly jittered) lattice. Unjittered lattices produce many equal-cost
/// paths; jittered ones almost never do.
pub fn random_network(seed: u64, max_segments: usize) -> StreetNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = rng.random_range(2..=5usize);
    let h = rng.random_range(2..=4usize);
    let jitter = if rng.random_bool(0.5) { rng.random_range(5.0..25.0) } else { 0.0 };
    let spacing = 100.0;
    let mut pts = Vec::new();
    for j in 0..h {
        for i in 0..w {
            let dx = if jitter > 0.0 { rng.random_range(-jitter..jitter) } else { 0.0 };
            let dy = if jitter > 0.0 { rng.random_range(-jitter..jitter) } else { 0.0 };
            pts.push((i as f64 * spacing + dx, j as f64 * spacing + dy));
        }
    }
    let mut edges = Vec::new();
    for j in 0..h {
        for i in 0..w {
            let a = j * w + i;
            if i + 1 < w {
                edges.push((a, a + 1));
            }
            if j + 1 < h {
                edges.push((a, a + w));
            }
            if i + 1 < w && j + 1 < h && rng.random_bool(0.15) {
                edges.push((a, a + w + 1));
            }
        }
    }
    let keep = rng.random_range(0.55..1.0);
    let mut lines = Vec::new();
    for (k, &(a, b)) in edges.iter().enumerate() {
        if lines.len() >= max_segments {
            break;
        }
        if !rng.random_bool(keep) {
            continue;
        }
        let (pa, pb) = (pts[a], pts[b]);
        let mut coords = vec![pa];
        if rng.random_bool(0.2) {
            // A bent polyline with a kink in the middle.
            let mid =
                ((pa.0 + pb.0) / 2.0 + rng.random_range(-8.0..8.0), (pa.1 + pb.1) / 2.0 + rng.random_range(-8.0..8.0));
            coords.push(mid);
        }
        coords.push(pb);
        lines.push((format!("e{k}"), LineString::from(coords)));
    }
    if lines.is_empty() {
        lines.push(("e0".to_string(), LineString::from(vec![pts[0], pts[1]])));
    }
    StreetNetwork::from_polylines(lines, 0.5).expect("valid random network")
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

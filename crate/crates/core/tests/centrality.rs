mod support;

use accessplan::netgraph::{
    build_segment_graph, compute_centrality, mix_scores, tiered_scores, CentralityKind, CostKind, MixCosts,
    SegmentGraph, StreetNetwork,
};
use accessplan::norm::min_max;
use accessplan::synth::make_synthetic_grid;
use proptest::prelude::*;
use support::oracle::{centrality_oracle, close, random_network};

const RADII: [f64; 4] = [f64::INFINITY, 450.0, 250.0, 120.0];

fn check_against_oracle(graph: &SegmentGraph, cost: CostKind, radius: f64) {
    let oracle = centrality_oracle(graph, cost, radius);
    let choice = compute_centrality(graph, CentralityKind::Choice, cost, radius).unwrap();
    let integ = compute_centrality(graph, CentralityKind::Integration, cost, radius).unwrap();
    for i in 0..graph.len() {
        if oracle.unique_paths {
            assert!(
                close(choice.scores[i], oracle.choice[i], 1e-12),
                "choice {i}: {} vs {}",
                choice.scores[i],
                oracle.choice[i]
            );
        }
        assert!(
            close(choice.scores[i], oracle.choice[i], 1e-9),
            "choice {i}: {} vs {}",
            choice.scores[i],
            oracle.choice[i]
        );
        assert!(close(integ.scores[i], oracle.integration[i], 1e-9), "integration {i}");
    }
}

#[test]
fn random_graphs_match_brute_force() {
    for seed in 0..60 {
        let net = random_network(seed, 30);
        let g = build_segment_graph(&net, 0.5).unwrap();
        for cost in [CostKind::Metric, CostKind::Angular] {
            for r in RADII {
                check_against_oracle(&g, cost, r);
            }
        }
    }
}

#[test]
fn grid_ties_match_brute_force() {
    let (net, _) = make_synthetic_grid(4, 100.0).unwrap();
    let g = build_segment_graph(&net, 0.5).unwrap();
    assert_eq!(g.len(), 24);
    for cost in [CostKind::Metric, CostKind::Angular] {
        for r in RADII {
            check_against_oracle(&g, cost, r);
        }
    }
}

fn relabel(net: &StreetNetwork, perm: &[usize]) -> StreetNetwork {
    let mut out = net.clone();
    out.segments = perm.iter().map(|&p| net.segments[p].clone()).collect();
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn choice_monotone_in_radius(seed in 0u64..10_000, r in 50.0f64..400.0, extra in 1.0f64..300.0) {
        let g = build_segment_graph(&random_network(seed, 30), 0.5).unwrap();
        for cost in [CostKind::Metric, CostKind::Angular] {
            let small = compute_centrality(&g, CentralityKind::Choice, cost, r).unwrap();
            let large = compute_centrality(&g, CentralityKind::Choice, cost, r + extra).unwrap();
            for (a, b) in small.scores.iter().zip(&large.scores) {
                prop_assert!(b + 1e-9 >= *a);
            }
        }
    }

    #[test]
    fn permutation_equivariance(seed in 0u64..10_000, shuffle_seed in 0u64..1000) {
        use rand::{seq::SliceRandom, SeedableRng};
        let net = random_network(seed, 30);
        let mut perm: Vec<usize> = (0..net.segments.len()).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(shuffle_seed));
        let g = build_segment_graph(&net, 0.5).unwrap();
        let gp = build_segment_graph(&relabel(&net, &perm), 0.5).unwrap();
        for kind in [CentralityKind::Choice, CentralityKind::Integration] {
            for cost in [CostKind::Metric, CostKind::Angular] {
                let a = compute_centrality(&g, kind, cost, 300.0).unwrap();
                let b = compute_centrality(&gp, kind, cost, 300.0).unwrap();
                for (new, &old) in perm.iter().enumerate() {
                    prop_assert!(close(b.scores[new], a.scores[old], 1e-9));
                }
            }
        }
    }

    #[test]
    fn degenerate_sigma_preserves_argmax(seed in 0u64..10_000) {
        let g = build_segment_graph(&random_network(seed, 30), 0.5).unwrap();
        let c = compute_centrality(&g, CentralityKind::Choice, CostKind::Metric, 400.0).unwrap();
        let i = compute_centrality(&g, CentralityKind::Integration, CostKind::Angular, 400.0).unwrap();
        let argmax = |v: &[f64]| v.iter().enumerate().fold(0, |b, (k, x)| if *x > v[b] { k } else { b });
        prop_assert_eq!(argmax(&mix_scores(&c, &i, 1.0).unwrap().scores), argmax(&c.scores));
        prop_assert_eq!(argmax(&mix_scores(&c, &i, 0.0).unwrap().scores), argmax(&i.scores));
    }
}

fn variance(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
}

#[test]
fn knee_radii_give_three_tiers() {
    let (net, _) = make_synthetic_grid(6, 100.0).unwrap();
    let g = build_segment_graph(&net, 0.5).unwrap();
    let tiers = tiered_scores(&g, &[1200.0, 900.0, 350.0], &[0.2, 0.2, 0.8], MixCosts::default()).unwrap();
    assert_eq!(tiers.len(), 3);
    assert!(tiers.iter().all(|t| t.scores.len() == 60));
}

#[test]
fn coarse_tier_smoother_than_fine_on_grid() {
    // Variance of each min-max normalized field, 5x5-node grid. The oracle
    // fixes the metric integration reference independently of the library.
    let (net, _) = make_synthetic_grid(5, 100.0).unwrap();
    let g = build_segment_graph(&net, 0.5).unwrap();
    let oracle_coarse = centrality_oracle(&g, CostKind::Metric, 1600.0);
    let oracle_fine = centrality_oracle(&g, CostKind::Metric, 250.0);
    assert!(variance(&min_max(&oracle_coarse.integration)) < variance(&min_max(&oracle_fine.integration)));
    assert!(variance(&min_max(&oracle_coarse.choice)) < variance(&min_max(&oracle_fine.choice)));

    for kind in [CentralityKind::Choice, CentralityKind::Integration] {
        for cost in [CostKind::Metric, CostKind::Angular] {
            let coarse = compute_centrality(&g, kind, cost, 1600.0).unwrap();
            let fine = compute_centrality(&g, kind, cost, 250.0).unwrap();
            assert!(variance(&min_max(&coarse.scores)) < variance(&min_max(&fine.scores)), "{kind} {cost}");
        }
    }
    let tiers = tiered_scores(&g, &[1600.0, 700.0, 250.0], &[1.0, 1.0, 1.0], MixCosts::default()).unwrap();
    assert!(variance(&tiers[0].scores) < variance(&tiers[2].scores));
}

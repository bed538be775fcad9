//! Property tests for the flow solver against an augmenting-path oracle kept
//! in this file.

use std::collections::VecDeque;

use proptest::prelude::*;

use cutlab::capacity::{replicate_stream, sample_field, CapacityLaw};
use cutlab::cutgeom::{continuous_representation, reachable_set};
use cutlab::flow::{is_cutset, max_flow, min_cardinality_cut};
use cutlab::geometry::{DomainSpec, DomainSpecJson, Rational};
use cutlab::lattice::{build_lattice, LatticeDomain, LatticeGraph};

fn boxed(sides: &[u8], axis: usize) -> DomainSpec {
    let bounds: Vec<String> = sides.iter().map(|s| format!("[0, {s}]")).collect();
    let json = format!(
        r#"{{"d": {}, "solid": [{{"box": [{}]}}], "gamma1": [{{"face": "x{axis}-min"}}], "gamma2": [{{"face": "x{axis}-max"}}]}}"#,
        sides.len(),
        bounds.join(", ")
    );
    serde_json::from_str::<DomainSpecJson>(&json).unwrap().build().unwrap()
}

fn lattice_strategy() -> impl Strategy<Value = LatticeDomain> {
    (2usize..=3)
        .prop_flat_map(|d| (prop::collection::vec(1u8..=2, d), 0..d, 1u32..=if d == 2 { 5 } else { 2 }))
        .prop_map(|(sides, axis, n)| build_lattice(&boxed(&sides, axis), n).unwrap())
}

/// Lattice plus one capacity numerator in `0..=4` per edge.
fn instance() -> impl Strategy<Value = (LatticeDomain, Vec<i64>)> {
    lattice_strategy().prop_flat_map(|l| {
        let m = l.graph.num_edges();
        (Just(l), prop::collection::vec(0i64..=4, m))
    })
}

/// Shortest augmenting paths on unit-split arcs.
fn augmenting_path_flow(g: &LatticeGraph, caps: &[i64], sources: &[u32], sinks: &[u32]) -> i64 {
    let nv = g.num_vertices();
    let (s, t) = (nv, nv + 1);
    let mut residual = vec![std::collections::HashMap::<usize, i64>::new(); nv + 2];
    let mut add = |a: usize, b: usize, c: i64| {
        *residual[a].entry(b).or_default() += c;
        *residual[b].entry(a).or_default() += c;
    };
    let big = caps.iter().sum::<i64>() + 1;
    for (e, [a, b]) in g.edges().iter().enumerate() {
        add(*a as usize, *b as usize, caps[e]);
    }
    sources.iter().for_each(|&v| add(s, v as usize, big));
    sinks.iter().for_each(|&v| add(v as usize, t, big));
    let mut total = 0;
    loop {
        let mut prev = vec![usize::MAX; nv + 2];
        prev[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            let next: Vec<usize> = residual[u].iter().filter(|(_, c)| **c > 0).map(|(w, _)| *w).collect();
            for w in next {
                if prev[w] == usize::MAX {
                    prev[w] = u;
                    queue.push_back(w);
                }
            }
        }
        if prev[t] == usize::MAX {
            return total;
        }
        let mut path = vec![t];
        while *path.last().unwrap() != s {
            path.push(prev[*path.last().unwrap()]);
        }
        let push = path.windows(2).map(|w| residual[w[1]][&w[0]]).min().unwrap();
        for w in path.windows(2) {
            *residual[w[1]].get_mut(&w[0]).unwrap() -= push;
            *residual[w[0]].get_mut(&w[1]).unwrap() += push;
        }
        total += push;
    }
}

fn bfs_separates(g: &LatticeGraph, removed: &[bool], sources: &[u32], sinks: &[u32]) -> bool {
    let mut seen = vec![false; g.num_vertices()];
    let mut queue: VecDeque<u32> = sources.iter().copied().collect();
    sources.iter().for_each(|&v| seen[v as usize] = true);
    while let Some(u) = queue.pop_front() {
        for &(w, e) in g.neighbors(u) {
            if !removed[e as usize] && !seen[w as usize] {
                seen[w as usize] = true;
                queue.push_back(w);
            }
        }
    }
    sinks.iter().all(|&v| !seen[v as usize])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn flow_matches_augmenting_path_oracle((l, caps) in instance()) {
        let flow = max_flow(&l.graph, &caps, &l.gamma1, &l.gamma2).unwrap();
        prop_assert_eq!(flow.value, augmenting_path_flow(&l.graph, &caps, &l.gamma1, &l.gamma2));
        prop_assert!(flow.verify(&l.graph, &caps, &l.gamma1, &l.gamma2).is_ok());
        let cut: i64 = flow.cut.iter().map(|&e| caps[e as usize]).sum();
        prop_assert_eq!(cut, flow.value);
    }

    #[test]
    fn every_cutset_costs_at_least_the_flow((l, caps) in instance(), mask_seed in any::<u64>()) {
        let flow = max_flow(&l.graph, &caps, &l.gamma1, &l.gamma2).unwrap();
        // Random supersets of the minimal cut and random edge sets alike.
        for k in 0..8u64 {
            let bits = replicate_stream(mask_seed, k);
            let mut removed: Vec<bool> = (0..l.graph.num_edges()).map(|e| (bits >> (e % 64)) & 1 == 1).collect();
            if k % 2 == 0 {
                flow.cut.iter().for_each(|&e| removed[e as usize] = true);
            }
            let edges: Vec<u32> = (0..removed.len() as u32).filter(|&e| removed[e as usize]).collect();
            let separates = bfs_separates(&l.graph, &removed, &l.gamma1, &l.gamma2);
            prop_assert_eq!(separates, is_cutset(&l.graph, &edges, &l.gamma1, &l.gamma2));
            if separates {
                prop_assert!(edges.iter().map(|&e| caps[e as usize]).sum::<i64>() >= flow.value);
            }
        }
    }

    #[test]
    fn raising_capacities_never_lowers_the_flow((l, caps) in instance(), bumps in prop::collection::vec(0i64..=2, 64)) {
        let raised: Vec<i64> = caps.iter().enumerate().map(|(e, c)| c + bumps[e % bumps.len()]).collect();
        let low = max_flow(&l.graph, &caps, &l.gamma1, &l.gamma2).unwrap().value;
        let high = max_flow(&l.graph, &raised, &l.gamma1, &l.gamma2).unwrap().value;
        prop_assert!(low <= high);
    }

    #[test]
    fn flow_scales_with_capacities((l, caps) in instance(), k in 1i64..=5) {
        let scaled: Vec<i64> = caps.iter().map(|c| c * k).collect();
        let base = max_flow(&l.graph, &caps, &l.gamma1, &l.gamma2).unwrap().value;
        prop_assert_eq!(max_flow(&l.graph, &scaled, &l.gamma1, &l.gamma2).unwrap().value, k * base);
    }

    #[test]
    fn flow_respects_the_cardinality_floor(l in lattice_strategy(), seed in any::<u64>(), a in 1i128..=3) {
        let law = CapacityLaw::two_point(Rational::from_integer(a), Rational::from_integer(a + 2), 0.5).unwrap();
        let field = sample_field(l.graph.num_edges(), &law, seed);
        let flow = max_flow(&l.graph, &field.numerators, &l.gamma1, &l.gamma2).unwrap();
        let mincard = min_cardinality_cut(&l.graph, &l.gamma1, &l.gamma2).unwrap();
        prop_assert_eq!(mincard, augmenting_path_flow(&l.graph, &vec![1; l.graph.num_edges()], &l.gamma1, &l.gamma2));
        prop_assert!(flow.value >= law.atoms()[0].0 * mincard);
    }

    #[test]
    fn reachable_voxels_match_the_source_side((l, caps) in instance()) {
        let flow = max_flow(&l.graph, &caps, &l.gamma1, &l.gamma2).unwrap();
        let reachable = reachable_set(&l.graph, &flow.cut, &l.gamma1);
        prop_assert_eq!(&reachable, &flow.source_side);
        let voxels = continuous_representation(&l.graph, &reachable);
        prop_assert_eq!(voxels.len(), reachable.len());
        for v in l.graph.vertex_ids() {
            prop_assert_eq!(voxels.contains_index(l.graph.coord(v)), reachable.binary_search(&v).is_ok());
        }
    }

    #[test]
    fn replicate_streams_are_distinct(seed in any::<u64>()) {
        let mut seen: Vec<u64> = (0..256).map(|k| replicate_stream(seed, k)).collect();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen.len(), 256);
    }
}

mod common;

use num_rational::BigRational;
use proptest::prelude::*;

use common::{arb_pattern, min_cut_by_enumeration, random_feasible_flow, shared_pair};
use switchctl::decide::{theta, theta_lifted};
use switchctl::flow::{
    arc_images, build_lifted_network, build_small_network, cut_capacity, lift_flow, max_flow,
    max_flow_integral, min_cut, project_flow, verify_flow, ArcLayer, ArcOrigin, FlowAssignment,
};
use switchctl::graph::to_digraph;

#[test]
fn shared_pair_flow_values() {
    let g = to_digraph(&shared_pair());
    assert_eq!(theta(&g, 1, 3).unwrap(), 5);
    assert_eq!(theta(&g, 2, 3).unwrap(), 6);
    assert_eq!(theta_lifted(&g, 1, 3).unwrap(), 5);
    assert_eq!(theta_lifted(&g, 2, 3).unwrap(), 6);
}

#[test]
fn lifted_sizes() {
    let g = to_digraph(&shared_pair());
    let net = build_lifted_network(&g, 1, 3).unwrap();
    // s, t, λ: 2·1, ν: 2·3·2, μ: 3·2
    assert_eq!(net.node_count(), 2 + 2 + 12 + 6);
    assert!(net.arcs().iter().all(|a| a.capacity == 1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn small_and_lifted_values_agree(p in arb_pattern(4, 2), k in 0u64..=2, q in 1u64..=3) {
        let g = to_digraph(&p);
        prop_assert_eq!(theta(&g, k, q).unwrap(), theta_lifted(&g, k, q).unwrap());
    }

    #[test]
    fn value_is_bounded_by_sink_capacity(p in arb_pattern(6, 3), k in 0u64..5, q in 1u64..6) {
        let g = to_digraph(&p);
        let v = theta(&g, k, q).unwrap();
        prop_assert!(v >= 0);
        prop_assert!((v as i128) <= (p.n() as i128) * q as i128);
    }

    #[test]
    fn witness_mode_keeps_the_value(p in arb_pattern(6, 3), k in 0u64..5, q in 1u64..6) {
        let g = to_digraph(&p);
        let a = build_small_network(&g, k, q, false).unwrap();
        let b = build_small_network(&g, k, q, true).unwrap();
        prop_assert_eq!(max_flow_integral(&a).1, max_flow_integral(&b).1);
    }

    #[test]
    fn max_flow_is_feasible_and_cut_is_tight(p in arb_pattern(6, 3), k in 0u64..4, q in 1u64..5, witness in any::<bool>()) {
        let g = to_digraph(&p);
        let net = build_small_network(&g, k, q, witness).unwrap();
        let f = max_flow(&net);
        prop_assert!(verify_flow(&net, &f).unwrap());
        let cut = min_cut(&net, &f).unwrap();
        prop_assert!(cut.contains(&net.source()));
        prop_assert!(!cut.contains(&net.sink()));
        prop_assert_eq!(cut_capacity(&net, &cut), f.integral_value().unwrap() as i128);
    }

    #[test]
    fn max_flow_equals_enumerated_min_cut(p in arb_pattern(5, 3), k in 0u64..3, q in 1u64..4) {
        let net = build_small_network(&to_digraph(&p), k, q, false).unwrap();
        prop_assert_eq!(max_flow_integral(&net).1 as i128, min_cut_by_enumeration(&net));
    }

    #[test]
    fn lifted_arcs_map_to_small_arcs(p in arb_pattern(4, 2), k in 0u64..=2, q in 1u64..=3) {
        let g = to_digraph(&p);
        let small = build_small_network(&g, k, q, false).unwrap();
        let lifted = build_lifted_network(&g, k, q).unwrap();
        let images = arc_images(&lifted, &small).unwrap();
        let mut fiber = vec![0u64; small.arc_count()];
        for (a, &img) in lifted.arcs().iter().zip(&images) {
            let e = &small.arcs()[img];
            prop_assert_eq!(a.origin, e.origin);
            prop_assert_eq!(lifted.nodes()[a.from].project(), small.nodes()[e.from]);
            prop_assert_eq!(lifted.nodes()[a.to].project(), small.nodes()[e.to]);
            fiber[img] += 1;
        }
        // every small arc has a nonempty fiber of the expected size
        for (e, &size) in small.arcs().iter().zip(&fiber) {
            let expected = match e.origin {
                ArcOrigin::SourceControl { .. } => k + 1,
                ArcOrigin::StateSink { .. } => q,
                _ => (k + 1) * q,
            };
            prop_assert_eq!(size, expected);
        }
        // source and sink fibers carry the small capacity in total
        for (e, &size) in small.arcs().iter().zip(&fiber) {
            if e.origin.layer() != ArcLayer::LeftRight {
                prop_assert_eq!(size as i64, e.capacity);
            }
        }
    }

    #[test]
    fn projected_flows_are_feasible(p in arb_pattern(4, 2), k in 0u64..=2, q in 1u64..=3, seed in any::<u64>()) {
        let g = to_digraph(&p);
        let small = build_small_network(&g, k, q, false).unwrap();
        let lifted = build_lifted_network(&g, k, q).unwrap();
        let f_hat = random_feasible_flow(&lifted, seed);
        prop_assert!(verify_flow(&lifted, &f_hat).unwrap());
        let f = project_flow(&f_hat, &lifted, &small).unwrap();
        prop_assert!(verify_flow(&small, &f).unwrap());
        prop_assert_eq!(&f.value, &f_hat.value);
    }

    #[test]
    fn lifted_flows_are_feasible_and_round_trip(p in arb_pattern(4, 2), k in 0u64..=2, q in 1u64..=3, seed in any::<u64>()) {
        let g = to_digraph(&p);
        let small = build_small_network(&g, k, q, false).unwrap();
        let lifted = build_lifted_network(&g, k, q).unwrap();
        let f = random_feasible_flow(&small, seed);
        prop_assert!(verify_flow(&small, &f).unwrap());
        let f_hat = lift_flow(&f, &small, &lifted).unwrap();
        prop_assert!(verify_flow(&lifted, &f_hat).unwrap());
        prop_assert_eq!(&f_hat.value, &f.value);
        prop_assert_eq!(project_flow(&f_hat, &lifted, &small).unwrap(), f);
    }
}

#[test]
fn mismatched_networks_are_rejected() {
    let g = to_digraph(&shared_pair());
    let small = build_small_network(&g, 1, 2, false).unwrap();
    let lifted = build_lifted_network(&g, 1, 3).unwrap();
    let f = FlowAssignment::zero(&small);
    assert!(lift_flow(&f, &small, &lifted).is_err());
    assert!(project_flow(&FlowAssignment::zero(&lifted), &lifted, &small).is_err());
    let short = FlowAssignment {
        values: vec![BigRational::from_integer(0.into()); 1],
        value: BigRational::from_integer(0.into()),
    };
    assert!(verify_flow(&small, &short).is_err());
}

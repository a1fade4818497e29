//! Property tests across graph analysis, diffusion and the optimizer.

use proptest::prelude::*;

use persuasion_core::graph::{believer_components, components};
use persuasion_core::netgen::NetworkInstance;
use persuasion_core::optimizer::{
    evaluate, optimize_network, optimize_public, ExposureTable, OptimizerOptions, ReducedStrategy,
};
use persuasion_core::diffusion::spread;
use persuasion_core::{compute_limits, Connectedness, LimitOptions, ModelParams, PayoffFn, ReceiverType};

fn network() -> impl Strategy<Value = NetworkInstance> {
    (2usize..40).prop_flat_map(|n| {
        (
            proptest::collection::vec(any::<bool>(), n),
            proptest::collection::btree_set((0..n as u32, 0..n as u32), 0..(2 * n)),
        )
            .prop_map(move |(h, pairs)| {
                let types = h
                    .into_iter()
                    .map(|b| if b { ReceiverType::H } else { ReceiverType::L })
                    .collect();
                let mut edges: Vec<(u32, u32)> = pairs
                    .into_iter()
                    .filter(|(u, v)| u != v)
                    .map(|(u, v)| (u.min(v), u.max(v)))
                    .collect();
                edges.sort_unstable();
                edges.dedup();
                NetworkInstance::from_edges(types, vec![1.0; n], &edges).unwrap()
            })
    })
}

fn seeds(n: usize, raw: &[u32]) -> Vec<u32> {
    let mut s: Vec<u32> = raw.iter().map(|&x| x % n as u32).collect();
    s.sort_unstable();
    s.dedup();
    s
}

proptest! {
    #[test]
    fn component_sizes_partition_nodes(net in network()) {
        let c = components(&net);
        prop_assert_eq!(c.sizes.iter().sum::<usize>(), net.n());
        prop_assert!(c.sizes.windows(2).all(|w| w[0] >= w[1]));
        let b = believer_components(&net);
        let hs = net.node_type.iter().filter(|&&t| t == ReceiverType::H).count();
        prop_assert_eq!(b.components.sizes.iter().sum::<usize>(), hs);
    }

    #[test]
    fn spread_is_monotone_and_idempotent(
        net in network(),
        a in proptest::collection::vec(any::<u32>(), 0..4),
        extra in proptest::collection::vec(any::<u32>(), 0..4),
    ) {
        let sharer = |i: usize| net.node_type[i] == ReceiverType::H;
        let small = seeds(net.n(), &a);
        let mut big_raw = a.clone();
        big_raw.extend(extra);
        let big = seeds(net.n(), &big_raw);
        let obs_small = spread(&net, &small, sharer);
        let obs_big = spread(&net, &big, sharer);
        prop_assert!(obs_small.iter().zip(&obs_big).all(|(s, b)| !s || *b));

        let observed_sharers: Vec<u32> = (0..net.n() as u32)
            .filter(|&i| obs_big[i as usize] && sharer(i as usize))
            .collect();
        let again = spread(&net, &observed_sharers, sharer);
        prop_assert!(again.iter().zip(&obs_big).all(|(x, o)| !x || *o));
    }

    #[test]
    fn good_signal_reaches_seed_components(net in network(), raw in proptest::collection::vec(any::<u32>(), 1..4)) {
        let s = seeds(net.n(), &raw);
        let comps = components(&net);
        let hit: Vec<Option<u32>> = s.iter().map(|&i| comps.component_id[i as usize]).collect();
        let observed = spread(&net, &s, |_| true);
        for i in 0..net.n() {
            prop_assert_eq!(observed[i], hit.contains(&comps.component_id[i]));
        }
    }
}

fn model() -> impl Strategy<Value = ModelParams> {
    (
        0.15f64..0.85,
        0.52f64..0.95,
        0.05f64..0.48,
        0.1f64..0.9,
        0.3f64..1.0,
        0.5f64..2.5,
        0.5f64..2.5,
        prop_oneof![
            Just(PayoffFn::Linear),
            Just(PayoffFn::PowerConvex { p: 2.0 }),
            (0.3f64..0.95).prop_map(|cap| PayoffFn::CappedLinear { cap }),
            (0.1f64..1.0).prop_map(|b| PayoffFn::Crra { b }),
        ],
    )
        .prop_map(|(g, mh, ml, ms, q, lh, ll, payoff)| ModelParams {
            f_h: Connectedness::point(lh),
            f_l: Connectedness::point(ll),
            ..ModelParams::island(g, 1.0, q).with_priors(mh, ml, ms).with_payoff(payoff)
        })
}

/// A strategy in the class that `check` accepts, built from four uniforms.
fn feasible(params: &ModelParams, u: [f64; 4]) -> ReducedStrategy {
    let lo = params.mu_l1 / (1.0 - params.mu_l1);
    let hi = params.mu_h1 / (1.0 - params.mu_h1);
    let pi_s1 = u[0];
    let pi_s0 = u[1] * (pi_s1 * lo).min(1.0);
    let pi_sp1 = u[2] * (1.0 - pi_s1);
    let top = (pi_sp1 * hi).min(1.0 - pi_s0);
    let bottom = pi_sp1 * lo;
    if top > bottom * (1.0 + 1e-6) + 1e-9 {
        let pi_sp0 = top - u[3] * (top - bottom) * 0.999;
        ReducedStrategy::new(pi_s1, pi_s0, pi_sp1, pi_sp0)
    } else {
        ReducedStrategy::new(pi_s1, pi_s0, 0.0, 0.0)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn optimizers_dominate_feasible_strategies(
        params in model(),
        draws in proptest::collection::vec(proptest::array::uniform4(0f64..1.0), 20),
    ) {
        let limits = compute_limits(&params, &LimitOptions::default()).unwrap();
        let opts = OptimizerOptions { grid_n: 21, refine_iters: 1, ..Default::default() };
        let net = optimize_network(&params, &limits, &opts).unwrap();
        let public = optimize_public(&params, &opts).unwrap();
        let net_table = ExposureTable::network(&params, &limits);
        let pub_table = ExposureTable::public(&params);
        for u in draws {
            let s = feasible(&params, u);
            prop_assert!(s.validate(&params).is_ok(), "{:?}", s);
            let vn = evaluate(&params, &net_table, &s).value;
            let vp = evaluate(&params, &pub_table, &s).value;
            prop_assert!(vn <= net.value + 1e-9, "network {} beats optimum {} at {:?}", vn, net.value, s);
            prop_assert!(vp <= public.value + 1e-9, "public {} beats optimum {} at {:?}", vp, public.value, s);
        }
    }
}

//! Finite-n diffusion properties on sampled networks.

use rand::Rng;

use persuasion_core::diffusion::{
    equilibrium, select_seeds, spread, NetworkView, ObservationProbs, SeedPolicy, SenderStrategy, SignalSpec,
};
use persuasion_core::netgen::{sample_network, DEFAULT_EDGE_BUDGET};
use persuasion_core::scenarios::voting_params;
use persuasion_core::{compute_limits, LimitOptions, ModelParams, ReceiverType, RngSpec};

fn params() -> ModelParams {
    ModelParams::island(0.5, 3f64.sqrt(), 0.7)
}

#[test]
fn seeding_off_the_giant_stays_local() {
    let n = 100_000;
    let rng = RngSpec::new(31);
    let reps = 20;
    let mut small = 0;
    for k in 0..reps {
        let spec = rng.derive("off_giant", k);
        let view = NetworkView::new(sample_network(&params(), n, &spec, DEFAULT_EDGE_BUDGET).unwrap());
        let outside: Vec<u32> = (0..n as u32).filter(|&i| !view.comps.in_giant(i as usize)).collect();
        let seed = outside[spec.stream("pick", 0).random_range(0..outside.len())];
        let observed = spread(&view.net, &[seed], |_| true);
        let frac = observed.iter().filter(|&&o| o).count() as f64 / n as f64;
        small += usize::from(frac < 0.01);
    }
    assert!(small as f64 >= 0.95 * reps as f64, "{small} of {reps}");
}

#[test]
fn observers_are_confined_to_the_relevant_giant() {
    let n = 100_000;
    let rng = RngSpec::new(32);
    for k in 0..5 {
        let spec = rng.derive("confined", k);
        let view = NetworkView::new(sample_network(&params(), n, &spec, DEFAULT_EDGE_BUDGET).unwrap());
        let mut r = spec.stream("seeds", 0);

        let good = select_seeds(&view, SeedPolicy::OnL1, 1, &mut r);
        let obs = spread(&view.net, &good, |_| true);
        let stray = (0..n).filter(|&i| obs[i] && !view.comps.in_giant(i)).count();
        assert!((stray as f64) < 0.01 * n as f64);

        let int = select_seeds(&view, SeedPolicy::OnLhat1, 1, &mut r);
        let net = &view.net;
        let obs = spread(net, &int, |i| net.node_type[i] == ReceiverType::H);
        let stray = (0..n)
            .filter(|&i| obs[i] && !view.believers.in_giant(i) && !view.believers.giant_neighbor[i])
            .count();
        assert!((stray as f64) < 0.01 * n as f64);
    }
}

#[test]
fn voting_strategy_empty_signal_threshold_matches_d_vote() {
    let p = voting_params(0.52);
    let limits = compute_limits(&p, &LimitOptions::default()).unwrap();
    let d_vote = persuasion_core::limits::compute_d_vote(&p, &limits).finite().unwrap();
    let x = (1.0 - p.mu_h1) / p.mu_h1;
    let strategy = SenderStrategy::new(vec![SignalSpec::new("s", x, 1.0, SeedPolicy::OnLhat1)]);
    let d_max = 40;
    let mut obs = ObservationProbs::zeros(1, d_max);
    for t in ReceiverType::ALL {
        for d in 0..=d_max {
            obs.probs[0][t.index()][d] = limits.zeta_hat(t, d);
        }
    }
    let eq = equilibrium(&strategy, &p, &obs).unwrap();
    for d in 0..=d_max {
        assert_eq!(eq.empty_action(ReceiverType::L, d), u8::from(d >= d_vote), "d = {d}");
    }
}

mod common;

use common::random_game;
use d2d_cap::learning::{
    acceptance_probability, required_samples, required_samples_bounded, Learner, LearnerOptions,
    LogMgf, NoiseSpec, SamplePolicy, TemperatureSchedule,
};
use d2d_cap::UtilityMode;
use proptest::prelude::*;

proptest! {
    #[test]
    fn acceptance_pair_sums_to_one(delta in -10.0f64..10.0, tau in 1e-4f64..10.0) {
        let s = acceptance_probability(delta, tau) + acceptance_probability(-delta, tau);
        prop_assert!((s - 1.0).abs() <= 2.0 * f64::EPSILON);
    }

    #[test]
    fn acceptance_ratio_is_boltzmann(delta in -5.0f64..5.0, tau in 0.1f64..10.0) {
        let ratio = acceptance_probability(delta, tau) / acceptance_probability(-delta, tau);
        let expected = (-delta / tau).exp();
        prop_assert!((ratio / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fewer_samples_at_higher_temperature(tau in 0.01f64..1.0, factor in 1.0f64..4.0, xi in 1e-6f64..0.5) {
        let noise = NoiseSpec::Bounded { width: 1.0 };
        let cold = required_samples(tau, xi, &noise).unwrap().n;
        let warm = required_samples(tau * factor, xi, &noise).unwrap().n;
        prop_assert!(warm <= cold);
    }
}

#[test]
fn acceptance_saturates_exactly() {
    for x in [800.0, 1e4, 1e300] {
        assert_eq!(acceptance_probability(x, 1.0), 0.0);
        assert_eq!(acceptance_probability(-x, 1.0), 1.0);
        assert_eq!(acceptance_probability(x, 1.0) + acceptance_probability(-x, 1.0), 1.0);
    }
}

#[test]
fn sample_count_grid_is_monotone() {
    let taus = [0.5, 0.2, 0.1, 0.05, 0.02];
    let widths = [0.5, 1.0, 2.0, 4.0];
    // N is monotone in ξ only for small ξ: the (1−ξ)² factor takes over near 1.
    let xis = [1e-2, 1e-3, 1e-5, 1e-8];
    for &w in &widths {
        let ns: Vec<u64> = taus
            .iter()
            .map(|&t| required_samples_bounded(t, 1e-5, w).unwrap().n)
            .collect();
        assert!(ns.windows(2).all(|p| p[0] <= p[1]), "tau grid {ns:?}");
    }
    for &t in &taus {
        let ns: Vec<u64> = widths
            .iter()
            .map(|&w| required_samples_bounded(t, 1e-5, w).unwrap().n)
            .collect();
        assert!(ns.windows(2).all(|p| p[0] <= p[1]), "width grid {ns:?}");
        let ns: Vec<u64> = xis
            .iter()
            .map(|&x| required_samples_bounded(t, x, 1.0).unwrap().n)
            .collect();
        assert!(ns.windows(2).all(|p| p[0] <= p[1]), "xi grid {ns:?}");
        let ns: Vec<u64> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&s| {
                let noise = NoiseSpec::Unbounded(LogMgf::gaussian(s).unwrap());
                required_samples(t, 0.5, &noise).unwrap().n
            })
            .collect();
        assert!(ns.windows(2).all(|p| p[0] <= p[1]), "sigma grid {ns:?}");
    }
}

#[test]
fn blla_acceptances_match_the_rule() {
    let game = random_game(3, 0, 2, 2, UtilityMode::Deterministic);
    let tau = 0.02;
    let mut opts = LearnerOptions::blla(TemperatureSchedule::Fixed { tau }, NoiseSpec::Bounded { width: 1.0 });
    opts.samples = SamplePolicy::Fixed { n: 1 };
    let traj = Learner::new(&game, opts).unwrap().run(100_000, 42).unwrap();
    let (mut expected, mut var, mut accepted, mut trials) = (0.0, 0.0, 0usize, 0usize);
    for s in traj.slots.iter().filter(|s| s.trial != channel_before(&traj, s.t)) {
        let p = acceptance_probability(s.delta_hat, tau);
        expected += p;
        var += p * (1.0 - p);
        accepted += usize::from(s.accepted);
        trials += 1;
    }
    assert!(trials > 40_000);
    let z = (accepted as f64 - expected) / var.sqrt();
    assert!(z.abs() < 3.0, "accepted {accepted}, expected {expected:.1}, z = {z:.2}");
}

/// Channel of the moving player just before slot `t`.
fn channel_before(traj: &d2d_cap::learning::Trajectory, t: u64) -> usize {
    let slot = &traj.slots[(t - 1) as usize];
    let before = if t == 1 { &traj.initial } else { &traj.slots[(t - 2) as usize].profile };
    before.channel(slot.player)
}

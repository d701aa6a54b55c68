mod common;

use proptest::prelude::*;

use channel_econ::channel::lifetime_transfers;
use channel_econ::market::{demand, thresholds, venue_choice, DemandMethod, Venue, World};
use channel_econ::model::{stream_rng, MarketParams, PairParams, TransferSizeDist, TransferSizeRegime};
use channel_econ::sim::{simulate_channel, ChannelSetting, SimChannelConfig};

fn market(r: f64, a: f64) -> MarketParams {
    MarketParams::new(288_000.0, r, a, 0.01).unwrap()
}

proptest! {
    #[test]
    fn lifetime_matches_linear_system(w in 2usize..400, p in 0.01f64..0.99) {
        prop_assume!((p - 0.5).abs() > 1e-6);
        let oracle = common::absorption_times(w, p);
        for m in (0..=w).step_by(7) {
            let got = lifetime_transfers(w as u64, m as u64, p).unwrap();
            prop_assert!((got - oracle[m]).abs() <= 1e-8 * oracle[m].max(1.0), "m = {m}: {got} vs {}", oracle[m]);
        }
    }

    #[test]
    fn thresholds_linear_in_phi(
        phi in 1e-8f64..1.0,
        k in 0.01f64..100.0,
        la in 0.5f64..50.0,
        lb in 0.5f64..50.0,
    ) {
        let m = MarketParams::default();
        let pair = PairParams::new(la, lb).unwrap();
        let one = thresholds(&m, &pair, phi).unwrap();
        let many = thresholds(&m, &pair, k * phi).unwrap();
        for (x, y) in [(one.t_nl, many.t_nl), (one.t_nb, many.t_nb), (one.t_lb, many.t_lb)] {
            prop_assert!((y - k * x).abs() <= 1e-12 * y.abs());
        }
        let zero = thresholds(&m, &pair, 0.0).unwrap();
        prop_assert_eq!((zero.t_nl, zero.t_nb, zero.t_lb), (0.0, 0.0, 0.0));
    }

    #[test]
    fn venue_is_best_utility(
        z in 1e-5f64..1e3,
        phi in 1e-9f64..1.0,
        lambda in 0.5f64..50.0,
        r in 1e-6f64..1e-3,
        a in 1.0f64..2.0,
    ) {
        let m = market(r, a);
        let pair = PairParams::symmetric(lambda).unwrap();
        let ell = pair.ell();
        let value = m.beta * z;
        let lightning = value - 3.0 * (a * phi * z * z * r * r / (ell * ell)).cbrt();
        let chain = value - phi;
        let best = chain.max(lightning).max(0.0);
        // Skip near-ties where rounding decides.
        let gap = [chain, lightning, 0.0].iter().filter(|&&u| u < best).fold(f64::INFINITY, |g, &u| g.min(best - u));
        prop_assume!(gap > 1e-12 * value.max(phi));
        let expected = if chain == best { Venue::Blockchain } else if lightning == best { Venue::Lightning } else { Venue::None };
        prop_assert_eq!(venue_choice(&m, &pair, z, phi, World::WithLightning).unwrap(), expected);
        let expected_none = if chain >= 0.0 { Venue::Blockchain } else { Venue::None };
        prop_assert_eq!(venue_choice(&m, &pair, z, phi, World::NoLightning).unwrap(), expected_none);
    }

    #[test]
    fn demand_nonincreasing(
        phi in 1e-8f64..0.1,
        step in 1.0001f64..10.0,
        la in 0.5f64..20.0,
        lb in 0.5f64..20.0,
        uniform in any::<bool>(),
    ) {
        let m = MarketParams::default();
        let pair = PairParams::new(la, lb).unwrap();
        let dist = if uniform { TransferSizeDist::Uniform { z_max: 1.0 } } else { TransferSizeDist::default() };
        for world in [World::WithLightning, World::NoLightning] {
            let lo = demand(&m, &pair, &dist, phi, world, DemandMethod::ClosedForm).unwrap().records_per_pair_per_day;
            let hi = demand(&m, &pair, &dist, phi * step, world, DemandMethod::ClosedForm).unwrap().records_per_pair_per_day;
            prop_assert!(hi <= lo * (1.0 + 1e-12), "{world:?}: D({}) = {hi} > D({phi}) = {lo}", phi * step);
        }
    }

    #[test]
    fn simulation_replays_from_seed(seed in any::<u64>(), w in 1.0f64..20.0, phi in 1e-5f64..1e-2) {
        let cfg = SimChannelConfig {
            setting: ChannelSetting::new(w, w / 20.0).unwrap(),
            dist: TransferSizeDist::default(),
            pair: PairParams::default(),
            market: MarketParams::default(),
            horizon_days: 30,
            phi,
            seed,
            regime: TransferSizeRegime::PerTransfer,
        };
        prop_assert_eq!(simulate_channel(&cfg).unwrap(), simulate_channel(&cfg).unwrap());
    }
}

#[test]
fn densities_integrate_to_one() {
    for z_min in [1e-4, 1e-3, 0.5] {
        let d = TransferSizeDist::PowerLaw { z_min };
        // Substitute z = e^u; the tail beyond e^40 z_min carries e^-40 of the mass.
        let lo = z_min.ln();
        let mass = common::simpson(|u| d.pdf(u.exp()) * u.exp(), lo, lo + 40.0, 4000);
        assert!((mass - 1.0).abs() < 1e-9, "z_min = {z_min}: {mass}");
    }
    for z_max in [0.01, 1.0, 7.5] {
        let d = TransferSizeDist::Uniform { z_max };
        let mass = common::simpson(|z| d.pdf(z), 1e-300, z_max, 1000);
        assert!((mass - 1.0).abs() < 1e-9, "z_max = {z_max}: {mass}");
    }
}

/// Critical value of the one-sample KS statistic at the 0.1% level.
fn ks_critical(n: usize) -> f64 {
    1.95 / (n as f64).sqrt()
}

#[test]
fn power_law_sampler_passes_ks() {
    const N: usize = 20_000;
    for (stream, z_min) in [(0, 1e-3), (1, 0.25)] {
        let d = TransferSizeDist::PowerLaw { z_min };
        let mut rng = stream_rng(2024, stream);
        let mut xs: Vec<f64> = (0..N).map(|_| d.sample(&mut rng)).collect();
        assert!(xs.iter().all(|&x| x >= z_min));
        let ks = common::ks_statistic(&mut xs, |x| 1.0 - z_min / x);
        assert!(ks < ks_critical(N), "z_min = {z_min}: D = {ks}");
    }
}

#[test]
fn uniform_sampler_passes_ks() {
    const N: usize = 20_000;
    let d = TransferSizeDist::Uniform { z_max: 2.0 };
    let mut rng = stream_rng(2024, 2);
    let mut xs: Vec<f64> = (0..N).map(|_| d.sample(&mut rng)).collect();
    let ks = common::ks_statistic(&mut xs, |x| x / 2.0);
    assert!(ks < ks_critical(N), "D = {ks}");
}

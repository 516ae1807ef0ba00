use proptest::prelude::*;
use spreadhydro::dynamics::rng::{stream_rng, Stream};
use spreadhydro::dynamics::{sample_nhpp, simulate_epcs, simulate_eprs, SimParams, Window};
use spreadhydro::kernels::{JumpKernel, RateField};
use spreadhydro::lattice::{ExclusionConfig, Parity, SpreadConfig};
use spreadhydro::measure::{
    ks_one_sample, sample_bernoulli_profile, wlln_statistic, wlln_target, Moments,
};

fn params(n: usize, horizon: f64, rate: RateField, window: Window, seed: u64) -> SimParams {
    SimParams {
        n,
        horizon,
        kernel: JumpKernel::nearest_neighbor(),
        rate,
        window,
        seed,
        replica: 0,
        snapshot_times: vec![horizon],
        log_events: false,
    }
}

fn bernoulli(p: &SimParams, density: f64) -> ExclusionConfig {
    let mut rng = stream_rng(p.seed, p.replica, Stream::InitialConfig);
    sample_bernoulli_profile(|_| density, p.n, &p.window, &mut rng).unwrap()
}

#[test]
fn homogeneous_poisson_count_has_mean_two() {
    // amplitude 2 evaluated at the peak is a constant rate 2
    let rate = RateField::double_exponential(2.0, 1.0, 1.0).unwrap();
    let runs = 10_000;
    let mut m = Moments::default();
    for seed in 0..runs {
        let mut rng = stream_rng(seed, 0, Stream::Dynamics);
        m.push(sample_nhpp(&rate, 0, 4, 1.0, &mut rng).unwrap().len() as f64);
    }
    let se = (2.0 / runs as f64).sqrt();
    assert!((m.mean - 2.0).abs() < 3.0 * se, "mean {} vs 2", m.mean);
}

#[test]
fn zero_rate_gives_no_events() {
    let rate = RateField::zero(1.0);
    let mut rng = stream_rng(1, 0, Stream::Dynamics);
    assert!(sample_nhpp(&rate, 3, 8, 1.0, &mut rng).unwrap().is_empty());
}

#[test]
fn site_dependent_intensity_matches_its_integral() {
    let (n, x, t) = (4usize, 3i64, 1.5);
    let rate = RateField::double_exponential(1.0, 1.0, t).unwrap();
    // constant in time, so the expected count is T e^{-|x/N|}
    let expect = t * (-(x as f64 / n as f64).abs()).exp();
    let runs = 10_000;
    let mut m = Moments::default();
    for seed in 0..runs {
        let mut rng = stream_rng(seed, 7, Stream::Dynamics);
        m.push(sample_nhpp(&rate, x, n, t, &mut rng).unwrap().len() as f64);
    }
    let se = (expect / runs as f64).sqrt();
    assert!((m.mean - expect).abs() < 3.0 * se, "mean {} vs {expect}", m.mean);
}

#[test]
fn interarrival_times_are_exponential() {
    let rate = RateField::double_exponential(2.0, 1.0, 5000.0).unwrap();
    let mut rng = stream_rng(99, 0, Stream::Dynamics);
    let times = sample_nhpp(&rate, 0, 1, 5000.0, &mut rng).unwrap();
    assert!(times.len() > 9000);
    let gaps: Vec<f64> = std::iter::once(times[0])
        .chain(times.windows(2).map(|w| w[1] - w[0]))
        .collect();
    let ks = ks_one_sample(&gaps, |x| 1.0 - (-2.0 * x).exp()).unwrap();
    assert!(ks.p_value > 0.01, "KS p = {}", ks.p_value);
}

#[test]
fn full_window_never_changes() {
    let p = params(8, 1.0, RateField::zero(1.0), Window::new(-2.0, 2.0).unwrap(), 5);
    let (left, len) = p.window.sites(p.n);
    let init = ExclusionConfig::full(left, len);
    let rec = simulate_eprs(&p, &init).unwrap();
    assert_eq!(rec.final_config, init);
    assert_eq!(rec.totals.exchanges, 0);
    assert!(rec.growth.is_empty());
}

#[test]
fn shift_statistic_converges_to_integrated_mass() {
    // C = 2 for e^{-|u|}, so the target on [0, 1/2] is 1
    let h = RateField::double_exponential(1.0, 1.0, 0.5).unwrap();
    let target = wlln_target(&h, 0.5).unwrap();
    assert!((target - 1.0).abs() < 1e-9);
    // wide enough on the left that shifts beyond the window stay rare
    let base = params(8, 0.5, h, Window::new(-6.0, 3.0).unwrap(), 2024);
    let mut m = Moments::default();
    for r in 0..500 {
        let p = base.with_replica(r);
        let rec = simulate_eprs(&p, &bernoulli(&p, 0.5)).unwrap();
        m.push(wlln_statistic(&rec, 0.5).unwrap());
    }
    assert!(
        (m.mean - 1.0).abs() < 3.0 * m.std_err(),
        "mean {} se {}",
        m.mean,
        m.std_err()
    );
}

#[test]
fn spreading_mass_converges_to_integrated_mass() {
    let h = RateField::double_exponential(1.0, 1.0, 0.5).unwrap();
    let base = params(8, 0.5, h, Window::new(-4.0, 4.0).unwrap(), 77);
    let mut m = Moments::default();
    for r in 0..500 {
        let p = base.with_replica(r);
        let init = SpreadConfig::from_exclusion(&bernoulli(&p, 0.5));
        let rec = simulate_epcs(&p, &init).unwrap();
        m.push((rec.final_config.mass_n() - 1) as f64 / 8.0);
    }
    assert!(
        (m.mean - 1.0).abs() < 3.0 * m.std_err(),
        "mean {} se {}",
        m.mean,
        m.std_err()
    );
}

#[test]
fn zero_rate_spreading_is_plain_exclusion() {
    let p = params(16, 0.5, RateField::zero(0.5), Window::new(-2.0, 2.0).unwrap(), 3);
    let init = SpreadConfig::from_exclusion(&bernoulli(&p, 0.4));
    let rec = simulate_epcs(&p, &init).unwrap();
    assert_eq!(rec.final_config.mass_n(), 1);
    assert_eq!(rec.final_config.parity(), Parity::Gamma1);
    assert_eq!(rec.final_config.particle_count(), init.particle_count());
    assert!(rec.growth.is_empty());
}

#[test]
fn same_seed_same_trajectory() {
    let h = RateField::double_exponential(1.0, 1.0, 0.5).unwrap();
    let mut p = params(16, 0.5, h, Window::new(-6.0, 3.0).unwrap(), 11);
    p.log_events = true;
    let init = bernoulli(&p, 0.5);
    let a = simulate_eprs(&p, &init).unwrap();
    let b = simulate_eprs(&p, &init).unwrap();
    assert_eq!(a.final_config, b.final_config);
    assert_eq!(a.event_log, b.event_log);
    let c = simulate_eprs(&p.with_replica(1), &init).unwrap();
    assert_ne!(a.event_log, c.event_log);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exclusion_conserves_particles(seed in any::<u64>(), density in 0.0f64..=1.0) {
        let p = params(8, 0.5, RateField::zero(0.5), Window::new(-2.0, 2.0).unwrap(), seed);
        let init = bernoulli(&p, density);
        let rec = simulate_eprs(&p, &init).unwrap();
        prop_assert_eq!(rec.final_config.particle_count(), init.particle_count());
    }

    #[test]
    fn every_spread_adds_one_particle(seed in any::<u64>()) {
        let h = RateField::double_exponential(1.0, 1.0, 0.5).unwrap();
        let p = params(8, 0.5, h, Window::new(-4.0, 4.0).unwrap(), seed);
        let init = SpreadConfig::from_exclusion(&bernoulli(&p, 0.5));
        let rec = simulate_epcs(&p, &init).unwrap();
        let fin = &rec.final_config;
        // spreads outside the window add particles that are not tracked,
        // and particles pushed past the right edge are dropped
        let tracked = fin.particle_count() as i64 + fin.out_right_particles() as i64
            - init.particle_count() as i64;
        let untracked = (fin.births_left() + fin.births_right()) as i64;
        prop_assert_eq!(tracked + untracked, fin.mass_n() as i64 - 1);
    }

    #[test]
    fn shift_statistic_is_nondecreasing(seed in any::<u64>()) {
        let h = RateField::double_exponential(1.0, 1.0, 0.5).unwrap();
        let p = params(8, 0.5, h, Window::new(-6.0, 3.0).unwrap(), seed);
        let rec = simulate_eprs(&p, &bernoulli(&p, 0.5)).unwrap();
        let mut last = 0.0;
        for k in 0..=50 {
            let w = wlln_statistic(&rec, 0.01 * k as f64).unwrap();
            prop_assert!(w >= last);
            last = w;
        }
        prop_assert_eq!(wlln_statistic(&rec, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn bernoulli_sampling_respects_extremes(seed in any::<u64>()) {
        let w = Window::new(-1.0, 1.0).unwrap();
        let mut rng = stream_rng(seed, 0, Stream::InitialConfig);
        let ones = sample_bernoulli_profile(|_| 1.0, 16, &w, &mut rng).unwrap();
        let zeros = sample_bernoulli_profile(|_| 0.0, 16, &w, &mut rng).unwrap();
        prop_assert!(ones.cells().iter().all(|&c| c == 1));
        prop_assert!(zeros.cells().iter().all(|&c| c == 0));
    }
}

use spreadhydro::dynamics::rng::{stream_rng, Stream};
use spreadhydro::dynamics::{simulate_eprs, SimParams, Window};
use spreadhydro::kernels::{JumpKernel, RateField};
use spreadhydro::lattice::ExclusionConfig;
use spreadhydro::measure::{
    empirical_pair, hydro_error, martingale_report, sample_bernoulli_profile, wlln_statistic,
    wlln_target, EnsembleStats, Integration, MartingaleSetup, Moments, NamedTest, TestFunction,
};
use spreadhydro::pde::{solve_eprs_pde, Grid};

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

fn bernoulli(p: &SimParams, rho: impl Fn(f64) -> f64) -> ExclusionConfig {
    let mut rng = stream_rng(p.seed, p.replica, Stream::InitialConfig);
    sample_bernoulli_profile(rho, p.n, &p.window, &mut rng).unwrap()
}

#[test]
fn product_measure_pairing_has_binomial_moments() {
    let n = 64;
    let g = TestFunction::raised_cosine(0.0, 1.0);
    let w = Window::new(-2.0, 2.0).unwrap();
    let (left, len) = w.sites(n);
    // independent oracle: each site is Bernoulli(1/2)
    let weights: Vec<f64> = (left..left + len as i64)
        .map(|x| g.value(0.0, x as f64 / n as f64))
        .collect();
    let mean = 0.5 * weights.iter().sum::<f64>() / n as f64;
    let var = 0.25 * weights.iter().map(|v| v * v).sum::<f64>() / (n * n) as f64;
    // the Riemann sum of a raised cosine is exact to rounding: int G = half_width
    assert!((mean - 0.5).abs() < 1e-12);

    let mut m = Moments::default();
    for seed in 0..1000 {
        let mut rng = stream_rng(seed, 0, Stream::InitialConfig);
        let c = sample_bernoulli_profile(|_| 0.5, n, &w, &mut rng).unwrap();
        m.push(empirical_pair(&c, &g, 0.0, n).unwrap());
    }
    let se = (var / 1000.0).sqrt();
    assert!((m.mean - mean).abs() < 3.0 * se, "mean {} vs {mean}", m.mean);
    assert!((m.variance() / var - 1.0).abs() < 0.2, "variance {} vs {var}", m.variance());
}

#[test]
fn pairing_rejects_support_outside_window() {
    let c = ExclusionConfig::empty(-8, 17);
    assert!(empirical_pair(&c, &TestFunction::raised_cosine(0.0, 1.5), 0.0, 8).is_err());
    assert_eq!(empirical_pair(&c, &TestFunction::raised_cosine(0.0, 0.5), 0.0, 8).unwrap(), 0.0);
}

#[test]
fn zero_rate_statistic_vanishes() {
    let z = RateField::zero(1.0);
    assert_eq!(wlln_target(&z, 1.0).unwrap(), 0.0);
    let p = params(16, 1.0, z, Window::new(-2.0, 2.0).unwrap(), 4);
    let rec = simulate_eprs(&p, &bernoulli(&p, |_| 0.5)).unwrap();
    assert_eq!(wlln_statistic(&rec, 1.0).unwrap(), 0.0);
    assert!(wlln_statistic(&rec, 1.5).is_err());
}

#[test]
fn martingale_starts_at_zero_and_has_mean_zero() {
    let t = 0.25;
    let mut base = params(32, t, RateField::zero(t), Window::new(-2.0, 2.0).unwrap(), 31);
    base.log_events = true;
    let setup = MartingaleSetup::for_eprs(&base, TestFunction::raised_cosine(0.0, 0.5)).unwrap();
    let (mut end, mut sq, mut qv) = (Moments::default(), Moments::default(), Moments::default());
    for r in 0..500 {
        let p = base.with_replica(r);
        let rec = simulate_eprs(&p, &bernoulli(&p, |u| if u < 0.0 { 0.8 } else { 0.2 })).unwrap();
        let rep = martingale_report(&rec, &setup, &[0.0, t], Integration::Tabulated, false).unwrap();
        assert!(rep.martingale[0].abs() < 1e-14);
        assert_eq!(rep.quadratic_variation[0], 0.0);
        end.push(rep.martingale[1]);
        sq.push(rep.martingale[1].powi(2));
        qv.push(rep.quadratic_variation[1]);
    }
    assert!(end.mean.abs() < 3.0 * end.std_err(), "mean {} se {}", end.mean, end.std_err());
    // M^2 - <M> is a martingale as well
    let gap = sq.mean - qv.mean;
    let se = (sq.variance() / sq.count as f64).sqrt() + qv.std_err();
    assert!(gap.abs() < 3.0 * se, "E[M^2] {} vs E[<M>] {}", sq.mean, qv.mean);
}

#[test]
fn integration_routes_agree() {
    let t = 0.25;
    let h = RateField::double_exponential(1.0, 1.0, t).unwrap();
    let mut p = params(16, t, h, Window::new(-6.0, 3.0).unwrap(), 8);
    p.log_events = true;
    let setup = MartingaleSetup::for_eprs(&p, TestFunction::raised_cosine(0.0, 0.5)).unwrap();
    let rec = simulate_eprs(&p, &bernoulli(&p, |_| 0.5)).unwrap();
    let times = [0.05, 0.1, 0.2, t];
    let a = martingale_report(&rec, &setup, &times, Integration::Tabulated, false).unwrap();
    let b = martingale_report(&rec, &setup, &times, Integration::Direct, false).unwrap();
    for k in 0..times.len() {
        assert!((a.martingale[k] - b.martingale[k]).abs() < 1e-8);
        assert!((a.quadratic_variation[k] - b.quadratic_variation[k]).abs() < 1e-8);
    }
}

#[test]
fn missing_event_log_is_an_error() {
    let p = params(16, 0.25, RateField::zero(0.25), Window::new(-2.0, 2.0).unwrap(), 1);
    let setup = MartingaleSetup::for_eprs(&p, TestFunction::raised_cosine(0.0, 0.5)).unwrap();
    let rec = simulate_eprs(&p, &bernoulli(&p, |_| 0.5)).unwrap();
    assert!(martingale_report(&rec, &setup, &[0.25], Integration::Tabulated, false).is_err());
}

#[test]
fn initial_hydro_error_is_sampling_error() {
    let n = 64;
    let step = |u: f64| 0.25 * (((u + 1.0) / 0.1).tanh() - ((u - 1.0) / 0.1).tanh());
    let h = RateField::double_exponential(1.0, 1.0, 0.1).unwrap();
    let pde = solve_eprs_pde(0.5, &h, &step, &Grid::new(-4.0, 4.0, 0.01, 0.1)).unwrap();
    let tests = vec![
        NamedTest { id: "left".into(), function: TestFunction::raised_cosine(-1.0, 0.5) },
        NamedTest { id: "mid".into(), function: TestFunction::raised_cosine(0.0, 1.0) },
    ];
    let w = Window::new(-3.0, 3.0).unwrap();
    let mut stats = EnsembleStats::new();
    for seed in 0..400 {
        let mut rng = stream_rng(seed, 0, Stream::InitialConfig);
        let c = sample_bernoulli_profile(step, n, &w, &mut rng).unwrap();
        for g in &tests {
            stats.push(0.0, &g.id, empirical_pair(&c, &g.function, 0.0, n).unwrap());
        }
    }
    let s = hydro_error(n, &stats, &pde, &tests, &[0.0]).unwrap();
    assert_eq!(s.rows.len(), 2);
    for row in &s.rows {
        // the mean also carries a Riemann-sum bias of order 1/N at the step
        assert!(row.abs_error < 4.0 * row.std_err + 2e-3, "{row:?}");
        assert!((row.error() - row.abs_error - row.std_dev).abs() < 1e-15);
    }
    assert!(hydro_error(n, &stats, &pde, &tests, &[0.05]).is_err());
}

use std::f64::consts::PI;
use std::path::PathBuf;

use spreadhydro::kernels::{b_from_h, RateField};
use spreadhydro::pde::{
    solve_convdiff, solve_epcs_pde, solve_eprs_pde, transform_solution, Grid, GridFunction,
    ShiftDrift, ZeroDrift,
};

fn bump(u: f64) -> f64 {
    if u.abs() < 1.0 {
        0.25 * (1.0 + (PI * u).cos())
    } else {
        0.0
    }
}

fn step(u: f64) -> f64 {
    0.25 * (((u + 1.0) / 0.1).tanh() - ((u - 1.0) / 0.1).tanh())
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Sum of nodal values times du: the quantity the flux form conserves.
fn nodal_mass(sol: &GridFunction, k: usize) -> f64 {
    sol.values[k].iter().sum::<f64>() * sol.du
}

fn heat_error(du: f64) -> f64 {
    // variance 1 at t = 0, variance 1 + 2 sigma^2 t = 2 at t = 1
    let init = |u: f64| (-u * u / 2.0).exp() / (2.0 * PI).sqrt();
    let exact = |u: f64| (-u * u / 4.0).exp() / (4.0 * PI).sqrt();
    let sol = solve_convdiff(0.5, &ZeroDrift, None, &init, &Grid::new(-10.0, 10.0, du, 1.0)).unwrap();
    let last = sol.values.last().unwrap();
    (0..sol.nodes())
        .map(|i| (last[i] - exact(sol.node(i))).abs())
        .fold(0.0, f64::max)
}

#[test]
fn heat_kernel_oracle() {
    let e = heat_error(0.01);
    assert!(e < 1e-3, "max error {e}");
    let e2 = heat_error(0.02);
    assert!(e2 / e >= 3.5, "halving du reduced the error by only {}", e2 / e);
    let sol = solve_convdiff(
        0.5,
        &ZeroDrift,
        None,
        &|u: f64| (-u * u / 2.0).exp() / (2.0 * PI).sqrt(),
        &Grid::new(-10.0, 10.0, 0.01, 1.0),
    )
    .unwrap();
    let centre = sol.values.last().unwrap()[1000];
    assert!((centre - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-4);
}

#[test]
fn source_mass_matches_time_integral() {
    let (t, half) = (0.5, 15.0);
    let h = RateField::double_exponential(1.0, 1.0, t).unwrap();
    let src = |s: f64, u: f64| h.value(s, u);
    let grid = Grid::new(-half, half, 0.05, t).with_outputs(&[0.25]);
    let sol = solve_convdiff(0.5, &ZeroDrift, Some(&src), &|_| 0.0, &grid).unwrap();
    for (k, &tk) in sol.times.iter().enumerate().skip(1) {
        // int_{-L}^{L} e^{-|u|} du per unit time
        let expect = tk * 2.0 * (1.0 - (-half).exp());
        let got = sol.mass(k);
        assert!(((got - expect) / expect).abs() < 1e-3, "t = {tk}: {got} vs {expect}");
    }
}

#[test]
fn conservative_drift_preserves_mass() {
    let h = RateField::double_exponential(1.0, 1.0, 0.5).unwrap();
    let b = b_from_h(&h).unwrap();
    let grid = Grid::new(-10.0, 12.0, 0.02, 0.5).with_outputs(&[0.1, 0.2, 0.3, 0.4]);
    let sol = solve_convdiff(0.5, &ShiftDrift { b: &b }, None, &bump, &grid).unwrap();
    let m0 = nodal_mass(&sol, 0);
    for k in 1..sol.times.len() {
        assert!((nodal_mass(&sol, k) - m0).abs() < 1e-9, "mass drifted at t = {}", sol.times[k]);
    }
}

#[test]
fn zero_amplitude_is_the_heat_equation() {
    let grid = Grid::new(-6.0, 6.0, 0.02, 0.5);
    let heat = solve_convdiff(0.5, &ZeroDrift, None, &step, &grid).unwrap();
    let z = RateField::zero(0.5);
    let eprs = solve_eprs_pde(0.5, &z, &step, &grid).unwrap();
    let epcs = solve_epcs_pde(0.5, &z, &step, &grid).unwrap();
    for k in 0..heat.times.len() {
        assert!(sup_diff(&heat.values[k], &eprs.values[k]) < 1e-15);
        assert!(sup_diff(&heat.values[k], &epcs.values[k]) < 1e-15);
    }
}

#[test]
fn centroid_moves_right_under_shifts() {
    let h = RateField::double_exponential(0.5, 1.0, 0.5).unwrap();
    let grid = Grid::new(-8.0, 10.0, 0.02, 0.5).with_outputs(&[0.1, 0.2, 0.3, 0.4]);
    let sol = solve_eprs_pde(0.5, &h, &bump, &grid).unwrap();
    let centroid = |k: usize| {
        let row = &sol.values[k];
        let m: f64 = row.iter().sum();
        row.iter().enumerate().map(|(i, v)| v * sol.node(i)).sum::<f64>() / m
    };
    let cs: Vec<f64> = (0..sol.times.len()).map(centroid).collect();
    assert!(cs.windows(2).all(|w| w[1] > w[0]), "{cs:?}");
}

#[test]
fn empty_start_fills_at_rate_c() {
    // C = 2: the mass grows like 2t and stays nonnegative
    let h = RateField::double_exponential(1.0, 1.0, 0.1).unwrap();
    let grid = Grid::new(-15.0, 15.0, 0.05, 0.1).with_outputs(&[0.02, 0.05]);
    let sol = solve_epcs_pde(0.5, &h, &|_| 0.0, &grid).unwrap();
    for k in 1..sol.times.len() {
        let t = sol.times[k];
        assert!(sol.values[k].iter().all(|&v| v >= 0.0));
        let rate = sol.mass(k) / t;
        assert!((rate - 2.0).abs() < 2e-3, "t = {t}: mass / t = {rate}");
    }
}

#[test]
fn symmetric_data_stay_symmetric() {
    let h = RateField::double_exponential(1.0, 1.0, 0.5).unwrap();
    let grid = Grid::new(-8.0, 8.0, 0.02, 0.5).with_outputs(&[0.25]);
    let sol = solve_epcs_pde(0.5, &h, &step, &grid).unwrap();
    let p = sol.nodes();
    for row in &sol.values {
        let worst = (0..p).map(|i| (row[i] - row[p - 1 - i]).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-10, "asymmetry {worst}");
    }
}

#[test]
fn transform_without_shift_is_complement() {
    let h = RateField::double_exponential(1.0, 1.0, 0.5).unwrap();
    let zeta = solve_eprs_pde(0.5, &h, &step, &Grid::new(-6.0, 8.0, 0.05, 0.5)).unwrap();
    let rho = transform_solution(&zeta, |_| 0.0).unwrap();
    assert_eq!(rho.u_min, zeta.u_min);
    for (r, z) in rho.values.iter().zip(&zeta.values) {
        assert!(r.iter().zip(z).all(|(a, b)| (a - (1.0 - b)).abs() < 1e-14));
    }
}

fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/eprs_step_profile.csv")
}

/// `zeta(T, u)` for the smoothed step under `h = e^{-|u|}`, sampled every 0.25.
fn reference_profile(du: f64) -> Vec<(f64, f64)> {
    let h = RateField::double_exponential(1.0, 1.0, 0.5).unwrap();
    let sol = solve_eprs_pde(0.5, &h, &step, &Grid::new(-8.0, 10.0, du, 0.5)).unwrap();
    let k = sol.times.len() - 1;
    let stride = (0.25 / du).round() as usize;
    (0..sol.nodes())
        .step_by(stride)
        .map(|i| (sol.node(i), sol.values[k][i]))
        .filter(|(u, _)| (-4.0..=6.0).contains(u))
        .collect()
}

#[test]
fn right_sided_profile_matches_pinned_fixture() {
    let coarse = reference_profile(0.025);
    let fine = reference_profile(0.0125);
    let finest = reference_profile(0.00625);
    let d1 = sup_diff(
        &coarse.iter().map(|p| p.1).collect::<Vec<_>>(),
        &fine.iter().map(|p| p.1).collect::<Vec<_>>(),
    );
    let d2 = sup_diff(
        &fine.iter().map(|p| p.1).collect::<Vec<_>>(),
        &finest.iter().map(|p| p.1).collect::<Vec<_>>(),
    );
    // first-order upwind: successive differences halve
    let ratio = d1 / d2;
    assert!((1.6..=2.6).contains(&ratio), "Richardson ratio {ratio} ({d1}, {d2})");
    assert!(d1 < 5e-3, "coarse grid off by {d1}");

    if std::env::var_os("SPREADHYDRO_WRITE_FIXTURES").is_some() {
        let mut text = String::from("u,zeta\n");
        for (u, z) in &coarse {
            text.push_str(&format!("{u},{z:.15e}\n"));
        }
        std::fs::create_dir_all(fixture_path().parent().unwrap()).unwrap();
        std::fs::write(fixture_path(), text).unwrap();
    }
    let text = std::fs::read_to_string(fixture_path()).expect("fixture missing");
    let pinned: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let (u, z) = l.split_once(',').unwrap();
            (u.parse().unwrap(), z.parse().unwrap())
        })
        .collect();
    assert_eq!(pinned.len(), coarse.len());
    for ((u0, z0), (u1, z1)) in pinned.iter().zip(&coarse) {
        assert!((u0 - u1).abs() < 1e-9);
        assert!((z0 - z1).abs() < 1e-10, "u = {u0}: pinned {z0}, now {z1}");
    }
}

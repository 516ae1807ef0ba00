//! The experiment pipelines behind the subcommands. Each one writes its
//! artifacts under `<command>/` and returns its criterion verdicts.

use serde::Serialize;

use super::config::{Check, ExperimentConfig, Process};
use super::output::{Csv, OutputDir};
use crate::coupling::{simulate_coupled, write_j_path_csv};
use crate::dynamics::rng::{stream_rng, Stream};
use crate::dynamics::{
    replicate, simulate_epcs, simulate_eprs, EventTotals, SimParams, TrajectoryRecord, Window,
};
use crate::error::{Error, Result};
use crate::kernels::{b_from_h, RateField};
use crate::lattice::rle::{exclusion_to_rle, spread_to_rle};
use crate::lattice::{ExclusionConfig, SpreadConfig};
use crate::measure::{
    empirical_pair, hydro_error, ks_two_sample, martingale_report, sample_bernoulli_profile,
    wlln_statistic, wlln_target, write_hydro_csv, Empirical, EnsembleStats, HydroSummary,
    InitialProfile, MartingaleSetup, Moments, NamedTest,
};
use crate::pde::{solve_epcs_pde, solve_eprs_pde, transform_solution, GridFunction};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Criterion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Criterion {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Criterion {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("{tag} {}: {}", self.name, self.detail)
    }
}

pub(crate) struct Context<'a> {
    pub cfg: &'a ExperimentConfig,
    pub threads: Option<usize>,
    pub out: &'a mut OutputDir,
}

/// Replicas of different N use disjoint random streams.
pub fn replica_key(n: usize, replica: u64) -> u64 {
    ((n as u64) << 32) | replica
}

/// Key of the standalone run paired with a coupled replica.
fn standalone_key(n: usize, replica: u64) -> u64 {
    replica_key(n, replica) | (1 << 31)
}

fn require(cfg: &ExperimentConfig, allowed: &[Process], what: &str) -> Result<()> {
    if allowed.contains(&cfg.process) {
        Ok(())
    } else {
        Err(Error::config(
            "process",
            format!("{what} needs process {allowed:?}, got {:?}", cfg.process),
        ))
    }
}

fn require_tests(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.test_functions.is_empty() {
        Err(Error::config("test_functions", "this command needs at least one test function"))
    } else {
        Ok(())
    }
}

fn params(cfg: &ExperimentConfig, h: &RateField, n: usize, window: Window, key: u64, log: bool) -> SimParams {
    let mut times = cfg.times();
    if times.last() != Some(&cfg.horizon) {
        times.push(cfg.horizon);
    }
    SimParams {
        n,
        horizon: cfg.horizon,
        kernel: cfg.kernel.clone(),
        rate: h.clone(),
        window,
        seed: cfg.seed,
        replica: key,
        snapshot_times: times,
        log_events: log,
    }
}

fn initial(profile: &InitialProfile, p: &SimParams) -> Result<ExclusionConfig> {
    let mut rng = stream_rng(p.seed, p.replica, Stream::InitialConfig);
    sample_bernoulli_profile(|u| profile.value(u), p.n, &p.window, &mut rng)
}

fn pairings<C: Empirical>(
    stats: &mut EnsembleStats,
    rec: &TrajectoryRecord<C>,
    tests: &[NamedTest],
    times: &[f64],
    n: usize,
) -> Result<()> {
    for &t in times {
        let config = rec
            .snapshot_at(t)
            .ok_or_else(|| Error::InvalidParams(format!("no snapshot at t = {t}")))?;
        for g in tests {
            stats.push(t, &g.id, empirical_pair(config, &g.function, t, n)?);
        }
    }
    Ok(())
}

fn snapshot_text<C>(rec: &TrajectoryRecord<C>, rle: impl Fn(&C) -> String) -> String {
    let mut s = format!("t=0 {}\n", rle(&rec.initial));
    for snap in &rec.snapshots {
        s.push_str(&format!("t={} {}\n", snap.time, rle(&snap.config)));
    }
    s
}

fn events_text<C>(rec: &TrajectoryRecord<C>) -> Result<Option<String>> {
    let Some(log) = &rec.event_log else {
        return Ok(None);
    };
    let mut s = String::new();
    for e in log {
        s.push_str(&serde_json::to_string(e)?);
        s.push('\n');
    }
    Ok(Some(s))
}

struct Dump {
    replica: u64,
    snapshots: String,
    events: Option<String>,
    j_path: Option<Vec<u8>>,
}

struct ReplicaOut {
    stats: EnsembleStats,
    totals: EventTotals,
    growth: u64,
    expected_left: f64,
    dump: Option<Dump>,
}

fn reduce<C>(
    rec: &TrajectoryRecord<C>,
    cfg: &ExperimentConfig,
    n: usize,
    replica: u64,
    rle: impl Fn(&C) -> String,
) -> Result<ReplicaOut>
where
    C: Empirical,
{
    let mut stats = EnsembleStats::new();
    pairings(&mut stats, rec, &cfg.test_functions, &cfg.times(), n)?;
    let dump = (replica < cfg.dump_replicas)
        .then(|| -> Result<Dump> {
            Ok(Dump {
                replica,
                snapshots: snapshot_text(rec, &rle),
                events: events_text(rec)?,
                j_path: None,
            })
        })
        .transpose()?;
    Ok(ReplicaOut {
        stats,
        totals: rec.totals,
        growth: rec.growth.len() as u64,
        expected_left: rec.expected_left_of_window,
        dump,
    })
}

fn run_replica(cfg: &ExperimentConfig, h: &RateField, n: usize, window: Window, r: u64) -> Result<ReplicaOut> {
    let log = cfg.emit_event_log && r < cfg.dump_replicas;
    let p = params(cfg, h, n, window, replica_key(n, r), log);
    let init = initial(&cfg.initial, &p)?;
    match cfg.process {
        Process::Eprs | Process::Ssep => {
            let rec = simulate_eprs(&p, &init)?;
            reduce(&rec, cfg, n, r, exclusion_to_rle)
        }
        Process::Epcs => {
            let rec = simulate_epcs(&p, &SpreadConfig::from_exclusion(&init))?;
            reduce(&rec, cfg, n, r, spread_to_rle)
        }
        Process::Coupled => {
            let rec = simulate_coupled(&p, &SpreadConfig::from_exclusion(&init))?;
            let mut out = reduce(&rec.epcs, cfg, n, r, spread_to_rle)?;
            if let Some(d) = &mut out.dump {
                let mut buf = Vec::new();
                write_j_path_csv(&rec.j_path, &mut buf)?;
                d.j_path = Some(buf);
            }
            Ok(out)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
struct RunSummary {
    n: usize,
    window: Window,
    replicas: u64,
    failed: u64,
    failures: Vec<String>,
    mean_exchange_attempts: f64,
    mean_exchanges: f64,
    mean_growth_events: f64,
    left_of_window: u64,
    right_of_window: u64,
    max_expected_left_of_window: f64,
}

/// Keeps the successful replicas in order; the failures are counted and
/// their first messages kept for the summary.
fn split<T>(results: Vec<Result<T>>) -> Result<(Vec<T>, u64, Vec<String>)> {
    let mut ok = Vec::new();
    let mut failed = 0;
    let mut msgs = Vec::new();
    let mut first = None;
    for r in results {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => {
                failed += 1;
                if msgs.len() < 5 {
                    msgs.push(e.to_string());
                }
                first.get_or_insert(e);
            }
        }
    }
    if ok.is_empty() {
        return Err(first.unwrap_or_else(|| Error::InvalidParams("no replicas".into())));
    }
    Ok((ok, failed, msgs))
}

struct Ensemble {
    stats: EnsembleStats,
    summary: RunSummary,
}

fn ensemble(ctx: &mut Context, dir: &str, n: usize) -> Result<Ensemble> {
    let cfg = ctx.cfg;
    let h = cfg.rate_field()?;
    let window = cfg.window_for(n)?;
    let results = replicate(cfg.replicas, ctx.threads, |r| run_replica(cfg, &h, n, window, r));
    let (outs, failed, failures) = split(results)?;
    let k = outs.len() as f64;
    let mut stats = EnsembleStats::new();
    let mut totals = EventTotals::default();
    let (mut growth, mut expected) = (0u64, 0.0f64);
    for o in &outs {
        stats = stats.merge(&o.stats);
        totals.exchange_attempts += o.totals.exchange_attempts;
        totals.exchanges += o.totals.exchanges;
        totals.left_of_window += o.totals.left_of_window;
        totals.right_of_window += o.totals.right_of_window;
        growth += o.growth;
        expected = expected.max(o.expected_left);
        if let Some(d) = &o.dump {
            ctx.out
                .write(&format!("{dir}/snapshots_N{n}_r{}.txt", d.replica), d.snapshots.as_bytes())?;
            if let Some(ev) = &d.events {
                ctx.out
                    .write(&format!("{dir}/events_N{n}_r{}.jsonl", d.replica), ev.as_bytes())?;
            }
            if let Some(j) = &d.j_path {
                ctx.out.write(&format!("{dir}/j_path_N{n}_r{}.csv", d.replica), j)?;
            }
        }
    }
    Ok(Ensemble {
        stats,
        summary: RunSummary {
            n,
            window,
            replicas: outs.len() as u64,
            failed,
            failures,
            mean_exchange_attempts: totals.exchange_attempts as f64 / k,
            mean_exchanges: totals.exchanges as f64 / k,
            mean_growth_events: growth as f64 / k,
            left_of_window: totals.left_of_window,
            right_of_window: totals.right_of_window,
            max_expected_left_of_window: expected,
        },
    })
}

fn observables_csv(csv: &mut Csv, n: usize, stats: &EnsembleStats) {
    for (key, m) in stats.iter() {
        csv.row([
            n.to_string(),
            key.time().to_string(),
            key.id.clone(),
            m.count.to_string(),
            m.mean.to_string(),
            m.std_err().to_string(),
            m.std_dev().to_string(),
        ]);
    }
}

const OBS_HEADER: [&str; 7] = ["N", "t", "G-id", "replicas", "mean", "stderr", "std_dev"];

pub(crate) fn simulate(ctx: &mut Context, dir: &str) -> Result<Vec<Criterion>> {
    let mut csv = Csv::new(&OBS_HEADER);
    let mut summaries = Vec::new();
    for &n in &ctx.cfg.n_list {
        let e = ensemble(ctx, dir, n)?;
        observables_csv(&mut csv, n, &e.stats);
        summaries.push(e.summary);
    }
    ctx.out.write(&format!("{dir}/observables.csv"), &csv.into_bytes())?;
    ctx.out.write_json(&format!("{dir}/summary.json"), &summaries)?;
    Ok(Vec::new())
}

/// Exact heat-equation solution from a Gaussian initial profile.
fn heat_exact(profile: &InitialProfile, sigma_sq: f64, t: f64, u: f64) -> Option<f64> {
    match *profile {
        InitialProfile::Gaussian {
            amplitude,
            center,
            width,
        } => {
            let w2 = width * width + 4.0 * sigma_sq * t;
            Some(amplitude * width / w2.sqrt() * (-(u - center).powi(2) / w2).exp())
        }
        _ => None,
    }
}

fn heat_error(cfg: &ExperimentConfig, sol: &GridFunction) -> Result<f64> {
    let s2 = cfg.kernel.sigma_sq();
    let row = sol.profile_at(cfg.horizon)?;
    let mut worst = 0.0f64;
    for (i, &v) in row.iter().enumerate() {
        let exact = heat_exact(&cfg.initial, s2, cfg.horizon, sol.node(i)).expect("gaussian profile");
        worst = worst.max((v - exact).abs());
    }
    Ok(worst)
}

#[derive(Serialize)]
struct PdeSummary {
    nodes: usize,
    du: f64,
    dt: f64,
    masses: Vec<(f64, f64)>,
    heat_max_error: Option<f64>,
    heat_refined_max_error: Option<f64>,
}

pub(crate) fn solve_pde(ctx: &mut Context, dir: &str) -> Result<Vec<Criterion>> {
    let cfg = ctx.cfg;
    let spec = cfg.pde_spec()?;
    let sol = cfg.solve_pde_on(spec, 0)?;
    ctx.out.write_with(&format!("{dir}/solution.csv"), |b| sol.write_csv(b))?;
    let mut criteria = Vec::new();
    let mut summary = PdeSummary {
        nodes: sol.nodes(),
        du: sol.du,
        dt: sol.dt,
        masses: sol.times.iter().enumerate().map(|(k, &t)| (t, sol.mass(k))).collect(),
        heat_max_error: None,
        heat_refined_max_error: None,
    };
    let exact_known = cfg.process == Process::Ssep
        && matches!(cfg.initial, InitialProfile::Gaussian { .. });
    if exact_known {
        let e0 = heat_error(cfg, &sol)?;
        summary.heat_max_error = Some(e0);
        let limit = cfg.criteria.heat_max_error;
        criteria.push(Criterion::new(
            "heat oracle max-norm error",
            e0 < limit,
            format!("error {e0:.3e} (limit {limit:.1e}) at du = {}", sol.du),
        ));
        if spec.refinements >= 1 {
            let e1 = heat_error(cfg, &cfg.solve_pde_on(spec, 1)?)?;
            summary.heat_refined_max_error = Some(e1);
            let ratio = e0 / e1;
            let need = cfg.criteria.heat_order_ratio;
            criteria.push(Criterion::new(
                "heat error reduction on halving du",
                ratio >= need,
                format!("errors {e0:.3e} -> {e1:.3e}, ratio {ratio:.3} (need >= {need})"),
            ));
        }
    }
    ctx.out.write_json(&format!("{dir}/summary.json"), &summary)?;
    Ok(criteria)
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ")
}

pub(crate) fn verify_hydro(ctx: &mut Context, dir: &str) -> Result<Vec<Criterion>> {
    let cfg = ctx.cfg;
    require(cfg, &[Process::Ssep, Process::Eprs, Process::Epcs], "verify-hydro")?;
    require_tests(cfg)?;
    let pde = cfg.solve_pde(0)?;
    let times = cfg.times();
    let mut obs = Csv::new(&OBS_HEADER);
    let mut rows = Vec::new();
    let mut summaries: Vec<HydroSummary> = Vec::new();
    let mut runs = Vec::new();
    for &n in &cfg.n_list {
        let e = ensemble(ctx, dir, n)?;
        observables_csv(&mut obs, n, &e.stats);
        let s = hydro_error(n, &e.stats, &pde, &cfg.test_functions, &times)?;
        rows.extend(s.rows.iter().cloned());
        summaries.push(s);
        runs.push(e.summary);
    }
    ctx.out.write(&format!("{dir}/observables.csv"), &obs.into_bytes())?;
    ctx.out.write_with(&format!("{dir}/hydro.csv"), |b| write_hydro_csv(&rows, b))?;
    #[derive(Serialize)]
    struct Summary<'a> {
        runs: &'a [RunSummary],
        hydro: Vec<(usize, f64, f64)>,
    }
    ctx.out.write_json(
        &format!("{dir}/summary.json"),
        &Summary {
            runs: &runs,
            hydro: summaries.iter().map(|s| (s.n, s.max_error, s.max_abs_error)).collect(),
        },
    )?;
    let errs: Vec<f64> = summaries.iter().map(|s| s.max_error).collect();
    let last = *errs.last().expect("nonempty N list");
    let limit = cfg.criteria.hydro_max_error;
    let n_max = *cfg.n_list.last().unwrap();
    let mut criteria = Vec::new();
    if errs.len() > 1 {
        criteria.push(Criterion::new(
            "hydro error decreasing in N",
            strictly_decreasing(&errs),
            format!("max(|mean - pde| + sd) = [{}] for N = {:?}", list(&errs), cfg.n_list),
        ));
    }
    criteria.push(Criterion::new(
        format!("hydro error at N = {n_max}"),
        last < limit,
        format!(
            "{last:.4} (limit {limit}); |mean - pde| alone {:.4}",
            summaries.last().unwrap().max_abs_error
        ),
    ));
    Ok(criteria)
}

pub(crate) fn verify_wlln(ctx: &mut Context, dir: &str) -> Result<Vec<Criterion>> {
    let cfg = ctx.cfg;
    require(cfg, &[Process::Eprs], "verify-wlln")?;
    let h = cfg.rate_field()?;
    let t = cfg.horizon;
    let target = wlln_target(&h, t)?;
    let mut csv = Csv::new(&["N", "replicas", "failed", "mean", "stderr", "std_dev", "target", "z"]);
    let (mut zs, mut sds) = (Vec::new(), Vec::new());
    for &n in &cfg.n_list {
        let window = cfg.window_for(n)?;
        let results = replicate(cfg.replicas, ctx.threads, |r| {
            let mut p = params(cfg, &h, n, window, replica_key(n, r), false);
            p.snapshot_times.clear();
            let init = initial(&cfg.initial, &p)?;
            let rec = simulate_eprs(&p, &init)?;
            wlln_statistic(&rec, t)
        });
        let (xs, failed, _) = split(results)?;
        let m = Moments::from_samples(&xs);
        let z = (m.mean - target) / m.std_err();
        csv.row([
            n.to_string(),
            m.count.to_string(),
            failed.to_string(),
            m.mean.to_string(),
            m.std_err().to_string(),
            m.std_dev().to_string(),
            target.to_string(),
            z.to_string(),
        ]);
        zs.push(z);
        sds.push(m.std_dev());
    }
    ctx.out.write(&format!("{dir}/wlln.csv"), &csv.into_bytes())?;
    let zmax = cfg.criteria.z_max;
    let mut criteria = vec![Criterion::new(
        "wlln mean within z_max standard errors",
        zs.iter().all(|z| z.abs() < zmax),
        format!("target {target:.6}, z = [{}] (limit {zmax})", list(&zs)),
    )];
    if sds.len() > 1 {
        criteria.push(Criterion::new(
            "wlln standard deviation decreasing in N",
            strictly_decreasing(&sds),
            format!("sd = [{}]", list(&sds)),
        ));
    }
    Ok(criteria)
}

struct MartOut {
    m: f64,
    qv: f64,
    printed_gap: Option<f64>,
    path: Option<(u64, Vec<u8>)>,
}

pub(crate) fn verify_martingale(ctx: &mut Context, dir: &str) -> Result<Vec<Criterion>> {
    let cfg = ctx.cfg;
    require(cfg, &[Process::Eprs, Process::Ssep], "verify-martingale")?;
    require_tests(cfg)?;
    let spec = cfg.martingale.clone().unwrap_or_default();
    let test = match &spec.test {
        Some(id) => cfg.test_functions.iter().find(|g| &g.id == id).expect("validated"),
        None => &cfg.test_functions[0],
    };
    let h = cfg.rate_field()?;
    let mut times = cfg.times();
    if times.last() != Some(&cfg.horizon) {
        times.push(cfg.horizon);
    }
    let mut csv = Csv::new(&[
        "N", "replicas", "mean_M", "stderr_M", "mean_M2", "stderr_M2", "mean_QV", "stderr_QV",
        "mean_M2_minus_QV", "stderr_M2_minus_QV", "max_printed_gap",
    ]);
    let mut rows = Vec::new();
    for &n in &cfg.n_list {
        let window = cfg.window_for(n)?;
        let template = params(cfg, &h, n, window, 0, true);
        let setup = MartingaleSetup::for_eprs(&template, test.function)?;
        let results = replicate(cfg.replicas, ctx.threads, |r| {
            let mut p = template.with_replica(replica_key(n, r));
            p.snapshot_times.clear();
            let init = initial(&cfg.initial, &p)?;
            let rec = simulate_eprs(&p, &init)?;
            let printed = spec.printed_formula && r < spec.printed_replicas;
            let rep = martingale_report(&rec, &setup, &times, spec.integration, printed)?;
            let gap = rep.printed_variation.as_ref().map(|pv| {
                pv.iter()
                    .zip(&rep.quadratic_variation)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            });
            let path = (r < cfg.dump_replicas)
                .then(|| {
                    let mut c = Csv::new(&["t", "pairing", "M", "QV", "printed_QV"]);
                    for k in 0..rep.times.len() {
                        c.row([
                            rep.times[k].to_string(),
                            rep.pairing[k].to_string(),
                            rep.martingale[k].to_string(),
                            rep.quadratic_variation[k].to_string(),
                            rep.printed_variation.as_ref().map_or(String::new(), |p| p[k].to_string()),
                        ]);
                    }
                    (r, c.into_bytes())
                });
            Ok(MartOut {
                m: *rep.martingale.last().unwrap(),
                qv: *rep.quadratic_variation.last().unwrap(),
                printed_gap: gap,
                path,
            })
        });
        let (outs, _, _) = split(results)?;
        let mut mm = Moments::default();
        let mut m2 = Moments::default();
        let mut qv = Moments::default();
        let mut d = Moments::default();
        let mut gap = None::<f64>;
        for o in &outs {
            mm.push(o.m);
            m2.push(o.m * o.m);
            qv.push(o.qv);
            d.push(o.m * o.m - o.qv);
            if let Some(g) = o.printed_gap {
                gap = Some(gap.map_or(g, |x| x.max(g)));
            }
            if let Some((r, bytes)) = &o.path {
                ctx.out.write(&format!("{dir}/path_N{n}_r{r}.csv"), bytes)?;
            }
        }
        csv.row([
            n.to_string(),
            mm.count.to_string(),
            mm.mean.to_string(),
            mm.std_err().to_string(),
            m2.mean.to_string(),
            m2.std_err().to_string(),
            qv.mean.to_string(),
            qv.std_err().to_string(),
            d.mean.to_string(),
            d.std_err().to_string(),
            gap.map_or(String::new(), |g| g.to_string()),
        ]);
        rows.push((n, mm, m2, qv, d, gap));
    }
    ctx.out.write(&format!("{dir}/martingale.csv"), &csv.into_bytes())?;

    let zmax = cfg.criteria.z_max;
    let z_of = |m: &Moments| m.mean / m.std_err();
    let zm: Vec<f64> = rows.iter().map(|r| z_of(&r.1)).collect();
    let zd: Vec<f64> = rows.iter().map(|r| z_of(&r.4)).collect();
    let mut criteria = vec![
        Criterion::new(
            "martingale mean zero",
            zm.iter().all(|z| z.abs() <= zmax),
            format!("z(M_T) = [{}] for N = {:?}", list(&zm), cfg.n_list),
        ),
        Criterion::new(
            "E[M_T^2] matches E[<M>_T]",
            zd.iter().all(|z| z.abs() <= zmax),
            format!("z(M_T^2 - <M>_T) = [{}]", list(&zd)),
        ),
    ];
    let [lo, hi] = cfg.criteria.scaling_ratio;
    let mut ratios = Vec::new();
    for w in rows.windows(2) {
        if w[1].0 == 2 * w[0].0 {
            ratios.push(w[0].2.mean / w[1].2.mean);
            ratios.push(w[0].3.mean / w[1].3.mean);
        }
    }
    if !ratios.is_empty() {
        criteria.push(Criterion::new(
            "variance scales as 1/N",
            ratios.iter().all(|r| (lo..=hi).contains(r)),
            format!("doubling ratios of E[M_T^2], E[<M>_T] = [{}] (range [{lo}, {hi}])", list(&ratios)),
        ));
    }
    let gaps: Vec<f64> = rows.iter().filter_map(|r| r.5).collect();
    if !gaps.is_empty() {
        let worst = gaps.iter().cloned().fold(0.0, f64::max);
        if h.is_zero() {
            let tol = cfg.criteria.printed_tolerance;
            criteria.push(Criterion::new(
                "printed quadratic variation matches on exclusion-only runs",
                worst <= tol,
                format!(
                    "max pathwise gap {worst:.3e} over the first {} replicas per N (limit {tol:.0e})",
                    spec.printed_replicas.min(cfg.replicas)
                ),
            ));
        } else {
            eprintln!(
                "note: printed quadratic-variation formula differs from the carre du champ by up to {worst:.4e} (reported, not asserted)"
            );
        }
    }
    Ok(criteria)
}

/// `(int_lo^hi (f - g)^2)^(1/2)` by the trapezoid rule on `f`'s nodes.
fn l2_gap(f: &GridFunction, g: &GridFunction, t: f64, lo: f64, hi: f64) -> Result<f64> {
    let kf = f.time_index(t).ok_or_else(|| Error::InvalidParams(format!("no solution at {t}")))?;
    let kg = g.time_index(t).ok_or_else(|| Error::InvalidParams(format!("no solution at {t}")))?;
    let mut sum = 0.0;
    let mut prev: Option<f64> = None;
    for i in 0..f.nodes() {
        let u = f.node(i);
        if u < lo - 1e-9 || u > hi + 1e-9 {
            continue;
        }
        let a = f.values[kf][i];
        let b = g
            .interpolate(kg, u)
            .ok_or_else(|| Error::InvalidParams(format!("{u} outside the comparison grid")))?;
        let sq = (a - b) * (a - b);
        if let Some(p) = prev {
            sum += 0.5 * (p + sq) * f.du;
        }
        prev = Some(sq);
    }
    Ok(sum.sqrt())
}

#[derive(Clone, Debug, Serialize)]
struct Richardson {
    differences: Vec<f64>,
    order: f64,
    estimate: f64,
}

/// Error of the coarsest solution from successive differences; the order is
/// observed when three levels exist and first order is assumed otherwise.
fn richardson(levels: &[GridFunction], t: f64, lo: f64, hi: f64) -> Result<Richardson> {
    let diffs = levels
        .windows(2)
        .map(|w| l2_gap(&w[0], &w[1], t, lo, hi))
        .collect::<Result<Vec<_>>>()?;
    let order = if diffs.len() >= 2 && diffs[1] > 0.0 {
        (diffs[0] / diffs[1]).log2().clamp(0.5, 4.0)
    } else {
        1.0
    };
    Ok(Richardson {
        estimate: diffs[0] / (1.0 - 0.5f64.powf(order)),
        differences: diffs,
        order,
    })
}

pub(crate) fn verify_transform(ctx: &mut Context, dir: &str) -> Result<Vec<Criterion>> {
    let cfg = ctx.cfg;
    require(cfg, &[Process::Eprs, Process::Epcs, Process::Coupled], "verify-transform")?;
    let spec = cfg.pde_spec()?;
    if spec.refinements < 1 {
        return Err(Error::config("pde.refinements", "the transformation check needs at least one refinement"));
    }
    let h = cfg.rate_field()?;
    let b = b_from_h(&h)?;
    let s2 = cfg.kernel.sigma_sq();
    let rho0 = |u: f64| cfg.initial.value(u);
    let zeta0 = |u: f64| 1.0 - cfg.initial.value(u);
    let mut direct = Vec::new();
    let mut via = Vec::new();
    for level in 0..=spec.refinements {
        let grid = cfg.grid(spec, level);
        direct.push(solve_epcs_pde(s2, &h, &rho0, &grid)?);
        let zeta = solve_eprs_pde(s2, &h, &zeta0, &grid)?;
        via.push(transform_solution(&zeta, |t| b.shift_at(t))?);
    }
    let t = cfg.horizon;
    let lo = via.iter().map(|g| g.u_min).fold(direct[0].u_min, f64::max);
    let hi = via.iter().map(|g| g.u_max()).fold(direct[0].u_max(), f64::min);
    let gap = l2_gap(&direct[0], &via[0], t, lo, hi)?;
    let r_direct = richardson(&direct, t, lo, hi)?;
    let r_via = richardson(&via, t, lo, hi)?;
    let budget = cfg.criteria.transform_factor * r_direct.estimate.max(r_via.estimate);

    let mut csv = Csv::new(&["u", "rho_direct", "rho_transformed"]);
    let k = direct[0].time_index(t).expect("horizon stored");
    let kv = via[0].time_index(t).expect("horizon stored");
    for i in 0..direct[0].nodes() {
        let u = direct[0].node(i);
        if (lo..=hi).contains(&u) {
            csv.row([
                u.to_string(),
                direct[0].values[k][i].to_string(),
                via[0].interpolate(kv, u).unwrap_or(f64::NAN).to_string(),
            ]);
        }
    }
    ctx.out.write(&format!("{dir}/transform.csv"), &csv.into_bytes())?;
    #[derive(Serialize)]
    struct Summary {
        l2_difference: f64,
        budget: f64,
        range: (f64, f64),
        direct: Richardson,
        transformed: Richardson,
    }
    let detail = format!(
        "L2 gap {gap:.4e} vs budget {budget:.4e} ({} x max(Richardson {:.4e}, {:.4e}))",
        cfg.criteria.transform_factor, r_direct.estimate, r_via.estimate
    );
    ctx.out.write_json(
        &format!("{dir}/summary.json"),
        &Summary {
            l2_difference: gap,
            budget,
            range: (lo, hi),
            direct: r_direct,
            transformed: r_via,
        },
    )?;
    Ok(vec![Criterion::new("transformed solution matches", gap <= budget, detail)])
}

struct CoupledOut {
    j_over_n: f64,
    max_gap_excess: i64,
    pair_within_j: (u64, u64),
    coupled_obs: f64,
    standalone_obs: f64,
    j_path: Option<(u64, Vec<u8>)>,
}

pub(crate) fn verify_coupling(ctx: &mut Context, dir: &str) -> Result<Vec<Criterion>> {
    let cfg = ctx.cfg;
    require(cfg, &[Process::Coupled], "the coupling check")?;
    require_tests(cfg)?;
    let h = cfg.rate_field()?;
    let g = &cfg.test_functions[0];
    let t = cfg.horizon;
    let mut csv = Csv::new(&[
        "N", "replicas", "failed", "mean_J_over_N", "stderr_J_over_N", "max_mass_gap_minus_J",
        "pairs_within_J", "ks_statistic", "ks_p_value",
    ]);
    let mut means = Vec::new();
    let mut all_bounded = true;
    let mut pvals = Vec::new();
    let mut notes = Vec::new();
    for &n in &cfg.n_list {
        let window = cfg.window_for(n)?;
        let results = replicate(cfg.replicas, ctx.threads, |r| {
            let p = params(cfg, &h, n, window, replica_key(n, r), false);
            let rec = simulate_coupled(&p, &SpreadConfig::from_exclusion(&initial(&cfg.initial, &p)?))?;
            let mut excess = i64::MIN;
            let mut within = (0, 0);
            for s in &rec.snapshots {
                let gap = s.births_epcs.abs_diff(s.births_aux) as i64;
                excess = excess.max(gap - s.j as i64);
                if let Some(d) = s.max_pair_distance {
                    within.1 += 1;
                    within.0 += (d <= s.j as f64) as u64;
                }
            }
            let coupled_obs = empirical_pair(&rec.epcs.final_config, &g.function, t, n)?;
            let q = params(cfg, &h, n, window, standalone_key(n, r), false);
            let alone = simulate_epcs(&q, &SpreadConfig::from_exclusion(&initial(&cfg.initial, &q)?))?;
            let standalone_obs = empirical_pair(&alone.final_config, &g.function, t, n)?;
            let j_path = (r < cfg.dump_replicas)
                .then(|| -> Result<(u64, Vec<u8>)> {
                    let mut buf = Vec::new();
                    write_j_path_csv(&rec.j_path, &mut buf)?;
                    Ok((r, buf))
                })
                .transpose()?;
            Ok(CoupledOut {
                j_over_n: rec.final_state.j as f64 / n as f64,
                max_gap_excess: excess,
                pair_within_j: within,
                coupled_obs,
                standalone_obs,
                j_path,
            })
        });
        let (outs, failed, failures) = split(results)?;
        if failed > 0 {
            all_bounded = false;
            notes.push(format!("N = {n}: {failed} failed replicas ({})", failures.join("; ")));
        }
        let mut jm = Moments::default();
        let mut excess = i64::MIN;
        let mut within = (0u64, 0u64);
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for o in &outs {
            jm.push(o.j_over_n);
            excess = excess.max(o.max_gap_excess);
            within.0 += o.pair_within_j.0;
            within.1 += o.pair_within_j.1;
            xs.push(o.coupled_obs);
            ys.push(o.standalone_obs);
            if let Some((r, bytes)) = &o.j_path {
                ctx.out.write(&format!("{dir}/j_path_N{n}_r{r}.csv"), bytes)?;
            }
        }
        all_bounded &= excess <= 0;
        let ks = ks_two_sample(&xs, &ys)?;
        csv.row([
            n.to_string(),
            jm.count.to_string(),
            failed.to_string(),
            jm.mean.to_string(),
            jm.std_err().to_string(),
            excess.to_string(),
            format!("{}/{}", within.0, within.1),
            ks.statistic.to_string(),
            ks.p_value.to_string(),
        ]);
        means.push(jm.mean);
        pvals.push(ks.p_value);
    }
    ctx.out.write(&format!("{dir}/coupling.csv"), &csv.into_bytes())?;
    let alpha = cfg.criteria.significance;
    let per_test = alpha / pvals.len() as f64;
    let mut criteria = vec![Criterion::new(
        "mass gap bounded by J on every path",
        all_bounded,
        if notes.is_empty() {
            "|n - n_hat| <= J at every event and snapshot".to_string()
        } else {
            notes.join("; ")
        },
    )];
    if means.len() > 1 {
        criteria.push(Criterion::new(
            "mean J_T/N decreasing in N",
            strictly_decreasing(&means),
            format!("[{}] for N = {:?}", list(&means), cfg.n_list),
        ));
    }
    criteria.push(Criterion::new(
        "coupled marginal matches the standalone process",
        pvals.iter().all(|&p| p >= per_test),
        format!(
            "two-sample KS on <pi_T, {}>: p = [{}] (level {alpha}, Bonferroni {per_test:.4})",
            g.id,
            list(&pvals)
        ),
    ));
    Ok(criteria)
}

/// Dispatches one pipeline into `<dir>/`.
pub(crate) fn run_check(ctx: &mut Context, check: Check) -> Result<Vec<Criterion>> {
    match check {
        Check::Simulate => simulate(ctx, "simulate"),
        Check::SolvePde => solve_pde(ctx, "solve-pde"),
        Check::Hydro => verify_hydro(ctx, "verify-hydro"),
        Check::Wlln => verify_wlln(ctx, "verify-wlln"),
        Check::Martingale => verify_martingale(ctx, "verify-martingale"),
        Check::Transform => verify_transform(ctx, "verify-transform"),
        Check::Coupling => verify_coupling(ctx, "sim-coupled"),
    }
}

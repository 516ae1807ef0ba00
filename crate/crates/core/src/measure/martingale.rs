//! Dynkin martingale of `F = <pi^N, H>` along a recorded right-shift
//! trajectory, and its quadratic variation.
//!
//! Between two events that touch the support of `H` the configuration is
//! fixed, so the time integrals reduce to per-site integrals of known
//! functions of time. Those are tabulated once per setup (Simpson on a time
//! grid, quadratic interpolation inside a cell) and reused across replicas.

use serde::{Deserialize, Serialize};

use super::TestFunction;
use crate::dynamics::{EventKind, SimParams, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::kernels::{b_from_h, JumpKernel, RateField};
use crate::lattice::ExclusionConfig;

/// Time cells of the tables when anything depends on time.
const TIME_CELLS: usize = 1024;
/// Longest sub-interval of the composite Simpson rule in the direct route, as a fraction of T.
const DIRECT_STEPS: f64 = 512.0;
/// Relative size of the neglected far-left tail of `sum_x b(s, x/N)`.
const TAIL_TOL: f64 = 1e-14;

/// Per-channel rates sampled at the nodes and midpoints of a uniform time
/// grid, with their running integrals.
#[derive(Clone, Debug)]
struct Table {
    channels: usize,
    cells: usize,
    dt: f64,
    horizon: f64,
    rate: Vec<f64>,
    cum: Vec<f64>,
}

impl Table {
    fn build(
        channels: usize,
        cells: usize,
        horizon: f64,
        mut fill: impl FnMut(f64, &mut [f64]),
    ) -> Self {
        let dt = horizon / cells as f64;
        let points = 2 * cells + 1;
        // time-major, so one time row of every channel is contiguous
        let mut rate = vec![0.0; channels * points];
        for j in 0..points {
            let t = (0.5 * dt * j as f64).min(horizon);
            fill(t, &mut rate[j * channels..(j + 1) * channels]);
        }
        let mut cum = vec![0.0; channels * (cells + 1)];
        for k in 0..cells {
            for c in 0..channels {
                let r = |j: usize| rate[j * channels + c];
                cum[(k + 1) * channels + c] = cum[k * channels + c]
                    + dt / 6.0 * (r(2 * k) + 4.0 * r(2 * k + 1) + r(2 * k + 2));
            }
        }
        Table {
            channels,
            cells,
            dt,
            horizon,
            rate,
            cum,
        }
    }

    #[inline]
    fn locate(&self, t: f64) -> (usize, f64) {
        let x = (t.clamp(0.0, self.horizon)) / self.dt;
        let k = (x.floor() as usize).min(self.cells - 1);
        (k, (x - k as f64).clamp(0.0, 1.0))
    }

    #[inline]
    fn nodes(&self, c: usize, k: usize) -> (f64, f64, f64) {
        let base = 2 * k * self.channels + c;
        let ch = self.channels;
        (self.rate[base], self.rate[base + ch], self.rate[base + 2 * ch])
    }

    /// Weights of the three nodes in the integral up to fraction `th` of a cell.
    #[inline]
    fn cum_weights(th: f64) -> (f64, f64, f64) {
        let (t2, t3) = (th * th, th * th * th);
        (
            2.0 * t3 / 3.0 - 1.5 * t2 + th,
            2.0 * t2 - 4.0 * t3 / 3.0,
            2.0 * t3 / 3.0 - 0.5 * t2,
        )
    }

    /// Quadratic interpolation of the rate.
    #[inline]
    fn rate_at(&self, c: usize, t: f64) -> f64 {
        let (k, th) = self.locate(t);
        let (f0, fm, f1) = self.nodes(c, k);
        f0 * (2.0 * th - 1.0) * (th - 1.0) + fm * 4.0 * th * (1.0 - th) + f1 * th * (2.0 * th - 1.0)
    }

    /// Integral of the interpolated rate from 0 to `t`.
    #[inline]
    fn cum_at(&self, c: usize, t: f64) -> f64 {
        let (k, th) = self.locate(t);
        let (f0, fm, f1) = self.nodes(c, k);
        let (w0, wm, w1) = Self::cum_weights(th);
        self.cum[k * self.channels + c] + self.dt * (f0 * w0 + fm * wm + f1 * w1)
    }

    /// `cum_at(c, t)` for every channel.
    fn cum_all(&self, t: f64, out: &mut Vec<f64>) {
        let (k, th) = self.locate(t);
        let (w0, wm, w1) = Self::cum_weights(th);
        let ch = self.channels;
        let base = &self.cum[k * ch..(k + 1) * ch];
        let r0 = &self.rate[2 * k * ch..(2 * k + 1) * ch];
        let rm = &self.rate[(2 * k + 1) * ch..(2 * k + 2) * ch];
        let r1 = &self.rate[(2 * k + 2) * ch..(2 * k + 3) * ch];
        out.clear();
        out.extend((0..ch).map(|c| base[c] + self.dt * (r0[c] * w0 + rm[c] * wm + r1[c] * w1)));
    }
}

/// Everything about `(N, p, b, H, window)` that does not depend on the trajectory.
#[derive(Clone, Debug)]
pub struct MartingaleSetup {
    n: usize,
    horizon: f64,
    one_sided: Vec<f64>,
    test: TestFunction,
    b: Option<RateField>,
    window_left: i64,
    window_len: usize,
    /// First site of the tracked block and its length.
    first: i64,
    len: usize,
    /// Per site: the integrand weight `dH/ds / N + g + delta B / N`.
    integrand: Table,
    /// Per `(site, d)`: `p(d) (H(y + d) - H(y))^2`.
    pairs: Table,
    /// Per site `b(s, y/N)`, then the sum of `b` over all sites left of the block.
    shifts: Option<Table>,
    /// `H(0, y + 1) - H(0, y)` per site.
    delta: Vec<f64>,
}

impl MartingaleSetup {
    /// `b` is the shift rate field (already shifted for the right-sided process).
    pub fn new(
        n: usize,
        kernel: &JumpKernel,
        b: &RateField,
        test: TestFunction,
        horizon: f64,
        window: (i64, usize),
    ) -> Result<Self> {
        test.validate()?;
        if n == 0 || !(horizon > 0.0) {
            return Err(Error::InvalidParams("need N >= 1 and T > 0".into()));
        }
        let nf = n as f64;
        let range = kernel.range() as i64;
        let (lo, hi) = test.support_over(horizon);
        let first = (lo * nf).floor() as i64 - range - 1;
        let last = (hi * nf).ceil() as i64 + range + 1;
        let (window_left, window_len) = window;
        if first <= window_left || last >= window_left + window_len as i64 {
            return Err(Error::OutOfWindow(format!(
                "sites [{first}, {last}] needed by the test function are not strictly inside the window"
            )));
        }
        let len = (last - first + 1) as usize;
        let b = (!b.is_zero()).then(|| b.clone());
        let timed = b.is_some() || test.is_time_dependent();
        let cells = if timed { TIME_CELLS } else { 1 };

        let mut setup = MartingaleSetup {
            n,
            horizon,
            one_sided: kernel.one_sided().to_vec(),
            test,
            b,
            window_left,
            window_len,
            first,
            len,
            integrand: Table::build(0, 1, horizon, |_, _| {}),
            pairs: Table::build(0, 1, horizon, |_, _| {}),
            shifts: None,
            delta: Vec::new(),
        };
        setup.delta = (0..len as i64)
            .map(|i| setup.h(0.0, first + i + 1) - setup.h(0.0, first + i))
            .collect();
        if let Some(bf) = &setup.b {
            let tail_start = first;
            setup.shifts = Some(Table::build(len + 1, cells, horizon, |t, out| {
                for (i, o) in out[..len].iter_mut().enumerate() {
                    *o = bf.value(t, (first + i as i64) as f64 / nf);
                }
                out[len] = left_tail_sum(bf, t, tail_start, n);
            }));
        }
        let r = setup.one_sided.len();
        let pairs = Table::build(len * r, cells, horizon, |t, out| setup.fill_pairs(t, out));
        let integrand = Table::build(len, cells, horizon, |t, out| setup.fill_integrand(t, out));
        setup.pairs = pairs;
        setup.integrand = integrand;
        Ok(setup)
    }

    /// Setup for the right-shift process of `params` (rate `b = b_from_h(h)`).
    pub fn for_eprs(params: &SimParams, test: TestFunction) -> Result<Self> {
        let b = b_from_h(&params.rate)?;
        MartingaleSetup::new(
            params.n,
            &params.kernel,
            &b,
            test,
            params.horizon,
            params.window.sites(params.n),
        )
    }

    pub fn test_function(&self) -> &TestFunction {
        &self.test
    }

    /// Sites whose occupation enters the diagnostics.
    pub fn tracked_sites(&self) -> (i64, usize) {
        (self.first, self.len)
    }

    #[inline]
    fn h(&self, t: f64, y: i64) -> f64 {
        self.test.value(t, y as f64 / self.n as f64)
    }

    fn b_at(&self, t: f64, i: usize) -> f64 {
        self.shifts.as_ref().map_or(0.0, |s| s.rate_at(i, t))
    }

    fn b_left(&self, t: f64) -> f64 {
        self.shifts.as_ref().map_or(0.0, |s| s.rate_at(self.len, t))
    }

    /// `B(s, y) = sum_{x <= y} b(s, x/N)` for every tracked site.
    fn cumulative_b(&self, t: f64, out: &mut Vec<f64>) {
        out.clear();
        let mut acc = self.b_left(t);
        for i in 0..self.len {
            acc += self.b_at(t, i);
            out.push(acc);
        }
    }

    fn fill_pairs(&self, t: f64, out: &mut [f64]) {
        let r = self.one_sided.len();
        for i in 0..self.len {
            let y = self.first + i as i64;
            let hy = self.h(t, y);
            for (k, p) in self.one_sided.iter().enumerate() {
                let d = k + 1;
                out[i * r + k] = if i + d < self.len {
                    let dh = self.h(t, y + d as i64) - hy;
                    p * dh * dh
                } else {
                    0.0
                };
            }
        }
    }

    fn fill_integrand(&self, t: f64, out: &mut [f64]) {
        let nf = self.n as f64;
        let mut big_b = Vec::with_capacity(self.len);
        self.cumulative_b(t, &mut big_b);
        for i in 0..self.len {
            let y = self.first + i as i64;
            let u = y as f64 / nf;
            let hy = self.h(t, y);
            let lap: f64 = self
                .one_sided
                .iter()
                .enumerate()
                .map(|(k, p)| {
                    let d = (k + 1) as i64;
                    p * (self.h(t, y + d) + self.h(t, y - d) - 2.0 * hy)
                })
                .sum();
            let delta = self.h(t, y + 1) - hy;
            out[i] = self.test.d_dt(t, u) / nf + nf * lap + delta * big_b[i] / nf;
        }
    }

    /// `(d/ds + L) <pi, H>` at time `t` for the tracked cells, evaluated without tables for `H`.
    fn integrand_direct(&self, t: f64, cells: &[u8], scratch: &mut Vec<f64>) -> f64 {
        scratch.resize(self.len, 0.0);
        let mut w = std::mem::take(scratch);
        self.fill_integrand(t, &mut w);
        let f = cells
            .iter()
            .zip(&w)
            .filter(|(c, _)| **c == 1)
            .map(|(_, v)| v)
            .sum();
        *scratch = w;
        f
    }

    /// Carré du champ `sum rate (Delta F)^2` at time `t`.
    fn gamma_direct(&self, t: f64, cells: &[u8]) -> f64 {
        let nf = self.n as f64;
        let r = self.one_sided.len();
        let mut ex = 0.0;
        for i in 0..self.len {
            for k in 0..r {
                let j = i + k + 1;
                if j < self.len && cells[i] != cells[j] {
                    ex += self.pairs.rate_at(i * r + k, t);
                }
            }
        }
        if self.shifts.is_none() {
            return ex;
        }
        // sum_z b(z) (sum_{y >= z} xi(y) delta(y))^2 / N^2
        let mut q = 0.0;
        let mut sh = 0.0;
        for i in (0..self.len).rev() {
            let y = self.first + i as i64;
            if cells[i] == 1 {
                q += self.h(t, y + 1) - self.h(t, y);
            }
            sh += self.b_at(t, i) * q * q;
        }
        sh += self.b_left(t) * q * q;
        ex + sh / (nf * nf)
    }

    /// The four-line closed form for the quadratic-variation rate, transcribed term by term.
    fn gamma_printed(&self, t: f64, cells: &[u8], big_b: &mut Vec<f64>) -> f64 {
        let nf = self.n as f64;
        let n3 = nf * nf * nf;
        let grad = |y: i64| nf * (self.h(t, y + 1) - self.h(t, y));
        let xi = |i: usize| cells[i] as f64;
        // line 1: ordered pairs (x, y), |x - y| = z, xi(x) (1 - xi(y))
        let mut l1 = 0.0;
        for (k, p) in self.one_sided.iter().enumerate() {
            let z = k + 1;
            for i in 0..self.len.saturating_sub(z) {
                let j = i + z;
                if cells[i] == cells[j] {
                    continue;
                }
                let s: f64 = (0..z).map(|w| grad(self.first + (i + w) as i64)).sum();
                l1 += p * s * s;
            }
        }
        l1 /= nf * nf;
        if self.shifts.is_none() {
            return l1;
        }
        self.cumulative_b(t, big_b);
        let a = |i: usize| big_b[i] / nf;
        let mut l2 = 0.0;
        let mut l3 = 0.0;
        let mut l4 = 0.0;
        // running sums over w < z
        let mut grad_xi = 0.0;
        let mut b_grad_xi = 0.0;
        let mut a_grad_xi = 0.0;
        for i in 0..self.len {
            let y = self.first + i as i64;
            let g = grad(y) * xi(i);
            l2 += a(i) * g * grad(y);
            l3 += 2.0 * a_grad_xi * g;
            if cells[i] == 1 {
                // sum_{w < x < z} b = B(z - 1) - B(w)
                let below = if i > 0 { big_b[i - 1] } else { self.b_left(t) };
                l4 += self.h(t, y) * (below * grad_xi - b_grad_xi);
            }
            grad_xi += g;
            b_grad_xi += big_b[i] * g;
            a_grad_xi += a(i) * g;
        }
        l1 + l2 / n3 + l3 / n3 - 2.0 * l4 / n3
    }
}

/// `sum_{x < first} b(t, x/N)`, truncated once the envelope bounds the rest below the tolerance.
fn left_tail_sum(b: &RateField, t: f64, first: i64, n: usize) -> f64 {
    let nf = n as f64;
    let (c, beta) = b.envelope();
    let ratio = (-beta / nf).exp();
    let mut acc = 0.0;
    let mut x = first - 1;
    loop {
        acc += b.value(t, x as f64 / nf);
        if x < 0 {
            let bound = c * (-beta * (x.unsigned_abs() as f64) / nf).exp() * ratio / (1.0 - ratio);
            if bound <= TAIL_TOL * acc.max(1e-300) || bound < 1e-300 {
                break;
            }
        }
        x -= 1;
    }
    acc
}

/// Time integration of the generator terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integration {
    /// Precomputed per-site integrals; O(1) work per exchange.
    Tabulated,
    /// Composite Simpson between consecutive events, recomputing the integrand.
    Direct,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QvMode {
    CarreDuChamp,
    PrintedFormula,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingaleReport {
    pub times: Vec<f64>,
    /// `<pi_t, H(t)>`.
    pub pairing: Vec<f64>,
    pub martingale: Vec<f64>,
    pub quadratic_variation: Vec<f64>,
    pub printed_variation: Option<Vec<f64>>,
}

struct Replay<'a> {
    setup: &'a MartingaleSetup,
    integration: Integration,
    printed: bool,
    cells: Vec<u8>,
    last: f64,
    /// Tabulated route: `int f = acc_m + sum_i xi_i W_i(t)`.
    acc_m: f64,
    acc_pairs: f64,
    shift_qv: f64,
    /// Direct route accumulators.
    int_m: f64,
    int_qv: f64,
    int_printed: f64,
    scratch: Vec<f64>,
    /// Shift-rate integrals of every site at `last`, and a spare row.
    shift_cum: Vec<f64>,
    shift_next: Vec<f64>,
}

impl Replay<'_> {
    fn static_h(&self) -> bool {
        !self.setup.test.is_time_dependent()
    }

    fn simpson(&mut self, a: f64, b: f64, mut f: impl FnMut(&mut Self, f64) -> f64) -> f64 {
        let steps = (((b - a) * DIRECT_STEPS / self.setup.horizon).ceil() as usize).max(1);
        let h = (b - a) / steps as f64;
        let mut sum = f(self, a) + f(self, b);
        for k in 1..steps {
            sum += 2.0 * f(self, a + k as f64 * h);
        }
        for k in 0..steps {
            sum += 4.0 * f(self, a + (k as f64 + 0.5) * h);
        }
        sum * h / 6.0
    }

    /// Integrates the continuous-time parts over `[last, t]` with the current cells.
    fn advance(&mut self, t: f64) {
        let a = self.last;
        if t <= a {
            return;
        }
        let s = self.setup;
        let direct = self.integration == Integration::Direct;
        if direct {
            self.int_m += self.simpson(a, t, |r, u| {
                let mut scratch = std::mem::take(&mut r.scratch);
                let v = s.integrand_direct(u, &r.cells, &mut scratch);
                r.scratch = scratch;
                v
            });
        }
        if direct || !self.static_h() {
            self.int_qv += self.simpson(a, t, |r, u| s.gamma_direct(u, &r.cells));
        } else if let Some(sh) = &s.shifts {
            let nf = s.n as f64;
            if self.shift_cum.is_empty() {
                sh.cum_all(a, &mut self.shift_cum);
            }
            let mut now = std::mem::take(&mut self.shift_next);
            sh.cum_all(t, &mut now);
            let prev = &self.shift_cum;
            let mut q = 0.0;
            let mut acc = 0.0;
            for i in (0..s.len).rev() {
                if self.cells[i] == 1 {
                    q += s.delta[i];
                }
                if q != 0.0 {
                    acc += q * q * (now[i] - prev[i]);
                }
            }
            acc += q * q * (now[s.len] - prev[s.len]);
            self.shift_qv += acc / (nf * nf);
            self.shift_next = std::mem::replace(&mut self.shift_cum, now);
        }
        if self.printed {
            self.int_printed += self.simpson(a, t, |r, u| {
                let mut scratch = std::mem::take(&mut r.scratch);
                let v = s.gamma_printed(u, &r.cells, &mut scratch);
                r.scratch = scratch;
                v
            });
        }
        self.last = t;
    }

    /// Applies site changes `(index, new value)` happening at time `t`.
    fn change(&mut self, t: f64, changes: &[(usize, u8)]) {
        self.advance(t);
        let s = self.setup;
        let lazy = self.integration == Integration::Tabulated;
        let r = s.one_sided.len();
        let mut affected = Vec::new();
        if lazy && self.static_h() {
            for &(i, _) in changes {
                for k in 0..r {
                    let d = k + 1;
                    if i >= d {
                        affected.push((i - d) * r + k);
                    }
                    if i + d < s.len {
                        affected.push(i * r + k);
                    }
                }
            }
            affected.sort_unstable();
            affected.dedup();
        }
        let differs = |cells: &[u8], pair: usize| {
            let (i, k) = (pair / r, pair % r);
            (cells[i] != cells[i + k + 1]) as i32
        };
        let before: Vec<i32> = affected.iter().map(|&p| differs(&self.cells, p)).collect();
        for &(i, v) in changes {
            let old = self.cells[i];
            if old != v && lazy {
                self.acc_m -= (v as f64 - old as f64) * s.integrand.cum_at(i, t);
            }
            self.cells[i] = v;
        }
        for (&p, old) in affected.iter().zip(before) {
            let new = differs(&self.cells, p);
            if new != old {
                self.acc_pairs -= (new - old) as f64 * s.pairs.cum_at(p, t);
            }
        }
    }

    fn pairing(&self, t: f64) -> f64 {
        let s = self.setup;
        let sum: f64 = (0..s.len)
            .filter(|&i| self.cells[i] == 1)
            .map(|i| s.h(t, s.first + i as i64))
            .sum();
        sum / s.n as f64
    }

    /// `(int_0^t f, <M>_t, printed <M>_t)`.
    fn integrals(&mut self, t: f64) -> (f64, f64, f64) {
        self.advance(t);
        let s = self.setup;
        match self.integration {
            Integration::Direct => (self.int_m, self.int_qv, self.int_printed),
            Integration::Tabulated => {
                let occupied = (0..s.len).filter(|&i| self.cells[i] == 1);
                let m = self.acc_m + occupied.map(|i| s.integrand.cum_at(i, t)).sum::<f64>();
                let qv = if self.static_h() {
                    let r = s.one_sided.len();
                    let mut e = self.acc_pairs;
                    for i in 0..s.len {
                        for k in 0..r {
                            let j = i + k + 1;
                            if j < s.len && self.cells[i] != self.cells[j] {
                                e += s.pairs.cum_at(i * r + k, t);
                            }
                        }
                    }
                    e + self.shift_qv
                } else {
                    self.int_qv
                };
                (m, qv, self.int_printed)
            }
        }
    }
}

fn apply(state: &mut ExclusionConfig, kind: &EventKind) -> Result<bool> {
    match *kind {
        EventKind::Exchange { x, y } => state.exchange(x, y).map(|_| false),
        EventKind::Shift { site } => state.tau_shift(site).map(|_| true),
        EventKind::ShiftLeftOfWindow { .. } => {
            state.shift_from_left();
            Ok(true)
        }
        EventKind::ShiftRightOfWindow { .. } => Ok(false),
        other => Err(Error::MalformedEvent(format!(
            "{other:?} cannot occur in a right-shift trajectory"
        ))),
    }
}

/// Replays the event log and evaluates `M_t`, `<M>_t` and optionally the
/// printed-formula variation at the sorted `times`.
pub fn martingale_report(
    record: &TrajectoryRecord<ExclusionConfig>,
    setup: &MartingaleSetup,
    times: &[f64],
    integration: Integration,
    printed: bool,
) -> Result<MartingaleReport> {
    let log = record.event_log.as_ref().ok_or(Error::MissingEventLog)?;
    if record.n != setup.n
        || (record.horizon - setup.horizon).abs() > 1e-12 * setup.horizon
        || record.initial.window_left() != setup.window_left
        || record.initial.len() != setup.window_len
    {
        return Err(Error::InvalidParams(
            "trajectory and martingale setup describe different experiments".into(),
        ));
    }
    if times.windows(2).any(|w| w[0] > w[1])
        || times.iter().any(|&t| !(0.0..=record.horizon).contains(&t))
    {
        return Err(Error::InvalidParams(
            "times must be sorted and inside [0, T]".into(),
        ));
    }
    let off = (setup.first - setup.window_left) as usize;
    let mut state = record.initial.clone();
    let mut replay = Replay {
        setup,
        integration,
        printed,
        cells: state.cells()[off..off + setup.len].to_vec(),
        last: 0.0,
        acc_m: 0.0,
        acc_pairs: 0.0,
        shift_qv: 0.0,
        int_m: 0.0,
        int_qv: 0.0,
        int_printed: 0.0,
        scratch: Vec::new(),
        shift_cum: Vec::new(),
        shift_next: Vec::new(),
    };
    let f0 = replay.pairing(0.0);
    let mut report = MartingaleReport {
        times: times.to_vec(),
        pairing: Vec::with_capacity(times.len()),
        martingale: Vec::with_capacity(times.len()),
        quadratic_variation: Vec::with_capacity(times.len()),
        printed_variation: printed.then(|| Vec::with_capacity(times.len())),
    };
    let mut next = 0;
    let sample = |replay: &mut Replay, t: f64, report: &mut MartingaleReport| {
        let (int_f, qv, pr) = replay.integrals(t);
        let f = replay.pairing(t);
        report.pairing.push(f);
        report
            .martingale
            .push(if t == 0.0 { 0.0 } else { f - f0 - int_f });
        report.quadratic_variation.push(qv);
        if let Some(p) = &mut report.printed_variation {
            p.push(pr);
        }
    };
    let mut changes = Vec::new();
    for ev in log {
        while next < times.len() && times[next] < ev.time {
            sample(&mut replay, times[next], &mut report);
            next += 1;
        }
        let bulk = apply(&mut state, &ev.kind)?;
        let cells = &state.cells()[off..off + setup.len];
        changes.clear();
        if bulk {
            changes.extend(
                (0..setup.len)
                    .filter(|&i| cells[i] != replay.cells[i])
                    .map(|i| (i, cells[i])),
            );
        } else if let EventKind::Exchange { x, y } = ev.kind {
            for site in [x, y] {
                let i = site - setup.first;
                if (0..setup.len as i64).contains(&i) {
                    let i = i as usize;
                    if cells[i] != replay.cells[i] {
                        changes.push((i, cells[i]));
                    }
                }
            }
        }
        if !changes.is_empty() {
            replay.change(ev.time, &changes);
        }
    }
    while next < times.len() {
        sample(&mut replay, times[next], &mut report);
        next += 1;
    }
    if state.cells() != record.final_config.cells() {
        return Err(Error::MalformedEvent(
            "event log does not reproduce the final configuration".into(),
        ));
    }
    Ok(report)
}

/// `M_t` at the sorted `times`.
pub fn martingale_path(
    record: &TrajectoryRecord<ExclusionConfig>,
    setup: &MartingaleSetup,
    times: &[f64],
) -> Result<Vec<f64>> {
    Ok(martingale_report(record, setup, times, Integration::Tabulated, false)?.martingale)
}

/// `<M>_t` at the sorted `times`.
pub fn quadratic_variation_path(
    record: &TrajectoryRecord<ExclusionConfig>,
    setup: &MartingaleSetup,
    times: &[f64],
    mode: QvMode,
) -> Result<Vec<f64>> {
    match mode {
        QvMode::CarreDuChamp => {
            Ok(
                martingale_report(record, setup, times, Integration::Tabulated, false)?
                    .quadratic_variation,
            )
        }
        QvMode::PrintedFormula => {
            Ok(
                martingale_report(record, setup, times, Integration::Tabulated, true)?
                    .printed_variation
                    .expect("requested"),
            )
        }
    }
}

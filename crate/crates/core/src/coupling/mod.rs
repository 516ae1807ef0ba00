//! Coupling of the centered-spreading process with the auxiliary process
//! (the right-shift process seen from a frame moving with half its shift
//! count, with particles and holes exchanged).
//!
//! Both marginals are windows of cells holding first- or second-class
//! particles. First-class particles are paired by label, and labels follow
//! left-to-right order in each marginal, so a pair is "the `k`-th first-class
//! particle of each side". Jumps are nearest-neighbour only, so they never
//! reorder first-class particles.

mod fenwick;
mod marginal;
mod relabel;

use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

pub use marginal::{Direction, JumpOutcome, Marginal, EMPTY, FIRST, SECOND};
pub use relabel::{max_distance, rank_pairs, recipe_pairs};

use crate::dynamics::rng::{stream_rng, Stream};
use crate::dynamics::{
    kmc_step, ClockSet, CumulativeTable, EventTotals, GrowthEvent, SimParams, Snapshot, Step,
    TrajectoryRecord,
};
use crate::dynamics::{GeometricTail, Side};
use crate::error::{Error, Result};
use crate::kernels::{b_from_h, RateField};
use crate::lattice::{ExclusionConfig, Parity, SpreadConfig};

/// `eta_hat(x) = 1 - xi(x + shift_total / 2)` on the sites where that argument is an integer.
pub fn build_auxiliary(xi: &ExclusionConfig, shift_total: u64) -> SpreadConfig {
    let cells = xi.cells().iter().map(|&c| 1 - c).collect();
    SpreadConfig::new(
        cells,
        2 * xi.window_left() - shift_total as i64,
        shift_total + 1,
    )
    .expect("anchor parity follows the shift count")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Epcs,
    Aux,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BirthCase {
    /// Only the centered process grows; the newcomer is second class.
    EpcsOnly,
    /// Only the auxiliary process grows; the newcomer is second class.
    AuxOnly,
    /// Both grow; both newcomers are first class.
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoupledEvent {
    /// Jump attempt of the first-class particle in `index`; its partner, if
    /// it is inside the other window, attempts the same direction.
    FirstClassJump {
        which: Which,
        index: usize,
        dir: Direction,
    },
    SecondClassJump {
        which: Which,
        index: usize,
        dir: Direction,
    },
    /// Birth around the site `half_pos` of the centered process; the
    /// auxiliary site is `half_pos + aux_offset()`.
    Birth { case: BirthCase, half_pos: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoupledState {
    pub epcs: Marginal,
    pub aux: Marginal,
    /// Second-class births so far.
    pub j: u64,
}

impl CoupledState {
    /// Both marginals start from `init` with every particle first class.
    pub fn new(init: &SpreadConfig) -> Result<Self> {
        if init.mass_n() != 1 || init.parity() != Parity::Gamma1 {
            return Err(Error::InvalidParams(
                "the coupled system starts from mass 1 on the integer lattice".into(),
            ));
        }
        let m = Marginal::from_config(init);
        Ok(CoupledState {
            epcs: m.clone(),
            aux: m,
            j: 0,
        })
    }

    /// Half-steps from a centered-process site to the matching auxiliary site:
    /// 0 when both received the same number of particles mod 2, else 1.
    pub fn aux_offset(&self) -> i64 {
        ((self.epcs.births() + self.aux.births()) % 2) as i64
    }

    fn marginal_mut(&mut self, which: Which) -> (&mut Marginal, &mut Marginal) {
        match which {
            Which::Epcs => (&mut self.epcs, &mut self.aux),
            Which::Aux => (&mut self.aux, &mut self.epcs),
        }
    }

    /// `|births - births_hat| <= J`.
    pub fn check_invariants(&self) -> Result<()> {
        let diff = self.epcs.births().abs_diff(self.aux.births());
        if diff > self.j {
            return Err(Error::SimulationAborted(format!(
                "mass discrepancy {diff} exceeds the second-class count {}",
                self.j
            )));
        }
        Ok(())
    }

    /// Largest `|X_k - X_hat_k|` (in lattice units) over labels present in both windows.
    pub fn max_pair_distance(&self) -> Option<f64> {
        let mut best: Option<i64> = None;
        for k in 0..self.epcs.len() {
            if let Some(label) = self.epcs.label_of(k) {
                if let Some(j) = self.aux.index_of_label(label) {
                    let d = (self.epcs.half_position(k) - self.aux.half_position(j)).abs();
                    best = Some(best.map_or(d, |b| b.max(d)));
                }
            }
        }
        best.map(|d| d as f64 / 2.0)
    }
}

/// Applies one event of the coupled dynamics.
pub fn coupled_step(state: &mut CoupledState, event: &CoupledEvent) -> Result<()> {
    match *event {
        CoupledEvent::FirstClassJump { which, index, dir } => {
            let (own, other) = state.marginal_mut(which);
            let label = own.label_of(index).ok_or_else(|| {
                Error::MalformedEvent(format!("cell {index} holds no first-class particle"))
            })?;
            own.jump(index, dir)?;
            if let Some(j) = other.index_of_label(label) {
                other.jump(j, dir)?;
            }
        }
        CoupledEvent::SecondClassJump { which, index, dir } => {
            let (own, _) = state.marginal_mut(which);
            if own.cells().get(index) != Some(&SECOND) {
                return Err(Error::MalformedEvent(format!(
                    "cell {index} holds no second-class particle"
                )));
            }
            own.jump(index, dir)?;
        }
        CoupledEvent::Birth { case, half_pos } => {
            if !state.epcs.on_lattice(half_pos) {
                return Err(Error::MalformedEvent(format!(
                    "half-position {half_pos} is not an active site of the centered process"
                )));
            }
            let aux_pos = half_pos + state.aux_offset();
            match case {
                BirthCase::EpcsOnly => {
                    state.epcs.spread_at(half_pos, SECOND)?;
                    state.j += 1;
                }
                BirthCase::AuxOnly => {
                    state.aux.spread_at(aux_pos, SECOND)?;
                    state.j += 1;
                }
                BirthCase::Both => {
                    state.epcs.spread_at(half_pos, FIRST)?;
                    state.aux.spread_at(aux_pos, FIRST)?;
                }
            }
        }
    }
    state.check_invariants()
}

/// Birth candidates at the centered-process sites, with bars dominating
/// both `h(s, x/N)` and `b(s, x'/N + n_hat/(2N))` until the next birth.
struct BirthClocks<'a> {
    h: &'a RateField,
    b: &'a RateField,
    n: f64,
    anchor: i64,
    /// `x' + n_hat/2` in half-steps, relative to `x`.
    aux_shift: i64,
    inside: CumulativeTable,
    left_tail: GeometricTail,
    right_tail: GeometricTail,
}

#[derive(Clone, Copy, Debug)]
enum BirthCandidate {
    Inside(usize),
    Outside(i64),
}

impl<'a> BirthClocks<'a> {
    fn new(
        h: &'a RateField,
        b: &'a RateField,
        n: usize,
        state: &CoupledState,
        now: f64,
    ) -> Result<Self> {
        let nf = n as f64;
        let aux_shift = state.aux_offset() + state.aux.births() as i64;
        let epcs = &state.epcs;
        let inside = CumulativeTable::new((0..epcs.len()).map(|k| {
            let x2 = epcs.half_position(k);
            let bh = h.sup_over_time(0.5 * x2 as f64 / nf, now);
            let bb = b.sup_over_time(0.5 * (x2 + aux_shift) as f64 / nf, now);
            bh.max(bb)
        }));
        let (ch, beta) = h.envelope();
        let (cb, _) = b.envelope();
        let c = ch.max(cb * (beta * 0.5 * (aux_shift + 1) as f64 / nf).exp());
        let first_left = 0.5 * (epcs.anchor() - 2) as f64;
        let first_right = 0.5 * epcs.half_position(epcs.len()) as f64;
        Ok(BirthClocks {
            h,
            b,
            n: nf,
            anchor: epcs.anchor(),
            aux_shift,
            inside,
            left_tail: GeometricTail::new(first_left, Side::Left, c, beta, n)?,
            right_tail: GeometricTail::new(first_right, Side::Right, c, beta, n)?,
        })
    }

    fn half_pos(&self, c: &BirthCandidate) -> i64 {
        match *c {
            BirthCandidate::Inside(k) => self.anchor + 2 * k as i64,
            BirthCandidate::Outside(p) => p,
        }
    }

    /// `(h(s, x/N), b(s, x'/N + n_hat/(2N)))`.
    fn rates(&self, x2: i64, t: f64) -> (f64, f64) {
        (
            self.h.value(t, 0.5 * x2 as f64 / self.n),
            self.b.value(t, 0.5 * (x2 + self.aux_shift) as f64 / self.n),
        )
    }
}

impl ClockSet for BirthClocks<'_> {
    type Event = BirthCandidate;

    fn total_bar(&self) -> f64 {
        self.inside.total() + self.left_tail.total() + self.right_tail.total()
    }

    fn propose<R: Rng + ?Sized>(&self, rng: &mut R) -> (BirthCandidate, f64) {
        let u = rng.random::<f64>() * self.total_bar();
        let inside = self.inside.total();
        if u < inside {
            let k = self.inside.find(u);
            (BirthCandidate::Inside(k), self.inside.weight(k))
        } else {
            let tail = if u < inside + self.left_tail.total() {
                &self.left_tail
            } else {
                &self.right_tail
            };
            let (_, pos, bar) = tail.sample(rng);
            (BirthCandidate::Outside((2.0 * pos).round() as i64), bar)
        }
    }

    fn rate(&self, c: &BirthCandidate, t: f64) -> f64 {
        let (rh, rb) = self.rates(self.half_pos(c), t);
        rh.max(rb)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JPoint {
    pub time: f64,
    pub j: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoupledSnapshot {
    pub time: f64,
    pub j: u64,
    pub births_epcs: u64,
    pub births_aux: u64,
    pub second_class_in_windows: usize,
    pub max_pair_distance: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct CoupledRecord {
    /// Occupations of the centered marginal.
    pub epcs: TrajectoryRecord<SpreadConfig>,
    /// Occupations of the auxiliary marginal.
    pub aux: TrajectoryRecord<SpreadConfig>,
    /// `J` after each second-class birth, starting with `(0, 0)`.
    pub j_path: Vec<JPoint>,
    pub snapshots: Vec<CoupledSnapshot>,
    pub final_state: CoupledState,
}

struct Recorder<'p> {
    params: &'p SimParams,
    next: usize,
    epcs: Vec<Snapshot<SpreadConfig>>,
    aux: Vec<Snapshot<SpreadConfig>>,
    joint: Vec<CoupledSnapshot>,
}

impl Recorder<'_> {
    fn take(&mut self, state: &CoupledState, time: f64) {
        self.epcs.push(Snapshot {
            time,
            config: state.epcs.occupation(),
        });
        self.aux.push(Snapshot {
            time,
            config: state.aux.occupation(),
        });
        self.joint.push(CoupledSnapshot {
            time,
            j: state.j,
            births_epcs: state.epcs.births(),
            births_aux: state.aux.births(),
            second_class_in_windows: state.epcs.second_count() + state.aux.second_count(),
            max_pair_distance: state.max_pair_distance(),
        });
    }
}

/// Jump candidates: every (marginal, cell, direction) at rate `N^2 p(1)`.
fn run_jumps(
    state: &mut CoupledState,
    rate_per_candidate: f64,
    dt: f64,
    rng: &mut ChaCha8Rng,
    totals: &mut [EventTotals; 2],
) -> Result<()> {
    let len = state.epcs.len();
    let mean = rate_per_candidate * 4.0 * len as f64 * dt;
    if mean <= 0.0 {
        return Ok(());
    }
    let count = Poisson::new(mean).expect("finite mean").sample(rng) as u64;
    for _ in 0..count {
        let which = if rng.random::<bool>() {
            Which::Aux
        } else {
            Which::Epcs
        };
        let index = rng.random_range(0..len);
        let dir = if rng.random::<bool>() {
            Direction::Right
        } else {
            Direction::Left
        };
        let side = which as usize;
        totals[side].exchange_attempts += 1;
        let (own, other) = match which {
            Which::Epcs => (&state.epcs, &state.aux),
            Which::Aux => (&state.aux, &state.epcs),
        };
        let event = match own.cells()[index] {
            EMPTY => continue,
            SECOND => CoupledEvent::SecondClassJump { which, index, dir },
            _ => {
                // a paired auxiliary particle only moves with its partner's clock
                if which == Which::Aux
                    && own
                        .label_of(index)
                        .and_then(|l| other.index_of_label(l))
                        .is_some()
                {
                    continue;
                }
                CoupledEvent::FirstClassJump { which, index, dir }
            }
        };
        coupled_step(state, &event)?;
    }
    Ok(())
}

/// Simulates the coupled system started from `init` in both marginals.
/// Requires a nearest-neighbour kernel.
pub fn simulate_coupled(params: &SimParams, init: &SpreadConfig) -> Result<CoupledRecord> {
    params.validate()?;
    if params.kernel.range() != 1 {
        return Err(Error::InvalidKernel(
            "the coupling is defined for nearest-neighbour jumps only".into(),
        ));
    }
    let (left, len) = params.window.sites(params.n);
    if init.anchor() != 2 * left || init.len() != len {
        return Err(Error::InvalidParams(format!(
            "initial configuration does not cover the window [{left}, {})",
            left + len as i64
        )));
    }
    let h = &params.rate;
    let b = b_from_h(h)?;
    let n2 = (params.n as f64).powi(2);
    let jump_rate = n2 * params.kernel.p(1);
    let mut rng = stream_rng(params.seed, params.replica, Stream::Coupling);
    let mut state = CoupledState::new(init)?;
    let mut totals = [EventTotals::default(); 2];
    let mut growth: [Vec<GrowthEvent>; 2] = [Vec::new(), Vec::new()];
    let mut j_path = vec![JPoint { time: 0.0, j: 0 }];
    let mut rec = Recorder {
        params,
        next: 0,
        epcs: Vec::new(),
        aux: Vec::new(),
        joint: Vec::new(),
    };
    let mut now = 0.0;
    let advance = |state: &mut CoupledState,
                   now: &mut f64,
                   t1: f64,
                   rng: &mut ChaCha8Rng,
                   totals: &mut [EventTotals; 2],
                   rec: &mut Recorder|
     -> Result<()> {
        let times = &rec.params.snapshot_times;
        while rec.next < times.len() && times[rec.next] <= t1 {
            let s = times[rec.next];
            run_jumps(state, jump_rate, s - *now, rng, totals)?;
            *now = s;
            rec.take(state, s);
            rec.next += 1;
        }
        run_jumps(state, jump_rate, t1 - *now, rng, totals)?;
        *now = t1;
        Ok(())
    };
    let mut expected_left = 0.0;
    let mut first = true;
    'outer: loop {
        let clocks = BirthClocks::new(h, &b, params.n, &state, now)?;
        if first {
            expected_left = params.horizon * clocks.left_tail.total();
            first = false;
        }
        loop {
            match kmc_step(&clocks, now, params.horizon, &mut rng)? {
                Step::Exhausted => {
                    advance(
                        &mut state,
                        &mut now,
                        params.horizon,
                        &mut rng,
                        &mut totals,
                        &mut rec,
                    )?;
                    break 'outer;
                }
                Step::Rejected { time } => {
                    totals[0].growth_candidates += 1;
                    advance(&mut state, &mut now, time, &mut rng, &mut totals, &mut rec)?;
                }
                Step::Fired { event, time } => {
                    totals[0].growth_candidates += 1;
                    advance(&mut state, &mut now, time, &mut rng, &mut totals, &mut rec)?;
                    let x2 = clocks.half_pos(&event);
                    let (rh, rb) = clocks.rates(x2, time);
                    let u = rng.random::<f64>() * rh.max(rb);
                    let case = if u < rh.min(rb) {
                        BirthCase::Both
                    } else if rh > rb {
                        BirthCase::EpcsOnly
                    } else {
                        BirthCase::AuxOnly
                    };
                    let aux_pos = x2 + state.aux_offset();
                    let place = |m: &Marginal, pos: i64| match m.index_of(pos) {
                        Some(_) => 0,
                        None if pos < m.anchor() => 1,
                        None => 2,
                    };
                    let places = [place(&state.epcs, x2), place(&state.aux, aux_pos)];
                    coupled_step(&mut state, &CoupledEvent::Birth { case, half_pos: x2 })?;
                    for (side, pos) in [(0usize, x2), (1, aux_pos)] {
                        let grew = matches!(
                            (side, case),
                            (_, BirthCase::Both)
                                | (0, BirthCase::EpcsOnly)
                                | (1, BirthCase::AuxOnly)
                        );
                        if grew {
                            let t = &mut totals[side];
                            t.growth_events += 1;
                            match places[side] {
                                1 => t.left_of_window += 1,
                                2 => t.right_of_window += 1,
                                _ => {}
                            }
                            growth[side].push(GrowthEvent { time, site: pos });
                        }
                    }
                    if case != BirthCase::Both {
                        j_path.push(JPoint { time, j: state.j });
                    }
                    continue 'outer;
                }
            }
        }
    }
    let record = |side: usize,
                  init: &SpreadConfig,
                  fin: SpreadConfig,
                  snaps: Vec<Snapshot<SpreadConfig>>,
                  growth: Vec<GrowthEvent>| TrajectoryRecord {
        n: params.n,
        horizon: params.horizon,
        initial: init.clone(),
        final_config: fin,
        snapshots: snaps,
        growth,
        event_log: None,
        totals: totals[side],
        expected_left_of_window: if side == 0 { expected_left } else { 0.0 },
    };
    let [g0, g1] = growth;
    Ok(CoupledRecord {
        epcs: record(
            0,
            init,
            state.epcs.occupation(),
            std::mem::take(&mut rec.epcs),
            g0,
        ),
        aux: record(
            1,
            init,
            state.aux.occupation(),
            std::mem::take(&mut rec.aux),
            g1,
        ),
        j_path,
        snapshots: std::mem::take(&mut rec.joint),
        final_state: state,
    })
}

/// CSV with header `time,J`.
pub fn write_j_path_csv<W: Write>(path: &[JPoint], mut out: W) -> Result<()> {
    writeln!(out, "time,J")?;
    for p in path {
        writeln!(out, "{},{}", p.time, p.j)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Window;
    use crate::kernels::JumpKernel;

    fn spread(cells: &[u8], left: i64) -> SpreadConfig {
        SpreadConfig::from_exclusion(&ExclusionConfig::new(left, cells.to_vec()).unwrap())
    }

    #[test]
    fn auxiliary_examples() {
        let xi = ExclusionConfig::new(-2, vec![0, 1, 1, 0, 1]).unwrap();
        let a = build_auxiliary(&xi, 0);
        assert_eq!(a.cells(), &[1, 0, 0, 1, 0]);
        assert_eq!(a.anchor(), -4);
        let full = ExclusionConfig::full(-3, 7);
        for shifts in [0, 1, 5] {
            assert_eq!(build_auxiliary(&full, shifts).particle_count(), 0);
        }
        let mut cells = vec![0u8; 7];
        cells[3] = 1;
        let one = ExclusionConfig::new(-3, cells).unwrap();
        let a = build_auxiliary(&one, 2);
        let holes: Vec<i64> = (0..a.len())
            .filter(|&k| a.cells()[k] == 0)
            .map(|k| a.half_position(k))
            .collect();
        assert_eq!(holes, vec![-2]);
        assert_eq!(a.parity(), Parity::Gamma1);
    }

    #[test]
    fn births_move_the_counters() {
        let mut s = CoupledState::new(&spread(&[1, 0, 1, 1, 0, 0, 1, 0], -4)).unwrap();
        coupled_step(
            &mut s,
            &CoupledEvent::Birth {
                case: BirthCase::EpcsOnly,
                half_pos: 0,
            },
        )
        .unwrap();
        assert_eq!((s.j, s.epcs.births(), s.aux.births()), (1, 1, 0));
        assert_eq!(s.epcs.second_count(), 1);
        assert_eq!(s.aux_offset(), 1);
        // the joint birth lands on the other sublattice of the auxiliary process
        coupled_step(
            &mut s,
            &CoupledEvent::Birth {
                case: BirthCase::Both,
                half_pos: -1,
            },
        )
        .unwrap();
        assert_eq!((s.j, s.epcs.births(), s.aux.births()), (1, 2, 1));
        coupled_step(
            &mut s,
            &CoupledEvent::Birth {
                case: BirthCase::AuxOnly,
                half_pos: 2,
            },
        )
        .unwrap();
        assert_eq!((s.j, s.epcs.births(), s.aux.births()), (2, 2, 2));
        assert!(coupled_step(
            &mut s,
            &CoupledEvent::Birth {
                case: BirthCase::Both,
                half_pos: 1
            }
        )
        .is_err());
    }

    #[test]
    fn first_class_pushes_second_class() {
        let mut s = CoupledState::new(&spread(&[0, 1, 0, 0, 0, 0], -3)).unwrap();
        coupled_step(
            &mut s,
            &CoupledEvent::Birth {
                case: BirthCase::EpcsOnly,
                half_pos: -2,
            },
        )
        .unwrap();
        // the newcomer sits half a step left of the birth site, right of the old particle
        assert_eq!(s.epcs.cells()[1..3], [FIRST, SECOND]);
        coupled_step(
            &mut s,
            &CoupledEvent::FirstClassJump {
                which: Which::Epcs,
                index: 1,
                dir: Direction::Right,
            },
        )
        .unwrap();
        assert_eq!(s.epcs.cells()[1..3], [SECOND, FIRST]);
        // the partner made the same move
        assert_eq!(s.aux.cells()[1..3], [EMPTY, FIRST]);
        coupled_step(
            &mut s,
            &CoupledEvent::SecondClassJump {
                which: Which::Epcs,
                index: 1,
                dir: Direction::Right,
            },
        )
        .unwrap();
        assert_eq!(s.epcs.cells()[1..3], [SECOND, FIRST]);
        assert!(coupled_step(
            &mut s,
            &CoupledEvent::SecondClassJump {
                which: Which::Epcs,
                index: 2,
                dir: Direction::Left
            }
        )
        .is_err());
    }

    fn params(h: RateField, n: usize) -> SimParams {
        SimParams {
            n,
            horizon: 0.3,
            kernel: JumpKernel::nearest_neighbor(),
            rate: h,
            window: Window::new(-4.0, 3.0).unwrap(),
            seed: 11,
            replica: 0,
            snapshot_times: vec![0.1, 0.2, 0.3],
            log_events: false,
        }
    }

    fn init(p: &SimParams) -> SpreadConfig {
        let (left, len) = p.window.sites(p.n);
        let cells = (0..len)
            .map(|i| ((left + i as i64).rem_euclid(3) == 0) as u8)
            .collect::<Vec<_>>();
        spread(&cells, left)
    }

    #[test]
    fn zero_rate_keeps_marginals_identical() {
        let p = params(RateField::zero(0.3), 8);
        let rec = simulate_coupled(&p, &init(&p)).unwrap();
        assert_eq!(rec.final_state.j, 0);
        assert_eq!(rec.j_path.len(), 1);
        assert_eq!(rec.epcs.final_config, rec.aux.final_config);
        for (a, b) in rec.epcs.snapshots.iter().zip(&rec.aux.snapshots) {
            assert_eq!(a.config, b.config);
        }
        assert!(rec.epcs.totals.exchange_attempts > 0);
    }

    #[test]
    fn j_path_counts_and_bounds() {
        let p = params(RateField::double_exponential(1.0, 1.0, 0.3).unwrap(), 8);
        for r in 0..20 {
            let rec = simulate_coupled(&p.with_replica(r), &init(&p)).unwrap();
            for w in rec.j_path.windows(2) {
                assert_eq!(w[1].j, w[0].j + 1);
                assert!(w[1].time >= w[0].time);
            }
            let s = &rec.final_state;
            assert!(s.epcs.births().abs_diff(s.aux.births()) <= s.j);
            assert_eq!(rec.epcs.growth.len() as u64, s.epcs.births());
            assert_eq!(rec.aux.growth.len() as u64, s.aux.births());
        }
    }

    #[test]
    fn coupled_runs_are_reproducible() {
        let p = params(RateField::double_exponential(1.0, 1.0, 0.3).unwrap(), 8);
        let a = simulate_coupled(&p, &init(&p)).unwrap();
        let b = simulate_coupled(&p, &init(&p)).unwrap();
        assert_eq!(a.final_state, b.final_state);
        assert_eq!(a.j_path, b.j_path);
    }

    #[test]
    fn longer_kernels_are_rejected() {
        let mut p = params(RateField::zero(0.3), 8);
        p.kernel = JumpKernel::symmetric(vec![0.25, 0.25]).unwrap();
        assert!(matches!(
            simulate_coupled(&p, &init(&p)),
            Err(Error::InvalidKernel(_))
        ));
    }
}

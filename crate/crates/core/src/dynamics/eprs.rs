//! Exclusion process with right-sided spreading: SSEP exchanges plus shifts
//! `tau_x` at rate `b(s, x/N)`.

use rand::Rng;

use super::clock::{kmc_step, ClockSet, CumulativeTable, Step};
use super::engine::Runner;
use super::record::{EventKind, GrowthEvent, TrajectoryRecord};
use super::tail::{GeometricTail, Side};
use super::SimParams;
use crate::error::{Error, Result};
use crate::kernels::{b_from_h, RateField};
use crate::lattice::ExclusionConfig;

/// Runs abort when more than this many shifts left of the window are expected.
pub const MAX_EXPECTED_LEFT_SHIFTS: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum ShiftCandidate {
    Inside(usize),
    Left(i64),
    Right(i64),
}

pub(crate) struct ShiftClocks<'a> {
    b: &'a RateField,
    n: f64,
    left: i64,
    inside: CumulativeTable,
    left_tail: GeometricTail,
    right_tail: GeometricTail,
}

impl<'a> ShiftClocks<'a> {
    pub fn new(b: &'a RateField, n: usize, left: i64, len: usize) -> Result<Self> {
        let nf = n as f64;
        let (c, beta) = b.envelope();
        let inside = CumulativeTable::new(
            (0..len).map(|i| b.sup_over_time((left + i as i64) as f64 / nf, 0.0)),
        );
        Ok(ShiftClocks {
            b,
            n: nf,
            left,
            inside,
            left_tail: GeometricTail::new((left - 1) as f64, Side::Left, c, beta, n)?,
            right_tail: GeometricTail::new((left + len as i64) as f64, Side::Right, c, beta, n)?,
        })
    }

    pub fn left_tail_rate(&self) -> f64 {
        self.left_tail.total()
    }

    pub fn site(&self, c: &ShiftCandidate) -> i64 {
        match *c {
            ShiftCandidate::Inside(i) => self.left + i as i64,
            ShiftCandidate::Left(x) | ShiftCandidate::Right(x) => x,
        }
    }
}

impl ClockSet for ShiftClocks<'_> {
    type Event = ShiftCandidate;

    fn total_bar(&self) -> f64 {
        self.inside.total() + self.left_tail.total() + self.right_tail.total()
    }

    fn propose<R: Rng + ?Sized>(&self, rng: &mut R) -> (ShiftCandidate, f64) {
        let u = rng.random::<f64>() * self.total_bar();
        let inside = self.inside.total();
        if u < inside {
            let i = self.inside.find(u);
            (ShiftCandidate::Inside(i), self.inside.weight(i))
        } else if u < inside + self.left_tail.total() {
            let (_, pos, bar) = self.left_tail.sample(rng);
            (ShiftCandidate::Left(pos as i64), bar)
        } else {
            let (_, pos, bar) = self.right_tail.sample(rng);
            (ShiftCandidate::Right(pos as i64), bar)
        }
    }

    fn rate(&self, c: &ShiftCandidate, t: f64) -> f64 {
        self.b.value(t, self.site(c) as f64 / self.n)
    }
}

/// Exact simulation of the EPRS driven by `b = b_from_h(params.rate)`.
pub fn simulate_eprs(
    params: &SimParams,
    init: &ExclusionConfig,
) -> Result<TrajectoryRecord<ExclusionConfig>> {
    params.validate()?;
    let (left, len) = params.window.sites(params.n);
    if init.window_left() != left || init.len() != len {
        return Err(Error::InvalidParams(format!(
            "initial configuration covers [{}, {}) but the window is [{left}, {})",
            init.window_left(),
            init.window_end(),
            left + len as i64
        )));
    }
    let b = b_from_h(&params.rate)?;
    let clocks = ShiftClocks::new(&b, params.n, left, len)?;
    let expected_left = params.horizon * clocks.left_tail_rate();
    if expected_left > MAX_EXPECTED_LEFT_SHIFTS {
        return Err(Error::SimulationAborted(format!(
            "expected {expected_left:.3} shifts left of the window (limit {MAX_EXPECTED_LEFT_SHIFTS}); widen the left margin"
        )));
    }

    let mut state = init.clone();
    let mut runner = Runner::new(params, len);
    let mut growth = Vec::new();
    runner.advance(&mut state, 0.0);
    loop {
        match kmc_step(&clocks, runner.now, params.horizon, &mut runner.rng)? {
            Step::Exhausted => {
                runner.advance(&mut state, params.horizon);
                break;
            }
            Step::Rejected { time } => {
                runner.totals.growth_candidates += 1;
                runner.advance(&mut state, time);
            }
            Step::Fired { event, time } => {
                runner.totals.growth_candidates += 1;
                runner.advance(&mut state, time);
                let site = clocks.site(&event);
                let kind = match event {
                    ShiftCandidate::Inside(i) => {
                        state.shift_from_index(i);
                        EventKind::Shift { site }
                    }
                    ShiftCandidate::Left(_) => {
                        state.shift_from_left();
                        runner.totals.left_of_window += 1;
                        EventKind::ShiftLeftOfWindow { site }
                    }
                    ShiftCandidate::Right(_) => {
                        runner.totals.right_of_window += 1;
                        EventKind::ShiftRightOfWindow { site }
                    }
                };
                runner.totals.growth_events += 1;
                growth.push(GrowthEvent { time, site });
                runner.record(time, kind);
            }
        }
    }

    Ok(TrajectoryRecord {
        n: params.n,
        horizon: params.horizon,
        initial: init.clone(),
        final_config: state,
        snapshots: std::mem::take(&mut runner.snapshots),
        growth,
        event_log: runner.log.take(),
        totals: runner.totals,
        expected_left_of_window: expected_left,
    })
}

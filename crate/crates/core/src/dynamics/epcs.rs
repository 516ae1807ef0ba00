//! Exclusion process with centered spreading: SSEP on the active sublattice
//! plus spreads `tilde-tau_x` at rate `h(s, x/N)`.

use rand::Rng;

use super::clock::{kmc_step, ClockSet, CumulativeTable, Step};
use super::engine::Runner;
use super::record::{EventKind, GrowthEvent, TrajectoryRecord};
use super::tail::{GeometricTail, Side};
use super::SimParams;
use crate::error::{Error, Result};
use crate::kernels::RateField;
use crate::lattice::{Parity, SpreadConfig};

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum SpreadCandidate {
    Inside(usize),
    /// Positions in half-steps.
    Left(i64),
    Right(i64),
}

/// Spread clocks for the current anchor; valid until the next spread.
pub(crate) struct SpreadClocks<'a> {
    h: &'a RateField,
    n: f64,
    anchor: i64,
    inside: CumulativeTable,
    left_tail: GeometricTail,
    right_tail: GeometricTail,
}

impl<'a> SpreadClocks<'a> {
    pub fn new(h: &'a RateField, n: usize, state: &SpreadConfig, now: f64) -> Result<Self> {
        let nf = n as f64;
        let (c, beta) = h.envelope();
        let inside = CumulativeTable::new(
            (0..state.len()).map(|k| h.sup_over_time(state.position(k) / nf, now)),
        );
        let first_left = 0.5 * (state.anchor() - 2) as f64;
        let first_right = 0.5 * state.half_position(state.len()) as f64;
        Ok(SpreadClocks {
            h,
            n: nf,
            anchor: state.anchor(),
            inside,
            left_tail: GeometricTail::new(first_left, Side::Left, c, beta, n)?,
            right_tail: GeometricTail::new(first_right, Side::Right, c, beta, n)?,
        })
    }

    pub fn left_tail_rate(&self) -> f64 {
        self.left_tail.total()
    }

    pub fn half_pos(&self, c: &SpreadCandidate) -> i64 {
        match *c {
            SpreadCandidate::Inside(k) => self.anchor + 2 * k as i64,
            SpreadCandidate::Left(p) | SpreadCandidate::Right(p) => p,
        }
    }
}

impl ClockSet for SpreadClocks<'_> {
    type Event = SpreadCandidate;

    fn total_bar(&self) -> f64 {
        self.inside.total() + self.left_tail.total() + self.right_tail.total()
    }

    fn propose<R: Rng + ?Sized>(&self, rng: &mut R) -> (SpreadCandidate, f64) {
        let u = rng.random::<f64>() * self.total_bar();
        let inside = self.inside.total();
        if u < inside {
            let k = self.inside.find(u);
            (SpreadCandidate::Inside(k), self.inside.weight(k))
        } else if u < inside + self.left_tail.total() {
            let (_, pos, bar) = self.left_tail.sample(rng);
            (SpreadCandidate::Left((2.0 * pos).round() as i64), bar)
        } else {
            let (_, pos, bar) = self.right_tail.sample(rng);
            (SpreadCandidate::Right((2.0 * pos).round() as i64), bar)
        }
    }

    fn rate(&self, c: &SpreadCandidate, t: f64) -> f64 {
        self.h.value(t, 0.5 * self.half_pos(c) as f64 / self.n)
    }
}

/// Exact simulation of the EPCS driven by `h = params.rate`.
pub fn simulate_epcs(
    params: &SimParams,
    init: &SpreadConfig,
) -> Result<TrajectoryRecord<SpreadConfig>> {
    params.validate()?;
    if init.mass_n() != 1 || init.parity() != Parity::Gamma1 {
        return Err(Error::InvalidParams(
            "the spreading process starts from mass 1 on the integer lattice".into(),
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
    let mut state = init.clone();
    let mut clocks = SpreadClocks::new(h, params.n, &state, 0.0)?;
    let expected_left = params.horizon * clocks.left_tail_rate();
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
                let half_pos = clocks.half_pos(&event);
                let kind = match event {
                    SpreadCandidate::Inside(k) => {
                        state.spread_at_index(k);
                        EventKind::Spread { half_pos }
                    }
                    SpreadCandidate::Left(_) => {
                        state.spread_left_of_window();
                        runner.totals.left_of_window += 1;
                        EventKind::SpreadLeftOfWindow { half_pos }
                    }
                    SpreadCandidate::Right(_) => {
                        state.spread_right_of_window();
                        runner.totals.right_of_window += 1;
                        EventKind::SpreadRightOfWindow { half_pos }
                    }
                };
                runner.totals.growth_events += 1;
                growth.push(GrowthEvent {
                    time,
                    site: half_pos,
                });
                runner.record(time, kind);
                clocks = SpreadClocks::new(h, params.n, &state, time)?;
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

//! Shared driver: exchanges between growth candidates, snapshots, event log.

use rand_chacha::ChaCha8Rng;

use super::exchange::{ExchangeSampler, SortedUniforms};
use super::record::{Event, EventKind, EventTotals, Snapshot};
use super::rng::{stream_rng, Stream};
use super::SimParams;
use crate::lattice::{ExclusionConfig, SpreadConfig};

/// Cell storage plus the map from cell index to logged site label.
pub(crate) trait Cells: Clone {
    fn cells_mut(&mut self) -> &mut [u8];
    /// `(base, stride)` with `site(i) = base + stride * i`.
    fn site_map(&self) -> (i64, i64);
}

impl Cells for ExclusionConfig {
    fn cells_mut(&mut self) -> &mut [u8] {
        ExclusionConfig::cells_mut(self)
    }
    fn site_map(&self) -> (i64, i64) {
        (self.window_left(), 1)
    }
}

impl Cells for SpreadConfig {
    fn cells_mut(&mut self) -> &mut [u8] {
        SpreadConfig::cells_mut(self)
    }
    fn site_map(&self) -> (i64, i64) {
        (self.anchor(), 2)
    }
}

pub(crate) struct Runner<'p, C> {
    params: &'p SimParams,
    exchanges: ExchangeSampler,
    pub rng: ChaCha8Rng,
    time_rng: Option<ChaCha8Rng>,
    pub log: Option<Vec<Event>>,
    pub totals: EventTotals,
    pub now: f64,
    next_snapshot: usize,
    pub snapshots: Vec<Snapshot<C>>,
}

impl<'p, C: Cells> Runner<'p, C> {
    pub fn new(params: &'p SimParams, len: usize) -> Self {
        Runner {
            params,
            exchanges: ExchangeSampler::new(&params.kernel, params.n, len),
            rng: stream_rng(params.seed, params.replica, Stream::Dynamics),
            time_rng: params
                .log_events
                .then(|| stream_rng(params.seed, params.replica, Stream::EventTimes)),
            log: params.log_events.then(Vec::new),
            totals: EventTotals::default(),
            now: 0.0,
            next_snapshot: 0,
            snapshots: Vec::with_capacity(params.snapshot_times.len()),
        }
    }

    /// Runs the dynamics without growth events up to `t1`, taking snapshots on the way.
    pub fn advance(&mut self, state: &mut C, t1: f64) {
        let times = &self.params.snapshot_times;
        while self.next_snapshot < times.len() && times[self.next_snapshot] <= t1 {
            let s = times[self.next_snapshot];
            self.exchange_until(state, s);
            self.snapshots.push(Snapshot {
                time: s,
                config: state.clone(),
            });
            self.next_snapshot += 1;
        }
        self.exchange_until(state, t1);
    }

    fn exchange_until(&mut self, state: &mut C, t1: f64) {
        let dt = t1 - self.now;
        if dt <= 0.0 {
            return;
        }
        let count = self.exchanges.draw_count(dt, &mut self.rng);
        self.totals.exchange_attempts += count;
        let (base, stride) = state.site_map();
        let swaps = match (&mut self.log, &mut self.time_rng) {
            (Some(log), Some(trng)) => {
                let mut times = SortedUniforms::new(self.now, t1, count);
                let mut drawn = 0u64;
                let mut last = self.now;
                self.exchanges
                    .run(state.cells_mut(), count, &mut self.rng, |k, i, j| {
                        while drawn <= k {
                            last = times.next(trng);
                            drawn += 1;
                        }
                        log.push(Event {
                            time: last,
                            kind: EventKind::Exchange {
                                x: base + stride * i as i64,
                                y: base + stride * j as i64,
                            },
                        });
                    })
            }
            _ => self
                .exchanges
                .run(state.cells_mut(), count, &mut self.rng, |_, _, _| {}),
        };
        self.totals.exchanges += swaps;
        self.now = t1;
    }

    pub fn record(&mut self, time: f64, kind: EventKind) {
        if let Some(log) = &mut self.log {
            log.push(Event { time, kind });
        }
    }
}

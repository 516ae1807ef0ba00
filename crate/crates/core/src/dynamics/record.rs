use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    /// Occupancies of `x` and `y` swapped (only logged when they differed).
    Exchange {
        x: i64,
        y: i64,
    },
    /// Shift at a site inside the window.
    Shift {
        site: i64,
    },
    /// Shift at a site left of the window (whole window moved).
    ShiftLeftOfWindow {
        site: i64,
    },
    /// Shift at a site right of the window (no visible effect).
    ShiftRightOfWindow {
        site: i64,
    },
    /// Spread at an active site, position in half-steps.
    Spread {
        half_pos: i64,
    },
    SpreadLeftOfWindow {
        half_pos: i64,
    },
    SpreadRightOfWindow {
        half_pos: i64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// One accepted shift or spread. `site` is an integer site for shifts and a
/// position in half-steps for spreads.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthEvent {
    pub time: f64,
    pub site: i64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventTotals {
    pub exchange_attempts: u64,
    /// Attempts that changed the configuration.
    pub exchanges: u64,
    /// Shift/spread candidates drawn from the dominating process.
    pub growth_candidates: u64,
    pub growth_events: u64,
    pub left_of_window: u64,
    pub right_of_window: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot<C> {
    pub time: f64,
    pub config: C,
}

/// Everything recorded along one trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord<C> {
    pub n: usize,
    pub horizon: f64,
    pub initial: C,
    pub final_config: C,
    pub snapshots: Vec<Snapshot<C>>,
    /// Accepted shift/spread events in time order.
    pub growth: Vec<GrowthEvent>,
    pub event_log: Option<Vec<Event>>,
    pub totals: EventTotals,
    /// Upper bound on the expected number of growth events left of the window.
    pub expected_left_of_window: f64,
}

impl<C> TrajectoryRecord<C> {
    /// Number of growth events up to and including time `t`.
    pub fn growth_count(&self, t: f64) -> u64 {
        self.growth.partition_point(|e| e.time <= t) as u64
    }

    /// Per-site counts of growth events up to time `t`.
    pub fn shift_counts(&self, t: f64) -> BTreeMap<i64, u64> {
        let mut counts = BTreeMap::new();
        for e in self.growth.iter().take_while(|e| e.time <= t) {
            *counts.entry(e.site).or_insert(0) += 1;
        }
        counts
    }

    pub fn snapshot_at(&self, t: f64) -> Option<&C> {
        self.snapshots
            .iter()
            .find(|s| (s.time - t).abs() <= 1e-12 * t.abs().max(1.0))
            .map(|s| &s.config)
    }
}

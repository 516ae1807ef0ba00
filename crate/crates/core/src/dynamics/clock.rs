//! Competing exponential clocks with thinning (the exact event engine).

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};
use crate::kernels::RateField;

/// A set of clocks whose time-dependent rates are dominated by constant bars.
pub trait ClockSet {
    type Event;
    /// Sum of the bars; constant until the set is rebuilt.
    fn total_bar(&self) -> f64;
    /// Picks a clock with probability proportional to its bar; returns it and its bar.
    fn propose<R: Rng + ?Sized>(&self, rng: &mut R) -> (Self::Event, f64);
    /// Actual rate of the clock at time `t`.
    fn rate(&self, event: &Self::Event, t: f64) -> f64;
}

#[derive(Clone, Debug, PartialEq)]
pub enum Step<E> {
    Fired {
        event: E,
        time: f64,
    },
    /// A thinning rejection: time advances, nothing happens.
    Rejected {
        time: f64,
    },
    /// No candidate before the horizon.
    Exhausted,
}

/// Draws the next candidate after `now` and thins it against its bar.
pub fn kmc_step<C: ClockSet, R: Rng + ?Sized>(
    clocks: &C,
    now: f64,
    horizon: f64,
    rng: &mut R,
) -> Result<Step<C::Event>> {
    let total = clocks.total_bar();
    if !(total > 0.0) {
        return Ok(Step::Exhausted);
    }
    let dt = Exp::new(total).expect("positive rate").sample(rng);
    let time = now + dt;
    if time > horizon {
        return Ok(Step::Exhausted);
    }
    let (event, bar) = clocks.propose(rng);
    let rate = clocks.rate(&event, time);
    if rate > bar * (1.0 + 1e-9) {
        return Err(Error::SimulationAborted(format!(
            "rate {rate} exceeds its thinning bound {bar} at time {time}"
        )));
    }
    if rng.random::<f64>() * bar < rate {
        Ok(Step::Fired { event, time })
    } else {
        Ok(Step::Rejected { time })
    }
}

/// Prefix sums for sampling an index proportionally to nonnegative weights.
#[derive(Clone, Debug, Default)]
pub struct CumulativeTable {
    prefix: Vec<f64>,
}

impl CumulativeTable {
    pub fn new(weights: impl IntoIterator<Item = f64>) -> Self {
        let mut acc = 0.0;
        let prefix = weights
            .into_iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        CumulativeTable { prefix }
    }

    pub fn total(&self) -> f64 {
        self.prefix.last().copied().unwrap_or(0.0)
    }

    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 {
            self.prefix[0]
        } else {
            self.prefix[i] - self.prefix[i - 1]
        }
    }

    /// Index `i` with `prefix[i-1] <= u < prefix[i]`, skipping zero weights.
    pub fn find(&self, u: f64) -> usize {
        let i = self.prefix.partition_point(|&p| p <= u);
        i.min(self.prefix.len() - 1)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.find(rng.random::<f64>() * self.total())
    }
}

/// Clocks given by explicit bars and rate functions.
pub struct ClockTable<'a> {
    table: CumulativeTable,
    rates: Vec<Box<dyn Fn(f64) -> f64 + Send + Sync + 'a>>,
}

impl<'a> ClockTable<'a> {
    pub fn new(clocks: Vec<(f64, Box<dyn Fn(f64) -> f64 + Send + Sync + 'a>)>) -> Self {
        let table = CumulativeTable::new(clocks.iter().map(|c| c.0));
        ClockTable {
            table,
            rates: clocks.into_iter().map(|c| c.1).collect(),
        }
    }

    /// Clocks with constant rates.
    pub fn constant(rates: &[f64]) -> ClockTable<'static> {
        ClockTable::new(
            rates
                .iter()
                .map(|&r| {
                    (
                        r,
                        Box::new(move |_| r) as Box<dyn Fn(f64) -> f64 + Send + Sync>,
                    )
                })
                .collect(),
        )
    }
}

impl ClockSet for ClockTable<'_> {
    type Event = usize;

    fn total_bar(&self) -> f64 {
        self.table.total()
    }

    fn propose<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, f64) {
        let i = self.table.sample(rng);
        (i, self.table.weight(i))
    }

    fn rate(&self, event: &usize, t: f64) -> f64 {
        (self.rates[*event])(t)
    }
}

/// Event times on `[0, horizon]` of the Poisson process with intensity
/// `s -> rate(s, x / n)`, by thinning against its supremum over time.
pub fn sample_nhpp<R: Rng + ?Sized>(
    rate: &RateField,
    x: i64,
    n: usize,
    horizon: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let u = x as f64 / n as f64;
    let bar = rate.sup_over_time(u, 0.0);
    let clocks = ClockTable::new(vec![(bar, Box::new(move |s| rate.value(s, u)))]);
    let mut times = Vec::new();
    let mut now = 0.0;
    loop {
        match kmc_step(&clocks, now, horizon, rng)? {
            Step::Fired { time, .. } => {
                times.push(time);
                now = time;
            }
            Step::Rejected { time } => now = time,
            Step::Exhausted => return Ok(times),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::rng::{stream_rng, Stream};

    #[test]
    fn zero_rates_exhaust() {
        let clocks = ClockTable::constant(&[0.0, 0.0]);
        let mut rng = stream_rng(1, 0, Stream::Dynamics);
        assert_eq!(
            kmc_step(&clocks, 0.0, 10.0, &mut rng).unwrap(),
            Step::Exhausted
        );
    }

    #[test]
    fn competing_clocks_split_in_proportion() {
        let clocks = ClockTable::constant(&[1.0, 3.0]);
        let mut rng = stream_rng(2, 0, Stream::Dynamics);
        let mut first = 0usize;
        let trials = 20_000;
        for _ in 0..trials {
            if let Step::Fired { event, .. } =
                kmc_step(&clocks, 0.0, f64::INFINITY, &mut rng).unwrap()
            {
                first += (event == 0) as usize;
            }
        }
        let frac = first as f64 / trials as f64;
        let se = (0.25 * 0.75 / trials as f64).sqrt();
        assert!((frac - 0.25).abs() < 4.0 * se, "{frac}");
    }

    #[test]
    fn bar_violation_is_reported() {
        let clocks = ClockTable::new(vec![(1.0, Box::new(|_| 2.0))]);
        let mut rng = stream_rng(3, 0, Stream::Dynamics);
        assert!(kmc_step(&clocks, 0.0, f64::INFINITY, &mut rng).is_err());
    }

    #[test]
    fn cumulative_table_skips_zero_weights() {
        let t = CumulativeTable::new([0.0, 1.0, 0.0, 2.0]);
        assert_eq!(t.find(0.0), 1);
        assert_eq!(t.find(0.999), 1);
        assert_eq!(t.find(1.0), 3);
        assert_eq!(t.find(2.999), 3);
        assert_eq!(t.weight(3), 2.0);
    }

    #[test]
    fn nhpp_zero_rate_is_empty() {
        let mut rng = stream_rng(4, 0, Stream::Dynamics);
        let times = sample_nhpp(&RateField::zero(1.0), 3, 8, 1.0, &mut rng).unwrap();
        assert!(times.is_empty());
    }
}

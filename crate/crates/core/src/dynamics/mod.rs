//! Exact continuous-time simulation of the two spreading processes.
//!
//! Exchange candidates form a configuration-independent Poisson stream and
//! are applied in batches between growth candidates; growth (shift/spread)
//! candidates come from [`kmc_step`] with thinning. Sites outside the window
//! are sampled exactly from the envelope tails.

mod clock;
mod engine;
mod epcs;
mod eprs;
mod exchange;
mod record;
pub mod rng;
mod tail;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use clock::{kmc_step, sample_nhpp, ClockSet, ClockTable, CumulativeTable, Step};
pub use epcs::simulate_epcs;
pub use eprs::{simulate_eprs, MAX_EXPECTED_LEFT_SHIFTS};
pub use record::{Event, EventKind, EventTotals, GrowthEvent, Snapshot, TrajectoryRecord};

pub(crate) use tail::{GeometricTail, Side};

use crate::error::{Error, Result};
use crate::kernels::{JumpKernel, RateField};

/// Simulated region in macroscopic coordinates; it must contain the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub left: f64,
    pub right: f64,
}

impl Window {
    pub fn new(left: f64, right: f64) -> Result<Self> {
        let w = Window { left, right };
        w.validate()?;
        Ok(w)
    }

    /// `[-(half_width + margin), half_width + margin]`.
    pub fn symmetric(half_width: f64, margin: f64) -> Self {
        Window {
            left: -(half_width + margin),
            right: half_width + margin,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.left.is_finite() && self.right.is_finite() && self.left < 0.0 && self.right > 0.0)
        {
            return Err(Error::InvalidParams(format!(
                "window [{}, {}] must contain the origin",
                self.left, self.right
            )));
        }
        Ok(())
    }

    /// First site and number of sites at scaling `n`.
    pub fn sites(&self, n: usize) -> (i64, usize) {
        let l = (self.left * n as f64).floor() as i64;
        let r = (self.right * n as f64).ceil() as i64;
        (l, (r - l + 1) as usize)
    }
}

/// Distance diffusion can carry mass in time `horizon`: `4 sqrt(2 sigma^2 T)`.
pub fn diffusion_margin(sigma_sq: f64, horizon: f64) -> f64 {
    4.0 * (2.0 * sigma_sq * horizon).sqrt()
}

#[derive(Clone, Debug)]
pub struct SimParams {
    /// Sites per macroscopic unit.
    pub n: usize,
    pub horizon: f64,
    pub kernel: JumpKernel,
    /// The field `h`; the right-sided process uses `b_from_h(h)`.
    pub rate: RateField,
    pub window: Window,
    pub seed: u64,
    /// Replica index; selects an independent random stream.
    pub replica: u64,
    /// Sorted times in `[0, horizon]`.
    pub snapshot_times: Vec<f64>,
    pub log_events: bool,
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParams("N must be at least 1".into()));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::InvalidParams("horizon must be positive".into()));
        }
        if self.rate.horizon() < self.horizon * (1.0 - 1e-12) {
            return Err(Error::InvalidParams(
                "rate field is defined on a shorter horizon".into(),
            ));
        }
        if self.snapshot_times.windows(2).any(|w| w[0] > w[1])
            || self
                .snapshot_times
                .iter()
                .any(|&t| !(0.0..=self.horizon).contains(&t))
        {
            return Err(Error::InvalidParams(
                "snapshot times must be sorted and inside [0, T]".into(),
            ));
        }
        self.window.validate()?;
        let (_, len) = self.window.sites(self.n);
        if len <= self.kernel.range() {
            return Err(Error::InvalidParams(
                "window shorter than the kernel range".into(),
            ));
        }
        Ok(())
    }

    pub fn with_replica(&self, replica: u64) -> Self {
        SimParams {
            replica,
            ..self.clone()
        }
    }
}

/// Runs `f(0), ..., f(count - 1)` on a worker pool; results keep replica order.
pub fn replicate<T, F>(count: u64, threads: Option<usize>, f: F) -> Vec<Result<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let work = || (0..count).into_par_iter().map(&f).collect::<Vec<_>>();
    match threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(work),
            Err(_) => work(),
        },
        None => work(),
    }
}

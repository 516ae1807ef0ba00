use crate::dynamics::TrajectoryRecord;
use crate::error::{Error, Result};
use crate::kernels::quadrature::adaptive_simpson;
use crate::kernels::RateField;

/// `(1/N) * (number of shifts up to time t)`, counting shifts at every site,
/// including those outside the simulated window.
pub fn wlln_statistic<C>(record: &TrajectoryRecord<C>, t: f64) -> Result<f64> {
    if !(0.0..=record.horizon * (1.0 + 1e-12)).contains(&t) {
        return Err(Error::InvalidParams(format!(
            "time {t} outside [0, {}]",
            record.horizon
        )));
    }
    Ok(record.growth_count(t) as f64 / record.n as f64)
}

/// `int_0^t C(s) ds` where `C(s)` is the total mass of `h(s, .)`.
pub fn wlln_target(h: &RateField, t: f64) -> Result<f64> {
    if h.is_zero() || t == 0.0 {
        return Ok(0.0);
    }
    adaptive_simpson(&|s| h.mass_rate(s), 0.0, t, 1e-12)
}

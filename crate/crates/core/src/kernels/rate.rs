//! Space-time rate fields `h(t, u)` and their right-shifted companions
//! `b(t, u) = h(t, u - D(t))`.
//!
//! Every field is separable: a time modulation `m(t)` times a spatial
//! profile. Each field carries an exponential envelope
//! `value(t, u) <= C exp(-beta |u|)` that the quadrature and the
//! simulators rely on for tail truncation and thinning bounds.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::quadrature::{integrate_pieces, tail_cutoff};
use crate::error::{Error, Result};

/// Tail mass allowed outside the truncated integration range.
const TAIL_TOL: f64 = 1e-10;
const QUAD_TOL: f64 = 1e-12;
/// Time intervals in the cached `D(t)` table.
pub const DRIFT_TABLE_INTERVALS: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpatialProfile {
    /// `amplitude * exp(-decay * |u - center|)`
    DoubleExponential {
        amplitude: f64,
        decay: f64,
        #[serde(default)]
        center: f64,
    },
    /// `amplitude * exp(-((u - center) / width)^2)`
    Gaussian {
        amplitude: f64,
        #[serde(default)]
        center: f64,
        width: f64,
    },
    /// Linear interpolation of `values` on `start + i * step`, extended by
    /// exponential decay outside the table.
    Tabulated {
        start: f64,
        step: f64,
        values: Vec<f64>,
        left_decay: f64,
        right_decay: f64,
    },
}

impl SpatialProfile {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidRateField(m.to_string()));
        match self {
            SpatialProfile::DoubleExponential {
                amplitude,
                decay,
                center,
            } => {
                if !(amplitude.is_finite() && *amplitude >= 0.0) {
                    return bad("amplitude must be finite and nonnegative");
                }
                if !(decay.is_finite() && *decay > 0.0) {
                    return bad("decay must be positive");
                }
                if !center.is_finite() {
                    return bad("center must be finite");
                }
            }
            SpatialProfile::Gaussian {
                amplitude,
                center,
                width,
            } => {
                if !(amplitude.is_finite() && *amplitude >= 0.0) {
                    return bad("amplitude must be finite and nonnegative");
                }
                if !(width.is_finite() && *width > 0.0) {
                    return bad("width must be positive");
                }
                if !center.is_finite() {
                    return bad("center must be finite");
                }
            }
            SpatialProfile::Tabulated {
                start,
                step,
                values,
                left_decay,
                right_decay,
            } => {
                if values.len() < 2 {
                    return bad("table needs at least two values");
                }
                if !(step.is_finite() && *step > 0.0) {
                    return bad("table step must be positive");
                }
                let end = start + step * (values.len() - 1) as f64;
                if !(*start <= 0.0 && end >= 0.0) {
                    return bad("table must cover u = 0");
                }
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return bad("table values must be finite and nonnegative");
                }
                if !(*left_decay > 0.0 && *right_decay > 0.0) {
                    return bad("extrapolation decays must be positive");
                }
            }
        }
        Ok(())
    }

    pub fn value(&self, u: f64) -> f64 {
        match self {
            SpatialProfile::DoubleExponential {
                amplitude,
                decay,
                center,
            } => amplitude * (-decay * (u - center).abs()).exp(),
            SpatialProfile::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let z = (u - center) / width;
                amplitude * (-z * z).exp()
            }
            SpatialProfile::Tabulated {
                start,
                step,
                values,
                left_decay,
                right_decay,
            } => {
                let last = values.len() - 1;
                let end = start + step * last as f64;
                if u < *start {
                    values[0] * (-left_decay * (start - u)).exp()
                } else if u > end {
                    values[last] * (-right_decay * (u - end)).exp()
                } else {
                    let s = (u - start) / step;
                    let i = (s.floor() as usize).min(last - 1);
                    let frac = s - i as f64;
                    values[i] * (1.0 - frac) + values[i + 1] * frac
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            SpatialProfile::DoubleExponential { amplitude, .. }
            | SpatialProfile::Gaussian { amplitude, .. } => *amplitude == 0.0,
            SpatialProfile::Tabulated { values, .. } => values.iter().all(|v| *v == 0.0),
        }
    }

    /// Points where the profile is not smooth (or its peak).
    fn kinks(&self) -> Vec<f64> {
        match self {
            SpatialProfile::DoubleExponential { center, .. }
            | SpatialProfile::Gaussian { center, .. } => vec![*center],
            SpatialProfile::Tabulated {
                start,
                step,
                values,
                ..
            } => (0..values.len()).map(|i| start + step * i as f64).collect(),
        }
    }

    /// `(C, beta)` with `value(u) <= C exp(-beta |u|)`.
    fn envelope(&self) -> (f64, f64) {
        match self {
            SpatialProfile::DoubleExponential {
                amplitude,
                decay,
                center,
            } => (amplitude * (decay * center.abs()).exp(), *decay),
            SpatialProfile::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let beta = 1.0 / width;
                (amplitude * (center.abs() / width + 0.25).exp(), beta)
            }
            SpatialProfile::Tabulated {
                start,
                step,
                values,
                left_decay,
                right_decay,
            } => {
                let beta = left_decay.min(*right_decay);
                let c = values
                    .windows(2)
                    .enumerate()
                    .map(|(i, w)| {
                        let ua = (start + step * i as f64).abs();
                        let ub = (start + step * (i + 1) as f64).abs();
                        w[0].max(w[1]) * (beta * ua.max(ub)).exp()
                    })
                    .fold(0.0, f64::max);
                (c, beta)
            }
        }
    }

    /// Maximum of the profile over `[lo, hi]`.
    pub fn sup_on(&self, lo: f64, hi: f64) -> f64 {
        debug_assert!(lo <= hi);
        match self {
            SpatialProfile::DoubleExponential { center, .. }
            | SpatialProfile::Gaussian { center, .. } => {
                let nearest = center.clamp(lo, hi);
                self.value(nearest)
            }
            SpatialProfile::Tabulated {
                start,
                step,
                values,
                ..
            } => {
                let mut best = self.value(lo).max(self.value(hi));
                for (i, v) in values.iter().enumerate() {
                    let u = start + step * i as f64;
                    if u > lo && u < hi {
                        best = best.max(*v);
                    }
                }
                best
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeModulation {
    /// `m(t) = 1`
    #[default]
    Constant,
    /// `m(t) = 1 + amplitude * sin(2 pi frequency t + phase)`, `0 <= amplitude <= 1`
    Sinusoidal {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
}

impl TimeModulation {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            TimeModulation::Constant => 1.0,
            TimeModulation::Sinusoidal {
                amplitude,
                frequency,
                phase,
            } => 1.0 + amplitude * (2.0 * std::f64::consts::PI * frequency * t + phase).sin(),
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            TimeModulation::Constant => 1.0,
            TimeModulation::Sinusoidal { amplitude, .. } => 1.0 + amplitude,
        }
    }

    fn validate(&self) -> Result<()> {
        if let TimeModulation::Sinusoidal {
            amplitude,
            frequency,
            phase,
        } = self
        {
            if !(0.0..=1.0).contains(amplitude) || !frequency.is_finite() || !phase.is_finite() {
                return Err(Error::InvalidRateField(
                    "sinusoidal modulation needs 0 <= amplitude <= 1 and finite frequency/phase"
                        .into(),
                ));
            }
        }
        Ok(())
    }
}

/// Serialized description of a rate field; the horizon comes from the experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFieldSpec {
    pub profile: SpatialProfile,
    #[serde(default)]
    pub modulation: TimeModulation,
}

/// Cached `D(t) = int_0^t C(s)/2 ds` on a uniform time grid (cumulative trapezoid).
#[derive(Clone, Debug)]
pub struct DriftSchedule {
    step: f64,
    values: Vec<f64>,
    last_slope: f64,
}

impl DriftSchedule {
    fn build(horizon: f64, intervals: usize, mass_rate: impl Fn(f64) -> f64) -> Self {
        let step = horizon / intervals as f64;
        let mut values = Vec::with_capacity(intervals + 1);
        values.push(0.0);
        let mut prev = 0.5 * mass_rate(0.0);
        let mut acc = 0.0;
        for k in 1..=intervals {
            let cur = 0.5 * mass_rate(k as f64 * step);
            acc += 0.5 * step * (prev + cur);
            values.push(acc);
            prev = cur;
        }
        DriftSchedule {
            step,
            values,
            last_slope: prev,
        }
    }

    /// `D(t)`, linearly interpolated; beyond the horizon extended with slope `C(T)/2`.
    pub fn at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let s = t / self.step;
        let last = self.values.len() - 1;
        if s >= last as f64 {
            return self.values[last] + (t - last as f64 * self.step) * self.last_slope;
        }
        let i = s.floor() as usize;
        let frac = s - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    pub fn total(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

/// A validated rate field on `[0, horizon] x R`.
#[derive(Clone, Debug)]
pub struct RateField {
    profile: SpatialProfile,
    modulation: TimeModulation,
    horizon: f64,
    drift: Option<Arc<DriftSchedule>>,
    env_c: f64,
    env_beta: f64,
    profile_mass: f64,
}

impl RateField {
    pub fn new(profile: SpatialProfile, modulation: TimeModulation, horizon: f64) -> Result<Self> {
        profile.validate()?;
        modulation.validate()?;
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidRateField("horizon must be positive".into()));
        }
        let (pc, beta) = profile.envelope();
        let profile_mass = if profile.is_zero() {
            0.0
        } else {
            let cut = tail_cutoff(pc, beta, TAIL_TOL)?;
            integrate_pieces(&|u| profile.value(u), -cut, cut, &profile.kinks(), QUAD_TOL)?
        };
        Ok(RateField {
            env_c: pc * modulation.sup(),
            env_beta: beta,
            profile,
            modulation,
            horizon,
            drift: None,
            profile_mass,
        })
    }

    pub fn from_spec(spec: &RateFieldSpec, horizon: f64) -> Result<Self> {
        RateField::new(spec.profile.clone(), spec.modulation.clone(), horizon)
    }

    /// The field that is identically zero.
    pub fn zero(horizon: f64) -> Self {
        RateField::new(
            SpatialProfile::DoubleExponential {
                amplitude: 0.0,
                decay: 1.0,
                center: 0.0,
            },
            TimeModulation::Constant,
            horizon,
        )
        .expect("zero field is valid")
    }

    /// `amplitude * exp(-decay |u|)` with constant modulation.
    pub fn double_exponential(amplitude: f64, decay: f64, horizon: f64) -> Result<Self> {
        RateField::new(
            SpatialProfile::DoubleExponential {
                amplitude,
                decay,
                center: 0.0,
            },
            TimeModulation::Constant,
            horizon,
        )
    }

    pub fn profile(&self) -> &SpatialProfile {
        &self.profile
    }

    pub fn modulation(&self) -> &TimeModulation {
        &self.modulation
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn is_zero(&self) -> bool {
        self.profile.is_zero()
    }

    /// True for fields produced by [`b_from_h`].
    pub fn is_shifted(&self) -> bool {
        self.drift.is_some()
    }

    /// `(C, beta)` with `value(t, u) <= C exp(-beta |u|)` on `[0, T] x R`.
    pub fn envelope(&self) -> (f64, f64) {
        (self.env_c, self.env_beta)
    }

    /// Spatial shift `D(t)` applied to the profile (zero for unshifted fields).
    pub fn shift_at(&self, t: f64) -> f64 {
        self.drift.as_ref().map_or(0.0, |d| d.at(t))
    }

    #[inline]
    pub fn value(&self, t: f64, u: f64) -> f64 {
        let shift = match &self.drift {
            Some(d) => d.at(t),
            None => 0.0,
        };
        self.modulation.value(t) * self.profile.value(u - shift)
    }

    pub fn modulation_at(&self, t: f64) -> f64 {
        self.modulation.value(t)
    }

    /// Upper bound of `value(s, u)` over `s` in `[t_from, T]`.
    pub fn sup_over_time(&self, u: f64, t_from: f64) -> f64 {
        let m = self.modulation.sup();
        match &self.drift {
            None => m * self.profile.value(u),
            Some(d) => {
                let lo = d.at(t_from.max(0.0));
                let hi = d.at(self.horizon);
                m * self.profile.sup_on(u - hi, u - lo)
            }
        }
    }

    /// `sup_t C(t)`.
    pub fn max_mass_rate(&self) -> f64 {
        self.modulation.sup() * self.profile_mass
    }

    /// `C(t)` from the cached spatial integral of the profile.
    pub fn mass_rate(&self, t: f64) -> f64 {
        self.modulation.value(t) * self.profile_mass
    }

    fn kinks_at(&self, t: f64) -> Vec<f64> {
        let shift = self.shift_at(t);
        self.profile
            .kinks()
            .into_iter()
            .map(|k| k + shift)
            .collect()
    }

    /// Checks the envelope on a dense grid of `(t, u)` points.
    pub fn check_envelope(&self, u_extent: f64, nu: usize, nt: usize) -> bool {
        let (c, beta) = self.envelope();
        (0..=nt).all(|i| {
            let t = self.horizon * i as f64 / nt as f64;
            (0..=nu).all(|j| {
                let u = -u_extent + 2.0 * u_extent * j as f64 / nu as f64;
                let v = self.value(t, u);
                v >= 0.0 && v <= c * (-beta * u.abs()).exp() * (1.0 + 1e-12)
            })
        })
    }
}

fn check_time(field: &RateField, t: f64) -> Result<()> {
    if !(t >= 0.0 && t <= field.horizon * (1.0 + 1e-12)) {
        return Err(Error::InvalidParams(format!(
            "time {t} outside [0, {}]",
            field.horizon
        )));
    }
    Ok(())
}

/// `C(t) = int h(t, u) du`, by quadrature over a range cut where the envelope tail is below 1e-10.
pub fn total_mass(field: &RateField, t: f64) -> Result<f64> {
    check_time(field, t)?;
    if field.is_zero() {
        return Ok(0.0);
    }
    let (c, beta) = field.envelope();
    let cut = tail_cutoff(c, beta, TAIL_TOL)?;
    integrate_pieces(
        &|u| field.value(t, u),
        -cut,
        cut,
        &field.kinks_at(t),
        QUAD_TOL,
    )
}

/// `int_{-inf}^{u} field(t, v) dv`.
pub fn partial_mass(field: &RateField, t: f64, u: f64) -> Result<f64> {
    check_time(field, t)?;
    if field.is_zero() {
        return Ok(0.0);
    }
    let (c, beta) = field.envelope();
    let cut = tail_cutoff(c, beta, TAIL_TOL)?;
    let lower = if u > -cut { -cut } else { u - 30.0 / beta };
    integrate_pieces(
        &|v| field.value(t, v),
        lower,
        u,
        &field.kinks_at(t),
        QUAD_TOL,
    )
}

/// `int_{u}^{+inf} field(t, v) dv`.
pub fn upper_mass(field: &RateField, t: f64, u: f64) -> Result<f64> {
    check_time(field, t)?;
    if field.is_zero() {
        return Ok(0.0);
    }
    let (c, beta) = field.envelope();
    let cut = tail_cutoff(c, beta, TAIL_TOL)?;
    let upper = if u < cut { cut } else { u + 30.0 / beta };
    integrate_pieces(
        &|v| field.value(t, v),
        u,
        upper,
        &field.kinks_at(t),
        QUAD_TOL,
    )
}

/// Shifted field `b(t, u) = h(t, u - D(t))` with `D(t) = int_0^t C(s)/2 ds`.
///
/// The envelope constant grows by `exp(beta * D(T))` to cover the drift.
pub fn b_from_h(h: &RateField) -> Result<RateField> {
    if h.is_shifted() {
        return Err(Error::InvalidRateField(
            "field is already shifted; b_from_h expects h".into(),
        ));
    }
    let schedule = DriftSchedule::build(h.horizon, DRIFT_TABLE_INTERVALS, |t| h.mass_rate(t));
    let d_total = schedule.total();
    let mut b = h.clone();
    b.env_c = h.env_c * (h.env_beta * d_total).exp();
    b.drift = Some(Arc::new(schedule));
    Ok(b)
}

/// Drift `a(t, u) = int_{-inf}^{u} b(t, v) dv` of the right-shift equation.
pub fn a_field(b: &RateField, t: f64, u: f64) -> Result<f64> {
    partial_mass(b, t, u)
}

/// `gamma(t, u) = int_{-inf}^{u} h - int_{u}^{+inf} h`.
pub fn gamma_field(h: &RateField, t: f64, u: f64) -> Result<f64> {
    Ok(partial_mass(h, t, u)? - upper_mass(h, t, u)?)
}

/// Macroscopic coefficients of both hydrodynamic equations, derived from
/// one kernel and one rate field `h`.
#[derive(Clone, Debug)]
pub struct MacroCoefficients {
    pub sigma_sq: f64,
    pub h: RateField,
    pub b: RateField,
}

impl MacroCoefficients {
    pub fn new(kernel: &super::JumpKernel, h: RateField) -> Result<Self> {
        let b = b_from_h(&h)?;
        Ok(MacroCoefficients {
            sigma_sq: kernel.sigma_sq(),
            h,
            b,
        })
    }

    pub fn c_of_t(&self, t: f64) -> f64 {
        self.h.mass_rate(t)
    }

    /// `D(t) = int_0^t C(s)/2 ds`.
    pub fn d_of_t(&self, t: f64) -> f64 {
        self.b.shift_at(t)
    }

    pub fn a(&self, t: f64, u: f64) -> Result<f64> {
        a_field(&self.b, t, u)
    }

    pub fn gamma(&self, t: f64, u: f64) -> Result<f64> {
        gamma_field(&self.h, t, u)
    }
}

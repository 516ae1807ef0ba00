use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::Window;
use crate::error::{Error, Result};
use crate::lattice::ExclusionConfig;

/// Macroscopic initial density profiles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialProfile {
    Constant {
        density: f64,
    },
    /// `level * (tanh((u - left)/smoothing) - tanh((u - right)/smoothing)) / 2`
    SmoothedStep {
        level: f64,
        left: f64,
        right: f64,
        smoothing: f64,
    },
    /// `amplitude * exp(-((u - center)/width)^2)`
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
}

impl InitialProfile {
    pub fn value(&self, u: f64) -> f64 {
        match *self {
            InitialProfile::Constant { density } => density,
            InitialProfile::SmoothedStep {
                level,
                left,
                right,
                smoothing,
            } => 0.5 * level * (((u - left) / smoothing).tanh() - ((u - right) / smoothing).tanh()),
            InitialProfile::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let z = (u - center) / width;
                amplitude * (-z * z).exp()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            InitialProfile::Constant { density } => (0.0..=1.0).contains(&density),
            InitialProfile::SmoothedStep {
                level,
                left,
                right,
                smoothing,
            } => (0.0..=1.0).contains(&level) && left < right && smoothing > 0.0,
            InitialProfile::Gaussian {
                amplitude, width, ..
            } => (0.0..=1.0).contains(&amplitude) && width > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "invalid initial profile {self:?}"
            )))
        }
    }
}

/// Independent cells, site `x` occupied with probability `rho0(x / N)`.
pub fn sample_bernoulli_profile<R: Rng + ?Sized>(
    rho0: impl Fn(f64) -> f64,
    n: usize,
    window: &Window,
    rng: &mut R,
) -> Result<ExclusionConfig> {
    let (left, len) = window.sites(n);
    let mut cells = Vec::with_capacity(len);
    for i in 0..len {
        let x = left + i as i64;
        let p = rho0(x as f64 / n as f64);
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParams(format!(
                "density {p} at site {x} is outside [0, 1]"
            )));
        }
        cells.push((rng.random::<f64>() < p) as u8);
    }
    ExclusionConfig::new(left, cells)
}

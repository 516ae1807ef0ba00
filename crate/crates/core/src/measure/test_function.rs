use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpFamily {
    /// `(1 + cos(pi s)) / 2` on `|s| <= 1`.
    RaisedCosine,
    /// `(1 - s^2)^3` on `|s| <= 1`.
    PolynomialBump,
}

/// Compactly supported bump `phi((u - center - velocity t) / half_width)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub family: BumpFamily,
    pub center: f64,
    pub half_width: f64,
    #[serde(default)]
    pub velocity: f64,
}

impl TestFunction {
    pub fn raised_cosine(center: f64, half_width: f64) -> Self {
        TestFunction {
            family: BumpFamily::RaisedCosine,
            center,
            half_width,
            velocity: 0.0,
        }
    }

    pub fn polynomial(center: f64, half_width: f64) -> Self {
        TestFunction {
            family: BumpFamily::PolynomialBump,
            center,
            half_width,
            velocity: 0.0,
        }
    }

    pub fn moving(self, velocity: f64) -> Self {
        TestFunction { velocity, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_width > 0.0 && self.center.is_finite() && self.velocity.is_finite()) {
            return Err(Error::InvalidParams(
                "test function needs half_width > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn is_time_dependent(&self) -> bool {
        self.velocity != 0.0
    }

    fn scaled(&self, t: f64, u: f64) -> f64 {
        (u - self.center - self.velocity * t) / self.half_width
    }

    /// `(phi, phi', phi'')` at the scaled coordinate.
    fn profile(&self, s: f64) -> (f64, f64, f64) {
        if s.abs() >= 1.0 {
            return (0.0, 0.0, 0.0);
        }
        match self.family {
            BumpFamily::RaisedCosine => {
                let (sn, cs) = (PI * s).sin_cos();
                (0.5 * (1.0 + cs), -0.5 * PI * sn, -0.5 * PI * PI * cs)
            }
            BumpFamily::PolynomialBump => {
                let q = 1.0 - s * s;
                (q * q * q, -6.0 * s * q * q, -6.0 * q * q + 24.0 * s * s * q)
            }
        }
    }

    pub fn value(&self, t: f64, u: f64) -> f64 {
        self.profile(self.scaled(t, u)).0
    }

    pub fn d_du(&self, t: f64, u: f64) -> f64 {
        self.profile(self.scaled(t, u)).1 / self.half_width
    }

    pub fn d2_du2(&self, t: f64, u: f64) -> f64 {
        self.profile(self.scaled(t, u)).2 / (self.half_width * self.half_width)
    }

    pub fn d_dt(&self, t: f64, u: f64) -> f64 {
        -self.velocity * self.d_du(t, u)
    }

    /// Closed support at time `t`.
    pub fn support(&self, t: f64) -> (f64, f64) {
        let c = self.center + self.velocity * t;
        (c - self.half_width, c + self.half_width)
    }

    /// Union of the supports over `[0, horizon]`.
    pub fn support_over(&self, horizon: f64) -> (f64, f64) {
        let (a0, b0) = self.support(0.0);
        let (a1, b1) = self.support(horizon);
        (a0.min(a1), b0.max(b1))
    }

    /// `int G(t, u) du`.
    pub fn integral(&self) -> f64 {
        match self.family {
            BumpFamily::RaisedCosine => self.half_width,
            BumpFamily::PolynomialBump => self.half_width * 32.0 / 35.0,
        }
    }
}

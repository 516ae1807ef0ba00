use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform node grid `u_min + i du`, `i = 0..=cells`, plus time stepping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub u_min: f64,
    pub u_max: f64,
    pub du: f64,
    pub horizon: f64,
    /// Time step; chosen from the stability bound when absent.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Times at which the solution is stored (0 and the horizon are always added).
    #[serde(default)]
    pub output_times: Vec<f64>,
}

impl Grid {
    pub fn new(u_min: f64, u_max: f64, du: f64, horizon: f64) -> Self {
        Grid {
            u_min,
            u_max,
            du,
            horizon,
            dt: None,
            output_times: Vec::new(),
        }
    }

    pub fn with_outputs(mut self, times: &[f64]) -> Self {
        self.output_times = times.to_vec();
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.du > 0.0 && self.u_max > self.u_min + 2.0 * self.du) {
            return Err(Error::InvalidParams(
                "grid needs du > 0 and at least three nodes".into(),
            ));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidParams("grid horizon must be positive".into()));
        }
        if self
            .output_times
            .iter()
            .any(|&t| !(0.0..=self.horizon).contains(&t))
        {
            return Err(Error::InvalidParams(
                "output times must lie in [0, T]".into(),
            ));
        }
        Ok(())
    }

    pub fn nodes(&self) -> usize {
        ((self.u_max - self.u_min) / self.du).round() as usize + 1
    }

    pub fn node(&self, i: usize) -> f64 {
        self.u_min + i as f64 * self.du
    }

    /// Sorted output times including 0 and the horizon.
    pub(crate) fn all_outputs(&self) -> Vec<f64> {
        let mut times = self.output_times.clone();
        times.push(0.0);
        times.push(self.horizon);
        times.sort_by(f64::total_cmp);
        times.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
        times
    }
}

/// Solution values on the node grid at the stored times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub u_min: f64,
    pub du: f64,
    pub dt: f64,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl GridFunction {
    pub fn nodes(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn node(&self, i: usize) -> f64 {
        self.u_min + i as f64 * self.du
    }

    pub fn u_max(&self) -> f64 {
        self.node(self.nodes() - 1)
    }

    pub fn time_index(&self, t: f64) -> Option<usize> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-9 * t.abs().max(1.0))
    }

    pub fn profile_at(&self, t: f64) -> Result<&[f64]> {
        self.time_index(t)
            .map(|k| self.values[k].as_slice())
            .ok_or_else(|| Error::InvalidParams(format!("no stored solution at t = {t}")))
    }

    /// Linear interpolation in space of the stored profile `k`.
    pub fn interpolate(&self, k: usize, u: f64) -> Option<f64> {
        let row = &self.values[k];
        let s = (u - self.u_min) / self.du;
        if s < -1e-9 || s > (row.len() - 1) as f64 + 1e-9 {
            return None;
        }
        let s = s.clamp(0.0, (row.len() - 1) as f64);
        let i = (s.floor() as usize).min(row.len() - 2);
        let f = s - i as f64;
        Some(row[i] * (1.0 - f) + row[i + 1] * f)
    }

    /// `int g(u) value(t, u) du` by the trapezoid rule on the nodes.
    pub fn pair(&self, t: f64, g: impl Fn(f64) -> f64) -> Result<f64> {
        let row = self.profile_at(t)?;
        let last = row.len() - 1;
        let sum: f64 = row
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let w = if i == 0 || i == last { 0.5 } else { 1.0 };
                w * v * g(self.node(i))
            })
            .sum();
        Ok(sum * self.du)
    }

    /// Total mass `int value(t, u) du` (trapezoid).
    pub fn mass(&self, k: usize) -> f64 {
        let row = &self.values[k];
        let inner: f64 = row.iter().sum::<f64>() - 0.5 * (row[0] + row[row.len() - 1]);
        inner * self.du
    }

    /// CSV: a header row `t,u_0,u_1,...` then one row per stored time.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut header = String::from("t");
        for i in 0..self.nodes() {
            header.push_str(&format!(",{}", self.node(i)));
        }
        writeln!(out, "{header}")?;
        for (t, row) in self.times.iter().zip(&self.values) {
            let mut line = t.to_string();
            for v in row {
                line.push_str(&format!(",{v}"));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

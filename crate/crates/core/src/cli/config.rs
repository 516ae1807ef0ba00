//! Experiment configuration: a JSON document described by `configs/schema.json`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dynamics::{diffusion_margin, Window, MAX_EXPECTED_LEFT_SHIFTS};
use crate::error::{Error, Result};
use crate::kernels::{b_from_h, JumpKernel, RateField, RateFieldSpec};
use crate::measure::{InitialProfile, Integration, NamedTest};
use crate::pde::{solve_convdiff, solve_epcs_pde, solve_eprs_pde, Grid, GridFunction, ZeroDrift};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Process {
    /// Exclusion with right-sided shifts.
    Eprs,
    /// Exclusion with centered spreading.
    Epcs,
    /// Centered spreading coupled with the auxiliary process.
    Coupled,
    /// Plain symmetric exclusion (no rate field).
    Ssep,
}

/// Pipelines that `run` can chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Simulate,
    SolvePde,
    Hydro,
    Wlln,
    Martingale,
    Transform,
    Coupling,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeSpec {
    pub u_min: f64,
    pub u_max: f64,
    pub du: f64,
    #[serde(default)]
    pub dt: Option<f64>,
    /// Grid halvings used by the convergence checks.
    #[serde(default = "default_refinements")]
    pub refinements: usize,
}

fn default_refinements() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MartingaleSpec {
    /// Id of the test function; the first one when absent.
    #[serde(default)]
    pub test: Option<String>,
    #[serde(default = "default_true")]
    pub printed_formula: bool,
    /// The transcribed formula is a pathwise identity and costly to replay,
    /// so it is evaluated on the first few replicas only.
    #[serde(default = "default_printed_replicas")]
    pub printed_replicas: u64,
    #[serde(default = "default_integration")]
    pub integration: Integration,
}

fn default_true() -> bool {
    true
}

fn default_printed_replicas() -> u64 {
    8
}

fn default_integration() -> Integration {
    Integration::Tabulated
}

impl Default for MartingaleSpec {
    fn default() -> Self {
        MartingaleSpec {
            test: None,
            printed_formula: true,
            printed_replicas: default_printed_replicas(),
            integration: Integration::Tabulated,
        }
    }
}

/// Pass/fail thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Criteria {
    pub hydro_max_error: f64,
    pub heat_max_error: f64,
    pub heat_order_ratio: f64,
    pub transform_factor: f64,
    pub z_max: f64,
    pub scaling_ratio: [f64; 2],
    pub significance: f64,
    pub printed_tolerance: f64,
}

impl Default for Criteria {
    fn default() -> Self {
        Criteria {
            hydro_max_error: 0.05,
            heat_max_error: 1e-3,
            heat_order_ratio: 3.5,
            transform_factor: 3.0,
            z_max: 3.0,
            scaling_ratio: [1.3, 2.7],
            significance: 0.01,
            printed_tolerance: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub process: Process,
    #[serde(default = "JumpKernel::nearest_neighbor")]
    pub kernel: JumpKernel,
    /// The field `h`; the right-sided process uses the shifted `b`.
    #[serde(default)]
    pub rate: Option<RateFieldSpec>,
    pub initial: InitialProfile,
    pub n_list: Vec<usize>,
    pub replicas: u64,
    pub horizon: f64,
    /// Observation times; the horizon when empty.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Fixed window for every N; chosen from the test functions when absent.
    #[serde(default)]
    pub window: Option<Window>,
    #[serde(default)]
    pub pde: Option<PdeSpec>,
    #[serde(default)]
    pub test_functions: Vec<NamedTest>,
    #[serde(default)]
    pub seed: u64,
    /// Where artifacts go; not part of the experiment, so never written back.
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub emit_event_log: bool,
    /// Replicas (per N) whose snapshots, event logs and J paths are written out.
    #[serde(default = "default_dump")]
    pub dump_replicas: u64,
    #[serde(default)]
    pub martingale: Option<MartingaleSpec>,
    #[serde(default)]
    pub criteria: Criteria,
    /// What `run` executes; derived from the process when empty.
    #[serde(default)]
    pub checks: Vec<Check>,
}

fn default_dump() -> u64 {
    1
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replicas: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub emit_event_log: bool,
}

/// Parses and validates a configuration; errors carry the offending field path.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(if path == "." { "$".into() } else { path }, e.into_inner().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(r) = o.replicas {
            self.replicas = r;
        }
        if let Some(d) = &o.output_dir {
            self.output_dir = Some(d.clone());
        }
        self.emit_event_log |= o.emit_event_log;
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.horizon;
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::config("horizon", "must be positive and finite"));
        }
        if self.replicas == 0 {
            return Err(Error::config("replicas", "must be at least 1"));
        }
        if self.n_list.is_empty() {
            return Err(Error::config("n_list", "must not be empty"));
        }
        for (i, &n) in self.n_list.iter().enumerate() {
            if n == 0 || n > u32::MAX as usize {
                return Err(Error::config(format!("n_list[{i}]"), "must be in 1..2^32"));
            }
            if i > 0 && n <= self.n_list[i - 1] {
                return Err(Error::config(format!("n_list[{i}]"), "N-list must be strictly increasing"));
            }
        }
        for (i, &s) in self.snapshot_times.iter().enumerate() {
            if !(0.0..=t).contains(&s) {
                return Err(Error::config(format!("snapshot_times[{i}]"), "must lie in [0, horizon]"));
            }
            if i > 0 && s <= self.snapshot_times[i - 1] {
                return Err(Error::config(format!("snapshot_times[{i}]"), "must be strictly increasing"));
            }
        }
        let h = self.rate_field().map_err(|e| Error::config("rate", e.to_string()))?;
        if self.process == Process::Ssep && !h.is_zero() {
            return Err(Error::config("rate", "the ssep process takes no rate field"));
        }
        self.initial
            .validate()
            .map_err(|e| Error::config("initial", e.to_string()))?;
        for (i, g) in self.test_functions.iter().enumerate() {
            g.function
                .validate()
                .map_err(|e| Error::config(format!("test_functions[{i}]"), e.to_string()))?;
            if self.test_functions[..i].iter().any(|o| o.id == g.id) {
                return Err(Error::config(format!("test_functions[{i}].id"), "duplicate id"));
            }
        }
        if let Some(w) = &self.window {
            w.validate().map_err(|e| Error::config("window", e.to_string()))?;
        }
        if let Some(p) = &self.pde {
            self.grid(p, 0)
                .validate()
                .map_err(|e| Error::config("pde", e.to_string()))?;
        }
        if let Some(m) = &self.martingale {
            if let Some(id) = &m.test {
                if !self.test_functions.iter().any(|g| &g.id == id) {
                    return Err(Error::config("martingale.test", format!("no test function with id {id}")));
                }
            }
        }
        let c = &self.criteria;
        if !(c.significance > 0.0 && c.significance < 1.0) {
            return Err(Error::config("criteria.significance", "must lie in (0, 1)"));
        }
        if c.scaling_ratio[0] > c.scaling_ratio[1] {
            return Err(Error::config("criteria.scaling_ratio", "lower bound exceeds upper bound"));
        }
        Ok(())
    }

    /// The field `h` on `[0, horizon]` (zero when absent).
    pub fn rate_field(&self) -> Result<RateField> {
        match &self.rate {
            Some(spec) => RateField::from_spec(spec, self.horizon),
            None => Ok(RateField::zero(self.horizon)),
        }
    }

    /// Snapshot times, or just the horizon.
    pub fn times(&self) -> Vec<f64> {
        if self.snapshot_times.is_empty() {
            vec![self.horizon]
        } else {
            self.snapshot_times.clone()
        }
    }

    /// PDE grid refined `level` times.
    pub fn grid(&self, p: &PdeSpec, level: usize) -> Grid {
        let scale = 0.5f64.powi(level as i32);
        let mut g = Grid::new(p.u_min, p.u_max, p.du * scale, self.horizon).with_outputs(&self.times());
        if let Some(dt) = p.dt {
            g = g.with_dt(dt * scale * scale);
        }
        g
    }

    pub fn pde_spec(&self) -> Result<&PdeSpec> {
        self.pde
            .as_ref()
            .ok_or_else(|| Error::config("pde", "this command needs a pde grid"))
    }

    /// `zeta` (right-sided), `rho` (centered) or the heat solution on the
    /// configured grid refined `level` times.
    pub fn solve_pde(&self, level: usize) -> Result<GridFunction> {
        self.solve_pde_on(self.pde_spec()?, level)
    }

    pub(crate) fn solve_pde_on(&self, spec: &PdeSpec, level: usize) -> Result<GridFunction> {
        let h = self.rate_field()?;
        let grid = self.grid(spec, level);
        let s2 = self.kernel.sigma_sq();
        let init = |u: f64| self.initial.value(u);
        match self.process {
            Process::Ssep => solve_convdiff(s2, &ZeroDrift, None, &init, &grid),
            Process::Eprs => solve_eprs_pde(s2, &h, &init, &grid),
            Process::Epcs | Process::Coupled => solve_epcs_pde(s2, &h, &init, &grid),
        }
    }

    /// The configured window, or one covering the test functions with room
    /// for diffusion, drift and (right-sided process) the left tail of `b`.
    pub fn window_for(&self, n: usize) -> Result<Window> {
        if let Some(w) = self.window {
            return Ok(w);
        }
        let t = self.horizon;
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        for g in &self.test_functions {
            let (a, b) = g.function.support_over(t);
            lo = lo.min(a);
            hi = hi.max(b);
        }
        let h = self.rate_field()?;
        let b = b_from_h(&h)?;
        let d = b.shift_at(t);
        let m = diffusion_margin(self.kernel.sigma_sq(), t);
        let (mut left, right) = match self.process {
            Process::Eprs | Process::Ssep => (lo - m, hi + m + 2.0 * d),
            Process::Epcs | Process::Coupled => (lo - m - d, hi + m + 2.0 * d),
        };
        if self.process == Process::Eprs && !b.is_zero() {
            // expected left-of-window shifts T c q^(|first|) / (1 - q), kept below half the abort limit
            let (c, beta) = b.envelope();
            let nf = n as f64;
            let q = (-beta / nf).exp();
            let target = 0.5 * MAX_EXPECTED_LEFT_SHIFTS * (1.0 - q) / (t * c);
            if target < 1.0 {
                let need = -target.ln() / beta - 1.0 / nf;
                left = left.min(-need);
            }
        }
        let round = |x: f64| (x * 4.0).abs().ceil() / 4.0;
        Window::new(-round(left.min(-0.25)), round(right.max(0.25)))
    }

    /// Checks executed by `run`.
    pub fn run_checks(&self) -> Vec<Check> {
        if !self.checks.is_empty() {
            return self.checks.clone();
        }
        match self.process {
            Process::Coupled => vec![Check::Coupling],
            _ => vec![Check::Hydro],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "process": "eprs",
        "rate": {"profile": {"kind": "double_exponential", "amplitude": 1.0, "decay": 1.0}},
        "initial": {"kind": "constant", "density": 0.5},
        "n_list": [16, 32],
        "replicas": 4,
        "horizon": 0.5
    }"#;

    fn edit(f: impl FnOnce(&mut serde_json::Value)) -> String {
        let mut v: serde_json::Value = serde_json::from_str(BASE).unwrap();
        f(&mut v);
        v.to_string()
    }

    fn path_of(text: &str) -> String {
        match parse_config(text) {
            Err(Error::Config { path, .. }) => path,
            other => panic!("expected a configuration error, got {other:?}"),
        }
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = parse_config(BASE).unwrap();
        assert_eq!(cfg.kernel, JumpKernel::nearest_neighbor());
        assert_eq!(cfg.times(), vec![0.5]);
        assert_eq!(cfg.dump_replicas, 1);
        assert_eq!(cfg.run_checks(), vec![Check::Hydro]);
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(path_of(&edit(|v| v["replicas"] = 0.into())), "replicas");
        assert_eq!(path_of(&edit(|v| v["n_list"] = serde_json::json!([32, 16]))), "n_list[1]");
        assert_eq!(path_of(&edit(|v| v["n_list"] = serde_json::json!([16, "x"]))), "n_list[1]");
        assert_eq!(path_of(&edit(|v| v["kernel"] = serde_json::json!({"probs": [0.3]}))), "kernel");
        assert_eq!(
            path_of(&edit(|v| v["rate"]["profile"]["decay"] = (-1.0).into())),
            "rate"
        );
        assert_eq!(path_of(&edit(|v| v["process"] = "ssep".into())), "rate");
        assert_eq!(path_of(&edit(|v| v["extra"] = 1.into())), "extra");
        assert_eq!(
            path_of(&edit(|v| v["snapshot_times"] = serde_json::json!([0.1, 0.9]))),
            "snapshot_times[1]"
        );
    }

    #[test]
    fn overrides_are_validated() {
        let mut cfg = parse_config(BASE).unwrap();
        let bad = Overrides {
            replicas: Some(0),
            ..Overrides::default()
        };
        assert!(cfg.apply(&bad).is_err());
        let good = Overrides {
            seed: Some(9),
            replicas: Some(2),
            ..Overrides::default()
        };
        cfg.apply(&good).unwrap();
        assert_eq!((cfg.seed, cfg.replicas), (9, 2));
    }

    #[test]
    fn automatic_window_respects_the_left_tail() {
        let cfg = parse_config(BASE).unwrap();
        for n in [16, 64, 256] {
            let w = cfg.window_for(n).unwrap();
            let b = b_from_h(&cfg.rate_field().unwrap()).unwrap();
            let (c, beta) = b.envelope();
            let (left, _) = w.sites(n);
            let q = (-beta / n as f64).exp();
            let expected = cfg.horizon * c * q.powf((1 - left) as f64) / (1.0 - q);
            assert!(expected <= 0.5 * MAX_EXPECTED_LEFT_SHIFTS + 1e-12, "N = {n}: {expected}");
            assert!(w.left <= -1.0 - diffusion_margin(0.5, 0.5));
        }
    }
}

//! Explicit conservative scheme for `d_t z = s2 z'' - (v z)' + source`:
//! central diffusion, first-order upwind advective flux, forward Euler,
//! zero-gradient ghost nodes at both ends.

use super::grid::{Grid, GridFunction};
use crate::error::{Error, Result};
use crate::kernels::{partial_mass, upper_mass, RateField};

/// Values leaving `[-BOUND_SLACK, 1 + BOUND_SLACK]` abort a solve.
pub const BOUND_SLACK: f64 = 1e-6;
/// Safety factor applied to the stability limit.
pub const CFL_SAFETY: f64 = 0.9;

/// Advection velocity sampled on cell faces.
pub trait Drift {
    /// Upper bound of `|v(t, u)|` over `[0, T] x R`.
    fn max_abs(&self) -> f64;
    fn fill(&self, t: f64, faces: &[f64], out: &mut [f64]) -> Result<()>;
}

pub struct ZeroDrift;

impl Drift for ZeroDrift {
    fn max_abs(&self) -> f64 {
        0.0
    }
    fn fill(&self, _t: f64, _faces: &[f64], out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        Ok(())
    }
}

/// A drift given pointwise by a closure with a known bound.
pub struct FnDrift<F> {
    pub f: F,
    pub bound: f64,
}

impl<F: Fn(f64, f64) -> f64> Drift for FnDrift<F> {
    fn max_abs(&self) -> f64 {
        self.bound
    }
    fn fill(&self, t: f64, faces: &[f64], out: &mut [f64]) -> Result<()> {
        for (o, &u) in out.iter_mut().zip(faces) {
            *o = (self.f)(t, u);
        }
        Ok(())
    }
}

/// Simpson panel integrals of `field(t, .)` between consecutive faces.
fn panel_integrals(field: &RateField, t: f64, faces: &[f64]) -> Vec<f64> {
    let at_face: Vec<f64> = faces.iter().map(|&u| field.value(t, u)).collect();
    faces
        .windows(2)
        .zip(at_face.windows(2))
        .map(|(f, v)| {
            let mid = field.value(t, 0.5 * (f[0] + f[1]));
            (f[1] - f[0]) / 6.0 * (v[0] + 4.0 * mid + v[1])
        })
        .collect()
}

/// `a(t, u) = int_{-inf}^{u} b(t, v) dv` for the right-sided equation.
pub struct ShiftDrift<'a> {
    pub b: &'a RateField,
}

impl Drift for ShiftDrift<'_> {
    fn max_abs(&self) -> f64 {
        self.b.max_mass_rate()
    }
    fn fill(&self, t: f64, faces: &[f64], out: &mut [f64]) -> Result<()> {
        let panels = panel_integrals(self.b, t, faces);
        out[0] = partial_mass(self.b, t, faces[0])?;
        for (j, p) in panels.iter().enumerate() {
            out[j + 1] = out[j] + p;
        }
        Ok(())
    }
}

/// `gamma(t, u) / 2` with both one-sided integrals of `h` accumulated separately.
pub struct HalfGammaDrift<'a> {
    pub h: &'a RateField,
}

impl Drift for HalfGammaDrift<'_> {
    fn max_abs(&self) -> f64 {
        0.5 * self.h.max_mass_rate()
    }
    fn fill(&self, t: f64, faces: &[f64], out: &mut [f64]) -> Result<()> {
        let panels = panel_integrals(self.h, t, faces);
        let last = faces.len() - 1;
        let mut right = vec![0.0; faces.len()];
        right[last] = upper_mass(self.h, t, faces[last])?;
        for j in (0..last).rev() {
            right[j] = right[j + 1] + panels[j];
        }
        let mut left = partial_mass(self.h, t, faces[0])?;
        out[0] = 0.5 * (left - right[0]);
        for j in 0..last {
            left += panels[j];
            out[j + 1] = 0.5 * (left - right[j + 1]);
        }
        Ok(())
    }
}

/// Largest stable step: `CFL_SAFETY / (2 s2 / du^2 + 2 max|v| / du)`.
pub fn stable_dt(sigma_sq: f64, max_drift: f64, du: f64) -> f64 {
    CFL_SAFETY / (2.0 * sigma_sq / (du * du) + 2.0 * max_drift / du)
}

fn check_cfl(sigma_sq: f64, max_drift: f64, du: f64, dt: f64) -> Result<()> {
    let diff = if sigma_sq > 0.0 {
        du * du / (2.0 * sigma_sq)
    } else {
        f64::INFINITY
    };
    let adv = if max_drift > 0.0 {
        du / max_drift
    } else {
        f64::INFINITY
    };
    let limit = CFL_SAFETY * diff.min(adv);
    if !(dt > 0.0) || dt > limit {
        return Err(Error::Cfl(format!("dt = {dt} exceeds {limit}")));
    }
    Ok(())
}

pub fn solve_convdiff(
    sigma_sq: f64,
    drift: &dyn Drift,
    source: Option<&dyn Fn(f64, f64) -> f64>,
    init: &dyn Fn(f64) -> f64,
    grid: &Grid,
) -> Result<GridFunction> {
    grid.validate()?;
    if !(sigma_sq >= 0.0 && sigma_sq.is_finite()) {
        return Err(Error::InvalidParams(
            "diffusivity must be nonnegative".into(),
        ));
    }
    let du = grid.du;
    let max_v = drift.max_abs();
    let dt_nominal = match grid.dt {
        Some(dt) => {
            check_cfl(sigma_sq, max_v, du, dt)?;
            dt
        }
        None => stable_dt(sigma_sq, max_v, du),
    };
    let p = grid.nodes();
    let nodes: Vec<f64> = (0..p).map(|i| grid.node(i)).collect();
    let faces: Vec<f64> = (0..=p)
        .map(|j| grid.u_min + (j as f64 - 0.5) * du)
        .collect();
    let mut z: Vec<f64> = nodes.iter().map(|&u| init(u)).collect();
    check_bounds(&z, 0.0)?;

    let outputs = grid.all_outputs();
    let mut times = vec![0.0];
    let mut values = vec![z.clone()];
    let mut v = vec![0.0; p + 1];
    let mut flux = vec![0.0; p + 1];
    let mut src = vec![0.0; p];
    let mut t = 0.0;
    let inv_du = 1.0 / du;
    let k_diff = sigma_sq * inv_du;
    for &target in outputs.iter().filter(|&&s| s > 0.0) {
        let span = target - t;
        let steps = (span / dt_nominal).ceil().max(1.0) as usize;
        let dt = span / steps as f64;
        for step in 0..steps {
            let now = t + step as f64 * dt;
            drift.fill(now, &faces, &mut v)?;
            for j in 0..=p {
                let left = z[j.saturating_sub(1)];
                let right = z[j.min(p - 1)];
                let adv = v[j].max(0.0) * left + v[j].min(0.0) * right;
                let dif = if j == 0 || j == p {
                    0.0
                } else {
                    -k_diff * (right - left)
                };
                flux[j] = adv + dif;
            }
            if let Some(s) = source {
                for (o, &u) in src.iter_mut().zip(&nodes) {
                    *o = s(now, u);
                }
            }
            for i in 0..p {
                z[i] += dt * (src[i] - (flux[i + 1] - flux[i]) * inv_du);
            }
            check_bounds(&z, now + dt)?;
        }
        t = target;
        times.push(t);
        values.push(z.clone());
    }
    Ok(GridFunction {
        u_min: grid.u_min,
        du,
        dt: dt_nominal,
        times,
        values,
    })
}

fn check_bounds(z: &[f64], t: f64) -> Result<()> {
    for (i, &x) in z.iter().enumerate() {
        if !(-BOUND_SLACK..=1.0 + BOUND_SLACK).contains(&x) {
            return Err(Error::BoundViolation(format!(
                "value {x} at node {i}, t = {t}"
            )));
        }
    }
    Ok(())
}

/// `d_t zeta = s2 zeta'' - (a zeta)'` with `a` built from `b = b_from_h(h)`.
pub fn solve_eprs_pde(
    sigma_sq: f64,
    h: &RateField,
    zeta0: &dyn Fn(f64) -> f64,
    grid: &Grid,
) -> Result<GridFunction> {
    let b = crate::kernels::b_from_h(h)?;
    solve_convdiff(sigma_sq, &ShiftDrift { b: &b }, None, zeta0, grid)
}

/// `d_t rho = s2 rho'' - (gamma rho / 2)' + h`.
pub fn solve_epcs_pde(
    sigma_sq: f64,
    h: &RateField,
    rho0: &dyn Fn(f64) -> f64,
    grid: &Grid,
) -> Result<GridFunction> {
    let source = |t: f64, u: f64| h.value(t, u);
    solve_convdiff(sigma_sq, &HalfGammaDrift { h }, Some(&source), rho0, grid)
}

/// `rho(t, u) = 1 - zeta(t, u + D(t))`, linearly interpolated, on the nodes
/// of `zeta` whose shifted argument stays on the grid at every stored time.
pub fn transform_solution(
    zeta: &GridFunction,
    d_of_t: impl Fn(f64) -> f64,
) -> Result<GridFunction> {
    let shifts: Vec<f64> = zeta.times.iter().map(|&t| d_of_t(t)).collect();
    let d_max = shifts.iter().cloned().fold(0.0, f64::max);
    let d_min = shifts.iter().cloned().fold(0.0, f64::min);
    let skip_left = (-d_min / zeta.du).ceil() as usize;
    let skip_right = (d_max / zeta.du).ceil() as usize;
    if skip_left + skip_right + 2 > zeta.nodes() {
        return Err(Error::InvalidParams(format!(
            "shift range [{d_min}, {d_max}] exceeds the grid"
        )));
    }
    let keep = zeta.nodes() - skip_left - skip_right;
    let values = shifts
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            (0..keep)
                .map(|i| {
                    let u = zeta.node(skip_left + i);
                    zeta.interpolate(k, u + d).map(|z| 1.0 - z).ok_or_else(|| {
                        Error::InvalidParams(format!("shifted point {} off grid", u + d))
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridFunction {
        u_min: zeta.node(skip_left),
        du: zeta.du,
        dt: zeta.dt,
        times: zeta.times.clone(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transform_arithmetic() {
        // zeta(1, .) linear so that zeta(1, 1.5) = 0.3
        let zeta = GridFunction {
            u_min: 0.0,
            du: 0.5,
            dt: 0.1,
            times: vec![0.0, 1.0],
            values: vec![vec![0.0; 7], (0..7).map(|i| 0.1 * i as f64).collect()],
        };
        let rho = transform_solution(&zeta, |t| t).unwrap();
        let k = rho.time_index(1.0).unwrap();
        assert!((rho.interpolate(k, 0.5).unwrap() - 0.7).abs() < 1e-12);
        let same = transform_solution(&zeta, |_| 0.0).unwrap();
        assert_eq!(same.values[1][3], 1.0 - zeta.values[1][3]);
        assert!(transform_solution(&zeta, |t| 10.0 * t).is_err());
    }

    #[test]
    fn cfl_violation_rejected() {
        let grid = Grid::new(-1.0, 1.0, 0.1, 0.1).with_dt(0.1);
        let r = solve_convdiff(0.5, &ZeroDrift, None, &|_| 0.0, &grid);
        assert!(matches!(r, Err(Error::Cfl(_))));
    }

    #[test]
    fn bound_violation_aborts() {
        let grid = Grid::new(-1.0, 1.0, 0.1, 0.5);
        let source = |_: f64, _: f64| 10.0;
        let r = solve_convdiff(0.5, &ZeroDrift, Some(&source), &|_| 0.5, &grid);
        assert!(matches!(r, Err(Error::BoundViolation(_))));
    }
}

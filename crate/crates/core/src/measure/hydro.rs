use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{EnsembleStats, TestFunction};
use crate::error::{Error, Result};
use crate::pde::GridFunction;

/// A test function with the id used in reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedTest {
    pub id: String,
    #[serde(flatten)]
    pub function: TestFunction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HydroRow {
    pub n: usize,
    pub t: f64,
    pub id: String,
    pub mean: f64,
    pub std_err: f64,
    pub std_dev: f64,
    pub replicas: u64,
    pub pde_value: f64,
    pub abs_error: f64,
}

impl HydroRow {
    /// `|mean - pde| + one sample standard deviation`.
    pub fn error(&self) -> f64 {
        self.abs_error + self.std_dev
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HydroSummary {
    pub n: usize,
    /// Max over rows of `|mean - pde| + sd`.
    pub max_error: f64,
    pub max_abs_error: f64,
    pub rows: Vec<HydroRow>,
}

/// Compares ensemble means of `<pi_t, G>` against `int G(t, u) zeta(t, u) du`.
pub fn hydro_error(
    n: usize,
    stats: &EnsembleStats,
    pde: &GridFunction,
    tests: &[NamedTest],
    times: &[f64],
) -> Result<HydroSummary> {
    let mut rows = Vec::new();
    for &t in times {
        for g in tests {
            let m = stats.get(t, &g.id).ok_or_else(|| {
                Error::InvalidParams(format!("ensemble has no entry for ({t}, {})", g.id))
            })?;
            let (lo, hi) = g.function.support(t);
            let row = pde.time_index(t).ok_or_else(|| {
                Error::InvalidParams(format!("PDE solution has no profile at t = {t}"))
            })?;
            if lo < pde.u_min - 1e-12 || hi > pde.u_max() + 1e-12 {
                return Err(Error::OutOfWindow(format!(
                    "support of {} exceeds the PDE grid",
                    g.id
                )));
            }
            let pde_value = pde.pair(pde.times[row], |u| g.function.value(t, u))?;
            rows.push(HydroRow {
                n,
                t,
                id: g.id.clone(),
                mean: m.mean,
                std_err: m.std_err(),
                std_dev: m.std_dev(),
                replicas: m.count,
                pde_value,
                abs_error: (m.mean - pde_value).abs(),
            });
        }
    }
    let max_error = rows.iter().map(HydroRow::error).fold(0.0, f64::max);
    let max_abs_error = rows.iter().map(|r| r.abs_error).fold(0.0, f64::max);
    Ok(HydroSummary {
        n,
        max_error,
        max_abs_error,
        rows,
    })
}

/// Quotes a CSV field when it contains a separator, quote or line break.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Rows as `N,t,G-id,mean,stderr,pde_value,abs_error`.
pub fn write_hydro_csv<W: Write>(rows: &[HydroRow], mut out: W) -> Result<()> {
    writeln!(out, "N,t,G-id,mean,stderr,pde_value,abs_error")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n,
            r.t,
            csv_field(&r.id),
            r.mean,
            r.std_err,
            r.pde_value,
            r.abs_error
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quoting() {
        assert_eq!(csv_field("g1"), "g1");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"x\""), "\"say \"\"x\"\"\"");
    }

    #[test]
    fn missing_entries_are_rejected() {
        let pde = GridFunction {
            u_min: -2.0,
            du: 0.5,
            dt: 0.1,
            times: vec![0.0],
            values: vec![vec![0.5; 9]],
        };
        let tests = [NamedTest {
            id: "g".into(),
            function: TestFunction::raised_cosine(0.0, 1.0),
        }];
        let mut stats = EnsembleStats::new();
        assert!(hydro_error(8, &stats, &pde, &tests, &[0.0]).is_err());
        stats.push(0.0, "g", 0.5);
        stats.push(0.0, "g", 0.5);
        assert!(hydro_error(8, &stats, &pde, &tests, &[0.1]).is_err());
        let s = hydro_error(8, &stats, &pde, &tests, &[0.0]).unwrap();
        assert!((s.rows[0].pde_value - 0.5).abs() < 1e-12);
        assert!(s.max_error < 1e-12);
    }
}

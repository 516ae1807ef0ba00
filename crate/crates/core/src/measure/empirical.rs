use super::TestFunction;
use crate::error::{Error, Result};
use crate::lattice::{ExclusionConfig, SpreadConfig};

/// Configurations that can be paired with a function via `(1/N) sum G(x/N) eta(x)`.
pub trait Empirical {
    /// Macroscopic positions of the first and last cell.
    fn span(&self, n: usize) -> (f64, f64);
    /// `sum_x g(x / N) eta(x)` over occupied cells with `x / N` in `[lo, hi]`.
    fn weighted_sum(&self, n: usize, lo: f64, hi: f64, g: &dyn Fn(f64) -> f64) -> f64;
}

impl Empirical for ExclusionConfig {
    fn span(&self, n: usize) -> (f64, f64) {
        let nf = n as f64;
        (
            self.window_left() as f64 / nf,
            (self.window_end() - 1) as f64 / nf,
        )
    }

    fn weighted_sum(&self, n: usize, lo: f64, hi: f64, g: &dyn Fn(f64) -> f64) -> f64 {
        let nf = n as f64;
        let first = ((lo * nf).ceil() as i64).max(self.window_left());
        let last = ((hi * nf).floor() as i64).min(self.window_end() - 1);
        let cells = self.cells();
        (first..=last)
            .filter(|&x| cells[(x - self.window_left()) as usize] == 1)
            .map(|x| g(x as f64 / nf))
            .sum()
    }
}

impl Empirical for SpreadConfig {
    fn span(&self, n: usize) -> (f64, f64) {
        let nf = n as f64;
        (self.position(0) / nf, self.position(self.len() - 1) / nf)
    }

    fn weighted_sum(&self, n: usize, lo: f64, hi: f64, g: &dyn Fn(f64) -> f64) -> f64 {
        let nf = n as f64;
        let first = ((lo * nf - self.position(0)).ceil().max(0.0)) as usize;
        let last = (hi * nf - self.position(0)).floor();
        if last < 0.0 {
            return 0.0;
        }
        let last = (last as usize).min(self.len() - 1);
        let cells = self.cells();
        (first..=last)
            .filter(|&k| cells[k] == 1)
            .map(|k| g(self.position(k) / nf))
            .sum()
    }
}

/// `(1/N) sum_x g(x/N) eta(x)` for `g` supported in `support`, which must
/// lie inside the window's macroscopic image.
pub fn empirical_pair_fn<C: Empirical>(
    config: &C,
    n: usize,
    support: (f64, f64),
    g: &dyn Fn(f64) -> f64,
) -> Result<f64> {
    let (lo, hi) = config.span(n);
    if support.0 < lo || support.1 > hi {
        return Err(Error::OutOfWindow(format!(
            "test function support [{}, {}] exceeds window [{lo}, {hi}]",
            support.0, support.1
        )));
    }
    Ok(config.weighted_sum(n, support.0, support.1, g) / n as f64)
}

/// `<pi^N, G(t, .)>`.
pub fn empirical_pair<C: Empirical>(config: &C, g: &TestFunction, t: f64, n: usize) -> Result<f64> {
    empirical_pair_fn(config, n, g.support(t), &|u| g.value(t, u))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_function_example() {
        let mut cells = vec![0u8; 8];
        for x in [0, 1, 3] {
            cells[x] = 1;
        }
        let c = ExclusionConfig::new(0, cells).unwrap();
        let v = empirical_pair_fn(&c, 4, (0.0, 1.0), &|u| u).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
        let empty = ExclusionConfig::empty(-4, 9);
        assert_eq!(
            empirical_pair_fn(&empty, 4, (-1.0, 1.0), &|u| u).unwrap(),
            0.0
        );
        assert!(empirical_pair_fn(&c, 4, (-1.0, 1.0), &|u| u).is_err());
    }

    #[test]
    fn full_window_riemann_sum() {
        let g = TestFunction::raised_cosine(0.0, 1.0);
        let mut prev = f64::INFINITY;
        for n in [8usize, 16, 32, 64] {
            let c = ExclusionConfig::full(-2 * n as i64, 4 * n + 1);
            let err = (empirical_pair(&c, &g, 0.0, n).unwrap() - 1.0).abs();
            assert!(err <= 1.0 / n as f64);
            assert!(err <= prev);
            prev = err;
        }
    }

    #[test]
    fn half_integer_positions_are_used() {
        let c = SpreadConfig::new(vec![1, 0, 1], -3, 2).unwrap();
        // particles at -1.5 and 0.5
        let v = empirical_pair_fn(&c, 1, (-1.5, 0.5), &|u| u).unwrap();
        assert!((v - (-1.0)).abs() < 1e-15);
    }
}

//! Exact sampling of growth candidates at the infinitely many sites outside
//! the window, using the exponential envelope as a geometric bar sequence.

use rand::Rng;
use rand_distr::{Distribution, Geometric};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Side {
    Left,
    Right,
}

/// Bars `C exp(-beta |x_j| / N)` at positions `x_j = first -/+ j`.
#[derive(Clone, Debug)]
pub(crate) struct GeometricTail {
    first: f64,
    side: Side,
    bar_first: f64,
    q: f64,
    total: f64,
}

impl GeometricTail {
    /// `first` is the position of the site nearest the window; it must lie
    /// on the far side of the origin so the bars decrease outward.
    pub fn new(first: f64, side: Side, c: f64, beta: f64, n: usize) -> Result<Self> {
        let ok = match side {
            Side::Left => first <= 0.0,
            Side::Right => first >= 0.0,
        };
        if !ok {
            return Err(Error::InvalidParams(format!(
                "window must contain the origin (outside site at {first})"
            )));
        }
        let q = (-beta / n as f64).exp();
        let bar_first = c * (-beta * first.abs() / n as f64).exp();
        let total = if c == 0.0 { 0.0 } else { bar_first / (1.0 - q) };
        Ok(GeometricTail {
            first,
            side,
            bar_first,
            q,
            total,
        })
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// Distance `j` from the first outside site, its position and its bar.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (u64, f64, f64) {
        let j = Geometric::new(1.0 - self.q)
            .expect("valid ratio")
            .sample(rng);
        let pos = match self.side {
            Side::Left => self.first - j as f64,
            Side::Right => self.first + j as f64,
        };
        (j, pos, self.bar_first * self.q.powf(j as f64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::rng::{stream_rng, Stream};

    #[test]
    fn total_is_geometric_sum() {
        let t = GeometricTail::new(-3.0, Side::Left, 2.0, 1.0, 4).unwrap();
        let direct: f64 = (0..10_000)
            .map(|j| 2.0 * (-(3.0 + j as f64) / 4.0).exp())
            .sum();
        assert!((t.total() - direct).abs() < 1e-9);
        assert!(GeometricTail::new(1.0, Side::Left, 1.0, 1.0, 4).is_err());
    }

    #[test]
    fn samples_have_matching_bars() {
        let t = GeometricTail::new(5.0, Side::Right, 1.0, 2.0, 8).unwrap();
        let mut rng = stream_rng(9, 0, Stream::Dynamics);
        for _ in 0..100 {
            let (j, pos, bar) = t.sample(&mut rng);
            assert_eq!(pos, 5.0 + j as f64);
            assert!((bar - (-2.0 * pos / 8.0).exp()).abs() < 1e-12);
        }
    }
}

//! Batched SSEP exchanges. The exchange candidates form a homogeneous
//! Poisson process whose rate does not depend on the configuration, so
//! between two other events only their number matters for the state.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::clock::CumulativeTable;
use crate::kernels::JumpKernel;

/// Every unordered pair `{i, i + d}` of cells exchanges at rate `N^2 p(d)`.
#[derive(Clone, Debug)]
pub(crate) struct ExchangeSampler {
    len: usize,
    /// Candidate distance table, weights `p(d) (len - d)`; `None` for nearest neighbour.
    distances: Option<CumulativeTable>,
    total_rate: f64,
}

impl ExchangeSampler {
    pub fn new(kernel: &JumpKernel, n: usize, len: usize) -> Self {
        let n2 = (n as f64) * (n as f64);
        let weights: Vec<f64> = kernel
            .one_sided()
            .iter()
            .enumerate()
            .map(|(k, &p)| {
                let d = k + 1;
                if d < len {
                    p * (len - d) as f64
                } else {
                    0.0
                }
            })
            .collect();
        let total_rate = n2 * weights.iter().sum::<f64>();
        let distances = (kernel.range() > 1).then(|| CumulativeTable::new(weights));
        ExchangeSampler {
            len,
            distances,
            total_rate,
        }
    }

    #[cfg(test)]
    pub fn total_rate(&self) -> f64 {
        self.total_rate
    }

    /// Number of candidates in an interval of length `dt`.
    pub fn draw_count<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> u64 {
        let mean = self.total_rate * dt;
        if mean <= 0.0 {
            return 0;
        }
        Poisson::new(mean).expect("finite mean").sample(rng) as u64
    }

    /// A uniformly chosen candidate pair `(i, i + d)`.
    #[inline]
    pub fn candidate<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let d = match &self.distances {
            None => 1,
            Some(t) => t.sample(rng) + 1,
        };
        let i = rng.random_range(0..self.len - d);
        (i, i + d)
    }

    /// Applies `count` candidates; `on_swap(k, i, j)` is called for the
    /// `k`-th candidate whenever it changes the configuration.
    pub fn run<R: Rng + ?Sized>(
        &self,
        cells: &mut [u8],
        count: u64,
        rng: &mut R,
        mut on_swap: impl FnMut(u64, usize, usize),
    ) -> u64 {
        let mut swaps = 0;
        for k in 0..count {
            let (i, j) = self.candidate(rng);
            if cells[i] != cells[j] {
                cells.swap(i, j);
                swaps += 1;
                on_swap(k, i, j);
            }
        }
        swaps
    }
}

/// Sorted uniform times on `(a, b]`, generated one at a time.
pub(crate) struct SortedUniforms {
    prev: f64,
    end: f64,
    remaining: u64,
}

impl SortedUniforms {
    pub fn new(a: f64, b: f64, count: u64) -> Self {
        SortedUniforms {
            prev: a,
            end: b,
            remaining: count,
        }
    }

    /// Next order statistic: the minimum of the remaining uniforms on `(prev, end)`.
    pub fn next<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        debug_assert!(self.remaining > 0);
        let u: f64 = rng.random();
        let m = self.remaining as f64;
        self.prev += (self.end - self.prev) * (1.0 - u.powf(1.0 / m));
        self.remaining -= 1;
        self.prev
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::rng::{stream_rng, Stream};

    #[test]
    fn total_rate_counts_pairs() {
        let k = JumpKernel::symmetric(vec![0.25, 0.25]).unwrap();
        let s = ExchangeSampler::new(&k, 2, 10);
        // 4 * (0.25 * 9 + 0.25 * 8)
        assert!((s.total_rate() - 17.0).abs() < 1e-12);
    }

    #[test]
    fn distances_follow_pair_weights() {
        let k = JumpKernel::symmetric(vec![0.25, 0.25]).unwrap();
        let s = ExchangeSampler::new(&k, 1, 10);
        let mut rng = stream_rng(5, 0, Stream::Dynamics);
        let trials = 40_000;
        let ones = (0..trials)
            .filter(|_| {
                let (i, j) = s.candidate(&mut rng);
                assert!(j < 10);
                j - i == 1
            })
            .count();
        let expect = 9.0 / 17.0;
        let se = (expect * (1.0 - expect) / trials as f64).sqrt();
        assert!((ones as f64 / trials as f64 - expect).abs() < 4.0 * se);
    }

    #[test]
    fn sorted_uniforms_are_increasing_and_bounded() {
        let mut rng = stream_rng(6, 0, Stream::EventTimes);
        let mut g = SortedUniforms::new(1.0, 2.0, 500);
        let mut last = 1.0;
        let mut sum = 0.0;
        for _ in 0..500 {
            let t = g.next(&mut rng);
            assert!(t >= last && t <= 2.0);
            last = t;
            sum += t;
        }
        assert!((sum / 500.0 - 1.5).abs() < 0.05);
    }

    #[test]
    fn full_window_is_frozen() {
        let s = ExchangeSampler::new(&JumpKernel::nearest_neighbor(), 4, 20);
        let mut cells = vec![1u8; 20];
        let mut rng = stream_rng(7, 0, Stream::Dynamics);
        assert_eq!(s.run(&mut cells, 1000, &mut rng, |_, _, _| {}), 0);
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Occupancies of the sites `[window_left, window_left + len)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionConfig {
    window_left: i64,
    cells: Vec<u8>,
    /// Cells pushed past the right edge by shifts.
    out_right: u64,
    /// How many of those discarded cells were occupied.
    out_right_particles: u64,
}

impl ExclusionConfig {
    pub fn new(window_left: i64, cells: Vec<u8>) -> Result<Self> {
        if let Some(bad) = cells.iter().find(|&&c| c > 1) {
            return Err(Error::InvalidParams(format!(
                "cell value {bad} is not 0 or 1"
            )));
        }
        Ok(ExclusionConfig {
            window_left,
            cells,
            out_right: 0,
            out_right_particles: 0,
        })
    }

    pub fn empty(window_left: i64, len: usize) -> Self {
        ExclusionConfig::new(window_left, vec![0; len]).unwrap()
    }

    pub fn full(window_left: i64, len: usize) -> Self {
        ExclusionConfig::new(window_left, vec![1; len]).unwrap()
    }

    pub(crate) fn with_audit(mut self, out_right: u64, out_right_particles: u64) -> Self {
        self.out_right = out_right;
        self.out_right_particles = out_right_particles;
        self
    }

    pub fn window_left(&self) -> i64 {
        self.window_left
    }

    /// One past the rightmost site.
    pub fn window_end(&self) -> i64 {
        self.window_left + self.cells.len() as i64
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub(crate) fn cells_mut(&mut self) -> &mut [u8] {
        &mut self.cells
    }

    pub fn out_right(&self) -> u64 {
        self.out_right
    }

    pub fn out_right_particles(&self) -> u64 {
        self.out_right_particles
    }

    pub fn contains(&self, x: i64) -> bool {
        x >= self.window_left && x < self.window_end()
    }

    fn index(&self, x: i64) -> Result<usize> {
        if self.contains(x) {
            Ok((x - self.window_left) as usize)
        } else {
            Err(Error::OutOfWindow(format!(
                "site {x} not in [{}, {})",
                self.window_left,
                self.window_end()
            )))
        }
    }

    pub fn get(&self, x: i64) -> Result<u8> {
        Ok(self.cells[self.index(x)?])
    }

    pub fn particle_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c == 1).count()
    }

    pub fn hole_count(&self) -> usize {
        self.len() - self.particle_count()
    }

    /// Swaps the occupancies of sites `x` and `y`.
    pub fn exchange(&mut self, x: i64, y: i64) -> Result<()> {
        let i = self.index(x)?;
        let j = self.index(y)?;
        self.cells.swap(i, j);
        Ok(())
    }

    /// `tau_z`: every cell right of `z` takes the old value of its left
    /// neighbour, `z` becomes empty, and the rightmost cell is discarded.
    /// Returns the discarded occupancy.
    pub fn tau_shift(&mut self, z: i64) -> Result<u8> {
        let i = self.index(z)?;
        Ok(self.shift_from_index(i))
    }

    pub(crate) fn shift_from_index(&mut self, i: usize) -> u8 {
        let dropped = self.cells.pop().expect("window is not empty");
        self.cells.insert(i, 0);
        self.record_drop(dropped);
        dropped
    }

    /// Shift at a site left of the window: the whole window moves one site to
    /// the right and the leftmost cell is duplicated as fill.
    pub fn shift_from_left(&mut self) -> u8 {
        let fill = self.cells[0];
        let dropped = self.cells.pop().expect("window is not empty");
        self.cells.insert(0, fill);
        self.record_drop(dropped);
        dropped
    }

    fn record_drop(&mut self, dropped: u8) {
        self.out_right += 1;
        self.out_right_particles += dropped as u64;
    }

    /// Occupied sites in increasing order.
    pub fn occupied_sites(&self) -> impl Iterator<Item = i64> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 1)
            .map(move |(i, _)| self.window_left + i as i64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exchange_examples() {
        let mut c = ExclusionConfig::new(0, vec![1, 0]).unwrap();
        c.exchange(0, 1).unwrap();
        assert_eq!(c.cells(), &[0, 1]);
        let mut full = ExclusionConfig::new(0, vec![1, 1]).unwrap();
        full.exchange(0, 1).unwrap();
        assert_eq!(full.cells(), &[1, 1]);
        assert!(c.exchange(0, 2).is_err());
    }

    #[test]
    fn tau_shift_example() {
        let mut c = ExclusionConfig::new(-2, vec![1, 1, 0, 1, 1]).unwrap();
        let dropped = c.tau_shift(0).unwrap();
        assert_eq!(c.cells(), &[1, 1, 0, 0, 1]);
        assert_eq!(dropped, 1);
        assert_eq!(c.out_right(), 1);
        assert_eq!(c.out_right_particles(), 1);
        assert!(c.tau_shift(3).is_err());
        assert!(c.tau_shift(-3).is_err());
    }

    #[test]
    fn tau_shift_at_left_edge_and_fixed_point() {
        let mut c = ExclusionConfig::new(-2, vec![0, 1, 0, 1]).unwrap();
        c.tau_shift(-2).unwrap();
        assert_eq!(c.cells(), &[0, 0, 1, 0]);
        let mut z = ExclusionConfig::empty(-3, 7);
        for x in -3..4 {
            z.tau_shift(x).unwrap();
            assert_eq!(z.particle_count(), 0);
        }
    }

    #[test]
    fn shift_from_left_duplicates_leftmost() {
        let mut c = ExclusionConfig::new(-1, vec![1, 0, 1, 0]).unwrap();
        c.shift_from_left();
        assert_eq!(c.cells(), &[1, 1, 0, 1]);
    }

    #[test]
    fn counts() {
        let c = ExclusionConfig::new(0, vec![1, 0, 1, 1]).unwrap();
        assert_eq!(c.particle_count(), 3);
        assert_eq!(ExclusionConfig::empty(0, 0).particle_count(), 0);
        assert!(ExclusionConfig::new(0, vec![0, 2]).is_err());
    }

    fn config_strategy() -> impl Strategy<Value = ExclusionConfig> {
        (-20i64..20, prop::collection::vec(0u8..2, 1..40))
            .prop_map(|(l, cells)| ExclusionConfig::new(l, cells).unwrap())
    }

    proptest! {
        #[test]
        fn exchange_conserves_and_is_involution(c in config_strategy(), a in 0usize..40, b in 0usize..40) {
            let x = c.window_left() + (a % c.len()) as i64;
            let y = c.window_left() + (b % c.len()) as i64;
            let mut d = c.clone();
            d.exchange(x, y).unwrap();
            prop_assert_eq!(d.particle_count(), c.particle_count());
            d.exchange(x, y).unwrap();
            prop_assert_eq!(d, c);
        }

        #[test]
        fn tau_shift_matches_pointwise_definition(c in config_strategy(), a in 0usize..40) {
            let z = c.window_left() + (a % c.len()) as i64;
            let mut d = c.clone();
            let dropped = d.tau_shift(z).unwrap();
            for x in c.window_left()..c.window_end() {
                let expect = if x > z { c.get(x - 1).unwrap() } else if x == z { 0 } else { c.get(x).unwrap() };
                prop_assert_eq!(d.get(x).unwrap(), expect);
            }
            prop_assert_eq!(d.particle_count() + dropped as usize, c.particle_count());
            prop_assert_eq!(d.particle_count() + d.hole_count(), d.len());
        }

        #[test]
        fn distant_shifts_commute(c in config_strategy(), a in 0usize..40, gap in 1usize..10) {
            let i1 = a % c.len();
            prop_assume!(i1 + gap < c.len());
            let mut cells = c.cells().to_vec();
            for v in &mut cells[i1..i1 + gap] {
                *v = 0;
            }
            let c = ExclusionConfig::new(c.window_left(), cells).unwrap();
            let z1 = c.window_left() + i1 as i64;
            let z2 = z1 + gap as i64;
            let mut p = c.clone();
            p.tau_shift(z1).unwrap();
            p.tau_shift(z2).unwrap();
            let mut q = c.clone();
            q.tau_shift(z2).unwrap();
            q.tau_shift(z1).unwrap();
            prop_assert_eq!(p.cells(), q.cells());
        }
    }
}

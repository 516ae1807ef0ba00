use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ExclusionConfig;
use crate::error::{Error, Result};

/// Which sublattice carries the particles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    /// Integer sites; mass counter odd.
    Gamma1,
    /// Half-integer sites; mass counter even.
    Gamma2,
}

impl Parity {
    pub fn of_mass(mass_n: u64) -> Parity {
        if mass_n % 2 == 1 {
            Parity::Gamma1
        } else {
            Parity::Gamma2
        }
    }
}

/// State of the centered-spreading process: a run of consecutive cells on
/// the active sublattice, located by the position of `cells[0]` in half-steps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpreadConfig {
    cells: Vec<u8>,
    /// Position of `cells[0]` in units of 1/2.
    anchor: i64,
    mass_n: u64,
    /// Cells pushed past the right edge by spreads inside the window.
    out_right: u64,
    out_right_particles: u64,
    /// Spreads that happened left/right of the window (their new particle is not tracked).
    births_left: u64,
    births_right: u64,
}

impl SpreadConfig {
    pub fn new(cells: Vec<u8>, anchor: i64, mass_n: u64) -> Result<Self> {
        if mass_n == 0 {
            return Err(Error::InvalidParams("mass counter must be positive".into()));
        }
        if let Some(bad) = cells.iter().find(|&&c| c > 1) {
            return Err(Error::InvalidParams(format!(
                "cell value {bad} is not 0 or 1"
            )));
        }
        let config = SpreadConfig {
            cells,
            anchor,
            mass_n,
            out_right: 0,
            out_right_particles: 0,
            births_left: 0,
            births_right: 0,
        };
        if !config.anchor_matches_parity() {
            return Err(Error::InvalidParams(format!(
                "anchor {anchor} (half-steps) is off the sublattice of mass {mass_n}"
            )));
        }
        Ok(config)
    }

    /// The starting state `(1, eta)` with `eta` on the integers.
    pub fn from_exclusion(config: &ExclusionConfig) -> Self {
        SpreadConfig::new(config.cells().to_vec(), 2 * config.window_left(), 1).unwrap()
    }

    pub(crate) fn with_audit(
        mut self,
        out_right: u64,
        particles: u64,
        left: u64,
        right: u64,
    ) -> Self {
        self.out_right = out_right;
        self.out_right_particles = particles;
        self.births_left = left;
        self.births_right = right;
        self
    }

    fn anchor_matches_parity(&self) -> bool {
        let even = self.anchor.rem_euclid(2) == 0;
        even == (self.parity() == Parity::Gamma1)
    }

    pub fn parity(&self) -> Parity {
        Parity::of_mass(self.mass_n)
    }

    pub fn mass_n(&self) -> u64 {
        self.mass_n
    }

    pub fn anchor(&self) -> i64 {
        self.anchor
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub(crate) fn cells_mut(&mut self) -> &mut [u8] {
        &mut self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn out_right(&self) -> u64 {
        self.out_right
    }

    pub fn out_right_particles(&self) -> u64 {
        self.out_right_particles
    }

    pub fn births_left(&self) -> u64 {
        self.births_left
    }

    pub fn births_right(&self) -> u64 {
        self.births_right
    }

    /// Position of cell `k` in half-steps.
    pub fn half_position(&self, k: usize) -> i64 {
        self.anchor + 2 * k as i64
    }

    /// Position of cell `k`.
    pub fn position(&self, k: usize) -> f64 {
        0.5 * self.half_position(k) as f64
    }

    /// Cell index of a position given in half-steps, if it is an active site in the window.
    pub fn index_of(&self, half_pos: i64) -> Option<usize> {
        let off = half_pos - self.anchor;
        if off < 0 || off % 2 != 0 {
            return None;
        }
        let k = (off / 2) as usize;
        (k < self.cells.len()).then_some(k)
    }

    /// Occupancy at a position given in half-steps; inactive-sublattice sites read 0.
    pub fn get_half(&self, half_pos: i64) -> Result<u8> {
        if half_pos < self.anchor - 1 || half_pos > self.half_position(self.len()) {
            return Err(Error::OutOfWindow(format!("half-position {half_pos}")));
        }
        Ok(self.index_of(half_pos).map_or(0, |k| self.cells[k]))
    }

    pub fn particle_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c == 1).count()
    }

    /// Swaps cells `i` and `j` (sequence indices).
    pub fn exchange_cells(&mut self, i: usize, j: usize) -> Result<()> {
        if i >= self.len() || j >= self.len() {
            return Err(Error::OutOfWindow(format!("cell {i} or {j}")));
        }
        self.cells.swap(i, j);
        Ok(())
    }

    /// `tilde-tau_x` at the active site `x` (half-steps): the content left of
    /// `x` moves half a step left, the content from `x` on moves half a step
    /// right, and a particle appears at `x - 1/2`.
    pub fn tau_tilde_spread(&mut self, half_pos: i64) -> Result<()> {
        match self.index_of(half_pos) {
            Some(k) => {
                self.spread_at_index(k);
                Ok(())
            }
            None => Err(Error::InvalidMove(format!(
                "half-position {half_pos} is not an active site of the window"
            ))),
        }
    }

    /// Spread at cell `k`; returns the occupancy discarded at the right edge.
    pub(crate) fn spread_at_index(&mut self, k: usize) -> u8 {
        self.cells.insert(k, 1);
        let dropped = self.cells.pop().unwrap();
        self.out_right += 1;
        self.out_right_particles += dropped as u64;
        self.anchor -= 1;
        self.mass_n += 1;
        dropped
    }

    /// Spread at an active site left of the window: the window content moves right by 1/2.
    pub(crate) fn spread_left_of_window(&mut self) {
        self.anchor += 1;
        self.mass_n += 1;
        self.births_left += 1;
    }

    /// Spread at an active site right of the window: the window content moves left by 1/2.
    pub(crate) fn spread_right_of_window(&mut self) {
        self.anchor -= 1;
        self.mass_n += 1;
        self.births_right += 1;
    }

    /// Occupancy of every window site (both sublattices), keyed by half-steps.
    pub fn to_map(&self) -> BTreeMap<i64, u8> {
        let mut map = BTreeMap::new();
        for (k, &c) in self.cells.iter().enumerate() {
            let p = self.half_position(k);
            map.insert(p, c);
            if k + 1 < self.cells.len() {
                map.insert(p + 1, 0);
            }
        }
        map
    }

    /// Inverse of [`SpreadConfig::to_map`].
    pub fn from_map(map: &BTreeMap<i64, u8>, mass_n: u64) -> Result<Self> {
        let (&first, _) = map
            .iter()
            .next()
            .ok_or_else(|| Error::InvalidParams("empty occupancy map".into()))?;
        let mut cells = Vec::new();
        for (i, (&p, &c)) in map.iter().enumerate() {
            if p != first + i as i64 {
                return Err(Error::InvalidParams(format!("gap in occupancy map at {p}")));
            }
            if (p - first) % 2 == 0 {
                cells.push(c);
            } else if c != 0 {
                return Err(Error::InvalidParams(format!(
                    "inactive site {p} (half-steps) is occupied"
                )));
            }
        }
        SpreadConfig::new(cells, first, mass_n)
    }
}

use super::fenwick::Fenwick;
use crate::error::{Error, Result};
use crate::lattice::SpreadConfig;

pub const EMPTY: u8 = 0;
pub const FIRST: u8 = 1;
pub const SECOND: u8 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JumpOutcome {
    Moved(usize),
    /// A first-class particle traded places with a second-class one.
    Swapped(usize),
    Suppressed,
}

/// One coordinate of the coupled system: a window of cells holding
/// nothing, a first-class or a second-class particle.
///
/// First-class particles carry the label `label_base + rank`, where the rank
/// counts first-class particles to their left inside the window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Marginal {
    cells: Vec<u8>,
    anchor: i64,
    mass: u64,
    label_base: i64,
    firsts: Fenwick,
}

impl Marginal {
    /// All particles of `config` become first class.
    pub fn from_config(config: &SpreadConfig) -> Self {
        let cells: Vec<u8> = config
            .cells()
            .iter()
            .map(|&c| if c == 1 { FIRST } else { EMPTY })
            .collect();
        let firsts = Fenwick::from_flags(cells.iter().map(|&c| c == FIRST));
        Marginal {
            cells,
            anchor: config.anchor(),
            mass: config.mass_n(),
            label_base: 0,
            firsts,
        }
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn anchor(&self) -> i64 {
        self.anchor
    }

    /// Mass counter; births so far are `mass - 1`.
    pub fn mass(&self) -> u64 {
        self.mass
    }

    pub fn births(&self) -> u64 {
        self.mass - 1
    }

    pub fn half_position(&self, k: usize) -> i64 {
        self.anchor + 2 * k as i64
    }

    pub fn index_of(&self, half_pos: i64) -> Option<usize> {
        let off = half_pos - self.anchor;
        if off < 0 || off % 2 != 0 {
            return None;
        }
        let k = (off / 2) as usize;
        (k < self.cells.len()).then_some(k)
    }

    pub fn on_lattice(&self, half_pos: i64) -> bool {
        (half_pos - self.anchor).rem_euclid(2) == 0
    }

    pub fn first_count(&self) -> usize {
        self.firsts.total() as usize
    }

    pub fn second_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c == SECOND).count()
    }

    pub fn label_of(&self, k: usize) -> Option<i64> {
        (self.cells.get(k) == Some(&FIRST)).then(|| self.label_base + self.firsts.prefix(k) as i64)
    }

    pub fn index_of_label(&self, label: i64) -> Option<usize> {
        let r = label - self.label_base;
        (r >= 0 && (r as usize) < self.first_count()).then(|| self.firsts.select(r as u32))
    }

    /// Half-positions of the first-class particles, left to right.
    pub fn first_positions(&self) -> Vec<i64> {
        (0..self.len())
            .filter(|&k| self.cells[k] == FIRST)
            .map(|k| self.half_position(k))
            .collect()
    }

    /// Occupation numbers regardless of class.
    pub fn occupation(&self) -> SpreadConfig {
        let cells = self.cells.iter().map(|&c| (c != EMPTY) as u8).collect();
        SpreadConfig::new(cells, self.anchor, self.mass).expect("anchor tracks the mass parity")
    }

    /// Jump attempt of the particle in cell `k`: into an empty cell it moves,
    /// a first-class particle swaps with a second-class one, anything else is
    /// suppressed. The window edges reflect.
    pub fn jump(&mut self, k: usize, dir: Direction) -> Result<JumpOutcome> {
        let c = *self
            .cells
            .get(k)
            .ok_or_else(|| Error::OutOfWindow(format!("cell {k}")))?;
        if c == EMPTY {
            return Err(Error::MalformedEvent(format!("cell {k} is empty")));
        }
        let target = match dir {
            Direction::Left if k > 0 => k - 1,
            Direction::Right if k + 1 < self.len() => k + 1,
            _ => return Ok(JumpOutcome::Suppressed),
        };
        let t = self.cells[target];
        let outcome = match (c, t) {
            (_, EMPTY) => JumpOutcome::Moved(target),
            (FIRST, SECOND) => JumpOutcome::Swapped(target),
            _ => return Ok(JumpOutcome::Suppressed),
        };
        self.cells.swap(k, target);
        if c == FIRST || t == FIRST {
            // one of the two cells held a first-class particle before and the other holds it now
            let (from, to) = if c == FIRST { (k, target) } else { (target, k) };
            self.firsts.add(from, -1);
            self.firsts.add(to, 1);
        }
        Ok(outcome)
    }

    /// Birth at cell `k`: a particle of class `value` appears half a step
    /// left of it; the rightmost cell is discarded. Returns the discarded content.
    pub fn spread_inside(&mut self, k: usize, value: u8) -> u8 {
        self.cells.insert(k, value);
        let dropped = self.cells.pop().expect("window is not empty");
        self.anchor -= 1;
        self.mass += 1;
        self.firsts = Fenwick::from_flags(self.cells.iter().map(|&c| c == FIRST));
        dropped
    }

    /// Birth left of the window: the content moves half a step right and a
    /// first-class newcomer takes a label below every label in the window.
    pub fn spread_left(&mut self, value: u8) {
        self.anchor += 1;
        self.mass += 1;
        if value == FIRST {
            self.label_base += 1;
        }
    }

    pub fn spread_right(&mut self) {
        self.anchor -= 1;
        self.mass += 1;
    }

    /// Applies a birth at `half_pos` wherever it lies.
    pub fn spread_at(&mut self, half_pos: i64, value: u8) -> Result<()> {
        if !self.on_lattice(half_pos) {
            return Err(Error::MalformedEvent(format!(
                "half-position {half_pos} is not an active site"
            )));
        }
        match self.index_of(half_pos) {
            Some(k) => {
                self.spread_inside(k, value);
            }
            None if half_pos < self.anchor => self.spread_left(value),
            None => self.spread_right(),
        }
        Ok(())
    }
}

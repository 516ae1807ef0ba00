//! Configurations and the elementary moves acting on them.

mod exclusion;
pub mod rle;
mod spread;

pub use exclusion::ExclusionConfig;
pub use spread::{Parity, SpreadConfig};

/// Number of occupied cells.
pub trait ParticleCount {
    fn particle_count(&self) -> usize;
}

impl ParticleCount for ExclusionConfig {
    fn particle_count(&self) -> usize {
        ExclusionConfig::particle_count(self)
    }
}

impl ParticleCount for SpreadConfig {
    fn particle_count(&self) -> usize {
        SpreadConfig::particle_count(self)
    }
}

pub fn particle_count<C: ParticleCount>(config: &C) -> usize {
    config.particle_count()
}

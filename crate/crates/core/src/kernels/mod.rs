//! Jump kernels, rate fields and the macroscopic coefficients derived from them.

mod jump;
pub mod quadrature;
mod rate;

pub use jump::{sigma_sq, JumpKernel, KernelSpec};
pub use rate::{
    a_field, b_from_h, gamma_field, partial_mass, total_mass, upper_mass, DriftSchedule,
    MacroCoefficients, RateField, RateFieldSpec, SpatialProfile, TimeModulation,
    DRIFT_TABLE_INTERVALS,
};

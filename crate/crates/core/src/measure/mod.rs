//! Empirical measures, ensemble statistics and the convergence diagnostics.

mod empirical;
mod hydro;
mod initial;
mod martingale;
mod stats;
mod test_function;
mod wlln;

pub use empirical::{empirical_pair, empirical_pair_fn, Empirical};
pub use hydro::{csv_field, hydro_error, write_hydro_csv, HydroRow, HydroSummary, NamedTest};
pub use initial::{sample_bernoulli_profile, InitialProfile};
pub use martingale::{
    martingale_path, martingale_report, quadratic_variation_path, Integration, MartingaleReport,
    MartingaleSetup, QvMode,
};
pub use stats::{
    kolmogorov_survival, ks_one_sample, ks_two_sample, welch_t, EnsembleStats, Moments, ObsKey,
    TestOutcome,
};
pub use test_function::{BumpFamily, TestFunction};
pub use wlln::{wlln_statistic, wlln_target};

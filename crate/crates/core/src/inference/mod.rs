//! Resampling intervals and simulated null distributions.

pub mod brownian;
pub mod critical;
pub mod jackknife;

pub use brownian::{
    simulate_functional_draws, simulate_functionals, simulate_prop1_ratio, simulate_prop2_null, BrownianFunctionals, BrownianSimConfig,
};
pub use critical::{critical_values, simulate_critical_values, CriticalValueTable, CvRow, CvSource};
pub use jackknife::{jackknife_ci, jackknife_replicates, JackknifeConfig, JackknifeInterval};

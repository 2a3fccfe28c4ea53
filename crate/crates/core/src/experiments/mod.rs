//! Quantitative predictions of the collapse model and the reference
//! quantum-mechanical computations they are compared against.

pub mod chsh;
pub mod constants;
pub mod interference;
pub mod malus;
pub mod tau;

pub use chsh::{chsh_lhv_max, chsh_value, singlet_correlation, ChshSetting, ChshValue, LhvResult};
pub use interference::{
    fringe_period, interference_pattern, interference_pattern_exact, InterferenceSpec, Source,
};
pub use malus::{
    malus_deviation_curve, malus_expectation, malus_monte_carlo, MalusRow, MalusSpec,
    MonteCarloEstimate,
};
pub use tau::{estimate_tau, TauEstimate};

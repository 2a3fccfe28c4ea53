//! Physical constants (CODATA 2018, exact SI where defined) and quoted
//! reference values carried as metadata.

/// Planck constant, J s.
pub const PLANCK_H: f64 = 6.626_070_150_00e-34;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817_65e-34;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Order-of-magnitude reduction time quoted for a 400 nm photon, s.
pub const QUOTED_TAU_400NM: f64 = 1e-14;
/// Published upper limit on the reduction time, s.
pub const TAU_UPPER_BOUND: f64 = 1e-14;

/// Measured CHSH value with its one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshMeasurement {
    pub label: &'static str,
    pub value: f64,
    pub uncertainty: f64,
}

pub const CHSH_EXPERIMENTS: [ChshMeasurement; 3] = [
    ChshMeasurement { label: "early photon cascade", value: 2.697, uncertainty: 0.015 },
    ChshMeasurement { label: "trapped ions", value: 2.25, uncertainty: 0.03 },
    ChshMeasurement { label: "relativistic separation", value: 2.92, uncertainty: 0.18 },
];

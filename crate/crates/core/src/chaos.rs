//! Fully chaotic logistic map `u <- 4 u (1 - u)` used as the hidden phase drive.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Fixed points and the absorbing `0.5 -> 1 -> 0` chain of the map.
const EXCLUDED_SEEDS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticGenerator {
    u: f64,
    amplitude: f64,
}

impl LogisticGenerator {
    pub fn new(seed: f64, amplitude: f64) -> Result<Self> {
        if !(seed > 0.0 && seed < 1.0) || EXCLUDED_SEEDS.contains(&seed) {
            return Err(Error::DegenerateSeed(seed));
        }
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::Precondition(format!(
                "chaos amplitude {amplitude} must be finite and >= 0"
            )));
        }
        Ok(LogisticGenerator { u: seed, amplitude })
    }

    pub fn state(&self) -> f64 {
        self.u
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Advances the map once and returns the emitted phase `amplitude * 2 pi * u`.
    pub fn chaotic_phase_next(self) -> (f64, Self) {
        let mut u = 4.0 * self.u * (1.0 - self.u);
        // Rounding can land the orbit on 0.5, 0.75 or the boundary, after
        // which it freezes; re-inject at an irrational offset.
        if !(u > 0.0 && u < 1.0) || EXCLUDED_SEEDS.contains(&u) {
            u = (self.u + 0.618_033_988_749_894_9).fract();
            if !(u > 0.0 && u < 1.0) || EXCLUDED_SEEDS.contains(&u) {
                u = 0.123_456_789;
            }
        }
        let next = LogisticGenerator { u, ..self };
        (self.amplitude * TAU * u, next)
    }
}

impl Iterator for LogisticGenerator {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let (phase, next) = self.chaotic_phase_next();
        *self = next;
        Some(phase)
    }
}

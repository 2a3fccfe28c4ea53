//! Screen intensity of independent point sources with individual phases.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Source {
    /// Transverse source position, m.
    pub y: f64,
    /// Source phase, rad.
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceSpec {
    pub sources: Vec<Source>,
    /// Source-to-screen distance, m.
    pub distance: f64,
    /// rad/m.
    pub wavenumber: f64,
    /// Screen coordinates y', m.
    pub screen: Vec<f64>,
}

pub fn wavenumber(wavelength: f64) -> f64 {
    TAU / wavelength
}

/// `n` evenly spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

impl InterferenceSpec {
    /// Two in-phase sources at `+-separation/2`.
    pub fn double_source(separation: f64, distance: f64, wavelength: f64, screen: Vec<f64>) -> Self {
        InterferenceSpec {
            sources: vec![
                Source { y: separation / 2.0, theta: 0.0 },
                Source { y: -separation / 2.0, theta: 0.0 },
            ],
            distance,
            wavenumber: wavenumber(wavelength),
            screen,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sources.is_empty() {
            return Err(Error::EmptySources);
        }
        if !(self.distance > 0.0) || !self.wavenumber.is_finite() {
            return Err(Error::Precondition(format!(
                "need D > 0 and finite k (D = {}, k = {})",
                self.distance, self.wavenumber
            )));
        }
        Ok(())
    }

    /// Warning text when `D < 100 max|y_n|`, where the far-field form is doubtful.
    pub fn far_field_warning(&self) -> Option<String> {
        let reach = self.sources.iter().map(|s| s.y.abs()).fold(0.0, f64::max);
        (self.distance < 100.0 * reach).then(|| {
            format!(
                "distance {} m is less than 100x the largest source offset {} m",
                self.distance, reach
            )
        })
    }

    pub fn with_common_phase(&self, chi: f64) -> Self {
        let mut out = self.clone();
        out.sources.iter_mut().for_each(|s| s.theta += chi);
        out
    }
}

fn intensity(spec: &InterferenceSpec, path: impl Fn(f64, f64) -> f64) -> Result<Vec<f64>> {
    spec.validate()?;
    Ok(spec
        .screen
        .iter()
        .map(|&yp| {
            spec.sources
                .iter()
                .map(|s| Complex64::from_polar(1.0, s.theta + spec.wavenumber * path(s.y, yp)))
                .sum::<Complex64>()
                .norm_sqr()
        })
        .collect())
}

/// `|sum_n exp(i (theta_n + k (y_n - y')^2 / (2 D)))|^2` at every screen point.
pub fn interference_pattern(spec: &InterferenceSpec) -> Result<Vec<f64>> {
    let d = spec.distance;
    intensity(spec, |y, yp| (y - yp).powi(2) / (2.0 * d))
}

/// Same sum with the full path length `sqrt(D^2 + (y_n - y')^2)`. The common
/// `k D` is dropped, which leaves intensities unchanged.
pub fn interference_pattern_exact(spec: &InterferenceSpec) -> Result<Vec<f64>> {
    let d = spec.distance;
    intensity(spec, |y, yp| {
        let dy2 = (y - yp).powi(2);
        dy2 / (d + (d * d + dy2).sqrt())
    })
}

/// Mean spacing between interior intensity maxima, located to sub-sample
/// precision by parabolic interpolation. `None` with fewer than two maxima.
pub fn fringe_period(screen: &[f64], intensity: &[f64]) -> Option<f64> {
    if screen.len() != intensity.len() || screen.len() < 3 {
        return None;
    }
    let mut peaks = Vec::new();
    for i in 1..intensity.len() - 1 {
        let (l, m, r) = (intensity[i - 1], intensity[i], intensity[i + 1]);
        if m > l && m >= r {
            let denom = l - 2.0 * m + r;
            let offset = if denom != 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
            let h = screen[i + 1] - screen[i];
            peaks.push(screen[i] + offset * h);
        }
    }
    if peaks.len() < 2 {
        return None;
    }
    Some((peaks[peaks.len() - 1] - peaks[0]) / (peaks.len() - 1) as f64)
}

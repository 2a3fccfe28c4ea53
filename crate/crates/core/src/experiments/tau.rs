use super::constants::{HBAR, PLANCK_H, QUOTED_TAU_400NM, SPEED_OF_LIGHT, TAU_UPPER_BOUND};
use crate::error::{Error, Result};

/// Reduction-time scale `hbar / E` of a photon, next to the quoted figures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauEstimate {
    pub wavelength: f64,
    /// `E = h c / lambda`, J.
    pub photon_energy: f64,
    pub hbar_over_e: f64,
    /// Quoted order of magnitude for a 400 nm photon.
    pub quoted_order: f64,
    pub upper_bound: f64,
}

pub fn estimate_tau(lambda_photon: f64) -> Result<TauEstimate> {
    if !(lambda_photon > 0.0 && lambda_photon.is_finite()) {
        return Err(Error::Precondition(format!("wavelength {lambda_photon} must be > 0")));
    }
    let photon_energy = PLANCK_H * SPEED_OF_LIGHT / lambda_photon;
    Ok(TauEstimate {
        wavelength: lambda_photon,
        photon_energy,
        hbar_over_e: HBAR / photon_energy,
        quoted_order: QUOTED_TAU_400NM,
        upper_bound: TAU_UPPER_BOUND,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn violet_photon() {
        let e = estimate_tau(400e-9).unwrap();
        // lambda / (2 pi c)
        let direct = 400e-9 / (std::f64::consts::TAU * SPEED_OF_LIGHT);
        assert!((e.hbar_over_e / direct - 1.0).abs() < 1e-10);
        assert!((e.hbar_over_e - 2.1235e-16).abs() < 1e-20);
        assert_eq!(e.upper_bound, 1e-14);
    }

    #[test]
    fn linear_in_wavelength() {
        let a = estimate_tau(400e-9).unwrap().hbar_over_e;
        let b = estimate_tau(800e-9).unwrap().hbar_over_e;
        assert!((b / a - 2.0).abs() < 1e-14);
        assert!(estimate_tau(0.0).is_err());
    }
}

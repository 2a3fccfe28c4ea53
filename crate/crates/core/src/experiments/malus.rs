//! Transient deviation from Malus's law behind a second polarizer.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::model::closed_form_x;

/// Expected transmission at time `t` for polarizer angle `eps`:
///
/// `sin^2 e / sqrt(1 + tan^-2 e * exp(-t/tau)) + cos^2 e / sqrt(1 + tan^2 e * exp(t/tau))`.
pub fn malus_expectation(eps: f64, t: f64, tau_r: f64) -> Result<f64> {
    check_times(t, tau_r)?;
    if !(eps > 0.0 && eps < FRAC_PI_2) {
        return Err(Error::EndpointAngle(eps));
    }
    let (s, c) = eps.sin_cos();
    let tan2 = (s / c).powi(2);
    let grow = s * s / (1.0 + (-t / tau_r).exp() / tan2).sqrt();
    let decay = c * c / (1.0 + tan2 * (t / tau_r).exp()).sqrt();
    Ok(grow + decay)
}

/// Like [`malus_expectation`], but returns the physical limits 0 and 1 at
/// the endpoint angles instead of failing when `allow_endpoints` is set.
pub fn malus_expectation_or_limit(eps: f64, t: f64, tau_r: f64, allow_endpoints: bool) -> Result<f64> {
    if allow_endpoints {
        check_times(t, tau_r)?;
        if eps == 0.0 {
            return Ok(0.0);
        }
        if eps == FRAC_PI_2 {
            return Ok(1.0);
        }
    }
    malus_expectation(eps, t, tau_r)
}

fn check_times(t: f64, tau_r: f64) -> Result<()> {
    if !(t >= 0.0) || !(tau_r > 0.0) {
        return Err(Error::Precondition(format!("need t >= 0, tau_r > 0 (t = {t}, tau_r = {tau_r})")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MalusSpec {
    pub epsilon_list: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub tau_r: f64,
}

impl MalusSpec {
    /// Angles in degrees, `steps + 1` evenly spaced times from 0 to `t_max_over_tau * tau_r`.
    pub fn from_degrees(angles_deg: &[f64], t_max_over_tau: f64, steps: usize, tau_r: f64) -> Result<Self> {
        let t_grid = if steps == 0 {
            vec![0.0]
        } else {
            (0..=steps)
                .map(|i| t_max_over_tau * tau_r * i as f64 / steps as f64)
                .collect()
        };
        let spec = MalusSpec {
            epsilon_list: angles_deg.iter().map(|d| d.to_radians()).collect(),
            t_grid,
            tau_r,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_r > 0.0) {
            return Err(Error::Precondition(format!("tau_r = {} must be > 0", self.tau_r)));
        }
        if let Some(&e) = self.epsilon_list.iter().find(|&&e| !(e > 0.0 && e < FRAC_PI_2)) {
            return Err(Error::EndpointAngle(e));
        }
        if self.t_grid.iter().any(|&t| !(t >= 0.0)) || self.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Precondition("t_grid must be nonnegative and increasing".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MalusRow {
    pub eps: f64,
    pub t: f64,
    pub expectation: f64,
    /// `expectation / sin^2(eps)`.
    pub ratio_to_malus: f64,
}

pub fn malus_deviation_curve(spec: &MalusSpec) -> Result<Vec<MalusRow>> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.epsilon_list.len() * spec.t_grid.len());
    for &eps in &spec.epsilon_list {
        let malus = eps.sin().powi(2);
        for &t in &spec.t_grid {
            let expectation = malus_expectation(eps, t, spec.tau_r)?;
            rows.push(MalusRow { eps, t, expectation, ratio_to_malus: expectation / malus });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: u64,
    /// Draws that took the growing branch.
    pub grow_draws: u64,
}

/// Monte Carlo transmission under the amplitude convention.
///
/// With probability `sin^2 eps` a photon takes the growing branch with
/// amplitude `sin eps`, otherwise the decaying branch with amplitude
/// `cos eps`; each contributes `closed_form_x` of its branch at `t`. Since
/// only two values occur, the estimate is assembled from the branch count.
pub fn malus_monte_carlo(eps: f64, t: f64, tau_r: f64, n: u64, seed: u64) -> Result<MonteCarloEstimate> {
    if n == 0 {
        return Err(Error::Precondition("Monte Carlo needs n >= 1 samples".into()));
    }
    check_times(t, tau_r)?;
    if !(eps > 0.0 && eps < FRAC_PI_2) {
        return Err(Error::EndpointAngle(eps));
    }
    let (s, c) = eps.sin_cos();
    let grow_value = closed_form_x(s, 1, t, tau_r)?;
    let decay_value = closed_form_x(c, -1, t, tau_r)?;
    let p_grow = s * s;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grow_draws = (0..n).filter(|_| rng.random::<f64>() < p_grow).count() as u64;

    let p_hat = grow_draws as f64 / n as f64;
    let mean = p_hat * grow_value + (1.0 - p_hat) * decay_value;
    let std_error = (p_hat * (1.0 - p_hat) / n as f64).sqrt() * (grow_value - decay_value).abs();
    Ok(MonteCarloEstimate { mean, std_error, n, grow_draws })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn deg(d: f64) -> f64 {
        d.to_radians()
    }

    #[test]
    fn expectation_limits() {
        assert_abs_diff_eq!(malus_expectation(deg(45.0), 60.0, 1.0).unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(
            malus_expectation(deg(45.0), 0.0, 1.0).unwrap(),
            0.707_106_781_186_547_5,
            epsilon = 1e-15
        );
        let r = malus_expectation(deg(30.0), 0.0, 1.0).unwrap() / deg(30.0).sin().powi(2);
        assert_abs_diff_eq!(r, 3.098_076_211_353_316, epsilon = 1e-12);
    }

    #[test]
    fn endpoints() {
        assert!(matches!(malus_expectation(0.0, 1.0, 1.0), Err(Error::EndpointAngle(_))));
        assert!(matches!(malus_expectation(FRAC_PI_2, 1.0, 1.0), Err(Error::EndpointAngle(_))));
        assert_eq!(malus_expectation_or_limit(0.0, 1.0, 1.0, true).unwrap(), 0.0);
        assert_eq!(malus_expectation_or_limit(FRAC_PI_2, 1.0, 1.0, true).unwrap(), 1.0);
        assert!(malus_expectation_or_limit(0.0, 1.0, 1.0, false).is_err());
    }

    #[test]
    fn curve_shape() {
        let spec = MalusSpec::from_degrees(&[20.0, 30.0, 45.0], 50.0, 500, 1e-14).unwrap();
        let rows = malus_deviation_curve(&spec).unwrap();
        assert_eq!(rows.len(), 3 * 501);
        for chunk in rows.chunks(501) {
            assert!((chunk.last().unwrap().ratio_to_malus - 1.0).abs() < 1e-6);
            // decreasing towards 1 from above
            assert!(chunk.windows(2).all(|w| w[1].ratio_to_malus <= w[0].ratio_to_malus));
            assert!(chunk.iter().all(|r| r.ratio_to_malus >= 1.0 - 1e-12));
        }
        let empty = MalusSpec { epsilon_list: vec![deg(30.0)], t_grid: vec![], tau_r: 1.0 };
        assert!(malus_deviation_curve(&empty).unwrap().is_empty());
        assert!(MalusSpec::from_degrees(&[90.0], 1.0, 2, 1.0).is_err());
    }

    #[test]
    fn monte_carlo_cases() {
        let est = malus_monte_carlo(deg(45.0), 0.0, 1.0, 1000, 1).unwrap();
        assert_abs_diff_eq!(est.mean, 0.707_106_781_186_547_5, epsilon = 1e-15);
        assert!(est.std_error < 1e-15);

        let eps = deg(30.0);
        let est = malus_monte_carlo(eps, 2.0, 1.0, 1_000_000, 99).unwrap();
        let exact = malus_expectation(eps, 2.0, 1.0).unwrap();
        assert!((est.mean - exact).abs() <= 4.0 * est.std_error);

        assert!(malus_monte_carlo(eps, 1.0, 1.0, 0, 1).is_err());
    }

    #[test]
    fn monte_carlo_branch_values_reproduce_closed_form() {
        // p sin-branch + (1-p) cos-branch equals the printed expectation exactly
        for d in [10.0, 20.0, 30.0, 45.0, 60.0, 80.0] {
            for t in [0.0, 0.5, 1.0, 2.0, 5.0] {
                let e = deg(d);
                let (s, c) = e.sin_cos();
                let mix = s * s * closed_form_x(s, 1, t, 1.0).unwrap()
                    + c * c * closed_form_x(c, -1, t, 1.0).unwrap();
                assert_abs_diff_eq!(mix, malus_expectation(e, t, 1.0).unwrap(), epsilon = 1e-14);
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn ratio_decreases_to_one(d in 1.0f64..=45.0, t in 0.0f64..40.0, dt in 0.01f64..5.0) {
            let e = deg(d);
            let m = e.sin().powi(2);
            let now = malus_expectation(e, t, 1.0).unwrap() / m;
            let later = malus_expectation(e, t + dt, 1.0).unwrap() / m;
            proptest::prop_assert!(later <= now + 1e-15);
            proptest::prop_assert!(later >= 1.0 - 1e-12);
            let (s, c) = e.sin_cos();
            let start = malus_expectation(e, 0.0, 1.0).unwrap() / m;
            proptest::prop_assert!((start - (s.powi(3) + c.powi(3)) / (s * s)).abs() < 1e-12 * start);
        }
    }

    #[test]
    fn ratio_not_monotone_beyond_45_degrees() {
        let ratio = |d: f64, t: f64| malus_expectation(deg(d), t, 1.0).unwrap() / deg(d).sin().powi(2);
        // rises first, then relaxes to 1
        assert!(ratio(60.0, 0.5) > ratio(60.0, 0.0));
        assert!(ratio(60.0, 0.0) > 1.0);
        assert!(ratio(70.0, 0.0) < 1.0);
        assert!(ratio(70.0, 2.0) > 1.0);
        assert!((ratio(70.0, 50.0) - 1.0).abs() < 1e-6);
    }
}

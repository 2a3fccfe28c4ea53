//! Algebra of the phase-sensitive collapse model.
//!
//! Each expansion coefficient is written `c_n = sqrt(x_n) e^{i theta_n}`. At
//! measurement onset the sign of `cos(theta_n)` is frozen into a branch sign
//! `alpha_n`, the coupling `f_n` correlates the signs across components, and
//! every weight then follows a logistic-like closed form towards 0 or 1.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Default tolerance below which `|cos(theta)|` counts as zero.
pub const DEFAULT_PHASE_TOL: f64 = 1e-12;

/// Tolerance on `x0[0] + x0[1] = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SamplingMode {
    /// Each component draws its own phase.
    #[default]
    Independent,
    /// One phase shared by every component.
    CommonChaotic,
}

impl SamplingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SamplingMode::Independent => "independent",
            SamplingMode::CommonChaotic => "common-chaotic",
        }
    }
}

impl fmt::Display for SamplingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SamplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "independent" => Ok(SamplingMode::Independent),
            "common-chaotic" | "commonchaotic" | "common" => Ok(SamplingMode::CommonChaotic),
            other => Err(Error::InvalidConfig(format!("unknown sampling mode `{other}`"))),
        }
    }
}

/// How the configured Born weights map onto the dynamical variable `x_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum AmplitudeConvention {
    /// `x_n = |c_n|^2`: the weight itself is evolved.
    #[default]
    Probability,
    /// `x_n = |c_n|`: the square root of the weight is evolved.
    Amplitude,
}

impl AmplitudeConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            AmplitudeConvention::Probability => "probability",
            AmplitudeConvention::Amplitude => "amplitude",
        }
    }
}

impl fmt::Display for AmplitudeConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AmplitudeConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "probability" => Ok(AmplitudeConvention::Probability),
            "amplitude" => Ok(AmplitudeConvention::Amplitude),
            other => Err(Error::InvalidConfig(format!(
                "unknown amplitude convention `{other}`"
            ))),
        }
    }
}

/// Full input of a two-state collapse experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStateConfig {
    /// Born weights at measurement onset.
    pub x0: [f64; 2],
    /// Reduction time in seconds.
    pub tau_r: f64,
    pub sampling_mode: SamplingMode,
    pub amplitude_convention: AmplitudeConvention,
}

impl TwoStateConfig {
    pub fn new(x0: [f64; 2], tau_r: f64) -> Result<Self> {
        let config = TwoStateConfig {
            x0,
            tau_r,
            sampling_mode: SamplingMode::default(),
            amplitude_convention: AmplitudeConvention::default(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_sampling_mode(mut self, mode: SamplingMode) -> Self {
        self.sampling_mode = mode;
        self
    }

    pub fn with_convention(mut self, convention: AmplitudeConvention) -> Self {
        self.amplitude_convention = convention;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (i, &w) in self.x0.iter().enumerate() {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::InvalidConfig(format!(
                    "x0_{} = {w} is outside [0, 1]",
                    i + 1
                )));
            }
        }
        let sum = self.x0[0] + self.x0[1];
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidConfig(format!(
                "x0_1 + x0_2 = {sum} must equal 1"
            )));
        }
        if !(self.tau_r > 0.0 && self.tau_r.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tau_r = {} must be a positive finite time",
                self.tau_r
            )));
        }
        Ok(())
    }

    /// Initial values of the evolved variable under the configured convention.
    pub fn dynamical_x0(&self) -> [f64; 2] {
        match self.amplitude_convention {
            AmplitudeConvention::Probability => self.x0,
            AmplitudeConvention::Amplitude => [self.x0[0].sqrt(), self.x0[1].sqrt()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_value(v: f64) -> Sign {
        if v.is_sign_negative() {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.as_i32() as f64
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// Branch signs `(alpha_1, alpha_2)` frozen at measurement onset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BranchSigns(pub [Sign; 2]);

impl BranchSigns {
    pub const ALL: [BranchSigns; 4] = [
        BranchSigns([Sign::Plus, Sign::Minus]),
        BranchSigns([Sign::Minus, Sign::Plus]),
        BranchSigns([Sign::Plus, Sign::Plus]),
        BranchSigns([Sign::Minus, Sign::Minus]),
    ];

    pub fn new(a1: Sign, a2: Sign) -> Self {
        BranchSigns([a1, a2])
    }

    pub fn is_anticorrelated(self) -> bool {
        self.0[0] != self.0[1]
    }
}

impl fmt::Display for BranchSigns {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.0[0].as_char(), self.0[1].as_char())
    }
}

impl FromStr for BranchSigns {
    type Err = Error;

    /// Parses `"+-"`, `"-+"`, `"++"` or `"--"`.
    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.trim().chars().collect();
        let parse = |c: char| match c {
            '+' => Ok(Sign::Plus),
            '-' => Ok(Sign::Minus),
            _ => Err(Error::InvalidConfig(format!("bad sign `{c}` in `{s}`"))),
        };
        match chars.as_slice() {
            [a, b] => Ok(BranchSigns([parse(*a)?, parse(*b)?])),
            _ => Err(Error::InvalidConfig(format!(
                "branch signs must be two characters from {{+,-}}, got `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CouplingResult {
    pub f: [i32; 2],
    /// `rate_n = f_n * alpha_n`, the sign of `dx_n/dt`.
    pub rate: [i32; 2],
}

/// Sign of `cos(theta)`, refusing phases where the cosine vanishes.
pub fn branch_sign(theta: f64, tol: f64) -> Result<Sign> {
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!("phase tolerance {tol} must be > 0")));
    }
    let c = theta.cos();
    if c.abs() < tol {
        return Err(Error::DegeneratePhase { abs_cos: c.abs(), tol });
    }
    Ok(Sign::from_value(c))
}

/// Half-angle phase with the weight-dependent offset `beta = pi (x0 - 1/2)`.
///
/// Not reduced mod 2π; the result only feeds [`branch_sign`].
pub fn shift_phase(theta_raw: f64, x0_n: f64) -> f64 {
    theta_raw / 2.0 - PI * (x0_n - 0.5)
}

/// Heaviside step with `H(0) = 0`.
fn step_plus(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Coupling `f_n` for an arbitrary number of components.
///
/// For each `n`, with sums over `k != n`:
/// `f_n = [1 - 2 sum H(a_k)] a_n + [1 - sum H(a_k)] H(sum (1 - H(-a_k))) [1 - a_n]`.
pub fn coupling_n(signs: &[Sign]) -> Vec<i32> {
    let alpha: Vec<f64> = signs.iter().map(|s| s.as_f64()).collect();
    (0..alpha.len())
        .map(|n| {
            let others = || alpha.iter().enumerate().filter(move |&(k, _)| k != n);
            let grow_sum: f64 = others().map(|(_, &a)| step_plus(a)).sum();
            let not_neg_sum: f64 = others().map(|(_, &a)| 1.0 - step_plus(-a)).sum();
            let f = (1.0 - 2.0 * grow_sum) * alpha[n]
                + (1.0 - grow_sum) * step_plus(not_neg_sum) * (1.0 - alpha[n]);
            f as i32
        })
        .collect()
}

pub fn coupling(signs: BranchSigns) -> CouplingResult {
    let f = coupling_n(&signs.0);
    let f = [f[0], f[1]];
    CouplingResult {
        f,
        rate: [f[0] * signs.0[0].as_i32(), f[1] * signs.0[1].as_i32()],
    }
}

/// Closed-form weight `1 / sqrt(1 + (1 - x0^2)/x0^2 * exp(-rate t / tau_r))`.
pub fn closed_form_x(x0_n: f64, rate: i32, t: f64, tau_r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x0_n) {
        return Err(Error::Precondition(format!("x0 = {x0_n} is outside [0, 1]")));
    }
    if rate != 1 && rate != -1 {
        return Err(Error::Precondition(format!("rate must be +1 or -1, got {rate}")));
    }
    if !(tau_r > 0.0) || t < 0.0 || t.is_nan() {
        return Err(Error::Precondition(format!(
            "need t >= 0 and tau_r > 0 (t = {t}, tau_r = {tau_r})"
        )));
    }
    if x0_n == 0.0 {
        return if rate == 1 {
            Err(Error::InvalidInitialWeight)
        } else {
            Ok(0.0)
        };
    }
    if x0_n == 1.0 {
        return Ok(1.0);
    }
    let ratio = (1.0 - x0_n * x0_n) / (x0_n * x0_n);
    let e = (-(rate as f64) * t / tau_r).exp();
    Ok(1.0 / (1.0 + ratio * e).sqrt())
}

/// Both weights at time `t` for the given branch signs.
pub fn weights_at(config: &TwoStateConfig, signs: BranchSigns, t: f64) -> Result<[f64; 2]> {
    let rate = coupling(signs).rate;
    let x0 = config.dynamical_x0();
    Ok([
        closed_form_x(x0[0], rate[0], t, config.tau_r)?,
        closed_form_x(x0[1], rate[1], t, config.tau_r)?,
    ])
}

/// Collapse observable `q = x_1 - x_2`.
pub fn q_of_t(config: &TwoStateConfig, signs: BranchSigns, t: f64) -> Result<f64> {
    let [x1, x2] = weights_at(config, signs, t)?;
    Ok(x1 - x2)
}

/// Shifted phase at which [`branch_sign`] flips for weight `x0_n`, i.e. the
/// raw phase `2 pi x0_n` where `theta/2 - beta` crosses `pi/2`.
pub fn sign_boundary(x0_n: f64) -> f64 {
    2.0 * (FRAC_PI_2 + PI * (x0_n - 0.5))
}

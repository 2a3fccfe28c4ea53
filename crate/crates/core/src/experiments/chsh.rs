//! CHSH correlations of the spin singlet and the local-hidden-variable bound.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

pub type Mat2 = [[Complex64; 2]; 2];

const HERMITIAN_TOL: f64 = 1e-12;
const SPECTRAL_TOL: f64 = 1e-12;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity() -> Mat2 {
    [[c(1.0), c(0.0)], [c(0.0), c(1.0)]]
}

pub fn pauli_x() -> Mat2 {
    [[c(0.0), c(1.0)], [c(1.0), c(0.0)]]
}

pub fn pauli_y() -> Mat2 {
    [[c(0.0), Complex64::new(0.0, -1.0)], [Complex64::new(0.0, 1.0), c(0.0)]]
}

pub fn pauli_z() -> Mat2 {
    [[c(1.0), c(0.0)], [c(0.0), c(-1.0)]]
}

/// `a0 I + ax X + ay Y + az Z`.
pub fn from_bloch(a0: f64, a: [f64; 3]) -> Mat2 {
    let (x, y, z) = (pauli_x(), pauli_y(), pauli_z());
    let mut m = [[c(0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = identity()[i][j] * a0 + x[i][j] * a[0] + y[i][j] * a[1] + z[i][j] * a[2];
        }
    }
    m
}

/// Spin measurement along angle `phi` in the x-z plane: `cos(phi) Z + sin(phi) X`.
pub fn spin_in_xz_plane(phi: f64) -> Mat2 {
    from_bloch(0.0, [phi.sin(), 0.0, phi.cos()])
}

pub fn scale(m: &Mat2, s: f64) -> Mat2 {
    [[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]]
}

pub fn add(a: &Mat2, b: &Mat2) -> Mat2 {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

pub fn is_hermitian(m: &Mat2, tol: f64) -> bool {
    (m[0][0].im).abs() <= tol
        && (m[1][1].im).abs() <= tol
        && (m[0][1] - m[1][0].conj()).norm() <= tol
}

/// Largest |eigenvalue| of a Hermitian 2x2 matrix.
pub fn spectral_radius(m: &Mat2) -> f64 {
    let mean = 0.5 * (m[0][0].re + m[1][1].re);
    let half_gap = 0.5 * (m[0][0].re - m[1][1].re);
    let r = (half_gap * half_gap + m[0][1].norm_sqr()).sqrt();
    (mean + r).abs().max((mean - r).abs())
}

fn check_observable(m: &Mat2, label: &str) -> Result<()> {
    if !is_hermitian(m, HERMITIAN_TOL) {
        return Err(Error::NonHermitian(label.to_string()));
    }
    let rho = spectral_radius(m);
    if rho > 1.0 + SPECTRAL_TOL {
        return Err(Error::SpectralBound(label.to_string(), rho));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshSetting {
    pub a: Mat2,
    pub a_prime: Mat2,
    pub b: Mat2,
    pub b_prime: Mat2,
}

impl ChshSetting {
    pub fn new(a: Mat2, a_prime: Mat2, b: Mat2, b_prime: Mat2) -> Result<Self> {
        let s = ChshSetting { a, a_prime, b, b_prime };
        s.validate()?;
        Ok(s)
    }

    /// `A = Z`, `A' = X`, `B = -(Z + X)/sqrt 2`, `B' = (Z - X)/sqrt 2`.
    pub fn rotated_45() -> Self {
        let (x, z) = (pauli_x(), pauli_z());
        ChshSetting {
            a: z,
            a_prime: x,
            b: scale(&add(&z, &x), -FRAC_1_SQRT_2),
            b_prime: scale(&add(&z, &scale(&x, -1.0)), FRAC_1_SQRT_2),
        }
    }

    /// Spin measurements in the x-z plane at the given angles (radians).
    pub fn from_angles(a: f64, a_prime: f64, b: f64, b_prime: f64) -> Self {
        ChshSetting {
            a: spin_in_xz_plane(a),
            a_prime: spin_in_xz_plane(a_prime),
            b: spin_in_xz_plane(b),
            b_prime: spin_in_xz_plane(b_prime),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_observable(&self.a, "a")?;
        check_observable(&self.a_prime, "a'")?;
        check_observable(&self.b, "b")?;
        check_observable(&self.b_prime, "b'")
    }
}

fn kron(a: &Mat2, b: &Mat2) -> [[Complex64; 4]; 4] {
    let mut k = [[c(0.0); 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for p in 0..2 {
                for q in 0..2 {
                    k[2 * i + p][2 * j + q] = a[i][j] * b[p][q];
                }
            }
        }
    }
    k
}

/// `<phi| A (x) B |phi>` for the singlet `(|01> - |10>)/sqrt 2`.
pub fn singlet_correlation(op_a: &Mat2, op_b: &Mat2) -> Result<f64> {
    check_observable(op_a, "A")?;
    check_observable(op_b, "B")?;
    // unnormalised (0, 1, -1, 0); the 1/2 is applied once at the end so no
    // rounding enters through 1/sqrt 2 squared
    let psi = [c(0.0), c(1.0), c(-1.0), c(0.0)];
    let k = kron(op_a, op_b);
    let mut acc = c(0.0);
    for i in 0..4 {
        let row: Complex64 = (0..4).map(|j| k[i][j] * psi[j]).sum();
        acc += psi[i].conj() * row;
    }
    Ok(0.5 * acc.re)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshValue {
    /// `C(a,b), C(a,b'), C(a',b), C(a',b')`.
    pub correlations: [f64; 4],
    pub f: f64,
}

/// `max over signs of |C(a,b) +- C(a,b')| + |C(a',b) -+ C(a',b')|`.
pub fn chsh_functional(corr: [f64; 4]) -> f64 {
    let [ab, abp, apb, apbp] = corr;
    let upper = (ab + abp).abs() + (apb - apbp).abs();
    let lower = (ab - abp).abs() + (apb + apbp).abs();
    upper.max(lower)
}

pub fn chsh_value(setting: &ChshSetting) -> Result<ChshValue> {
    setting.validate()?;
    let correlations = [
        singlet_correlation(&setting.a, &setting.b)?,
        singlet_correlation(&setting.a, &setting.b_prime)?,
        singlet_correlation(&setting.a_prime, &setting.b)?,
        singlet_correlation(&setting.a_prime, &setting.b_prime)?,
    ];
    Ok(ChshValue { correlations, f: chsh_functional(correlations) })
}

/// Random Hermitian observable with spectral radius at most 1. Half of the
/// draws are sharp spin measurements (eigenvalues exactly +-1), the rest
/// arbitrary contractions.
pub fn random_observable<R: Rng + ?Sized>(rng: &mut R) -> Mat2 {
    let sharp = rng.random_bool(0.5);
    let a0: f64 = if sharp { 0.0 } else { rng.random_range(-1.0..1.0) };
    let v: [f64; 3] = [
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
    ];
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let radius = a0.abs() + norm;
    let shrink = if sharp { 1.0 } else { rng.random_range(0.0..=1.0) };
    let s = if radius > 0.0 { shrink / radius } else { 0.0 };
    from_bloch(a0 * s, [v[0] * s, v[1] * s, v[2] * s])
}

pub fn random_setting<R: Rng + ?Sized>(rng: &mut R) -> ChshSetting {
    ChshSetting {
        a: random_observable(rng),
        a_prime: random_observable(rng),
        b: random_observable(rng),
        b_prime: random_observable(rng),
    }
}

/// Deterministic local assignment `(A(a), A(a'), B(b), B(b'))` in `{-1, 1}^4`.
fn assignment(bits: u8) -> [f64; 4] {
    let s = |k: u8| if bits >> k & 1 == 1 { -1.0 } else { 1.0 };
    [s(0), s(1), s(2), s(3)]
}

fn assignment_correlations(v: [f64; 4]) -> [f64; 4] {
    let [a, ap, b, bp] = v;
    [a * b, a * bp, ap * b, ap * bp]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LhvResult {
    pub f_max: f64,
    /// Maximum over the 16 deterministic assignments, when enumerated.
    pub exhaustive_max: Option<f64>,
    pub strategies_evaluated: u64,
}

/// Largest CHSH functional over local hidden-variable strategies.
///
/// Each sampled strategy is a random mixture over a handful of hidden values,
/// each carrying a deterministic `+-1` assignment; with `exhaustive` all 16
/// pure assignments are evaluated as well.
pub fn chsh_lhv_max(n_strategies: u64, seed: u64, exhaustive: bool) -> Result<LhvResult> {
    if n_strategies == 0 && !exhaustive {
        return Err(Error::Precondition("no strategies to evaluate".into()));
    }
    let exhaustive_max = exhaustive.then(|| {
        (0u8..16)
            .map(|bits| chsh_functional(assignment_correlations(assignment(bits))))
            .fold(f64::NEG_INFINITY, f64::max)
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f_max = exhaustive_max.unwrap_or(f64::NEG_INFINITY);
    for _ in 0..n_strategies {
        let hidden = rng.random_range(1..=8);
        let mut weights: Vec<f64> = (0..hidden).map(|_| rng.random::<f64>() + 1e-3).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let mut corr = [0.0; 4];
        for w in weights {
            let local = assignment_correlations(assignment(rng.random_range(0..16)));
            for k in 0..4 {
                corr[k] += w * local[k];
            }
        }
        f_max = f_max.max(chsh_functional(corr));
    }
    Ok(LhvResult {
        f_max,
        exhaustive_max,
        strategies_evaluated: n_strategies + if exhaustive { 16 } else { 0 },
    })
}

//! Phase sampling, outcome classification and reproducible Born-rule ensembles.
//!
//! Every trajectory `i` owns a ChaCha8 stream seeded with
//! [`child_seed`]`(master_seed, i)`, so results do not depend on how the
//! work is split across threads. Aggregation only sums integers.

use std::f64::consts::TAU;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{integrate, IntegratorSettings, PhaseModel, Trajectory};
use crate::error::{Error, Result};
use crate::model::{
    branch_sign, coupling, closed_form_x, shift_phase, BranchSigns, SamplingMode, TwoStateConfig,
    DEFAULT_PHASE_TOL,
};

pub const DEFAULT_DELTA: f64 = 1e-3;
/// Default horizon in units of `tau_r`.
pub const DEFAULT_T_END_OVER_TAU: f64 = 30.0;
pub const MAX_RESAMPLE: usize = 64;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trajectory `index`: `mix64(master_seed ^ mix64(index))`.
pub fn child_seed(master_seed: u64, index: u64) -> u64 {
    mix64(master_seed ^ mix64(index))
}

pub fn trajectory_stream(master_seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(child_seed(master_seed, index))
}

/// How each trajectory is evolved inside an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    /// Closed-form weights; reduction time found by bisection on the grid.
    #[default]
    ClosedForm,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingSpec {
    pub mode: SamplingMode,
    pub n_trajectories: u64,
    pub master_seed: u64,
    /// Collapse threshold used by [`classify`].
    pub delta: f64,
    pub engine: Engine,
}

impl SamplingSpec {
    pub fn new(mode: SamplingMode, n_trajectories: u64, master_seed: u64) -> Self {
        SamplingSpec {
            mode,
            n_trajectories,
            master_seed,
            delta: DEFAULT_DELTA,
            engine: Engine::ClosedForm,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trajectories < 1 {
            return Err(Error::Precondition("n_trajectories must be >= 1".into()));
        }
        check_delta(self.delta)
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::Precondition(format!("delta {delta} must lie in (0, 0.5)")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OutcomeClass {
    CollapseTo1,
    CollapseTo2,
    BothDecay,
    BothGrow,
    Unresolved,
}

impl OutcomeClass {
    pub const ALL: [OutcomeClass; 5] = [
        OutcomeClass::CollapseTo1,
        OutcomeClass::CollapseTo2,
        OutcomeClass::BothDecay,
        OutcomeClass::BothGrow,
        OutcomeClass::Unresolved,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeClass::CollapseTo1 => "collapse_to_1",
            OutcomeClass::CollapseTo2 => "collapse_to_2",
            OutcomeClass::BothDecay => "both_decay",
            OutcomeClass::BothGrow => "both_grow",
            OutcomeClass::Unresolved => "unresolved",
        }
    }

    pub fn is_collapse(self) -> bool {
        matches!(self, OutcomeClass::CollapseTo1 | OutcomeClass::CollapseTo2)
    }
}

impl fmt::Display for OutcomeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub class: OutcomeClass,
    /// First sample time at which `q` reached the collapse side,
    /// present only for the two collapse classes.
    pub reduction_time: Option<f64>,
}

/// Draws branch signs for one trajectory.
///
/// `x0` are Born weights. Independent mode draws one phase per component,
/// common mode shares one phase; either way each phase goes through
/// [`shift_phase`] with its own weight and then [`branch_sign`]. Phases with
/// vanishing cosine are redrawn from the same stream.
pub fn sample_signs<R: Rng + ?Sized>(
    x0: [f64; 2],
    mode: SamplingMode,
    stream: &mut R,
) -> Result<BranchSigns> {
    let draw = |stream: &mut R| stream.random::<f64>() * TAU;
    match mode {
        SamplingMode::Independent => {
            let mut out = [crate::model::Sign::Plus; 2];
            for (n, slot) in out.iter_mut().enumerate() {
                *slot = resample(|| branch_sign(shift_phase(draw(stream), x0[n]), DEFAULT_PHASE_TOL))?;
            }
            Ok(BranchSigns(out))
        }
        SamplingMode::CommonChaotic => resample(|| {
            let theta = draw(stream);
            Ok(BranchSigns([
                branch_sign(shift_phase(theta, x0[0]), DEFAULT_PHASE_TOL)?,
                branch_sign(shift_phase(theta, x0[1]), DEFAULT_PHASE_TOL)?,
            ]))
        }),
    }
}

fn resample<T>(mut attempt: impl FnMut() -> Result<T>) -> Result<T> {
    for _ in 0..MAX_RESAMPLE {
        match attempt() {
            Err(Error::DegeneratePhase { .. }) => continue,
            other => return other,
        }
    }
    Err(Error::ResampleExhausted(MAX_RESAMPLE))
}

/// Class of a final weight pair.
fn final_class(x: [f64; 2], delta: f64) -> OutcomeClass {
    let hi = |v: f64| v >= 1.0 - delta;
    let lo = |v: f64| v <= delta;
    match (hi(x[0]), lo(x[0]), hi(x[1]), lo(x[1])) {
        (true, _, _, true) => OutcomeClass::CollapseTo1,
        (_, true, true, _) => OutcomeClass::CollapseTo2,
        (_, true, _, true) => OutcomeClass::BothDecay,
        (true, _, true, _) => OutcomeClass::BothGrow,
        _ => OutcomeClass::Unresolved,
    }
}

fn reached(class: OutcomeClass, q: f64, delta: f64) -> bool {
    match class {
        OutcomeClass::CollapseTo1 => q >= 1.0 - delta,
        OutcomeClass::CollapseTo2 => q <= -(1.0 - delta),
        _ => false,
    }
}

pub fn classify(trajectory: &Trajectory, delta: f64) -> Result<Outcome> {
    check_delta(delta)?;
    let last = trajectory
        .last()
        .ok_or_else(|| Error::Precondition("empty trajectory".into()))?;
    let class = final_class(last.x, delta);
    let reduction_time = if class.is_collapse() {
        trajectory
            .samples
            .iter()
            .zip(&trajectory.q_series)
            .find(|(_, &q)| reached(class, q, delta))
            .map(|(s, _)| s.t)
    } else {
        None
    };
    Ok(Outcome { class, reduction_time })
}

/// Same result as `classify(&closed_form_trajectory(..))` without building
/// the trajectory: `q` is monotone for anticorrelated signs, so the first
/// crossing is located by bisection over the grid.
pub fn classify_closed_form(
    config: &TwoStateConfig,
    signs: BranchSigns,
    settings: &IntegratorSettings,
    delta: f64,
) -> Result<Outcome> {
    Ok(classify_closed_form_indexed(config, signs, settings, delta)?.0)
}

fn classify_closed_form_indexed(
    config: &TwoStateConfig,
    signs: BranchSigns,
    settings: &IntegratorSettings,
    delta: f64,
) -> Result<(Outcome, Option<usize>)> {
    check_delta(delta)?;
    settings.validate()?;
    let rate = coupling(signs).rate;
    let x0 = config.dynamical_x0();
    let x_at = |t: f64| -> Result<[f64; 2]> {
        Ok([
            closed_form_x(x0[0], rate[0], t, config.tau_r)?,
            closed_form_x(x0[1], rate[1], t, config.tau_r)?,
        ])
    };
    let class = final_class(x_at(settings.t_end)?, delta);
    if !class.is_collapse() {
        return Ok((Outcome { class, reduction_time: None }, None));
    }
    let hit = |i: usize| -> Result<bool> {
        let [a, b] = x_at(settings.grid_time(i))?;
        Ok(reached(class, a - b, delta))
    };
    // the final sample satisfies the predicate, so the search is bounded
    let (mut lo, mut hi) = (0usize, settings.grid_len() - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if hit(mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok((
        Outcome { class, reduction_time: Some(settings.grid_time(lo)) },
        Some(lo),
    ))
}

/// Class probabilities implied by the sampling law, assuming the horizon is
/// long enough for every branch to resolve.
pub fn expected_class_probabilities(x0: [f64; 2], mode: SamplingMode) -> [f64; 5] {
    let (pm, mp, pp, mm) = match mode {
        SamplingMode::Independent => {
            let (p1, p2) = (x0[0], x0[1]);
            (p1 * (1.0 - p2), (1.0 - p1) * p2, p1 * p2, (1.0 - p1) * (1.0 - p2))
        }
        SamplingMode::CommonChaotic => {
            let (lo, hi) = (x0[0].min(x0[1]), x0[0].max(x0[1]));
            ((x0[0] - x0[1]).max(0.0), (x0[1] - x0[0]).max(0.0), lo, 1.0 - hi)
        }
    };
    [pm, mp, pp, mm, 0.0]
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeStats {
    /// Indexed by [`OutcomeClass::index`].
    pub counts: [u64; 5],
    /// Sampled sign pairs in [`BranchSigns::ALL`] order.
    pub sign_counts: [u64; 4],
    pub n_trajectories: u64,
    pub master_seed: u64,
    pub mode: SamplingMode,
    pub engine: Engine,
    pub mean_reduction_time: Option<f64>,
}

impl OutcomeStats {
    pub fn count(&self, class: OutcomeClass) -> u64 {
        self.counts[class.index()]
    }

    pub fn frequency(&self, class: OutcomeClass) -> f64 {
        self.count(class) as f64 / self.n_trajectories as f64
    }

    pub fn std_error(&self, class: OutcomeClass) -> f64 {
        binomial_std_error(self.frequency(class), self.n_trajectories)
    }

    /// Trajectories in which component `n` (0-based) grows.
    pub fn grow_count(&self, n: usize) -> u64 {
        let own = if n == 0 { OutcomeClass::CollapseTo1 } else { OutcomeClass::CollapseTo2 };
        self.count(own) + self.count(OutcomeClass::BothGrow)
    }

    pub fn grow_frequency(&self, n: usize) -> f64 {
        self.grow_count(n) as f64 / self.n_trajectories as f64
    }

    pub fn grow_std_error(&self, n: usize) -> f64 {
        binomial_std_error(self.grow_frequency(n), self.n_trajectories)
    }

    pub fn sign_count(&self, signs: BranchSigns) -> u64 {
        BranchSigns::ALL
            .iter()
            .position(|&s| s == signs)
            .map_or(0, |i| self.sign_counts[i])
    }
}

pub fn binomial_std_error(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    counts: [u64; 5],
    sign_counts: [u64; 4],
    index_sum: u128,
    last_hits: u64,
    collapsed: u64,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        for i in 0..5 {
            self.counts[i] += other.counts[i];
        }
        for i in 0..4 {
            self.sign_counts[i] += other.sign_counts[i];
        }
        self.index_sum += other.index_sum;
        self.last_hits += other.last_hits;
        self.collapsed += other.collapsed;
        self
    }
}

/// Runs the ensemble on the current rayon pool.
pub fn run_ensemble(
    config: &TwoStateConfig,
    sampling: &SamplingSpec,
    settings: &IntegratorSettings,
) -> Result<OutcomeStats> {
    config.validate()?;
    sampling.validate()?;
    settings.validate()?;
    let last_index = settings.grid_len() - 1;

    let tally = (0..sampling.n_trajectories)
        .into_par_iter()
        .map(|i| -> Result<Tally> {
            let mut stream = trajectory_stream(sampling.master_seed, i);
            let signs = sample_signs(config.x0, sampling.mode, &mut stream)?;
            let (outcome, index) = match sampling.engine {
                Engine::ClosedForm => {
                    classify_closed_form_indexed(config, signs, settings, sampling.delta)?
                }
                Engine::Rk4 => {
                    let traj = integrate(config, signs, &PhaseModel::default(), settings)?;
                    let outcome = classify(&traj, sampling.delta)?;
                    let index = outcome
                        .reduction_time
                        .and_then(|t| traj.samples.iter().position(|s| s.t == t));
                    (outcome, index)
                }
            };
            let mut t = Tally::default();
            t.counts[outcome.class.index()] = 1;
            if let Some(k) = BranchSigns::ALL.iter().position(|&s| s == signs) {
                t.sign_counts[k] = 1;
            }
            if let Some(idx) = index {
                t.collapsed = 1;
                if idx == last_index {
                    t.last_hits = 1;
                } else {
                    t.index_sum = idx as u128;
                }
            }
            Ok(t)
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;

    let mean_reduction_time = (tally.collapsed > 0).then(|| {
        let total =
            tally.index_sum as f64 * settings.step + tally.last_hits as f64 * settings.t_end;
        total / tally.collapsed as f64
    });
    Ok(OutcomeStats {
        counts: tally.counts,
        sign_counts: tally.sign_counts,
        n_trajectories: sampling.n_trajectories,
        master_seed: sampling.master_seed,
        mode: sampling.mode,
        engine: sampling.engine,
        mean_reduction_time,
    })
}

/// Runs the ensemble on a dedicated pool of `threads` workers (0 = rayon default).
pub fn run_ensemble_with_threads(
    config: &TwoStateConfig,
    sampling: &SamplingSpec,
    settings: &IntegratorSettings,
    threads: usize,
) -> Result<OutcomeStats> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    pool.install(|| run_ensemble(config, sampling, settings))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BornComponent {
    /// `grow_1` or `grow_2`.
    pub event: String,
    pub frequency: f64,
    pub expected: f64,
    pub std_error: f64,
    pub z: f64,
    /// `|z| > 3`.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BornReport {
    pub components: [BornComponent; 2],
}

/// z-scores of the marginal grow frequencies against the Born weights `x0`,
/// using the empirical binomial standard error.
pub fn born_report(stats: &OutcomeStats, x0: [f64; 2]) -> Result<BornReport> {
    let component = |n: usize| -> Result<BornComponent> {
        let event = format!("grow_{}", n + 1);
        let frequency = stats.grow_frequency(n);
        let std_error = stats.grow_std_error(n);
        if !(std_error > 0.0) {
            return Err(Error::ZeroVariance(event));
        }
        let z = (frequency - x0[n]) / std_error;
        Ok(BornComponent { event, frequency, expected: x0[n], std_error, z, flagged: z.abs() > 3.0 })
    };
    Ok(BornReport { components: [component(0)?, component(1)?] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::closed_form_trajectory;
    use crate::model::Sign;
    use proptest::{prelude::any, prop_assert, prop_assert_eq, proptest};

    const PM: BranchSigns = BranchSigns([Sign::Plus, Sign::Minus]);
    const PP: BranchSigns = BranchSigns([Sign::Plus, Sign::Plus]);

    fn p_alpha1_plus(x0: [f64; 2], n: u64, seed: u64) -> f64 {
        let mut hits = 0u64;
        for i in 0..n {
            let mut s = trajectory_stream(seed, i);
            if sample_signs(x0, SamplingMode::Independent, &mut s).unwrap().0[0] == Sign::Plus {
                hits += 1;
            }
        }
        hits as f64 / n as f64
    }

    /// Midpoint quadrature of the indicator `cos(theta/2 - beta) > 0` over
    /// `[0, 2 pi)`, independent of the sampler.
    fn quadrature_p_plus(x0: f64) -> f64 {
        let n = 2_000_000;
        let beta = std::f64::consts::PI * (x0 - 0.5);
        let hits = (0..n)
            .filter(|&k| {
                let theta = (k as f64 + 0.5) / n as f64 * TAU;
                (theta / 2.0 - beta).cos() > 0.0
            })
            .count();
        hits as f64 / n as f64
    }

    #[test]
    fn arc_length_matches_weight() {
        for x in [0.0, 0.1, 0.25, 0.5, 0.7, 0.75, 1.0] {
            assert!((quadrature_p_plus(x) - x).abs() < 1e-6, "x0 = {x}");
        }
    }

    #[test]
    fn sign_sampling_frequencies() {
        let n = 1_000_000;
        let sigma = |p: f64| (p * (1.0 - p) / n as f64).sqrt();
        let p = p_alpha1_plus([0.5, 0.5], n, 1);
        assert!((p - 0.5).abs() < 3.0 * sigma(0.5), "p = {p}");
        let p = p_alpha1_plus([0.75, 0.25], n, 2);
        assert!((p - 0.75).abs() < 3.0 * sigma(0.75), "p = {p}");
        assert_eq!(p_alpha1_plus([1.0, 0.0], 10_000, 3), 1.0);
    }

    #[test]
    fn common_mode_shares_the_phase() {
        // alpha_n = + iff u < x0_n for the shared u
        let mut s = trajectory_stream(9, 0);
        let mut seen = [0u64; 4];
        for _ in 0..20_000 {
            let signs = sample_signs([0.7, 0.3], SamplingMode::CommonChaotic, &mut s).unwrap();
            seen[BranchSigns::ALL.iter().position(|&b| b == signs).unwrap()] += 1;
        }
        // (-,+) needs u < 0.3 and u >= 0.7
        assert_eq!(seen[1], 0);
        assert!(seen.iter().enumerate().all(|(i, &c)| i == 1 || c > 0));
    }

    #[test]
    fn child_seeds_are_distinct() {
        let mut v: Vec<u64> = (0..10_000).map(|i| child_seed(42, i)).collect();
        v.sort_unstable();
        v.dedup();
        assert_eq!(v.len(), 10_000);
        assert_ne!(child_seed(1, 0), child_seed(2, 0));
    }

    #[test]
    fn classify_examples() {
        let c = TwoStateConfig::new([0.5, 0.5], 1.0).unwrap();
        let set = IntegratorSettings::new(1e-2, 20.0).unwrap();
        let traj = closed_form_trajectory(&c, PM, &set).unwrap();
        let out = classify(&traj, DEFAULT_DELTA).unwrap();
        assert_eq!(out.class, OutcomeClass::CollapseTo1);
        let t = out.reduction_time.unwrap();
        assert!(t > 0.0 && t < 20.0);

        let traj = closed_form_trajectory(&c, PP, &set).unwrap();
        let out = classify(&traj, DEFAULT_DELTA).unwrap();
        assert_eq!(out.class, OutcomeClass::BothDecay);
        assert_eq!(out.reduction_time, None);

        let short = IntegratorSettings::new(1e-3, 0.01).unwrap();
        let traj = closed_form_trajectory(&c, PM, &short).unwrap();
        assert_eq!(classify(&traj, DEFAULT_DELTA).unwrap().class, OutcomeClass::Unresolved);

        assert!(classify(&traj, 0.0).is_err());
        assert!(classify(&traj, 0.5).is_err());
    }

    #[test]
    fn bisection_matches_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let x1: f64 = rng.random_range(0.02..0.98);
            let c = TwoStateConfig::new([x1, 1.0 - x1], 1.0).unwrap();
            let set = IntegratorSettings::new(0.05, 30.0).unwrap();
            for signs in BranchSigns::ALL {
                let slow = classify(&closed_form_trajectory(&c, signs, &set).unwrap(), 1e-3).unwrap();
                let fast = classify_closed_form(&c, signs, &set, 1e-3).unwrap();
                assert_eq!(slow, fast);
            }
        }
    }

    #[test]
    fn ensemble_single_trajectory() {
        let c = TwoStateConfig::new([0.5, 0.5], 1.0).unwrap();
        let set = IntegratorSettings::new(1e-2, 30.0).unwrap();
        let stats = run_ensemble(&c, &SamplingSpec::new(SamplingMode::Independent, 1, 0), &set).unwrap();
        assert_eq!(stats.counts.iter().sum::<u64>(), 1);
        assert_eq!(stats.sign_counts.iter().sum::<u64>(), 1);
        assert!(SamplingSpec::new(SamplingMode::Independent, 0, 0).validate().is_err());
    }

    #[test]
    fn ensemble_symmetric_weights() {
        let c = TwoStateConfig::new([0.5, 0.5], 1e-14).unwrap();
        let set = IntegratorSettings::in_tau_units(c.tau_r, 1e-2, 30.0).unwrap();
        let n = 100_000;
        let stats = run_ensemble(&c, &SamplingSpec::new(SamplingMode::Independent, n, 17), &set).unwrap();
        for class in [OutcomeClass::CollapseTo1, OutcomeClass::BothGrow] {
            let f = stats.frequency(class);
            assert!((f - 0.25).abs() < 3.0 * binomial_std_error(0.25, n), "{class}: {f}");
        }
        assert_eq!(stats.count(OutcomeClass::Unresolved), 0);
        assert!(stats.mean_reduction_time.unwrap() > 0.0);
    }

    #[test]
    fn common_mode_matches_expected_law() {
        let x0 = [0.7, 0.3];
        let c = TwoStateConfig::new(x0, 1.0).unwrap();
        let set = IntegratorSettings::new(1e-2, 30.0).unwrap();
        let n = 50_000;
        let stats = run_ensemble(&c, &SamplingSpec::new(SamplingMode::CommonChaotic, n, 3), &set).unwrap();
        let expected = expected_class_probabilities(x0, SamplingMode::CommonChaotic);
        for class in OutcomeClass::ALL {
            let p = expected[class.index()];
            let tol = 4.0 * binomial_std_error(p, n) + 1e-12;
            assert!((stats.frequency(class) - p).abs() <= tol, "{class}");
        }
    }

    #[test]
    fn rk4_engine_agrees_with_closed_form() {
        let c = TwoStateConfig::new([0.6, 0.4], 1.0).unwrap();
        let set = IntegratorSettings::new(1e-2, 30.0).unwrap();
        let spec = SamplingSpec::new(SamplingMode::Independent, 300, 8);
        let a = run_ensemble(&c, &spec, &set).unwrap();
        let b = run_ensemble(&c, &spec.with_engine(Engine::Rk4), &set).unwrap();
        assert_eq!(a.counts, b.counts);
        assert_eq!(a.sign_counts, b.sign_counts);
    }

    #[test]
    fn born_report_cases() {
        let mut stats = OutcomeStats {
            counts: [49, 9, 21, 21, 0],
            sign_counts: [0; 4],
            n_trajectories: 100,
            master_seed: 0,
            mode: SamplingMode::Independent,
            engine: Engine::ClosedForm,
            mean_reduction_time: None,
        };
        let r = born_report(&stats, [0.7, 0.3]).unwrap();
        assert_eq!(r.components[0].z, 0.0);
        assert_eq!(r.components[1].z, 0.0);
        assert!(!r.components[0].flagged);

        let r = born_report(&stats, [0.0, 1.0]).unwrap();
        assert!(r.components[0].z > 10.0 && r.components[0].flagged);

        stats.counts = [100, 0, 0, 0, 0];
        assert!(matches!(born_report(&stats, [1.0, 0.0]), Err(Error::ZeroVariance(_))));
    }

    #[test]
    fn marginal_born_property() {
        let x0 = [0.7, 0.3];
        let c = TwoStateConfig::new(x0, 1.0).unwrap();
        let set = IntegratorSettings::new(1e-2, 30.0).unwrap();
        let stats = run_ensemble(&c, &SamplingSpec::new(SamplingMode::Independent, 100_000, 31), &set).unwrap();
        let report = born_report(&stats, x0).unwrap();
        for comp in &report.components {
            assert!(comp.z.abs() < 4.0, "{comp:?}");
        }
    }

    /// Conditioned on anticorrelated signs, independent phases give
    /// `P(CollapseTo1) = x1^2 / (x1^2 + x2^2)`, not `x1`.
    #[test]
    fn anticorrelated_conditional_is_squared_weight_ratio() {
        let x0 = [0.7, 0.3];
        let c = TwoStateConfig::new(x0, 1.0).unwrap();
        let set = IntegratorSettings::new(1e-2, 30.0).unwrap();
        let stats = run_ensemble(&c, &SamplingSpec::new(SamplingMode::Independent, 100_000, 5), &set).unwrap();
        let (c1, c2) = (stats.count(OutcomeClass::CollapseTo1), stats.count(OutcomeClass::CollapseTo2));
        let n = c1 + c2;
        let p = c1 as f64 / n as f64;
        let expected = 0.49 / (0.49 + 0.09);
        assert!((p - expected).abs() < 4.0 * binomial_std_error(expected, n), "{p}");
        assert!((p - x0[0]).abs() > 20.0 * binomial_std_error(x0[0], n));
    }

    #[test]
    fn classify_closed_form_equals_rk4_for_random_configs() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let set = IntegratorSettings::new(1e-2, 30.0).unwrap();
        for _ in 0..1000 {
            let x1: f64 = rng.random_range(0.01..0.99);
            let c = TwoStateConfig::new([x1, 1.0 - x1], 1.0).unwrap();
            let signs = BranchSigns::ALL[rng.random_range(0..4)];
            let fast = classify_closed_form(&c, signs, &set, DEFAULT_DELTA).unwrap();
            let traj = integrate(&c, signs, &PhaseModel::default(), &set).unwrap();
            let slow = classify(&traj, DEFAULT_DELTA).unwrap();
            assert_eq!(fast.class, slow.class, "x1 = {x1}, signs {signs}");
            match (fast.reduction_time, slow.reduction_time) {
                (Some(a), Some(b)) => assert!((a - b).abs() <= set.step + 1e-12),
                (a, b) => assert_eq!(a, b),
            }
        }
    }

    proptest! {
        #[test]
        fn class_probabilities_form_a_distribution(x1 in 0.0f64..=1.0, common in any::<bool>()) {
            let mode = if common { SamplingMode::CommonChaotic } else { SamplingMode::Independent };
            let p = expected_class_probabilities([x1, 1.0 - x1], mode);
            prop_assert!(p.iter().all(|&v| v >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            // component 1 grows on (+,-) and (+,+)
            let grow_1 = p[OutcomeClass::CollapseTo1.index()] + p[OutcomeClass::BothGrow.index()];
            prop_assert!((grow_1 - x1).abs() < 1e-12);
        }

        #[test]
        fn seeds_reproduce(master in any::<u64>(), index in any::<u64>()) {
            let a: u64 = trajectory_stream(master, index).random();
            let b: u64 = trajectory_stream(master, index).random();
            prop_assert_eq!(a, b);
        }
    }
}

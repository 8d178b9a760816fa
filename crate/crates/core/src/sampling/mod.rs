//! Reputation from randomly sampled archived feedback.
//!
//! Raw feedback is never published. Instead `r` of a ratee's `n` binary scores
//! are drawn at random, their sum `T` is taken, and the published aggregate is
//! derived from `T`. Two aggregates are exposed on [`Estimate`]:
//!
//! * [`Estimate::mean`] = `T / r`, an estimate of the positive fraction `p / n`;
//! * [`Estimate::f_b`] = `T * n / r`, which is often called the average score
//!   but actually estimates the positive *count* `p`.
//!
//! Submodules cover the exact expected error of the estimator
//! ([`accuracy`]), the single-resample privacy-breach experiment
//! ([`breach`]), and publication gating ([`gate`]).

pub mod accuracy;
pub mod breach;
pub mod gate;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use accuracy::{expected_error, min_samples, worst_case_expected_error};
pub use breach::{breach_probability, BreachCase, BreachExperiment, BreachResult};
pub use gate::{ReleaseGate, ScoreHistory};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SamplingError {
    #[error("score set is empty")]
    EmptyScoreSet,
    #[error("positive count {p} exceeds score count {n}")]
    InvalidScoreSet { n: u64, p: u64 },
    #[error("sample size {r} is invalid for {n} scores")]
    InvalidSampleSize { r: u64, n: u64 },
    #[error("target error must be positive")]
    InvalidTarget,
}

/// Binary feedback scores: `n` in total, `p` of them positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScoreSet {
    n: u64,
    p: u64,
}

impl ScoreSet {
    pub fn new(n: u64, p: u64) -> Result<Self, SamplingError> {
        if p > n {
            return Err(SamplingError::InvalidScoreSet { n, p });
        }
        Ok(Self { n, p })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn positive_fraction(&self) -> Option<BigRational> {
        (self.n > 0).then(|| ratio(self.p, self.n))
    }

    /// The set after one more feedback.
    pub fn with_feedback(&self, positive: bool) -> Self {
        Self {
            n: self.n + 1,
            p: self.p + positive as u64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SampleMode {
    /// Independent uniform draws; a score may be drawn repeatedly.
    WithReplacement,
    /// `r` distinct scores.
    WithoutReplacement,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SampleSize {
    Count(u64),
    /// Fraction of `n`, rounded half up.
    Rate(BigRational),
}

impl SampleSize {
    pub fn half() -> Self {
        SampleSize::Rate(ratio(1, 2))
    }

    pub fn resolve(&self, n: u64) -> u64 {
        match self {
            SampleSize::Count(r) => *r,
            SampleSize::Rate(rate) => round_half_up(&(rate * BigInt::from(n))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleConfig {
    pub size: SampleSize,
    pub mode: SampleMode,
    pub seed: u64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            size: SampleSize::half(),
            mode: SampleMode::WithReplacement,
            seed: 0,
        }
    }
}

impl SampleConfig {
    /// Resolve and validate the sample size for `n` scores.
    pub fn sample_size(&self, n: u64) -> Result<u64, SamplingError> {
        let r = self.size.resolve(n);
        let ok = r >= 1 && (self.mode == SampleMode::WithReplacement || r <= n);
        if !ok {
            return Err(SamplingError::InvalidSampleSize { r, n });
        }
        Ok(r)
    }
}

/// Outcome of one sampling round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Estimate {
    /// Positive scores among the sample.
    pub t: u64,
    /// Sample size.
    pub r: u64,
    /// Scores the sample was drawn from.
    pub n: u64,
}

impl Estimate {
    pub fn mean(&self) -> BigRational {
        ratio(self.t, self.r)
    }

    pub fn f_b(&self) -> BigRational {
        ratio(self.t * self.n, self.r)
    }
}

/// Number of positives among `r` uniform draws from `scores`.
pub fn draw_positive_count<R: Rng + ?Sized>(
    rng: &mut R,
    scores: ScoreSet,
    r: u64,
    mode: SampleMode,
) -> u64 {
    match mode {
        SampleMode::WithReplacement => (0..r)
            .filter(|_| rng.gen_range(0..scores.n) < scores.p)
            .count() as u64,
        SampleMode::WithoutReplacement => {
            let (mut left, mut pos_left, mut t) = (scores.n, scores.p, 0);
            for _ in 0..r {
                if rng.gen_range(0..left) < pos_left {
                    pos_left -= 1;
                    t += 1;
                }
                left -= 1;
            }
            t
        }
    }
}

pub fn sample_estimate<R: Rng + ?Sized>(
    scores: ScoreSet,
    cfg: &SampleConfig,
    rng: &mut R,
) -> Result<Estimate, SamplingError> {
    if scores.n == 0 {
        return Err(SamplingError::EmptyScoreSet);
    }
    let r = cfg.sample_size(scores.n)?;
    let t = draw_positive_count(rng, scores, r, cfg.mode);
    Ok(Estimate { t, r, n: scores.n })
}

/// [`sample_estimate`] driven by `cfg.seed`.
pub fn sample_estimate_seeded(
    scores: ScoreSet,
    cfg: &SampleConfig,
) -> Result<Estimate, SamplingError> {
    sample_estimate(scores, cfg, &mut ChaCha8Rng::seed_from_u64(cfg.seed))
}

pub(crate) fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `floor(x + 1/2)` for non-negative `x`.
pub fn round_half_up(x: &BigRational) -> u64 {
    let shifted = x + BigRational::new(1.into(), 2.into());
    let floor = shifted.numer().div_floor(shifted.denom());
    u64::try_from(floor).expect("sample size fits in u64")
}

//! Single-resample privacy breach.
//!
//! An observer sees the sampled mean before and after one new feedback is
//! added. A breach happens when the direction of change reveals the sign of
//! the new feedback: the mean rose after a positive one, or fell after a
//! negative one.
//!
//! Means (`T/r`) are compared rather than `F_B = Tn/r`, because `n` changes
//! between the two observations and `F_B` would drift upward on every new
//! feedback regardless of its sign.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{draw_positive_count, ratio, round_half_up, SampleMode, SamplingError, ScoreSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BreachCase {
    /// A positive feedback was added; breach iff the mean rose.
    PositiveLeft,
    /// A negative feedback was added; breach iff the mean fell.
    NegativeLeft,
}

impl BreachCase {
    pub fn is_positive(self) -> bool {
        self == BreachCase::PositiveLeft
    }

    fn breached(self, before: (u64, u64), after: (u64, u64)) -> bool {
        // t/r vs t'/r' without division
        let lhs = after.0 as u128 * before.1 as u128;
        let rhs = before.0 as u128 * after.1 as u128;
        match self {
            BreachCase::PositiveLeft => lhs > rhs,
            BreachCase::NegativeLeft => lhs < rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BreachExperiment {
    pub scores: ScoreSet,
    pub rate: BigRational,
    pub case: BreachCase,
    pub mode: SampleMode,
    pub trials: u64,
    pub seed: u64,
}

impl BreachExperiment {
    /// Rate 1/2, without replacement.
    pub fn new(scores: ScoreSet, case: BreachCase, trials: u64, seed: u64) -> Self {
        Self {
            scores,
            rate: ratio(1, 2),
            case,
            mode: SampleMode::WithoutReplacement,
            trials,
            seed,
        }
    }

    /// Sample sizes before and after the new feedback.
    pub fn sample_sizes(&self) -> (u64, u64) {
        let n = self.scores.n();
        (
            round_half_up(&(&self.rate * BigInt::from(n))),
            round_half_up(&(&self.rate * BigInt::from(n + 1))),
        )
    }

    fn after(&self) -> ScoreSet {
        self.scores.with_feedback(self.case.is_positive())
    }

    fn validate(&self) -> Result<(u64, u64), SamplingError> {
        let n = self.scores.n();
        if n == 0 {
            return Err(SamplingError::EmptyScoreSet);
        }
        let (r, r_after) = self.sample_sizes();
        let fits = self.mode == SampleMode::WithReplacement || r <= n;
        if r == 0 || !fits {
            return Err(SamplingError::InvalidSampleSize { r, n });
        }
        if self.trials == 0 {
            return Err(SamplingError::InvalidSampleSize { r: 0, n });
        }
        Ok((r, r_after))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BreachResult {
    pub probability: f64,
    pub breaches: u64,
    pub trials: u64,
    /// `1.96 * sqrt(p(1-p) / trials)`.
    pub ci95_halfwidth: f64,
    pub r: u64,
    pub r_after: u64,
}

impl BreachResult {
    pub fn contains(&self, value: f64) -> bool {
        (self.probability - value).abs() <= self.ci95_halfwidth
    }
}

/// Monte-Carlo breach probability.
///
/// Trial `i` uses stream `i` of a ChaCha8 generator seeded with `exp.seed`,
/// so the result is bit-identical across runs and thread counts.
pub fn breach_probability(exp: &BreachExperiment) -> Result<BreachResult, SamplingError> {
    let (r, r_after) = exp.validate()?;
    let before = exp.scores;
    let after = exp.after();
    let breaches: u64 = (0..exp.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(exp.seed);
            rng.set_stream(i);
            let t = draw_positive_count(&mut rng, before, r, exp.mode);
            let t_after = draw_positive_count(&mut rng, after, r_after, exp.mode);
            exp.case.breached((t, r), (t_after, r_after)) as u64
        })
        .sum();
    let p = breaches as f64 / exp.trials as f64;
    Ok(BreachResult {
        probability: p,
        breaches,
        trials: exp.trials,
        ci95_halfwidth: 1.96 * (p * (1.0 - p) / exp.trials as f64).sqrt(),
        r,
        r_after,
    })
}

/// Distribution of the positive count among `r` draws, exactly.
fn count_distribution(scores: ScoreSet, r: u64, mode: SampleMode) -> Vec<BigRational> {
    let (n, p) = (scores.n(), scores.p());
    let mut out = vec![BigRational::zero(); r as usize + 1];
    match mode {
        SampleMode::WithReplacement => {
            let q = ratio(p, n);
            let nq = BigRational::one() - &q;
            let mut binom = BigInt::one();
            for (t, slot) in out.iter_mut().enumerate() {
                let t = t as u64;
                if t > 0 {
                    binom = binom * BigInt::from(r - t + 1) / BigInt::from(t);
                }
                *slot = BigRational::from(binom.clone())
                    * num_traits::pow(q.clone(), t as usize)
                    * num_traits::pow(nq.clone(), (r - t) as usize);
            }
        }
        SampleMode::WithoutReplacement => {
            let total = choose(n, r);
            for (t, slot) in out.iter_mut().enumerate() {
                let t = t as u64;
                if t <= p && r - t <= n - p {
                    *slot = BigRational::new(choose(p, t) * choose(n - p, r - t), total.clone());
                }
            }
        }
    }
    out
}

fn choose(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    (0..k).fold(BigInt::one(), |acc, j| {
        acc * BigInt::from(n - j) / BigInt::from(j + 1)
    })
}

/// Exact breach probability of the experiment (ignores `trials` and `seed`).
pub fn exact_breach_probability(exp: &BreachExperiment) -> Result<BigRational, SamplingError> {
    let (r, r_after) = exp.validate()?;
    let before = count_distribution(exp.scores, r, exp.mode);
    let after = count_distribution(exp.after(), r_after, exp.mode);
    let mut total = BigRational::zero();
    for (t, pb) in before.iter().enumerate() {
        if pb.is_zero() {
            continue;
        }
        for (t2, pa) in after.iter().enumerate() {
            if exp.case.breached((t as u64, r), (t2 as u64, r_after)) {
                total += pb * pa;
            }
        }
    }
    Ok(total)
}

/// Breach probability for `n = 2, 4, ..., 20` with `p = n/2`, negative feedback added.
pub fn small_n_rows(trials: u64, seed: u64) -> Vec<(u64, BreachResult)> {
    (1..=10)
        .map(|k| {
            let n = 2 * k;
            let exp = BreachExperiment::new(
                ScoreSet::new(n, k).expect("p <= n"),
                BreachCase::NegativeLeft,
                trials,
                seed,
            );
            (n, breach_probability(&exp).expect("valid preset"))
        })
        .collect()
}

/// Breach probability for `n = 100`, `p = 95..=100`, negative feedback added.
pub fn high_p_rows(trials: u64, seed: u64) -> Vec<(u64, BreachResult)> {
    (95..=100)
        .map(|p| {
            let exp = BreachExperiment::new(
                ScoreSet::new(100, p).expect("p <= n"),
                BreachCase::NegativeLeft,
                trials,
                seed,
            );
            (p, breach_probability(&exp).expect("valid preset"))
        })
        .collect()
}

/// CSV with columns `key_name,probability,ci`.
pub fn rows_to_csv(key_name: &str, rows: &[(u64, BreachResult)]) -> String {
    let mut out = format!("{key_name},probability,ci\n");
    for (k, res) in rows {
        writeln!(out, "{k},{:.6},{:.6}", res.probability, res.ci95_halfwidth)
            .expect("write to String");
    }
    out
}

/// Convenience for printing exact values.
pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Enumerates every ordered draw sequence of both samples.
    fn brute_force(n: u64, p: u64, case: BreachCase, mode: SampleMode) -> BigRational {
        fn sequences(n: u64, r: u64, distinct: bool) -> Vec<Vec<u64>> {
            let mut out = vec![vec![]];
            for _ in 0..r {
                let mut next = Vec::new();
                for s in &out {
                    for x in 0..n {
                        if !(distinct && s.contains(&x)) {
                            let mut s2 = s.clone();
                            s2.push(x);
                            next.push(s2);
                        }
                    }
                }
                out = next;
            }
            out
        }
        let distinct = mode == SampleMode::WithoutReplacement;
        let r = n.div_ceil(2);
        let r2 = (n + 2) / 2;
        let p2 = p + case.is_positive() as u64;
        let a = sequences(n, r, distinct);
        let b = sequences(n + 1, r2, distinct);
        let mut hits = 0u64;
        for s in &a {
            let t = s.iter().filter(|&&x| x < p).count() as u64;
            for s2 in &b {
                let t2 = s2.iter().filter(|&&x| x < p2).count() as u64;
                hits += case.breached((t, r), (t2, r2)) as u64;
            }
        }
        BigRational::new(
            BigInt::from(hits),
            BigInt::from(a.len() as u64 * b.len() as u64),
        )
    }

    #[test]
    fn exact_matches_brute_force() {
        for (n, p) in [(2, 1), (3, 1), (4, 2), (5, 4)] {
            for case in [BreachCase::PositiveLeft, BreachCase::NegativeLeft] {
                for mode in [SampleMode::WithReplacement, SampleMode::WithoutReplacement] {
                    let mut exp = BreachExperiment::new(ScoreSet::new(n, p).unwrap(), case, 1, 0);
                    exp.mode = mode;
                    assert_eq!(
                        exact_breach_probability(&exp).unwrap(),
                        brute_force(n, p, case, mode),
                        "{n} {p} {case:?} {mode:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn uniform_positive_cases() {
        let s = ScoreSet::new(100, 100).unwrap();
        let pos = BreachExperiment::new(s, BreachCase::PositiveLeft, 2000, 3);
        assert_eq!(breach_probability(&pos).unwrap().breaches, 0);
        let neg = BreachExperiment::new(s, BreachCase::NegativeLeft, 1, 3);
        assert_eq!(neg.sample_sizes(), (50, 51));
        assert_eq!(exact_breach_probability(&neg).unwrap(), ratio(51, 101));
    }

    #[test]
    fn seeded_runs_are_identical() {
        let exp = BreachExperiment::new(
            ScoreSet::new(10, 4).unwrap(),
            BreachCase::NegativeLeft,
            5000,
            11,
        );
        assert_eq!(
            breach_probability(&exp).unwrap(),
            breach_probability(&exp).unwrap()
        );
        let mut other = exp.clone();
        other.seed = 12;
        assert_ne!(
            breach_probability(&exp).unwrap().breaches,
            breach_probability(&other).unwrap().breaches
        );
    }

    #[test]
    fn monte_carlo_near_exact() {
        let exp = BreachExperiment::new(
            ScoreSet::new(6, 3).unwrap(),
            BreachCase::PositiveLeft,
            40_000,
            1,
        );
        let mc = breach_probability(&exp).unwrap();
        let exact = to_f64(&exact_breach_probability(&exp).unwrap());
        assert!(
            (mc.probability - exact).abs() < 2.0 * mc.ci95_halfwidth,
            "{} vs {exact}",
            mc.probability
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let empty = BreachExperiment::new(
            ScoreSet::new(0, 0).unwrap(),
            BreachCase::PositiveLeft,
            10,
            0,
        );
        assert_eq!(
            breach_probability(&empty),
            Err(SamplingError::EmptyScoreSet)
        );
        let no_trials =
            BreachExperiment::new(ScoreSet::new(4, 2).unwrap(), BreachCase::PositiveLeft, 0, 0);
        assert!(breach_probability(&no_trials).is_err());
    }

    #[test]
    fn csv_shape() {
        let rows = high_p_rows(200, 0);
        let csv = rows_to_csv("p", &rows);
        assert!(csv.starts_with("p,probability,ci\n95,"));
        assert_eq!(csv.lines().count(), 7);
    }
}

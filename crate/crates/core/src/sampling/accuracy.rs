//! Expected absolute error of the sampled mean.
//!
//! With `r` independent draws from scores with positive fraction `q = p/n`,
//! `T ~ Binomial(r, q)` and
//!
//! ```text
//! E|T/r - q| = sum_{i=0}^{r} |i/r - q| * C(r,i) * q^i * (1-q)^(r-i)
//! ```
//!
//! The error depends on `p/n` only and is largest at `q = 1/2`, so the sample
//! size needed for a given worst-case error does not grow with `n`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{draw_positive_count, ratio, SampleMode, SamplingError, ScoreSet};

/// Exact value of the binomial expected-error sum.
pub fn expected_error(n: u64, p: u64, r: u64) -> BigRational {
    assert!(
        p <= n && n > 0 && r >= 1,
        "expected_error needs 0 <= p <= n, n >= 1, r >= 1"
    );
    // Scale every term by r * n^(r+1):
    //   |i*n - p*r| * C(r,i) * p^i * (n-p)^(r-i)
    let (nb, pb, qb) = (BigInt::from(n), BigInt::from(p), BigInt::from(n - p));
    let mut binom = BigInt::one();
    let mut total = BigInt::zero();
    let p_pows = powers(&pb, r);
    let q_pows = powers(&qb, r);
    for i in 0..=r {
        if i > 0 {
            binom = binom * BigInt::from(r - i + 1) / BigInt::from(i);
        }
        let dist = (BigInt::from(i) * &nb - &pb * BigInt::from(r)).abs();
        total += dist * &binom * &p_pows[i as usize] * &q_pows[(r - i) as usize];
    }
    let denom = BigInt::from(r) * num_traits::pow(nb, (r + 1) as usize);
    BigRational::new(total, denom)
}

fn powers(base: &BigInt, up_to: u64) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(up_to as usize + 1);
    let mut acc = BigInt::one();
    out.push(acc.clone());
    for _ in 0..up_to {
        acc *= base;
        out.push(acc.clone());
    }
    out
}

/// Expected error at `p/n = 1/2`.
///
/// Uses de Moivre's closed form for the mean absolute deviation of a binomial,
/// `E|X - r/2| = 2 (k+1) C(r, k+1) / 2^(r+1)` with `k = floor(r/2)`, which
/// agrees exactly with `expected_error(2, 1, r)` and costs O(r) instead of O(r^2).
pub fn worst_case_expected_error(r: u64) -> BigRational {
    assert!(r >= 1, "r must be at least 1");
    let k = r / 2;
    let mut binom = BigInt::one();
    for j in 0..(k + 1) {
        binom = binom * BigInt::from(r - j) / BigInt::from(j + 1);
    }
    let num = BigInt::from(2 * (k + 1)) * binom;
    let den = BigInt::from(r) * (BigInt::one() << (r + 1) as usize);
    BigRational::new(num, den)
}

/// Smallest `r` whose worst-case expected error is at most `target`.
pub fn min_samples(target: &BigRational) -> Result<u64, SamplingError> {
    if !target.is_positive() {
        return Err(SamplingError::InvalidTarget);
    }
    let mut r = 1;
    while &worst_case_expected_error(r) > target {
        r += 1;
    }
    Ok(r)
}

/// Monte-Carlo mean of `|T/r - p/n|` with its standard error.
///
/// Trial `i` draws from its own ChaCha stream, so the result does not depend
/// on how rayon schedules the work.
pub fn monte_carlo_error(scores: ScoreSet, r: u64, trials: u64, seed: u64) -> (f64, f64) {
    let q = ratio(scores.p(), scores.n()).to_f64().unwrap_or(0.0);
    let (sum, sum_sq) = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let t = draw_positive_count(&mut rng, scores, r, SampleMode::WithReplacement);
            let e = (t as f64 / r as f64 - q).abs();
            (e, e * e)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = trials as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

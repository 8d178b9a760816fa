//! When a sampled score may be published.
//!
//! Two rules: nothing is published until a ratee has `min_scores` feedbacks,
//! and a ratee whose positive fraction is above `high_positive_threshold` is
//! re-published only after `high_positive_hold` new feedbacks. Near-uniform
//! positive histories are where one new negative is easiest to spot.

use num_rational::BigRational;

use super::{ratio, ScoreSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReleaseGate {
    pub min_scores: u64,
    pub high_positive_threshold: BigRational,
    pub high_positive_hold: u64,
}

impl Default for ReleaseGate {
    fn default() -> Self {
        Self {
            min_scores: 5,
            high_positive_threshold: ratio(95, 100),
            high_positive_hold: 3,
        }
    }
}

/// A ratee's current scores plus the `n` at the last publication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoreHistory {
    pub scores: ScoreSet,
    pub published_at: Option<u64>,
}

impl ScoreHistory {
    pub fn new() -> Self {
        Self {
            scores: ScoreSet::new(0, 0).expect("empty set"),
            published_at: None,
        }
    }

    pub fn record(&mut self, positive: bool) {
        self.scores = self.scores.with_feedback(positive);
    }

    pub fn mark_published(&mut self) {
        self.published_at = Some(self.scores.n());
    }

    pub fn since_publication(&self) -> u64 {
        self.scores.n() - self.published_at.unwrap_or(0)
    }
}

impl Default for ScoreHistory {
    fn default() -> Self {
        Self::new()
    }
}

impl ReleaseGate {
    pub fn allows(&self, history: &ScoreHistory) -> bool {
        let n = history.scores.n();
        if n == 0 || n < self.min_scores {
            return false;
        }
        if ratio(history.scores.p(), n) > self.high_positive_threshold {
            return history.since_publication() >= self.high_positive_hold;
        }
        true
    }
}

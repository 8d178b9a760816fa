//! Two-player feedback games.
//!
//! After a transaction the buyer (Alice, row player) and the seller (Bob,
//! column player) each choose a positive or negative feedback for the other.
//! Each player is described by three non-negative utilities:
//!
//! * `delta`: value of receiving a positive feedback (and the loss from a
//!   negative one),
//! * `f`: satisfaction from giving the feedback they believe is correct,
//! * `r`: satisfaction from answering a negative feedback with a negative one.
//!
//! with the standing assumption `r + f < delta`. Every payoff follows one rule:
//!
//! ```text
//! u(own, other) = delta * sign(other) + f * [own == wanted] + r * [own == N && other == N]
//! ```
//!
//! The wanted actions of both players select one of four games (P-P, P-N,
//! N-P, N-N). Payoffs are exact rationals so that equilibrium enumeration and
//! backward induction never depend on a floating-point tolerance.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

/// Exact payoff value.
pub type Payoff = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("utility {name} must be non-negative")]
    NegativeUtility { name: &'static str },
    #[error("revenge plus altruism must stay below the reputation utility (r + f < delta)")]
    RevengeTooStrong,
    #[error("exact payoff tie: {0}")]
    Tie(&'static str),
    #[error("players are in different revenge/altruism regimes; no named class applies")]
    MixedRegime,
}

/// Binary feedback.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeedbackAction {
    P,
    N,
}

impl FeedbackAction {
    pub const ALL: [FeedbackAction; 2] = [FeedbackAction::P, FeedbackAction::N];

    pub fn sign(self) -> i32 {
        match self {
            FeedbackAction::P => 1,
            FeedbackAction::N => -1,
        }
    }

    pub fn index(self) -> usize {
        match self {
            FeedbackAction::P => 0,
            FeedbackAction::N => 1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            FeedbackAction::P => FeedbackAction::N,
            FeedbackAction::N => FeedbackAction::P,
        }
    }

    pub fn is_positive(self) -> bool {
        self == FeedbackAction::P
    }
}

impl fmt::Display for FeedbackAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeedbackAction::P => "P",
            FeedbackAction::N => "N",
        })
    }
}

impl std::str::FromStr for FeedbackAction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "P" | "p" => Ok(FeedbackAction::P),
            "N" | "n" => Ok(FeedbackAction::N),
            other => Err(format!("feedback must be P or N, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    Alice,
    Bob,
}

impl Player {
    pub fn other(self) -> Self {
        match self {
            Player::Alice => Player::Bob,
            Player::Bob => Player::Alice,
        }
    }
}

impl std::str::FromStr for Player {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" | "a" | "alice" | "Alice" => Ok(Player::Alice),
            "B" | "b" | "bob" | "Bob" => Ok(Player::Bob),
            other => Err(format!("player must be A or B, got {other:?}")),
        }
    }
}

/// `(alice_action, bob_action)`.
pub type Profile = (FeedbackAction, FeedbackAction);

/// Utilities of one player. Construction enforces non-negativity and `r + f < delta`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayerParams {
    delta: Payoff,
    f: Payoff,
    r: Payoff,
}

impl PlayerParams {
    pub fn new(delta: Payoff, f: Payoff, r: Payoff) -> Result<Self, GameError> {
        for (name, v) in [("delta", &delta), ("f", &f), ("r", &r)] {
            if v.is_negative() {
                return Err(GameError::NegativeUtility { name });
            }
        }
        if &r + &f >= delta {
            return Err(GameError::RevengeTooStrong);
        }
        Ok(Self { delta, f, r })
    }

    /// Convenience constructor for integer utilities.
    pub fn from_ints(delta: i64, f: i64, r: i64) -> Result<Self, GameError> {
        Self::new(int(delta), int(f), int(r))
    }

    pub fn delta(&self) -> &Payoff {
        &self.delta
    }

    pub fn f(&self) -> &Payoff {
        &self.f
    }

    pub fn r(&self) -> &Payoff {
        &self.r
    }

    /// Multiply every utility by a positive factor.
    pub fn scaled(&self, factor: &Payoff) -> Result<Self, GameError> {
        Self::new(&self.delta * factor, &self.f * factor, &self.r * factor)
    }

    fn revenge_dominates(&self) -> Result<bool, GameError> {
        if self.r == self.f {
            Err(GameError::Tie("r = f"))
        } else {
            Ok(self.r > self.f)
        }
    }
}

pub(crate) fn int(v: i64) -> Payoff {
    BigRational::from_integer(BigInt::from(v))
}

/// Payoff of a player who wants to give `wanted`, plays `own`, and receives `other`.
pub fn payoff(
    params: &PlayerParams,
    wanted: FeedbackAction,
    own: FeedbackAction,
    other: FeedbackAction,
) -> Payoff {
    let mut u = if other.is_positive() {
        params.delta.clone()
    } else {
        -params.delta.clone()
    };
    if own == wanted {
        u += &params.f;
    }
    if own == FeedbackAction::N && other == FeedbackAction::N {
        u += &params.r;
    }
    u
}

/// One of the four feedback games.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameSpec {
    pub wanted_a: FeedbackAction,
    pub wanted_b: FeedbackAction,
    pub params_a: PlayerParams,
    pub params_b: PlayerParams,
}

impl GameSpec {
    pub fn new(
        wanted_a: FeedbackAction,
        wanted_b: FeedbackAction,
        params_a: PlayerParams,
        params_b: PlayerParams,
    ) -> Self {
        Self {
            wanted_a,
            wanted_b,
            params_a,
            params_b,
        }
    }

    /// Both players share the same utilities.
    pub fn symmetric(
        wanted_a: FeedbackAction,
        wanted_b: FeedbackAction,
        params: PlayerParams,
    ) -> Self {
        Self::new(wanted_a, wanted_b, params.clone(), params)
    }

    pub fn wanted(&self, player: Player) -> FeedbackAction {
        match player {
            Player::Alice => self.wanted_a,
            Player::Bob => self.wanted_b,
        }
    }

    pub fn params(&self, player: Player) -> &PlayerParams {
        match player {
            Player::Alice => &self.params_a,
            Player::Bob => &self.params_b,
        }
    }

    pub fn scaled(&self, factor: &Payoff) -> Result<Self, GameError> {
        Ok(Self::new(
            self.wanted_a,
            self.wanted_b,
            self.params_a.scaled(factor)?,
            self.params_b.scaled(factor)?,
        ))
    }

    /// Payoff of `player` under `profile`.
    pub fn utility(&self, player: Player, profile: Profile) -> Payoff {
        let (a, b) = profile;
        match player {
            Player::Alice => payoff(&self.params_a, self.wanted_a, a, b),
            Player::Bob => payoff(&self.params_b, self.wanted_b, b, a),
        }
    }
}

/// 2x2 bimatrix indexed by `[alice_action][bob_action]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PayoffMatrix {
    pub entries: [[(Payoff, Payoff); 2]; 2],
}

impl PayoffMatrix {
    pub fn get(&self, profile: Profile) -> &(Payoff, Payoff) {
        &self.entries[profile.0.index()][profile.1.index()]
    }

    /// Rows are Alice's action, columns Bob's, each cell `uA;uB`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(",P,N\n");
        for a in FeedbackAction::ALL {
            out.push_str(&a.to_string());
            for b in FeedbackAction::ALL {
                let (ua, ub) = self.get((a, b));
                out.push_str(&format!(",{ua};{ub}"));
            }
            out.push('\n');
        }
        out
    }
}

pub fn build_matrix(spec: &GameSpec) -> PayoffMatrix {
    let cell = |a, b| {
        (
            spec.utility(Player::Alice, (a, b)),
            spec.utility(Player::Bob, (a, b)),
        )
    };
    use FeedbackAction::{N, P};
    PayoffMatrix {
        entries: [[cell(P, P), cell(P, N)], [cell(N, P), cell(N, N)]],
    }
}

/// Pure-strategy Nash equilibria. Ties count as best responses.
pub fn pure_nash(matrix: &PayoffMatrix) -> Vec<Profile> {
    let mut out = Vec::new();
    for a in FeedbackAction::ALL {
        for b in FeedbackAction::ALL {
            let (ua, ub) = matrix.get((a, b));
            let alice_ok = ua >= &matrix.get((a.flip(), b)).0;
            let bob_ok = ub >= &matrix.get((a, b.flip())).1;
            if alice_ok && bob_ok {
                out.push((a, b));
            }
        }
    }
    out
}

/// Whether `action` strictly dominates its alternative for `player`.
pub fn strictly_dominant(matrix: &PayoffMatrix, player: Player, action: FeedbackAction) -> bool {
    FeedbackAction::ALL.iter().all(|&other| match player {
        Player::Alice => matrix.get((action, other)).0 > matrix.get((action.flip(), other)).0,
        Player::Bob => matrix.get((other, action)).1 > matrix.get((other, action.flip())).1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameClass {
    StrictCooperation,
    StagHunt,
    OneSidedDominance,
    PrisonersDilemma,
}

pub fn classify(spec: &GameSpec) -> Result<GameClass, GameError> {
    let revenge_a = spec.params_a.revenge_dominates()?;
    let revenge_b = spec.params_b.revenge_dominates()?;
    use FeedbackAction::{N, P};
    match (spec.wanted_a, spec.wanted_b) {
        (P, P) => match (revenge_a, revenge_b) {
            (false, false) => Ok(GameClass::StrictCooperation),
            (true, true) => Ok(GameClass::StagHunt),
            _ => Err(GameError::MixedRegime),
        },
        (N, N) => Ok(GameClass::PrisonersDilemma),
        _ => Ok(GameClass::OneSidedDominance),
    }
}

/// Best response of `responder` to the first mover's `first_action`.
fn best_response(
    spec: &GameSpec,
    responder: Player,
    first_action: FeedbackAction,
) -> Result<FeedbackAction, GameError> {
    let profile = |own: FeedbackAction| match responder {
        Player::Alice => (own, first_action),
        Player::Bob => (first_action, own),
    };
    let up = spec.utility(responder, profile(FeedbackAction::P));
    let un = spec.utility(responder, profile(FeedbackAction::N));
    if up == un {
        return Err(GameError::Tie("second mover is indifferent"));
    }
    Ok(if up > un {
        FeedbackAction::P
    } else {
        FeedbackAction::N
    })
}

fn profile_for(
    first: Player,
    first_action: FeedbackAction,
    second_action: FeedbackAction,
) -> Profile {
    match first {
        Player::Alice => (first_action, second_action),
        Player::Bob => (second_action, first_action),
    }
}

/// Subgame-perfect outcome when `first_mover` reveals their feedback before
/// the other player chooses.
pub fn sequential_spe(spec: &GameSpec, first_mover: Player) -> Result<Profile, GameError> {
    let second = first_mover.other();
    let mut best: Option<(Payoff, Profile)> = None;
    let mut tied = false;
    for first_action in FeedbackAction::ALL {
        let reply = best_response(spec, second, first_action)?;
        let profile = profile_for(first_mover, first_action, reply);
        let u = spec.utility(first_mover, profile);
        match &best {
            Some((bu, _)) if *bu == u => tied = true,
            Some((bu, _)) if *bu > u => {}
            _ => {
                best = Some((u, profile));
                tied = false;
            }
        }
    }
    if tied {
        return Err(GameError::Tie("first mover is indifferent"));
    }
    Ok(best.expect("two candidate actions").1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtortionReport {
    pub extorted: bool,
    /// The feedback the first mover believes is deserved.
    pub honest_action: FeedbackAction,
    /// The first mover's action in the subgame-perfect outcome.
    pub spe_action: FeedbackAction,
    pub spe_profile: Profile,
    /// First-mover payoff when both players give their wanted feedback,
    /// minus the first-mover payoff in the subgame-perfect outcome.
    pub payoff_loss: Payoff,
}

pub fn extortion_analysis(
    spec: &GameSpec,
    first_mover: Player,
) -> Result<ExtortionReport, GameError> {
    let spe = sequential_spe(spec, first_mover)?;
    let honest_action = spec.wanted(first_mover);
    let spe_action = match first_mover {
        Player::Alice => spe.0,
        Player::Bob => spe.1,
    };
    let honest_profile = (spec.wanted_a, spec.wanted_b);
    let payoff_loss = spec.utility(first_mover, honest_profile) - spec.utility(first_mover, spe);
    Ok(ExtortionReport {
        extorted: spe_action != honest_action && honest_action == FeedbackAction::N,
        honest_action,
        spe_action,
        spe_profile: spe,
        payoff_loss,
    })
}

/// `(P,P)` gives both players strictly more than `(N,N)`.
pub fn pareto_dominates(matrix: &PayoffMatrix, better: Profile, worse: Profile) -> bool {
    let (ba, bb) = matrix.get(better);
    let (wa, wb) = matrix.get(worse);
    ba > wa && bb > wb
}

pub fn format_profile(profile: Profile) -> String {
    format!("({},{})", profile.0, profile.1)
}

/// Parse a rational like `5`, `-3`, `7/2`, or `0.25`.
pub fn parse_payoff(s: &str) -> Result<Payoff, String> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|e| format!("{s}: {e}"))?;
        let den: BigInt = den.trim().parse().map_err(|e| format!("{s}: {e}"))?;
        if den.is_zero() {
            return Err(format!("{s}: zero denominator"));
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let digits = format!("{whole}{frac}");
        let num: BigInt = digits.parse().map_err(|e| format!("{s}: {e}"))?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(BigRational::new(num, den));
    }
    let v: BigInt = s.parse().map_err(|e| format!("{s}: {e}"))?;
    Ok(BigRational::from_integer(v))
}

//! Checks any party can run against the board.

use num_bigint::BigUint;

use super::board::Board;
use super::messages::{rating_context, PublishedRating, ReputationStatement};
use super::user::User;
use crate::crypto::PublicKey;
use crate::zkp::{verify_bit, verify_mul, Crs};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatingVerdict {
    pub ratee_token: BigUint,
    /// `None` when accepted, otherwise the first failed check.
    pub failure: Option<&'static str>,
}

impl RatingVerdict {
    pub fn accepted(&self) -> bool {
        self.failure.is_none()
    }
}

/// Public checks on one published rating: the commitment it uses is the
/// one posted earlier, `c` encrypts a bit, and `e_zb` encrypts `z b`.
pub fn verify_published_rating(
    pk: &PublicKey,
    crs: &Crs,
    board: &Board,
    rating: &PublishedRating,
) -> Result<(), &'static str> {
    let commit = board
        .commitment(&rating.ratee_token)
        .ok_or("no commitment")?;
    if commit.c != rating.c || commit.bit_proof != rating.bit_proof || commit.ratee != rating.ratee
    {
        return Err("commitment mismatch");
    }
    let ctx = rating_context(&rating.ratee_token);
    if !verify_bit(pk, crs, &ctx, &rating.c, &rating.bit_proof) {
        return Err("bit proof");
    }
    if !verify_mul(pk, crs, &ctx, &rating.statement(), &rating.proof) {
        return Err("multiplication proof");
    }
    Ok(())
}

/// What `user` checks after its transactions settle.
///
/// * Its own ratings are on the board with `E(z)` exactly as submitted.
/// * A rating about it exists whenever the counterparty signaled one.
/// * Every rating it touches passes [`verify_published_rating`].
pub fn verify_ratings(user: &User, board: &Board) -> Vec<RatingVerdict> {
    let Ok((pk, crs)) = board.params() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for t in user.transactions().values() {
        if let (Some(e_z), Some(peer_token)) = (&t.submitted, &t.peer_token) {
            let failure = match board.rating(peer_token) {
                None => Some("own rating suppressed"),
                Some(r) if &r.e_z != e_z => Some("own rating modified"),
                Some(r) => verify_published_rating(pk, crs, board, r).err(),
            };
            out.push(RatingVerdict {
                ratee_token: peer_token.clone(),
                failure,
            });
        }
        if t.peer_signaled {
            let failure = match board.rating(&t.own_token) {
                None => Some("rating about self suppressed"),
                Some(r) => verify_published_rating(pk, crs, board, r).err(),
            };
            out.push(RatingVerdict {
                ratee_token: t.own_token.clone(),
                failure,
            });
        }
    }
    out
}

/// Re-encrypt both openings and compare with the products of the board's
/// ciphertexts for the ratee. The statement must cover exactly the board's
/// ratings, in board order.
pub fn verify_reputation(
    pk: &PublicKey,
    board: &Board,
    stmt: &ReputationStatement,
) -> Result<(), &'static str> {
    let ratings = board.ratings_for(stmt.ratee);
    if ratings.len() != stmt.contributing.len()
        || ratings
            .iter()
            .zip(&stmt.contributing)
            .any(|(r, t)| &r.ratee_token != t)
    {
        return Err("contributing set differs from the board");
    }
    let matches = |x: &BigUint, r: &BigUint, product| match (pk.encrypt(x, r), product) {
        (Ok(c), Ok(p)) => c == p,
        _ => false,
    };
    if !matches(&stmt.s, &stmt.r_s, pk.sum(ratings.iter().map(|r| &r.e_zb))) {
        return Err("score opening");
    }
    if !matches(
        &stmt.sample_count,
        &stmt.r_count,
        pk.sum(ratings.iter().map(|r| &r.c)),
    ) {
        return Err("sample count opening");
    }
    Ok(())
}

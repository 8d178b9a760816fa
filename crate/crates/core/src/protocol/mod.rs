//! Two-provider reputation protocol.
//!
//! * SP1 holds the only decryption key. It learns ratings and ratees but
//!   never raters.
//! * SP2 escrows encrypted ratings per transaction, decides which ratings
//!   are sampled, and learns who rated whom but never a rating.
//! * The board is a public bulletin that everyone reads.
//!
//! A transaction is named by a joint token `g^(r_A r_B)` that only its two
//! parties can compute. Each party sends SP2 an encrypted rating `E(z)` with
//! its share of a multiplication proof. Once both directions are in, SP2
//! commits to a sampling bit `b` per rating on the board, computes `E(z b)`,
//! and obtains the last proof component from SP1. Reputation is the
//! decrypted product of the `E(z b)` of a ratee, published with its
//! randomness so anyone can re-encrypt and compare.

pub mod audit;
pub mod board;
pub mod demo;
pub mod group;
pub mod messages;
pub mod sp1;
pub mod sp2;
pub mod user;
pub mod verify;

use thiserror::Error;

use crate::crypto::CryptoError;
use crate::transport::{CodecError, StoreError, TransportError};
use crate::zkp::ZkpError;

pub use board::Board;
pub use demo::{run_demo, DemoConfig, DemoOutcome, Tamper, Verdict, VerdictRow};
pub use group::{token_issue, GroupParams, TokenPair};
pub use messages::{
    rating_context, Commitment, Message, PublishedRating, RatingSubmission, ReputationStatement,
};
pub use sp1::Sp1;
pub use sp2::{SamplingRule, Sp2};
pub use user::User;
pub use verify::{verify_published_rating, verify_ratings, verify_reputation, RatingVerdict};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("exponent is zero modulo the group order")]
    DegenerateExponent,
    #[error("unknown transaction")]
    UnknownTransaction,
    #[error("rating already submitted")]
    DuplicateSubmission,
    #[error("submissions in one bucket do not pair up")]
    MismatchedBucket,
    #[error("bucket does not hold both directions")]
    IncompleteBucket,
    #[error("finalize failed: {0}")]
    FinalizeFailure(String),
    #[error("release gate closed")]
    GateClosed,
    #[error("decryption failed")]
    DecryptionFailure,
    #[error("unexpected `{kind}` message from {from}")]
    UnexpectedMessage { kind: String, from: String },
    #[error("public parameters not yet on the board")]
    NotSetUp,
    #[error(transparent)]
    Zkp(#[from] ZkpError),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error("codec: {0}")]
    Codec(String),
    #[error("transport: {0}")]
    Transport(String),
    #[error("store: {0}")]
    Store(String),
}

impl From<CodecError> for ProtocolError {
    fn from(e: CodecError) -> Self {
        ProtocolError::Codec(e.to_string())
    }
}

impl From<TransportError> for ProtocolError {
    fn from(e: TransportError) -> Self {
        ProtocolError::Transport(e.to_string())
    }
}

impl From<StoreError> for ProtocolError {
    fn from(e: StoreError) -> Self {
        ProtocolError::Store(e.to_string())
    }
}

/// A message a role wants sent.
pub type Outbound = (crate::transport::Role, Message);

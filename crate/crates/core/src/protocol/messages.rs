//! Wire messages. Every message encodes as its kind tag followed by its
//! fields in declaration order.

use num_bigint::BigUint;

use crate::crypto::{Ciphertext, DjCiphertext, PublicKey};
use crate::transport::{Canonical, CodecError, Decoder, Encoder};
use crate::zkp::{BitProof, Crs, MulProof, MulStatement, RaterShare};

/// Fiat-Shamir context for the rating addressed to `ratee_token`.
pub fn rating_context(ratee_token: &BigUint) -> Vec<u8> {
    let mut enc = Encoder::new();
    enc.str("rating").uint(ratee_token);
    enc.finish()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatingSubmission {
    pub joint: BigUint,
    pub ratee: u32,
    pub ratee_token: BigUint,
    pub share: RaterShare,
}

/// Sampling commitment for one rating, posted before anything about the
/// rating is decrypted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Commitment {
    pub ratee: u32,
    pub ratee_token: BigUint,
    pub c: Ciphertext,
    pub bit_proof: BitProof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublishedRating {
    pub ratee: u32,
    pub ratee_token: BigUint,
    pub e_z: Ciphertext,
    pub c: Ciphertext,
    pub bit_proof: BitProof,
    pub e_zb: Ciphertext,
    pub proof: MulProof,
}

impl PublishedRating {
    pub fn statement(&self) -> MulStatement {
        MulStatement {
            e_alpha: self.e_z.clone(),
            e_beta: self.c.clone(),
            e_gamma: self.e_zb.clone(),
        }
    }
}

/// Sampled reputation of one ratee with openings of both aggregates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReputationStatement {
    pub ratee: u32,
    /// `sum b_i z_i`
    pub s: BigUint,
    pub r_s: BigUint,
    /// `sum b_i`
    pub sample_count: BigUint,
    pub r_count: BigUint,
    /// Ratee tokens of the ratings aggregated, in board order.
    pub contributing: Vec<BigUint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    /// SP1 -> board: public key and common random string.
    Setup { pk: PublicKey, crs: Vec<u8> },
    /// user -> user: own token for transaction `txn`.
    Token { txn: u64, token: BigUint },
    /// user -> SP2.
    Submission(RatingSubmission),
    /// user -> user: "my rating for `txn` is at the escrow".
    Submitted { txn: u64 },
    /// SP2 -> board.
    Commit(Commitment),
    /// board -> SP2: the commitment for `ratee_token` is public.
    Receipt { ratee_token: BigUint },
    /// SP2 -> SP1.
    FinalizeRequest {
        ratee_token: BigUint,
        enc_r2inv: DjCiphertext,
    },
    /// SP1 -> SP2.
    FinalizeReply { ratee_token: BigUint, r2: BigUint },
    /// SP2 -> board.
    Rating(PublishedRating),
    /// SP1 -> board.
    Reputation(ReputationStatement),
}

impl Message {
    pub fn kind(&self) -> &'static str {
        match self {
            Message::Setup { .. } => "setup",
            Message::Token { .. } => "token",
            Message::Submission(_) => "submission",
            Message::Submitted { .. } => "submitted",
            Message::Commit(_) => "commit",
            Message::Receipt { .. } => "receipt",
            Message::FinalizeRequest { .. } => "finalize-request",
            Message::FinalizeReply { .. } => "finalize-reply",
            Message::Rating(_) => "rating",
            Message::Reputation(_) => "reputation",
        }
    }

    pub fn crs(&self) -> Option<Crs> {
        match self {
            Message::Setup { crs, .. } => Some(Crs::new(crs.clone())),
            _ => None,
        }
    }
}

impl Canonical for RatingSubmission {
    fn encode_into(&self, enc: &mut Encoder) {
        enc.uint(&self.joint)
            .u64(self.ratee as u64)
            .uint(&self.ratee_token)
            .put(&self.share);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            joint: dec.uint()?,
            ratee: decode_u32(dec)?,
            ratee_token: dec.uint()?,
            share: dec.get()?,
        })
    }
}

impl Canonical for Commitment {
    fn encode_into(&self, enc: &mut Encoder) {
        enc.u64(self.ratee as u64)
            .uint(&self.ratee_token)
            .put(&self.c)
            .put(&self.bit_proof);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            ratee: decode_u32(dec)?,
            ratee_token: dec.uint()?,
            c: dec.get()?,
            bit_proof: dec.get()?,
        })
    }
}

impl Canonical for PublishedRating {
    fn encode_into(&self, enc: &mut Encoder) {
        enc.u64(self.ratee as u64)
            .uint(&self.ratee_token)
            .put(&self.e_z)
            .put(&self.c)
            .put(&self.bit_proof)
            .put(&self.e_zb)
            .put(&self.proof);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            ratee: decode_u32(dec)?,
            ratee_token: dec.uint()?,
            e_z: dec.get()?,
            c: dec.get()?,
            bit_proof: dec.get()?,
            e_zb: dec.get()?,
            proof: dec.get()?,
        })
    }
}

impl Canonical for ReputationStatement {
    fn encode_into(&self, enc: &mut Encoder) {
        enc.u64(self.ratee as u64)
            .uint(&self.s)
            .uint(&self.r_s)
            .uint(&self.sample_count)
            .uint(&self.r_count)
            .seq(&self.contributing);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            ratee: decode_u32(dec)?,
            s: dec.uint()?,
            r_s: dec.uint()?,
            sample_count: dec.uint()?,
            r_count: dec.uint()?,
            contributing: dec.seq()?,
        })
    }
}

fn decode_u32(dec: &mut Decoder<'_>) -> Result<u32, CodecError> {
    u32::try_from(dec.u64()?).map_err(|_| CodecError::Malformed("id exceeds u32".into()))
}

impl Canonical for Message {
    fn encode_into(&self, enc: &mut Encoder) {
        enc.str(self.kind());
        match self {
            Message::Setup { pk, crs } => {
                enc.put(pk).bytes(crs);
            }
            Message::Token { txn, token } => {
                enc.u64(*txn).uint(token);
            }
            Message::Submission(s) => {
                enc.put(s);
            }
            Message::Submitted { txn } => {
                enc.u64(*txn);
            }
            Message::Commit(c) => {
                enc.put(c);
            }
            Message::Receipt { ratee_token } => {
                enc.uint(ratee_token);
            }
            Message::FinalizeRequest {
                ratee_token,
                enc_r2inv,
            } => {
                enc.uint(ratee_token).put(enc_r2inv);
            }
            Message::FinalizeReply { ratee_token, r2 } => {
                enc.uint(ratee_token).uint(r2);
            }
            Message::Rating(r) => {
                enc.put(r);
            }
            Message::Reputation(r) => {
                enc.put(r);
            }
        }
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let kind = dec.str()?;
        Ok(match kind {
            "setup" => Message::Setup {
                pk: dec.get()?,
                crs: dec.bytes()?.to_vec(),
            },
            "token" => Message::Token {
                txn: dec.u64()?,
                token: dec.uint()?,
            },
            "submission" => Message::Submission(dec.get()?),
            "submitted" => Message::Submitted { txn: dec.u64()? },
            "commit" => Message::Commit(dec.get()?),
            "receipt" => Message::Receipt {
                ratee_token: dec.uint()?,
            },
            "finalize-request" => Message::FinalizeRequest {
                ratee_token: dec.uint()?,
                enc_r2inv: dec.get()?,
            },
            "finalize-reply" => Message::FinalizeReply {
                ratee_token: dec.uint()?,
                r2: dec.uint()?,
            },
            "rating" => Message::Rating(dec.get()?),
            "reputation" => Message::Reputation(dec.get()?),
            other => {
                return Err(CodecError::Malformed(format!(
                    "unknown message kind `{other}`"
                )))
            }
        })
    }
}

//! Key-holding provider.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::One;

use super::board::Board;
use super::demo::Tamper;
use super::messages::{Message, ReputationStatement};
use super::{Outbound, ProtocolError};
use crate::crypto::{Ciphertext, Keypair, PublicKey};
use crate::sampling::{ReleaseGate, ScoreHistory};
use crate::transport::Role;
use crate::zkp::{sp1_finalize, Crs};

#[derive(Debug)]
pub struct Sp1 {
    keys: Keypair,
    crs: Crs,
    tamper: Tamper,
    finalized: BTreeSet<BigUint>,
    histories: BTreeMap<u32, ScoreHistory>,
    rejections: Vec<ProtocolError>,
}

impl Sp1 {
    pub fn new(keys: Keypair, crs: Crs, tamper: Tamper) -> Self {
        Self {
            keys,
            crs,
            tamper,
            finalized: BTreeSet::new(),
            histories: BTreeMap::new(),
            rejections: Vec::new(),
        }
    }

    pub fn public_key(&self) -> &PublicKey {
        &self.keys.public
    }

    pub fn crs(&self) -> &Crs {
        &self.crs
    }

    /// Public parameters for the board.
    pub fn setup(&self) -> Outbound {
        (
            Role::Board,
            Message::Setup {
                pk: self.keys.public.clone(),
                crs: self.crs.as_bytes().to_vec(),
            },
        )
    }

    /// Answers finalize requests, but only for ratings whose sampling
    /// commitment is already on the board.
    pub fn handle(
        &mut self,
        from: Role,
        msg: Message,
        board: &Board,
    ) -> Result<Vec<Outbound>, ProtocolError> {
        let res = match (from, msg) {
            (
                Role::Sp2,
                Message::FinalizeRequest {
                    ratee_token,
                    enc_r2inv,
                },
            ) => {
                if board.commitment(&ratee_token).is_none() {
                    Err(ProtocolError::FinalizeFailure(
                        "commitment not on the board".into(),
                    ))
                } else if !self.finalized.insert(ratee_token.clone()) {
                    Err(ProtocolError::FinalizeFailure("already finalized".into()))
                } else {
                    sp1_finalize(&self.keys.secret, &enc_r2inv)
                        .map(|r2| vec![(Role::Sp2, Message::FinalizeReply { ratee_token, r2 })])
                        .map_err(|e| ProtocolError::FinalizeFailure(e.to_string()))
                }
            }
            (from, msg) => Err(ProtocolError::UnexpectedMessage {
                kind: msg.kind().into(),
                from: from.to_string(),
            }),
        };
        if let Err(e) = &res {
            self.rejections.push(e.clone());
        }
        res
    }

    /// Decrypt and open the aggregates of `ratee`'s published ratings.
    ///
    /// The gate sees the full history of `ratee` (every `z`, not just the
    /// sampled ones), which only SP1 can decrypt.
    pub fn publish_reputation(
        &mut self,
        ratee: u32,
        board: &Board,
        gate: &ReleaseGate,
    ) -> Result<ReputationStatement, ProtocolError> {
        let mut ratings = board.ratings_for(ratee);
        if ratings.is_empty() {
            return Err(ProtocolError::GateClosed);
        }
        let sk = &self.keys.secret;
        let published_at = self.histories.get(&ratee).and_then(|h| h.published_at);
        let mut history = ScoreHistory::new();
        history.published_at = published_at;
        for r in &ratings {
            let z = sk
                .decrypt(&r.e_z)
                .map_err(|_| ProtocolError::DecryptionFailure)?;
            history.record(z.is_one());
        }
        if !gate.allows(&history) {
            return Err(ProtocolError::GateClosed);
        }
        if self.tamper == Tamper::Omit && ratings.len() > 1 {
            ratings.pop();
        }
        let pk = &self.keys.public;
        let prod_zb = pk.sum(ratings.iter().map(|r| &r.e_zb))?;
        let prod_c = pk.sum(ratings.iter().map(|r| &r.c))?;
        let s = open(self, &prod_zb)?;
        let count = open(self, &prod_c)?;
        let mut stmt = ReputationStatement {
            ratee,
            s: s.x,
            r_s: s.r,
            sample_count: count.x,
            r_count: count.r,
            contributing: ratings.iter().map(|r| r.ratee_token.clone()).collect(),
        };
        match self.tamper {
            Tamper::S => stmt.s += 1u32,
            Tamper::Count => stmt.sample_count += 1u32,
            _ => {}
        }
        history.mark_published();
        self.histories.insert(ratee, history);
        Ok(stmt)
    }

    pub fn rejections(&self) -> &[ProtocolError] {
        &self.rejections
    }
}

fn open(sp1: &Sp1, c: &Ciphertext) -> Result<crate::crypto::Opening, ProtocolError> {
    sp1.keys
        .secret
        .open(c)
        .map_err(|_| ProtocolError::DecryptionFailure)
}

use std::collections::BTreeMap;

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::board::Board;
use super::group::GroupParams;
use super::messages::{rating_context, Message, RatingSubmission};
use super::{Outbound, ProtocolError};
use crate::crypto::Ciphertext;
use crate::transport::Role;
use crate::zkp::rater_share;

/// One side of one transaction, as its party sees it.
#[derive(Debug, Clone)]
pub struct UserTxn {
    pub counterparty: u32,
    pub z: u8,
    r_own: BigUint,
    pub own_token: BigUint,
    pub peer_token: Option<BigUint>,
    pub joint: Option<BigUint>,
    /// `E(z)` as sent to the escrow.
    pub submitted: Option<Ciphertext>,
    pub peer_signaled: bool,
}

/// Auction participant.
#[derive(Debug, Clone)]
pub struct User {
    id: u32,
    group: GroupParams,
    rng: ChaCha8Rng,
    txns: BTreeMap<u64, UserTxn>,
}

impl User {
    pub fn new(id: u32, group: GroupParams, seed: u64) -> Self {
        let mut h = Sha256::new();
        h.update(b"REP/USER");
        h.update(seed.to_be_bytes());
        h.update(id.to_be_bytes());
        Self {
            id,
            group,
            rng: ChaCha8Rng::from_seed(h.finalize().into()),
            txns: BTreeMap::new(),
        }
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn role(&self) -> Role {
        Role::User(self.id)
    }

    pub fn transactions(&self) -> &BTreeMap<u64, UserTxn> {
        &self.txns
    }

    /// Open `txn` with `counterparty`, intending to rate it `z`, and send
    /// the counterparty our token.
    pub fn start(
        &mut self,
        txn: u64,
        counterparty: u32,
        z: u8,
    ) -> Result<Vec<Outbound>, ProtocolError> {
        if self.txns.contains_key(&txn) {
            return Err(ProtocolError::DuplicateSubmission);
        }
        let r_own = self.group.random_exponent(&mut self.rng);
        let own_token = self.group.token(&r_own)?;
        self.txns.insert(
            txn,
            UserTxn {
                counterparty,
                z,
                r_own,
                own_token: own_token.clone(),
                peer_token: None,
                joint: None,
                submitted: None,
                peer_signaled: false,
            },
        );
        Ok(vec![(
            Role::User(counterparty),
            Message::Token {
                txn,
                token: own_token,
            },
        )])
    }

    /// Encrypt the rating for `txn` and hand it to the escrow. Also tells the
    /// counterparty, so that a suppressed rating can be noticed.
    pub fn submit(&mut self, txn: u64, board: &Board) -> Result<Vec<Outbound>, ProtocolError> {
        let (pk, crs) = board.params()?;
        let t = self
            .txns
            .get_mut(&txn)
            .ok_or(ProtocolError::UnknownTransaction)?;
        if t.submitted.is_some() {
            return Err(ProtocolError::DuplicateSubmission);
        }
        let (peer_token, joint) = match (&t.peer_token, &t.joint) {
            (Some(p), Some(j)) => (p.clone(), j.clone()),
            _ => return Err(ProtocolError::UnknownTransaction),
        };
        let r_z = pk.random_unit(&mut self.rng);
        let ctx = rating_context(&peer_token);
        let (share, _) = rater_share(pk, crs, &ctx, t.z, &r_z, &mut self.rng)?;
        t.submitted = Some(share.e_z.clone());
        let sub = RatingSubmission {
            joint,
            ratee: t.counterparty,
            ratee_token: peer_token,
            share,
        };
        Ok(vec![
            (Role::Sp2, Message::Submission(sub)),
            (Role::User(t.counterparty), Message::Submitted { txn }),
        ])
    }

    pub fn handle(
        &mut self,
        from: Role,
        msg: Message,
        board: &Board,
    ) -> Result<Vec<Outbound>, ProtocolError> {
        match (from, msg) {
            (Role::User(peer), Message::Token { txn, token }) => {
                let t = self
                    .txns
                    .get_mut(&txn)
                    .ok_or(ProtocolError::UnknownTransaction)?;
                if t.counterparty != peer {
                    return Err(ProtocolError::UnknownTransaction);
                }
                if t.peer_token.is_some() {
                    return Err(ProtocolError::DuplicateSubmission);
                }
                if !self.group.is_token(&token) {
                    return Err(ProtocolError::DegenerateExponent);
                }
                t.joint = Some(self.group.pow(&token, &t.r_own));
                t.peer_token = Some(token);
                self.submit(txn, board)
            }
            (Role::User(peer), Message::Submitted { txn }) => {
                let t = self
                    .txns
                    .get_mut(&txn)
                    .ok_or(ProtocolError::UnknownTransaction)?;
                if t.counterparty != peer {
                    return Err(ProtocolError::UnknownTransaction);
                }
                t.peer_signaled = true;
                Ok(Vec::new())
            }
            (from, msg) => Err(ProtocolError::UnexpectedMessage {
                kind: msg.kind().into(),
                from: from.to_string(),
            }),
        }
    }
}

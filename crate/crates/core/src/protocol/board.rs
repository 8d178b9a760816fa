use std::collections::BTreeMap;

use num_bigint::BigUint;

use super::messages::{Commitment, Message, PublishedRating, ReputationStatement};
use super::{Outbound, ProtocolError};
use crate::crypto::PublicKey;
use crate::transport::Role;
use crate::zkp::Crs;

/// Public bulletin. Accepts posts from the providers and acknowledges
/// commitments with a receipt.
#[derive(Debug, Clone, Default)]
pub struct Board {
    setup: Option<(PublicKey, Crs)>,
    commits: BTreeMap<BigUint, Commitment>,
    ratings: Vec<PublishedRating>,
    reputations: Vec<ReputationStatement>,
    rejected: Vec<ProtocolError>,
}

impl Board {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn handle(&mut self, from: Role, msg: Message) -> Vec<Outbound> {
        let unexpected = |msg: &Message| ProtocolError::UnexpectedMessage {
            kind: msg.kind().into(),
            from: from.to_string(),
        };
        match (from, msg) {
            (Role::Sp1, Message::Setup { pk, crs }) if self.setup.is_none() => {
                self.setup = Some((pk, Crs::new(crs)));
            }
            (Role::Sp2, Message::Commit(c)) if !self.commits.contains_key(&c.ratee_token) => {
                let ratee_token = c.ratee_token.clone();
                self.commits.insert(ratee_token.clone(), c);
                return vec![(Role::Sp2, Message::Receipt { ratee_token })];
            }
            (Role::Sp2, Message::Rating(r))
                if !self.ratings.iter().any(|x| x.ratee_token == r.ratee_token) =>
            {
                self.ratings.push(r);
            }
            (Role::Sp1, Message::Reputation(s)) => self.reputations.push(s),
            (_, msg) => self.rejected.push(unexpected(&msg)),
        }
        Vec::new()
    }

    pub fn public_key(&self) -> Option<&PublicKey> {
        self.setup.as_ref().map(|(pk, _)| pk)
    }

    pub fn crs(&self) -> Option<&Crs> {
        self.setup.as_ref().map(|(_, crs)| crs)
    }

    pub fn params(&self) -> Result<(&PublicKey, &Crs), ProtocolError> {
        self.setup
            .as_ref()
            .map(|(pk, crs)| (pk, crs))
            .ok_or(ProtocolError::NotSetUp)
    }

    pub fn commitment(&self, ratee_token: &BigUint) -> Option<&Commitment> {
        self.commits.get(ratee_token)
    }

    pub fn commitments(&self) -> impl Iterator<Item = &Commitment> {
        self.commits.values()
    }

    /// Ratings in publication order.
    pub fn ratings(&self) -> &[PublishedRating] {
        &self.ratings
    }

    pub fn rating(&self, ratee_token: &BigUint) -> Option<&PublishedRating> {
        self.ratings.iter().find(|r| &r.ratee_token == ratee_token)
    }

    pub fn ratings_for(&self, ratee: u32) -> Vec<&PublishedRating> {
        self.ratings.iter().filter(|r| r.ratee == ratee).collect()
    }

    pub fn ratees(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.ratings.iter().map(|r| r.ratee).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn reputations(&self) -> &[ReputationStatement] {
        &self.reputations
    }

    /// Most recent statement for `ratee`.
    pub fn reputation_for(&self, ratee: u32) -> Option<&ReputationStatement> {
        self.reputations.iter().rev().find(|s| s.ratee == ratee)
    }

    pub fn rejected(&self) -> &[ProtocolError] {
        &self.rejected
    }
}

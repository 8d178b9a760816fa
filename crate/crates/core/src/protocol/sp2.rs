//! Escrow and sampling provider.
//!
//! Every inbound message is appended to an optional record file before it
//! is applied, so a restarted SP2 rebuilds its state by replaying the file
//! with outbound messages discarded. All randomness is derived from the
//! configured seed and the bucket it is used for.

use std::collections::BTreeMap;
use std::path::Path;

use num_bigint::BigUint;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::demo::Tamper;
use super::messages::{rating_context, Commitment, Message, PublishedRating, RatingSubmission};
use super::{Outbound, ProtocolError};
use crate::crypto::PublicKey;
use crate::transport::{Decoder, Encoder, RecordFile, Role};
use crate::zkp::{sp2_complete, Crs, RaterShare, Sp2Output, Sp2Secrets};

/// How sampling bits are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingRule {
    /// Independent bits with `P(b = 1) = num / den`.
    Bernoulli { num: u32, den: u32 },
    /// Exactly `ones` of every `size` consecutive ratings are sampled.
    Window { size: u32, ones: u32 },
}

impl Default for SamplingRule {
    fn default() -> Self {
        SamplingRule::Bernoulli { num: 1, den: 2 }
    }
}

#[derive(Debug, Clone)]
pub struct Sp2Config {
    pub pk: PublicKey,
    pub crs: Crs,
    pub seed: u64,
    pub rule: SamplingRule,
    pub tamper: Tamper,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Pending {
    ratee: u32,
    share: RaterShare,
    out: Sp2Output,
    requested: bool,
}

#[derive(Debug)]
pub struct Sp2 {
    cfg: Sp2Config,
    buckets: BTreeMap<BigUint, Vec<(u32, RatingSubmission)>>,
    sampled: u64,
    pending: BTreeMap<BigUint, Pending>,
    published: Vec<BigUint>,
    secrets: BTreeMap<BigUint, Sp2Secrets>,
    rejections: Vec<ProtocolError>,
    store: Option<RecordFile>,
}

impl Sp2 {
    pub fn new(cfg: Sp2Config) -> Self {
        Self {
            cfg,
            buckets: BTreeMap::new(),
            sampled: 0,
            pending: BTreeMap::new(),
            published: Vec::new(),
            secrets: BTreeMap::new(),
            rejections: Vec::new(),
            store: None,
        }
    }

    /// Open (or create) the record file at `path` and replay it.
    pub fn open(cfg: Sp2Config, path: impl AsRef<Path>) -> Result<Self, ProtocolError> {
        let (store, records) = RecordFile::open(path)?;
        let mut sp2 = Self::new(cfg);
        for rec in &records {
            let mut dec = Decoder::new(rec);
            let from: Role = dec.get()?;
            let msg: Message = dec.get()?;
            dec.finish()?;
            let _ = sp2.apply(from, msg);
        }
        sp2.store = Some(store);
        Ok(sp2)
    }

    pub fn handle(&mut self, from: Role, msg: Message) -> Result<Vec<Outbound>, ProtocolError> {
        if let Some(store) = &mut self.store {
            let mut enc = Encoder::new();
            enc.put(&from).put(&msg);
            store.append(&enc.finish())?;
        }
        self.apply(from, msg)
    }

    fn apply(&mut self, from: Role, msg: Message) -> Result<Vec<Outbound>, ProtocolError> {
        let res = match (from, msg) {
            (Role::User(rater), Message::Submission(sub)) => self.on_submission(rater, sub),
            (Role::Board, Message::Receipt { ratee_token }) => self.on_receipt(ratee_token),
            (Role::Sp1, Message::FinalizeReply { ratee_token, r2 }) => {
                self.on_reply(ratee_token, r2)
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

    fn on_submission(
        &mut self,
        rater: u32,
        sub: RatingSubmission,
    ) -> Result<Vec<Outbound>, ProtocolError> {
        let pk = &self.cfg.pk;
        if sub.share.e_z.key() != pk.id()
            || sub.share.e_d.key() != pk.id()
            || sub.share.enc_r1.key() != pk.id()
        {
            return Err(crate::crypto::CryptoError::KeyMismatch.into());
        }
        if sub.ratee == rater {
            return Err(ProtocolError::MismatchedBucket);
        }
        let bucket = self.buckets.entry(sub.joint.clone()).or_default();
        if bucket.len() == 2 || bucket.iter().any(|(r, _)| *r == rater) {
            return Err(ProtocolError::DuplicateSubmission);
        }
        if let Some((r0, s0)) = bucket.first() {
            if s0.ratee != rater || sub.ratee != *r0 || s0.ratee_token == sub.ratee_token {
                return Err(ProtocolError::MismatchedBucket);
            }
        }
        let joint = sub.joint.clone();
        bucket.push((rater, sub));
        if bucket.len() == 2 {
            self.sample_bucket(&joint)
        } else {
            Ok(Vec::new())
        }
    }

    /// Draw and commit the sampling bits of a complete bucket.
    pub fn sample_bucket(&mut self, joint: &BigUint) -> Result<Vec<Outbound>, ProtocolError> {
        let entries = match self.buckets.get(joint) {
            Some(e) if e.len() == 2 => e.clone(),
            _ => return Err(ProtocolError::IncompleteBucket),
        };
        let first_bucket = self.sampled == 0;
        let mut out = Vec::new();
        for (dir, (_, sub)) in entries.iter().enumerate() {
            if self.pending.contains_key(&sub.ratee_token)
                || self.secrets.contains_key(&sub.ratee_token)
            {
                return Err(ProtocolError::DuplicateSubmission);
            }
            if self.cfg.tamper == Tamper::Drop && first_bucket && dir == 1 {
                continue;
            }
            let mut rng = bucket_rng(self.cfg.seed, joint, dir as u8);
            let b = self.draw(&mut rng);
            self.sampled += 1;
            let pk = &self.cfg.pk;
            let r_b = pk.random_unit(&mut rng);
            let ctx = rating_context(&sub.ratee_token);
            let (sp2_out, secrets) =
                sp2_complete(pk, &self.cfg.crs, &ctx, &sub.share, b, &r_b, &mut rng)?;
            out.push((
                Role::Board,
                Message::Commit(Commitment {
                    ratee: sub.ratee,
                    ratee_token: sub.ratee_token.clone(),
                    c: sp2_out.c.clone(),
                    bit_proof: sp2_out.bit_proof.clone(),
                }),
            ));
            self.secrets.insert(sub.ratee_token.clone(), secrets);
            self.pending.insert(
                sub.ratee_token.clone(),
                Pending {
                    ratee: sub.ratee,
                    share: sub.share.clone(),
                    out: sp2_out,
                    requested: false,
                },
            );
        }
        Ok(out)
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> u8 {
        match self.cfg.rule {
            SamplingRule::Bernoulli { num, den } => rng.gen_ratio(num, den) as u8,
            SamplingRule::Window { size, ones } => {
                let w = self.sampled / size as u64;
                let mut h = Sha256::new();
                h.update(b"REP/SP2/window");
                h.update(self.cfg.seed.to_be_bytes());
                h.update(w.to_be_bytes());
                let mut wrng = ChaCha8Rng::from_seed(h.finalize().into());
                let chosen = index::sample(&mut wrng, size as usize, ones as usize);
                chosen
                    .iter()
                    .any(|i| i as u64 == self.sampled % size as u64) as u8
            }
        }
    }

    fn on_receipt(&mut self, ratee_token: BigUint) -> Result<Vec<Outbound>, ProtocolError> {
        let p = self
            .pending
            .get_mut(&ratee_token)
            .ok_or(ProtocolError::UnknownTransaction)?;
        if p.requested {
            return Err(ProtocolError::DuplicateSubmission);
        }
        p.requested = true;
        let enc_r2inv = p.out.enc_r2inv.clone();
        Ok(vec![(
            Role::Sp1,
            Message::FinalizeRequest {
                ratee_token,
                enc_r2inv,
            },
        )])
    }

    fn on_reply(
        &mut self,
        ratee_token: BigUint,
        r2: BigUint,
    ) -> Result<Vec<Outbound>, ProtocolError> {
        match self.pending.get(&ratee_token) {
            Some(p) if p.requested => {}
            _ => return Err(ProtocolError::UnknownTransaction),
        }
        let p = self.pending.remove(&ratee_token).expect("checked above");
        let (stmt, proof) = crate::zkp::distributed::assemble(&p.share, &p.out, r2);
        let mut rating = PublishedRating {
            ratee: p.ratee,
            ratee_token: ratee_token.clone(),
            e_z: stmt.e_alpha,
            c: stmt.e_beta,
            bit_proof: p.out.bit_proof.clone(),
            e_zb: stmt.e_gamma,
            proof,
        };
        if self.published.is_empty() {
            self.tamper_rating(&mut rating)?;
        }
        self.published.push(ratee_token);
        Ok(vec![(Role::Board, Message::Rating(rating))])
    }

    /// Apply the configured tamper to the first rating published.
    fn tamper_rating(&self, rating: &mut PublishedRating) -> Result<(), ProtocolError> {
        let pk = &self.cfg.pk;
        let one = BigUint::from(1u32);
        let unit = BigUint::from(2u32);
        match self.cfg.tamper {
            // E(1) / E(x) = E(1 - x)
            Tamper::EZb => rating.e_zb = pk.sub(&pk.encrypt(&one, &unit)?, &rating.e_zb)?,
            Tamper::EZ => rating.e_z = pk.sub(&pk.encrypt(&one, &unit)?, &rating.e_z)?,
            Tamper::V => rating.proof.v = (&rating.proof.v + 1u32) % pk.n(),
            Tamper::Commit => rating.c = pk.rerandomize(&rating.c, &unit)?,
            _ => {}
        }
        Ok(())
    }

    pub fn public_key(&self) -> &PublicKey {
        &self.cfg.pk
    }

    /// Ratee tokens of the ratings published so far, in order.
    pub fn published(&self) -> &[BigUint] {
        &self.published
    }

    /// Sampling secrets per ratee token. SP2's private records; the test
    /// harness reads them as its oracle for `b`.
    pub fn secrets(&self) -> &BTreeMap<BigUint, Sp2Secrets> {
        &self.secrets
    }

    pub fn bucket_sizes(&self) -> BTreeMap<BigUint, usize> {
        self.buckets
            .iter()
            .map(|(j, e)| (j.clone(), e.len()))
            .collect()
    }

    pub fn rejections(&self) -> &[ProtocolError] {
        &self.rejections
    }

    /// Canonical bytes of the whole escrow state, for comparing a replayed
    /// instance with one that never restarted.
    pub fn state_digest(&self) -> [u8; 32] {
        let mut enc = Encoder::new();
        enc.u64(self.buckets.len() as u64);
        for (joint, entries) in &self.buckets {
            enc.uint(joint).u64(entries.len() as u64);
            for (rater, sub) in entries {
                enc.u64(*rater as u64).put(sub);
            }
        }
        enc.u64(self.sampled).u64(self.pending.len() as u64);
        for (tok, p) in &self.pending {
            enc.uint(tok)
                .u64(p.ratee as u64)
                .put(&p.share)
                .put(&p.out)
                .bool(p.requested);
        }
        enc.seq(&self.published).u64(self.secrets.len() as u64);
        for (tok, s) in &self.secrets {
            enc.uint(tok).put(s);
        }
        Sha256::digest(enc.finish()).into()
    }
}

fn bucket_rng(seed: u64, joint: &BigUint, dir: u8) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(b"REP/SP2/bucket");
    h.update(seed.to_be_bytes());
    h.update(joint.to_bytes_be());
    h.update([dir]);
    ChaCha8Rng::from_seed(h.finalize().into())
}

//! Deterministic in-memory transport among protocol roles.
//!
//! Messages travel in signed [`Envelope`]s. The [`SimNetwork`] keeps one FIFO
//! queue per ordered `(from, to)` pair and a seeded scheduler picks which
//! non-empty queue delivers next, so the same seed always yields the same
//! global delivery order. Every delivery is appended to a hash-chained
//! [`MessageLog`], which doubles as the dispute record: any party can replay
//! it, check signatures, and project it onto a single role's view.

pub mod codec;
pub mod store;

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use ed25519_dalek::{Signature, Signer, SigningKey, Verifier, VerifyingKey};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use codec::{Canonical, CodecError, Decoder, Encoder};
pub use store::{ChainHash, RecordFile, StoreError};

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("unknown role {0}")]
    UnknownRole(Role),
    #[error("bad signature on message {seq} from {from}")]
    BadSignature { from: Role, seq: u64 },
    #[error("sequence gap from {from} to {to}: expected {expected}, got {got}")]
    SequenceGap {
        from: Role,
        to: Role,
        expected: u64,
        got: u64,
    },
    #[error("message log hash chain broken at entry {0}")]
    ChainBroken(usize),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Participant in the simulated network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    /// Auction participant; rates and is rated.
    User(u32),
    /// Key holder: learns ratings and ratees, never raters.
    Sp1,
    /// Escrow and sampling provider: learns raters and pairings, never ratings.
    Sp2,
    /// Public bulletin board that everyone can read.
    Board,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::User(id) => write!(f, "user/{id}"),
            Role::Sp1 => f.write_str("sp1"),
            Role::Sp2 => f.write_str("sp2"),
            Role::Board => f.write_str("board"),
        }
    }
}

impl std::str::FromStr for Role {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sp1" => Ok(Role::Sp1),
            "sp2" => Ok(Role::Sp2),
            "board" => Ok(Role::Board),
            _ => {
                let id = s
                    .strip_prefix("user/")
                    .filter(|d| d.bytes().all(|c| c.is_ascii_digit()))
                    .filter(|d| !d.is_empty() && (*d == "0" || !d.starts_with('0')))
                    .and_then(|d| d.parse::<u32>().ok())
                    .ok_or_else(|| CodecError::Malformed(format!("bad role {s:?}")))?;
                Ok(Role::User(id))
            }
        }
    }
}

impl Canonical for Role {
    fn encode_into(&self, enc: &mut Encoder) {
        enc.str(&self.to_string());
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        dec.str()?.parse()
    }
}

/// Deterministic signing key for a role, derived from a harness seed.
pub fn role_signing_key(seed: u64, role: Role) -> SigningKey {
    let mut h = Sha256::new();
    h.update(b"REP/SIGN/key");
    h.update(seed.to_be_bytes());
    h.update(role.to_string().as_bytes());
    SigningKey::from_bytes(&h.finalize().into())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope {
    pub from: Role,
    pub to: Role,
    pub seq: u64,
    pub kind: String,
    pub body: Vec<u8>,
    pub signature: [u8; 64],
}

impl Envelope {
    fn signed_bytes(from: Role, to: Role, seq: u64, kind: &str, body: &[u8]) -> Vec<u8> {
        let mut enc = Encoder::new();
        enc.str("REP/ENVELOPE")
            .put(&from)
            .put(&to)
            .u64(seq)
            .str(kind)
            .bytes(body);
        enc.finish()
    }

    pub fn seal(
        from: Role,
        to: Role,
        seq: u64,
        kind: &str,
        body: Vec<u8>,
        key: &SigningKey,
    ) -> Self {
        let sig = key.sign(&Self::signed_bytes(from, to, seq, kind, &body));
        Self {
            from,
            to,
            seq,
            kind: kind.to_owned(),
            body,
            signature: sig.to_bytes(),
        }
    }

    pub fn verify(&self, key: &VerifyingKey) -> bool {
        let msg = Self::signed_bytes(self.from, self.to, self.seq, &self.kind, &self.body);
        key.verify(&msg, &Signature::from_bytes(&self.signature))
            .is_ok()
    }
}

impl Canonical for Envelope {
    fn encode_into(&self, enc: &mut Encoder) {
        enc.put(&self.from)
            .put(&self.to)
            .u64(self.seq)
            .str(&self.kind)
            .bytes(&self.body)
            .bytes(&self.signature);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let from = dec.get()?;
        let to = dec.get()?;
        let seq = dec.u64()?;
        let kind = dec.str()?.to_owned();
        let body = dec.bytes()?.to_vec();
        let signature = dec
            .bytes()?
            .try_into()
            .map_err(|_| CodecError::Malformed("signature must be 64 bytes".into()))?;
        Ok(Self {
            from,
            to,
            seq,
            kind,
            body,
            signature,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub envelope: Envelope,
    pub hash: ChainHash,
}

/// Delivery-ordered envelopes with a running hash chain.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MessageLog {
    entries: Vec<LogEntry>,
}

impl MessageLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn head(&self) -> ChainHash {
        self.entries.last().map_or(store::GENESIS, |e| e.hash)
    }

    pub fn append(&mut self, envelope: Envelope) -> ChainHash {
        let hash = store::chain_hash(&self.head(), &envelope.to_canonical_bytes());
        self.entries.push(LogEntry { envelope, hash });
        hash
    }

    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn envelopes(&self) -> impl Iterator<Item = &Envelope> {
        self.entries.iter().map(|e| &e.envelope)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn verify_chain(&self) -> Result<(), TransportError> {
        let mut head = store::GENESIS;
        for (i, e) in self.entries.iter().enumerate() {
            head = store::chain_hash(&head, &e.envelope.to_canonical_bytes());
            if head != e.hash {
                return Err(TransportError::ChainBroken(i));
            }
        }
        Ok(())
    }

    pub fn verify_signatures(
        &self,
        keys: &BTreeMap<Role, VerifyingKey>,
    ) -> Result<(), TransportError> {
        for e in self.envelopes() {
            let key = keys
                .get(&e.from)
                .ok_or(TransportError::UnknownRole(e.from))?;
            if !e.verify(key) {
                return Err(TransportError::BadSignature {
                    from: e.from,
                    seq: e.seq,
                });
            }
        }
        Ok(())
    }

    /// Envelopes sent or received by `role`, in delivery order.
    pub fn view(&self, role: Role) -> Vec<&Envelope> {
        self.envelopes()
            .filter(|e| e.from == role || e.to == role)
            .collect()
    }

    /// Envelopes delivered to `role`.
    pub fn received_by(&self, role: Role) -> Vec<&Envelope> {
        self.envelopes().filter(|e| e.to == role).collect()
    }

    /// The on-disk record format.
    pub fn to_record_bytes(&self) -> Vec<u8> {
        let bodies: Vec<Vec<u8>> = self
            .envelopes()
            .map(Canonical::to_canonical_bytes)
            .collect();
        store::encode_records(store::GENESIS, bodies.iter().map(Vec::as_slice)).0
    }

    pub fn from_record_bytes(bytes: &[u8]) -> Result<Self, TransportError> {
        let (payloads, _) = store::decode_records(bytes)?;
        let mut log = Self::new();
        for p in payloads {
            log.append(Envelope::from_canonical_bytes(&p)?);
        }
        Ok(log)
    }
}

/// Seeded in-memory network with per-pair FIFO delivery.
pub struct SimNetwork {
    keys: BTreeMap<Role, SigningKey>,
    queues: BTreeMap<(Role, Role), VecDeque<Envelope>>,
    next_seq: BTreeMap<(Role, Role), u64>,
    delivered_seq: BTreeMap<(Role, Role), u64>,
    rng: ChaCha8Rng,
    log: MessageLog,
}

impl SimNetwork {
    pub fn new(seed: u64) -> Self {
        Self {
            keys: BTreeMap::new(),
            queues: BTreeMap::new(),
            next_seq: BTreeMap::new(),
            delivered_seq: BTreeMap::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            log: MessageLog::new(),
        }
    }

    pub fn register(&mut self, role: Role, key: SigningKey) {
        self.keys.insert(role, key);
    }

    pub fn is_registered(&self, role: Role) -> bool {
        self.keys.contains_key(&role)
    }

    pub fn verifying_keys(&self) -> BTreeMap<Role, VerifyingKey> {
        self.keys
            .iter()
            .map(|(r, k)| (*r, k.verifying_key()))
            .collect()
    }

    /// Queue a message. Returns its per-pair sequence number.
    pub fn send(
        &mut self,
        from: Role,
        to: Role,
        kind: &str,
        body: Vec<u8>,
    ) -> Result<u64, TransportError> {
        if !self.keys.contains_key(&to) {
            return Err(TransportError::UnknownRole(to));
        }
        let key = self
            .keys
            .get(&from)
            .ok_or(TransportError::UnknownRole(from))?;
        let seq_slot = self.next_seq.entry((from, to)).or_insert(0);
        let seq = *seq_slot;
        *seq_slot += 1;
        let env = Envelope::seal(from, to, seq, kind, body, key);
        self.queues.entry((from, to)).or_default().push_back(env);
        Ok(seq)
    }

    pub fn pending(&self) -> usize {
        self.queues.values().map(VecDeque::len).sum()
    }

    /// Deliver the head of a scheduler-chosen non-empty queue.
    pub fn deliver_next(&mut self) -> Result<Option<Envelope>, TransportError> {
        let ready: Vec<(Role, Role)> = self
            .queues
            .iter()
            .filter(|(_, q)| !q.is_empty())
            .map(|(k, _)| *k)
            .collect();
        if ready.is_empty() {
            return Ok(None);
        }
        let pick = ready[self.rng.gen_range(0..ready.len())];
        let env = self
            .queues
            .get_mut(&pick)
            .and_then(VecDeque::pop_front)
            .expect("queue was non-empty");
        let key = self.keys[&env.from].verifying_key();
        if !env.verify(&key) {
            return Err(TransportError::BadSignature {
                from: env.from,
                seq: env.seq,
            });
        }
        let expected = self.delivered_seq.entry(pick).or_insert(0);
        if env.seq != *expected {
            return Err(TransportError::SequenceGap {
                from: pick.0,
                to: pick.1,
                expected: *expected,
                got: env.seq,
            });
        }
        *expected += 1;
        self.log.append(env.clone());
        Ok(Some(env))
    }

    pub fn log(&self) -> &MessageLog {
        &self.log
    }

    /// Number of undelivered messages addressed to `role`.
    pub fn queued_for(&self, role: Role) -> usize {
        self.queues
            .iter()
            .filter(|((_, to), _)| *to == role)
            .map(|(_, q)| q.len())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(seed: u64) -> SimNetwork {
        let mut n = SimNetwork::new(seed);
        for r in [Role::User(0), Role::User(1), Role::Sp1, Role::Sp2] {
            n.register(r, role_signing_key(7, r));
        }
        n
    }

    fn drive(seed: u64) -> MessageLog {
        let mut n = net(seed);
        let pairs = [
            (Role::User(0), Role::Sp2),
            (Role::User(1), Role::Sp2),
            (Role::Sp2, Role::Sp1),
            (Role::User(0), Role::User(1)),
        ];
        for i in 0..10u64 {
            for (from, to) in pairs {
                n.send(from, to, "ping", i.to_canonical_bytes()).unwrap();
            }
        }
        while n.deliver_next().unwrap().is_some() {}
        n.log().clone()
    }

    #[test]
    fn same_seed_same_log() {
        assert_eq!(drive(3), drive(3));
        assert_eq!(drive(3).to_record_bytes(), drive(3).to_record_bytes());
    }

    #[test]
    fn per_pair_fifo_under_every_seed() {
        for seed in 0..100 {
            let log = drive(seed);
            let mut last: BTreeMap<(Role, Role), u64> = BTreeMap::new();
            for e in log.envelopes() {
                let body = u64::from_canonical_bytes(&e.body).unwrap();
                if let Some(prev) = last.insert((e.from, e.to), body) {
                    assert!(body > prev, "seed {seed}: FIFO violated");
                }
            }
        }
    }

    #[test]
    fn scheduler_reorders_across_pairs() {
        let orders: std::collections::BTreeSet<Vec<(Role, Role)>> = (0..20)
            .map(|s| drive(s).envelopes().map(|e| (e.from, e.to)).collect())
            .collect();
        assert!(orders.len() > 1);
    }

    #[test]
    fn unknown_role_is_rejected() {
        let mut n = net(1);
        assert!(matches!(
            n.send(Role::User(0), Role::Board, "x", vec![]),
            Err(TransportError::UnknownRole(Role::Board))
        ));
        assert!(matches!(
            n.send(Role::User(9), Role::Sp1, "x", vec![]),
            Err(TransportError::UnknownRole(Role::User(9)))
        ));
    }

    #[test]
    fn log_chain_signatures_and_views() {
        let mut n = net(5);
        n.send(Role::User(0), Role::Sp2, "a", vec![1]).unwrap();
        n.send(Role::Sp2, Role::Sp1, "b", vec![2]).unwrap();
        while n.deliver_next().unwrap().is_some() {}
        let log = n.log().clone();
        log.verify_chain().unwrap();
        log.verify_signatures(&n.verifying_keys()).unwrap();
        assert_eq!(log.view(Role::Sp1).len(), 1);
        assert_eq!(log.view(Role::Sp2).len(), 2);

        let restored = MessageLog::from_record_bytes(&log.to_record_bytes()).unwrap();
        assert_eq!(restored, log);

        let mut forged = log.clone();
        forged.entries[0].envelope.body = vec![9];
        assert!(forged.verify_chain().is_err());
        assert!(forged.verify_signatures(&n.verifying_keys()).is_err());
    }

    #[test]
    fn role_names_roundtrip() {
        for r in [
            Role::User(0),
            Role::User(42),
            Role::Sp1,
            Role::Sp2,
            Role::Board,
        ] {
            assert_eq!(
                Role::from_canonical_bytes(&r.to_canonical_bytes()).unwrap(),
                r
            );
        }
        assert!("user/01".parse::<Role>().is_err());
        assert!("user/".parse::<Role>().is_err());
    }
}

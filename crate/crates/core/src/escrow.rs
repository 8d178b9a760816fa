//! Simple feedback escrow.
//!
//! The first feedback of a transaction is held back until the counterparty
//! submits theirs; then both become visible in the same step. Neither party
//! can therefore condition their feedback on the other's.
//!
//! Deadlines are an extension: an entry that is still waiting for its second
//! feedback when its deadline passes becomes `Expired` and the escrowed value
//! is discarded, never released. Releasing a lone feedback would hand the
//! late party exactly the sequential advantage escrow removes. The default
//! deadline is "never". Time is logical and supplied by the caller.
//!
//! A store can journal its events to a [`RecordFile`] and be rebuilt from it.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::game::FeedbackAction;
use crate::transport::{Canonical, CodecError, Decoder, Encoder, RecordFile, StoreError};

pub type LogicalTime = u64;

#[derive(Debug, Error)]
pub enum EscrowError {
    #[error("buyer and seller must be distinct parties")]
    SameParty,
    #[error("unknown transaction {0}")]
    UnknownTransaction(TransactionId),
    #[error("{party} is not a party to transaction {txn}")]
    NotAParty { txn: TransactionId, party: PartyId },
    #[error("{party} already submitted feedback for transaction {txn}")]
    DuplicateSubmission { txn: TransactionId, party: PartyId },
    #[error("transaction {0} has expired")]
    ExpiredTransaction(TransactionId),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransactionId(pub u64);

impl fmt::Display for TransactionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "txn-{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartyId(pub String);

impl PartyId {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EscrowState {
    Open,
    OneSubmitted,
    Released,
    Expired,
}

impl EscrowState {
    pub fn is_terminal(self) -> bool {
        matches!(self, EscrowState::Released | EscrowState::Expired)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Buyer,
    Seller,
}

/// Both feedbacks of a released transaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Released {
    /// Feedback the buyer left for the seller.
    pub from_buyer: FeedbackAction,
    /// Feedback the seller left for the buyer.
    pub from_seller: FeedbackAction,
}

#[derive(Clone, PartialEq, Eq)]
pub struct EscrowEntry {
    txn: TransactionId,
    buyer: PartyId,
    seller: PartyId,
    buyer_feedback: Option<FeedbackAction>,
    seller_feedback: Option<FeedbackAction>,
    state: EscrowState,
    opened_at: LogicalTime,
    deadline: Option<LogicalTime>,
}

impl EscrowEntry {
    pub fn txn(&self) -> TransactionId {
        self.txn
    }

    pub fn buyer(&self) -> &PartyId {
        &self.buyer
    }

    pub fn seller(&self) -> &PartyId {
        &self.seller
    }

    pub fn state(&self) -> EscrowState {
        self.state
    }

    pub fn opened_at(&self) -> LogicalTime {
        self.opened_at
    }

    pub fn deadline(&self) -> Option<LogicalTime> {
        self.deadline
    }

    /// Whether `party` has submitted. Reveals participation, not the value.
    pub fn has_submitted(&self, party: &PartyId) -> bool {
        if party == &self.buyer {
            self.buyer_feedback.is_some()
        } else if party == &self.seller {
            self.seller_feedback.is_some()
        } else {
            false
        }
    }

    pub fn released(&self) -> Option<Released> {
        match (self.state, self.buyer_feedback, self.seller_feedback) {
            (EscrowState::Released, Some(from_buyer), Some(from_seller)) => Some(Released {
                from_buyer,
                from_seller,
            }),
            _ => None,
        }
    }

    fn is_due(&self, now: LogicalTime) -> bool {
        self.deadline.is_some_and(|d| now > d)
    }
}

// Escrowed values stay out of debug output.
impl fmt::Debug for EscrowEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("EscrowEntry");
        d.field("txn", &self.txn)
            .field("buyer", &self.buyer)
            .field("seller", &self.seller)
            .field("state", &self.state)
            .field("opened_at", &self.opened_at)
            .field("deadline", &self.deadline);
        if let Some(r) = self.released() {
            d.field("released", &r);
        }
        d.finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Event {
    Open {
        txn: TransactionId,
        buyer: PartyId,
        seller: PartyId,
        now: LogicalTime,
        deadline: Option<LogicalTime>,
    },
    Submit {
        txn: TransactionId,
        party: PartyId,
        action: FeedbackAction,
        now: LogicalTime,
    },
    Expire {
        txn: TransactionId,
    },
}

fn encode_action(enc: &mut Encoder, a: FeedbackAction) {
    enc.str(&a.to_string());
}

fn decode_action(dec: &mut Decoder<'_>) -> Result<FeedbackAction, CodecError> {
    match dec.str()? {
        "P" => Ok(FeedbackAction::P),
        "N" => Ok(FeedbackAction::N),
        other => Err(CodecError::Malformed(format!("bad feedback {other:?}"))),
    }
}

impl Canonical for Event {
    fn encode_into(&self, enc: &mut Encoder) {
        match self {
            Event::Open {
                txn,
                buyer,
                seller,
                now,
                deadline,
            } => {
                enc.str("open")
                    .u64(txn.0)
                    .str(&buyer.0)
                    .str(&seller.0)
                    .u64(*now);
                match deadline {
                    Some(d) => enc.bool(true).u64(*d),
                    None => enc.bool(false),
                };
            }
            Event::Submit {
                txn,
                party,
                action,
                now,
            } => {
                enc.str("submit").u64(txn.0).str(&party.0);
                encode_action(enc, *action);
                enc.u64(*now);
            }
            Event::Expire { txn } => {
                enc.str("expire").u64(txn.0);
            }
        }
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        match dec.str()? {
            "open" => {
                let txn = TransactionId(dec.u64()?);
                let buyer = PartyId::new(dec.str()?);
                let seller = PartyId::new(dec.str()?);
                let now = dec.u64()?;
                let deadline = if dec.bool()? { Some(dec.u64()?) } else { None };
                Ok(Event::Open {
                    txn,
                    buyer,
                    seller,
                    now,
                    deadline,
                })
            }
            "submit" => Ok(Event::Submit {
                txn: TransactionId(dec.u64()?),
                party: PartyId::new(dec.str()?),
                action: decode_action(dec)?,
                now: dec.u64()?,
            }),
            "expire" => Ok(Event::Expire {
                txn: TransactionId(dec.u64()?),
            }),
            other => Err(CodecError::Malformed(format!("bad escrow event {other:?}"))),
        }
    }
}

/// Single-writer escrow store.
#[derive(Debug, Default)]
pub struct EscrowStore {
    entries: BTreeMap<TransactionId, EscrowEntry>,
    next_id: u64,
    journal: Option<RecordFile>,
}

impl EscrowStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Open a journaled store, rebuilding state from any existing records.
    pub fn open_journal(path: impl AsRef<Path>) -> Result<Self, EscrowError> {
        let (file, records) = RecordFile::open(path)?;
        let mut store = Self::new();
        for rec in records {
            let ev = Event::from_canonical_bytes(&rec)?;
            store.apply(&ev)?;
        }
        store.journal = Some(file);
        Ok(store)
    }

    fn record(&mut self, ev: &Event) -> Result<(), EscrowError> {
        if let Some(j) = self.journal.as_mut() {
            j.append(&ev.to_canonical_bytes())?;
        }
        Ok(())
    }

    fn apply(&mut self, ev: &Event) -> Result<EscrowState, EscrowError> {
        match ev {
            Event::Open {
                txn,
                buyer,
                seller,
                now,
                deadline,
            } => {
                self.next_id = self.next_id.max(txn.0 + 1);
                self.entries.insert(
                    *txn,
                    EscrowEntry {
                        txn: *txn,
                        buyer: buyer.clone(),
                        seller: seller.clone(),
                        buyer_feedback: None,
                        seller_feedback: None,
                        state: EscrowState::Open,
                        opened_at: *now,
                        deadline: *deadline,
                    },
                );
                Ok(EscrowState::Open)
            }
            Event::Submit {
                txn, party, action, ..
            } => {
                let entry = self
                    .entries
                    .get_mut(txn)
                    .ok_or(EscrowError::UnknownTransaction(*txn))?;
                let side = if party == &entry.buyer {
                    Side::Buyer
                } else {
                    Side::Seller
                };
                let slot = match side {
                    Side::Buyer => &mut entry.buyer_feedback,
                    Side::Seller => &mut entry.seller_feedback,
                };
                *slot = Some(*action);
                entry.state = if entry.buyer_feedback.is_some() && entry.seller_feedback.is_some() {
                    EscrowState::Released
                } else {
                    EscrowState::OneSubmitted
                };
                Ok(entry.state)
            }
            Event::Expire { txn } => {
                let entry = self
                    .entries
                    .get_mut(txn)
                    .ok_or(EscrowError::UnknownTransaction(*txn))?;
                entry.buyer_feedback = None;
                entry.seller_feedback = None;
                entry.state = EscrowState::Expired;
                Ok(EscrowState::Expired)
            }
        }
    }

    fn commit(&mut self, ev: Event) -> Result<EscrowState, EscrowError> {
        self.record(&ev)?;
        self.apply(&ev)
    }

    /// `deadline = None` never expires.
    pub fn open_transaction(
        &mut self,
        buyer: PartyId,
        seller: PartyId,
        now: LogicalTime,
        deadline: Option<LogicalTime>,
    ) -> Result<TransactionId, EscrowError> {
        if buyer == seller {
            return Err(EscrowError::SameParty);
        }
        let txn = TransactionId(self.next_id);
        self.commit(Event::Open {
            txn,
            buyer,
            seller,
            now,
            deadline,
        })?;
        Ok(txn)
    }

    pub fn submit_feedback(
        &mut self,
        txn: TransactionId,
        party: &PartyId,
        action: FeedbackAction,
        now: LogicalTime,
    ) -> Result<EscrowState, EscrowError> {
        let entry = self
            .entries
            .get(&txn)
            .ok_or(EscrowError::UnknownTransaction(txn))?;
        if party != &entry.buyer && party != &entry.seller {
            return Err(EscrowError::NotAParty {
                txn,
                party: party.clone(),
            });
        }
        if entry.state == EscrowState::Expired || entry.is_due(now) {
            return Err(EscrowError::ExpiredTransaction(txn));
        }
        if entry.has_submitted(party) {
            return Err(EscrowError::DuplicateSubmission {
                txn,
                party: party.clone(),
            });
        }
        self.commit(Event::Submit {
            txn,
            party: party.clone(),
            action,
            now,
        })
    }

    /// Both feedbacks once released, `None` while anything is still escrowed
    /// or the entry expired.
    pub fn query_released(&self, txn: TransactionId) -> Result<Option<Released>, EscrowError> {
        self.entries
            .get(&txn)
            .map(EscrowEntry::released)
            .ok_or(EscrowError::UnknownTransaction(txn))
    }

    pub fn state(&self, txn: TransactionId) -> Result<EscrowState, EscrowError> {
        self.entries
            .get(&txn)
            .map(EscrowEntry::state)
            .ok_or(EscrowError::UnknownTransaction(txn))
    }

    pub fn entry(&self, txn: TransactionId) -> Option<&EscrowEntry> {
        self.entries.get(&txn)
    }

    pub fn entries(&self) -> impl Iterator<Item = &EscrowEntry> {
        self.entries.values()
    }

    /// Expire `txn` if it is past its deadline and not terminal. Returns
    /// whether it expired.
    pub fn expire(&mut self, txn: TransactionId, now: LogicalTime) -> Result<bool, EscrowError> {
        let entry = self
            .entries
            .get(&txn)
            .ok_or(EscrowError::UnknownTransaction(txn))?;
        if entry.state.is_terminal() || !entry.is_due(now) {
            return Ok(false);
        }
        self.commit(Event::Expire { txn })?;
        Ok(true)
    }

    pub fn expire_due(&mut self, now: LogicalTime) -> Result<usize, EscrowError> {
        let due: Vec<TransactionId> = self
            .entries
            .values()
            .filter(|e| !e.state.is_terminal() && e.is_due(now))
            .map(|e| e.txn)
            .collect();
        for txn in &due {
            self.commit(Event::Expire { txn: *txn })?;
        }
        Ok(due.len())
    }
}

/// Seeded run of `transactions` escrowed exchanges among `parties`
/// participants. In about one transaction in four the second party never
/// submits, and that entry expires `window` ticks after it opened.
///
/// CSV columns: `txn,buyer,seller,from_buyer,from_seller,state`. Feedback
/// columns are empty unless the entry was released.
pub fn simulate(
    transactions: u64,
    parties: u32,
    window: LogicalTime,
    seed: u64,
) -> Result<String, EscrowError> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut store = EscrowStore::new();
    let parties = parties.max(2);
    let mut ids = Vec::new();
    for t in 0..transactions {
        let b = rng.gen_range(0..parties);
        let s = (b + rng.gen_range(1..parties)) % parties;
        let buyer = PartyId::new(format!("p{b}"));
        let seller = PartyId::new(format!("p{s}"));
        let txn = store.open_transaction(buyer.clone(), seller.clone(), t, Some(t + window))?;
        let pick = |rng: &mut rand_chacha::ChaCha8Rng| {
            if rng.gen_bool(0.5) {
                FeedbackAction::P
            } else {
                FeedbackAction::N
            }
        };
        let (first, second) = if rng.gen_bool(0.5) {
            (buyer, seller)
        } else {
            (seller, buyer)
        };
        store.submit_feedback(txn, &first, pick(&mut rng), t)?;
        if rng.gen_ratio(3, 4) {
            store.submit_feedback(txn, &second, pick(&mut rng), t)?;
        }
        ids.push(txn);
    }
    store.expire_due(transactions + window)?;
    let mut out = String::from("txn,buyer,seller,from_buyer,from_seller,state\n");
    for txn in ids {
        let e = store.entry(txn).expect("opened above");
        let (fb, fs) = match store.query_released(txn)? {
            Some(r) => (r.from_buyer.to_string(), r.from_seller.to_string()),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{},{},{fb},{fs},{:?}\n",
            txn.0,
            e.buyer(),
            e.seller(),
            e.state()
        ));
    }
    Ok(out)
}

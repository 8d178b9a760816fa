//! Seeded end-to-end run of the protocol over the simulated network.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::audit;
use super::board::Board;
use super::group::GroupParams;
use super::messages::{Message, ReputationStatement};
use super::sp1::Sp1;
use super::sp2::{SamplingRule, Sp2, Sp2Config};
use super::user::User;
use super::verify::{verify_published_rating, verify_ratings, verify_reputation};
use super::{Outbound, ProtocolError};
use crate::crypto::{KeyProfile, Keypair};
use crate::sampling::ReleaseGate;
use crate::transport::{role_signing_key, Canonical, MessageLog, Role, SimNetwork};
use crate::zkp::Crs;

/// Single-message deviations by a provider.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Tamper {
    #[default]
    None,
    /// SP2 publishes `E(1 - zb)` in place of `E(zb)`.
    EZb,
    /// SP2 withholds one direction of the first complete bucket.
    Drop,
    /// SP2 publishes `E(1 - z)` in place of the rater's `E(z)`.
    EZ,
    /// SP2 publishes the proof with `v + 1`.
    V,
    /// SP2 publishes a rerandomized `c` that differs from its commitment.
    Commit,
    /// SP1 reports `s + 1`.
    S,
    /// SP1 leaves one rating out of the aggregate.
    Omit,
    /// SP1 reports `sample_count + 1`.
    Count,
}

impl Tamper {
    pub const ALL: [Tamper; 8] = [
        Tamper::EZb,
        Tamper::Drop,
        Tamper::EZ,
        Tamper::V,
        Tamper::Commit,
        Tamper::S,
        Tamper::Omit,
        Tamper::Count,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Tamper::None => "none",
            Tamper::EZb => "e_zb",
            Tamper::Drop => "drop",
            Tamper::EZ => "e_z",
            Tamper::V => "v",
            Tamper::Commit => "commit",
            Tamper::S => "s",
            Tamper::Omit => "omit",
            Tamper::Count => "count",
        }
    }
}

impl fmt::Display for Tamper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Tamper {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        std::iter::once(Tamper::None)
            .chain(Tamper::ALL)
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown tamper `{s}`"))
    }
}

#[derive(Debug, Clone)]
pub struct DemoConfig {
    pub transactions: usize,
    pub users: u32,
    pub seed: u64,
    pub profile: KeyProfile,
    pub rule: SamplingRule,
    pub tamper: Tamper,
    pub gate: ReleaseGate,
    /// Record file for SP2's escrow state.
    pub sp2_store: Option<PathBuf>,
    /// Drop and reopen SP2 after this many deliveries to it. Needs
    /// `sp2_store`.
    pub restart_sp2_after: Option<usize>,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            transactions: 20,
            users: 6,
            seed: 0,
            profile: KeyProfile::Toy,
            rule: SamplingRule::default(),
            tamper: Tamper::None,
            gate: ReleaseGate {
                min_scores: 1,
                high_positive_hold: 0,
                ..ReleaseGate::default()
            },
            sp2_store: None,
            restart_sp2_after: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject,
    Skipped,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Accept => "accept",
            Verdict::Reject => "reject",
            Verdict::Skipped => "skipped",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerdictRow {
    pub check: String,
    pub subject: String,
    pub verdict: Verdict,
    pub detail: String,
}

impl VerdictRow {
    fn new(check: &str, subject: impl ToString, ok: Result<(), String>) -> Self {
        let (verdict, detail) = match ok {
            Ok(()) => (Verdict::Accept, String::new()),
            Err(d) => (Verdict::Reject, d),
        };
        Self {
            check: check.into(),
            subject: subject.to_string(),
            verdict,
            detail,
        }
    }
}

#[derive(Debug)]
pub struct DemoOutcome {
    pub rows: Vec<VerdictRow>,
    pub log: MessageLog,
    pub board: Board,
    pub statements: Vec<ReputationStatement>,
    /// Plaintext `(sum b z, sum b)` per ratee, from the harness's records.
    pub oracle: BTreeMap<u32, (u64, u64)>,
    /// SP2's state digest at the end of the run.
    pub sp2_state: [u8; 32],
    pub sp2_published: Vec<BigUint>,
    /// Errors returned by role handlers during delivery.
    pub faults: Vec<(Role, ProtocolError)>,
}

impl DemoOutcome {
    pub fn all_accept(&self) -> bool {
        self.rows.iter().all(|r| r.verdict != Verdict::Reject)
    }

    /// Rows of the Verify operations that rejected.
    pub fn verify_rejections(&self) -> impl Iterator<Item = &VerdictRow> {
        self.rows
            .iter()
            .filter(|r| r.verdict == Verdict::Reject && r.check.starts_with("Verify"))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("check,subject,verdict,detail\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{}\n",
                r.check, r.subject, r.verdict, r.detail
            ));
        }
        s
    }
}

struct Harness {
    net: SimNetwork,
    board: Board,
    sp1: Sp1,
    sp2: Sp2,
    sp2_cfg: Sp2Config,
    users: Vec<User>,
    faults: Vec<(Role, ProtocolError)>,
    sp2_deliveries: usize,
}

impl Harness {
    fn send(&mut self, from: Role, out: Vec<Outbound>) -> Result<(), ProtocolError> {
        for (to, msg) in out {
            self.net
                .send(from, to, msg.kind(), msg.to_canonical_bytes())?;
        }
        Ok(())
    }

    fn drain(&mut self, cfg: &DemoConfig) -> Result<(), ProtocolError> {
        while let Some(env) = self.net.deliver_next()? {
            let msg = Message::from_canonical_bytes(&env.body)?;
            let to = env.to;
            let res = match to {
                Role::Board => Ok(self.board.handle(env.from, msg)),
                Role::Sp1 => self.sp1.handle(env.from, msg, &self.board),
                Role::Sp2 => {
                    let r = self.sp2.handle(env.from, msg);
                    self.sp2_deliveries += 1;
                    if cfg.restart_sp2_after == Some(self.sp2_deliveries) {
                        if let Some(path) = &cfg.sp2_store {
                            self.sp2 = Sp2::open(self.sp2_cfg.clone(), path)?;
                        }
                    }
                    r
                }
                Role::User(id) => self.users[id as usize].handle(env.from, msg, &self.board),
            };
            match res {
                Ok(out) => self.send(to, out)?,
                Err(e) => self.faults.push((to, e)),
            }
        }
        Ok(())
    }
}

fn plan_rng(seed: u64) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(b"REP/DEMO/plan");
    h.update(seed.to_be_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

pub fn run_demo(cfg: &DemoConfig) -> Result<DemoOutcome, ProtocolError> {
    if cfg.users < 2 {
        return Err(ProtocolError::UnknownTransaction);
    }
    let keys = Keypair::for_profile(cfg.profile, cfg.seed)?;
    let crs = Crs::from_seed(cfg.seed);
    let group = GroupParams::for_profile(cfg.profile, cfg.seed);
    let sp2_cfg = Sp2Config {
        pk: keys.public.clone(),
        crs: crs.clone(),
        seed: cfg.seed,
        rule: cfg.rule,
        tamper: cfg.tamper,
    };
    let sp2 = match &cfg.sp2_store {
        Some(path) => Sp2::open(sp2_cfg.clone(), path)?,
        None => Sp2::new(sp2_cfg.clone()),
    };
    let mut net = SimNetwork::new(cfg.seed);
    let roles = [Role::Sp1, Role::Sp2, Role::Board]
        .into_iter()
        .chain((0..cfg.users).map(Role::User));
    for role in roles {
        net.register(role, role_signing_key(cfg.seed, role));
    }
    let mut h = Harness {
        net,
        board: Board::new(),
        sp1: Sp1::new(keys, crs, cfg.tamper),
        sp2,
        sp2_cfg,
        users: (0..cfg.users)
            .map(|i| User::new(i, group.clone(), cfg.seed))
            .collect(),
        faults: Vec::new(),
        sp2_deliveries: 0,
    };

    let setup = h.sp1.setup();
    h.send(Role::Sp1, vec![setup])?;
    h.drain(cfg)?;

    let mut plan = plan_rng(cfg.seed);
    for txn in 0..cfg.transactions as u64 {
        let a = plan.gen_range(0..cfg.users);
        let b = (a + plan.gen_range(1..cfg.users)) % cfg.users;
        let (za, zb) = (plan.gen_range(0..2u8), plan.gen_range(0..2u8));
        let out = h.users[a as usize].start(txn, b, za)?;
        h.send(Role::User(a), out)?;
        let out = h.users[b as usize].start(txn, a, zb)?;
        h.send(Role::User(b), out)?;
    }
    h.drain(cfg)?;

    let mut rows = Vec::new();
    if cfg.transactions == 0 {
        return finish(h, rows, Vec::new(), BTreeMap::new());
    }

    let (pk, crs) = {
        let (pk, crs) = h.board.params()?;
        (pk.clone(), crs.clone())
    };
    for user in &h.users {
        let verdicts = verify_ratings(user, &h.board);
        if verdicts.is_empty() {
            continue;
        }
        let first_fail = verdicts.iter().find_map(|v| v.failure);
        rows.push(VerdictRow::new(
            "VerifyRatings",
            user.role(),
            first_fail.map_or(Ok(()), |f| Err(f.to_string())),
        ));
    }
    let board_check = h
        .board
        .ratings()
        .iter()
        .try_for_each(|r| verify_published_rating(&pk, &crs, &h.board, r))
        .map_err(str::to_string);
    rows.push(VerdictRow::new("VerifyBoard", Role::Board, board_check));

    // z per ratee token, as the raters chose it
    let z_of: BTreeMap<BigUint, u8> = h
        .users
        .iter()
        .flat_map(|u| u.transactions().values())
        .filter_map(|t| t.peer_token.clone().map(|tok| (tok, t.z)))
        .collect();
    let mut oracle = BTreeMap::new();
    let mut statements = Vec::new();
    for ratee in h.board.ratees() {
        let subject = Role::User(ratee);
        let stmt = match h.sp1.publish_reputation(ratee, &h.board, &cfg.gate) {
            Ok(s) => s,
            Err(ProtocolError::GateClosed) => {
                rows.push(VerdictRow {
                    check: "VerifyReputation".into(),
                    subject: subject.to_string(),
                    verdict: Verdict::Skipped,
                    detail: "gate closed".into(),
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        h.send(Role::Sp1, vec![(Role::Board, Message::Reputation(stmt))])?;
        h.drain(cfg)?;
        let posted = h
            .board
            .reputation_for(ratee)
            .cloned()
            .ok_or(ProtocolError::NotSetUp)?;
        let check = verify_reputation(&pk, &h.board, &posted).map_err(str::to_string);
        rows.push(VerdictRow::new("VerifyReputation", subject, check));

        let (mut s, mut count) = (0u64, 0u64);
        for r in h.board.ratings_for(ratee) {
            let b = h.sp2.secrets().get(&r.ratee_token).map_or(0, |x| x.b) as u64;
            let z = z_of.get(&r.ratee_token).copied().unwrap_or(0) as u64;
            s += b * z;
            count += b;
        }
        let matches = posted.s == BigUint::from(s) && posted.sample_count == BigUint::from(count);
        rows.push(VerdictRow::new(
            "Oracle",
            subject,
            if matches {
                Ok(())
            } else {
                Err(format!(
                    "published s={} count={}, expected {s} {count}",
                    posted.s, posted.sample_count
                ))
            },
        ));
        oracle.insert(ratee, (s, count));
        statements.push(posted);
    }

    for (name, res) in audit::all(h.net.log(), pk.id()) {
        rows.push(VerdictRow::new("Audit", name, res));
    }
    let integrity = h
        .net
        .log()
        .verify_chain()
        .and_then(|_| h.net.log().verify_signatures(&h.net.verifying_keys()))
        .map_err(|e| e.to_string());
    rows.push(VerdictRow::new("Audit", "log-integrity", integrity));

    finish(h, rows, statements, oracle)
}

fn finish(
    h: Harness,
    rows: Vec<VerdictRow>,
    statements: Vec<ReputationStatement>,
    oracle: BTreeMap<u32, (u64, u64)>,
) -> Result<DemoOutcome, ProtocolError> {
    Ok(DemoOutcome {
        rows,
        log: h.net.log().clone(),
        sp2_state: h.sp2.state_digest(),
        sp2_published: h.sp2.published().to_vec(),
        board: h.board,
        statements,
        oracle,
        faults: h.faults,
    })
}

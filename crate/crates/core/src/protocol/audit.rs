//! Assertions over a delivered message log.
//!
//! Each audit returns `Err` with the offending log position and reason.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;

use super::messages::Message;
use crate::crypto::KeyId;
use crate::transport::{Canonical, Envelope, MessageLog, Role};

pub type AuditResult = Result<(), String>;

fn decoded(log: &MessageLog) -> Result<Vec<(&Envelope, Message)>, String> {
    log.envelopes()
        .enumerate()
        .map(|(i, e)| {
            Message::from_canonical_bytes(&e.body)
                .map(|m| (e, m))
                .map_err(|err| format!("#{i}: undecodable body: {err}"))
        })
        .collect()
}

/// No commitment or rating for a direction reaches the board before both
/// directions of its transaction reached the escrow.
pub fn escrow_safety(log: &MessageLog) -> AuditResult {
    let mut joint_of: BTreeMap<BigUint, BigUint> = BTreeMap::new();
    let mut arrived: BTreeMap<BigUint, usize> = BTreeMap::new();
    for (i, (env, msg)) in decoded(log)?.into_iter().enumerate() {
        match msg {
            Message::Submission(s) if env.to == Role::Sp2 => {
                joint_of.insert(s.ratee_token, s.joint.clone());
                *arrived.entry(s.joint).or_default() += 1;
            }
            Message::Commit(c) if env.to == Role::Board => {
                check_both(i, &c.ratee_token, &joint_of, &arrived)?
            }
            Message::Rating(r) if env.to == Role::Board => {
                check_both(i, &r.ratee_token, &joint_of, &arrived)?
            }
            _ => {}
        }
    }
    Ok(())
}

fn check_both(
    i: usize,
    token: &BigUint,
    joint_of: &BTreeMap<BigUint, BigUint>,
    arrived: &BTreeMap<BigUint, usize>,
) -> AuditResult {
    let joint = joint_of
        .get(token)
        .ok_or(format!("#{i}: post for a rating never submitted"))?;
    if arrived.get(joint).copied().unwrap_or(0) < 2 {
        return Err(format!("#{i}: post before both directions were escrowed"));
    }
    Ok(())
}

/// SP1 decrypts nothing of a rating before its sampling commitment is on
/// the board, and every published rating follows its commitment.
pub fn commitment_ordering(log: &MessageLog) -> AuditResult {
    let mut committed = BTreeSet::new();
    for (i, (env, msg)) in decoded(log)?.into_iter().enumerate() {
        match msg {
            Message::Commit(c) if env.to == Role::Board => {
                committed.insert(c.ratee_token);
            }
            Message::FinalizeRequest { ratee_token, .. }
                if env.to == Role::Sp1 && !committed.contains(&ratee_token) =>
            {
                return Err(format!("#{i}: finalize request before commitment"));
            }
            Message::Rating(r) if env.to == Role::Board && !committed.contains(&r.ratee_token) => {
                return Err(format!("#{i}: rating before commitment"));
            }
            _ => {}
        }
    }
    Ok(())
}

/// SP1's view, and the public board it reads, carry no rater identity and
/// nothing that links a transaction to its parties.
pub fn sp1_view_privacy(log: &MessageLog) -> AuditResult {
    let decoded = decoded(log)?;
    let joints: Vec<Vec<u8>> = decoded
        .iter()
        .filter_map(|(_, m)| match m {
            Message::Submission(s) => Some(s.joint.to_str_radix(16).into_bytes()),
            _ => None,
        })
        .collect();
    for (i, (env, msg)) in decoded.iter().enumerate() {
        if env.to != Role::Sp1 && env.to != Role::Board {
            continue;
        }
        if matches!(env.from, Role::User(_)) {
            return Err(format!(
                "#{i}: {} received a message from {}",
                env.to, env.from
            ));
        }
        if matches!(
            msg,
            Message::Submission(_) | Message::Token { .. } | Message::Submitted { .. }
        ) {
            return Err(format!("#{i}: {} received a `{}`", env.to, msg.kind()));
        }
        if joints.iter().any(|j| contains(&env.body, j)) {
            return Err(format!("#{i}: joint token visible to {}", env.to));
        }
    }
    Ok(())
}

/// SP2 sees only ciphertexts under SP1's key (it holds no key of its own)
/// and no plaintext rating field exists in any message it receives. Users
/// never hear from SP2 directly.
pub fn sp2_view_privacy(log: &MessageLog, sp1_key: KeyId) -> AuditResult {
    for (i, (env, msg)) in decoded(log)?.into_iter().enumerate() {
        if matches!(env.to, Role::User(_)) && env.from == Role::Sp2 {
            return Err(format!("#{i}: SP2 wrote to {}", env.to));
        }
        if env.to != Role::Sp2 {
            continue;
        }
        let ok = match &msg {
            Message::Submission(s) => {
                s.share.e_z.key() == sp1_key
                    && s.share.e_d.key() == sp1_key
                    && s.share.enc_r1.key() == sp1_key
            }
            Message::Receipt { .. } | Message::FinalizeReply { .. } => true,
            _ => false,
        };
        if !ok {
            return Err(format!(
                "#{i}: SP2 received `{}` outside its view",
                msg.kind()
            ));
        }
    }
    Ok(())
}

fn contains(haystack: &[u8], needle: &[u8]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

/// All four audits, named.
pub fn all(log: &MessageLog, sp1_key: KeyId) -> Vec<(&'static str, AuditResult)> {
    vec![
        ("escrow-safety", escrow_safety(log)),
        ("commitment-ordering", commitment_ordering(log)),
        ("sp1-view-privacy", sp1_view_privacy(log)),
        ("sp2-view-privacy", sp2_view_privacy(log, sp1_key)),
    ]
}

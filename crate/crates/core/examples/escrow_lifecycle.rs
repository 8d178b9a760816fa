//! Plaintext feedback escrow with a deadline and a journal.

use repute::escrow::{EscrowStore, PartyId};
use repute::game::FeedbackAction;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("repute-escrow-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let journal = dir.join("escrow.log");

    let (alice, bob) = (PartyId::new("alice"), PartyId::new("bob"));
    let mut store = EscrowStore::open_journal(&journal)?;
    let t1 = store.open_transaction(alice.clone(), bob.clone(), 0, None)?;
    let t2 = store.open_transaction(alice.clone(), bob.clone(), 0, Some(10))?;

    store.submit_feedback(t1, &alice, FeedbackAction::N, 1)?;
    println!(
        "t1 after one feedback: {:?}, visible {:?}",
        store.state(t1)?,
        store.query_released(t1)?
    );
    store.submit_feedback(t1, &bob, FeedbackAction::P, 2)?;
    println!("t1 after both: {:?}", store.query_released(t1)?);

    store.submit_feedback(t2, &bob, FeedbackAction::N, 3)?;
    let expired = store.expire_due(11)?;
    println!(
        "expired {expired}; t2 is {:?}, visible {:?}",
        store.state(t2)?,
        store.query_released(t2)?
    );

    let reopened = EscrowStore::open_journal(&journal)?;
    println!(
        "rebuilt from journal: t1 {:?}, t2 {:?}",
        reopened.state(t1)?,
        reopened.state(t2)?
    );
    std::fs::remove_dir_all(dir)?;
    Ok(())
}

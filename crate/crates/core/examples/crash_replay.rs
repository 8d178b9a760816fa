//! SP2 persists every message it receives and, after a restart, rebuilds
//! the same escrow state from its record file.

use repute::protocol::{run_demo, DemoConfig};

fn main() -> Result<(), repute::protocol::ProtocolError> {
    let dir = std::env::temp_dir().join(format!("repute-replay-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let base = DemoConfig {
        transactions: 8,
        seed: 9,
        ..DemoConfig::default()
    };

    let straight = run_demo(&DemoConfig {
        sp2_store: Some(dir.join("a.log")),
        ..base.clone()
    })?;
    let restarted = run_demo(&DemoConfig {
        sp2_store: Some(dir.join("b.log")),
        restart_sp2_after: Some(9),
        ..base
    })?;
    println!(
        "published {} ratings both times",
        straight.sp2_published.len()
    );
    println!(
        "same final state: {}",
        straight.sp2_state == restarted.sp2_state
    );
    println!(
        "same log: {}",
        straight.log.to_record_bytes() == restarted.log.to_record_bytes()
    );
    std::fs::remove_dir_all(dir).ok();
    Ok(())
}

//! Full protocol run: users rate each other through the escrow, SP2
//! samples, SP1 publishes reputations, everyone verifies.

use repute::protocol::{run_demo, DemoConfig, Tamper};

fn main() -> Result<(), repute::protocol::ProtocolError> {
    let honest = run_demo(&DemoConfig {
        transactions: 10,
        seed: 5,
        ..DemoConfig::default()
    })?;
    print!("{}", honest.to_csv());
    for s in &honest.statements {
        println!(
            "user/{}: s = {} from {} sampled ratings",
            s.ratee, s.s, s.sample_count
        );
    }

    let tampered = run_demo(&DemoConfig {
        transactions: 10,
        seed: 5,
        tamper: Tamper::EZb,
        ..DemoConfig::default()
    })?;
    for row in tampered.verify_rejections() {
        println!(
            "with e_zb tampered: {} {} rejects ({})",
            row.check, row.subject, row.detail
        );
    }
    Ok(())
}

//! Seeded network, signed envelopes and the hash-chained log.

use repute::transport::{role_signing_key, MessageLog, Role, SimNetwork};

fn main() -> Result<(), repute::transport::TransportError> {
    let mut net = SimNetwork::new(3);
    for role in [Role::User(0), Role::User(1), Role::Sp2] {
        net.register(role, role_signing_key(3, role));
    }
    for i in 0..3u8 {
        net.send(Role::User(0), Role::Sp2, "note", vec![i])?;
        net.send(Role::User(1), Role::Sp2, "note", vec![10 + i])?;
    }
    while let Some(env) = net.deliver_next()? {
        println!("{} -> {} #{} {:?}", env.from, env.to, env.seq, env.body);
    }

    let log = net.log();
    log.verify_chain()?;
    log.verify_signatures(&net.verifying_keys())?;
    println!(
        "chain and signatures verify; SP2 received {}",
        log.received_by(Role::Sp2).len()
    );

    let mut bytes = log.to_record_bytes();
    let last = bytes.len() - 40;
    bytes[last] ^= 1;
    println!(
        "flipped byte detected: {}",
        MessageLog::from_record_bytes(&bytes).is_err()
    );
    Ok(())
}

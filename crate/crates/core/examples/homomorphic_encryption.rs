//! Paillier with tracked randomness, and Damgard-Jurik for plaintexts
//! larger than n.

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use repute::crypto::{KeyProfile, Keypair};

fn main() -> Result<(), repute::crypto::CryptoError> {
    let kp = Keypair::for_profile(KeyProfile::Toy, 1)?;
    let (pk, sk) = (&kp.public, &kp.secret);
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    let (c1, r1) = pk.encrypt_fresh(&BigUint::from(20u32), &mut rng)?;
    let (c2, r2) = pk.encrypt_fresh(&BigUint::from(22u32), &mut rng)?;
    let sum = pk.add(&c1, &c2)?;
    println!("dec(E(20) E(22)) = {}", sk.decrypt(&sum)?);
    println!(
        "dec(E(20)^3) = {}",
        sk.decrypt(&pk.smul(&c1, &BigUint::from(3u32))?)?
    );

    // The randomness of a product is the product of the randomness.
    let opened = sk.open(&sum)?;
    println!("randomness tracked: {}", opened.r == (&r1 * &r2) % pk.n());
    println!(
        "re-encryption matches: {}",
        pk.encrypt(&opened.x, &opened.r)? == sum
    );

    let big = pk.n() + 5u32;
    let (d, _) = pk.dj_encrypt_fresh(&big, &mut rng)?;
    println!(
        "Damgard-Jurik roundtrip of n + 5: {}",
        sk.dj_decrypt(&d)? == big
    );
    Ok(())
}

//! Bit proofs and the multiplication proof, computed jointly by a rater
//! and the sampling provider.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use repute::crypto::{KeyProfile, Keypair};
use repute::zkp::distributed::assemble;
use repute::zkp::{rater_share, sp1_finalize, sp2_complete, verify_bit, verify_mul, Crs};

fn main() -> Result<(), repute::zkp::ZkpError> {
    let kp = Keypair::for_profile(KeyProfile::Toy, 2)?;
    let pk = &kp.public;
    let crs = Crs::from_seed(2);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ctx = b"transaction 17";

    for (z, b) in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
        let r_z = pk.random_unit(&mut rng);
        let (share, _) = rater_share(pk, &crs, ctx, z, &r_z, &mut rng)?;
        let r_b = pk.random_unit(&mut rng);
        let (out, _) = sp2_complete(pk, &crs, ctx, &share, b, &r_b, &mut rng)?;
        let r2 = sp1_finalize(&kp.secret, &out.enc_r2inv)?;
        let (stmt, proof) = assemble(&share, &out, r2);
        println!(
            "z={z} b={b}: bit proof {}, product proof {}, E(zb) decrypts to {}",
            verify_bit(pk, &crs, ctx, &out.c, &out.bit_proof),
            verify_mul(pk, &crs, ctx, &stmt, &proof),
            kp.secret.decrypt(&stmt.e_gamma)?
        );
        let mut forged = proof.clone();
        forged.v += 1u32;
        assert!(!verify_mul(pk, &crs, ctx, &stmt, &forged));
    }
    Ok(())
}

//! Probabilistic prime generation.

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::Rng;

const SMALL_PRIMES: [u32; 54] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193,
    197, 199, 211, 223, 227, 229, 233, 239, 241, 251,
];

pub const MR_ROUNDS: usize = 40;

/// Miller-Rabin with `rounds` random bases, after trial division.
pub fn is_probable_prime<R: Rng + ?Sized>(n: &BigUint, rounds: usize, rng: &mut R) -> bool {
    let two = BigUint::from(2u32);
    if n < &two {
        return false;
    }
    for &sp in &SMALL_PRIMES {
        let sp = BigUint::from(sp);
        if n == &sp {
            return true;
        }
        if (n % &sp).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().expect("n > 1");
    let d = &n_minus_1 >> s;
    'witness: for _ in 0..rounds {
        let a = rng.gen_biguint_range(&two, &n_minus_1);
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
            if x.is_one() {
                return false;
            }
        }
        return false;
    }
    true
}

/// Random prime of exactly `bits` bits with the top two bits set, so the
/// product of two such primes has exactly `2 * bits` bits.
///
/// Returns `None` after `max_candidates` odd candidates fail.
pub fn random_prime<R: Rng + ?Sized>(
    bits: u64,
    max_candidates: usize,
    rng: &mut R,
) -> Option<BigUint> {
    assert!(bits >= 3, "prime needs at least 3 bits");
    for _ in 0..max_candidates {
        let mut c = rng.gen_biguint(bits);
        c.set_bit(bits - 1, true);
        c.set_bit(bits - 2, true);
        c.set_bit(0, true);
        if is_probable_prime(&c, MR_ROUNDS, rng) {
            return Some(c);
        }
    }
    None
}

/// Safe prime `P = 2q + 1` of `bits` bits.
pub fn random_safe_prime<R: Rng + ?Sized>(
    bits: u64,
    max_candidates: usize,
    rng: &mut R,
) -> Option<(BigUint, BigUint)> {
    assert!(bits >= 4, "safe prime needs at least 4 bits");
    for _ in 0..max_candidates {
        let mut q = rng.gen_biguint(bits - 1);
        q.set_bit(bits - 2, true);
        q.set_bit(0, true);
        let p: BigUint = (&q << 1u32) + 1u32;
        if is_probable_prime(&q, MR_ROUNDS, rng) && is_probable_prime(&p, MR_ROUNDS, rng) {
            return Some((p, q));
        }
    }
    None
}

/// Used by tests and key validation on tiny inputs.
pub fn is_prime_trial(n: u64) -> bool {
    n >= 2
        && (2..)
            .take_while(|d: &u64| d * d <= n)
            .all(|d| !n.is_multiple_of(d))
}

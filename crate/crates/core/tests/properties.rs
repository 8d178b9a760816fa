use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use proptest::prelude::*;

use repute::crypto::{KeyProfile, Keypair};
use repute::escrow::{EscrowState, EscrowStore, PartyId};
use repute::game::{
    build_matrix, classify, extortion_analysis, pure_nash, sequential_spe, strictly_dominant,
    FeedbackAction, GameSpec, Player, PlayerParams,
};
use repute::protocol::Message;
use repute::sampling::{expected_error, worst_case_expected_error};
use repute::transport::Canonical;

use FeedbackAction::{N, P};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `(delta, f, r)` in hundredths with `r + f < delta` and `r != f`. With
/// `f = 0` the N-wanting player is only weakly dominant, so `f > 0`.
fn params() -> impl Strategy<Value = PlayerParams> {
    (1i64..2000, 1i64..2000, 0i64..2000)
        .prop_filter("r + f < delta, r != f", |(d, f, r)| f + r < *d && f != r)
        .prop_map(|(d, f, r)| PlayerParams::new(rat(d, 100), rat(f, 100), rat(r, 100)).unwrap())
}

fn action() -> impl Strategy<Value = FeedbackAction> {
    prop_oneof![Just(P), Just(N)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn nn_game_is_a_prisoners_dilemma(p in params()) {
        let spec = GameSpec::symmetric(N, N, p);
        let m = build_matrix(&spec);
        prop_assert!(strictly_dominant(&m, Player::Alice, N));
        prop_assert!(strictly_dominant(&m, Player::Bob, N));
        prop_assert_eq!(pure_nash(&m), vec![(N, N)]);
        let (pp, nn) = (m.get((P, P)), m.get((N, N)));
        prop_assert!(pp.0 > nn.0 && pp.1 > nn.1);
    }

    #[test]
    fn pp_game_equilibria_follow_the_regime(p in params()) {
        let revenge = p.r() > p.f();
        let m = build_matrix(&GameSpec::symmetric(P, P, p));
        let mut ne = pure_nash(&m);
        ne.sort();
        if revenge {
            prop_assert_eq!(ne, vec![(P, P), (N, N)]);
        } else {
            prop_assert_eq!(ne, vec![(P, P)]);
        }
    }

    #[test]
    fn the_player_who_wants_n_has_n_dominant(p in params(), q in params(), alice_wants_n in any::<bool>()) {
        let (wa, wb) = if alice_wants_n { (N, P) } else { (P, N) };
        let m = build_matrix(&GameSpec::new(wa, wb, p, q));
        let who = if alice_wants_n { Player::Alice } else { Player::Bob };
        prop_assert!(strictly_dominant(&m, who, N));
    }

    #[test]
    fn scaling_changes_nothing(
        p in params(), q in params(), wa in action(), wb in action(),
        num in 1i64..50, den in 1i64..50,
    ) {
        let spec = GameSpec::new(wa, wb, p, q);
        let scaled = spec.scaled(&rat(num, den)).unwrap();
        prop_assert_eq!(pure_nash(&build_matrix(&spec)), pure_nash(&build_matrix(&scaled)));
        prop_assert_eq!(classify(&spec).ok(), classify(&scaled).ok());
        for first in [Player::Alice, Player::Bob] {
            prop_assert_eq!(sequential_spe(&spec, first).ok(), sequential_spe(&scaled, first).ok());
            prop_assert_eq!(
                extortion_analysis(&spec, first).ok().map(|r| r.extorted),
                extortion_analysis(&scaled, first).ok().map(|r| r.extorted)
            );
        }
    }

    #[test]
    fn expected_error_is_symmetric(n in 1u64..40, p_frac in 0.0f64..=1.0, r in 1u64..30) {
        let p = (p_frac * n as f64).round() as u64;
        prop_assert_eq!(expected_error(n, p, r), expected_error(n, n - p, r));
        if r % 2 == 1 {
            prop_assert!(expected_error(n, p, r) <= worst_case_expected_error(r));
        }
    }

    #[test]
    fn message_codec_roundtrips(txn in any::<u64>(), token in any::<u128>(), r2 in any::<u128>()) {
        let msgs = [
            Message::Token { txn, token: BigUint::from(token) },
            Message::Submitted { txn },
            Message::Receipt { ratee_token: BigUint::from(token) },
            Message::FinalizeReply { ratee_token: BigUint::from(token), r2: BigUint::from(r2) },
        ];
        for m in &msgs {
            let bytes = m.to_canonical_bytes();
            prop_assert_eq!(&Message::from_canonical_bytes(&bytes).unwrap(), m);
            prop_assert!(Message::from_canonical_bytes(&bytes[..bytes.len() - 1]).is_err());
        }
        let mut encodings: Vec<Vec<u8>> = msgs.iter().map(Canonical::to_canonical_bytes).collect();
        encodings.sort();
        encodings.dedup();
        prop_assert_eq!(encodings.len(), msgs.len());
    }
}

#[derive(Debug, Clone)]
enum Op {
    Open {
        deadline: Option<u64>,
    },
    Submit {
        txn: usize,
        buyer: bool,
        positive: bool,
    },
    Tick,
    ExpireDue,
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        prop::option::of(1u64..8).prop_map(|deadline| Op::Open { deadline }),
        (0usize..6, any::<bool>(), any::<bool>()).prop_map(|(txn, buyer, positive)| Op::Submit {
            txn,
            buyer,
            positive
        }),
        Just(Op::Tick),
        Just(Op::ExpireDue),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// A feedback is visible exactly when its entry is released, both at
    /// once, and states only move forward.
    #[test]
    fn escrow_safety_under_any_interleaving(ops in prop::collection::vec(op(), 1..60)) {
        let (buyer, seller) = (PartyId::new("b"), PartyId::new("s"));
        let mut store = EscrowStore::new();
        let mut txns = Vec::new();
        let mut submitted: Vec<[Option<FeedbackAction>; 2]> = Vec::new();
        let mut last_state = Vec::new();
        let mut now = 0u64;
        for op in ops {
            match op {
                Op::Open { deadline } => {
                    txns.push(store.open_transaction(buyer.clone(), seller.clone(), now, deadline.map(|d| now + d)).unwrap());
                    submitted.push([None, None]);
                    last_state.push(EscrowState::Open);
                }
                Op::Submit { txn, buyer: is_buyer, positive } if txn < txns.len() => {
                    let party = if is_buyer { &buyer } else { &seller };
                    let action = if positive { P } else { N };
                    if store.submit_feedback(txns[txn], party, action, now).is_ok() {
                        submitted[txn][usize::from(!is_buyer)] = Some(action);
                    }
                }
                Op::Submit { .. } => {}
                Op::Tick => now += 1,
                Op::ExpireDue => {
                    store.expire_due(now).unwrap();
                }
            }
            for (i, txn) in txns.iter().enumerate() {
                let state = store.state(*txn).unwrap();
                prop_assert!(state >= last_state[i]);
                prop_assert!(!last_state[i].is_terminal() || state == last_state[i]);
                last_state[i] = state;
                match store.query_released(*txn).unwrap() {
                    Some(r) => {
                        prop_assert_eq!(state, EscrowState::Released);
                        prop_assert_eq!(Some(r.from_buyer), submitted[i][0]);
                        prop_assert_eq!(Some(r.from_seller), submitted[i][1]);
                    }
                    None => prop_assert_ne!(state, EscrowState::Released),
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn paillier_laws(x in any::<u64>(), y in any::<u64>(), k in any::<u32>(), seed in any::<u64>()) {
        use rand::SeedableRng;
        let kp = Keypair::for_profile(KeyProfile::Toy, 31).unwrap();
        let (pk, sk) = (&kp.public, &kp.secret);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let (x, y, k) = (BigUint::from(x), BigUint::from(y), BigUint::from(k));
        let (cx, _) = pk.encrypt_fresh(&x, &mut rng).unwrap();
        let (cy, _) = pk.encrypt_fresh(&y, &mut rng).unwrap();
        prop_assert_eq!(sk.decrypt(&pk.add(&cx, &cy).unwrap()).unwrap(), (&x + &y) % pk.n());
        prop_assert_eq!(sk.decrypt(&pk.smul(&cx, &k).unwrap()).unwrap(), (&x * &k) % pk.n());
        let sum = pk.add(&cx, &cy).unwrap();
        let m = sk.decrypt(&sum).unwrap();
        let r = sk.recover_randomness(&sum, &m).unwrap();
        prop_assert_eq!(pk.encrypt(&m, &r).unwrap(), sum);
        let (d, _) = pk.dj_encrypt_fresh(&x, &mut rng).unwrap();
        prop_assert_eq!(sk.dj_decrypt(&d).unwrap(), x);
    }
}

#[test]
fn worst_case_never_increases_on_even_r() {
    let mut prev = worst_case_expected_error(2);
    for r in (4..=128).step_by(2) {
        let cur = worst_case_expected_error(r);
        assert!(cur <= prev, "r = {r}");
        prev = cur;
    }
}

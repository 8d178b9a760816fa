//! Acceptance suite. Prints one `[PASS]` or `[FAIL]` line per criterion and
//! exits nonzero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use common::{accepts, distributed, mutate, FIELDS};
use repute::crypto::{KeyProfile, Keypair, Opening};
use repute::game::{
    build_matrix, extortion_analysis, pareto_dominates, pure_nash, strictly_dominant,
    FeedbackAction, GameSpec, Player, PlayerParams,
};
use repute::protocol::{run_demo, DemoConfig, Tamper, Verdict};
use repute::sampling::accuracy::monte_carlo_error;
use repute::sampling::breach::{
    breach_probability, high_p_rows, small_n_rows, to_f64, BreachCase, BreachExperiment,
};
use repute::sampling::{expected_error, min_samples, worst_case_expected_error, ScoreSet};
use repute::zkp::{prove_bit, prove_mul, rater_share, verify_bit, verify_mul, Crs, MulWitness};

use FeedbackAction::{N, P};

type Outcome = Result<String, String>;

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

// ---------------------------------------------------------------- games

fn matrix_of(rows: [[(i64, i64); 2]; 2]) -> Vec<(BigRational, BigRational)> {
    rows.iter()
        .flatten()
        .map(|&(a, b)| (rat(a, 1), rat(b, 1)))
        .collect()
}

fn entries(spec: &GameSpec) -> Vec<(BigRational, BigRational)> {
    let m = build_matrix(spec);
    [(P, P), (P, N), (N, P), (N, N)]
        .into_iter()
        .map(|p| m.get(p).clone())
        .collect()
}

fn concrete_matrices() -> Outcome {
    let params = PlayerParams::from_ints(5, 3, 1).map_err(|e| e.to_string())?;
    let expected = [
        ((P, P), [[(8, 8), (-2, 5)], [(5, -2), (-4, -4)]]),
        ((P, N), [[(8, 5), (-2, 8)], [(5, -5), (-4, -1)]]),
        ((N, P), [[(5, 8), (-5, 5)], [(8, -2), (-1, -4)]]),
        ((N, N), [[(5, 5), (-5, 8)], [(8, -5), (-1, -1)]]),
    ];
    let mut pairs = 0;
    for ((wa, wb), rows) in expected {
        let got = entries(&GameSpec::symmetric(wa, wb, params.clone()));
        let want = matrix_of(rows);
        check(got == want, || format!("{wa}-{wb}: got {got:?}"))?;
        pairs += got.len();
    }
    Ok(format!("{pairs} payoff pairs exact"))
}

#[derive(Clone, Copy)]
enum Regime {
    RevengeWeaker,
    RevengeStronger,
}

/// Uniform draw on a 1/1000 grid with `0 < f`, `r + f < delta` and the
/// requested ordering of `r` and `f`.
fn draw_params(rng: &mut ChaCha8Rng, regime: Regime) -> PlayerParams {
    loop {
        let d = rng.gen_range(1..=10_000i64);
        let f = rng.gen_range(1..=10_000i64);
        let r = rng.gen_range(0..=10_000i64);
        let ordered = match regime {
            Regime::RevengeWeaker => r < f,
            Regime::RevengeStronger => r > f,
        };
        if f + r < d && ordered {
            return PlayerParams::new(rat(d, 1000), rat(f, 1000), rat(r, 1000))
                .expect("valid draw");
        }
    }
}

fn any_regime(rng: &mut ChaCha8Rng) -> PlayerParams {
    let regime = if rng.gen() {
        Regime::RevengeWeaker
    } else {
        Regime::RevengeStronger
    };
    draw_params(rng, regime)
}

fn equilibrium_claims() -> Outcome {
    const DRAWS: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut violations = Vec::new();
    for i in 0..DRAWS {
        let (a, b) = (
            draw_params(&mut rng, Regime::RevengeWeaker),
            draw_params(&mut rng, Regime::RevengeWeaker),
        );
        if pure_nash(&build_matrix(&GameSpec::new(P, P, a, b))) != vec![(P, P)] {
            violations.push(format!("P-P r<f draw {i}"));
        }

        let (a, b) = (
            draw_params(&mut rng, Regime::RevengeStronger),
            draw_params(&mut rng, Regime::RevengeStronger),
        );
        let mut ne = pure_nash(&build_matrix(&GameSpec::new(P, P, a, b)));
        ne.sort();
        if ne != vec![(P, P), (N, N)] {
            violations.push(format!("P-P r>f draw {i}"));
        }

        let (a, b) = (any_regime(&mut rng), any_regime(&mut rng));
        let m = build_matrix(&GameSpec::new(N, N, a, b));
        if pure_nash(&m) != vec![(N, N)] || !pareto_dominates(&m, (P, P), (N, N)) {
            violations.push(format!("N-N draw {i}"));
        }

        let (a, b) = (any_regime(&mut rng), any_regime(&mut rng));
        if !strictly_dominant(
            &build_matrix(&GameSpec::new(N, P, a.clone(), b.clone())),
            Player::Alice,
            N,
        ) || !strictly_dominant(&build_matrix(&GameSpec::new(P, N, a, b)), Player::Bob, N)
        {
            violations.push(format!("one-sided draw {i}"));
        }
    }
    check(violations.is_empty(), || {
        format!("{} violations, first {}", violations.len(), violations[0])
    })?;
    Ok(format!("{DRAWS} draws per regime, 0 violations"))
}

fn extortion_flip() -> Outcome {
    const DRAWS: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut violations = 0;
    for _ in 0..DRAWS {
        let alice = any_regime(&mut rng);
        for (regime, want, extorted) in [
            (Regime::RevengeStronger, P, true),
            (Regime::RevengeWeaker, N, false),
        ] {
            let bob = draw_params(&mut rng, regime);
            let rep = extortion_analysis(&GameSpec::new(N, P, alice.clone(), bob), Player::Alice)
                .map_err(|e| e.to_string())?;
            if rep.spe_action != want || rep.extorted != extorted {
                violations += 1;
            }
        }
    }
    check(violations == 0, || format!("{violations} violations"))?;
    Ok(format!("{DRAWS} draws per regime, 0 violations"))
}

// ------------------------------------------------------------- sampling

/// `E|T/r - 1/2|` for `T ~ Bin(r, 1/2)` by direct summation.
fn centre_error_by_summation(r: u64) -> BigRational {
    let half = rat(1, 2);
    let mut binom = BigInt::one();
    let mut total = BigRational::zero();
    for t in 0..=r {
        let dev = BigRational::new(BigInt::from(t), BigInt::from(r)) - &half;
        let abs = if dev < BigRational::zero() { -dev } else { dev };
        total += BigRational::from_integer(binom.clone()) * abs;
        binom = binom * BigInt::from(r - t) / BigInt::from(t + 1);
    }
    total / BigRational::from_integer(BigInt::one() << r as usize)
}

fn sampling_accuracy() -> Outcome {
    for r in [15, 16, 63, 64] {
        let closed = worst_case_expected_error(r);
        check(closed == centre_error_by_summation(r), || {
            format!("closed form differs from the sum at r={r}")
        })?;
    }
    let (tenth, twentieth) = (rat(1, 10), rat(1, 20));
    check(worst_case_expected_error(16) < tenth, || {
        "worst(16) >= 0.10".into()
    })?;
    check(worst_case_expected_error(64) < twentieth, || {
        "worst(64) >= 0.05".into()
    })?;
    check(worst_case_expected_error(15) > tenth, || {
        "worst(15) <= 0.10".into()
    })?;
    check(worst_case_expected_error(63) > twentieth, || {
        "worst(63) <= 0.05".into()
    })?;
    let (m10, m05) = (
        min_samples(&tenth).map_err(|e| e.to_string())?,
        min_samples(&twentieth).map_err(|e| e.to_string())?,
    );
    check((m10, m05) == (16, 64), || {
        format!("min_samples gave {m10} and {m05}")
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut cases: Vec<(u64, u64, u64)> = vec![(200, 100, 16), (200, 100, 64)];
    for _ in 0..18 {
        let n = rng.gen_range(1..=200u64);
        cases.push((n, rng.gen_range(0..=n), rng.gen_range(1..=80u64)));
    }
    let mut worst_z = 0f64;
    for (n, p, r) in cases {
        let exact = to_f64(&expected_error(n, p, r));
        let (mean, se) = monte_carlo_error(
            ScoreSet::new(n, p).map_err(|e| e.to_string())?,
            r,
            100_000,
            rng.gen(),
        );
        let z = if se > 0.0 {
            (mean - exact).abs() / se
        } else {
            (mean - exact).abs() * 1e12
        };
        check(z <= 3.0, || {
            format!("n={n} p={p} r={r}: mc {mean} vs exact {exact} ({z:.2} se)")
        })?;
        worst_z = worst_z.max(z);
    }
    Ok(format!(
        "worst(16)={:.6}, worst(64)={:.6}, min_samples 16/64, 20 MC cases within {worst_z:.2} se",
        to_f64(&worst_case_expected_error(16)),
        to_f64(&worst_case_expected_error(64))
    ))
}

fn breach_bounds() -> Outcome {
    const TRIALS: u64 = 100_000;
    let small = small_n_rows(TRIALS, 5);
    let high = high_p_rows(TRIALS, 5);
    let at = |rows: &[(u64, repute::sampling::breach::BreachResult)], k: u64| {
        rows.iter()
            .find(|(key, _)| *key == k)
            .map(|(_, r)| r.probability)
            .expect("preset row")
    };
    let (n2, n4, p99) = (at(&small, 2), at(&small, 4), at(&high, 99));

    let mut uniform = Vec::new();
    for n in [2, 4, 10, 50, 100] {
        let exp = BreachExperiment::new(
            ScoreSet::new(n, n).expect("p = n"),
            BreachCase::NegativeLeft,
            TRIALS,
            6,
        );
        let res = breach_probability(&exp).map_err(|e| e.to_string())?;
        let expected = res.r_after as f64 / (n + 1) as f64;
        uniform.push((n, res.contains(expected), res.probability, expected));
    }

    let summary = format!("n=2: {n2:.4}, n=4: {n4:.4}, p=99: {p99:.4}");
    let mut failures = Vec::new();
    if n2 >= 0.17 {
        failures.push(format!("n=2,p=1 breach {n2:.4} >= 0.17"));
    }
    if n4 >= 0.04 {
        failures.push(format!("n=4,p=2 breach {n4:.4} >= 0.04"));
    }
    if p99 >= 0.12 {
        failures.push(format!("n=100,p=99 breach {p99:.4} >= 0.12"));
    }
    for (n, ok, got, want) in &uniform {
        if !ok {
            failures.push(format!("uniform n={n}: {got:.4} vs r'/(n+1) = {want:.4}"));
        }
    }
    check(failures.is_empty(), || failures.join("; "))?;
    Ok(format!(
        "{summary}; r'/(n+1) matched for n in 2,4,10,50,100"
    ))
}

// --------------------------------------------------------------- crypto

fn crypto_laws_on(kp: &Keypair, cases: usize, seed: u64) -> Result<(), String> {
    let (pk, sk) = (&kp.public, &kp.secret);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = |x: repute::crypto::CryptoError| x.to_string();
    for i in 0..cases {
        let x = pk.random_plaintext(&mut rng);
        let y = pk.random_plaintext(&mut rng);
        let k = pk.random_plaintext(&mut rng);
        let (cx, rx) = pk.encrypt_fresh(&x, &mut rng).map_err(e)?;
        let (cy, ry) = pk.encrypt_fresh(&y, &mut rng).map_err(e)?;
        let ox = Opening::new(x.clone(), rx.clone());
        let oy = Opening::new(y.clone(), ry.clone());

        check(sk.decrypt(&cx).map_err(e)? == x, || {
            format!("case {i}: roundtrip")
        })?;
        let sum = pk.add(&cx, &cy).map_err(e)?;
        check(sk.decrypt(&sum).map_err(e)? == (&x + &y) % pk.n(), || {
            format!("case {i}: additive")
        })?;
        let scaled = pk.smul(&cx, &k).map_err(e)?;
        check(
            sk.decrypt(&scaled).map_err(e)? == (&x * &k) % pk.n(),
            || format!("case {i}: scalar"),
        )?;

        check(
            pk.encrypt_opening(&ox.add(&oy, pk)).map_err(e)? == sum,
            || format!("case {i}: tracked sum"),
        )?;
        check(
            pk.encrypt_opening(&ox.smul(&k, pk)).map_err(e)? == scaled,
            || format!("case {i}: tracked scale"),
        )?;
        check(
            sk.recover_randomness(&cx, &x).map_err(e)? == &rx % pk.n(),
            || format!("case {i}: recovery"),
        )?;
        let o = sk.open(&sum).map_err(e)?;
        check(pk.encrypt_opening(&o).map_err(e)? == sum, || {
            format!("case {i}: opening")
        })?;

        let (d, _) = pk.dj_encrypt_fresh(&x, &mut rng).map_err(e)?;
        check(sk.dj_decrypt(&d).map_err(e)? == x, || {
            format!("case {i}: DJ roundtrip")
        })?;
    }
    let big = pk.n() + BigUint::from(5u32);
    let (d, _) = pk.dj_encrypt_fresh(&big, &mut rng).map_err(e)?;
    check(sk.dj_decrypt(&d).map_err(e)? == big, || {
        "DJ x = n + 5".into()
    })?;
    Ok(())
}

fn crypto_identities() -> Outcome {
    const CASES: usize = 100;
    let toy = Keypair::for_profile(KeyProfile::Toy, 60).map_err(|e| e.to_string())?;
    crypto_laws_on(&toy, CASES, 61).map_err(|e| format!("toy key: {e}"))?;
    let mid =
        Keypair::generate(512, &mut ChaCha8Rng::seed_from_u64(62)).map_err(|e| e.to_string())?;
    check(mid.public.bits() == 512, || {
        format!("generated {} bits", mid.public.bits())
    })?;
    crypto_laws_on(&mid, CASES, 63).map_err(|e| format!("512-bit key: {e}"))?;
    Ok(format!(
        "{CASES} cases each on 128- and 512-bit keys; DJ n+5 roundtrip"
    ))
}

fn zkp_suite() -> Outcome {
    let kp = Keypair::for_profile(KeyProfile::Toy, 70).map_err(|e| e.to_string())?;
    let pk = &kp.public;
    let crs = Crs::from_seed(70);
    let mut rng = ChaCha8Rng::seed_from_u64(70);

    let mut complete = 0;
    for (z, b) in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
        for i in 0..25u32 {
            let ctx = i.to_be_bytes();
            let t = distributed(&kp, &crs, &ctx, z, b, &mut rng);
            check(accepts(pk, &crs, &ctx, &t), || {
                format!("distributed z={z} b={b} case {i} rejected")
            })?;
            let w = MulWitness {
                alpha: z.into(),
                r_alpha: pk.random_unit(&mut rng),
                beta: b.into(),
                r_beta: pk.random_unit(&mut rng),
                gamma: (z * b).into(),
                r_gamma: pk.random_unit(&mut rng),
            };
            let (stmt, proof) =
                prove_mul(pk, &crs, &ctx, &w, &mut rng).map_err(|e| e.to_string())?;
            let (c, bp) =
                prove_bit(pk, &crs, &ctx, b, &w.r_beta, &mut rng).map_err(|e| e.to_string())?;
            check(
                verify_mul(pk, &crs, &ctx, &stmt, &proof) && verify_bit(pk, &crs, &ctx, &c, &bp),
                || format!("standalone z={z} b={b} case {i} rejected"),
            )?;
            complete += 2;
        }
    }

    let mut rejected = 0;
    for case in 0..500usize {
        let (z, b) = (rng.gen_range(0..2u8), rng.gen_range(0..2u8));
        let ctx = (case as u64).to_be_bytes();
        let mut t = distributed(&kp, &crs, &ctx, z, b, &mut rng);
        mutate(pk, &mut t, case % FIELDS, &mut rng);
        if !accepts(pk, &crs, &ctx, &t) {
            rejected += 1;
        }
    }
    check(rejected == 500, || {
        format!("{rejected}/500 mutations rejected")
    })?;

    const BINS: usize = 20;
    const SAMPLES: usize = 4000;
    let mut p_values = Vec::new();
    for z in [0u8, 1] {
        let mut counts = [0f64; BINS];
        for _ in 0..SAMPLES {
            let r_z = pk.random_unit(&mut rng);
            let (share, _) = rater_share(pk, &crs, b"uniformity", z, &r_z, &mut rng)
                .map_err(|e| e.to_string())?;
            let bin = usize::try_from((&share.v * BINS) / pk.n()).expect("bin index");
            counts[bin] += 1.0;
        }
        let expected = SAMPLES as f64 / BINS as f64;
        let stat: f64 = counts
            .iter()
            .map(|c| (c - expected).powi(2) / expected)
            .sum();
        let p = 1.0 - ChiSquared::new((BINS - 1) as f64).expect("dof").cdf(stat);
        check(p > 0.01, || {
            format!("v for z={z}: chi2 {stat:.2}, p {p:.4}")
        })?;
        p_values.push(p);
    }
    Ok(format!(
        "{complete}/{complete} complete, 500/500 mutations rejected, chi2 p = {:.3}, {:.3}",
        p_values[0], p_values[1]
    ))
}

// ------------------------------------------------------------- protocol

fn end_to_end() -> Outcome {
    let cfg = DemoConfig {
        transactions: 20,
        seed: 80,
        ..DemoConfig::default()
    };
    let out = run_demo(&cfg).map_err(|e| e.to_string())?;
    let failing: Vec<String> = out
        .rows
        .iter()
        .filter(|r| r.verdict != Verdict::Accept)
        .map(|r| format!("{} {} {}", r.check, r.subject, r.detail))
        .collect();
    check(failing.is_empty(), || {
        format!("honest run: {}", failing.join("; "))
    })?;
    for audit in [
        "escrow-safety",
        "commitment-ordering",
        "sp1-view-privacy",
        "sp2-view-privacy",
    ] {
        check(
            out.rows
                .iter()
                .any(|r| r.check.starts_with("Audit") && r.subject == audit),
            || format!("audit {audit} missing"),
        )?;
    }
    check(!out.statements.is_empty(), || {
        "no reputation published".into()
    })?;
    for stmt in &out.statements {
        let (s, count) = out.oracle[&stmt.ratee];
        check(
            stmt.s == BigUint::from(s) && stmt.sample_count == BigUint::from(count),
            || {
                format!(
                    "ratee {}: published ({}, {}) vs oracle ({s}, {count})",
                    stmt.ratee, stmt.s, stmt.sample_count
                )
            },
        )?;
    }

    let again = run_demo(&cfg).map_err(|e| e.to_string())?;
    check(
        out.log.to_record_bytes() == again.log.to_record_bytes(),
        || "logs differ between runs".into(),
    )?;
    check(out.to_csv() == again.to_csv(), || {
        "tables differ between runs".into()
    })?;

    for t in Tamper::ALL {
        let bad = run_demo(&DemoConfig {
            tamper: t,
            ..cfg.clone()
        })
        .map_err(|e| e.to_string())?;
        check(bad.verify_rejections().next().is_some(), || {
            format!("tamper {t} not rejected by any Verify")
        })?;
    }
    Ok(format!(
        "{} rows accept, {} ratees match the oracle, {} tampers rejected, replay byte-identical",
        out.rows.len(),
        out.statements.len(),
        Tamper::ALL.len()
    ))
}

fn crash_replay() -> Outcome {
    let dir = std::env::temp_dir().join(format!("repute-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let cfg = DemoConfig {
        transactions: 20,
        seed: 90,
        ..DemoConfig::default()
    };
    let result = (|| {
        let straight = run_demo(&DemoConfig {
            sp2_store: Some(dir.join("straight.log")),
            ..cfg.clone()
        })
        .map_err(|e| e.to_string())?;
        let points = [1, 10, 25, 40, 60];
        for after in points {
            let restarted = run_demo(&DemoConfig {
                sp2_store: Some(dir.join(format!("restart-{after}.log"))),
                restart_sp2_after: Some(after),
                ..cfg.clone()
            })
            .map_err(|e| e.to_string())?;
            check(restarted.sp2_state == straight.sp2_state, || {
                format!("state differs after restart at {after}")
            })?;
            check(restarted.sp2_published == straight.sp2_published, || {
                format!("published set differs after restart at {after}")
            })?;
            check(restarted.all_accept(), || {
                format!("restart at {after}: verification failed")
            })?;
        }
        Ok(format!(
            "identical SP2 state for restarts after {points:?} deliveries"
        ))
    })();
    std::fs::remove_dir_all(&dir).ok();
    result
}

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (
            1,
            "concrete payoff matrices",
            Duration::from_secs(1),
            concrete_matrices,
        ),
        (
            2,
            "equilibrium claims",
            Duration::from_secs(5),
            equilibrium_claims,
        ),
        (3, "extortion flip", Duration::from_secs(60), extortion_flip),
        (
            4,
            "sampling accuracy",
            Duration::from_secs(30),
            sampling_accuracy,
        ),
        (
            5,
            "privacy-breach bounds",
            Duration::from_secs(120),
            breach_bounds,
        ),
        (
            6,
            "crypto identities",
            Duration::from_secs(30),
            crypto_identities,
        ),
        (
            7,
            "zero-knowledge suite",
            Duration::from_secs(60),
            zkp_suite,
        ),
        (
            8,
            "end-to-end protocol",
            Duration::from_secs(60),
            end_to_end,
        ),
        (9, "crash replay", Duration::from_secs(60), crash_replay),
    ];
    let mut failed = 0;
    for (id, name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if took <= limit => (true, d),
            Ok(d) => (false, format!("{d}; over time limit")),
            Err(d) => (false, d),
        };
        let tag = if ok { "PASS" } else { "FAIL" };
        println!(
            "[{tag}] {id}. {name} ({:.2}s / {}s): {detail}",
            took.as_secs_f64(),
            limit.as_secs()
        );
        if !ok {
            failed += 1;
        }
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

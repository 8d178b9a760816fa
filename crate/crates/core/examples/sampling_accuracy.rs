//! Expected error of the sampled score and the sample sizes needed for a
//! target accuracy.

use num_bigint::BigInt;
use num_rational::BigRational;
use repute::sampling::accuracy::monte_carlo_error;
use repute::sampling::breach::to_f64;
use repute::sampling::{expected_error, min_samples, worst_case_expected_error, ScoreSet};

fn main() {
    for r in [1, 4, 16, 64] {
        println!(
            "r = {r:>2}: worst-case expected error {:.6}",
            to_f64(&worst_case_expected_error(r))
        );
    }
    for (num, den) in [(1, 10), (1, 20)] {
        let target = BigRational::new(BigInt::from(num), BigInt::from(den));
        println!(
            "error below {target} needs r = {}",
            min_samples(&target).unwrap()
        );
    }

    let scores = ScoreSet::new(40, 30).unwrap();
    let exact = to_f64(&expected_error(scores.n(), scores.p(), 10));
    let (mean, stderr) = monte_carlo_error(scores, 10, 100_000, 1);
    println!("n=40 p=30 r=10: exact {exact:.5}, simulated {mean:.5} +- {stderr:.5}");
}

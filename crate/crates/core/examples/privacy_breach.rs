//! How often the direction of change of a sampled score gives away a new
//! rating.

use repute::sampling::breach::{
    exact_breach_probability, high_p_rows, rows_to_csv, small_n_rows, to_f64,
};
use repute::sampling::{breach_probability, BreachCase, BreachExperiment, ScoreSet};

fn main() {
    print!("{}", rows_to_csv("n", &small_n_rows(20_000, 7)));
    print!("{}", rows_to_csv("p", &high_p_rows(20_000, 7)));

    // All-positive history, then a negative: breached iff the new score is
    // among the r' sampled.
    let exp = BreachExperiment::new(
        ScoreSet::new(50, 50).unwrap(),
        BreachCase::NegativeLeft,
        50_000,
        3,
    );
    let mc = breach_probability(&exp).unwrap();
    let exact = exact_breach_probability(&exp).unwrap();
    println!(
        "n=50 all positive: simulated {:.4} +- {:.4}, exact {} = {:.4}",
        mc.probability,
        mc.ci95_halfwidth,
        exact,
        to_f64(&exact)
    );
}

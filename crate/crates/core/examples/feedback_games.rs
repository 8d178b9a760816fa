//! Payoff matrices of the four feedback games and what happens when one
//! player has to leave feedback first.

use repute::game::{
    build_matrix, classify, extortion_analysis, format_profile, pure_nash, FeedbackAction,
    GameSpec, Player, PlayerParams,
};

fn main() {
    use FeedbackAction::{N, P};
    let params = PlayerParams::from_ints(5, 3, 1).expect("r + f < delta");
    for (wa, wb) in [(P, P), (P, N), (N, P), (N, N)] {
        let spec = GameSpec::symmetric(wa, wb, params.clone());
        let m = build_matrix(&spec);
        let ne: Vec<String> = pure_nash(&m).into_iter().map(format_profile).collect();
        println!(
            "wanted {wa}{wb}: {:?}, equilibria {}",
            classify(&spec),
            ne.join(" ")
        );
        print!("{}", m.to_csv());
    }

    // Bob would retaliate (r > f), so Alice, moving first, gives undeserved P.
    let spec = GameSpec::symmetric(N, P, PlayerParams::from_ints(5, 1, 3).unwrap());
    let rep = extortion_analysis(&spec, Player::Alice).unwrap();
    println!(
        "sequential NP, Alice first: outcome {}, extorted {}, Alice loses {}",
        format_profile(rep.spe_profile),
        rep.extorted,
        rep.payoff_loss
    );
}

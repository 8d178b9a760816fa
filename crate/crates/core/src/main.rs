use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;

use repute::crypto::KeyProfile;
use repute::game::{self, FeedbackAction, GameSpec, Player, PlayerParams};
use repute::protocol::{run_demo, DemoConfig, Tamper};
use repute::sampling::{self, breach};

#[derive(Parser)]
#[command(
    name = "repute",
    version,
    about = "Escrowed and sampled reputation feedback: analysis, experiments and protocol demo"
)]
struct Cli {
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    SmallN,
    HighP,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Toy,
    Standard,
}

#[derive(Subcommand)]
enum Cmd {
    /// Payoff matrix, equilibria and class of a feedback game.
    Games {
        /// Value of the transaction to each player.
        #[arg(long, allow_hyphen_values = true)]
        delta: String,
        /// Cost of receiving negative feedback.
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        /// Utility of retaliating against negative feedback.
        #[arg(long, allow_hyphen_values = true)]
        r: String,
        /// Deserved feedback for Alice and Bob, e.g. `PP` or `NP`.
        #[arg(long, default_value = "PP")]
        wanted: String,
        /// Also analyse the game with one player moving first.
        #[arg(long)]
        sequential: bool,
        /// First mover for `--sequential`: A or B.
        #[arg(long, default_value = "A")]
        first: String,
    },
    /// Worst-case expected error for r = 1..=rmax as CSV.
    ExpectedError {
        #[arg(long, default_value_t = 75)]
        rmax: u64,
    },
    /// Smallest r whose worst-case expected error is below the target.
    MinSamples {
        /// Decimal or fraction, e.g. `0.05` or `1/20`.
        #[arg(long)]
        target: String,
    },
    /// Privacy-breach experiment presets as CSV.
    Breach {
        #[arg(long, value_enum)]
        preset: Preset,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, env = "REPUTE_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// End-to-end protocol run with its verdict table.
    Demo {
        #[arg(long, default_value_t = 20)]
        transactions: usize,
        #[arg(long, default_value_t = 6)]
        users: u32,
        #[arg(long, env = "REPUTE_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "toy")]
        profile: Profile,
        /// none, e_zb, drop, e_z, v, commit, s, omit or count.
        #[arg(long, default_value = "none")]
        tamper: Tamper,
        /// Write the signed message log here.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Run the plaintext escrow instead of the cryptographic protocol.
        #[arg(long)]
        plaintext: bool,
    },
}

enum Failure {
    Usage(String),
    Verification(String),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let (text, failure) = match run(cli.cmd) {
        Ok(text) => (text, None),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
        Err(Failure::Verification(text)) => (text, Some(2)),
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    match failure {
        Some(code) => {
            eprintln!("verification failed");
            ExitCode::from(code)
        }
        None => ExitCode::SUCCESS,
    }
}

fn run(cmd: Cmd) -> Result<String, Failure> {
    let usage = |e: &dyn std::fmt::Display| Failure::Usage(e.to_string());
    match cmd {
        Cmd::Games {
            delta,
            f,
            r,
            wanted,
            sequential,
            first,
        } => {
            let payoff = |s: &str| game::parse_payoff(s).map_err(|e| usage(&e));
            let params = PlayerParams::new(payoff(&delta)?, payoff(&f)?, payoff(&r)?)
                .map_err(|e| usage(&e))?;
            let chars: Vec<String> = wanted.chars().map(String::from).collect();
            let [wa, wb] = chars.as_slice() else {
                return Err(Failure::Usage(format!(
                    "--wanted takes two letters, got {wanted:?}"
                )));
            };
            let wa: FeedbackAction = wa.parse().map_err(|e: String| usage(&e))?;
            let wb: FeedbackAction = wb.parse().map_err(|e: String| usage(&e))?;
            let spec = GameSpec::symmetric(wa, wb, params);
            let matrix = game::build_matrix(&spec);
            let mut out = matrix.to_csv();
            let ne: Vec<String> = game::pure_nash(&matrix)
                .into_iter()
                .map(game::format_profile)
                .collect();
            out.push_str(&format!("nash,{}\n", ne.join(" ")));
            match game::classify(&spec) {
                Ok(class) => out.push_str(&format!("class,{class:?}\n")),
                Err(e) => out.push_str(&format!("class,none ({e})\n")),
            }
            if sequential {
                let first: Player = first.parse().map_err(|e: String| usage(&e))?;
                let rep = game::extortion_analysis(&spec, first).map_err(|e| usage(&e))?;
                out.push_str(&format!("first_mover,{first:?}\n"));
                out.push_str(&format!("spe,{}\n", game::format_profile(rep.spe_profile)));
                out.push_str(&format!("first_mover_action,{}\n", rep.spe_action));
                out.push_str(&format!("extorted,{}\n", rep.extorted));
                out.push_str(&format!("payoff_loss,{}\n", rep.payoff_loss));
            }
            Ok(out)
        }
        Cmd::ExpectedError { rmax } => {
            let mut out = String::from("r,max_expected_error\n");
            for r in 1..=rmax {
                out.push_str(&format!(
                    "{r},{}\n",
                    breach::to_f64(&sampling::worst_case_expected_error(r))
                ));
            }
            Ok(out)
        }
        Cmd::MinSamples { target } => {
            let t: BigRational = game::parse_payoff(&target).map_err(|e| usage(&e))?;
            let r = sampling::min_samples(&t).map_err(|e| usage(&e))?;
            Ok(format!("{r}\n"))
        }
        Cmd::Breach {
            preset,
            trials,
            seed,
        } => {
            if trials == 0 {
                return Err(Failure::Usage("--trials must be positive".into()));
            }
            Ok(match preset {
                Preset::SmallN => breach::rows_to_csv("n", &breach::small_n_rows(trials, seed)),
                Preset::HighP => breach::rows_to_csv("p", &breach::high_p_rows(trials, seed)),
            })
        }
        Cmd::Demo {
            transactions,
            users,
            seed,
            profile,
            tamper,
            log,
            plaintext,
        } => {
            if plaintext {
                return repute::escrow::simulate(transactions as u64, users, 3, seed)
                    .map_err(|e| usage(&e));
            }
            let cfg = DemoConfig {
                transactions,
                users,
                seed,
                profile: match profile {
                    Profile::Toy => KeyProfile::Toy,
                    Profile::Standard => KeyProfile::Standard,
                },
                tamper,
                ..DemoConfig::default()
            };
            let outcome = run_demo(&cfg).map_err(|e| usage(&e))?;
            if let Some(path) = log {
                std::fs::write(&path, outcome.log.to_record_bytes()).map_err(|e| usage(&e))?;
            }
            let csv = outcome.to_csv();
            if outcome.all_accept() {
                Ok(csv)
            } else {
                Err(Failure::Verification(csv))
            }
        }
    }
}

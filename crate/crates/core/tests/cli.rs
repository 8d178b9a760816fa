use std::process::{Command, Output};

fn repute(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_repute"))
        .args(args)
        .env_remove("REPUTE_SEED")
        .output()
        .expect("run binary")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn games_prints_the_concrete_matrix() {
    let o = repute(&[
        "games", "--delta", "5", "--f", "3", "--r", "1", "--wanted", "PP",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("P,8;8,-2;5\n"), "{text}");
    assert!(text.contains("N,5;-2,-4;-4\n"), "{text}");
    assert!(text.contains("nash,(P,P)\n"), "{text}");
}

#[test]
fn sequential_np_game_is_extortion_when_revenge_wins() {
    let o = repute(&[
        "games",
        "--delta",
        "5",
        "--f",
        "1",
        "--r",
        "3",
        "--wanted",
        "NP",
        "--sequential",
        "--first",
        "A",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("extorted,true\n"));
}

#[test]
fn invalid_parameters_exit_one() {
    let o = repute(&["games", "--delta", "5", "--f", "3", "--r", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
    assert_eq!(
        repute(&["min-samples", "--target", "zero"]).status.code(),
        Some(1)
    );
    assert_eq!(repute(&["no-such-command"]).status.code(), Some(1));
}

#[test]
fn sample_size_targets() {
    assert_eq!(
        stdout(&repute(&["min-samples", "--target", "0.10"])),
        "16\n"
    );
    assert_eq!(
        stdout(&repute(&["min-samples", "--target", "0.05"])),
        "64\n"
    );
    assert_eq!(
        stdout(&repute(&["expected-error", "--rmax", "1"])),
        "r,max_expected_error\n1,0.5\n"
    );
    let full = stdout(&repute(&["expected-error"]));
    assert_eq!(full.lines().count(), 76);
}

#[test]
fn breach_is_seeded() {
    let args = [
        "breach", "--preset", "high-p", "--trials", "2000", "--seed", "4",
    ];
    let a = repute(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, repute(&args).stdout);
    let text = stdout(&a);
    assert!(text.starts_with("p,"));
    assert!(text.lines().any(|l| l.starts_with("99,")));
}

#[test]
fn demo_exit_codes() {
    let ok = repute(&["demo", "--transactions", "5", "--seed", "2"]);
    assert_eq!(ok.status.code(), Some(0));
    let text = stdout(&ok);
    assert!(text.starts_with("check,subject,verdict,detail\n"));
    assert!(text.contains("VerifyReputation"));
    assert!(!text.contains(",reject,"));

    let tampered = repute(&[
        "demo",
        "--transactions",
        "5",
        "--seed",
        "2",
        "--tamper",
        "e_zb",
    ]);
    assert_eq!(tampered.status.code(), Some(2));
    assert!(stdout(&tampered).contains(",reject,"));

    let empty = repute(&["demo", "--transactions", "0"]);
    assert_eq!(empty.status.code(), Some(0));
    assert_eq!(stdout(&empty), "check,subject,verdict,detail\n");
}

#[test]
fn demo_log_and_table_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let o = repute(&[
            "demo",
            "--transactions",
            "4",
            "--seed",
            "13",
            "--log",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        (o.stdout, std::fs::read(path).unwrap())
    };
    assert_eq!(run("a.log"), run("b.log"));
}

#[test]
fn seed_falls_back_to_the_environment() {
    let with_env = Command::new(env!("CARGO_BIN_EXE_repute"))
        .args(["demo", "--transactions", "3"])
        .env("REPUTE_SEED", "17")
        .output()
        .unwrap();
    let with_flag = repute(&["demo", "--transactions", "3", "--seed", "17"]);
    assert_eq!(with_env.stdout, with_flag.stdout);
}

#[test]
fn help_documents_every_subcommand() {
    let o = repute(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for cmd in ["games", "expected-error", "min-samples", "breach", "demo"] {
        assert!(text.contains(cmd), "{cmd} missing from help");
    }
    let demo = stdout(&repute(&["demo", "--help"]));
    for flag in [
        "--transactions",
        "--users",
        "--seed",
        "--profile",
        "--tamper",
        "--log",
        "--plaintext",
    ] {
        assert!(demo.contains(flag), "{flag} missing from demo help");
    }
}

#[test]
fn out_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.txt");
    let o = repute(&[
        "--out",
        path.to_str().unwrap(),
        "min-samples",
        "--target",
        "1/10",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(path).unwrap(), "16\n");
}

use std::path::Path;
use std::process::{Command, Output};

fn cata(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cata"))
        .args(args)
        .args(["--out", dir.join("out").to_str().unwrap(), "-q"])
        .env("CATA_DATA_DIR", dir.join("data"))
        .output()
        .unwrap()
}

const SMALL: [&str; 14] = [
    "--d", "4", "--widths", "16,4", "--epochs", "3", "--vocab-size", "80", "--n-repeats", "1", "--ks", "5,10",
    "--min-articles-per-tag", "2",
];

fn with_small<'a>(args: &[&'a str]) -> Vec<&'a str> {
    args.iter().copied().chain(SMALL).collect()
}

#[test]
fn full_command_sequence() {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        let out = cata(dir.path(), &with_small(args));
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    };
    run(&["synth", "--users", "40", "--articles", "60", "--clusters", "3"]);
    assert!(dir.path().join("data").join("users.dat").exists());
    let pre = run(&["preprocess", "--models", "pop,cata++"]);
    assert!(pre.contains("users 40"), "{pre}");
    run(&["train", "--models", "pop,cata++"]);
    let eval = run(&["evaluate", "--models", "pop,cata++"]);
    assert!(eval.lines().any(|l| l.starts_with("cata++")), "{eval}");
    let recs = run(&["recommend", "2", "--k", "4", "--models", "cata++"]);
    assert_eq!(recs.lines().count(), 4);
    let threaded = run(&["recommend", "2", "--k", "4", "--models", "cata++", "--threads", "2"]);
    assert_eq!(threaded, recs);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| cata(dir.path(), args).status.code();

    assert_eq!(code(&["frobnicate"]), Some(1));
    assert_eq!(code(&["train", "--models", "cdl"]), Some(1));
    assert_eq!(code(&["train", "--models", "cata", "--d", "7"]), Some(1));
    assert_eq!(code(&["preprocess"]), Some(2));
    assert_eq!(code(&["--help"]), Some(0));

    std::fs::create_dir_all(dir.path().join("data")).unwrap();
    std::fs::write(dir.path().join("data/docs.txt"), "alpha beta\ngamma delta\n").unwrap();
    std::fs::write(dir.path().join("data/users.dat"), "2 0 1\n1 7\n").unwrap();
    assert_eq!(code(&["preprocess", "--models", "wrmf"]), Some(2));

    std::fs::write(dir.path().join("data/users.dat"), "2 0 1\n1 1\n").unwrap();
    assert_eq!(code(&["preprocess", "--models", "wrmf"]), Some(0));
    assert_eq!(code(&["recommend", "0", "--models", "wrmf"]), Some(2));
    let config = dir.path().join("bad.json");
    std::fs::write(&config, r#"{"p": "one"}"#).unwrap();
    assert_eq!(code(&["train", "--config", config.to_str().unwrap()]), Some(1));
}

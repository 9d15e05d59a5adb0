//! Subcommands and exit codes of the `tabrank` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tabrank::synthetic::{SyntheticConfig, SyntheticData};

fn tabrank(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tabrank"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const CONCERTS: &str = "Act\tAttendance\nRolling Stones\t50000\nBeatles\t40000\nRolling Stones\t60000\n";

fn concerts(dir: &Path) {
    fs::write(dir.join("t.tsv"), CONCERTS).unwrap();
}

/// Small-model config so the end-to-end runs stay fast.
const SMALL: &str = "word_dim = 12\nchar_dim = 4\nchar_filters = 4\nsentence_filters = 8\nsentence_widths = 2,4\nhidden = 16\nmax_epochs = 2\n";

fn synthetic(dir: &Path) {
    SyntheticData::generate(&SyntheticConfig::default()).write_to_dir(dir).unwrap();
    fs::write(dir.join("small.cfg"), SMALL).unwrap();
}

const TRAIN: [&str; 7] = [
    "train",
    "--examples",
    "train_examples.tsv",
    "--candidates",
    "train_candidates.jsonl",
    "--tables-dir",
    "tables",
];

#[test]
fn parse_exec_and_paraphrase() {
    let dir = tempfile::tempdir().unwrap();
    concerts(dir.path());
    let o = tabrank(dir.path(), &["parse-lf", "count(Act.RollingStones)"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "count(act.\"rolling stones\")\n");
    let o = tabrank(dir.path(), &["exec", "--table", "t.tsv", "--lf", "R[Attendance].argmax(Act.RollingStones,Index)"]);
    assert_eq!(stdout(&o), "60000\n");
    let lf = "R[λx[Attendance.Number.x]].argmax(Act.RollingStones,Index)";
    let o = tabrank(dir.path(), &["paraphrase", "--lf", lf]);
    assert_eq!(stdout(&o), "attendance as number of last table row where act is rolling stones\n");
    fs::write(dir.path().join("lex.txt"), "agg.count = number of\n").unwrap();
    let o = tabrank(dir.path(), &["paraphrase", "--lf", "count(AllRows)", "--lexicon", "lex.txt"]);
    assert_eq!(stdout(&o), "number of all rows\n");
}

#[test]
fn gen_candidates_respects_budget() {
    let dir = tempfile::tempdir().unwrap();
    concerts(dir.path());
    let o = tabrank(dir.path(), &["gen-candidates", "--table", "t.tsv", "--question", "who drew the most ?", "--budget", "10"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 10);
    let o = tabrank(dir.path(), &["gen-candidates", "--table", "t.tsv", "--question", "q", "--budget", "0"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    concerts(dir.path());
    assert_eq!(code(&tabrank(dir.path(), &["--help"])), 0);
    assert_eq!(code(&tabrank(dir.path(), &["--version"])), 0);
    assert_eq!(code(&tabrank(dir.path(), &[])), 1);
    assert_eq!(code(&tabrank(dir.path(), &["exec", "--table", "t.tsv"])), 1);
    assert_eq!(code(&tabrank(dir.path(), &["parse-lf", "argmax(Act"])), 2);
    assert_eq!(code(&tabrank(dir.path(), &["exec", "--table", "missing.tsv", "--lf", "count(AllRows)"])), 2);
    assert_eq!(code(&tabrank(dir.path(), &["exec", "--table", "t.tsv", "--lf", "count(Venue.Wembley)"])), 2);
}

#[test]
fn train_eval_rank_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synthetic(d);
    let mut args = TRAIN.to_vec();
    args.extend(["--config", "small.cfg", "--out", "a.ckpt", "--seed", "1"]);
    let o = tabrank(d, &args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let log = fs::read_to_string(d.join("a.ckpt.log.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 2);
    for line in log.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for key in ["epoch", "train_loss", "val_p_at_1", "seconds"] {
            assert!(v.get(key).is_some(), "{key} missing from {line}");
        }
    }

    let mut args = TRAIN.to_vec();
    args.extend(["--config", "small.cfg", "--out", "b.ckpt", "--seed", "2"]);
    assert_eq!(code(&tabrank(d, &args)), 0);
    let mut args = TRAIN.to_vec();
    args.extend(["--config", "small.cfg", "--out", "c.ckpt", "--no-char-emb"]);
    assert_eq!(code(&tabrank(d, &args)), 0);

    let eval = |models: &str| {
        tabrank(
            d,
            &[
                "eval", "--examples", "val_examples.tsv", "--candidates", "val_candidates.jsonl", "--tables-dir", "tables",
                "--model", models,
            ],
        )
    };
    let single = eval("a.ckpt");
    assert_eq!(code(&single), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&single)).unwrap();
    assert_eq!(report["questions"], 20);
    assert_eq!(report["coverage"], 1.0);
    let pair = eval("a.ckpt,b.ckpt");
    assert_eq!(code(&pair), 0, "{}", String::from_utf8_lossy(&pair.stderr));
    let mixed = eval("a.ckpt,c.ckpt");
    assert_eq!(code(&mixed), 2);
    assert!(String::from_utf8_lossy(&mixed.stderr).contains("architecture"));

    fs::write(d.join("t.tsv"), CONCERTS).unwrap();
    fs::write(d.join("lfs.txt"), "R[Act].argmax(AllRows,Attendance)\ncount(AllRows)\n\nnot a form (\n").unwrap();
    let o = tabrank(
        d,
        &["rank", "--model", "a.ckpt", "--question", "who drew the biggest crowd ?", "--table", "t.tsv", "--candidates-inline", "lfs.txt"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let ranked: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(ranked["entries"].as_array().unwrap().len(), 2);

    assert_eq!(code(&eval("missing.ckpt")), 2);
}

#[test]
fn eval_rejects_misaligned_ids() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synthetic(d);
    let mut args = TRAIN.to_vec();
    args.extend(["--config", "small.cfg", "--out", "m.ckpt"]);
    assert_eq!(code(&tabrank(d, &args)), 0);
    let o = tabrank(
        d,
        &[
            "eval", "--examples", "val_examples.tsv", "--candidates", "train_candidates.jsonl", "--tables-dir", "tables",
            "--model", "m.ckpt",
        ],
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("val-"), "offending ids are listed");
}

#[test]
fn config_errors_and_numeric_abort() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synthetic(d);
    let run = |cfg: &str| {
        fs::write(d.join("x.cfg"), cfg).unwrap();
        let mut args = TRAIN.to_vec();
        args.extend(["--config", "x.cfg", "--out", "x.ckpt"]);
        tabrank(d, &args)
    };
    assert_eq!(code(&run("bogus = 1\n")), 1);
    assert_eq!(code(&run("theta = -1\n")), 1);
    assert_eq!(code(&run("val_examples = val_examples.tsv\n")), 1);
    let o = run(&format!("{SMALL}learning_rate = 1e300\n"));
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!d.join("x.ckpt").exists());
}

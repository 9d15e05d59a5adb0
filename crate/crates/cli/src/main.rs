//! `tabrank`: parse, execute and paraphrase logical forms, train rankers,
//! and evaluate them on question files.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 numeric abort during training. Set `RUST_LOG=info` for per-epoch progress.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use tabrank::harness::{self, load_questions, Ranker};
use tabrank::lambda_dcs::{answer_of, parse_lf};
use tabrank::nn::Model;
use tabrank::paraphrase::{paraphrase, Lexicon};
use tabrank::table::{load_examples, load_table, QAExample, Table, TableFormat};
use tabrank::training::{build_candidates, load_candidate_file, train, Combiner, TrainError, TrainFile, TrainingQuestion};

#[derive(Parser)]
#[command(name = "tabrank", version, about = "Rank logical forms for table questions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a logical form and print its canonical text.
    ParseLf { lf: String },
    /// Execute a logical form against a table and print the answer values.
    Exec {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        lf: String,
    },
    /// Print the paraphrase of a logical form.
    Paraphrase {
        #[arg(long)]
        lf: String,
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
    /// Enumerate template candidates for a question, one per line.
    GenCandidates {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        question: String,
        #[arg(long)]
        budget: usize,
    },
    /// Train a model and write a checkpoint plus a per-epoch JSON-lines log.
    Train(TrainArgs),
    /// Evaluate one checkpoint, or an ensemble given as a comma list.
    Eval {
        #[arg(long)]
        examples: PathBuf,
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long)]
        tables_dir: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        model: Vec<PathBuf>,
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
    /// Rank the logical forms listed one per line in a file.
    Rank {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        question: String,
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        candidates_inline: PathBuf,
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    examples: PathBuf,
    #[arg(long)]
    candidates: PathBuf,
    #[arg(long)]
    tables_dir: PathBuf,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    no_dropout: bool,
    #[arg(long)]
    no_char_emb: bool,
    #[arg(long)]
    no_glove: bool,
    #[arg(long)]
    no_paraphrase: bool,
}

/// An error tagged with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

trait Tag<T> {
    fn code(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Tag<T> for Result<T, E> {
    fn code(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure { code, error: e.into() })
    }
}

const USAGE: u8 = 1;
const DATA: u8 = 2;
const NUMERIC: u8 = 3;

fn train_error(e: TrainError) -> Failure {
    let code = match e {
        TrainError::NonFiniteGradient { .. } | TrainError::NonFiniteLoss { .. } => NUMERIC,
        TrainError::InvalidConfig(_) => USAGE,
        _ => DATA,
    };
    Failure { code, error: e.into() }
}

fn lexicon(path: Option<&Path>) -> Result<Lexicon, Failure> {
    match path {
        Some(p) => Lexicon::load(p).code(DATA),
        None => Ok(Lexicon::default()),
    }
}

fn table(path: &Path) -> Result<Table, Failure> {
    load_table(path, TableFormat::from_path(path)).code(DATA)
}

fn run(command: Command) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    let mut say = |s: &str| writeln!(out, "{s}").code(DATA);
    match command {
        Command::ParseLf { lf } => {
            let z = parse_lf(&lf).code(DATA)?;
            say(&z.serialize())
        }
        Command::Exec { table: path, lf } => {
            let t = table(&path)?;
            let z = parse_lf(&lf).code(DATA)?;
            for v in answer_of(&z, &t).code(DATA)? {
                say(&v.to_string())?;
            }
            Ok(())
        }
        Command::Paraphrase { lf, lexicon: lex } => {
            let lex = lexicon(lex.as_deref())?;
            let z = parse_lf(&lf).code(DATA)?;
            say(&paraphrase(&z, &lex).code(DATA)?)
        }
        Command::GenCandidates { table: path, question, budget } => {
            let t = table(&path)?;
            for s in harness::generate_candidates_minimal(&question, &t, budget).code(USAGE)? {
                say(&s)?;
            }
            Ok(())
        }
        Command::Train(args) => run_train(args),
        Command::Eval {
            examples,
            candidates,
            tables_dir,
            model,
            lexicon: lex,
        } => {
            let lex = lexicon(lex.as_deref())?;
            let members = model
                .iter()
                .map(|p| Model::load(p).code(DATA))
                .collect::<Result<Vec<_>, _>>()?;
            let ranker = Ranker {
                members,
                combiner: Combiner::Mean,
            };
            let examples = load_examples(&examples).code(DATA)?;
            let records = load_candidate_file(&candidates).code(DATA)?;
            let questions = load_questions(&examples, &records, &tables_dir, &lex, ranker.paraphrase_input()).code(DATA)?;
            let report = harness::evaluate(&questions, &ranker, Default::default()).code(DATA)?;
            say(&report.to_json())
        }
        Command::Rank {
            model,
            question,
            table: path,
            candidates_inline,
            lexicon: lex,
        } => {
            let lex = lexicon(lex.as_deref())?;
            let ranker = Ranker::single(Model::load(&model).code(DATA)?);
            let t = table(&path)?;
            let text = fs::read_to_string(&candidates_inline)
                .with_context(|| format!("reading {}", candidates_inline.display()))
                .code(DATA)?;
            let lfs: Vec<String> = text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect();
            let example = QAExample {
                id: "query".into(),
                question: question.clone(),
                table_ref: path.display().to_string(),
                gold_answer: Vec::new(),
            };
            let set = build_candidates(&example, &lfs, &t, &lex, ranker.paraphrase_input());
            let ranked = harness::rank_question("query", &question, &set.candidates, &t, &ranker).code(DATA)?;
            say(&serde_json::to_string_pretty(&ranked).code(DATA)?)
        }
    }
}

fn training_questions(
    examples: &Path,
    candidates: &Path,
    tables_dir: &Path,
    lex: &Lexicon,
    paraphrase_input: bool,
) -> Result<Vec<TrainingQuestion>, Failure> {
    let examples = load_examples(examples).code(DATA)?;
    let records = load_candidate_file(candidates).code(DATA)?;
    let loaded = load_questions(&examples, &records, tables_dir, lex, paraphrase_input).code(DATA)?;
    Ok(loaded.into_iter().map(|q| q.question).collect())
}

fn run_train(args: TrainArgs) -> Result<(), Failure> {
    let file = TrainFile::load(&args.config).code(USAGE)?;
    let mut config = file.train;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let ab = &mut config.ablations;
    ab.no_dropout |= args.no_dropout;
    ab.no_char_emb |= args.no_char_emb;
    ab.no_glove |= args.no_glove;
    ab.no_paraphrase |= args.no_paraphrase;
    config.validate().map_err(train_error)?;
    let lex = lexicon(file.lexicon.as_deref())?;
    let paraphrase_input = config.effective_model_config().paraphrase_input;
    let train_set = training_questions(&args.examples, &args.candidates, &args.tables_dir, &lex, paraphrase_input)?;
    let val_set = match (&file.val_examples, &file.val_candidates) {
        (Some(e), Some(c)) => training_questions(e, c, &args.tables_dir, &lex, paraphrase_input)?,
        (None, None) => Vec::new(),
        _ => {
            return Err(Failure {
                code: USAGE,
                error: anyhow!("val_examples and val_candidates must be given together"),
            })
        }
    };
    let outcome = train(&train_set, &val_set, &config).map_err(train_error)?;
    outcome.model.save(&args.out).code(DATA)?;
    let log_path = PathBuf::from(format!("{}.log.jsonl", args.out.display()));
    let mut log = String::new();
    for entry in &outcome.log {
        log.push_str(&serde_json::to_string(entry).code(DATA)?);
        log.push('\n');
    }
    fs::write(&log_path, log)
        .with_context(|| format!("writing {}", log_path.display()))
        .code(DATA)?;
    eprintln!(
        "trained {} epochs, best epoch {}; checkpoint {}",
        outcome.log.len(),
        outcome.best_epoch,
        args.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}

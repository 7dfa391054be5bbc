//! `phoco`: normalize transcripts, run the phonetic corrector, build
//! synthetic corpora, train the neural gate, and produce WER reports.

use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand};

use phoco::corrector::Selector;
use phoco::dataset::{
    augment, load_candidates, load_corpus, sample_sentences, save_candidates, save_corpus, split,
    synthesize_corpus,
};
use phoco::gate::{evaluate, train, GateModel, TrainConfig};
use phoco::hybrid::build_neural_report;
use phoco::normalizer::{normalize, NormRules};
use phoco::phonetics::{phonemize, G2pRuleTable, G2pTables, Representation};
use phoco::{correct, Context, PhocoConfig};

#[derive(Parser)]
#[command(
    name = "phoco",
    version,
    about = "Phonetic post-correction for closed-domain ASR transcripts, \
             with a trained neural gate deciding which corrections to apply"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize raw transcript text (stdin to stdout, line by line).
    Normalize(NormalizeArgs),
    /// Transduce normalized text into a phonetic representation.
    Phonemize(PhonemizeArgs),
    /// Apply the phonetic corrector to each input line.
    Correct(CorrectArgs),
    /// Generate a synthetic noisy corpus from clean sentences.
    Synth(SynthArgs),
    /// Expand a corpus through the full configuration grid with labels.
    Augment(AugmentArgs),
    /// Train the neural gate on augmented candidates.
    Train(TrainArgs),
    /// Evaluate a trained gate: per-class precision/recall/F1, accuracy, AUC.
    Evaluate(EvaluateArgs),
    /// Per-threshold WER comparison of baseline, corrector, and hybrid.
    Report(ReportArgs),
}

#[derive(Args)]
struct IoArgs {
    /// Read from a file instead of stdin.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Write to a file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    /// Override the built-in IPA rule table.
    #[arg(long)]
    ipa_rules: Option<PathBuf>,
    /// Override the built-in Worldbet rule table.
    #[arg(long)]
    wbet_rules: Option<PathBuf>,
}

impl TableArgs {
    fn load(&self) -> Result<G2pTables> {
        let ipa = match &self.ipa_rules {
            Some(path) => G2pRuleTable::from_file(path)?,
            None => G2pRuleTable::default_ipa(),
        };
        let wbet = match &self.wbet_rules {
            Some(path) => G2pRuleTable::from_file(path)?,
            None => G2pRuleTable::default_wbet(),
        };
        Ok(G2pTables::new(ipa, wbet))
    }
}

#[derive(Args)]
struct NormalizeArgs {
    /// Abbreviation table (`key<TAB>expansion` lines); built-in by default.
    #[arg(long)]
    abbrev: Option<PathBuf>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct PhonemizeArgs {
    /// Target representation: plain, ipa, or wbet.
    #[arg(long, value_parser = parse_rep)]
    rep: Representation,
    /// Normalize input lines first (default: input must be normalized).
    #[arg(long)]
    raw: bool,
    #[arg(long)]
    abbrev: Option<PathBuf>,
    #[command(flatten)]
    tables: TableArgs,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct CorrectArgs {
    /// Context file: one normalized phrase per line.
    #[arg(long)]
    context: PathBuf,
    #[arg(long, value_parser = parse_rep)]
    rep: Representation,
    #[arg(long, value_parser = parse_selector)]
    selector: Selector,
    /// Maximum normalized phonetic distance for a replacement.
    #[arg(long)]
    threshold: f64,
    /// Normalize input lines first (default: input must be normalized).
    #[arg(long)]
    raw: bool,
    #[arg(long)]
    abbrev: Option<PathBuf>,
    #[command(flatten)]
    tables: TableArgs,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct SynthArgs {
    /// Clean sentences, one per line. Mutually exclusive with --sample.
    #[arg(long, conflicts_with = "sample")]
    sentences: Option<PathBuf>,
    /// Sample this many sentences from the context instead.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long)]
    context: PathBuf,
    /// Per-token corruption probability in [0, 1].
    #[arg(long)]
    noise_rate: f64,
    #[arg(long)]
    seed: u64,
    /// Corpus output (JSON lines).
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    tables: TableArgs,
}

#[derive(Args)]
struct AugmentArgs {
    /// Corpus file produced by `synth` (or hand-assembled).
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    context: PathBuf,
    /// Candidates output (JSON lines).
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    tables: TableArgs,
}

#[derive(Args)]
struct TrainArgs {
    /// Augmented candidates file.
    #[arg(long)]
    candidates: PathBuf,
    /// Seed for the 80/10/10 split, initialization, and shuffling.
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    epochs: usize,
    #[arg(long, default_value_t = 64)]
    batch_size: usize,
    #[arg(long, default_value_t = 64)]
    max_seq_len: usize,
    /// Optional dropout probability on the dense layer.
    #[arg(long)]
    dropout: Option<f64>,
    /// Where to write the trained model.
    #[arg(long)]
    model_out: PathBuf,
    /// Optional CSV of per-batch loss and accuracy.
    #[arg(long)]
    curves_out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Trained model file.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    candidates: PathBuf,
    /// Which candidates to score: all (default), or the train/val/test part
    /// of the seeded split.
    #[arg(long, default_value = "all")]
    split: String,
    /// Split seed; required when --split is not `all`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    candidates: PathBuf,
    /// Write the aligned table here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write machine-readable rows (JSON lines).
    #[arg(long)]
    jsonl: Option<PathBuf>,
}

fn parse_rep(s: &str) -> Result<Representation, String> {
    s.parse()
}

fn parse_selector(s: &str) -> Result<Selector, String> {
    s.parse()
}

fn read_input(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
        None => {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf).context("reading stdin")?;
            Ok(buf)
        }
    }
}

fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, content).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            w.write_all(content.as_bytes())?;
            w.flush()?;
            Ok(())
        }
    }
}

fn load_rules(abbrev: Option<&Path>) -> Result<NormRules> {
    Ok(match abbrev {
        Some(path) => NormRules::from_file(path)?,
        None => NormRules::default(),
    })
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Normalize(args) => {
            let rules = load_rules(args.abbrev.as_deref())?;
            let input = read_input(args.io.input.as_deref())?;
            let mut out = String::new();
            for line in input.lines() {
                out.push_str(&normalize(line, &rules));
                out.push('\n');
            }
            write_output(args.io.output.as_deref(), &out)
        }
        Command::Phonemize(args) => {
            let tables = args.tables.load()?;
            let rules = load_rules(args.abbrev.as_deref())?;
            let input = read_input(args.io.input.as_deref())?;
            let mut out = String::new();
            for line in input.lines() {
                let line = if args.raw {
                    normalize(line, &rules)
                } else {
                    line.to_string()
                };
                out.push_str(&phonemize(&line, args.rep, &tables)?);
                out.push('\n');
            }
            write_output(args.io.output.as_deref(), &out)
        }
        Command::Correct(args) => {
            let tables = args.tables.load()?;
            let rules = load_rules(args.abbrev.as_deref())?;
            let ctx = Context::from_file(&args.context, &tables)?;
            let cfg = PhocoConfig::new(args.threshold, args.rep, args.selector)?;
            let input = read_input(args.io.input.as_deref())?;
            let mut out = String::new();
            for line in input.lines() {
                let line = if args.raw {
                    normalize(line, &rules)
                } else {
                    line.to_string()
                };
                let (corrected, _) = correct(&line, &ctx, &cfg, &tables)?;
                out.push_str(&corrected);
                out.push('\n');
            }
            write_output(args.io.output.as_deref(), &out)
        }
        Command::Synth(args) => {
            let tables = args.tables.load()?;
            let ctx = Context::from_file(&args.context, &tables)?;
            let sentences: Vec<String> = match (&args.sentences, args.sample) {
                (Some(path), None) => std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?
                    .lines()
                    .filter(|l| !l.trim().is_empty())
                    .map(str::to_string)
                    .collect(),
                (None, Some(n)) => sample_sentences(&ctx, n, args.seed),
                _ => bail!("exactly one of --sentences or --sample is required"),
            };
            let corpus = synthesize_corpus(&sentences, &ctx, args.noise_rate, args.seed, &tables)?;
            save_corpus(&corpus, &args.output)?;
            eprintln!("wrote {} utterances to {}", corpus.len(), args.output.display());
            Ok(())
        }
        Command::Augment(args) => {
            let tables = args.tables.load()?;
            let ctx = Context::from_file(&args.context, &tables)?;
            let corpus = load_corpus(&args.corpus)?;
            let candidates = augment(&corpus, &ctx, &tables)?;
            save_candidates(&candidates, &args.output)?;
            eprintln!(
                "wrote {} labeled candidates ({} per utterance) to {}",
                candidates.len(),
                if corpus.is_empty() { 0 } else { candidates.len() / corpus.len() },
                args.output.display()
            );
            Ok(())
        }
        Command::Train(args) => {
            let candidates = load_candidates(&args.candidates)?;
            let (train_split, val_split, _) = split(&candidates, args.seed);
            let mut cfg = TrainConfig::new(args.seed);
            cfg.epochs = args.epochs;
            cfg.batch_size = args.batch_size;
            cfg.max_seq_len = args.max_seq_len;
            cfg.dropout = args.dropout;
            let out = train(&train_split, &val_split, &cfg)?;
            out.model.save(&args.model_out)?;
            if let Some(curves_path) = &args.curves_out {
                let mut csv = String::from("batch,loss,accuracy\n");
                for (i, (loss, acc)) in out
                    .curves
                    .batch_loss
                    .iter()
                    .zip(&out.curves.batch_accuracy)
                    .enumerate()
                {
                    csv.push_str(&format!("{i},{loss},{acc}\n"));
                }
                std::fs::write(curves_path, csv)
                    .with_context(|| format!("writing {}", curves_path.display()))?;
            }
            eprintln!(
                "trained on {} candidates ({} batches); validation accuracy {}",
                train_split.len(),
                out.curves.batch_loss.len(),
                out.curves
                    .val_accuracy
                    .last()
                    .map(|a| format!("{a:.4}"))
                    .unwrap_or_else(|| "n/a".into()),
            );
            eprintln!("model written to {}", args.model_out.display());
            Ok(())
        }
        Command::Evaluate(args) => {
            let model = GateModel::load(&args.model)?;
            let candidates = load_candidates(&args.candidates)?;
            let subset = match args.split.as_str() {
                "all" => candidates,
                part @ ("train" | "val" | "test") => {
                    let Some(seed) = args.seed else {
                        bail!("--seed is required with --split {part}");
                    };
                    let (train_split, val_split, test_split) = split(&candidates, seed);
                    match part {
                        "train" => train_split,
                        "val" => val_split,
                        _ => test_split,
                    }
                }
                other => bail!("unknown split {other:?} (all|train|val|test)"),
            };
            let metrics = evaluate(&model, &subset)?;
            print!("{}", metrics.render_table());
            Ok(())
        }
        Command::Report(args) => {
            let model = GateModel::load(&args.model)?;
            let candidates = load_candidates(&args.candidates)?;
            let report = build_neural_report(&candidates, &model)?;
            if let Some(jsonl) = &args.jsonl {
                report.write_jsonl(jsonl)?;
            }
            write_output(args.output.as_deref(), &report.render_table())
        }
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jntag::corpus::{write_pos_chunk_file, Scheme};
use jntag::eval::Column;
use jntag::experiment::{
    cmd_chunk, cmd_eval, cmd_experiment, cmd_profile, cmd_relabel, cmd_screen, cmd_tag, cmd_train_chunker,
    cmd_train_hmm, ExperimentConfig, Transform,
};
use jntag::profile::{default_target_sets, parse_target_sets, BoundaryMode, ProfileConfig};
use jntag::synthetic::{generate, SynthConfig};
use jntag::{Error, Result};

#[derive(Parser)]
#[command(name = "jntag", version, about = "Nominal-adjective screening, relabeling and tagging experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Input corpus (word<TAB>pos<TAB>bio, blank line between sentences).
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// BIO scheme of the input; detected when omitted.
    #[arg(long, value_parser = ["iob1", "iob2"])]
    scheme: Option<String>,
    /// Extra config entries, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Find nominal-adjective candidates.
    Screen {
        #[command(flatten)]
        common: Common,
        /// Review list with accept/reject decisions.
        #[arg(long)]
        review: Option<PathBuf>,
    },
    /// Relabel the candidates of a candidate export.
    Relabel {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long, default_value = "jn", value_parser = ["jn", "jj2nn"])]
        transform: String,
        #[arg(long)]
        output: PathBuf,
    },
    /// Context tag distributions and cosine similarities.
    Profile {
        #[command(flatten)]
        common: Common,
        /// Target sets as `name=TAG,TAG;name=TAG`. The first is compared with the rest.
        #[arg(long)]
        targets: Option<String>,
        #[arg(long, default_value = "symbol", value_parser = ["symbol", "skip"])]
        boundary: String,
        #[arg(long)]
        top_k: Option<usize>,
    },
    /// Train an HMM POS tagger.
    TrainHmm {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
    },
    /// POS-tag a corpus with a saved HMM.
    Tag {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Train a MaxEnt BIO chunker.
    TrainChunker {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
    },
    /// Chunk a corpus with a saved chunker.
    Chunk {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Score a predicted corpus against gold (gold is --input).
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, default_value = "pos", value_parser = ["pos", "bio"])]
        column: String,
        /// Candidate export; adds per-tag scores over those positions.
        #[arg(long)]
        candidates: Option<PathBuf>,
    },
    /// Baseline vs relabeled experiment.
    Experiment {
        #[command(flatten)]
        common: Common,
    },
    /// Write a synthetic corpus.
    Synth {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 50_000)]
        tokens: usize,
        #[arg(long, default_value_t = 0.001)]
        nominal_rate: f64,
    },
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        for o in &self.overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{o}`")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        if let Some(p) = &self.input {
            cfg.input = Some(p.clone());
        }
        if let Some(d) = &self.output_dir {
            cfg.output_dir = Some(d.clone());
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(s) = &self.scheme {
            cfg.scheme = Some(s.parse()?);
        }
        Ok(cfg)
    }
}

fn need<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    p.as_deref().ok_or_else(|| Error::Config(format!("{flag} is required")))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Screen { common, review } => {
            let cfg = common.config()?;
            let review = review.or(cfg.review.clone());
            let out = cmd_screen(
                need(&cfg.input, "--input")?,
                cfg.scheme,
                &cfg.screen,
                review.as_deref(),
                need(&cfg.output_dir, "--output-dir")?,
            )?;
            println!("candidates: {}", out.candidates.len());
            print!("{}", out.stats.to_tsv());
        }
        Command::Relabel { common, candidates, transform, output } => {
            let cfg = common.config()?;
            let transform: Transform = transform.parse()?;
            let out = cmd_relabel(
                need(&cfg.input, "--input")?,
                cfg.scheme,
                &candidates,
                transform,
                &cfg.jj2nn_mapping,
                &output,
            )?;
            println!("wrote {} sentences to {}", out.len(), output.display());
        }
        Command::Profile { common, targets, boundary, top_k } => {
            let cfg = common.config()?;
            let sets = match targets {
                Some(t) => parse_target_sets(&t)?,
                None => default_target_sets(),
            };
            let pcfg = ProfileConfig {
                boundary: boundary.parse::<BoundaryMode>()?,
                top_k,
            };
            let report = cmd_profile(
                need(&cfg.input, "--input")?,
                cfg.scheme,
                &sets,
                &pcfg,
                need(&cfg.output_dir, "--output-dir")?,
            )?;
            print!("{}", report.similarity_tsv());
        }
        Command::TrainHmm { common, model } => {
            let cfg = common.config()?;
            let m = cmd_train_hmm(need(&cfg.input, "--input")?, cfg.scheme, &cfg.hmm, &model)?;
            println!("tags: {} vocabulary: {}", m.num_tags(), m.vocabulary_size());
        }
        Command::Tag { common, model, output } => {
            let cfg = common.config()?;
            let c = cmd_tag(&model, need(&cfg.input, "--input")?, cfg.scheme, &output)?;
            println!("tagged {} tokens", c.token_count());
        }
        Command::TrainChunker { common, model } => {
            let cfg = common.config()?;
            let m = cmd_train_chunker(need(&cfg.input, "--input")?, cfg.scheme, &cfg.maxent, &model)?;
            println!("labels: {} features: {}", m.labels().len(), m.feature_index().len());
        }
        Command::Chunk { common, model, output } => {
            let cfg = common.config()?;
            let c = cmd_chunk(&model, need(&cfg.input, "--input")?, cfg.scheme, &output)?;
            println!("chunked {} tokens", c.token_count());
        }
        Command::Eval { common, pred, column, candidates } => {
            let cfg = common.config()?;
            let column: Column = column.parse()?;
            let report = cmd_eval(
                need(&cfg.input, "--input")?,
                &pred,
                cfg.scheme,
                column,
                candidates.as_deref(),
                cfg.output_dir.as_deref(),
            )?;
            print!("{}", report.to_key_values(""));
        }
        Command::Experiment { common } => {
            let cfg = common.config()?;
            let out = cmd_experiment(&cfg)?;
            println!("candidates: {}", out.candidates.len());
            for (task, run) in &out.runs {
                println!("\n{task}");
                print!("{}", run.delta.summary_text());
            }
        }
        Command::Synth { common, output, tokens, nominal_rate } => {
            let cfg = common.config()?;
            let s = generate(&SynthConfig {
                tokens,
                nominal_rate,
                scheme: cfg.scheme.unwrap_or(Scheme::Iob1),
                seed: cfg.seed,
            })?;
            write_pos_chunk_file(&output, &s.corpus)?;
            println!(
                "sentences: {} tokens: {} nominal: {}",
                s.corpus.len(),
                s.corpus.token_count(),
                s.nominal_positions.len()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

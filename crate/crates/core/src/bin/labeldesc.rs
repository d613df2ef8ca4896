use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use labeldesc::report::{load_corpus, load_embedding_file, mine_report, read_pattern_list};
use labeldesc::{generate, soft_f1, Error, SearchConfig, SynthSpec};

#[derive(Parser)]
#[command(name = "labeldesc", version, about = "Mine token patterns that describe a binary labeling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Mine label-descriptive patterns from a corpus.
    Mine {
        /// Corpus file: space-separated tokens per line, or JSONL when
        /// --labels is omitted.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        min_support: usize,
        #[arg(long, default_value_t = 3)]
        min_token_freq: usize,
        #[arg(long, default_value_t = 10)]
        neighbors_k: usize,
        #[arg(long, default_value_t = 0.5)]
        min_cosine: f64,
        #[arg(long, default_value_t = 500)]
        beam: usize,
        #[arg(long, default_value_t = 1000)]
        max_rounds: usize,
        /// Only describe instances with label 1.
        #[arg(long)]
        positive_only: bool,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Generate a synthetic corpus with planted patterns.
    Synth {
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        vocab: usize,
        #[arg(long, default_value_t = 5)]
        patterns: usize,
        #[arg(long, default_value_t = 3)]
        pattern_len: usize,
        #[arg(long, default_value_t = 1)]
        group_size: usize,
        #[arg(long, default_value_t = 0.1)]
        imbalance: f64,
        #[arg(long, default_value_t = 0.05)]
        target_rate: f64,
        #[arg(long, default_value_t = 0.002)]
        leak_rate: f64,
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Score found patterns against planted ones.
    Eval {
        #[arg(long)]
        found: PathBuf,
        #[arg(long)]
        planted: PathBuf,
    },
}

fn run(cli: Cli) -> labeldesc::Result<()> {
    match cli.command {
        Command::Mine {
            input,
            labels,
            embeddings,
            min_support,
            min_token_freq,
            neighbors_k,
            min_cosine,
            beam,
            max_rounds,
            positive_only,
            output,
            format,
        } => {
            let config = SearchConfig {
                min_support,
                min_token_freq,
                neighbors_k,
                min_cosine,
                beam,
                max_rounds,
                mine_both_labels: !positive_only,
                ..SearchConfig::default()
            };
            config.validate()?;
            let db = load_corpus(&input, labels.as_deref())?;
            let table = embeddings.as_deref().map(load_embedding_file).transpose()?;
            let report = mine_report(&db, &config, table.as_ref())?;
            if let Some(w) = &report.metadata.warning {
                eprintln!("warning: {w}");
            }
            let text = match format {
                Format::Json => report.to_json(),
                Format::Text => report.to_text(),
            };
            match output {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
        }
        Command::Synth {
            n,
            vocab,
            patterns,
            pattern_len,
            group_size,
            imbalance,
            target_rate,
            leak_rate,
            noise,
            seed,
            out_dir,
        } => {
            let spec = SynthSpec {
                n,
                m: vocab,
                imbalance,
                num_patterns: patterns,
                pattern_len,
                group_size,
                target_rate,
                leak_rate,
                destructive_noise: noise,
                seed,
                ..SynthSpec::default()
            };
            let data = generate(&spec)?;
            data.write_to(&out_dir)?;
            eprintln!(
                "wrote {} instances ({} in G+), {} tokens, {} planted patterns to {}",
                data.db.n(),
                data.db.n_plus(),
                data.db.m(),
                data.truth.patterns.len(),
                out_dir.display()
            );
        }
        Command::Eval { found, planted } => {
            let found: Vec<_> = read_pattern_list(&found)?.iter().map(|p| p.token_set()).collect();
            let planted: Vec<_> = read_pattern_list(&planted)?.iter().map(|p| p.token_set()).collect();
            let score = soft_f1(&found, &planted);
            println!("{}", serde_json::to_string(&score).expect("scores serialize"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match &e {
                e if e.is_malformed_input() => 3,
                Error::Io(_) => 2,
                Error::Domain(_) | Error::InvalidSpec(_) | Error::VocabularyTooSmall { .. } => 2,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

//! `mtprep`: one binary wiring the toolkit's operations into pipeline
//! subcommands. Filter-style subcommands read standard input and write
//! standard output when no paths are given, so they compose in shells.
//! Exit codes: 0 success, 1 input error, 2 internal error.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

fn long_version() -> &'static str {
    concat!(env!("CARGO_PKG_VERSION"), "\nformats: bpe-merges v1, maskplan v1")
}

/// Uniform error with the exit status it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, unreadable or malformed input. Exit 1.
    Input(String),
    /// Failures the user cannot fix by editing input, such as write
    /// errors on the output side. Exit 2.
    Internal(String),
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError::Input(message.into())
    }

    pub fn internal(message: impl Into<String>) -> Self {
        CliError::Internal(message.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) | CliError::Internal(msg) => f.write_str(msg),
        }
    }
}

impl From<mtprep::Error> for CliError {
    fn from(err: mtprep::Error) -> Self {
        CliError::Input(err.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "mtprep",
    about = "Preprocessing, corpus construction, and n-best reranking for NMT pipelines",
    version,
    long_version = long_version(),
)]
struct Cli {
    /// Worker threads for line-parallel subcommands; output does not
    /// depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct StreamArgs {
    /// Input file; standard input when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct PairArgs {
    /// Source-side input file.
    #[arg(long)]
    src: PathBuf,
    /// Target-side input file.
    #[arg(long)]
    tgt: PathBuf,
    /// Source-side output file.
    #[arg(long)]
    out_src: PathBuf,
    /// Target-side output file.
    #[arg(long)]
    out_tgt: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Direction {
    ToLatin,
    ToCyrillic,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a merge table from a tokenized corpus.
    LearnBpe {
        #[command(flatten)]
        io: StreamArgs,
        /// Number of merge operations to learn.
        #[arg(long)]
        merges: Option<usize>,
        /// Pipeline config supplying defaults.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Learn one merge table over both sides of a parallel corpus.
    LearnJointBpe {
        /// Source-side corpus.
        #[arg(long)]
        source: PathBuf,
        /// Target-side corpus.
        #[arg(long)]
        target: PathBuf,
        /// Merge table output; standard output when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Latinize the target side and write `<basename>.lat` and
        /// `<basename>.cyr` tables instead of one table.
        #[arg(long, value_name = "BASENAME", conflicts_with = "output")]
        biscript: Option<PathBuf>,
        #[arg(long)]
        merges: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Segment text with a learned merge table.
    ApplyBpe {
        /// Merge table file.
        #[arg(long)]
        table: PathBuf,
        #[command(flatten)]
        io: StreamArgs,
    },
    /// Join subword segments back into words.
    Desegment {
        #[command(flatten)]
        io: StreamArgs,
    },
    /// Transliterate between Cyrillic and Latin scripts.
    Translit {
        /// Mapping direction.
        #[arg(long, value_enum)]
        direction: Direction,
        /// Transliteration table file; the bundled ISO 9 table when
        /// omitted.
        #[arg(long)]
        table: Option<PathBuf>,
        #[command(flatten)]
        io: StreamArgs,
    },
    /// Segment Russian text with stacked Cyrillic and Latin tables.
    SegmentRu {
        /// Basename of the `.lat`/`.cyr` table pair.
        #[arg(long)]
        tables: PathBuf,
        #[command(flatten)]
        io: StreamArgs,
    },
    /// Remove Romanian diacritics.
    StripDiacritics {
        #[command(flatten)]
        io: StreamArgs,
    },
    /// Draw a uniform sample of lines or aligned pairs.
    Sample {
        /// Sample size.
        #[arg(short = 'n', long)]
        size: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Aligned pair mode: sample pairs from --src/--tgt.
        #[command(flatten)]
        pair: PairIo,
        /// Single-stream mode input; standard input when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Materialize a corpus blend from a recipe file.
    Mix {
        /// Recipe file.
        #[arg(long)]
        recipe: PathBuf,
        #[arg(long)]
        out_src: PathBuf,
        #[arg(long)]
        out_tgt: PathBuf,
    },
    /// Drop pairs with an over-long side.
    FilterLen {
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        pair: PairIo,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Apply one seeded permutation to a corpus.
    Shuffle {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        pair: PairIo,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Report blend sizes per corpus category.
    Stats {
        /// Manifest of `label<TAB>src<TAB>tgt` lines; standard input when
        /// omitted. Labels: parallel, synthetic-to-en, synthetic-from-en.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Reverse target-side token order.
    ReverseTarget {
        #[command(flatten)]
        pair: PairIo,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Combine named score columns and pick the best hypothesis per
    /// sentence.
    Rerank {
        /// N-best list file; standard input when omitted.
        #[arg(long)]
        nbest: Option<PathBuf>,
        /// Comma-separated score names to combine.
        #[arg(long, value_delimiter = ',', required = true)]
        scores: Vec<String>,
        /// Attach a score column before combining: NAME=FILE with one
        /// value per hypothesis line.
        #[arg(long, value_name = "NAME=FILE")]
        attach: Vec<String>,
        /// Comma-separated combination weights; uniform when omitted.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        /// Divide each score by the hypothesis token count first.
        #[arg(long)]
        length_norm: bool,
        /// Write the full n-best list with combined scores instead of one
        /// best translation per line.
        #[arg(long)]
        emit_nbest: bool,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Average aligned score columns element-wise.
    EnsembleScores {
        /// One file of scores per model, one value per line.
        #[arg(required = true)]
        columns: Vec<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print the ids of the last saved checkpoints.
    SelectCheckpoints {
        /// Checkpoint log.
        #[arg(long)]
        log: PathBuf,
        /// How many trailing checkpoints to keep.
        #[arg(short = 'k', long)]
        k: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Decide whether validation scores have stopped improving.
    EarlyStop {
        /// Validation history, one score per line; standard input when
        /// omitted.
        #[arg(long)]
        history: Option<PathBuf>,
        #[arg(long)]
        patience: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Score hypotheses against references with corpus BLEU.
    Bleu {
        /// Hypothesis file; standard input when omitted.
        #[arg(long)]
        hyp: Option<PathBuf>,
        /// Reference file.
        #[arg(long = "ref")]
        reference: PathBuf,
        /// Add-one smoothing for higher-order precisions.
        #[arg(long)]
        smooth: bool,
        #[arg(long, default_value_t = 4)]
        max_n: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Generate a dropout mask plan for one sentence pair.
    MaskPlan {
        #[arg(long)]
        src_len: usize,
        #[arg(long)]
        tgt_len: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        p_word: Option<f64>,
        #[arg(long)]
        p_layer: Option<f64>,
        /// Comma-separated layer sizes.
        #[arg(long, value_delimiter = ',', default_values_t = [1024usize, 1024])]
        layer_sizes: Vec<usize>,
        /// Record that the consumer rescales kept units.
        #[arg(long)]
        scaled: bool,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Aligned-pair file arguments; all four must appear together.
#[derive(Args, Debug, Clone)]
struct PairIo {
    #[arg(long, requires_all = ["tgt", "out_src", "out_tgt"])]
    src: Option<PathBuf>,
    #[arg(long, requires_all = ["src", "out_src", "out_tgt"])]
    tgt: Option<PathBuf>,
    #[arg(long, requires_all = ["src", "tgt", "out_tgt"])]
    out_src: Option<PathBuf>,
    #[arg(long, requires_all = ["src", "tgt", "out_src"])]
    out_tgt: Option<PathBuf>,
}

impl PairIo {
    fn paths(&self) -> Option<(&PathBuf, &PathBuf, &PathBuf, &PathBuf)> {
        match (&self.src, &self.tgt, &self.out_src, &self.out_tgt) {
            (Some(a), Some(b), Some(c), Some(d)) => Some((a, b, c, d)),
            _ => None,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                return ExitCode::SUCCESS;
            }
            eprint!("{err}");
            return ExitCode::from(1);
        }
    };

    if let Some(threads) = cli.threads {
        let result = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
        if let Err(err) = result {
            eprintln!("mtprep: {err}");
            return ExitCode::from(2);
        }
    }

    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("mtprep: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

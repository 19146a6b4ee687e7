//! Subcommand implementations. Each one reads its inputs, calls into the
//! library, and writes outputs exactly in the library's file formats.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use mtprep::bleu::{corpus_bleu, BleuOptions};
use mtprep::bpe::{self, MergeTable, Segmenter};
use mtprep::corpus::{self, CorpusLabel, ParallelCorpus};
use mtprep::diacritics::DiacriticMap;
use mtprep::dropout::{make_mask_plan, DropoutConfig};
use mtprep::rerank::{self, CheckpointLog, NBestList};
use mtprep::textio;
use mtprep::translit::{BiScriptMergeTable, TranslitTable};

use crate::config::PipelineConfig;
use crate::{CliError, Command, Direction, PairIo, StreamArgs};

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::LearnBpe { io, merges, config } => learn_bpe(io, merges, config),
        Command::LearnJointBpe {
            source,
            target,
            output,
            biscript,
            merges,
            config,
        } => learn_joint_bpe(source, target, output, biscript, merges, config),
        Command::ApplyBpe { table, io } => apply_bpe(table, io),
        Command::Desegment { io } => desegment(io),
        Command::Translit {
            direction,
            table,
            io,
        } => translit(direction, table, io),
        Command::SegmentRu { tables, io } => segment_ru(tables, io),
        Command::StripDiacritics { io } => strip_diacritics(io),
        Command::Sample {
            size,
            seed,
            config,
            pair,
            input,
            output,
        } => sample(size, seed, config, pair, input, output),
        Command::Mix {
            recipe,
            out_src,
            out_tgt,
        } => mix(recipe, out_src, out_tgt),
        Command::FilterLen {
            max_len,
            config,
            pair,
            input,
            output,
        } => filter_len(max_len, config, pair, input, output),
        Command::Shuffle {
            seed,
            config,
            pair,
            input,
            output,
        } => shuffle(seed, config, pair, input, output),
        Command::Stats { manifest, output } => stats(manifest, output),
        Command::ReverseTarget {
            pair,
            input,
            output,
        } => reverse_target(pair, input, output),
        Command::Rerank {
            nbest,
            scores,
            attach,
            weights,
            length_norm,
            emit_nbest,
            output,
            config,
        } => rerank_cmd(
            nbest,
            scores,
            attach,
            weights,
            length_norm,
            emit_nbest,
            output,
            config,
        ),
        Command::EnsembleScores { columns, output } => ensemble_scores(columns, output),
        Command::SelectCheckpoints {
            log,
            k,
            config,
            output,
        } => select_checkpoints(log, k, config, output),
        Command::EarlyStop {
            history,
            patience,
            config,
            output,
        } => early_stop(history, patience, config, output),
        Command::Bleu {
            hyp,
            reference,
            smooth,
            max_n,
            output,
        } => bleu(hyp, reference, smooth, max_n, output),
        Command::MaskPlan {
            src_len,
            tgt_len,
            seed,
            p_word,
            p_layer,
            layer_sizes,
            scaled,
            config,
            output,
        } => mask_plan(
            src_len,
            tgt_len,
            seed,
            p_word,
            p_layer,
            layer_sizes,
            scaled,
            config,
            output,
        ),
    }
}

// ---------------------------------------------------------------- io glue

fn read_input_lines(path: Option<&Path>) -> Result<Vec<String>, CliError> {
    match path {
        Some(path) => Ok(textio::read_lines_path(path)?),
        None => {
            let stdin = std::io::stdin();
            Ok(textio::read_lines(stdin.lock())?)
        }
    }
}

fn write_output_lines<S: AsRef<str>>(path: Option<&Path>, lines: &[S]) -> Result<(), CliError> {
    let result = match path {
        Some(path) => textio::write_lines_path(path, lines),
        None => {
            let stdout = std::io::stdout();
            ignore_closed_pipe(textio::write_lines(stdout.lock(), lines))
        }
    };
    result.map_err(|e| CliError::internal(format!("writing output: {e}")))
}

fn write_output_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    let result = match path {
        Some(path) => std::fs::write(path, text).map_err(mtprep::Error::from),
        None => {
            let stdout = std::io::stdout();
            ignore_closed_pipe(stdout.lock().write_all(text.as_bytes()).map_err(Into::into))
        }
    };
    result.map_err(|e| CliError::internal(format!("writing output: {e}")))
}

/// A downstream reader closing early (for example `head`) ends the
/// command successfully instead of failing it.
fn ignore_closed_pipe(result: mtprep::Result<()>) -> mtprep::Result<()> {
    match result {
        Err(mtprep::Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => other,
    }
}

fn open_reader(path: &Path) -> Result<std::io::BufReader<std::fs::File>, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok(std::io::BufReader::new(file))
}

/// Applies a pure per-line function across worker threads, keeping order.
fn map_lines<F>(lines: Vec<String>, f: F) -> Vec<String>
where
    F: Fn(&str) -> String + Sync,
{
    lines.par_iter().map(|line| f(line)).collect()
}

// ------------------------------------------------------------- bpe family

fn learn_bpe(
    io: StreamArgs,
    merges: Option<usize>,
    config: Option<PathBuf>,
) -> Result<(), CliError> {
    let config = PipelineConfig::load_or_default(config.as_deref())?;
    let merges = merges.unwrap_or(config.merges);
    let vocab = match &io.input {
        Some(path) => bpe::build_vocab(open_reader(path)?)?,
        None => bpe::build_vocab(std::io::stdin().lock())?,
    };
    let table = bpe::learn_bpe(&vocab, merges)?;
    write_table(&table, io.output.as_deref())
}

fn learn_joint_bpe(
    source: PathBuf,
    target: PathBuf,
    output: Option<PathBuf>,
    biscript: Option<PathBuf>,
    merges: Option<usize>,
    config: Option<PathBuf>,
) -> Result<(), CliError> {
    let config = PipelineConfig::load_or_default(config.as_deref())?;
    let merges = merges.unwrap_or(config.merges);
    match biscript {
        Some(basename) => {
            let tables = mtprep::translit::learn_biscript_bpe(
                open_reader(&source)?,
                open_reader(&target)?,
                merges,
            )?;
            tables
                .save(&basename)
                .map_err(|e| CliError::internal(format!("writing tables: {e}")))?;
            Ok(())
        }
        None => {
            let table =
                bpe::learn_joint_bpe(open_reader(&source)?, open_reader(&target)?, merges)?;
            write_table(&table, output.as_deref())
        }
    }
}

fn write_table(table: &MergeTable, output: Option<&Path>) -> Result<(), CliError> {
    let mut buf = Vec::new();
    table
        .write_to(&mut buf)
        .map_err(|e| CliError::internal(format!("serializing table: {e}")))?;
    let text = String::from_utf8(buf).expect("table serialization is UTF-8");
    write_output_text(output, &text)
}

fn apply_bpe(table: PathBuf, io: StreamArgs) -> Result<(), CliError> {
    let table = MergeTable::load(&table)?;
    let lines = read_input_lines(io.input.as_deref())?;
    let segmented: Vec<String> = lines
        .par_iter()
        .map_init(
            || table.segmenter(),
            |segmenter, line| segmenter.segment_line(line),
        )
        .collect();
    write_output_lines(io.output.as_deref(), &segmented)
}

fn desegment(io: StreamArgs) -> Result<(), CliError> {
    let lines = read_input_lines(io.input.as_deref())?;
    let mut dangling = 0usize;
    let joined: Vec<String> = lines
        .iter()
        .map(|line| {
            if bpe::has_dangling_marker(line) {
                dangling += 1;
            }
            bpe::desegment_line(line)
        })
        .collect();
    if dangling > 0 {
        eprintln!("mtprep: warning: stripped a dangling continuation marker on {dangling} line(s)");
    }
    write_output_lines(io.output.as_deref(), &joined)
}

fn translit(
    direction: Direction,
    table: Option<PathBuf>,
    io: StreamArgs,
) -> Result<(), CliError> {
    let owned;
    let table: &TranslitTable = match table {
        Some(path) => {
            owned = TranslitTable::from_path(&path)?;
            &owned
        }
        None => TranslitTable::iso9(),
    };
    let lines = read_input_lines(io.input.as_deref())?;
    let mapped = map_lines(lines, |line| match direction {
        Direction::ToLatin => table.to_latin(line),
        Direction::ToCyrillic => table.to_cyrillic(line),
    });
    write_output_lines(io.output.as_deref(), &mapped)
}

fn segment_ru(tables: PathBuf, io: StreamArgs) -> Result<(), CliError> {
    let tables = BiScriptMergeTable::load(&tables)?;
    let lines = read_input_lines(io.input.as_deref())?;
    let segmented: Vec<String> = lines
        .par_iter()
        .map_init(
            || tables.segmenter(),
            |segmenter: &mut Segmenter, line| segmenter.segment_line(line),
        )
        .collect();
    write_output_lines(io.output.as_deref(), &segmented)
}

fn strip_diacritics(io: StreamArgs) -> Result<(), CliError> {
    let map = DiacriticMap::romanian();
    let lines = read_input_lines(io.input.as_deref())?;
    let stripped = map_lines(lines, |line| map.strip(line));
    write_output_lines(io.output.as_deref(), &stripped)
}

// ---------------------------------------------------------- corpus family

fn sample(
    size: usize,
    seed: Option<u64>,
    config: Option<PathBuf>,
    pair: PairIo,
    input: Option<PathBuf>,
    output: Option<PathBuf>,
) -> Result<(), CliError> {
    let config = PipelineConfig::load_or_default(config.as_deref())?;
    let seed = seed.unwrap_or(config.seed);
    if let Some((src, tgt, out_src, out_tgt)) = pair.paths() {
        let corpus = ParallelCorpus::open(src, tgt)?;
        let sampled = corpus::reservoir_sample(corpus.read_pairs()?, size, seed)?;
        ParallelCorpus::write_pairs(out_src, out_tgt, &sampled)
            .map_err(|e| CliError::internal(format!("writing sample: {e}")))?;
        Ok(())
    } else {
        let lines = read_input_lines(input.as_deref())?;
        let sampled = corpus::reservoir_sample(lines, size, seed)?;
        write_output_lines(output.as_deref(), &sampled)
    }
}

fn mix(recipe: PathBuf, out_src: PathBuf, out_tgt: PathBuf) -> Result<(), CliError> {
    let recipe = corpus::MixRecipe::from_path(&recipe)?;
    let pairs = corpus::mix_corpora(&recipe)?;
    ParallelCorpus::write_pairs(out_src, out_tgt, &pairs)
        .map_err(|e| CliError::internal(format!("writing blend: {e}")))?;
    Ok(())
}

fn filter_len(
    max_len: Option<usize>,
    config: Option<PathBuf>,
    pair: PairIo,
    input: Option<PathBuf>,
    output: Option<PathBuf>,
) -> Result<(), CliError> {
    let config = PipelineConfig::load_or_default(config.as_deref())?;
    let max_len = max_len.unwrap_or(config.max_len);
    if let Some((src, tgt, out_src, out_tgt)) = pair.paths() {
        let corpus = ParallelCorpus::open(src, tgt)?;
        let kept = corpus::length_filter(corpus.read_pairs()?, max_len);
        ParallelCorpus::write_pairs(out_src, out_tgt, &kept)
            .map_err(|e| CliError::internal(format!("writing corpus: {e}")))?;
        Ok(())
    } else {
        let lines = read_input_lines(input.as_deref())?;
        let kept: Vec<String> = lines
            .into_iter()
            .filter(|line| line.split_whitespace().count() <= max_len)
            .collect();
        write_output_lines(output.as_deref(), &kept)
    }
}

fn shuffle(
    seed: Option<u64>,
    config: Option<PathBuf>,
    pair: PairIo,
    input: Option<PathBuf>,
    output: Option<PathBuf>,
) -> Result<(), CliError> {
    let config = PipelineConfig::load_or_default(config.as_deref())?;
    let seed = seed.unwrap_or(config.seed);
    if let Some((src, tgt, out_src, out_tgt)) = pair.paths() {
        let corpus = ParallelCorpus::open(src, tgt)?;
        let shuffled = corpus::shuffle_pairs(corpus.read_pairs()?, seed);
        ParallelCorpus::write_pairs(out_src, out_tgt, &shuffled)
            .map_err(|e| CliError::internal(format!("writing corpus: {e}")))?;
        Ok(())
    } else {
        let lines = read_input_lines(input.as_deref())?;
        let shuffled = corpus::shuffle_lines(lines, seed);
        write_output_lines(output.as_deref(), &shuffled)
    }
}

fn stats(manifest: Option<PathBuf>, output: Option<PathBuf>) -> Result<(), CliError> {
    let lines = read_input_lines(manifest.as_deref())?;
    let mut entries = Vec::new();
    for (lineno, line) in lines.iter().enumerate() {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(CliError::input(format!(
                "manifest line {}: expected label<TAB>src<TAB>tgt",
                lineno + 1
            )));
        }
        let label: CorpusLabel = fields[0].parse()?;
        let corpus = ParallelCorpus::open(fields[1], fields[2])?;
        entries.push((label, corpus));
    }
    let stats = corpus::corpus_stats(&entries);
    write_output_text(output.as_deref(), &stats.render())
}

// ---------------------------------------------------------- rerank family

fn reverse_target(
    pair: PairIo,
    input: Option<PathBuf>,
    output: Option<PathBuf>,
) -> Result<(), CliError> {
    if let Some((src, tgt, out_src, out_tgt)) = pair.paths() {
        let corpus = ParallelCorpus::open(src, tgt)?;
        let reversed = rerank::reverse_target(corpus.read_pairs()?);
        ParallelCorpus::write_pairs(out_src, out_tgt, &reversed)
            .map_err(|e| CliError::internal(format!("writing corpus: {e}")))?;
        Ok(())
    } else {
        let lines = read_input_lines(input.as_deref())?;
        let reversed: Vec<String> = lines.iter().map(|l| rerank::reverse_tokens(l)).collect();
        write_output_lines(output.as_deref(), &reversed)
    }
}

#[allow(clippy::too_many_arguments)]
fn rerank_cmd(
    nbest: Option<PathBuf>,
    scores: Vec<String>,
    attach: Vec<String>,
    weights: Option<Vec<f64>>,
    length_norm: bool,
    emit_nbest: bool,
    output: Option<PathBuf>,
    config: Option<PathBuf>,
) -> Result<(), CliError> {
    let config = PipelineConfig::load_or_default(config.as_deref())?;
    let mut list = match &nbest {
        Some(path) => NBestList::load(path, Some(config.nbest_size))?,
        None => NBestList::read_from(std::io::stdin().lock(), Some(config.nbest_size))?,
    };
    for entry in &attach {
        let (name, file) = entry.split_once('=').ok_or_else(|| {
            CliError::input(format!("--attach expects NAME=FILE, found {entry:?}"))
        })?;
        let column = read_score_column(Path::new(file))?;
        rerank::attach_scores(&mut list, name, &column)?;
    }
    let combined = rerank::combine(&list, &scores, weights.as_deref(), length_norm)?;
    if emit_nbest {
        let mut buf = Vec::new();
        combined
            .write_to(&mut buf)
            .map_err(|e| CliError::internal(format!("serializing n-best list: {e}")))?;
        write_output_text(
            output.as_deref(),
            &String::from_utf8(buf).expect("n-best serialization is UTF-8"),
        )
    } else {
        let best = rerank::select_best(&combined)?;
        let lines: Vec<String> = best.iter().map(|hyp| hyp.text()).collect();
        write_output_lines(output.as_deref(), &lines)
    }
}

fn read_score_column(path: &Path) -> Result<Vec<f64>, CliError> {
    let lines = textio::read_lines_path(path)?;
    lines
        .iter()
        .enumerate()
        .filter(|(_, line)| !line.is_empty())
        .map(|(lineno, line)| {
            line.trim().parse::<f64>().map_err(|_| {
                CliError::input(format!(
                    "{}: line {} is not a number: {line:?}",
                    path.display(),
                    lineno + 1
                ))
            })
        })
        .collect()
}

fn ensemble_scores(columns: Vec<PathBuf>, output: Option<PathBuf>) -> Result<(), CliError> {
    let loaded: Vec<Vec<f64>> = columns
        .iter()
        .map(|path| read_score_column(path))
        .collect::<Result<_, _>>()?;
    let merged = rerank::ensemble_scores(&loaded)?;
    let lines: Vec<String> = merged.iter().map(|v| v.to_string()).collect();
    write_output_lines(output.as_deref(), &lines)
}

fn select_checkpoints(
    log: PathBuf,
    k: Option<usize>,
    config: Option<PathBuf>,
    output: Option<PathBuf>,
) -> Result<(), CliError> {
    let config = PipelineConfig::load_or_default(config.as_deref())?;
    let k = k.unwrap_or(config.ensemble_k);
    let log = CheckpointLog::load(&log)?;
    let picked = rerank::select_checkpoints(&log, k)?;
    write_output_lines(output.as_deref(), &picked)
}

fn early_stop(
    history: Option<PathBuf>,
    patience: Option<usize>,
    config: Option<PathBuf>,
    output: Option<PathBuf>,
) -> Result<(), CliError> {
    let config = PipelineConfig::load_or_default(config.as_deref())?;
    let patience = patience.unwrap_or(config.patience);
    let lines = read_input_lines(history.as_deref())?;
    let scores: Vec<f64> = lines
        .iter()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(lineno, line)| {
            line.trim()
                .parse::<f64>()
                .map_err(|_| CliError::input(format!("history line {} is not a number", lineno + 1)))
        })
        .collect::<Result<_, _>>()?;
    let verdict = rerank::early_stop(&scores, patience);
    let text = match verdict.best_index {
        Some(best) => format!(
            "stop={}\tbest_index={}\tbest_score={}\n",
            verdict.stop, best, scores[best]
        ),
        None => format!("stop={}\tbest_index=\tbest_score=\n", verdict.stop),
    };
    write_output_text(output.as_deref(), &text)
}

// ------------------------------------------------------------ evaluation

fn bleu(
    hyp: Option<PathBuf>,
    reference: PathBuf,
    smooth: bool,
    max_n: usize,
    output: Option<PathBuf>,
) -> Result<(), CliError> {
    let hypotheses = read_input_lines(hyp.as_deref())?;
    let references = textio::read_lines_path(&reference)?;
    let report = corpus_bleu(&hypotheses, &references, BleuOptions { max_n, smooth })?;
    write_output_text(output.as_deref(), &format!("{}\n", report.render()))
}

#[allow(clippy::too_many_arguments)]
fn mask_plan(
    src_len: usize,
    tgt_len: usize,
    seed: Option<u64>,
    p_word: Option<f64>,
    p_layer: Option<f64>,
    layer_sizes: Vec<usize>,
    scaled: bool,
    config: Option<PathBuf>,
    output: Option<PathBuf>,
) -> Result<(), CliError> {
    let config = PipelineConfig::load_or_default(config.as_deref())?;
    let dropout = DropoutConfig {
        p_word: p_word.unwrap_or(config.p_word),
        p_layer: p_layer.unwrap_or(config.p_layer),
        layer_sizes,
        seed: seed.unwrap_or(config.seed),
        scaled,
    };
    let plan = make_mask_plan(&dropout, src_len, tgt_len)?;
    let mut buf = Vec::new();
    plan.write_to(&mut buf)
        .map_err(|e| CliError::internal(format!("serializing plan: {e}")))?;
    write_output_text(
        output.as_deref(),
        &String::from_utf8(buf).expect("plan serialization is UTF-8"),
    )
}


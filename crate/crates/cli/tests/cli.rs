//! End-to-end tests of the binary: exit codes, stream composition, and a
//! full preprocessing pipeline on a small Romanian fixture.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mtprep"))
}

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn mtprep");
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().expect("wait for mtprep")
}

fn stdout_of(output: &Output) -> String {
    assert!(
        output.status.success(),
        "exit {:?}, stderr: {}",
        output.status.code(),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn write_file(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn unknown_subcommand_prints_usage_and_exits_1() {
    let output = run(&["no-such-command"], "");
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("Usage"), "{stderr}");
    assert!(output.stdout.is_empty());
}

#[test]
fn missing_input_file_exits_1() {
    let output = run(&["apply-bpe", "--table", "/nonexistent/table.bpe"], "");
    assert_eq!(output.status.code(), Some(1));
    assert!(!output.stderr.is_empty());
}

#[test]
fn version_reports_format_versions() {
    let output = run(&["--version"], "");
    let text = stdout_of(&output);
    assert!(text.contains("mtprep"), "{text}");
    let long = run(&["-V"], "");
    assert!(stdout_of(&long).contains("mtprep"));
}

#[test]
fn bleu_identical_files_prints_100() {
    let dir = tempfile::tempdir().unwrap();
    let reference = dir.path().join("ref.txt");
    write_file(&reference, "the cat sat on the mat\nanother test sentence here\n");
    let output = run(
        &["bleu", "--ref", reference.to_str().unwrap()],
        "the cat sat on the mat\nanother test sentence here\n",
    );
    let text = stdout_of(&output);
    assert!(text.starts_with("BLEU = 100.00"), "{text}");
}

#[test]
fn bleu_line_count_mismatch_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let reference = dir.path().join("ref.txt");
    write_file(&reference, "one line\n");
    let output = run(&["bleu", "--ref", reference.to_str().unwrap()], "a\nb\n");
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn filters_compose_over_pipes() {
    // strip-diacritics | filter-len works as a plain shell pipeline.
    let stripped = run(&["strip-diacritics"], "ţară şi\nBucurești e frumos azi da\n");
    let text = stdout_of(&stripped);
    assert_eq!(text, "tara si\nBucuresti e frumos azi da\n");
    let filtered = run(&["filter-len", "--max-len", "2"], &text);
    assert_eq!(stdout_of(&filtered), "tara si\n");
}

#[test]
fn closed_stdout_pipe_is_not_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let big = dir.path().join("big.scores");
    let column: Vec<String> = (0..200_000).map(|i| format!("-{i}")).collect();
    write_file(&big, &(column.join("\n") + "\n"));
    let mut child = bin()
        .args(["ensemble-scores", big.to_str().unwrap()])
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    // Dropping the read end while the writer is mid-stream raises the
    // closed-pipe condition.
    drop(child.stdout.take());
    let status = child.wait().unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn oversized_sample_names_both_counts() {
    let output = run(&["sample", "-n", "10", "--seed", "1"], "a\nb\nc\n");
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("10"), "{stderr}");
    assert!(stderr.contains('3'), "{stderr}");
}

#[test]
fn desegment_warns_about_dangling_marker() {
    let output = run(&["desegment"], "low@@ est\nbroken@@\n");
    assert_eq!(stdout_of(&output), "lowest\nbroken\n");
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("warning"), "{stderr}");
    assert!(stderr.contains("1 line(s)"), "{stderr}");

    let clean = run(&["desegment"], "low@@ est\n");
    assert!(clean.stderr.is_empty());
}

#[test]
fn early_stop_reports_decision() {
    let output = run(&["early-stop", "--patience", "3"], "10\n10\n10\n10\n");
    let text = stdout_of(&output);
    assert_eq!(text, "stop=true\tbest_index=0\tbest_score=10\n");
    let going = run(&["early-stop", "--patience", "3"], "1\n2\n3\n");
    assert_eq!(stdout_of(&going), "stop=false\tbest_index=2\tbest_score=3\n");
}

#[test]
fn select_checkpoints_takes_suffix_with_config_default() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("ckpt.log");
    let lines: Vec<String> = (1..=10)
        .map(|i| format!("{}\tmodel-{}", i * 30000, i * 30000))
        .collect();
    write_file(&log, &(lines.join("\n") + "\n"));
    let output = run(&["select-checkpoints", "--log", log.to_str().unwrap()], "");
    assert_eq!(
        stdout_of(&output),
        "model-210000\nmodel-240000\nmodel-270000\nmodel-300000\n"
    );
}

#[test]
fn rerank_selects_hand_computed_winner() {
    let nbest = "0 ||| the cat ||| l2r=-1 r2l=-2 ||| \n\
                 0 ||| a cat ||| l2r=-1.2 r2l=-0.8 ||| \n";
    let output = run(&["rerank", "--scores", "l2r,r2l"], nbest);
    assert_eq!(stdout_of(&output), "a cat\n");
    let full = run(&["rerank", "--scores", "l2r,r2l", "--emit-nbest"], nbest);
    let text = stdout_of(&full);
    assert!(text.contains("||| -1.5\n"), "{text}");
    assert!(text.contains("||| -1\n"), "{text}");
}

#[test]
fn ensemble_scores_averages_columns() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.scores");
    let b = dir.path().join("b.scores");
    write_file(&a, "-1\n-3\n");
    write_file(&b, "-3\n-1\n");
    let output = run(
        &["ensemble-scores", a.to_str().unwrap(), b.to_str().unwrap()],
        "",
    );
    assert_eq!(stdout_of(&output), "-2\n-2\n");
}

#[test]
fn mask_plan_defaults_match_shipped_settings() {
    let output = run(
        &[
            "mask-plan",
            "--src-len",
            "6",
            "--tgt-len",
            "4",
            "--seed",
            "5",
            "--layer-sizes",
            "8,8",
        ],
        "",
    );
    let text = stdout_of(&output);
    assert!(
        text.starts_with("#maskplan v1 seed=5 p_word=0.1 p_layer=0.2 scaled=0\n"),
        "{text}"
    );
    assert_eq!(text.lines().count(), 1 + 2 + 2);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("pair.cfg");
    write_file(&config, "merges=3\nseed=4\n");
    let corpus = "aa ab aa ab aa ab\n";
    let with_config = run(
        &["learn-bpe", "--config", config.to_str().unwrap()],
        corpus,
    );
    let table = stdout_of(&with_config);
    assert!(table.starts_with("#bpe-merges v1 count=3\n"), "{table}");
}

#[test]
fn shipped_configs_parse_and_pin_defaults() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["en-de.cfg", "en-cs.cfg", "en-ro.cfg", "en-ru.cfg"] {
        let path = configs.join(name);
        let corpus = "xy xy xy\n";
        // merges=89500 from every shipped config; tiny corpus stops early.
        let output = run(
            &["learn-bpe", "--config", path.to_str().unwrap()],
            corpus,
        );
        assert!(
            output.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&output.stderr)
        );
    }
}

/// Romanian-flavored fixture lines with inconsistent diacritics.
fn romanian_fixture(lines: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = [
        "țară", "ţară", "și", "şi", "București", "frumos", "astăzi", "munte",
        "râu", "pădure", "soare", "carte", "oraș", "oraş", "înalt", "vecin",
    ];
    (0..lines)
        .map(|_| {
            let n = rng.gen_range(3..9);
            (0..n)
                .map(|_| *words.choose(&mut rng).unwrap())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

fn english_fixture(lines: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = [
        "the", "mountain", "river", "forest", "sun", "book", "city", "tall",
        "neighbour", "beautiful", "today", "country", "and", "a", "is", "very",
    ];
    (0..lines)
        .map(|_| {
            let n = rng.gen_range(3..9);
            (0..n)
                .map(|_| *words.choose(&mut rng).unwrap())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

/// strip-diacritics -> learn-joint-bpe -> apply-bpe -> mix -> shuffle on a
/// 1k-line fixture: deterministic across repeat runs and reversible back
/// to the pre-subword text.
#[test]
fn romanian_pipeline_is_deterministic_and_reversible() {
    let dir = tempfile::tempdir().unwrap();
    let d = |name: &str| -> PathBuf { dir.path().join(name) };
    let ro_raw = romanian_fixture(1000, 41).join("\n") + "\n";
    let en_raw = english_fixture(1000, 42).join("\n") + "\n";
    write_file(&d("ro.raw"), &ro_raw);
    write_file(&d("en.txt"), &en_raw);

    let run_pipeline = |tag: &str| -> (String, String) {
        let ro = d(&format!("ro.{tag}"));
        let stripped = run(
            &["strip-diacritics", "--input", d("ro.raw").to_str().unwrap()],
            "",
        );
        write_file(&ro, &stdout_of(&stripped));

        let table = d(&format!("table.{tag}"));
        let learned = run(
            &[
                "learn-joint-bpe",
                "--source",
                ro.to_str().unwrap(),
                "--target",
                d("en.txt").to_str().unwrap(),
                "--merges",
                "500",
            ],
            "",
        );
        write_file(&table, &stdout_of(&learned));

        let ro_bpe = d(&format!("ro.bpe.{tag}"));
        let en_bpe = d(&format!("en.bpe.{tag}"));
        for (input, output) in [(&ro, &ro_bpe), (&d("en.txt"), &en_bpe)] {
            let segmented = run(
                &[
                    "apply-bpe",
                    "--table",
                    table.to_str().unwrap(),
                    "--input",
                    input.to_str().unwrap(),
                ],
                "",
            );
            write_file(output, &stdout_of(&segmented));
        }

        // Round trip back to the stripped text.
        let restored = run(&["desegment", "--input", ro_bpe.to_str().unwrap()], "");
        assert_eq!(stdout_of(&restored), std::fs::read_to_string(&ro).unwrap());

        let recipe = d(&format!("recipe.{tag}"));
        write_file(
            &recipe,
            &format!(
                "seed=7\nmax_len=50\n{}\t{}\tcopies=2\n",
                ro_bpe.display(),
                en_bpe.display()
            ),
        );
        let out_src = d(&format!("mix.src.{tag}"));
        let out_tgt = d(&format!("mix.tgt.{tag}"));
        let mixed = run(
            &[
                "mix",
                "--recipe",
                recipe.to_str().unwrap(),
                "--out-src",
                out_src.to_str().unwrap(),
                "--out-tgt",
                out_tgt.to_str().unwrap(),
            ],
            "",
        );
        stdout_of(&mixed);
        assert_eq!(
            std::fs::read_to_string(&out_src).unwrap().lines().count(),
            2000
        );

        let shuf_src = d(&format!("shuf.src.{tag}"));
        let shuf_tgt = d(&format!("shuf.tgt.{tag}"));
        let shuffled = run(
            &[
                "shuffle",
                "--seed",
                "11",
                "--src",
                out_src.to_str().unwrap(),
                "--tgt",
                out_tgt.to_str().unwrap(),
                "--out-src",
                shuf_src.to_str().unwrap(),
                "--out-tgt",
                shuf_tgt.to_str().unwrap(),
            ],
            "",
        );
        stdout_of(&shuffled);
        (
            std::fs::read_to_string(&shuf_src).unwrap(),
            std::fs::read_to_string(&shuf_tgt).unwrap(),
        )
    };

    let first = run_pipeline("a");
    let second = run_pipeline("b");
    assert_eq!(first, second);
}

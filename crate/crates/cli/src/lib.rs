//! The `oat` command line. [`run`] takes explicit streams so tests can drive
//! every subcommand in-process.

mod chat;

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use oat_core::curation::{curate_dir, CurateOptions, MediaSources, SynthesisOptions};
use oat_core::media::{build_media_index, LexicalProvider, MediaIndex, MediaKind, DEFAULT_MIN_SIM, LEXICAL_DIM};
use oat_core::parser::{evaluate_corpus, load_turn_corpus};
use oat_core::search::{load_corpus, SearchIndex};
use oat_core::taskgraph::{load, validate, ValidationReport};
use oat_core::Execution;
use oat_server::{ParserSpec, ServerConfig};

pub use chat::{render_turn, run_chat, ChatOptions};

/// Task assistant: serve the API, compile and check task graphs, search,
/// chat in the terminal and evaluate the utterance parser.
#[derive(Debug, Parser)]
#[command(name = "oat", version, propagate_version = true)]
pub struct Cli {
    /// Run batch work on one thread instead of the rayon pool.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Start the HTTP API.
    Serve {
        #[arg(long, env = "OAT_PORT", default_value_t = oat_server::DEFAULT_PORT)]
        port: u16,
        #[arg(long, env = "OAT_CORPUS_DIR", default_value = "data/corpus")]
        corpus: PathBuf,
        /// Static files to serve under /ui.
        #[arg(long, env = "OAT_UI_DIR")]
        ui: Option<PathBuf>,
    },
    /// Check task graph files; exits 1 if any is invalid.
    ///
    /// Prints `FILE: valid` or `FILE: invalid` followed by one violation per
    /// line. With --json, prints an array of {file, valid, violations}.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Compile task documents (*.task.json) into task graphs.
    ///
    /// Runs load, synthesize, media augmentation and overlay for each
    /// document and writes <task id>.taskgraph.json. Prints one line per
    /// written or failed file; exits 1 if any document failed.
    Curate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
        /// Image catalog, one {"url","caption"} object per line.
        #[arg(long)]
        images: Option<PathBuf>,
        /// Video catalog, one {"url","title"} object per line.
        #[arg(long)]
        videos: Option<PathBuf>,
        /// Directory of <task id>.overlay.json files.
        #[arg(long)]
        overlays: Option<PathBuf>,
        /// Keep "If ..., ..." sentences as plain steps.
        #[arg(long)]
        no_conditions: bool,
        /// Minimum cosine similarity for a media match.
        #[arg(long, default_value_t = DEFAULT_MIN_SIM)]
        min_sim: f64,
    },
    /// Build the search index over a corpus directory and write a JSON
    /// report of indexed and skipped files.
    Index {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Rank tasks for a query. Prints `rank. score task_id  title`.
    Search {
        #[arg(long)]
        corpus: PathBuf,
        query: String,
        #[arg(long, default_value = "")]
        theme: String,
        #[arg(short, default_value_t = 5)]
        k: usize,
        #[arg(long)]
        json: bool,
    },
    /// Talk to the assistant in the terminal, one utterance per line.
    ///
    /// Each turn prints the reply and a summary of the screen. Lines
    /// starting with `/` are commands: `/wait N` advances the scripted
    /// clock by N seconds (with --scripted-clock), `/state` prints the
    /// session as JSON and `/quit` exits.
    Chat {
        #[arg(long)]
        corpus: PathBuf,
        /// Start a manual clock at this many seconds instead of using wall time.
        #[arg(long)]
        scripted_clock: Option<u64>,
        #[arg(long, default_value = "rules")]
        backend: String,
    },
    /// Score a parser backend on an annotated turn corpus.
    ///
    /// Prints accuracy lines and every mismatch; --json prints the full
    /// report.
    ParseEval {
        #[arg(long)]
        corpus: PathBuf,
        /// `rules` or `remote:<url>`.
        #[arg(long, default_value = "rules")]
        backend: String,
        #[arg(long)]
        json: bool,
    },
}

/// Parse `argv` and run. Returns the process exit code: 0 on success, 1 on
/// runtime failure or invalid input, 2 on bad usage.
pub fn run<I, S>(argv: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(cli, input, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    }
}

fn exec(cli: &Cli) -> Execution {
    if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn dispatch(cli: Cli, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<i32> {
    let exec = exec(&cli);
    match cli.command {
        Command::Serve { port, corpus, ui } => {
            let mut cfg = ServerConfig::from_env().map_err(anyhow::Error::msg)?;
            cfg.port = port;
            cfg.corpus_dir = corpus;
            cfg.ui_dir = ui;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(oat_server::serve(cfg)).map_err(anyhow::Error::msg)?;
            Ok(0)
        }
        Command::Validate { files, json } => validate_files(&files, json, out),
        Command::Curate { input: dir_in, output, images, videos, overlays, no_conditions, min_sim } => {
            let media = if images.is_some() || videos.is_some() {
                Some(media_sources(images.as_deref(), videos.as_deref(), min_sim, exec, out)?)
            } else {
                None
            };
            let opts = CurateOptions {
                synthesis: SynthesisOptions { conditions: !no_conditions },
                media,
                overlays,
                exec,
            };
            let report = curate_dir(&dir_in, &output, &opts)?;
            for f in &report.written {
                let extra = if f.overlay { " (overlay applied)" } else { "" };
                writeln!(out, "wrote {} from {}{extra}", f.output, f.source)?;
            }
            for f in &report.failed {
                writeln!(out, "failed {}: {}", f.file, f.reason)?;
            }
            writeln!(out, "{} written, {} failed", report.written.len(), report.failed.len())?;
            Ok(if report.failed.is_empty() { 0 } else { 1 })
        }
        Command::Index { corpus, report } => {
            let (corpus, build) = load_corpus(&corpus, exec)?;
            let index = SearchIndex::from_corpus(&corpus, exec)?;
            let doc = json!({
                "indexed": build.indexed,
                "skipped": build.skipped,
                "documents": index.len(),
                "avgdl": index.avgdl(),
                "themes": corpus.themes(),
            });
            std::fs::write(&report, serde_json::to_string_pretty(&doc)? + "\n")
                .with_context(|| format!("cannot write {}", report.display()))?;
            writeln!(out, "indexed {} tasks, skipped {}", build.indexed.len(), build.skipped.len())?;
            for s in &build.skipped {
                writeln!(out, "skipped {}: {}", s.file, s.reason)?;
            }
            Ok(0)
        }
        Command::Search { corpus, query, theme, k, json } => {
            let (corpus, _) = load_corpus(&corpus, exec)?;
            let index = SearchIndex::from_corpus(&corpus, exec)?;
            let results = index.query(&query, &theme, k)?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&results)?)?;
            } else if results.is_empty() {
                writeln!(out, "no matches")?;
            } else {
                for (i, r) in results.iter().enumerate() {
                    writeln!(out, "{}. {:.4} {}  {}", i + 1, r.score, r.task_id, r.title)?;
                }
            }
            Ok(0)
        }
        Command::Chat { corpus, scripted_clock, backend } => {
            let parser: ParserSpec = backend.parse().map_err(anyhow::Error::msg)?;
            let opts = ChatOptions { corpus, scripted_clock, parser, exec };
            run_chat(&opts, input, out)?;
            Ok(0)
        }
        Command::ParseEval { corpus, backend, json } => {
            let parser: ParserSpec = backend.parse().map_err(anyhow::Error::msg)?;
            let text = std::fs::read_to_string(&corpus).with_context(|| format!("cannot read {}", corpus.display()))?;
            let turns = load_turn_corpus(&text)?;
            let report = evaluate_corpus(&turns, parser.build().as_ref(), exec)?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            } else {
                writeln!(out, "backend: {}", report.backend)?;
                writeln!(out, "turns: {}", report.total)?;
                writeln!(
                    out,
                    "function accuracy: {:.4} ({}/{})",
                    report.function_accuracy, report.function_matches, report.total
                )?;
                writeln!(out, "full-call accuracy: {:.4} ({}/{})", report.full_accuracy, report.full_matches, report.total)?;
                for m in &report.mismatches {
                    writeln!(out, "  #{} {:?}: expected {} got {}", m.turn, m.utterance, m.gold, m.predicted)?;
                }
            }
            Ok(0)
        }
    }
}

fn validate_one(path: &Path) -> Result<ValidationReport, String> {
    let bytes = std::fs::read(path).map_err(|e| e.to_string())?;
    let graph = load(&bytes).map_err(|e| e.to_string())?;
    Ok(validate(&graph))
}

fn validate_files(files: &[PathBuf], as_json: bool, out: &mut dyn Write) -> Result<i32> {
    let mut all_valid = true;
    let mut rows = Vec::new();
    for path in files {
        let shown = path.display().to_string();
        match validate_one(path) {
            Ok(report) => {
                all_valid &= report.is_valid();
                if as_json {
                    let violations: Vec<String> = report.violations().iter().map(|v| v.to_string()).collect();
                    rows.push(json!({ "file": shown, "valid": report.is_valid(), "violations": violations }));
                } else if report.is_valid() {
                    writeln!(out, "{shown}: valid")?;
                } else {
                    writeln!(out, "{shown}: invalid")?;
                    for v in report.violations() {
                        writeln!(out, "  {v}")?;
                    }
                }
            }
            Err(reason) => {
                all_valid = false;
                if as_json {
                    rows.push(json!({ "file": shown, "valid": false, "violations": [reason] }));
                } else {
                    writeln!(out, "{shown}: invalid")?;
                    writeln!(out, "  {reason}")?;
                }
            }
        }
    }
    if as_json {
        writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?;
    }
    Ok(if all_valid { 0 } else { 1 })
}

fn media_sources(
    images: Option<&Path>,
    videos: Option<&Path>,
    min_sim: f64,
    exec: Execution,
    out: &mut dyn Write,
) -> Result<MediaSources> {
    let provider = Arc::new(LexicalProvider);
    let mut load = |path: Option<&Path>, kind: MediaKind| -> Result<MediaIndex> {
        let Some(path) = path else {
            return Ok(MediaIndex::empty(kind, LEXICAL_DIM));
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let (index, report) = build_media_index(&text, kind, provider.as_ref(), exec);
        for issue in &report.skipped {
            writeln!(out, "skipped {}:{}: {}", path.display(), issue.line, issue.reason)?;
        }
        Ok(index)
    };
    let images = load(images, MediaKind::Image)?;
    let videos = load(videos, MediaKind::Video)?;
    if !(0.0..=1.0).contains(&min_sim) {
        bail!("--min-sim must be between 0 and 1");
    }
    Ok(MediaSources { images, videos, provider, min_sim })
}

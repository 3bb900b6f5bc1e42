//! `automix` command line: `mix`, `analyze` and `normalize`.
//!
//! Exit codes: 0 success, 1 usage error, 2 processing error, 3 manifest
//! error, 4 file I/O error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use crate::audio::{write_wav, BitDepth};
use crate::error::{Error, Result};
use crate::pipeline::{analyze_session, mix, normalize_tracks};
use crate::psycho::PsychoModel;
use crate::report::{
    load_session, slug, summary_rows, write_json, write_psycho_csv, write_summary, write_traces, MaskingReport,
    MixReport,
};
use crate::session::{AnalysisWindow, Session};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PROCESSING: i32 = 2;
pub const EXIT_MANIFEST: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "automix", version, about = "Masking-minimising automatic mixer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimise EQ and compression for every track and render the mix.
    Mix(MixArgs),
    /// Measure masking of the loudness-normalised, unprocessed tracks.
    Analyze(AnalyzeArgs),
    /// Write loudness-normalised copies of every track.
    Normalize(NormalizeArgs),
}

#[derive(Args, Debug)]
struct WindowArgs {
    /// Start of the optimisation analysis window, seconds.
    #[arg(long, requires = "window_length")]
    window_start: Option<f64>,
    /// Length of the optimisation analysis window, seconds.
    #[arg(long)]
    window_length: Option<f64>,
}

#[derive(Args, Debug)]
struct MixArgs {
    #[arg(long)]
    session: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Mix all tracks in one stage even if subgroups are declared.
    #[arg(long)]
    no_subgroups: bool,
    /// Overrides the manifest's PSO seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trace_dir: Option<PathBuf>,
    #[arg(long)]
    stems_dir: Option<PathBuf>,
    /// JSON mix report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Summary table destination (stdout when omitted).
    #[arg(long)]
    summary: Option<PathBuf>,
    /// 16, 24 or 32f.
    #[arg(long, default_value = "24", value_parser = parse_depth)]
    bit_depth: BitDepth,
    #[command(flatten)]
    window: WindowArgs,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long)]
    session: PathBuf,
    #[arg(long)]
    report: PathBuf,
    /// Directory for per-track `frame,sb,esb,thr` CSV dumps.
    #[arg(long)]
    psycho_dump: Option<PathBuf>,
    #[command(flatten)]
    window: WindowArgs,
}

#[derive(Args, Debug)]
struct NormalizeArgs {
    #[arg(long)]
    session: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value = "24", value_parser = parse_depth)]
    bit_depth: BitDepth,
}

fn parse_depth(s: &str) -> std::result::Result<BitDepth, String> {
    BitDepth::parse(s).ok_or_else(|| format!("unsupported bit depth {s:?} (use 16, 24 or 32f)"))
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Manifest { .. } => EXIT_MANIFEST,
        Error::Unreadable { .. }
        | Error::UnsupportedEncoding { .. }
        | Error::UnsupportedSampleRateFile { .. }
        | Error::Unwritable { .. }
        | Error::Io { .. } => EXIT_IO,
        _ => EXIT_PROCESSING,
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    configure_threads();
    let result = match cli.command {
        Command::Mix(a) => run_mix(a),
        Command::Analyze(a) => run_analyze(a),
        Command::Normalize(a) => run_normalize(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("automix: {e}");
            exit_code(&e)
        }
    }
}

fn configure_threads() {
    let Ok(v) = std::env::var("AUTOMIX_THREADS") else { return };
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
                warn!("thread pool already initialised; AUTOMIX_THREADS ignored");
            }
        }
        _ => warn!("ignoring AUTOMIX_THREADS={v:?}"),
    }
}

fn apply_window(session: &mut Session, w: &WindowArgs) -> Result<()> {
    if let Some(length_s) = w.window_length {
        let win = AnalysisWindow {
            start_s: w.window_start.unwrap_or(0.0),
            length_s,
        };
        win.validate()?;
        session.engine_config.analysis_window = Some(win);
    }
    Ok(())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn run_mix(a: MixArgs) -> Result<()> {
    let mut session = load_session(&a.session)?;
    if let Some(seed) = a.seed {
        session.engine_config.pso.rng_seed = seed;
    }
    apply_window(&mut session, &a.window)?;
    let seed = session.engine_config.pso.rng_seed;
    let result = mix(&session, !a.no_subgroups)?;

    let written = write_wav(&result.final_mix, &a.out, a.bit_depth)?;
    if written.clipped > 0 {
        warn!("{} samples clipped in {}", written.clipped, a.out.display());
    }
    info!("wrote {}", a.out.display());
    if let Some(dir) = &a.stems_dir {
        create_dir(dir)?;
        for (name, stem) in &result.stems {
            write_wav(stem, dir.join(format!("{}.wav", slug(name))), a.bit_depth)?;
        }
    }
    if let Some(dir) = &a.trace_dir {
        write_traces(&result, dir)?;
    }
    if let Some(path) = &a.report {
        write_json(&MixReport::new(&result, seed, written.clipped), path)?;
    }
    let rows = summary_rows(&result);
    let io_err = |path: PathBuf| move |source| Error::Io { path, source };
    match &a.summary {
        Some(path) => {
            let file = fs::File::create(path).map_err(io_err(path.clone()))?;
            write_summary(&rows, file).map_err(io_err(path.clone()))
        }
        None => write_summary(&rows, std::io::stdout().lock()).map_err(io_err("<stdout>".into())),
    }
}

fn run_analyze(a: AnalyzeArgs) -> Result<()> {
    let mut session = load_session(&a.session)?;
    apply_window(&mut session, &a.window)?;
    let result = analyze_session(&session)?;
    let ids: Vec<String> = session.tracks.iter().map(|t| t.id.clone()).collect();
    write_json(&MaskingReport::new(&ids, &result), &a.report)?;
    if let Some(dir) = &a.psycho_dump {
        create_dir(dir)?;
        let (clips, _) = normalize_tracks(&session)?;
        let model = PsychoModel::shared(session.sample_rate())?;
        for (id, clip) in ids.iter().zip(&clips) {
            let path = dir.join(format!("{}.csv", slug(id)));
            let file = fs::File::create(&path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            write_psycho_csv(&model.analyze(clip)?, file)?;
        }
    }
    Ok(())
}

fn run_normalize(a: NormalizeArgs) -> Result<()> {
    let session = load_session(&a.session)?;
    let (clips, notes) = normalize_tracks(&session)?;
    create_dir(&a.out_dir)?;
    for ((track, clip), note) in session.tracks.iter().zip(&clips).zip(&notes) {
        let path = a.out_dir.join(format!("{}.wav", slug(&track.id)));
        write_wav(clip, &path, a.bit_depth)?;
        match note.gain_db {
            Some(g) => println!("{}  {:+.1} dB -> {:.1} LUFS", track.id, g, note.target_lufs),
            None => println!("{}  unmeasurable, copied unchanged", track.id),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors() {
        assert_eq!(run(["automix"]), EXIT_USAGE);
        assert_eq!(run(["automix", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["automix", "mix", "--session", "s.json"]), EXIT_USAGE);
        assert_eq!(
            run(["automix", "mix", "--session", "s.json", "--out", "m.wav", "--bit-depth", "12"]),
            EXIT_USAGE
        );
        assert_eq!(run(["automix", "--help"]), EXIT_OK);
    }

    #[test]
    fn missing_manifest_is_io_error() {
        assert_eq!(
            run(["automix", "analyze", "--session", "/nonexistent/s.json", "--report", "r.json"]),
            EXIT_IO
        );
    }
}

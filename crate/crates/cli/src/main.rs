//! `slax`: the composer's tool for .slax containers.
//!
//! Exit status is 0 on success, 1 when the input is invalid (bad spec,
//! failed validation, undecodable container, rejected action) and 2 on I/O
//! failures.

mod report;

use std::fs;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

use slax_core::container;
use slax_core::render::render;
use slax_core::script::RenderScript;
use slax_core::session::lint_crossed_constraints;
use slax_core::wav::PcmBuffer;
use slax_core::{validate_piece, Piece};

use report::{Failure, Output};

#[derive(Parser)]
#[command(
    name = "slax",
    version,
    about = "Build and play interactive multi-stem pieces"
)]
struct Cli {
    /// Print one machine-readable JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a container from an author spec (manifest fields plus `stems`).
    Build {
        spec: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Decode, validate and lint a container.
    Check { file: PathBuf },
    /// Print a container's manifest.
    Inspect { file: PathBuf },
    /// Replay a script of listener actions and write the mixdown.
    Render {
        file: PathBuf,
        script: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Host a container over HTTP and WebSocket.
    Serve {
        file: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
    },
}

/// Manifest fields plus stem paths, resolved against the spec's directory.
#[derive(Deserialize)]
struct AuthorSpec {
    #[serde(flatten)]
    piece: Piece,
    stems: Vec<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = Output::new(cli.json);
    let result = match cli.command {
        Command::Build { spec, out: dest } => build(&mut out, &spec, &dest),
        Command::Check { file } => check(&mut out, &file),
        Command::Inspect { file } => inspect(&mut out, &file),
        Command::Render {
            file,
            script,
            out: dest,
        } => render_cmd(&mut out, &file, &script, &dest),
        Command::Serve { file, port, bind } => serve(&file, SocketAddr::new(bind, port)),
    };
    match result {
        Ok(()) => {
            out.finish(None);
            ExitCode::SUCCESS
        }
        Err(failure) => {
            let status = failure.status();
            out.finish(Some(failure));
            ExitCode::from(status)
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::io(path, &e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::io(path, &e))
}

fn open(path: &Path) -> Result<(Piece, Vec<Vec<u8>>), Failure> {
    container::decode(&read(path)?).map_err(Failure::container)
}

/// Validation warnings and lint findings for a piece already known valid.
fn report_warnings(out: &mut Output, piece: &Piece) {
    out.warnings(&validate_piece(piece).warnings);
    out.lint(&lint_crossed_constraints(piece));
}

fn build(out: &mut Output, spec_path: &Path, dest: &Path) -> Result<(), Failure> {
    let text = read(spec_path)?;
    let spec: AuthorSpec = serde_json::from_slice(&text)
        .map_err(|e| Failure::invalid("SPEC_SYNTAX", format!("{}: {e}", spec_path.display())))?;
    let report = validate_piece(&spec.piece);
    if !report.is_ok() {
        return Err(Failure::report(report));
    }
    let base = spec_path.parent().unwrap_or(Path::new("."));
    let audio = spec
        .stems
        .iter()
        .map(|p| read(&base.join(p)))
        .collect::<Result<Vec<_>, _>>()?;
    let bytes = container::encode(&spec.piece, &audio).map_err(Failure::container)?;
    write(dest, &bytes)?;
    report_warnings(out, &spec.piece);
    out.field("output", json!(dest.display().to_string()));
    out.field("bytes", json!(bytes.len()));
    out.line(format!(
        "wrote {} ({} tracks, {} bytes)",
        dest.display(),
        spec.piece.tracks.len(),
        bytes.len()
    ));
    Ok(())
}

fn check(out: &mut Output, file: &Path) -> Result<(), Failure> {
    let (piece, _) = open(file)?;
    report_warnings(out, &piece);
    out.line(format!("{}: ok", file.display()));
    Ok(())
}

fn inspect(out: &mut Output, file: &Path) -> Result<(), Failure> {
    let (piece, audio) = open(file)?;
    out.field(
        "manifest",
        serde_json::to_value(&piece).expect("piece serialises"),
    );
    out.line(format!("{} ({} Hz)", piece.title, piece.sample_rate));
    for (i, (t, a)) in piece.tracks.iter().zip(&audio).enumerate() {
        let frames = PcmBuffer::from_wav_bytes(a).map(|b| b.len()).unwrap_or(0);
        out.line(format!(
            "  #{i} {:<16} {} level {} in {}..={}  {frames} frames",
            t.name,
            if t.initial_selected { "on " } else { "off" },
            t.initial_level,
            t.level_min,
            t.level_max
        ));
    }
    out.line(format!(
        "  tree: {}",
        serde_json::to_string(&piece.group_tree).expect("tree serialises")
    ));
    for (i, c) in piece.selection_constraints.iter().enumerate() {
        out.line(format!(
            "  selection[{i}]: {}",
            serde_json::to_string(c).expect("serialises")
        ));
    }
    for (i, c) in piece.mix_constraints.iter().enumerate() {
        out.line(format!(
            "  mix[{i}]: {}",
            serde_json::to_string(c).expect("serialises")
        ));
    }
    Ok(())
}

fn render_cmd(
    out: &mut Output,
    file: &Path,
    script_path: &Path,
    dest: &Path,
) -> Result<(), Failure> {
    let (piece, audio) = open(file)?;
    let text = read(script_path)?;
    let text = String::from_utf8(text)
        .map_err(|_| Failure::invalid("SCRIPT_SYNTAX", "script is not UTF-8".to_string()))?;
    let script = RenderScript::parse(&text).map_err(Failure::script)?;
    let timeline = script.replay(&piece).map_err(Failure::script)?;
    let stems: Vec<PcmBuffer> = audio
        .iter()
        .map(|a| PcmBuffer::from_wav_bytes(a).expect("decode validated every payload"))
        .collect();
    let length = match script.length_frames {
        Some(n) => usize::try_from(n)
            .map_err(|_| Failure::invalid("SCRIPT_SYNTAX", format!("length {n} too large")))?,
        None => stems.iter().map(PcmBuffer::len).max().unwrap_or(0),
    };
    let mixed = render(&piece, &stems, &timeline, length)
        .map_err(|e| Failure::invalid("RENDER", e.to_string()))?;
    write(dest, &mixed.to_wav_bytes())?;
    out.field("output", json!(dest.display().to_string()));
    out.field("frames", json!(length));
    out.field("segments", json!(timeline.entries.len()));
    out.line(format!(
        "wrote {} ({length} frames, {} state segments)",
        dest.display(),
        timeline.entries.len()
    ));
    Ok(())
}

fn serve(file: &Path, addr: SocketAddr) -> Result<(), Failure> {
    let piece = slax_server::LoadedPiece::open(file).map_err(|e| match e {
        slax_server::LoadError::Io { source, .. } => Failure::io(file, &source),
        slax_server::LoadError::Container(e) => Failure::container(e),
    })?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::io(file, &e))?;
    runtime
        .block_on(slax_server::run(addr, Some(piece)))
        .map_err(|e| Failure::io(Path::new(&addr.to_string()), &e))
}

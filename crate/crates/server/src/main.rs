use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use slax_server::LoadedPiece;

/// Host a .slax piece for interactive listening.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// Container to serve. Without it every piece route answers 503.
    #[arg(long)]
    file: Option<PathBuf>,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    bind: IpAddr,
}

#[tokio::main]
async fn main() -> ExitCode {
    let args = Args::parse();
    let piece = match args.file.as_deref().map(LoadedPiece::open).transpose() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    match slax_server::run(SocketAddr::new(args.bind, args.port), piece).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

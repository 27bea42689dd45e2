use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use clap::Parser;
use tokio::sync::Mutex;

use dl_server::{router, App, Request, Server};

#[derive(Parser)]
#[command(name = "dl-server", about = "Interactive proof server")]
struct Args {
    #[arg(long, default_value = "127.0.0.1:7878")]
    addr: SocketAddr,
    /// Rebuild the sessions from a request log (one JSON request per line).
    #[arg(long)]
    replay: Option<PathBuf>,
    /// Append every request to this file.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args = Args::parse();
    let server = match &args.replay {
        Some(path) => {
            let log = std::fs::read_to_string(path)?
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(serde_json::from_str)
                .collect::<Result<Vec<Request>, _>>()?;
            Server::replay(&log)
        }
        None => Server::new(),
    };
    let sink = match &args.log {
        Some(path) => Some(std::fs::OpenOptions::new().create(true).append(true).open(path)?),
        None => None,
    };
    let listener = tokio::net::TcpListener::bind(args.addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(Mutex::new(App { server, sink })))).await?;
    Ok(())
}

use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use linkplot::{build_registry, initial_state, read_session, render, router};
use linkplot_core::engine::SessionHost;
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "linkplot", version, about = "Linked-view data exploration")]
struct Cli {
    /// Extra directories scanned for `*.plugin.json` manifests.
    #[arg(long = "plugin-dir", global = true)]
    plugin_dirs: Vec<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Host a local session over HTTP.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        #[arg(long, default_value_t = 8750)]
        port: u16,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        session: Option<PathBuf>,
        /// UI bundle served under `/`.
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
    /// Check that a session file loads.
    ValidateSession { file: PathBuf },
    /// Write every plot spec (and molecule SVGs) of a session to a directory.
    Render {
        session: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let registry = build_registry(&cli.plugin_dirs)?;
    match cli.command {
        Command::Serve {
            host,
            port,
            data,
            session,
            static_dir,
        } => {
            let state = initial_state(&registry, data.as_deref(), session.as_deref())?;
            let app = router(Arc::new(SessionHost::new(Arc::new(registry), state)), static_dir);
            if !host.is_loopback() {
                tracing::warn!(%host, "binding a non-loopback address exposes the session to the network");
            }
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async move {
                let addr = SocketAddr::new(host, port);
                let listener = tokio::net::TcpListener::bind(addr)
                    .await
                    .with_context(|| format!("binding {addr}"))?;
                tracing::info!("listening on http://{addr}");
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await?;
                Ok(())
            })
        }
        Command::ValidateSession { file } => {
            let state = read_session(&registry, &file)?;
            println!(
                "ok: {} rows, {} columns, {} plots",
                state.table.row_count(),
                state.table.columns().count(),
                state.plots.len()
            );
            Ok(())
        }
        Command::Render { session, out } => {
            let state = read_session(&registry, &session)?;
            for path in render(&registry, &state, &out)? {
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}

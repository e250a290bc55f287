//! WebSocket front end. Connection tasks only forward text; each named
//! session runs its own loop that owns the [`Server`] and ticks it at 30 Hz.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use anyhow::Context;
use clap::Args;
use futures_util::{SinkExt, StreamExt};
use sparc_core::net::{Server, TICK_HZ};
use sparc_core::session::{ClientId, Phase, Session, SessionHeader};
use sparc_core::Condition;
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::{mpsc, oneshot, watch};
use tokio::task::JoinHandle;
use tokio_tungstenite::tungstenite::handshake::server::{ErrorResponse, Request, Response};
use tokio_tungstenite::tungstenite::http::StatusCode;
use tokio_tungstenite::tungstenite::Message;

use crate::{build_header, PuzzleArgs};

#[derive(Args)]
pub struct ServeArgs {
    #[command(flatten)]
    puzzle: PuzzleArgs,
    #[arg(long, default_value_t = Condition::Sparc)]
    condition: Condition,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// 0 picks a free port; the bound address is printed on startup.
    #[arg(long, default_value_t = 7340)]
    port: u16,
    /// Event log path per session; `{session}` is replaced by the session name.
    #[arg(long, default_value = "sparc-{session}.log")]
    log: String,
}

enum ToSession {
    Open { out: mpsc::UnboundedSender<String>, reply: oneshot::Sender<ClientId> },
    Text(ClientId, String),
    Closed(ClientId),
}

struct Shared {
    header: SessionHeader,
    log: String,
    shutdown: watch::Receiver<bool>,
    sessions: Mutex<HashMap<String, (mpsc::UnboundedSender<ToSession>, JoinHandle<()>)>>,
}

/// Session name from a request path of the form `/session/<name>`.
fn session_name(path: &str) -> Option<&str> {
    let name = path.strip_prefix("/session/")?;
    let ok = !name.is_empty()
        && name.len() <= 64
        && !name.starts_with('.')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    ok.then_some(name)
}

pub fn run(args: ServeArgs) -> anyhow::Result<ExitCode> {
    let header = build_header(args.condition, args.puzzle.load()?)?;
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(serve(args, header))?;
    Ok(ExitCode::SUCCESS)
}

async fn serve(args: ServeArgs, header: SessionHeader) -> anyhow::Result<()> {
    let listener = TcpListener::bind((args.host.as_str(), args.port))
        .await
        .with_context(|| format!("binding {}:{}", args.host, args.port))?;
    let addr = listener.local_addr()?;
    println!("{}", serde_json::json!({ "listening": addr.to_string() }));
    std::io::stdout().flush()?;

    let (stop, shutdown) = watch::channel(false);
    let shared = Arc::new(Shared { header, log: args.log, shutdown, sessions: Mutex::new(HashMap::new()) });
    loop {
        tokio::select! {
            accepted = listener.accept() => {
                let (stream, _) = accepted?;
                tokio::spawn(connection(stream, shared.clone()));
            }
            _ = tokio::signal::ctrl_c() => break,
        }
    }
    let _ = stop.send(true);
    let handles: Vec<JoinHandle<()>> = shared.sessions.lock().unwrap().drain().map(|(_, (_, h))| h).collect();
    for h in handles {
        let _ = h.await;
    }
    Ok(())
}

fn session_handle(shared: &Arc<Shared>, name: &str) -> anyhow::Result<mpsc::UnboundedSender<ToSession>> {
    let mut sessions = shared.sessions.lock().unwrap();
    if let Some((tx, _)) = sessions.get(name) {
        return Ok(tx.clone());
    }
    let path = PathBuf::from(shared.log.replace("{session}", name));
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    let session = Session::new(shared.header.clone())?;
    let (tx, rx) = mpsc::unbounded_channel();
    let handle = tokio::spawn(session_loop(Server::new(session), BufWriter::new(file), rx, shared.shutdown.clone()));
    sessions.insert(name.to_string(), (tx.clone(), handle));
    Ok(tx)
}

async fn connection(stream: TcpStream, shared: Arc<Shared>) {
    let mut name = None;
    let check = |req: &Request, resp: Response| -> Result<Response, ErrorResponse> {
        match session_name(req.uri().path()) {
            Some(n) => {
                name = Some(n.to_string());
                Ok(resp)
            }
            None => {
                let mut err = ErrorResponse::new(Some("expected /session/<name>".into()));
                *err.status_mut() = StatusCode::NOT_FOUND;
                Err(err)
            }
        }
    };
    let Ok(ws) = tokio_tungstenite::accept_hdr_async(stream, check).await else { return };
    let Some(name) = name else { return };
    let session = match session_handle(&shared, &name) {
        Ok(tx) => tx,
        Err(e) => {
            eprintln!("sparc: session {name}: {e:#}");
            return;
        }
    };
    let (out_tx, mut out_rx) = mpsc::unbounded_channel();
    let (reply, id) = oneshot::channel();
    if session.send(ToSession::Open { out: out_tx, reply }).is_err() {
        return;
    }
    let Ok(id) = id.await else { return };

    let (mut sink, mut source) = ws.split();
    let writer = tokio::spawn(async move {
        while let Some(text) = out_rx.recv().await {
            if sink.send(Message::Text(text)).await.is_err() {
                break;
            }
        }
        let _ = sink.close().await;
    });
    while let Some(msg) = source.next().await {
        match msg {
            Ok(Message::Text(text)) => {
                let _ = session.send(ToSession::Text(id, text));
            }
            // not text: let the decoder report it
            Ok(Message::Binary(bytes)) => {
                let _ = session.send(ToSession::Text(id, String::from_utf8_lossy(&bytes).into_owned()));
            }
            Ok(Message::Close(_)) | Err(_) => break,
            Ok(_) => {}
        }
    }
    let _ = session.send(ToSession::Closed(id));
    let _ = writer.await;
}

async fn session_loop(
    mut server: Server,
    mut log: BufWriter<File>,
    mut inbox: mpsc::UnboundedReceiver<ToSession>,
    mut shutdown: watch::Receiver<bool>,
) {
    let start = Instant::now();
    let mut clients: BTreeMap<ClientId, mpsc::UnboundedSender<String>> = BTreeMap::new();
    let mut written = 0;
    let mut reported = false;
    let mut ticker = tokio::time::interval(Duration::from_nanos(1_000_000_000 / TICK_HZ));
    ticker.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
    loop {
        tokio::select! {
            msg = inbox.recv() => match msg {
                Some(ToSession::Open { out, reply }) => {
                    let id = server.connect();
                    clients.insert(id, out);
                    let _ = reply.send(id);
                }
                Some(ToSession::Text(id, text)) => server.receive(id, &text),
                Some(ToSession::Closed(id)) => {
                    server.disconnect(id);
                    clients.remove(&id);
                }
                None => break,
            },
            _ = ticker.tick() => {
                for o in server.tick(start.elapsed().as_millis() as u64) {
                    if let Some(tx) = clients.get(&o.to) {
                        let _ = tx.send(o.text);
                    }
                }
                if !reported && server.session().phase() == Phase::Finished {
                    server.append_report(server.session().metrics());
                    reported = true;
                }
                written = flush_log(&server, &mut log, written);
            }
            _ = shutdown.changed() => break,
        }
    }
    if !reported {
        server.append_report(server.session().metrics());
    }
    flush_log(&server, &mut log, written);
}

fn flush_log(server: &Server, log: &mut BufWriter<File>, from: usize) -> usize {
    let records = server.session().log();
    for r in &records[from..] {
        if let Err(e) = writeln!(log, "{}", r.to_line()) {
            eprintln!("sparc: writing log: {e}");
            break;
        }
    }
    let _ = log.flush();
    records.len()
}

//! Authoritative server loop, independent of any transport.
//!
//! Connections push raw text in with [`Server::receive`]; [`Server::tick`]
//! drains the queue in arrival order, samples eye contact and returns what
//! to send to whom. The socket server and the simulation harness both drive
//! this same type.

use std::collections::{BTreeMap, VecDeque};

use super::protocol::{decode, encode, Body, DecodeError, Envelope, ErrorMsg, Snapshot, Welcome};
use super::transport::Lane;
use crate::session::{AvatarEntry, ClientId, Event, EventRecord, MetricsReport, PieceView, Role, Session, SessionError};

/// Server tick rate.
pub const TICK_HZ: u64 = 30;

/// Clock time of tick `k`.
pub fn tick_time_ms(k: u64) -> u64 {
    k * 1000 / TICK_HZ
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outgoing {
    pub to: ClientId,
    pub lane: Lane,
    pub text: String,
}

enum Inbound {
    Message(Envelope),
    Malformed(DecodeError),
    Closed,
}

#[derive(Debug, Default)]
struct Conn {
    last_seq: Option<u64>,
    joined: bool,
    open: bool,
    out_seq: u64,
}

pub struct Server {
    session: Session,
    conns: BTreeMap<ClientId, Conn>,
    queue: VecDeque<(ClientId, Inbound)>,
    next_id: u32,
    ticks: u64,
    last_tick_ms: Option<u64>,
    broadcast_upto: usize,
}

pub fn quantize_entry(mut e: AvatarEntry) -> AvatarEntry {
    e.head.p = e.head.p.quantized();
    e.left.p = e.left.p.quantized();
    e.right.p = e.right.p.quantized();
    e.refs.left = e.refs.left.map(|v| v.quantized());
    e.refs.right = e.refs.right.map(|v| v.quantized());
    e
}

pub fn quantize_piece(mut v: PieceView) -> PieceView {
    v.p = v.p.quantized();
    v
}

impl Server {
    pub fn new(session: Session) -> Self {
        let broadcast_upto = session.log().len();
        Server {
            session,
            conns: BTreeMap::new(),
            queue: VecDeque::new(),
            next_id: 1,
            ticks: 0,
            last_tick_ms: None,
            broadcast_upto,
        }
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    pub fn into_session(self) -> Session {
        self.session
    }

    /// Ticks run so far.
    pub fn ticks(&self) -> u64 {
        self.ticks
    }

    /// Registers a new connection.
    pub fn connect(&mut self) -> ClientId {
        let id = ClientId(self.next_id);
        self.next_id += 1;
        self.conns.insert(id, Conn { open: true, ..Conn::default() });
        id
    }

    /// Queues one text message from `client`; it is applied on the next tick.
    pub fn receive(&mut self, client: ClientId, text: &str) {
        if !self.conns.get(&client).is_some_and(|c| c.open) {
            return;
        }
        let item = match decode(text) {
            Ok(e) => Inbound::Message(e),
            Err(e) => Inbound::Malformed(e),
        };
        self.queue.push_back((client, item));
    }

    /// Queues the end of a connection. A joined client leaves the session on the next tick.
    pub fn disconnect(&mut self, client: ClientId) {
        if self.conns.get(&client).is_some_and(|c| c.open) {
            self.queue.push_back((client, Inbound::Closed));
        }
    }

    /// Appends a metrics report record to the log.
    pub fn append_report(&mut self, report: MetricsReport) {
        self.session.append_report(report);
        self.broadcast_upto = self.session.log().len();
    }

    fn envelope(&mut self, to: ClientId, now_ms: u64, body: Body) -> Outgoing {
        let conn = self.conns.get_mut(&to).expect("sending to a known connection");
        conn.out_seq += 1;
        let text = encode(&Envelope::new(conn.out_seq, now_ms, body));
        Outgoing { to, lane: Lane::Reliable, text }
    }

    fn error(&mut self, to: ClientId, now_ms: u64, code: &str, msg: String) -> Outgoing {
        self.envelope(to, now_ms, Body::Error(ErrorMsg { code: code.into(), msg }))
    }

    fn session_error(&mut self, to: ClientId, now_ms: u64, e: &SessionError) -> Outgoing {
        self.error(to, now_ms, e.code(), e.to_string())
    }

    fn apply(&mut self, client: ClientId, item: Inbound, now_ms: u64, out: &mut Vec<Outgoing>) {
        let env = match item {
            Inbound::Closed => {
                let conn = self.conns.get_mut(&client).expect("queued by a known connection");
                conn.open = false;
                if std::mem::take(&mut conn.joined) {
                    let _ = self.session.leave(client);
                }
                return;
            }
            Inbound::Malformed(e) => {
                self.session.reject(client, "decode", "malformed");
                out.push(self.error(client, now_ms, "malformed", e.to_string()));
                return;
            }
            Inbound::Message(env) => env,
        };
        if !self.conns[&client].open {
            return;
        }
        let kind = env.type_name();
        if env.body.is_command() {
            let conn = self.conns.get_mut(&client).expect("known connection");
            if conn.last_seq.is_some_and(|s| env.seq <= s) {
                self.session.reject(client, kind, "duplicate_seq");
                return;
            }
            conn.last_seq = Some(env.seq);
        }
        let result = match env.body {
            Body::Hello(h) => match self.session.join(client, &h.name, h.seat, h.role) {
                Ok(a) => {
                    self.conns.get_mut(&client).expect("known connection").joined = true;
                    let welcome = Welcome::new(client, a, self.session.header());
                    out.push(self.envelope(client, now_ms, Body::Welcome(Box::new(welcome))));
                    Ok(())
                }
                Err(e) => Err(e),
            },
            Body::Start => self.session.start(client),
            // poses from a connection that has not joined (or already left) are dropped
            Body::Pose(_) if !self.conns[&client].joined => Ok(()),
            Body::Pose(a) => self.session.update_pose(client, a).map(|_| ()),
            Body::Grab(g) => self.session.grab(client, &g.piece, g.hand),
            Body::Release(r) => self.session.release(client, r.p, r.q).map(|_| ()),
            Body::Bye => {
                let conn = self.conns.get_mut(&client).expect("known connection");
                if std::mem::take(&mut conn.joined) {
                    self.session.leave(client)
                } else {
                    Ok(())
                }
            }
            Body::Welcome(_) | Body::Snapshot(_) | Body::Event(_) | Body::Error(_) => {
                self.session.reject(client, kind, "unexpected_message");
                out.push(self.error(client, now_ms, "unexpected_message", format!("clients do not send `{kind}`")));
                Ok(())
            }
        };
        if let Err(e) = result {
            out.push(self.session_error(client, now_ms, &e));
        }
    }

    fn audience(&self) -> Vec<ClientId> {
        self.conns.iter().filter(|(_, c)| c.open && c.joined).map(|(id, _)| *id).collect()
    }

    /// The snapshot `client` would receive now.
    pub fn snapshot_for(&self, client: ClientId) -> Snapshot {
        let instructor = matches!(self.session.client(client).map(|c| c.role), Some(Role::Instructor(_)));
        Snapshot {
            clock_ms: self.session.state().clock_ms,
            phase: self.session.phase(),
            pieces: self.session.piece_views().into_iter().map(quantize_piece).collect(),
            avatars: self.session.avatar_entries().into_iter().map(quantize_entry).collect(),
            target: if instructor { self.session.target().cloned() } else { None },
        }
    }

    /// Runs one server tick at `now_ms` and returns the messages to send.
    pub fn tick(&mut self, now_ms: u64) -> Vec<Outgoing> {
        let dt = self.last_tick_ms.map_or(0, |t| now_ms.saturating_sub(t));
        self.last_tick_ms = Some(now_ms);
        self.session.set_time(self.ticks, now_ms);
        self.ticks += 1;

        let mut out = Vec::new();
        while let Some((client, item)) = self.queue.pop_front() {
            self.apply(client, item, now_ms, &mut out);
        }

        let audience = self.audience();
        let fresh: Vec<EventRecord> = self.session.log()[self.broadcast_upto..]
            .iter()
            .filter(|r| {
                !matches!(
                    r.event,
                    Event::Session(_) | Event::Pose { .. } | Event::EyeContactSample { .. } | Event::Reject { .. }
                )
            })
            .cloned()
            .collect();
        for rec in fresh {
            for &to in &audience {
                out.push(self.envelope(to, now_ms, Body::Event(Box::new(rec.clone()))));
            }
        }

        self.session.sample_eye_contact(dt);
        self.broadcast_upto = self.session.log().len();

        for to in audience {
            let snap = self.snapshot_for(to);
            out.push(self.envelope(to, now_ms, Body::Snapshot(snap)));
        }
        out
    }
}

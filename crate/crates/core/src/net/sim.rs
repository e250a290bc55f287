//! Single-threaded simulation of a server and its bots on a virtual clock.
//!
//! Each millisecond runs, in order: network deliveries, bot polls, and the
//! server tick when one falls due. Nothing here reads the wall clock.

use serde::Serialize;

use super::bot::{Bot, BotStatus};
use super::script::BotScript;
use super::server::{tick_time_ms, Server};
use super::transport::{Endpoint, SimNetwork, TransportConfig};
use crate::session::{write_log, ClientId, MetricsReport, Phase, Session};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub transport: TransportConfig,
    /// Hard stop on the virtual clock.
    pub max_ms: u64,
    /// How long to keep going after the last scripted action when the puzzle is unfinished.
    pub grace_ms: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { transport: TransportConfig::default(), max_ms: 3_600_000, grace_ms: 5000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BotSummary {
    pub name: String,
    pub client: ClientId,
    pub status: String,
    pub snapshots: u64,
}

#[derive(Debug, Clone)]
pub struct SimOutcome {
    /// The complete event log, report record included.
    pub log: String,
    pub metrics: MetricsReport,
    pub finished: bool,
    /// Every bot's last snapshot agreed on phase and pieces after the final drain.
    pub converged: bool,
    pub end_ms: u64,
    pub bots: Vec<BotSummary>,
    pub sent: u64,
    pub dropped: u64,
}

pub struct Simulation {
    server: Server,
    net: SimNetwork,
    bots: Vec<(ClientId, Bot)>,
    config: SimConfig,
    now: u64,
    next_tick: u64,
}

impl Simulation {
    pub fn new(session: Session, scripts: Vec<BotScript>, config: SimConfig) -> Self {
        let mut server = Server::new(session);
        let bots = scripts.into_iter().map(|s| (server.connect(), Bot::new(s))).collect();
        Simulation { server, net: SimNetwork::new(config.transport), bots, config, now: 0, next_tick: 0 }
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn server(&self) -> &Server {
        &self.server
    }

    pub fn network(&self) -> &SimNetwork {
        &self.net
    }

    pub fn bots(&self) -> impl Iterator<Item = (ClientId, &Bot)> {
        self.bots.iter().map(|(id, b)| (*id, b))
    }

    pub fn bot(&self, client: ClientId) -> Option<&Bot> {
        self.bots.iter().find(|(id, _)| *id == client).map(|(_, b)| b)
    }

    fn deliver(&mut self) {
        for p in self.net.deliver_due(self.now) {
            match (p.from, p.to) {
                (Endpoint::Client(c), Endpoint::Server) => self.server.receive(c, &p.text),
                (_, Endpoint::Client(c)) => {
                    if let Some((_, b)) = self.bots.iter_mut().find(|(id, _)| *id == c) {
                        b.handle(&p.text);
                    }
                }
                (Endpoint::Server, Endpoint::Server) => {}
            }
        }
    }

    fn poll_bots(&mut self) {
        for (id, bot) in &mut self.bots {
            for (lane, text) in bot.poll(self.now) {
                self.net.send(self.now, Endpoint::Client(*id), Endpoint::Server, lane, text);
            }
        }
    }

    fn tick(&mut self) {
        for o in self.server.tick(self.now) {
            self.net.send(self.now, Endpoint::Server, Endpoint::Client(o.to), o.lane, o.text);
        }
        self.next_tick += 1;
    }

    fn skip_missed_ticks(&mut self) {
        while tick_time_ms(self.next_tick) < self.now {
            self.next_tick += 1;
        }
    }

    /// One millisecond of simulated time.
    pub fn step(&mut self) {
        self.deliver();
        self.poll_bots();
        if tick_time_ms(self.next_tick) == self.now {
            self.tick();
        }
        self.now += 1;
    }

    /// Steps until the clock reaches `t`.
    pub fn run_until(&mut self, t: u64) {
        while self.now < t {
            self.step();
        }
    }

    /// Delivers everything in flight without running ticks or bots.
    fn drain(&mut self) {
        while !self.net.is_idle() {
            self.deliver();
            self.now += 1;
        }
    }

    /// Advances to the next tick time and runs it.
    fn settle_tick(&mut self) {
        self.skip_missed_ticks();
        while tick_time_ms(self.next_tick) > self.now {
            self.deliver();
            self.now += 1;
        }
        self.deliver();
        self.tick();
    }

    fn script_end(&self) -> u64 {
        self.bots.iter().map(|(_, b)| b.script().end_ms()).max().unwrap_or(0)
    }

    fn converged(&self) -> bool {
        let server_phase = self.server.session().phase();
        let views: Vec<_> = self
            .bots
            .iter()
            .filter(|(_, b)| b.client().is_some())
            .map(|(_, b)| b.last_snapshot().map(|s| (s.phase, &s.pieces)))
            .collect();
        let Some(Some(first)) = views.first() else { return false };
        first.0 == server_phase && views.iter().all(|v| v.as_ref() == Some(first))
    }

    /// Runs until the puzzle is finished or the scripts run out, then shuts
    /// everything down and appends the metrics report.
    pub fn finish(mut self) -> SimOutcome {
        let stop = (self.script_end() + self.config.grace_ms).min(self.config.max_ms);
        while self.server.session().phase() != Phase::Finished && self.now < stop {
            self.step();
        }
        let finished = self.server.session().phase() == Phase::Finished;

        for (_, b) in &mut self.bots {
            b.quiesce();
        }
        self.drain();
        self.settle_tick();
        self.drain();
        let converged = self.converged();

        for (id, b) in &mut self.bots {
            for (lane, text) in b.leave(self.now) {
                self.net.send(self.now, Endpoint::Client(*id), Endpoint::Server, lane, text);
            }
        }
        self.drain();
        self.settle_tick();
        self.drain();

        let metrics = self.server.session().metrics();
        self.server.append_report(metrics.clone());
        let bots = self
            .bots
            .iter()
            .map(|(id, b)| BotSummary {
                name: b.script().name.clone(),
                client: *id,
                status: match b.status() {
                    BotStatus::Connecting => "connecting".into(),
                    BotStatus::Active => "active".into(),
                    BotStatus::Aborted { code, .. } => format!("aborted: {code}"),
                    BotStatus::Left => "left".into(),
                },
                snapshots: b.snapshots_received(),
            })
            .collect();
        SimOutcome {
            log: write_log(self.server.session().log()),
            metrics,
            finished,
            converged,
            end_ms: self.now,
            bots,
            sent: self.net.sent(),
            dropped: self.net.dropped(),
        }
    }
}

/// Runs a whole simulation.
pub fn simulate(session: Session, scripts: Vec<BotScript>, config: SimConfig) -> SimOutcome {
    Simulation::new(session, scripts, config).finish()
}

//! Deterministic in-process network with two delivery lanes.
//!
//! Every send draws from one seeded ChaCha8 stream. Unreliable sends draw a
//! drop decision first, then every send draws its jitter:
//!
//! * drop: `(next_u64() >> 11) as f64 * 2^-53 < drop_rate`
//! * jitter: `next_u64() % (jitter_ms + 1)`
//!
//! Delivery time is `send_time + latency + jitter`; reliable messages are
//! additionally held back so they never overtake an earlier reliable message
//! on the same channel. Due messages come out ordered by
//! `(delivery_time, send index)`.

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::session::ClientId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lane {
    /// Commands, snapshots and events: never dropped, never reordered.
    Reliable,
    /// Pose streams: may be dropped or overtaken.
    Unreliable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportConfig {
    pub latency_ms: u64,
    pub jitter_ms: u64,
    /// Probability of dropping an unreliable message, in `[0, 1]`.
    pub drop_rate: f64,
    pub seed: u64,
}

impl TransportConfig {
    pub fn ideal(seed: u64) -> Self {
        TransportConfig { latency_ms: 0, jitter_ms: 0, drop_rate: 0.0, seed }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.drop_rate) {
            return Err(format!("drop rate {} outside [0, 1]", self.drop_rate));
        }
        Ok(())
    }
}

impl Default for TransportConfig {
    fn default() -> Self {
        TransportConfig { latency_ms: 40, jitter_ms: 10, drop_rate: 0.01, seed: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Endpoint {
    Server,
    Client(ClientId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Packet {
    pub from: Endpoint,
    pub to: Endpoint,
    pub lane: Lane,
    pub sent_ms: u64,
    pub deliver_ms: u64,
    /// Global send index.
    pub index: u64,
    pub text: String,
}

pub struct SimNetwork {
    config: TransportConfig,
    rng: ChaCha8Rng,
    in_flight: BTreeMap<(u64, u64), Packet>,
    last_reliable: BTreeMap<(Endpoint, Endpoint), u64>,
    sent: u64,
    dropped: u64,
}

/// Uniform draw in `[0, 1)` from the top 53 bits.
pub fn unit_f64(raw: u64) -> f64 {
    (raw >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

impl SimNetwork {
    pub fn new(config: TransportConfig) -> Self {
        SimNetwork {
            config,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            in_flight: BTreeMap::new(),
            last_reliable: BTreeMap::new(),
            sent: 0,
            dropped: 0,
        }
    }

    pub fn config(&self) -> &TransportConfig {
        &self.config
    }

    /// Queues a message. Returns `None` when it was dropped, else its delivery time.
    pub fn send(&mut self, now_ms: u64, from: Endpoint, to: Endpoint, lane: Lane, text: String) -> Option<u64> {
        let index = self.sent;
        self.sent += 1;
        if lane == Lane::Unreliable && unit_f64(self.rng.next_u64()) < self.config.drop_rate {
            self.dropped += 1;
            return None;
        }
        let jitter = self.rng.next_u64() % (self.config.jitter_ms + 1);
        let mut deliver_ms = now_ms + self.config.latency_ms + jitter;
        if lane == Lane::Reliable {
            let last = self.last_reliable.entry((from, to)).or_insert(0);
            deliver_ms = deliver_ms.max(*last);
            *last = deliver_ms;
        }
        self.in_flight.insert((deliver_ms, index), Packet { from, to, lane, sent_ms: now_ms, deliver_ms, index, text });
        Some(deliver_ms)
    }

    /// Removes and returns every message due at or before `now_ms`, in delivery order.
    pub fn deliver_due(&mut self, now_ms: u64) -> Vec<Packet> {
        let later = self.in_flight.split_off(&(now_ms + 1, 0));
        let due = std::mem::replace(&mut self.in_flight, later);
        due.into_values().collect()
    }

    pub fn in_flight(&self) -> usize {
        self.in_flight.len()
    }

    pub fn is_idle(&self) -> bool {
        self.in_flight.is_empty()
    }

    pub fn sent(&self) -> u64 {
        self.sent
    }

    pub fn dropped(&self) -> u64 {
        self.dropped
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const S: Endpoint = Endpoint::Server;
    const C: Endpoint = Endpoint::Client(ClientId(1));

    #[test]
    fn ideal_network_preserves_send_order() {
        let mut n = SimNetwork::new(TransportConfig::ideal(3));
        for i in 0..20 {
            let lane = if i % 3 == 0 { Lane::Reliable } else { Lane::Unreliable };
            n.send(5, C, S, lane, i.to_string());
        }
        let got: Vec<String> = n.deliver_due(5).into_iter().map(|p| p.text).collect();
        assert_eq!(got, (0..20).map(|i| i.to_string()).collect::<Vec<_>>());
    }

    #[test]
    fn full_drop_spares_commands() {
        let mut n = SimNetwork::new(TransportConfig { latency_ms: 10, jitter_ms: 30, drop_rate: 1.0, seed: 9 });
        for i in 0..100 {
            n.send(i, C, S, Lane::Unreliable, format!("p{i}"));
            n.send(i, C, S, Lane::Reliable, format!("c{i}"));
        }
        let got: Vec<String> = n.deliver_due(10_000).into_iter().map(|p| p.text).collect();
        assert_eq!(got, (0..100).map(|i| format!("c{i}")).collect::<Vec<_>>());
        assert_eq!(n.dropped(), 100);
    }

    #[test]
    fn nothing_arrives_early() {
        let mut n = SimNetwork::new(TransportConfig { latency_ms: 40, jitter_ms: 0, drop_rate: 0.0, seed: 1 });
        n.send(0, C, S, Lane::Reliable, "x".into());
        assert!(n.deliver_due(39).is_empty());
        assert_eq!(n.deliver_due(40).len(), 1);
        assert!(n.is_idle());
    }
}

//! Append-only event log.
//!
//! One JSON object per line: `{"tick":..,"clock_ms":..,"kind":..,"payload":{..}}`.

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use super::{AvatarState, ClientId, MetricsReport, Role};
use crate::geometry::{Condition, Handedness, Quat, SeatIndex, TableFrame, Vec3};
use crate::puzzle::{PieceSet, PuzzleGeometry, ReleaseOutcome, SolutionSequence};

/// Everything needed to rebuild a session from scratch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub condition: Condition,
    pub table: TableFrame,
    pub geometry: PuzzleGeometry,
    pub pieces: PieceSet,
    pub solution: SolutionSequence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Event {
    Session(SessionHeader),
    Join { client: ClientId, name: String, seat: SeatIndex, role: Role },
    Start { client: ClientId },
    /// Avatar as the client sent it (its displayed frame).
    Pose { client: ClientId, avatar: AvatarState },
    TriggerOn { client: ClientId, hand: Handedness, reference: Vec3 },
    TriggerOff { client: ClientId, hand: Handedness },
    Grab { client: ClientId, piece: String, hand: Handedness },
    /// Release pose as the client sent it.
    Release { client: ClientId, piece: String, hand: Handedness, p: Vec3, q: Quat, outcome: ReleaseOutcome },
    EyeContactSample { dt_ms: u64, hits: Vec<(ClientId, ClientId)> },
    Finish { total_time_ms: u64 },
    Leave { client: ClientId },
    Reject { client: ClientId, command: String, code: String },
    Report(MetricsReport),
}

impl Event {
    pub fn kind(&self) -> &'static str {
        match self {
            Event::Session(_) => "session",
            Event::Join { .. } => "join",
            Event::Start { .. } => "start",
            Event::Pose { .. } => "pose",
            Event::TriggerOn { .. } => "trigger_on",
            Event::TriggerOff { .. } => "trigger_off",
            Event::Grab { .. } => "grab",
            Event::Release { .. } => "release",
            Event::EyeContactSample { .. } => "eye_contact_sample",
            Event::Finish { .. } => "finish",
            Event::Leave { .. } => "leave",
            Event::Reject { .. } => "reject",
            Event::Report(_) => "report",
        }
    }

    /// Events the session computes itself rather than receives as input.
    pub fn is_derived(&self) -> bool {
        matches!(self, Event::TriggerOn { .. } | Event::TriggerOff { .. } | Event::Finish { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventRecord {
    pub tick: u64,
    pub clock_ms: u64,
    #[serde(flatten)]
    pub event: Event,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord<'a> {
    tick: u64,
    clock_ms: u64,
    kind: String,
    #[serde(borrow)]
    payload: &'a RawValue,
}

// Decoded in two steps so the payload is parsed directly rather than through
// serde's buffered flatten path, which loses integer map keys.
impl<'de> Deserialize<'de> for EventRecord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawRecord::deserialize(d)?;
        let kind = serde_json::to_string(&raw.kind).map_err(serde::de::Error::custom)?;
        let joined = format!("{{\"kind\":{kind},\"payload\":{}}}", raw.payload.get());
        let event = serde_json::from_str(&joined).map_err(serde::de::Error::custom)?;
        Ok(EventRecord { tick: raw.tick, clock_ms: raw.clock_ms, event })
    }
}

impl EventRecord {
    /// One log line without the trailing newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("event records always serialize")
    }

    pub fn from_line(line: &str) -> Result<EventRecord, serde_json::Error> {
        serde_json::from_str(line)
    }
}

/// Serializes records as newline-terminated lines.
pub fn write_log(records: &[EventRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.to_line());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_layout() {
        let r = EventRecord { tick: 3, clock_ms: 100, event: Event::Start { client: ClientId(1) } };
        assert_eq!(r.to_line(), r#"{"tick":3,"clock_ms":100,"kind":"start","payload":{"client":1}}"#);
        assert_eq!(EventRecord::from_line(&r.to_line()).unwrap(), r);
    }

    #[test]
    fn floats_round_trip_exactly() {
        let r = EventRecord {
            tick: 1,
            clock_ms: 2,
            event: Event::TriggerOn {
                client: ClientId(4),
                hand: Handedness::Left,
                reference: Vec3::new(0.1 + 0.2, -1.0 / 3.0, 1e-300),
            },
        };
        assert_eq!(EventRecord::from_line(&r.to_line()).unwrap(), r);
    }
}

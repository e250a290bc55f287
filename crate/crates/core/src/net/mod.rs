//! Networking: the JSON wire protocol, the authoritative server loop, a
//! deterministic simulated transport, scripted bot clients and the
//! simulation harness that ties them together on a virtual clock.

mod bot;
mod fixtures;
mod protocol;
mod script;
mod server;
mod sim;
mod transport;

pub use bot::{Bot, BotStatus, MOVE_MS, POSE_INTERVAL_MS};
pub use fixtures::{mapping_fixtures, MappingFixture};
pub use protocol::{
    decode, encode, Body, DecodeError, Envelope, ErrorMsg, Grab, Hello, Release, Snapshot, TableInfo, Welcome,
};
pub use script::{
    default_scripts, parse_script, Action, Aim, BotScript, Gaze, ReleaseAt, ScriptError, TimedAction,
    INSTRUCTOR_SEATS,
};
pub use server::{quantize_entry, quantize_piece, tick_time_ms, Outgoing, Server, TICK_HZ};
pub use sim::{simulate, BotSummary, SimConfig, SimOutcome, Simulation};
pub use transport::{unit_f64, Endpoint, Lane, Packet, SimNetwork, TransportConfig};

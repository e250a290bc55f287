//! Shared-perspective collaboration around a virtual table.
//!
//! The crate holds everything a session needs: frame math for remapping
//! pointing gestures between seats ([`geometry`]), the 4×4×4 polycube
//! assembly task ([`puzzle`]), the authoritative state machine with its
//! event log and metrics ([`session`]), and the wire protocol, server loop,
//! simulated network and scripted bots ([`net`]).

pub mod geometry;
pub mod net;
pub mod puzzle;
pub mod session;

pub use geometry::{Condition, Handedness, Quat, SeatIndex, TableFrame, Vec3};

//! Authoritative collaboration state: seats and roles, avatar streaming,
//! distortion triggers, the grab/release lifecycle, the event log and the
//! task metrics.
//!
//! The state machine is single-threaded. Callers stamp logical time with
//! [`Session::set_time`] and then apply commands in arrival order; every
//! accepted command and every refusal is appended to the log, which
//! [`replay`] turns back into the same state.

mod event;
mod metrics;
mod render;
mod replay;
mod state;
mod types;

pub use event::{write_log, Event, EventRecord, SessionHeader};
pub use metrics::MetricsReport;
pub use render::{
    distortion_trigger, reference_point, render_model, shoulder_anchor, RenderModel, RenderedAvatar, RenderedHand,
    HEAD_RADIUS, SHOULDER_DROP, SHOULDER_LATERAL,
};
pub use replay::{replay, ReplayError, ReplayOutcome};
pub use state::{default_avatar, ClientInfo, PieceState, Session, SessionState};
pub use types::{
    AvatarEntry, AvatarState, ClientId, HandRefs, HandState, Holder, Phase, PieceStatus, PieceView, Pose, Role,
    RoleRequest, SeatAssignment,
};

use thiserror::Error;

use crate::geometry::{GeometryError, Handedness, SeatIndex};
use crate::puzzle::PuzzleError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("seat {0} is taken")]
    SeatTaken(SeatIndex),
    #[error("no free seat")]
    NoFreeSeat,
    #[error("the session already has an assembler")]
    DuplicateAssembler,
    #[error("instructor {0} is already present")]
    DuplicateInstructor(u8),
    #[error("the assembler sits at seat 0 and only the assembler does")]
    RoleSeatMismatch,
    #[error("the session has already started")]
    SessionRunning,
    #[error("cannot start: need a lobby with an assembler and at least one instructor")]
    NotReady,
    #[error("unknown client {0}")]
    UnknownClient(ClientId),
    #[error("client {0} has already joined")]
    AlreadyJoined(ClientId),
    #[error("only the assembler can move pieces")]
    NotAssembler,
    #[error("piece {0} is already held")]
    PieceHeld(String),
    #[error("piece {0} is already placed")]
    PieceLocked(String),
    #[error("unknown piece {0}")]
    UnknownPiece(String),
    #[error("{} hand is already holding a piece", .0.as_str())]
    HandBusy(Handedness),
    #[error("not holding a piece")]
    NotHolding,
    #[error("the session is not running")]
    NotRunning,
    #[error("invalid pose: {0}")]
    InvalidPose(String),
    #[error("invalid session setup: {0}")]
    Invalid(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Puzzle(#[from] PuzzleError),
}

impl SessionError {
    /// Stable machine-readable code, used in `error` envelopes and reject records.
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::SeatTaken(_) => "seat_taken",
            SessionError::NoFreeSeat => "no_free_seat",
            SessionError::DuplicateAssembler => "duplicate_assembler",
            SessionError::DuplicateInstructor(_) => "duplicate_instructor",
            SessionError::RoleSeatMismatch => "role_seat_mismatch",
            SessionError::SessionRunning => "session_running",
            SessionError::NotReady => "not_ready",
            SessionError::UnknownClient(_) => "unknown_client",
            SessionError::AlreadyJoined(_) => "already_joined",
            SessionError::NotAssembler => "not_assembler",
            SessionError::PieceHeld(_) => "piece_held",
            SessionError::PieceLocked(_) => "piece_locked",
            SessionError::UnknownPiece(_) => "unknown_piece",
            SessionError::HandBusy(_) => "hand_busy",
            SessionError::NotHolding => "not_holding",
            SessionError::NotRunning => "not_running",
            SessionError::InvalidPose(_) => "invalid_pose",
            SessionError::Invalid(_) => "invalid_session",
            SessionError::Geometry(_) => "geometry",
            SessionError::Puzzle(_) => "puzzle",
        }
    }
}

//! Text wire format: one JSON envelope per message.
//!
//! `{"t":"pose","seq":7,"ts":1234,"body":{...}}`. Bodies reject unknown
//! fields; decode errors carry the byte offset where parsing failed.

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use thiserror::Error;

use crate::geometry::{Condition, SeatIndex, Vec3};
use crate::puzzle::{PieceSet, Placement, PuzzleGeometry};
use crate::session::{
    AvatarEntry, AvatarState, ClientId, EventRecord, Phase, PieceView, Role, RoleRequest, SessionHeader,
};
use crate::{Handedness, Quat, TableFrame};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hello {
    pub name: String,
    pub seat: Option<SeatIndex>,
    pub role: RoleRequest,
}

/// Table and frame geometry a client needs to draw and to convert poses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableInfo {
    pub center: Vec3,
    pub min: Vec3,
    pub max: Vec3,
    pub seat_radius: f64,
    pub assembler_dir: Vec3,
    pub cell_size: f64,
    pub grid_origin: Vec3,
    pub dim: usize,
}

impl TableInfo {
    pub fn new(frame: &TableFrame, geom: &PuzzleGeometry) -> Self {
        TableInfo {
            center: frame.center,
            min: frame.workspace_bounds.min,
            max: frame.workspace_bounds.max,
            seat_radius: frame.seat_radius,
            assembler_dir: frame.assembler_dir,
            cell_size: geom.cell_size,
            grid_origin: geom.grid_origin,
            dim: geom.dim,
        }
    }

    pub fn frame(&self) -> TableFrame {
        TableFrame {
            center: self.center,
            workspace_bounds: crate::geometry::Aabb::new(self.min, self.max),
            seat_radius: self.seat_radius,
            assembler_dir: self.assembler_dir,
        }
    }

    pub fn geometry(&self) -> PuzzleGeometry {
        PuzzleGeometry { dim: self.dim, cell_size: self.cell_size, grid_origin: self.grid_origin }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Welcome {
    pub client: ClientId,
    pub seat: SeatIndex,
    pub role: Role,
    pub condition: Condition,
    pub angle_deg: f64,
    pub piece_set: PieceSet,
    pub table: TableInfo,
}

impl Welcome {
    pub fn new(client: ClientId, a: crate::session::SeatAssignment, header: &SessionHeader) -> Self {
        Welcome {
            client,
            seat: a.seat,
            role: a.role,
            condition: a.condition,
            angle_deg: a.angle_deg,
            piece_set: header.pieces.clone(),
            table: TableInfo::new(&header.table, &header.geometry),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grab {
    pub piece: String,
    pub hand: Handedness,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Release {
    pub p: Vec3,
    pub q: Quat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshot {
    pub clock_ms: u64,
    pub phase: Phase,
    pub pieces: Vec<PieceView>,
    pub avatars: Vec<AvatarEntry>,
    /// Next placement; only sent to instructors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Placement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorMsg {
    pub code: String,
    pub msg: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Empty {}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Hello(Hello),
    Welcome(Box<Welcome>),
    Start,
    Pose(AvatarState),
    Grab(Grab),
    Release(Release),
    Snapshot(Snapshot),
    Event(Box<EventRecord>),
    Error(ErrorMsg),
    Bye,
}

impl Body {
    pub fn type_name(&self) -> &'static str {
        match self {
            Body::Hello(_) => "hello",
            Body::Welcome(_) => "welcome",
            Body::Start => "start",
            Body::Pose(_) => "pose",
            Body::Grab(_) => "grab",
            Body::Release(_) => "release",
            Body::Snapshot(_) => "snapshot",
            Body::Event(_) => "event",
            Body::Error(_) => "error",
            Body::Bye => "bye",
        }
    }

    /// Commands travel on the reliable lane and are checked for sequence order.
    pub fn is_command(&self) -> bool {
        matches!(self, Body::Hello(_) | Body::Start | Body::Grab(_) | Body::Release(_) | Body::Bye)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub seq: u64,
    pub ts: u64,
    pub body: Body,
}

impl Envelope {
    pub fn new(seq: u64, ts: u64, body: Body) -> Self {
        Envelope { seq, ts, body }
    }

    pub fn type_name(&self) -> &'static str {
        self.body.type_name()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("byte {offset}: {reason}")]
pub struct DecodeError {
    pub offset: usize,
    pub reason: String,
}

#[derive(Serialize)]
struct Out<'a, T: Serialize> {
    t: &'a str,
    seq: u64,
    ts: u64,
    body: &'a T,
}

fn write<T: Serialize>(e: &Envelope, body: &T) -> String {
    serde_json::to_string(&Out { t: e.type_name(), seq: e.seq, ts: e.ts, body })
        .expect("wire types always serialize")
}

pub fn encode(e: &Envelope) -> String {
    match &e.body {
        Body::Hello(b) => write(e, b),
        Body::Welcome(b) => write(e, b),
        Body::Start | Body::Bye => write(e, &Empty {}),
        Body::Pose(b) => write(e, b),
        Body::Grab(b) => write(e, b),
        Body::Release(b) => write(e, b),
        Body::Snapshot(b) => write(e, b),
        Body::Event(b) => write(e, b),
        Body::Error(b) => write(e, b),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnvelope<'a> {
    t: String,
    seq: u64,
    ts: u64,
    #[serde(borrow)]
    body: &'a RawValue,
}

/// Byte offset in `text` of serde_json's 1-based line/column position.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

fn body_error(text: &str, body: &str, e: serde_json::Error) -> DecodeError {
    let base = body.as_ptr() as usize - text.as_ptr() as usize;
    DecodeError { offset: base + byte_offset(body, e.line(), e.column()), reason: e.to_string() }
}

fn parse_body<'a, T: Deserialize<'a>>(text: &str, body: &'a RawValue) -> Result<T, DecodeError> {
    serde_json::from_str(body.get()).map_err(|e| body_error(text, body.get(), e))
}

pub fn decode(text: &str) -> Result<Envelope, DecodeError> {
    let raw: RawEnvelope = serde_json::from_str(text)
        .map_err(|e| DecodeError { offset: byte_offset(text, e.line(), e.column()), reason: e.to_string() })?;
    let invalid = |reason: &str| {
        let base = raw.body.get().as_ptr() as usize - text.as_ptr() as usize;
        DecodeError { offset: base, reason: reason.to_string() }
    };
    let body = match raw.t.as_str() {
        "hello" => Body::Hello(parse_body(text, raw.body)?),
        "welcome" => Body::Welcome(Box::new(parse_body(text, raw.body)?)),
        "start" => {
            parse_body::<Empty>(text, raw.body)?;
            Body::Start
        }
        "pose" => {
            let a: AvatarState = parse_body(text, raw.body)?;
            a.validate().map_err(invalid)?;
            Body::Pose(a)
        }
        "grab" => Body::Grab(parse_body(text, raw.body)?),
        "release" => {
            let r: Release = parse_body(text, raw.body)?;
            if !(r.p.is_finite() && r.q.is_finite()) || (r.q.norm() - 1.0).abs() > 1e-6 {
                return Err(invalid("release pose must be finite with a unit quaternion"));
            }
            Body::Release(r)
        }
        "snapshot" => Body::Snapshot(parse_body(text, raw.body)?),
        "event" => Body::Event(Box::new(parse_body(text, raw.body)?)),
        "error" => Body::Error(parse_body(text, raw.body)?),
        "bye" => {
            parse_body::<Empty>(text, raw.body)?;
            Body::Bye
        }
        other => {
            // point at the type string itself
            let at = text.find("\"t\"").unwrap_or(0);
            return Err(DecodeError { offset: at, reason: format!("unknown message type `{other}`") });
        }
    };
    Ok(Envelope { seq: raw.seq, ts: raw.ts, body })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::{HandState, Pose};

    fn pose_env() -> Envelope {
        let hand = |x: f64| HandState {
            p: Vec3::new(x, 0.9, -0.25),
            q: Quat::IDENTITY,
            ray: x > 0.0,
            ray_dir: Vec3::new(0.0, 0.0, -1.0),
            grab: None,
        };
        Envelope::new(
            4,
            1200,
            Body::Pose(AvatarState {
                head: Pose { p: Vec3::new(0.9, 1.2, 0.0), q: Quat::from_yaw_deg(90.0) },
                left: hand(-0.1),
                right: hand(0.1),
                tick: 17,
            }),
        )
    }

    #[test]
    fn pose_round_trip() {
        let e = pose_env();
        let text = encode(&e);
        assert!(text.starts_with(r#"{"t":"pose","seq":4,"ts":1200,"body":{"head":{"p":[0.9,1.2,0.0]"#), "{text}");
        assert_eq!(decode(&text).unwrap(), e);
    }

    #[test]
    fn empty_bodies() {
        let e = Envelope::new(1, 0, Body::Start);
        assert_eq!(encode(&e), r#"{"t":"start","seq":1,"ts":0,"body":{}}"#);
        assert_eq!(decode(&encode(&e)).unwrap(), e);
        assert!(decode(r#"{"t":"bye","seq":1,"ts":0,"body":{"x":1}}"#).is_err());
    }

    #[test]
    fn truncated_message() {
        let text = encode(&pose_env());
        let cut = &text[..text.len() - 7];
        let err = decode(cut).unwrap_err();
        assert!(err.offset <= cut.len() && err.offset > cut.len() - 10, "{err:?} len {}", cut.len());
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = r#"{"t":"grab","seq":1,"ts":0,"body":{"piece":"A","hand":"left","force":3}}"#;
        let err = decode(text).unwrap_err();
        assert!(err.reason.contains("force"), "{err:?}");
        assert!(err.offset >= text.find("force").unwrap(), "{err:?}");
        assert!(decode(r#"{"t":"grab","seq":1,"ts":0,"body":{"piece":"A","hand":"left"},"x":0}"#).is_err());
        assert!(decode(r#"{"t":"warp","seq":1,"ts":0,"body":{}}"#).is_err());
    }

    #[test]
    fn non_unit_ray_rejected() {
        let mut e = pose_env();
        if let Body::Pose(a) = &mut e.body {
            a.right.ray_dir = Vec3::new(0.0, 0.0, -2.0);
        }
        let err = decode(&encode(&e)).unwrap_err();
        assert!(err.reason.contains("ray"), "{err:?}");
    }

    #[test]
    fn offsets_are_bytes() {
        let text = "{\"t\":\"grab\",\n\"seq\":1,\"ts\":0,\"body\":{\"piece\":\"é\",\"hand\":\"middle\"}}";
        let err = decode(text).unwrap_err();
        let at = text.find("middle").unwrap();
        assert!(err.offset >= at && err.offset <= at + 8, "{err:?} vs {at}");
    }
}

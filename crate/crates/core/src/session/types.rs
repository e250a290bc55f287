use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::{Condition, Handedness, Quat, SeatIndex, Vec3};
use crate::puzzle::Orientation;

/// Identifier the server assigns to each connection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClientId(pub u32);

impl fmt::Display for ClientId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Role {
    Assembler,
    /// Instructor number, starting at 1.
    Instructor(u8),
}

impl Role {
    pub fn is_assembler(self) -> bool {
        self == Role::Assembler
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Assembler => f.write_str("assembler"),
            Role::Instructor(n) => write!(f, "instructor{n}"),
        }
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match RoleRequest::from_str(s)? {
            RoleRequest::Assembler => Ok(Role::Assembler),
            RoleRequest::Instructor(Some(n)) => Ok(Role::Instructor(n)),
            RoleRequest::Instructor(None) => Err("instructor role needs a number".into()),
        }
    }
}

impl From<Role> for String {
    fn from(r: Role) -> String {
        r.to_string()
    }
}

impl TryFrom<String> for Role {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Role asked for when joining; a bare `instructor` takes the lowest free number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum RoleRequest {
    Assembler,
    Instructor(Option<u8>),
}

impl fmt::Display for RoleRequest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RoleRequest::Assembler => f.write_str("assembler"),
            RoleRequest::Instructor(None) => f.write_str("instructor"),
            RoleRequest::Instructor(Some(n)) => write!(f, "instructor{n}"),
        }
    }
}

impl FromStr for RoleRequest {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "assembler" {
            return Ok(RoleRequest::Assembler);
        }
        let rest = s.strip_prefix("instructor").ok_or_else(|| format!("unknown role `{s}`"))?;
        if rest.is_empty() {
            return Ok(RoleRequest::Instructor(None));
        }
        match rest.parse::<u8>() {
            Ok(n) if n >= 1 && !rest.starts_with('0') => Ok(RoleRequest::Instructor(Some(n))),
            _ => Err(format!("unknown role `{s}`")),
        }
    }
}

impl From<Role> for RoleRequest {
    fn from(r: Role) -> Self {
        match r {
            Role::Assembler => RoleRequest::Assembler,
            Role::Instructor(n) => RoleRequest::Instructor(Some(n)),
        }
    }
}

impl From<RoleRequest> for String {
    fn from(r: RoleRequest) -> String {
        r.to_string()
    }
}

impl TryFrom<String> for RoleRequest {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pose {
    pub p: Vec3,
    pub q: Quat,
}

impl Pose {
    pub fn is_finite(&self) -> bool {
        self.p.is_finite() && self.q.is_finite()
    }

    /// Unit vector the pose looks along (local `-z`).
    pub fn forward(&self) -> Vec3 {
        self.q.rotate(Vec3::new(0.0, 0.0, -1.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandState {
    pub p: Vec3,
    pub q: Quat,
    pub ray: bool,
    #[serde(rename = "rayDir")]
    pub ray_dir: Vec3,
    pub grab: Option<String>,
}

impl HandState {
    pub fn pose(&self) -> Pose {
        Pose { p: self.p, q: self.q }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AvatarState {
    pub head: Pose,
    pub left: HandState,
    pub right: HandState,
    pub tick: u64,
}

impl AvatarState {
    pub fn hand(&self, h: Handedness) -> &HandState {
        match h {
            Handedness::Left => &self.left,
            Handedness::Right => &self.right,
        }
    }

    pub fn hand_mut(&mut self, h: Handedness) -> &mut HandState {
        match h {
            Handedness::Left => &mut self.left,
            Handedness::Right => &mut self.right,
        }
    }

    /// Finite poses, unit quaternions and unit ray directions on active rays.
    pub fn validate(&self) -> Result<(), &'static str> {
        const TOL: f64 = 1e-6;
        if !self.head.is_finite() {
            return Err("non-finite head pose");
        }
        if (self.head.q.norm() - 1.0).abs() > TOL {
            return Err("head quaternion is not normalized");
        }
        for hand in [&self.left, &self.right] {
            if !(hand.p.is_finite() && hand.q.is_finite() && hand.ray_dir.is_finite()) {
                return Err("non-finite hand pose");
            }
            if (hand.q.norm() - 1.0).abs() > TOL {
                return Err("hand quaternion is not normalized");
            }
            if hand.ray && (hand.ray_dir.norm() - 1.0).abs() > TOL {
                return Err("ray direction is not unit length");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Lobby,
    Running,
    Finished,
}

/// Where a piece currently is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PieceStatus {
    Home,
    Table,
    Held,
    Placed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Holder {
    pub client: ClientId,
    pub hand: Handedness,
}

/// A seat as handed to a joining client.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeatAssignment {
    pub seat: SeatIndex,
    pub role: Role,
    pub angle_deg: f64,
    pub condition: Condition,
}

/// Reference points (canonical frame) of a client's hands whose distortion is active.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandRefs {
    pub left: Option<Vec3>,
    pub right: Option<Vec3>,
}

impl HandRefs {
    pub fn get(&self, h: Handedness) -> Option<Vec3> {
        match h {
            Handedness::Left => self.left,
            Handedness::Right => self.right,
        }
    }

    pub fn set(&mut self, h: Handedness, v: Option<Vec3>) {
        match h {
            Handedness::Left => self.left = v,
            Handedness::Right => self.right = v,
        }
    }

    pub fn any(&self) -> bool {
        self.left.is_some() || self.right.is_some()
    }
}

/// One participant as published in snapshots: head in room coordinates,
/// hands and references in the canonical frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AvatarEntry {
    pub client: ClientId,
    pub name: String,
    pub seat: SeatIndex,
    pub role: Role,
    pub tick: u64,
    pub head: Pose,
    pub left: HandState,
    pub right: HandState,
    #[serde(rename = "ref")]
    pub refs: HandRefs,
}

/// A piece as published in snapshots (canonical frame).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceView {
    pub id: String,
    pub state: PieceStatus,
    pub p: Vec3,
    pub q: Quat,
    pub o: Orientation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holder: Option<Holder>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn role_strings() {
        assert_eq!(Role::Instructor(2).to_string(), "instructor2");
        assert_eq!("assembler".parse::<Role>(), Ok(Role::Assembler));
        assert_eq!("instructor12".parse::<Role>(), Ok(Role::Instructor(12)));
        assert!("instructor0".parse::<Role>().is_err());
        assert!("instructor01".parse::<Role>().is_err());
        assert!("instructor".parse::<Role>().is_err());
        assert_eq!("instructor".parse::<RoleRequest>(), Ok(RoleRequest::Instructor(None)));
        assert!("pilot".parse::<RoleRequest>().is_err());
        assert_eq!(serde_json::to_string(&Role::Instructor(1)).unwrap(), "\"instructor1\"");
    }

    #[test]
    fn hand_wire_names() {
        let h = HandState { p: Vec3::ZERO, q: Quat::IDENTITY, ray: true, ray_dir: Vec3::X, grab: None };
        let s = serde_json::to_string(&h).unwrap();
        assert_eq!(s, r#"{"p":[0.0,0.0,0.0],"q":[0.0,0.0,0.0,1.0],"ray":true,"rayDir":[1.0,0.0,0.0],"grab":null}"#);
    }
}

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Aabb, GeometryError, Vec3};

pub const SEAT_COUNT: usize = 8;
pub const SEAT_STEP_DEG: f64 = 45.0;

/// Experimental condition of a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    /// Life-like baseline: every user sees the table from their own seat.
    Veridical,
    /// Shared perspective with remapped, distorted avatar arms.
    Sparc,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Veridical => "veridical",
            Condition::Sparc => "sparc",
        })
    }
}

impl std::str::FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "veridical" | "v" => Ok(Condition::Veridical),
            "sparc" | "s" => Ok(Condition::Sparc),
            other => Err(format!("unknown condition `{other}` (expected veridical or sparc)")),
        }
    }
}

/// One of the eight positions around the table. Seat 0 belongs to the assembler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct SeatIndex(u8);

impl SeatIndex {
    pub const ASSEMBLER: SeatIndex = SeatIndex(0);

    pub fn new(index: u8) -> Result<Self, GeometryError> {
        if (index as usize) < SEAT_COUNT {
            Ok(SeatIndex(index))
        } else {
            Err(GeometryError::InvalidSeat(index as i64))
        }
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = SeatIndex> {
        (0..SEAT_COUNT as u8).map(SeatIndex)
    }
}

impl TryFrom<u8> for SeatIndex {
    type Error = GeometryError;
    fn try_from(v: u8) -> Result<Self, Self::Error> {
        SeatIndex::new(v)
    }
}

impl From<SeatIndex> for u8 {
    fn from(s: SeatIndex) -> u8 {
        s.0
    }
}

impl fmt::Display for SeatIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Rotation about the vertical axis, counterclockwise in top view.
/// The angle is kept in `[0, 360)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationY {
    angle_deg: f64,
}

impl RotationY {
    pub const IDENTITY: RotationY = RotationY { angle_deg: 0.0 };

    pub fn from_degrees(deg: f64) -> Self {
        let mut a = deg.rem_euclid(360.0);
        // rem_euclid can round up to exactly 360 for tiny negative inputs
        if a >= 360.0 {
            a = 0.0;
        }
        RotationY { angle_deg: a }
    }

    pub fn degrees(self) -> f64 {
        self.angle_deg
    }

    pub fn inverse(self) -> Self {
        RotationY::from_degrees(-self.angle_deg)
    }

    pub fn then(self, o: RotationY) -> Self {
        RotationY::from_degrees(self.angle_deg + o.angle_deg)
    }

    /// Signed difference `other - self` folded into `(-180, 180]`.
    pub fn shortest_diff(self, other: RotationY) -> f64 {
        let d = (other.angle_deg - self.angle_deg).rem_euclid(360.0);
        if d > 180.0 {
            d - 360.0
        } else {
            d
        }
    }

    fn sin_cos(self) -> (f64, f64) {
        // exact values on the quarter turns keep half-turn symmetry bit-exact
        let a = self.angle_deg;
        if a == 0.0 {
            (0.0, 1.0)
        } else if a == 90.0 {
            (1.0, 0.0)
        } else if a == 180.0 {
            (0.0, -1.0)
        } else if a == 270.0 {
            (-1.0, 0.0)
        } else {
            a.to_radians().sin_cos()
        }
    }

    /// Rotates a vector about the `y` axis through the origin. `y` is copied unchanged.
    pub fn rotate(self, v: Vec3) -> Vec3 {
        let (s, c) = self.sin_cos();
        Vec3::new(c * v.x + s * v.z, v.y, -s * v.x + c * v.z)
    }

    /// Rotates a point about the vertical line through `pivot`.
    pub fn rotate_about(self, p: Vec3, pivot: Vec3) -> Vec3 {
        let r = self.rotate(p - pivot);
        Vec3::new(pivot.x + r.x, p.y, pivot.z + r.z)
    }

    pub fn to_quat(self) -> super::Quat {
        super::Quat::from_yaw_deg(self.angle_deg)
    }
}

/// Table geometry shared by every participant, expressed in the canonical frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableFrame {
    pub center: Vec3,
    pub workspace_bounds: Aabb,
    pub seat_radius: f64,
    pub assembler_dir: Vec3,
}

impl Default for TableFrame {
    fn default() -> Self {
        let center = Vec3::new(0.0, 0.75, 0.0);
        TableFrame {
            center,
            workspace_bounds: Aabb::new(Vec3::new(-0.6, 0.75, -0.6), Vec3::new(0.6, 1.15, 0.6)),
            seat_radius: 0.9,
            assembler_dir: Vec3::X,
        }
    }
}

impl TableFrame {
    pub fn new(
        center: Vec3,
        workspace_bounds: Aabb,
        seat_radius: f64,
        assembler_dir: Vec3,
    ) -> Result<Self, GeometryError> {
        let frame = TableFrame { center, workspace_bounds, seat_radius, assembler_dir };
        frame.validate()?;
        Ok(frame)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let b = &self.workspace_bounds;
        if !(self.center.is_finite() && b.min.is_finite() && b.max.is_finite()) {
            return Err(GeometryError::InvalidFrame("non-finite coordinate"));
        }
        if b.min.x > b.max.x || b.min.y > b.max.y || b.min.z > b.max.z {
            return Err(GeometryError::InvalidFrame("bounds min exceeds max"));
        }
        if !(b.min.x <= self.center.x
            && self.center.x <= b.max.x
            && b.min.z <= self.center.z
            && self.center.z <= b.max.z)
        {
            return Err(GeometryError::InvalidFrame("center lies outside workspace bounds"));
        }
        let half = (b.max.x - b.min.x).max(b.max.z - b.min.z) * 0.5;
        if !(self.seat_radius > half) {
            return Err(GeometryError::InvalidFrame("seats must lie outside the workspace"));
        }
        if self.assembler_dir.y != 0.0 || (self.assembler_dir.norm() - 1.0).abs() > 1e-9 {
            return Err(GeometryError::InvalidFrame("assembler direction must be horizontal unit"));
        }
        Ok(())
    }

    /// Unit horizontal vector from the table center toward `seat`.
    pub fn seat_direction(&self, seat: SeatIndex) -> Vec3 {
        seat_angle(seat).rotate(self.assembler_dir)
    }

    /// Point on the table plane (height of `center`) at the seat.
    pub fn seat_position(&self, seat: SeatIndex) -> Vec3 {
        self.center + self.seat_direction(seat) * self.seat_radius
    }
}

/// Angle of a seat, measured from the assembler's seat.
pub fn seat_angle(seat: SeatIndex) -> RotationY {
    RotationY::from_degrees(seat.index() as f64 * SEAT_STEP_DEG)
}

/// A rotation about the vertical axis through a pivot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: RotationY,
    pub pivot: Vec3,
}

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform { rotation: RotationY::IDENTITY, pivot: Vec3::ZERO }
    }

    pub fn is_identity(&self) -> bool {
        self.rotation.degrees() == 0.0
    }

    pub fn apply(&self, p: Vec3) -> Vec3 {
        if self.is_identity() {
            return p;
        }
        self.rotation.rotate_about(p, self.pivot)
    }

    pub fn apply_inverse(&self, p: Vec3) -> Vec3 {
        if self.is_identity() {
            return p;
        }
        self.rotation.inverse().rotate_about(p, self.pivot)
    }

    pub fn apply_dir(&self, d: Vec3) -> Vec3 {
        self.rotation.rotate(d)
    }

    pub fn apply_inverse_dir(&self, d: Vec3) -> Vec3 {
        self.rotation.inverse().rotate(d)
    }
}

/// Transform from the canonical frame into what `seat` displays.
pub fn display_transform(seat: SeatIndex, condition: Condition, frame: &TableFrame) -> RigidTransform {
    match condition {
        Condition::Veridical => RigidTransform::identity(),
        Condition::Sparc => RigidTransform { rotation: seat_angle(seat), pivot: frame.center },
    }
}

pub fn to_canonical(p: Vec3, seat: SeatIndex, condition: Condition, frame: &TableFrame) -> Vec3 {
    display_transform(seat, condition, frame).apply_inverse(p)
}

pub fn from_canonical(q: Vec3, seat: SeatIndex, condition: Condition, frame: &TableFrame) -> Vec3 {
    display_transform(seat, condition, frame).apply(q)
}

pub fn to_canonical_dir(d: Vec3, seat: SeatIndex, condition: Condition, frame: &TableFrame) -> Vec3 {
    display_transform(seat, condition, frame).apply_inverse_dir(d)
}

pub fn from_canonical_dir(d: Vec3, seat: SeatIndex, condition: Condition, frame: &TableFrame) -> Vec3 {
    display_transform(seat, condition, frame).apply_dir(d)
}

/// Maps a point the remote user indicated in their displayed frame into the
/// local user's displayed frame.
pub fn map_reference(
    p: Vec3,
    ru_seat: SeatIndex,
    lu_seat: SeatIndex,
    condition: Condition,
    frame: &TableFrame,
) -> Vec3 {
    match condition {
        Condition::Veridical => p,
        Condition::Sparc => {
            let delta = seat_angle(ru_seat).inverse().then(seat_angle(lu_seat));
            RigidTransform { rotation: delta, pivot: frame.center }.apply(p)
        }
    }
}

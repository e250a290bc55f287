//! Frame conventions and transform math for a shared table.
//!
//! All coordinates are meters with `y` pointing up. Seat angles are measured
//! counterclockwise when the table is viewed from above, starting at the
//! assembler's seat. A rotation by `+θ` about `+y` (right-handed) is exactly
//! that counterclockwise turn.

mod arm;
mod frame;
mod ray;
mod vector;

pub use arm::{arm_spline, mirror_arm, Handedness, SplineArm, DEFAULT_SPLINE_SAMPLES};
pub use frame::{
    display_transform, from_canonical, from_canonical_dir, map_reference, seat_angle,
    to_canonical, to_canonical_dir, Condition, RigidTransform, RotationY, SeatIndex, TableFrame,
    SEAT_COUNT, SEAT_STEP_DEG,
};
pub use ray::{point_in_box, ray_box, ray_sphere, Aabb, Ray};
pub use vector::{Quat, Vec3};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("seat index {0} is out of range 0..8")]
    InvalidSeat(i64),
    #[error("shoulder and hand coincide")]
    DegenerateArm,
    #[error("a spline needs at least two samples, got {0}")]
    TooFewSamples(usize),
    #[error("direction vector has zero length")]
    ZeroDirection,
    #[error("invalid table frame: {0}")]
    InvalidFrame(&'static str),
}

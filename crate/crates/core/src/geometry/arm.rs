use serde::{Deserialize, Serialize};

use super::{GeometryError, Vec3};

pub const DEFAULT_SPLINE_SAMPLES: usize = 16;

/// Vertical lift of the interior control points, as a fraction of arm length.
const LIFT_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Handedness {
    Left,
    Right,
}

impl Handedness {
    pub const BOTH: [Handedness; 2] = [Handedness::Left, Handedness::Right];

    pub fn as_str(self) -> &'static str {
        match self {
            Handedness::Left => "left",
            Handedness::Right => "right",
        }
    }
}

impl std::str::FromStr for Handedness {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "left" => Ok(Handedness::Left),
            "right" => Ok(Handedness::Right),
            other => Err(format!("unknown hand `{other}`")),
        }
    }
}

/// The arm that renders a remote hand once its avatar is mirrored.
pub fn mirror_arm(hand: Handedness) -> Handedness {
    match hand {
        Handedness::Left => Handedness::Right,
        Handedness::Right => Handedness::Left,
    }
}

/// A stretched arm drawn from a shoulder to a remapped hand position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineArm {
    pub shoulder: Vec3,
    pub hand: Vec3,
    pub samples: Vec<Vec3>,
}

/// Samples a cubic Bézier from `shoulder` to `hand` whose inner control points
/// sit at a quarter and three quarters of the chord, lifted by a tenth of its length.
pub fn arm_spline(shoulder: Vec3, hand: Vec3, sample_count: usize) -> Result<SplineArm, GeometryError> {
    if sample_count < 2 {
        return Err(GeometryError::TooFewSamples(sample_count));
    }
    if shoulder == hand {
        return Err(GeometryError::DegenerateArm);
    }
    let chord = hand - shoulder;
    let lift = Vec3::Y * (LIFT_FRACTION * chord.norm());
    let p0 = shoulder;
    let p1 = shoulder + chord * 0.25 + lift;
    let p2 = shoulder + chord * 0.75 + lift;
    let p3 = hand;

    let last = sample_count - 1;
    let samples = (0..sample_count)
        .map(|i| match i {
            0 => shoulder,
            i if i == last => hand,
            i => {
                let t = i as f64 / last as f64;
                let u = 1.0 - t;
                p0 * (u * u * u) + p1 * (3.0 * u * u * t) + p2 * (3.0 * u * t * t) + p3 * (t * t * t)
            }
        })
        .collect();
    Ok(SplineArm { shoulder, hand, samples })
}

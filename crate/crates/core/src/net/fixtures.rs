//! Cross-language conformance vectors for reference mapping.
//!
//! Each vector names a canonical point, the seat of the user pointing at it
//! (`ru`) and the seat of the user viewing (`lu`). `ru_display` is where the
//! point appears to `ru`; `expected` is where `lu` must draw the reference.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use super::transport::unit_f64;
use crate::geometry::{from_canonical, map_reference, Condition, SeatIndex, TableFrame, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingFixture {
    pub condition: Condition,
    pub ru: SeatIndex,
    pub lu: SeatIndex,
    /// Pivot of the seat rotations.
    pub center: Vec3,
    pub point: Vec3,
    pub ru_display: Vec3,
    pub expected: Vec3,
}

fn fixture(point: Vec3, ru: SeatIndex, lu: SeatIndex, condition: Condition, frame: &TableFrame) -> MappingFixture {
    let ru_display = from_canonical(point, ru, condition, frame);
    MappingFixture {
        condition,
        ru,
        lu,
        center: frame.center,
        point,
        ru_display,
        expected: map_reference(ru_display, ru, lu, condition, frame),
    }
}

/// Every ordered seat pair under both conditions with seeded random points,
/// plus hand-picked cases: a quarter turn and the table center.
pub fn mapping_fixtures(frame: &TableFrame, seed: u64) -> Vec<MappingFixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = frame.workspace_bounds;
    let mut draw = |lo: f64, hi: f64| lo + (hi - lo) * unit_f64(rng.next_u64());
    let seat = |i: u8| SeatIndex::new(i).expect("seat in range");
    let mut out = Vec::new();
    for condition in [Condition::Sparc, Condition::Veridical] {
        for ru in SeatIndex::all() {
            for lu in SeatIndex::all() {
                let p = Vec3::new(draw(b.min.x, b.max.x), draw(b.min.y, b.max.y), draw(b.min.z, b.max.z));
                out.push(fixture(p.quantized(), ru, lu, condition, frame));
            }
        }
    }
    let east = frame.center + frame.assembler_dir * 0.3;
    out.push(fixture(east, seat(0), seat(2), Condition::Sparc, frame));
    out.push(fixture(east, seat(2), seat(0), Condition::Sparc, frame));
    out.push(fixture(frame.center, seat(1), seat(5), Condition::Sparc, frame));
    out
}

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::Cell;
use crate::geometry::Quat;

/// One of the 24 proper rotations of the cube, as a signed permutation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CubeRotation {
    pub m: [[i32; 3]; 3],
}

impl CubeRotation {
    pub fn apply(&self, c: Cell) -> Cell {
        let m = &self.m;
        [
            m[0][0] * c[0] + m[0][1] * c[1] + m[0][2] * c[2],
            m[1][0] * c[0] + m[1][1] * c[1] + m[1][2] * c[2],
            m[2][0] * c[0] + m[2][1] * c[1] + m[2][2] * c[2],
        ]
    }

    pub fn determinant(&self) -> i32 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn to_f64(&self) -> [[f64; 3]; 3] {
        self.m.map(|row| row.map(f64::from))
    }

    pub fn to_quat(&self) -> Quat {
        Quat::from_matrix(self.to_f64())
    }

    /// Lower corner offset of a rotated unit cell: `-1` on rows with a negative entry.
    pub(crate) fn unit_cell_shift(&self) -> Cell {
        self.m.map(|row| if row.iter().any(|&v| v < 0) { -1 } else { 0 })
    }
}

fn all_rotations() -> &'static [CubeRotation; 24] {
    static ROTATIONS: OnceLock<[CubeRotation; 24]> = OnceLock::new();
    ROTATIONS.get_or_init(|| {
        const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut out = Vec::with_capacity(24);
        for perm in PERMS {
            for signs in 0..8u32 {
                let mut m = [[0; 3]; 3];
                for (row, &col) in perm.iter().enumerate() {
                    m[row][col] = if signs >> (2 - row) & 1 == 1 { -1 } else { 1 };
                }
                let r = CubeRotation { m };
                if r.determinant() == 1 {
                    out.push(r);
                }
            }
        }
        out.try_into().expect("exactly 24 proper rotations")
    })
}

/// Index into the fixed table of 24 cube rotations; index 0 is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Orientation(u8);

impl Orientation {
    pub const IDENTITY: Orientation = Orientation(0);
    pub const COUNT: usize = 24;

    pub fn new(index: u8) -> Option<Orientation> {
        ((index as usize) < Self::COUNT).then_some(Orientation(index))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn rotation(self) -> &'static CubeRotation {
        &all_rotations()[self.0 as usize]
    }

    pub fn all() -> impl Iterator<Item = Orientation> {
        (0..Self::COUNT as u8).map(Orientation)
    }
}

impl TryFrom<u8> for Orientation {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, Self::Error> {
        Orientation::new(v).ok_or_else(|| format!("orientation index {v} out of range 0..24"))
    }
}

impl From<Orientation> for u8 {
    fn from(o: Orientation) -> u8 {
        o.0
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    #[test]
    fn table_is_the_rotation_group() {
        let all: Vec<_> = Orientation::all().map(|o| *o.rotation()).collect();
        assert_eq!(all.len(), 24);
        assert_eq!(all[0].m, [[1, 0, 0], [0, 1, 0], [0, 0, 1]]);
        let set: HashSet<_> = all.iter().map(|r| r.m).collect();
        assert_eq!(set.len(), 24);
        // closed under composition
        for a in &all {
            for b in &all {
                let mut m = [[0; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        m[i][j] = (0..3).map(|k| a.m[i][k] * b.m[k][j]).sum();
                    }
                }
                assert!(set.contains(&m));
            }
        }
    }

    #[test]
    fn quaternion_matches_matrix() {
        for o in Orientation::all() {
            let r = o.rotation();
            let q = r.to_quat();
            let m = q.to_matrix();
            for i in 0..3 {
                for j in 0..3 {
                    assert!((m[i][j] - r.m[i][j] as f64).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn unit_cell_shift_matches_rotated_corners() {
        for o in Orientation::all() {
            let r = o.rotation();
            let mut lo = [i32::MAX; 3];
            for corner in 0..8 {
                let c = [corner & 1, (corner >> 1) & 1, (corner >> 2) & 1];
                let rc = r.apply(c);
                for a in 0..3 {
                    lo[a] = lo[a].min(rc[a]);
                }
            }
            assert_eq!(lo, r.unit_cell_shift());
        }
    }
}

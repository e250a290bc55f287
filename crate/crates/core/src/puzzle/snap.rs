use serde::{Deserialize, Serialize};

use super::{min_corner, Cell, CubeGrid, Orientation, PieceSet, PieceShape, Placement};
use crate::geometry::{Aabb, Quat, TableFrame, Vec3};

pub const DEFAULT_CELL_SIZE: f64 = 0.06;

/// Where the assembly frame sits in the canonical world.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PuzzleGeometry {
    pub dim: usize,
    pub cell_size: f64,
    /// World position of grid corner `(0, 0, 0)`.
    pub grid_origin: Vec3,
}

impl PuzzleGeometry {
    /// Frame centered on the table, resting on the table plane.
    pub fn centered(frame: &TableFrame, dim: usize, cell_size: f64) -> Self {
        let half = dim as f64 * cell_size * 0.5;
        PuzzleGeometry { dim, cell_size, grid_origin: frame.center - Vec3::new(half, 0.0, half) }
    }

    pub fn lattice_point(&self, n: Cell) -> Vec3 {
        self.grid_origin + Vec3::new(n[0] as f64, n[1] as f64, n[2] as f64) * self.cell_size
    }

    /// World box of one grid cell.
    pub fn cell_box(&self, c: Cell) -> Aabb {
        let lo = self.lattice_point(c);
        Aabb::new(lo, lo + Vec3::new(1.0, 1.0, 1.0) * self.cell_size)
    }

    /// World box of the whole frame.
    pub fn frame_box(&self) -> Aabb {
        let d = self.dim as i32;
        Aabb::new(self.lattice_point([0, 0, 0]), self.lattice_point([d, d, d]))
    }
}

/// A snapped pose that does not lie fully inside the frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TablePose {
    pub piece: String,
    /// Lattice coordinates of the piece origin.
    pub lattice: Cell,
    pub orientation: Orientation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "at", rename_all = "snake_case")]
pub enum Snapped {
    InCube(Placement),
    OnTable(TablePose),
}

impl Snapped {
    pub fn piece(&self) -> &str {
        match self {
            Snapped::InCube(p) => &p.piece,
            Snapped::OnTable(t) => &t.piece,
        }
    }

    pub fn orientation(&self) -> Orientation {
        match self {
            Snapped::InCube(p) => p.orientation,
            Snapped::OnTable(t) => t.orientation,
        }
    }

    /// Grid cells the piece covers (may lie outside the frame when on the table).
    pub fn cells(&self, shape: &PieceShape) -> Vec<Cell> {
        match self {
            Snapped::InCube(p) => p.cells(shape),
            Snapped::OnTable(t) => lattice_cells(shape, t.lattice, t.orientation),
        }
    }

    /// Lattice coordinates of the piece origin.
    pub fn lattice(&self, shape: &PieceShape) -> Cell {
        match self {
            Snapped::InCube(p) => lattice_for_placement(shape, p),
            Snapped::OnTable(t) => t.lattice,
        }
    }

    /// World pose that snaps back to `self`.
    pub fn pose(&self, shape: &PieceShape, geom: &PuzzleGeometry) -> (Vec3, Quat) {
        (geom.lattice_point(self.lattice(shape)), self.orientation().rotation().to_quat())
    }
}

/// Cells covered by a piece whose origin sits on lattice point `n` in orientation `o`.
fn lattice_cells(shape: &PieceShape, n: Cell, o: Orientation) -> Vec<Cell> {
    let r = o.rotation();
    let shift = r.unit_cell_shift();
    shape
        .cells()
        .iter()
        .map(|&c| {
            let rc = r.apply(c);
            [n[0] + rc[0] + shift[0], n[1] + rc[1] + shift[1], n[2] + rc[2] + shift[2]]
        })
        .collect()
}

fn lattice_for_placement(shape: &PieceShape, p: &Placement) -> Cell {
    let r = p.orientation.rotation();
    let shift = r.unit_cell_shift();
    let rotated: Vec<Cell> = shape.cells().iter().map(|&c| r.apply(c)).collect();
    let lo = min_corner(&rotated);
    [0, 1, 2].map(|a| p.offset[a] - lo[a] - shift[a])
}

/// Nearest cube rotation by maximal trace of the relative rotation; ties go to the lower index.
pub fn nearest_orientation(rotation: Quat) -> Orientation {
    let m = rotation.normalized().to_matrix();
    let mut best = Orientation::IDENTITY;
    let mut best_trace = f64::NEG_INFINITY;
    for o in Orientation::all() {
        let r = o.rotation().m;
        // trace(Mᵀ R) = Σ M_ij R_ij
        let mut trace = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                trace += m[i][j] * r[i][j] as f64;
            }
        }
        if trace > best_trace {
            best_trace = trace;
            best = o;
        }
    }
    best
}

/// Snaps a free pose onto the grid lattice and classifies it as in-frame or on the table.
pub fn snap_pose(shape: &PieceShape, position: Vec3, rotation: Quat, geom: &PuzzleGeometry) -> Snapped {
    let orientation = nearest_orientation(rotation);
    let rel = (position - geom.grid_origin) / geom.cell_size;
    let lattice = [rel.x.round() as i32, rel.y.round() as i32, rel.z.round() as i32];
    let cells = lattice_cells(shape, lattice, orientation);
    let grid = CubeGrid::new(geom.dim);
    if cells.iter().all(|&c| grid.in_bounds(c)) {
        Snapped::InCube(Placement { piece: shape.id.clone(), orientation, offset: min_corner(&cells) })
    } else {
        Snapped::OnTable(TablePose { piece: shape.id.clone(), lattice, orientation })
    }
}

/// World pose that puts a piece exactly at `placement`.
pub fn pose_for_placement(shape: &PieceShape, placement: &Placement, geom: &PuzzleGeometry) -> (Vec3, Quat) {
    Snapped::InCube(placement.clone()).pose(shape, geom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReleaseOutcome {
    Correct,
    WrongInCube,
    OutsideCube,
}

impl ReleaseOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            ReleaseOutcome::Correct => "correct",
            ReleaseOutcome::WrongInCube => "wrong_in_cube",
            ReleaseOutcome::OutsideCube => "outside_cube",
        }
    }
}

/// Compares covered cells with the target outline. Orientation labels are ignored.
pub fn classify_release(snapped: &Snapped, pieces: &PieceSet, grid: &CubeGrid, target: &Placement) -> ReleaseOutcome {
    let Snapped::InCube(placement) = snapped else {
        return ReleaseOutcome::OutsideCube;
    };
    let (Some(shape), Some(target_shape)) = (pieces.shape(&placement.piece), pieces.shape(&target.piece)) else {
        return ReleaseOutcome::WrongInCube;
    };
    let mut got = placement.cells(shape);
    if !got.iter().all(|&c| grid.in_bounds(c)) {
        return ReleaseOutcome::OutsideCube;
    }
    let mut want = target.cells(target_shape);
    got.sort_unstable();
    want.sort_unstable();
    if got == want && got.iter().all(|&c| grid.is_free(c)) {
        ReleaseOutcome::Correct
    } else {
        ReleaseOutcome::WrongInCube
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;

    fn tetra_l() -> PieceShape {
        PieceShape::new("L", vec![[0, 0, 0], [1, 0, 0], [2, 0, 0], [2, 1, 0]]).unwrap()
    }

    fn geom() -> PuzzleGeometry {
        PuzzleGeometry::centered(&TableFrame::default(), 4, DEFAULT_CELL_SIZE)
    }

    #[test]
    fn lattice_pose_is_fixed_point() {
        let g = geom();
        let s = tetra_l();
        for o in Orientation::all() {
            let rot = o.rotation().to_quat();
            for n in [[0, 0, 0], [1, 2, 1], [-3, 0, 5]] {
                let snapped = snap_pose(&s, g.lattice_point(n), rot, &g);
                assert_eq!(snapped.lattice(&s), n);
                assert_eq!(snapped.orientation(), o);
                let (p, q) = snapped.pose(&s, &g);
                assert_eq!(snap_pose(&s, p, q, &g), snapped);
            }
        }
    }

    #[test]
    fn offsets_within_half_cell_snap_back() {
        let g = geom();
        let s = tetra_l();
        let base = g.lattice_point([1, 0, 1]);
        let d = 0.4 * g.cell_size;
        let a = snap_pose(&s, base, Quat::IDENTITY, &g);
        let b = snap_pose(&s, base + Vec3::new(d, d, d), Quat::IDENTITY, &g);
        let c = snap_pose(&s, base - Vec3::new(d, d, d), Quat::IDENTITY, &g);
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn placement_pose_round_trip() {
        let g = geom();
        let s = tetra_l();
        for o in Orientation::all() {
            let oc = s.oriented_cells(o);
            let ext = [0, 1, 2].map(|a| oc.iter().map(|c| c[a]).max().unwrap());
            let offset = [3 - ext[0], 0, 3 - ext[2]];
            let pl = Placement { piece: "L".into(), orientation: o, offset };
            let (p, q) = pose_for_placement(&s, &pl, &g);
            assert_eq!(snap_pose(&s, p, q, &g), Snapped::InCube(pl));
        }
    }

    #[test]
    fn nearest_orientation_prefers_lowest_index_on_ties() {
        // a half-way yaw between identity and a quarter turn
        let q = Quat::from_yaw_deg(45.0);
        let o = nearest_orientation(q);
        let quarter = nearest_orientation(Quat::from_yaw_deg(90.0));
        assert!(o == Orientation::IDENTITY || o.index() < quarter.index());
    }

    #[test]
    fn classification_examples() {
        let s = tetra_l();
        let pieces = l_plus_filler();
        let g = geom();
        let grid = CubeGrid::new(4);
        let target = Placement { piece: "L".into(), orientation: Orientation::IDENTITY, offset: [0, 0, 0] };

        // The straight bar has several labels for the same cells.
        let bar = PieceShape::new("B", vec![[0, 0, 0], [1, 0, 0], [2, 0, 0]]).unwrap();
        let bar_set = bar_plus_filler(&bar);
        let bar_target = Placement { piece: "B".into(), orientation: Orientation::IDENTITY, offset: [0, 0, 0] };
        let relabels: Vec<_> = Orientation::all()
            .filter(|&o| o != Orientation::IDENTITY && bar.oriented_cells(o) == bar.oriented_cells(Orientation::IDENTITY))
            .collect();
        assert!(!relabels.is_empty());
        for o in relabels {
            let pl = Placement { piece: "B".into(), orientation: o, offset: [0, 0, 0] };
            assert_eq!(classify_release(&Snapped::InCube(pl), &bar_set, &grid, &bar_target), ReleaseOutcome::Correct);
        }

        let exact = Placement { piece: "L".into(), orientation: Orientation::IDENTITY, offset: [0, 0, 0] };
        assert_eq!(classify_release(&Snapped::InCube(exact), &pieces, &grid, &target), ReleaseOutcome::Correct);

        let disjoint = Placement { piece: "L".into(), orientation: Orientation::IDENTITY, offset: [0, 2, 2] };
        assert_eq!(classify_release(&Snapped::InCube(disjoint), &pieces, &grid, &target), ReleaseOutcome::WrongInCube);

        let straddle = snap_pose(&s, g.lattice_point([2, 0, 0]), Quat::IDENTITY, &g);
        assert!(matches!(straddle, Snapped::OnTable(_)));
        assert_eq!(classify_release(&straddle, &pieces, &grid, &target), ReleaseOutcome::OutsideCube);
    }

    /// `piece` at the origin plus one filler covering the rest of the 4³ grid.
    fn with_filler(piece: &PieceShape) -> PieceSet {
        let filled: std::collections::BTreeSet<Cell> = piece.cells().iter().copied().collect();
        let mut rest = Vec::new();
        for y in 0..4 {
            for z in 0..4 {
                for x in 0..4 {
                    if !filled.contains(&[x, y, z]) {
                        rest.push([x, y, z]);
                    }
                }
            }
        }
        PieceSet::new(vec![piece.clone(), PieceShape::new("F", rest).unwrap()], BTreeMap::new()).unwrap()
    }

    fn l_plus_filler() -> PieceSet {
        with_filler(&tetra_l())
    }

    fn bar_plus_filler(bar: &PieceShape) -> PieceSet {
        with_filler(bar)
    }

    #[test]
    fn trichotomy_is_total_and_exclusive_over_all_placements() {
        // Enumerate every lattice pose of the L over a padded range and every orientation.
        let s = tetra_l();
        let g = geom();
        let pieces = l_plus_filler();
        let mut grid = CubeGrid::new(4);
        // occupy one column so overlap cases exist
        grid.place(&[[3, 0, 3], [3, 1, 3]], "F").unwrap();
        let target = Placement { piece: "L".into(), orientation: Orientation::IDENTITY, offset: [0, 0, 0] };
        let target_cells = {
            let mut c = target.cells(&s);
            c.sort_unstable();
            c
        };
        let mut counts = [0usize; 3];
        for o in Orientation::all() {
            for x in -3..6 {
                for y in -3..6 {
                    for z in -3..6 {
                        let snapped = snap_pose(&s, g.lattice_point([x, y, z]), o.rotation().to_quat(), &g);
                        let mut cells = snapped.cells(&s);
                        cells.sort_unstable();
                        let all_in = cells.iter().all(|&c| grid.in_bounds(c));
                        let expect = if !all_in {
                            ReleaseOutcome::OutsideCube
                        } else if cells == target_cells {
                            ReleaseOutcome::Correct
                        } else {
                            ReleaseOutcome::WrongInCube
                        };
                        let got = classify_release(&snapped, &pieces, &grid, &target);
                        assert_eq!(got, expect, "{snapped:?}");
                        counts[got as usize] += 1;
                    }
                }
            }
        }
        assert_eq!(counts.iter().sum::<usize>(), 24 * 9 * 9 * 9);
        assert!(counts.iter().all(|&c| c > 0), "{counts:?}");
    }
}

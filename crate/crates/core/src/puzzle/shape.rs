use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{Cell, Orientation, PuzzleError};
use crate::geometry::Vec3;

/// Translates cells so the minimum corner is the origin, then sorts them.
pub fn normalize(cells: &[Cell]) -> Vec<Cell> {
    if cells.is_empty() {
        return Vec::new();
    }
    let mut lo = [i32::MAX; 3];
    for c in cells {
        for a in 0..3 {
            lo[a] = lo[a].min(c[a]);
        }
    }
    let mut out: Vec<Cell> = cells.iter().map(|c| [c[0] - lo[0], c[1] - lo[1], c[2] - lo[2]]).collect();
    out.sort_unstable();
    out
}

pub(crate) fn min_corner(cells: &[Cell]) -> Cell {
    let mut lo = [i32::MAX; 3];
    for c in cells {
        for a in 0..3 {
            lo[a] = lo[a].min(c[a]);
        }
    }
    lo
}

fn is_connected(cells: &[Cell]) -> bool {
    let set: BTreeSet<Cell> = cells.iter().copied().collect();
    let Some(&first) = cells.first() else {
        return false;
    };
    let mut seen = BTreeSet::from([first]);
    let mut queue = VecDeque::from([first]);
    while let Some(c) = queue.pop_front() {
        for (axis, step) in [(0, 1), (0, -1), (1, 1), (1, -1), (2, 1), (2, -1)] {
            let mut n = c;
            n[axis] += step;
            if set.contains(&n) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen.len() == set.len()
}

/// A polycube piece in its reference orientation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceShape {
    pub id: String,
    cells: Vec<Cell>,
}

impl PieceShape {
    /// Normalizes the cells and checks they form a single 6-connected polycube without repeats.
    pub fn new(id: impl Into<String>, cells: Vec<Cell>) -> Result<Self, PuzzleError> {
        let id = id.into();
        let invalid = |reason: &str| PuzzleError::Validation { piece: Some(id.clone()), reason: reason.into() };
        if cells.is_empty() {
            return Err(invalid("piece has no cells"));
        }
        let unique: BTreeSet<Cell> = cells.iter().copied().collect();
        if unique.len() != cells.len() {
            return Err(invalid("duplicate cell"));
        }
        if !is_connected(&cells) {
            return Err(invalid("not 6-connected"));
        }
        Ok(PieceShape { cells: normalize(&cells), id })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Cells after rotating by `o`, normalized to the origin.
    pub fn oriented_cells(&self, o: Orientation) -> Vec<Cell> {
        let r = o.rotation();
        normalize(&self.cells.iter().map(|&c| r.apply(c)).collect::<Vec<_>>())
    }
}

/// A distinct orientation of a shape together with the lowest rotation index producing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedCells {
    pub orientation: Orientation,
    pub cells: Vec<Cell>,
}

/// All distinct orientations of a shape, sorted lexicographically by cell list.
pub fn orientations_of(shape: &PieceShape) -> Vec<OrientedCells> {
    let mut seen: BTreeMap<Vec<Cell>, Orientation> = BTreeMap::new();
    for o in Orientation::all() {
        seen.entry(shape.oriented_cells(o)).or_insert(o);
    }
    seen.into_iter().map(|(cells, orientation)| OrientedCells { orientation, cells }).collect()
}

/// A piece fixed at an integer grid offset in one of the cube orientations.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Placement {
    pub piece: String,
    pub orientation: Orientation,
    pub offset: Cell,
}

impl Placement {
    pub fn cells(&self, shape: &PieceShape) -> Vec<Cell> {
        let mut cells = shape.oriented_cells(self.orientation);
        for c in &mut cells {
            for a in 0..3 {
                c[a] += self.offset[a];
            }
        }
        cells
    }
}

/// Occupancy of the assembly frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeGrid {
    dim: usize,
    cells: Vec<Option<String>>,
}

impl CubeGrid {
    pub fn new(dim: usize) -> Self {
        CubeGrid { dim, cells: vec![None; dim * dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        let d = self.dim as i32;
        c.iter().all(|&v| (0..d).contains(&v))
    }

    fn index(&self, c: Cell) -> usize {
        let d = self.dim;
        c[0] as usize + d * (c[2] as usize + d * c[1] as usize)
    }

    pub fn occupant(&self, c: Cell) -> Option<&str> {
        if !self.in_bounds(c) {
            return None;
        }
        self.cells[self.index(c)].as_deref()
    }

    pub fn is_free(&self, c: Cell) -> bool {
        self.in_bounds(c) && self.occupant(c).is_none()
    }

    /// Marks `cells` as held by `piece`; fails without change if any is out of bounds or taken.
    pub fn place(&mut self, cells: &[Cell], piece: &str) -> Result<(), PuzzleError> {
        if let Some(bad) = cells.iter().find(|&&c| !self.is_free(c)) {
            return Err(PuzzleError::Validation {
                piece: Some(piece.to_string()),
                reason: format!("cell {bad:?} is outside the grid or occupied"),
            });
        }
        for &c in cells {
            let i = self.index(c);
            self.cells[i] = Some(piece.to_string());
        }
        Ok(())
    }

    pub fn filled(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.cells.iter().all(Option::is_some)
    }
}

/// Resting pose of a piece on the table, in the canonical frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomePose {
    pub position: Vec3,
    pub orientation: Orientation,
}

/// The pieces of one puzzle plus where each rests on the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceSet {
    shapes: Vec<PieceShape>,
    table_home: BTreeMap<String, HomePose>,
}

impl PieceSet {
    /// Checks unique ids and a total volume that is a perfect cube.
    pub fn new(shapes: Vec<PieceShape>, table_home: BTreeMap<String, HomePose>) -> Result<Self, PuzzleError> {
        let mut ids = BTreeSet::new();
        for s in &shapes {
            if !ids.insert(s.id.as_str()) {
                return Err(PuzzleError::Validation { piece: Some(s.id.clone()), reason: "duplicate piece id".into() });
            }
        }
        if let Some(unknown) = table_home.keys().find(|k| !ids.contains(k.as_str())) {
            return Err(PuzzleError::Validation {
                piece: Some(unknown.clone()),
                reason: "home pose for unknown piece".into(),
            });
        }
        let set = PieceSet { shapes, table_home };
        let total = set.total_cells();
        if cube_dim(total).is_none() {
            return Err(PuzzleError::Validation {
                piece: None,
                reason: format!("total of {total} cells is not the volume of a cube"),
            });
        }
        Ok(set)
    }

    pub fn shapes(&self) -> &[PieceShape] {
        &self.shapes
    }

    pub fn shape(&self, id: &str) -> Option<&PieceShape> {
        self.shapes.iter().find(|s| s.id == id)
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    pub fn total_cells(&self) -> usize {
        self.shapes.iter().map(PieceShape::len).sum()
    }

    /// Edge length of the cube the pieces fill.
    pub fn dim(&self) -> usize {
        cube_dim(self.total_cells()).expect("validated on construction")
    }

    pub fn home(&self, id: &str) -> Option<&HomePose> {
        self.table_home.get(id)
    }

    pub fn homes(&self) -> &BTreeMap<String, HomePose> {
        &self.table_home
    }

    pub fn set_home(&mut self, id: &str, home: HomePose) -> Result<(), PuzzleError> {
        if self.shape(id).is_none() {
            return Err(PuzzleError::Validation { piece: Some(id.into()), reason: "unknown piece".into() });
        }
        self.table_home.insert(id.to_string(), home);
        Ok(())
    }
}

fn cube_dim(total: usize) -> Option<usize> {
    (1..=total).take_while(|d| d * d * d <= total).find(|d| d * d * d == total)
}

/// Placements in the order the instructors reveal them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SolutionSequence {
    pub placements: Vec<Placement>,
}

impl SolutionSequence {
    /// Checks that the placements use every piece once and partition the grid.
    pub fn validate(&self, pieces: &PieceSet) -> Result<(), PuzzleError> {
        let mut grid = CubeGrid::new(pieces.dim());
        let mut used = BTreeSet::new();
        for p in &self.placements {
            let shape = pieces.shape(&p.piece).ok_or_else(|| PuzzleError::Validation {
                piece: Some(p.piece.clone()),
                reason: "unknown piece in solution".into(),
            })?;
            if !used.insert(p.piece.as_str()) {
                return Err(PuzzleError::Validation { piece: Some(p.piece.clone()), reason: "piece used twice".into() });
            }
            grid.place(&p.cells(shape), &p.piece)?;
        }
        if !grid.is_complete() {
            return Err(PuzzleError::Validation { piece: None, reason: "solution leaves empty cells".into() });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(cells: &[Cell]) -> PieceShape {
        PieceShape::new("t", cells.to_vec()).unwrap()
    }

    /// Independent count: apply all 24 integer matrices, normalize, count distinct.
    fn brute_orientation_count(cells: &[Cell]) -> usize {
        let mut mats = Vec::new();
        for a in [-1, 0, 1] {
            for b in [-1, 0, 1] {
                for c in [-1, 0, 1] {
                    for d in [-1, 0, 1] {
                        for e in [-1, 0, 1] {
                            for f in [-1, 0, 1] {
                                for g in [-1, 0, 1] {
                                    for h in [-1, 0, 1] {
                                        for i in [-1, 0, 1] {
                                            let m = [[a, b, c], [d, e, f], [g, h, i]];
                                            let det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
                                            // orthogonal: every row and column has exactly one non-zero
                                            let rows_ok = m.iter().all(|r| r.iter().filter(|v| **v != 0).count() == 1);
                                            let cols_ok = (0..3).all(|j| m.iter().filter(|r| r[j] != 0).count() == 1);
                                            if det == 1 && rows_ok && cols_ok {
                                                mats.push(m);
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        assert_eq!(mats.len(), 24);
        let mut seen = BTreeSet::new();
        for m in mats {
            let rotated: Vec<Cell> = cells
                .iter()
                .map(|c| {
                    let mut out = [0; 3];
                    for r in 0..3 {
                        out[r] = (0..3).map(|k| m[r][k] * c[k]).sum();
                    }
                    out
                })
                .collect();
            seen.insert(normalize(&rotated));
        }
        seen.len()
    }

    #[test]
    fn orientation_counts() {
        assert_eq!(orientations_of(&shape(&[[0, 0, 0]])).len(), 1);
        assert_eq!(orientations_of(&shape(&[[0, 0, 0], [1, 0, 0], [2, 0, 0]])).len(), 3);
        let l = [[0, 0, 0], [1, 0, 0], [2, 0, 0], [2, 1, 0]];
        let n = orientations_of(&shape(&l)).len();
        assert_eq!(n, brute_orientation_count(&l));
        assert_eq!(n, 24);
        let slab = [[0, 0, 0], [1, 0, 0], [0, 0, 1], [1, 0, 1]];
        assert_eq!(orientations_of(&shape(&slab)).len(), brute_orientation_count(&slab));
    }

    #[test]
    fn orientations_sorted_and_lowest_index() {
        let l = shape(&[[0, 0, 0], [1, 0, 0], [1, 1, 0]]);
        let all = orientations_of(&l);
        assert!(all.windows(2).all(|w| w[0].cells < w[1].cells));
        for oc in &all {
            let first = Orientation::all().find(|&o| l.oriented_cells(o) == oc.cells).unwrap();
            assert_eq!(first, oc.orientation);
        }
    }

    #[test]
    fn shape_validation() {
        let dup = PieceShape::new("d", vec![[0, 0, 0], [0, 0, 0]]);
        assert!(matches!(dup, Err(PuzzleError::Validation { piece: Some(ref p), ref reason }) if p == "d" && reason.contains("duplicate")));
        let split = PieceShape::new("s", vec![[0, 0, 0], [2, 0, 0]]);
        assert!(matches!(split, Err(PuzzleError::Validation { ref reason, .. }) if reason == "not 6-connected"));
        // diagonal neighbours do not count
        assert!(PieceShape::new("g", vec![[0, 0, 0], [1, 1, 0]]).is_err());
        let s = PieceShape::new("n", vec![[5, 3, 2], [6, 3, 2]]).unwrap();
        assert_eq!(s.cells(), &[[0, 0, 0], [1, 0, 0]]);
    }

    #[test]
    fn grid_place_rejects_overlap() {
        let mut g = CubeGrid::new(2);
        g.place(&[[0, 0, 0], [1, 0, 0]], "a").unwrap();
        assert!(g.place(&[[1, 0, 0]], "b").is_err());
        assert!(g.place(&[[2, 0, 0]], "b").is_err());
        assert_eq!(g.occupant([1, 0, 0]), Some("a"));
        assert_eq!(g.filled(), 2);
    }

    #[test]
    fn cube_volume_check() {
        let a = PieceShape::new("a", vec![[0, 0, 0], [1, 0, 0], [0, 1, 0]]).unwrap();
        assert!(PieceSet::new(vec![a.clone()], BTreeMap::new()).is_err());
        let b = PieceShape::new("b", (0..5).map(|i| [i, 0, 0]).collect()).unwrap();
        let set = PieceSet::new(vec![a, b], BTreeMap::new()).unwrap();
        assert_eq!(set.dim(), 2);
    }
}

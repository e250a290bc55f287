//! The polycube assembly task: pieces, the 24 cube orientations, grid
//! snapping, release classification and the exact-cover solver that produces
//! the instructors' placement sequence.

mod format;
mod rotation;
mod shape;
mod snap;
mod solver;

pub use format::{load_piece_set, piece_set_to_text};
pub use rotation::{CubeRotation, Orientation};
pub use shape::{normalize, orientations_of, CubeGrid, HomePose, OrientedCells, PieceSet, PieceShape, Placement, SolutionSequence};
pub(crate) use shape::min_corner;
pub use snap::{
    classify_release, nearest_orientation, pose_for_placement, snap_pose, PuzzleGeometry, ReleaseOutcome, Snapped,
    TablePose, DEFAULT_CELL_SIZE,
};
pub use solver::{count_solutions, solve, Solver};

use thiserror::Error;

/// Integer grid coordinate `[x, y, z]`.
pub type Cell = [i32; 3];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PuzzleError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{}{reason}", piece.as_ref().map(|p| format!("piece {p}: ")).unwrap_or_default())]
    Validation { piece: Option<String>, reason: String },
    #[error("pieces hold {cells} cells but the grid has {expected}")]
    CellCountMismatch { cells: usize, expected: usize },
    #[error("grid dimension {0} is not supported (1..=4)")]
    UnsupportedDim(usize),
    #[error("no solution exists")]
    NoSolution,
}

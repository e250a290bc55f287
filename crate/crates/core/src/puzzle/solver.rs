//! Depth-first exact cover over (piece, orientation, offset) candidates.
//!
//! The search always fills the lowest empty cell, where cells are ordered
//! bottom layer first (`y`, then `z`, then `x`). A candidate can cover that
//! cell only if the cell is its own lowest cell, so candidates are bucketed
//! by lowest cell up front. Grids are limited to 64 cells (one `u64` mask).

use std::ops::ControlFlow;

use super::{orientations_of, Orientation, PieceSet, Placement, PuzzleError, SolutionSequence};

const MAX_DIM: usize = 4;

#[derive(Debug, Clone)]
struct Candidate {
    mask: u64,
    orientation: Orientation,
    offset: [i32; 3],
}

/// Pre-computed candidate placements for one piece set.
pub struct Solver<'a> {
    pieces: &'a PieceSet,
    full: u64,
    /// `buckets[cell][piece]`: candidates whose lowest cell is `cell`.
    buckets: Vec<Vec<Vec<Candidate>>>,
}

fn cell_index(dim: usize, c: [i32; 3]) -> usize {
    c[0] as usize + dim * (c[2] as usize + dim * c[1] as usize)
}

impl<'a> Solver<'a> {
    pub fn new(pieces: &'a PieceSet, grid_dim: usize) -> Result<Self, PuzzleError> {
        if grid_dim == 0 || grid_dim > MAX_DIM {
            return Err(PuzzleError::UnsupportedDim(grid_dim));
        }
        let volume = grid_dim.pow(3);
        if pieces.total_cells() != volume {
            return Err(PuzzleError::CellCountMismatch { cells: pieces.total_cells(), expected: volume });
        }
        let full = if volume == 64 { u64::MAX } else { (1u64 << volume) - 1 };
        let n = pieces.len();
        let mut buckets = vec![vec![Vec::new(); n]; volume];
        let d = grid_dim as i32;
        for (pi, shape) in pieces.shapes().iter().enumerate() {
            for oc in orientations_of(shape) {
                let ext = [0, 1, 2].map(|a| oc.cells.iter().map(|c| c[a]).max().unwrap_or(0));
                for oy in 0..d - ext[1] {
                    for oz in 0..d - ext[2] {
                        for ox in 0..d - ext[0] {
                            let mut mask = 0u64;
                            for c in &oc.cells {
                                mask |= 1u64 << cell_index(grid_dim, [c[0] + ox, c[1] + oy, c[2] + oz]);
                            }
                            let lowest = mask.trailing_zeros() as usize;
                            buckets[lowest][pi].push(Candidate { mask, orientation: oc.orientation, offset: [ox, oy, oz] });
                        }
                    }
                }
            }
        }
        Ok(Solver { pieces, full, buckets })
    }

    /// Visits every solution in discovery order until `visit` breaks. Returns the number visited.
    pub fn for_each_solution(&self, mut visit: impl FnMut(&SolutionSequence) -> ControlFlow<()>) -> u64 {
        let mut stack: Vec<(usize, usize, usize)> = Vec::with_capacity(self.pieces.len());
        let mut count = 0;
        let _ = self.search(0, 0, &mut stack, &mut count, &mut visit);
        count
    }

    fn search(
        &self,
        state: u64,
        used: u64,
        stack: &mut Vec<(usize, usize, usize)>,
        count: &mut u64,
        visit: &mut impl FnMut(&SolutionSequence) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if state == self.full {
            *count += 1;
            return visit(&self.sequence(stack));
        }
        let cell = (!state).trailing_zeros() as usize;
        for (pi, candidates) in self.buckets[cell].iter().enumerate() {
            if used >> pi & 1 == 1 {
                continue;
            }
            for (ci, cand) in candidates.iter().enumerate() {
                if cand.mask & state != 0 {
                    continue;
                }
                stack.push((cell, pi, ci));
                let flow = self.search(state | cand.mask, used | 1 << pi, stack, count, visit);
                stack.pop();
                flow?;
            }
        }
        ControlFlow::Continue(())
    }

    fn sequence(&self, stack: &[(usize, usize, usize)]) -> SolutionSequence {
        let placements = stack
            .iter()
            .map(|&(cell, pi, ci)| {
                let cand = &self.buckets[cell][pi][ci];
                Placement { piece: self.pieces.shapes()[pi].id.clone(), orientation: cand.orientation, offset: cand.offset }
            })
            .collect();
        SolutionSequence { placements }
    }
}

/// Up to `limit` solutions in discovery order.
pub fn solve(pieces: &PieceSet, grid_dim: usize, limit: usize) -> Result<Vec<SolutionSequence>, PuzzleError> {
    let solver = Solver::new(pieces, grid_dim)?;
    let mut out = Vec::new();
    if limit == 0 {
        return Ok(out);
    }
    solver.for_each_solution(|s| {
        out.push(s.clone());
        if out.len() >= limit {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    if out.is_empty() {
        return Err(PuzzleError::NoSolution);
    }
    Ok(out)
}

pub fn count_solutions(pieces: &PieceSet, grid_dim: usize) -> Result<u64, PuzzleError> {
    Ok(Solver::new(pieces, grid_dim)?.for_each_solution(|_| ControlFlow::Continue(())))
}

//! Piece-set text format.
//!
//! ```text
//! # comment
//! piece A
//! cell 0 0 0
//! cell 1 0 0
//! home 0.35 0.75 0.1 0
//! ```
//!
//! Each `piece` line opens a piece; `cell` lines add cubes to it and an
//! optional `home` line gives its table position and orientation index.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Cell, HomePose, Orientation, PieceSet, PieceShape, PuzzleError};
use crate::geometry::Vec3;

struct Builder {
    id: String,
    line: usize,
    cells: Vec<Cell>,
    home: Option<HomePose>,
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> PuzzleError {
    PuzzleError::Parse { line, column, message: message.into() }
}

/// Splits a line into tokens with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn expect_args<'a>(
    toks: &'a [(usize, &'a str)],
    n: usize,
    line_no: usize,
    line: &str,
) -> Result<&'a [(usize, &'a str)], PuzzleError> {
    if toks.len() - 1 < n {
        return Err(parse_err(line_no, line.trim_end().len() + 1, format!("`{}` expects {n} arguments", toks[0].1)));
    }
    if toks.len() - 1 > n {
        let (col, tok) = toks[n + 1];
        return Err(parse_err(line_no, col, format!("unexpected token `{tok}`")));
    }
    Ok(&toks[1..])
}

fn parse_num<T: std::str::FromStr>(line: usize, (col, tok): (usize, &str), what: &str) -> Result<T, PuzzleError> {
    tok.parse().map_err(|_| parse_err(line, col, format!("invalid {what} `{tok}`")))
}

pub fn load_piece_set(text: &str) -> Result<PieceSet, PuzzleError> {
    let mut pieces: Vec<Builder> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("");
        let toks = tokens(line);
        let Some(&(col, keyword)) = toks.first() else {
            continue;
        };
        match keyword {
            "piece" => {
                let args = expect_args(&toks, 1, line_no, line)?;
                pieces.push(Builder { id: args[0].1.to_string(), line: line_no, cells: Vec::new(), home: None });
            }
            "cell" => {
                let args = expect_args(&toks, 3, line_no, line)?;
                let current = pieces.last_mut().ok_or_else(|| parse_err(line_no, col, "`cell` before any `piece`"))?;
                let mut c = [0; 3];
                for (a, tok) in args.iter().enumerate() {
                    c[a] = parse_num(line_no, *tok, "coordinate")?;
                }
                current.cells.push(c);
            }
            "home" => {
                let args = expect_args(&toks, 4, line_no, line)?;
                let current = pieces.last_mut().ok_or_else(|| parse_err(line_no, col, "`home` before any `piece`"))?;
                if current.home.is_some() {
                    return Err(parse_err(line_no, col, format!("second `home` for piece {}", current.id)));
                }
                let mut p = [0.0; 3];
                for (a, tok) in args[..3].iter().enumerate() {
                    p[a] = parse_num::<f64>(line_no, *tok, "position")?;
                    if !p[a].is_finite() {
                        return Err(parse_err(line_no, tok.0, "position must be finite"));
                    }
                }
                let o: u8 = parse_num(line_no, args[3], "orientation index")?;
                let orientation =
                    Orientation::new(o).ok_or_else(|| parse_err(line_no, args[3].0, "orientation index must be below 24"))?;
                current.home = Some(HomePose { position: Vec3::from(p), orientation });
            }
            other => return Err(parse_err(line_no, col, format!("unknown keyword `{other}`"))),
        }
    }

    let mut shapes = Vec::with_capacity(pieces.len());
    let mut homes = BTreeMap::new();
    for b in pieces {
        if b.cells.is_empty() {
            return Err(PuzzleError::Validation {
                piece: Some(b.id),
                reason: format!("piece declared on line {} has no cells", b.line),
            });
        }
        if let Some(h) = b.home {
            homes.insert(b.id.clone(), h);
        }
        shapes.push(PieceShape::new(b.id, b.cells)?);
    }
    PieceSet::new(shapes, homes)
}

/// Serializes in the same format `load_piece_set` reads.
pub fn piece_set_to_text(set: &PieceSet) -> String {
    let mut out = String::new();
    for (i, shape) in set.shapes().iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "piece {}", shape.id);
        for c in shape.cells() {
            let _ = writeln!(out, "cell {} {} {}", c[0], c[1], c[2]);
        }
        if let Some(h) = set.home(&shape.id) {
            let p = h.position;
            let _ = writeln!(out, "home {:?} {:?} {:?} {}", p.x, p.y, p.z, h.orientation.index());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_SLABS: &str = "\
# two flat 2x2 slabs
piece A
cell 0 0 0
cell 1 0 0
cell 0 0 1
cell 1 0 1
home 0.3 0.75 0 0

piece B   # trailing comment
cell 0 0 0
cell 1 0 0
cell 0 0 1
cell 1 0 1
";

    #[test]
    fn parses_and_round_trips() {
        let set = load_piece_set(TWO_SLABS).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.dim(), 2);
        assert_eq!(set.home("A").unwrap().position, Vec3::new(0.3, 0.75, 0.0));
        assert!(set.home("B").is_none());
        let text = piece_set_to_text(&set);
        assert_eq!(load_piece_set(&text).unwrap(), set);
    }

    #[test]
    fn duplicate_cell_names_piece() {
        let err = load_piece_set("piece X\ncell 0 0 0\ncell 0 0 0\n").unwrap_err();
        assert!(matches!(err, PuzzleError::Validation { piece: Some(ref p), .. } if p == "X"), "{err}");
    }

    #[test]
    fn disconnected_piece() {
        let err = load_piece_set("piece X\ncell 0 0 0\ncell 2 0 0\n").unwrap_err();
        assert!(err.to_string().contains("not 6-connected"), "{err}");
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = load_piece_set("piece A\ncell 0 x 0\n").unwrap_err();
        assert_eq!(err, PuzzleError::Parse { line: 2, column: 8, message: "invalid coordinate `x`".into() });
        let err = load_piece_set("cell 0 0 0\n").unwrap_err();
        assert!(matches!(err, PuzzleError::Parse { line: 1, column: 1, .. }));
        let err = load_piece_set("piece A\n  bogus 1\n").unwrap_err();
        assert!(matches!(err, PuzzleError::Parse { line: 2, column: 3, .. }));
        let err = load_piece_set("piece A\ncell 0 0\n").unwrap_err();
        assert!(matches!(err, PuzzleError::Parse { line: 2, .. }));
        let err = load_piece_set("piece A\ncell 0 0 0\nhome 0 0 0 24\n").unwrap_err();
        assert!(matches!(err, PuzzleError::Parse { line: 3, column: 12, .. }));
    }

    #[test]
    fn non_cube_total_rejected() {
        let mut text = String::new();
        for i in 0..7 {
            text.push_str(&format!("piece P{i}\ncell 0 0 0\n"));
        }
        let err = load_piece_set(&text).unwrap_err();
        assert!(err.to_string().contains("7 cells"), "{err}");
    }
}

//! Bot scripts: a small line format of timestamped actions.
//!
//! ```text
//! # comment
//! name ana
//! role instructor
//! seat 2
//! at 1500 point target right
//! at 3000 gaze seat 0
//! ```
//!
//! Points are canonical coordinates in meters. See `docs/bot-scripts.md`
//! for the full grammar.

use std::fmt;

use thiserror::Error;

use crate::geometry::{Handedness, SeatIndex, Vec3};
use crate::puzzle::{Cell, Orientation, SolutionSequence};
use crate::session::RoleRequest;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

/// Something a hand or a gaze can aim at.
#[derive(Debug, Clone, PartialEq)]
pub enum Aim {
    Point(Vec3),
    Piece(String),
    /// The next placement; only instructors see it.
    Target,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gaze {
    Seat(SeatIndex),
    Point(Vec3),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReleaseAt {
    /// Grid offset of the placed cells' minimum corner.
    Cell { offset: Cell, orientation: Option<Orientation> },
    /// Piece origin on the table.
    Table { p: Vec3, orientation: Option<Orientation> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Start,
    /// Raise the hand and point its ray at the aim.
    Point { aim: Aim, hand: Handedness },
    /// Move the hand itself to the aim, ray off.
    Touch { aim: Aim, hand: Handedness },
    /// Return one hand (or both) to rest.
    Lower { hand: Option<Handedness> },
    Gaze(Gaze),
    Grab { piece: String, hand: Handedness },
    /// Turn the most recently grabbed piece.
    Rotate(Orientation),
    Release(ReleaseAt),
    Idle,
    /// Say goodbye and stop.
    Leave,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimedAction {
    pub at_ms: u64,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BotScript {
    pub name: String,
    pub role: RoleRequest,
    pub seat: Option<SeatIndex>,
    pub actions: Vec<TimedAction>,
}

impl BotScript {
    /// Time of the last scripted action.
    pub fn end_ms(&self) -> u64 {
        self.actions.last().map_or(0, |a| a.at_ms)
    }
}

struct Line<'a> {
    no: usize,
    words: Vec<&'a str>,
    pos: usize,
}

impl<'a> Line<'a> {
    fn err(&self, message: impl Into<String>) -> ScriptError {
        ScriptError { line: self.no, message: message.into() }
    }

    fn next(&mut self, what: &str) -> Result<&'a str, ScriptError> {
        let w = self.words.get(self.pos).copied().ok_or_else(|| self.err(format!("missing {what}")))?;
        self.pos += 1;
        Ok(w)
    }

    fn peek(&self) -> Option<&'a str> {
        self.words.get(self.pos).copied()
    }

    fn done(&self) -> Result<(), ScriptError> {
        match self.peek() {
            None => Ok(()),
            Some(w) => Err(self.err(format!("unexpected `{w}`"))),
        }
    }

    fn num<T: std::str::FromStr>(&mut self, what: &str) -> Result<T, ScriptError> {
        let w = self.next(what)?;
        w.parse().map_err(|_| self.err(format!("bad {what} `{w}`")))
    }

    fn float(&mut self) -> Result<f64, ScriptError> {
        let v: f64 = self.num("coordinate")?;
        if !v.is_finite() {
            return Err(self.err("coordinates must be finite"));
        }
        Ok(v)
    }

    fn vec3(&mut self) -> Result<Vec3, ScriptError> {
        Ok(Vec3::new(self.float()?, self.float()?, self.float()?))
    }

    fn hand(&mut self) -> Result<Handedness, ScriptError> {
        Ok(self.opt_hand()?.unwrap_or(Handedness::Right))
    }

    fn opt_hand(&mut self) -> Result<Option<Handedness>, ScriptError> {
        match self.peek() {
            None => Ok(None),
            Some(w) => {
                self.pos += 1;
                w.parse().map(Some).map_err(|e: String| self.err(e))
            }
        }
    }

    fn seat(&mut self) -> Result<SeatIndex, ScriptError> {
        let i: u8 = self.num("seat")?;
        SeatIndex::new(i).map_err(|e| self.err(e.to_string()))
    }

    fn orientation(&mut self) -> Result<Orientation, ScriptError> {
        let i: u8 = self.num("orientation")?;
        Orientation::new(i).ok_or_else(|| self.err(format!("orientation {i} out of range 0..24")))
    }

    fn opt_orientation(&mut self) -> Result<Option<Orientation>, ScriptError> {
        if self.peek().is_none() {
            return Ok(None);
        }
        self.orientation().map(Some)
    }

    fn aim(&mut self) -> Result<Aim, ScriptError> {
        match self.peek() {
            Some("piece") => {
                self.pos += 1;
                Ok(Aim::Piece(self.next("piece id")?.to_string()))
            }
            Some("target") => {
                self.pos += 1;
                Ok(Aim::Target)
            }
            _ => Ok(Aim::Point(self.vec3()?)),
        }
    }
}

fn parse_action(l: &mut Line) -> Result<Action, ScriptError> {
    let verb = l.next("action")?;
    let action = match verb {
        "start" => Action::Start,
        "point" => Action::Point { aim: l.aim()?, hand: l.hand()? },
        "touch" => Action::Touch { aim: l.aim()?, hand: l.hand()? },
        "lower" => Action::Lower { hand: l.opt_hand()? },
        "gaze" => match l.peek() {
            Some("seat") => {
                l.pos += 1;
                Action::Gaze(Gaze::Seat(l.seat()?))
            }
            _ => Action::Gaze(Gaze::Point(l.vec3()?)),
        },
        "grab" => Action::Grab { piece: l.next("piece id")?.to_string(), hand: l.hand()? },
        "rotate" => Action::Rotate(l.orientation()?),
        "release" => match l.next("release kind")? {
            "cell" => {
                let offset = [l.num("cell")?, l.num("cell")?, l.num("cell")?];
                Action::Release(ReleaseAt::Cell { offset, orientation: l.opt_orientation()? })
            }
            "table" => Action::Release(ReleaseAt::Table { p: l.vec3()?, orientation: l.opt_orientation()? }),
            other => return Err(l.err(format!("release needs `cell` or `table`, got `{other}`"))),
        },
        "idle" => Action::Idle,
        "leave" => Action::Leave,
        other => return Err(l.err(format!("unknown action `{other}`"))),
    };
    l.done()?;
    Ok(action)
}

pub fn parse_script(text: &str) -> Result<BotScript, ScriptError> {
    let mut name = None;
    let mut role = None;
    let mut seat = None;
    let mut actions: Vec<TimedAction> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        let words: Vec<&str> = content.split_whitespace().collect();
        if words.is_empty() {
            continue;
        }
        let mut l = Line { no: i + 1, words, pos: 0 };
        match l.next("keyword")? {
            "name" => {
                name = Some(l.next("name")?.to_string());
                l.done()?;
            }
            "role" => {
                let w = l.next("role")?;
                role = Some(w.parse::<RoleRequest>().map_err(|e| l.err(e))?);
                l.done()?;
            }
            "seat" => {
                seat = Some(l.seat()?);
                l.done()?;
            }
            "at" => {
                let at_ms: u64 = l.num("time")?;
                if let Some(prev) = actions.last() {
                    if at_ms < prev.at_ms {
                        return Err(l.err(format!("time {at_ms} is before the previous action at {}", prev.at_ms)));
                    }
                }
                actions.push(TimedAction { at_ms, action: parse_action(&mut l)? });
            }
            other => return Err(l.err(format!("unknown keyword `{other}`"))),
        }
    }
    let err = |message: &str| ScriptError { line: 0, message: message.into() };
    Ok(BotScript {
        name: name.ok_or_else(|| err("missing `name`"))?,
        role: role.ok_or_else(|| err("missing `role`"))?,
        seat,
        actions,
    })
}

fn fmt_vec(v: Vec3) -> String {
    format!("{:?} {:?} {:?}", v.x, v.y, v.z)
}

impl fmt::Display for Aim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Aim::Point(v) => f.write_str(&fmt_vec(*v)),
            Aim::Piece(id) => write!(f, "piece {id}"),
            Aim::Target => f.write_str("target"),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let orient = |o: &Option<Orientation>| o.map(|o| format!(" {}", o.index())).unwrap_or_default();
        match self {
            Action::Start => f.write_str("start"),
            Action::Point { aim, hand } => write!(f, "point {aim} {}", hand.as_str()),
            Action::Touch { aim, hand } => write!(f, "touch {aim} {}", hand.as_str()),
            Action::Lower { hand: None } => f.write_str("lower"),
            Action::Lower { hand: Some(h) } => write!(f, "lower {}", h.as_str()),
            Action::Gaze(Gaze::Seat(s)) => write!(f, "gaze seat {}", s.index()),
            Action::Gaze(Gaze::Point(v)) => write!(f, "gaze {}", fmt_vec(*v)),
            Action::Grab { piece, hand } => write!(f, "grab {piece} {}", hand.as_str()),
            Action::Rotate(o) => write!(f, "rotate {}", o.index()),
            Action::Release(ReleaseAt::Cell { offset: [x, y, z], orientation }) => {
                write!(f, "release cell {x} {y} {z}{}", orient(orientation))
            }
            Action::Release(ReleaseAt::Table { p, orientation }) => {
                write!(f, "release table {}{}", fmt_vec(*p), orient(orientation))
            }
            Action::Idle => f.write_str("idle"),
            Action::Leave => f.write_str("leave"),
        }
    }
}

impl fmt::Display for BotScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "name {}", self.name)?;
        writeln!(f, "role {}", self.role)?;
        if let Some(s) = self.seat {
            writeln!(f, "seat {}", s.index())?;
        }
        for a in &self.actions {
            writeln!(f, "at {} {}", a.at_ms, a.action)?;
        }
        Ok(())
    }
}

/// Seats handed to instructors by [`default_scripts`], in order.
pub const INSTRUCTOR_SEATS: [u8; 7] = [2, 6, 1, 3, 4, 5, 7];

/// First action time of placement `i`.
fn slot(i: usize) -> u64 {
    2000 + 2500 * i as u64
}

/// An assembler at seat 0 working through `solution`, plus `instructors`
/// bots pointing at each target and glancing at the assembler.
pub fn default_scripts(solution: &SolutionSequence, instructors: usize) -> Vec<BotScript> {
    let instructors = instructors.min(INSTRUCTOR_SEATS.len());
    let at = |at_ms: u64, action: Action| TimedAction { at_ms, action };
    let mut assembler = vec![at(1000, Action::Start)];
    for (i, p) in solution.placements.iter().enumerate() {
        let t = slot(i);
        assembler.push(at(t, Action::Grab { piece: p.piece.clone(), hand: Handedness::Right }));
        if instructors > 0 {
            let look = SeatIndex::new(INSTRUCTOR_SEATS[i % instructors]).expect("seat table is valid");
            assembler.push(at(t + 500, Action::Gaze(Gaze::Seat(look))));
        }
        assembler.push(at(
            t + 1500,
            Action::Release(ReleaseAt::Cell { offset: p.offset, orientation: Some(p.orientation) }),
        ));
        assembler.push(at(t + 1600, Action::Lower { hand: None }));
    }
    let mut out = vec![BotScript {
        name: "assembler".into(),
        role: RoleRequest::Assembler,
        seat: Some(SeatIndex::ASSEMBLER),
        actions: assembler,
    }];
    for (k, &seat) in INSTRUCTOR_SEATS[..instructors].iter().enumerate() {
        let mut actions = Vec::new();
        for i in 0..solution.placements.len() {
            let t = slot(i) - 500;
            actions.push(at(t, Action::Point { aim: Aim::Target, hand: Handedness::Right }));
            actions.push(at(t + 1000, Action::Gaze(Gaze::Seat(SeatIndex::ASSEMBLER))));
            actions.push(at(t + 1800, Action::Lower { hand: None }));
        }
        out.push(BotScript {
            name: format!("instructor{}", k + 1),
            role: RoleRequest::Instructor(Some(k as u8 + 1)),
            seat: Some(SeatIndex::new(seat).expect("seat table is valid")),
            actions,
        });
    }
    out
}

//! Rebuilds a session from its log by re-applying the input records and
//! checking that the regenerated log matches line for line.

use thiserror::Error;

use super::event::{Event, EventRecord};
use super::{MetricsReport, Session, SessionError};
use crate::puzzle::{load_piece_set, piece_set_to_text};

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("line {line}: {message}")]
    Corrupt { line: usize, message: String },
    #[error("the log does not start with a session record")]
    MissingHeader,
    #[error("line {line}: replay diverges from the log")]
    Diverged { line: usize },
    #[error(transparent)]
    Session(#[from] SessionError),
}

pub struct ReplayOutcome {
    pub session: Session,
    pub metrics: MetricsReport,
    /// The last report record found in the log, if any.
    pub embedded: Option<MetricsReport>,
    /// The final line was cut off and ignored.
    pub truncated: bool,
    /// Number of records read.
    pub records: usize,
}

fn parse(text: &str) -> Result<(Vec<(usize, EventRecord)>, bool), ReplayError> {
    let mut out = Vec::new();
    let mut truncated = false;
    let complete = text.ends_with('\n');
    let lines: Vec<&str> = text.split('\n').collect();
    let last = lines.len() - 1;
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match EventRecord::from_line(line) {
            Ok(r) => out.push((i + 1, r)),
            Err(_) if i == last && !complete => truncated = true,
            Err(e) => return Err(ReplayError::Corrupt { line: i + 1, message: e.to_string() }),
        }
    }
    Ok((out, truncated))
}

pub fn replay(text: &str) -> Result<ReplayOutcome, ReplayError> {
    let (records, truncated) = parse(text)?;
    let Some((_, EventRecord { event: Event::Session(header), .. })) = records.first() else {
        return Err(ReplayError::MissingHeader);
    };
    let reparsed = load_piece_set(&piece_set_to_text(&header.pieces)).map_err(SessionError::from)?;
    if reparsed != header.pieces {
        return Err(SessionError::Invalid("piece set in the log is not normalized".into()).into());
    }
    let mut session = Session::new(header.clone())?;
    let mut embedded = None;
    for (_, rec) in &records[1..] {
        session.set_time(rec.tick, rec.clock_ms);
        // refusals surface as reject records and are caught by the comparison below
        let _ = match &rec.event {
            Event::Session(_) => Err(SessionError::Invalid("second session record".into())),
            Event::Join { client, name, seat, role } => {
                session.join(*client, name, Some(*seat), (*role).into()).map(|_| ())
            }
            Event::Start { client } => session.start(*client),
            Event::Pose { client, avatar } => session.update_pose(*client, avatar.clone()).map(|_| ()),
            Event::Grab { client, piece, hand } => session.grab(*client, piece, *hand),
            Event::Release { client, p, q, .. } => session.release(*client, *p, *q).map(|_| ()),
            Event::EyeContactSample { dt_ms, .. } => {
                session.sample_eye_contact(*dt_ms);
                Ok(())
            }
            Event::Leave { client } => session.leave(*client),
            Event::Reject { client, command, code } => {
                session.reject(*client, command, code);
                Ok(())
            }
            Event::Report(m) => {
                embedded = Some(m.clone());
                session.append_report(m.clone());
                Ok(())
            }
            Event::TriggerOn { .. } | Event::TriggerOff { .. } | Event::Finish { .. } => Ok(()),
        };
    }
    let regenerated = session.log();
    for (i, (line, rec)) in records.iter().enumerate() {
        if regenerated.get(i) != Some(rec) {
            return Err(ReplayError::Diverged { line: *line });
        }
    }
    if regenerated.len() > records.len() && !truncated {
        let line = records.last().map_or(1, |(l, _)| l + 1);
        return Err(ReplayError::Diverged { line });
    }
    let mut metrics = session.metrics();
    metrics.partial |= truncated;
    Ok(ReplayOutcome { session, metrics, embedded, truncated, records: records.len() })
}

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ClientId;

/// Task performance summary for one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsReport {
    /// Seconds from start to the final correct placement (or to the last
    /// recorded clock for a partial report).
    pub total_time_s: f64,
    pub errors_per_piece: BTreeMap<String, u32>,
    pub total_errors: u32,
    pub attempts: u32,
    /// Errors plus attempts; correct placements are not moves.
    pub total_moves: u32,
    /// Seconds each client spent looking at another avatar's head, summed over targets.
    pub eye_contact_s: BTreeMap<ClientId, f64>,
    pub correct_placements: u32,
    /// True when the session had not finished.
    pub partial: bool,
}

//! Inputs shared by the benchmarks in `benches/`.

use sparc_core::net::{encode, Body, Envelope, Server};
use sparc_core::puzzle::{load_piece_set, PieceSet};
use sparc_core::session::{RoleRequest, Session, SessionHeader};
use sparc_core::{Condition, SeatIndex, TableFrame};

pub const BEDLAM: &str = include_str!("../../../data/bedlam.txt");

pub fn bedlam() -> PieceSet {
    load_piece_set(BEDLAM).expect("shipped piece set parses")
}

pub fn header(condition: Condition) -> SessionHeader {
    SessionHeader::build(condition, TableFrame::default(), bedlam()).expect("shipped piece set tiles")
}

/// A running session with `n` participants (assembler plus `n - 1` instructors).
pub fn running_session(condition: Condition, n: u8) -> Session {
    let mut s = Session::new(header(condition)).expect("valid header");
    for i in 0..n {
        let role = if i == 0 { RoleRequest::Assembler } else { RoleRequest::Instructor(None) };
        let seat = SeatIndex::new(i).expect("at most eight participants");
        s.join(sparc_core::session::ClientId(i as u32 + 1), &format!("u{i}"), Some(seat), role)
            .expect("seat is free");
    }
    s.set_time(1, 1000);
    s.start(sparc_core::session::ClientId(1)).expect("ready to start");
    s
}

/// A typical snapshot envelope as sent to the first participant.
pub fn snapshot_text(n: u8) -> String {
    let server = Server::new(running_session(Condition::Sparc, n));
    let snap = server.snapshot_for(sparc_core::session::ClientId(1));
    encode(&Envelope::new(1, 1000, Body::Snapshot(snap)))
}

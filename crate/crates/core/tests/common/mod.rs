#![allow(dead_code)]

use sparc_core::geometry::{from_canonical, Condition, SeatIndex, TableFrame, Vec3};
use sparc_core::puzzle::{load_piece_set, pose_for_placement, PieceSet, Placement};
use sparc_core::session::{default_avatar, AvatarState, ClientId, RoleRequest, Session, SessionHeader};
use sparc_core::Quat;

pub const ASSEMBLER: ClientId = ClientId(1);
pub const INSTR_A: ClientId = ClientId(2);
pub const INSTR_B: ClientId = ClientId(3);

pub fn data(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

pub fn bedlam() -> PieceSet {
    load_piece_set(&data("bedlam.txt")).unwrap()
}

pub fn session(condition: Condition) -> Session {
    Session::new(SessionHeader::build(condition, TableFrame::default(), bedlam()).unwrap()).unwrap()
}

/// Assembler at seat 0, instructors at seats 2 and 6, started at t = 1000 ms.
pub fn trio(condition: Condition) -> Session {
    let mut s = session(condition);
    s.join(ASSEMBLER, "asm", None, RoleRequest::Assembler).unwrap();
    s.join(INSTR_A, "i1", Some(seat(2)), RoleRequest::Instructor(None)).unwrap();
    s.join(INSTR_B, "i2", Some(seat(6)), RoleRequest::Instructor(None)).unwrap();
    s.set_time(30, 1000);
    s.start(ASSEMBLER).unwrap();
    s
}

pub fn seat(i: u8) -> SeatIndex {
    SeatIndex::new(i).unwrap()
}

/// Release pose (in the client's displayed frame) that lands exactly on `placement`.
pub fn release_pose(s: &Session, client: ClientId, placement: &Placement) -> (Vec3, Quat) {
    let shape = s.pieces().shape(&placement.piece).unwrap();
    let (p, q) = pose_for_placement(shape, placement, s.geometry());
    let seat = s.client(client).unwrap().seat;
    (from_canonical(p, seat, s.condition(), s.frame()), q)
}

/// A pose update that moves one hand to `p` (client's displayed frame).
pub fn avatar_with(s: &Session, client: ClientId, tick: u64, edit: impl FnOnce(&mut AvatarState)) -> AvatarState {
    let seat = s.client(client).unwrap().seat;
    let mut a = default_avatar(s.frame(), seat);
    a.tick = tick;
    edit(&mut a);
    a
}

/// Places the current target correctly. Returns the piece id.
pub fn place_next(s: &mut Session, tick: u64, clock: u64) -> String {
    s.set_time(tick, clock);
    let target = s.target().unwrap().clone();
    s.grab(ASSEMBLER, &target.piece, sparc_core::Handedness::Right).unwrap();
    let (p, q) = release_pose(s, ASSEMBLER, &target);
    s.set_time(tick + 1, clock + 40);
    assert_eq!(s.release(ASSEMBLER, p, q).unwrap(), sparc_core::puzzle::ReleaseOutcome::Correct);
    target.piece
}

use std::collections::BTreeMap;

use super::event::{Event, EventRecord, SessionHeader};
use super::render::{reference_point, render_model, RenderModel, HEAD_RADIUS};
use super::{
    AvatarEntry, AvatarState, ClientId, HandRefs, HandState, Holder, MetricsReport, Phase, PieceStatus, PieceView, Pose,
    Role, RoleRequest, SeatAssignment, SessionError,
};
use crate::geometry::{
    ray_sphere, seat_angle, to_canonical, to_canonical_dir, Aabb, Condition, Handedness, Quat, Ray, SeatIndex,
    TableFrame, Vec3, DEFAULT_SPLINE_SAMPLES, SEAT_COUNT,
};
use crate::puzzle::{
    classify_release, min_corner, normalize, orientations_of, snap_pose, solve, CubeGrid, HomePose, Orientation, PieceSet, PieceShape,
    Placement, PuzzleGeometry, ReleaseOutcome, Snapped, DEFAULT_CELL_SIZE,
};

/// Radius of the ring on which pieces without a home pose are laid out.
const HOME_RING_RADIUS: f64 = 0.45;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClientInfo {
    pub name: String,
    pub seat: SeatIndex,
    pub role: Role,
    pub connected: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PieceState {
    pub status: PieceStatus,
    /// Last snapped resting pose (the home pose while at home).
    pub rest: Snapped,
    pub p: Vec3,
    pub q: Quat,
    pub holder: Option<Holder>,
}

/// The authoritative world. Hand states are stored in the canonical frame;
/// heads stay in room coordinates at each participant's true seat.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionState {
    pub phase: Phase,
    pub tick: u64,
    pub clock_ms: u64,
    pub start_ms: Option<u64>,
    pub end_ms: Option<u64>,
    pub clients: BTreeMap<ClientId, ClientInfo>,
    pub avatars: BTreeMap<ClientId, AvatarState>,
    pub refs: BTreeMap<ClientId, HandRefs>,
    pub pieces: BTreeMap<String, PieceState>,
    pub grid: CubeGrid,
    /// Placement order; entries before `cursor` are done.
    pub sequence: Vec<Placement>,
    pub cursor: usize,
    pub errors_per_piece: BTreeMap<String, u32>,
    pub attempts: u32,
    pub correct: u32,
    /// Held pieces in grab order.
    pub grabs: Vec<(ClientId, Handedness, String)>,
    /// Accumulated gaze time per ordered (looker, looked-at) pair.
    pub eye_contact_ms: BTreeMap<(ClientId, ClientId), u64>,
}

pub struct Session {
    header: SessionHeader,
    state: SessionState,
    log: Vec<EventRecord>,
}

fn ring_homes(pieces: &PieceSet, geom: &PuzzleGeometry, center: Vec3) -> BTreeMap<String, HomePose> {
    let n = pieces.len().max(1) as f64;
    let mut out = BTreeMap::new();
    for (k, shape) in pieces.shapes().iter().enumerate() {
        let ext = [0, 1, 2].map(|a| shape.cells().iter().map(|c| c[a]).max().unwrap_or(0) + 1);
        let ang = std::f64::consts::TAU * (k as f64 + 0.5) / n;
        let cx = center.x + HOME_RING_RADIUS * ang.cos() - ext[0] as f64 * geom.cell_size * 0.5;
        let cz = center.z - HOME_RING_RADIUS * ang.sin() - ext[2] as f64 * geom.cell_size * 0.5;
        let nx = ((cx - geom.grid_origin.x) / geom.cell_size).round() as i32;
        let nz = ((cz - geom.grid_origin.z) / geom.cell_size).round() as i32;
        let position = geom.lattice_point([nx, 0, nz]);
        out.insert(shape.id.clone(), HomePose { position, orientation: Orientation::IDENTITY });
    }
    out
}

/// The same placement expressed for a congruent piece.
fn relabel(placement: &Placement, from: &PieceShape, to: &PieceShape) -> Option<Placement> {
    let want = placement.cells(from);
    let norm = normalize(&want);
    orientations_of(to).into_iter().find(|oc| oc.cells == norm).map(|oc| Placement {
        piece: to.id.clone(),
        orientation: oc.orientation,
        offset: min_corner(&want),
    })
}

impl SessionHeader {
    /// Header for a fresh session: frame centered on the table, missing
    /// homes laid out on a ring, and the first solver tiling as the sequence.
    pub fn build(condition: Condition, table: TableFrame, mut pieces: PieceSet) -> Result<Self, SessionError> {
        table.validate()?;
        let geometry = PuzzleGeometry::centered(&table, pieces.dim(), DEFAULT_CELL_SIZE);
        for (id, home) in ring_homes(&pieces, &geometry, table.center) {
            if pieces.home(&id).is_none() {
                pieces.set_home(&id, home)?;
            }
        }
        let solution = solve(&pieces, pieces.dim(), 1)?.remove(0);
        Ok(SessionHeader { condition, table, geometry, pieces, solution })
    }
}

impl Session {
    pub fn new(header: SessionHeader) -> Result<Session, SessionError> {
        header.table.validate()?;
        header.solution.validate(&header.pieces)?;
        let geom = &header.geometry;
        let mut pieces = BTreeMap::new();
        for shape in header.pieces.shapes() {
            let home = header
                .pieces
                .home(&shape.id)
                .ok_or_else(|| SessionError::Invalid(format!("piece {} has no home pose", shape.id)))?;
            let q = home.orientation.rotation().to_quat();
            let rest = snap_pose(shape, home.position, q, geom);
            if !matches!(rest, Snapped::OnTable(_)) {
                return Err(SessionError::Invalid(format!("home of piece {} lies inside the frame", shape.id)));
            }
            pieces.insert(
                shape.id.clone(),
                PieceState { status: PieceStatus::Home, rest, p: home.position, q, holder: None },
            );
        }
        let state = SessionState {
            phase: Phase::Lobby,
            tick: 0,
            clock_ms: 0,
            start_ms: None,
            end_ms: None,
            clients: BTreeMap::new(),
            avatars: BTreeMap::new(),
            refs: BTreeMap::new(),
            pieces,
            grid: CubeGrid::new(geom.dim),
            sequence: header.solution.placements.clone(),
            cursor: 0,
            errors_per_piece: header.pieces.shapes().iter().map(|s| (s.id.clone(), 0)).collect(),
            attempts: 0,
            correct: 0,
            grabs: Vec::new(),
            eye_contact_ms: BTreeMap::new(),
        };
        let mut s = Session { header: header.clone(), state, log: Vec::new() };
        s.emit(Event::Session(header));
        Ok(s)
    }

    pub fn header(&self) -> &SessionHeader {
        &self.header
    }

    pub fn state(&self) -> &SessionState {
        &self.state
    }

    pub fn condition(&self) -> Condition {
        self.header.condition
    }

    pub fn frame(&self) -> &TableFrame {
        &self.header.table
    }

    pub fn geometry(&self) -> &PuzzleGeometry {
        &self.header.geometry
    }

    pub fn pieces(&self) -> &PieceSet {
        &self.header.pieces
    }

    pub fn phase(&self) -> Phase {
        self.state.phase
    }

    pub fn log(&self) -> &[EventRecord] {
        &self.log
    }

    /// Advances the logical time stamped on subsequent records. Time never runs backwards.
    pub fn set_time(&mut self, tick: u64, clock_ms: u64) {
        self.state.tick = self.state.tick.max(tick);
        self.state.clock_ms = self.state.clock_ms.max(clock_ms);
    }

    fn emit(&mut self, event: Event) {
        self.log.push(EventRecord { tick: self.state.tick, clock_ms: self.state.clock_ms, event });
    }

    fn checked<T>(&mut self, client: ClientId, command: &str, r: Result<T, SessionError>) -> Result<T, SessionError> {
        if let Err(e) = &r {
            self.reject(client, command, e.code());
        }
        r
    }

    /// Records a refused command.
    pub fn reject(&mut self, client: ClientId, command: &str, code: &str) {
        self.emit(Event::Reject { client, command: command.into(), code: code.into() });
    }

    /// Appends a metrics report to the log.
    pub fn append_report(&mut self, report: MetricsReport) {
        self.emit(Event::Report(report));
    }

    pub fn client(&self, id: ClientId) -> Option<&ClientInfo> {
        self.state.clients.get(&id)
    }

    pub fn assignment(&self, id: ClientId) -> Option<SeatAssignment> {
        self.client(id).map(|c| SeatAssignment {
            seat: c.seat,
            role: c.role,
            angle_deg: seat_angle(c.seat).degrees(),
            condition: self.header.condition,
        })
    }

    fn seat_occupant(&self, seat: SeatIndex) -> Option<ClientId> {
        self.state.clients.iter().find(|(_, c)| c.seat == seat).map(|(id, _)| *id)
    }

    /// The next placement, while the puzzle is running.
    pub fn target(&self) -> Option<&Placement> {
        match self.state.phase {
            Phase::Running => self.state.sequence.get(self.state.cursor),
            _ => None,
        }
    }

    // ---- commands ----

    pub fn join(
        &mut self,
        client: ClientId,
        name: &str,
        seat: Option<SeatIndex>,
        role: RoleRequest,
    ) -> Result<SeatAssignment, SessionError> {
        let r = self.try_join(client, name, seat, role);
        self.checked(client, "join", r)
    }

    fn try_join(
        &mut self,
        client: ClientId,
        name: &str,
        seat: Option<SeatIndex>,
        role: RoleRequest,
    ) -> Result<SeatAssignment, SessionError> {
        if self.state.phase != Phase::Lobby {
            return Err(SessionError::SessionRunning);
        }
        if self.state.clients.contains_key(&client) {
            return Err(SessionError::AlreadyJoined(client));
        }
        let (seat, role) = match role {
            RoleRequest::Assembler => {
                if self.state.clients.values().any(|c| c.role.is_assembler()) {
                    return Err(SessionError::DuplicateAssembler);
                }
                if seat.is_some_and(|s| s != SeatIndex::ASSEMBLER) {
                    return Err(SessionError::RoleSeatMismatch);
                }
                if self.seat_occupant(SeatIndex::ASSEMBLER).is_some() {
                    return Err(SessionError::SeatTaken(SeatIndex::ASSEMBLER));
                }
                (SeatIndex::ASSEMBLER, Role::Assembler)
            }
            RoleRequest::Instructor(n) => {
                if seat == Some(SeatIndex::ASSEMBLER) {
                    return Err(SessionError::RoleSeatMismatch);
                }
                let seat = match seat {
                    Some(s) if self.seat_occupant(s).is_some() => return Err(SessionError::SeatTaken(s)),
                    Some(s) => s,
                    None => SeatIndex::all()
                        .skip(1)
                        .find(|s| self.seat_occupant(*s).is_none())
                        .ok_or(SessionError::NoFreeSeat)?,
                };
                let taken = |k: u8| self.state.clients.values().any(|c| c.role == Role::Instructor(k));
                let number = match n {
                    Some(k) if taken(k) => return Err(SessionError::DuplicateInstructor(k)),
                    Some(k) => k,
                    None => (1..=SEAT_COUNT as u8).find(|k| !taken(*k)).ok_or(SessionError::NoFreeSeat)?,
                };
                (seat, Role::Instructor(number))
            }
        };
        self.state.clients.insert(client, ClientInfo { name: name.to_string(), seat, role, connected: true });
        let avatar = self.canonical_avatar(seat, &default_avatar(&self.header.table, seat));
        self.state.avatars.insert(client, avatar);
        self.state.refs.insert(client, HandRefs::default());
        self.emit(Event::Join { client, name: name.to_string(), seat, role });
        self.refresh_refs(&[client]);
        Ok(self.assignment(client).expect("just inserted"))
    }

    pub fn start(&mut self, client: ClientId) -> Result<(), SessionError> {
        let r = self.try_start(client);
        self.checked(client, "start", r)
    }

    fn try_start(&mut self, client: ClientId) -> Result<(), SessionError> {
        if !self.state.clients.contains_key(&client) {
            return Err(SessionError::UnknownClient(client));
        }
        let roles = || self.state.clients.values().filter(|c| c.connected).map(|c| c.role);
        let ready = self.state.phase == Phase::Lobby
            && roles().any(Role::is_assembler)
            && roles().any(|r| matches!(r, Role::Instructor(_)));
        if !ready {
            return Err(SessionError::NotReady);
        }
        self.state.phase = Phase::Running;
        self.state.start_ms = Some(self.state.clock_ms);
        self.emit(Event::Start { client });
        Ok(())
    }

    /// Stores a pose sent in the client's displayed frame. Returns `false`
    /// (and changes nothing) when the update is older than the stored one.
    pub fn update_pose(&mut self, client: ClientId, avatar: AvatarState) -> Result<bool, SessionError> {
        let r = self.try_update_pose(client, avatar);
        self.checked(client, "pose", r)
    }

    fn try_update_pose(&mut self, client: ClientId, avatar: AvatarState) -> Result<bool, SessionError> {
        let info = self.state.clients.get(&client).ok_or(SessionError::UnknownClient(client))?;
        avatar.validate().map_err(|m| SessionError::InvalidPose(m.into()))?;
        let seat = info.seat;
        if let Some(prev) = self.state.avatars.get(&client) {
            if avatar.tick < prev.tick {
                return Ok(false);
            }
        }
        let mut stored = self.canonical_avatar(seat, &avatar);
        for h in Handedness::BOTH {
            stored.hand_mut(h).grab = self.held_by(client, h).map(str::to_string);
        }
        for (_, hand, piece) in self.state.grabs.iter().filter(|g| g.0 == client) {
            let hs = stored.hand(*hand);
            let ps = self.state.pieces.get_mut(piece).expect("grabbed pieces exist");
            ps.p = hs.p;
            ps.q = hs.q;
        }
        self.state.avatars.insert(client, stored);
        self.emit(Event::Pose { client, avatar });
        self.refresh_refs(&[client]);
        Ok(true)
    }

    pub fn grab(&mut self, client: ClientId, piece: &str, hand: Handedness) -> Result<(), SessionError> {
        let r = self.try_grab(client, piece, hand);
        self.checked(client, "grab", r)
    }

    fn try_grab(&mut self, client: ClientId, piece: &str, hand: Handedness) -> Result<(), SessionError> {
        let info = self.state.clients.get(&client).ok_or(SessionError::UnknownClient(client))?;
        if self.state.phase != Phase::Running {
            return Err(SessionError::NotRunning);
        }
        if !info.role.is_assembler() {
            return Err(SessionError::NotAssembler);
        }
        let ps = self.state.pieces.get(piece).ok_or_else(|| SessionError::UnknownPiece(piece.to_string()))?;
        match ps.status {
            PieceStatus::Held => return Err(SessionError::PieceHeld(piece.to_string())),
            PieceStatus::Placed => return Err(SessionError::PieceLocked(piece.to_string())),
            PieceStatus::Home | PieceStatus::Table => {}
        }
        if self.held_by(client, hand).is_some() {
            return Err(SessionError::HandBusy(hand));
        }
        let hs = self.state.avatars[&client].hand(hand).clone();
        let ps = self.state.pieces.get_mut(piece).expect("checked above");
        ps.status = PieceStatus::Held;
        ps.holder = Some(Holder { client, hand });
        ps.p = hs.p;
        ps.q = hs.q;
        self.state.grabs.push((client, hand, piece.to_string()));
        if let Some(a) = self.state.avatars.get_mut(&client) {
            a.hand_mut(hand).grab = Some(piece.to_string());
        }
        self.emit(Event::Grab { client, piece: piece.to_string(), hand });
        self.refresh_all_refs();
        Ok(())
    }

    /// Drops the client's most recently grabbed piece at a pose given in its displayed frame.
    pub fn release(&mut self, client: ClientId, p: Vec3, q: Quat) -> Result<ReleaseOutcome, SessionError> {
        let r = self.try_release(client, p, q);
        self.checked(client, "release", r)
    }

    fn try_release(&mut self, client: ClientId, p: Vec3, q: Quat) -> Result<ReleaseOutcome, SessionError> {
        let seat = self.state.clients.get(&client).ok_or(SessionError::UnknownClient(client))?.seat;
        if self.state.phase != Phase::Running {
            return Err(SessionError::NotRunning);
        }
        if !(p.is_finite() && q.is_finite()) || (q.norm() - 1.0).abs() > 1e-6 {
            return Err(SessionError::InvalidPose("release pose must be finite with a unit quaternion".into()));
        }
        let idx = self.state.grabs.iter().rposition(|g| g.0 == client).ok_or(SessionError::NotHolding)?;
        let (_, hand, piece) = self.state.grabs.remove(idx);
        let cond = self.header.condition;
        let pc = to_canonical(p, seat, cond, &self.header.table);
        let qc = canonical_quat(q, seat, cond);
        let shape = self.header.pieces.shape(&piece).expect("grabbed pieces exist").clone();
        let geom = self.header.geometry;
        let snapped = snap_pose(&shape, pc, qc, &geom);
        let target = self.state.sequence[self.state.cursor].clone();
        let outcome = classify_release(&snapped, &self.header.pieces, &self.state.grid, &target);
        let ps = self.state.pieces.get_mut(&piece).expect("grabbed pieces exist");
        ps.holder = None;
        match outcome {
            ReleaseOutcome::Correct => {
                let Snapped::InCube(placement) = &snapped else { unreachable!("correct releases are in the frame") };
                self.state.grid.place(&placement.cells(&shape), &piece)?;
                (ps.p, ps.q) = snapped.pose(&shape, &geom);
                ps.status = PieceStatus::Placed;
                ps.rest = snapped.clone();
                if placement.piece != target.piece {
                    // a congruent piece took this slot; the displaced piece inherits its later slot
                    let target_shape = self.header.pieces.shape(&target.piece).expect("targets name known pieces");
                    for later in &mut self.state.sequence[self.state.cursor + 1..] {
                        if later.piece == placement.piece {
                            *later = relabel(later, &shape, target_shape).expect("congruent shapes");
                        }
                    }
                }
                self.state.sequence[self.state.cursor] = placement.clone();
                self.state.cursor += 1;
                self.state.correct += 1;
            }
            ReleaseOutcome::WrongInCube => {
                let home = self.header.pieces.home(&piece).expect("validated on construction");
                ps.p = home.position;
                ps.q = home.orientation.rotation().to_quat();
                ps.rest = snap_pose(&shape, ps.p, ps.q, &geom);
                ps.status = PieceStatus::Home;
                *self.state.errors_per_piece.entry(piece.clone()).or_insert(0) += 1;
            }
            ReleaseOutcome::OutsideCube => {
                (ps.p, ps.q) = snapped.pose(&shape, &geom);
                ps.rest = snapped;
                ps.status = PieceStatus::Table;
                self.state.attempts += 1;
            }
        }
        if let Some(a) = self.state.avatars.get_mut(&client) {
            a.hand_mut(hand).grab = None;
        }
        self.emit(Event::Release { client, piece, hand, p, q, outcome });
        if self.state.cursor == self.state.sequence.len() {
            self.state.phase = Phase::Finished;
            self.state.end_ms = Some(self.state.clock_ms);
            let total_time_ms = self.state.clock_ms - self.state.start_ms.unwrap_or(0);
            self.emit(Event::Finish { total_time_ms });
        }
        self.refresh_all_refs();
        Ok(outcome)
    }

    /// Removes a client in the lobby; later it keeps its seat but stops counting.
    pub fn leave(&mut self, client: ClientId) -> Result<(), SessionError> {
        let r = self.try_leave(client);
        self.checked(client, "leave", r)
    }

    fn try_leave(&mut self, client: ClientId) -> Result<(), SessionError> {
        let info = self.state.clients.get_mut(&client).ok_or(SessionError::UnknownClient(client))?;
        if !info.connected {
            return Err(SessionError::UnknownClient(client));
        }
        info.connected = false;
        let in_lobby = self.state.phase == Phase::Lobby;
        // pieces still in hand go back home
        let mut returned = Vec::new();
        self.state.grabs.retain(|g| {
            let keep = g.0 != client;
            if !keep {
                returned.push(g.2.clone());
            }
            keep
        });
        for piece in returned {
            let home = *self.header.pieces.home(&piece).expect("validated on construction");
            let shape = self.header.pieces.shape(&piece).expect("known piece");
            let ps = self.state.pieces.get_mut(&piece).expect("known piece");
            ps.p = home.position;
            ps.q = home.orientation.rotation().to_quat();
            ps.rest = snap_pose(shape, ps.p, ps.q, &self.header.geometry);
            ps.status = PieceStatus::Home;
            ps.holder = None;
        }
        self.emit(Event::Leave { client });
        let refs = self.state.refs.get(&client).copied().unwrap_or_default();
        for h in Handedness::BOTH {
            if refs.get(h).is_some() {
                self.emit(Event::TriggerOff { client, hand: h });
            }
        }
        self.state.refs.insert(client, HandRefs::default());
        if in_lobby {
            self.state.clients.remove(&client);
            self.state.avatars.remove(&client);
            self.state.refs.remove(&client);
        }
        self.refresh_all_refs();
        Ok(())
    }

    /// Accrues `dt_ms` for every ordered pair whose gaze ray hits the other head.
    pub fn sample_eye_contact(&mut self, dt_ms: u64) -> Vec<(ClientId, ClientId)> {
        if self.state.phase != Phase::Running {
            return Vec::new();
        }
        let heads: Vec<(ClientId, Pose)> = self
            .state
            .avatars
            .iter()
            .filter(|(id, _)| self.state.clients.get(id).is_some_and(|c| c.connected))
            .map(|(id, a)| (*id, a.head))
            .collect();
        let mut hits = Vec::new();
        for (a, ha) in &heads {
            let Ok(ray) = Ray::new(ha.p, ha.forward()) else { continue };
            for (b, hb) in &heads {
                if a != b && ray_sphere(&ray, hb.p, HEAD_RADIUS).is_some() {
                    hits.push((*a, *b));
                }
            }
        }
        if !hits.is_empty() {
            for pair in &hits {
                *self.state.eye_contact_ms.entry(*pair).or_insert(0) += dt_ms;
            }
            self.emit(Event::EyeContactSample { dt_ms, hits: hits.clone() });
        }
        hits
    }

    // ---- derived views ----

    fn held_by(&self, client: ClientId, hand: Handedness) -> Option<&str> {
        self.state.grabs.iter().find(|g| g.0 == client && g.1 == hand).map(|g| g.2.as_str())
    }

    fn canonical_avatar(&self, seat: SeatIndex, a: &AvatarState) -> AvatarState {
        let cond = self.header.condition;
        let frame = &self.header.table;
        let conv = |h: &HandState| HandState {
            p: to_canonical(h.p, seat, cond, frame),
            q: canonical_quat(h.q, seat, cond),
            ray: h.ray,
            ray_dir: to_canonical_dir(h.ray_dir, seat, cond, frame),
            grab: h.grab.clone(),
        };
        AvatarState { head: a.head, left: conv(&a.left), right: conv(&a.right), tick: a.tick }
    }

    /// Boxes a ray can point at: resting and placed pieces plus the frame.
    pub fn ray_targets(&self) -> Vec<Aabb> {
        let geom = &self.header.geometry;
        let mut out = vec![geom.frame_box()];
        for (id, ps) in &self.state.pieces {
            if ps.status == PieceStatus::Held {
                continue;
            }
            let shape = self.header.pieces.shape(id).expect("known piece");
            out.extend(ps.rest.cells(shape).into_iter().map(|c| geom.cell_box(c)));
        }
        out
    }

    fn refresh_all_refs(&mut self) {
        let ids: Vec<ClientId> = self.state.avatars.keys().copied().collect();
        self.refresh_refs(&ids);
    }

    fn refresh_refs(&mut self, clients: &[ClientId]) {
        let targets = self.ray_targets();
        for &client in clients {
            if !self.state.clients.get(&client).is_some_and(|c| c.connected) {
                continue;
            }
            let Some(avatar) = self.state.avatars.get(&client) else { continue };
            let old = self.state.refs.get(&client).copied().unwrap_or_default();
            let mut new = HandRefs::default();
            for h in Handedness::BOTH {
                new.set(h, reference_point(avatar.hand(h), self.header.condition, &self.header.table, &targets));
            }
            self.state.refs.insert(client, new);
            for h in Handedness::BOTH {
                match (old.get(h), new.get(h)) {
                    (None, Some(reference)) => self.emit(Event::TriggerOn { client, hand: h, reference }),
                    (Some(_), None) => self.emit(Event::TriggerOff { client, hand: h }),
                    _ => {}
                }
            }
        }
    }

    pub fn avatar_entries(&self) -> Vec<AvatarEntry> {
        self.state
            .avatars
            .iter()
            .filter_map(|(id, a)| {
                let c = self.state.clients.get(id)?;
                Some(AvatarEntry {
                    client: *id,
                    name: c.name.clone(),
                    seat: c.seat,
                    role: c.role,
                    tick: a.tick,
                    head: a.head,
                    left: a.left.clone(),
                    right: a.right.clone(),
                    refs: self.state.refs.get(id).copied().unwrap_or_default(),
                })
            })
            .collect()
    }

    pub fn piece_views(&self) -> Vec<PieceView> {
        self.header
            .pieces
            .shapes()
            .iter()
            .map(|s| {
                let ps = &self.state.pieces[&s.id];
                PieceView {
                    id: s.id.clone(),
                    state: ps.status,
                    p: ps.p,
                    q: ps.q,
                    o: ps.rest.orientation(),
                    holder: ps.holder.clone(),
                }
            })
            .collect()
    }

    pub fn render_model_for(&self, viewer: ClientId) -> Result<RenderModel, SessionError> {
        render_model(viewer, &self.avatar_entries(), self.header.condition, &self.header.table, DEFAULT_SPLINE_SAMPLES)
    }

    pub fn metrics(&self) -> MetricsReport {
        let s = &self.state;
        let total_ms = match (s.start_ms, s.end_ms) {
            (Some(a), Some(b)) => b - a,
            (Some(a), None) => s.clock_ms - a,
            _ => 0,
        };
        let total_errors = s.errors_per_piece.values().sum();
        let mut eye: BTreeMap<ClientId, u64> = s.clients.keys().map(|c| (*c, 0)).collect();
        for ((a, _), ms) in &s.eye_contact_ms {
            *eye.entry(*a).or_insert(0) += ms;
        }
        MetricsReport {
            total_time_s: total_ms as f64 / 1000.0,
            errors_per_piece: s.errors_per_piece.clone(),
            total_errors,
            attempts: s.attempts,
            total_moves: total_errors + s.attempts,
            eye_contact_s: eye.into_iter().map(|(c, ms)| (c, ms as f64 / 1000.0)).collect(),
            correct_placements: s.correct,
            partial: s.phase != Phase::Finished,
        }
    }
}

fn canonical_quat(q: Quat, seat: SeatIndex, condition: Condition) -> Quat {
    match condition {
        Condition::Veridical => q,
        Condition::Sparc => seat_angle(seat).inverse().to_quat().compose(q),
    }
}

/// Resting avatar at a seat, in room coordinates: head above the seat facing
/// the table center, hands low in front of the body outside the workspace.
pub fn default_avatar(frame: &TableFrame, seat: SeatIndex) -> AvatarState {
    let dir = frame.seat_direction(seat);
    let head_p = frame.seat_position(seat) + Vec3::Y * 0.45;
    let head = Pose { p: head_p, q: Quat::looking_along(frame.center - head_p) };
    let side = Vec3::new(-dir.z, 0.0, dir.x);
    let rest = |s: f64| {
        let p = frame.center + dir * (frame.seat_radius * 0.8) + side * (0.2 * s) - Vec3::Y * 0.05;
        HandState { p, q: head.q, ray: false, ray_dir: -dir, grab: None }
    };
    // facing the center, +side is the avatar's left
    AvatarState { head, left: rest(1.0), right: rest(-1.0), tick: 0 }
}

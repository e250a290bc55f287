//! Scripted client: joins, plays its script against the session clock and
//! streams poses at 20 Hz.

use super::protocol::{decode, encode, Body, Envelope, Grab, Hello, Release, Snapshot, TableInfo, Welcome};
use super::script::{Action, Aim, BotScript, Gaze, ReleaseAt};
use super::transport::Lane;
use crate::geometry::{
    from_canonical, seat_angle, Condition, Handedness, Quat, SeatIndex, TableFrame, Vec3, DEFAULT_SPLINE_SAMPLES,
};
use crate::puzzle::{Orientation, PieceSet, Placement, PuzzleGeometry, Snapped};
use crate::session::{
    default_avatar, render_model, AvatarState, ClientId, HandState, Pose, RenderModel, SessionError,
};

/// Interval between pose messages.
pub const POSE_INTERVAL_MS: u64 = 50;
/// Time a hand or gaze takes to reach a new goal.
pub const MOVE_MS: u64 = 300;
/// Horizontal distance of a raised pointing hand from the table center.
const POINT_RADIUS: f64 = 0.7;
/// Height of a raised pointing hand above the table plane; above the workspace.
const POINT_LIFT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BotStatus {
    Connecting,
    Active,
    /// Stopped after an error from the server.
    Aborted { code: String, msg: String },
    Left,
}

#[derive(Debug, Clone, Copy)]
struct Track {
    from: Vec3,
    to: Vec3,
    t0: u64,
}

impl Track {
    fn at_rest(p: Vec3) -> Self {
        Track { from: p, to: p, t0: 0 }
    }

    fn value(&self, now: u64) -> Vec3 {
        let s = (now.saturating_sub(self.t0) as f64 / MOVE_MS as f64).min(1.0);
        self.from.lerp(self.to, s)
    }

    fn retarget(&mut self, to: Vec3, now: u64) {
        self.from = self.value(now);
        self.to = to;
        self.t0 = now;
    }
}

#[derive(Debug, Clone)]
struct HandMotion {
    track: Track,
    rest: Vec3,
    /// Displayed-frame point the ray aims at while pointing.
    ray_at: Option<Vec3>,
}

struct Seated {
    client: ClientId,
    seat: SeatIndex,
    condition: Condition,
    frame: TableFrame,
    geom: PuzzleGeometry,
    pieces: PieceSet,
    head_p: Vec3,
    gaze: Track,
    left: HandMotion,
    right: HandMotion,
    /// Held pieces in grab order with their current orientation.
    held: Vec<(Handedness, String, Orientation)>,
}

pub struct Bot {
    script: BotScript,
    next_action: usize,
    status: BotStatus,
    seq: u64,
    pose_tick: u64,
    last_pose_ms: Option<u64>,
    hello_sent: bool,
    left: bool,
    quiet: bool,
    seated: Option<Seated>,
    last_snapshot: Option<Snapshot>,
    snapshots: u64,
}

impl Seated {
    fn new(w: &Welcome) -> Self {
        let frame = w.table.frame();
        let rest = default_avatar(&frame, w.seat);
        let hand = |h: &HandState| HandMotion { track: Track::at_rest(h.p), rest: h.p, ray_at: None };
        Seated {
            client: w.client,
            seat: w.seat,
            condition: w.condition,
            frame,
            geom: w.table.geometry(),
            pieces: w.piece_set.clone(),
            head_p: rest.head.p,
            gaze: Track::at_rest(frame.center),
            left: hand(&rest.left),
            right: hand(&rest.right),
            held: Vec::new(),
        }
    }

    fn hand_mut(&mut self, h: Handedness) -> &mut HandMotion {
        match h {
            Handedness::Left => &mut self.left,
            Handedness::Right => &mut self.right,
        }
    }

    fn display(&self, canonical: Vec3) -> Vec3 {
        from_canonical(canonical, self.seat, self.condition, &self.frame)
    }

    fn display_quat(&self, canonical: Quat) -> Quat {
        match self.condition {
            Condition::Veridical => canonical,
            Condition::Sparc => seat_angle(self.seat).to_quat().compose(canonical),
        }
    }

    /// Canonical point an aim refers to, if it is currently known.
    fn resolve(&self, aim: &Aim, snap: Option<&Snapshot>) -> Option<Vec3> {
        match aim {
            Aim::Point(p) => Some(*p),
            Aim::Piece(id) => {
                let view = snap?.pieces.iter().find(|v| &v.id == id)?;
                let shape = self.pieces.shape(id)?;
                let c = shape.cells()[0];
                let local = Vec3::new(c[0] as f64 + 0.5, c[1] as f64 + 0.5, c[2] as f64 + 0.5) * self.geom.cell_size;
                Some(view.p + view.q.rotate(local))
            }
            Aim::Target => {
                let target: &Placement = snap?.target.as_ref()?;
                let shape = self.pieces.shape(&target.piece)?;
                Some(self.geom.cell_box(target.cells(shape)[0]).center())
            }
        }
    }

    /// Raised hand position beside the bot's own seat, in the displayed frame.
    fn raised(&self) -> Vec3 {
        let dir = self.frame.seat_direction(self.seat);
        self.frame.center + dir * POINT_RADIUS + Vec3::Y * POINT_LIFT
    }

    fn avatar(&self, now: u64, tick: u64) -> AvatarState {
        let gaze_at = self.gaze.value(now);
        let head_q = Quat::looking_along(gaze_at - self.head_p);
        let hand = |h: Handedness, m: &HandMotion| {
            let p = m.track.value(now).quantized();
            let held = self.held.iter().rev().find(|g| g.0 == h);
            let ray_dir = m.ray_at.and_then(|t| (t - p).normalized());
            let q = match (ray_dir, held) {
                (Some(d), _) => Quat::looking_along(d),
                (None, Some((_, _, o))) => self.display_quat(o.rotation().to_quat()),
                (None, None) => head_q,
            };
            HandState {
                p,
                q,
                ray: ray_dir.is_some(),
                ray_dir: ray_dir.unwrap_or_else(|| q.rotate(-Vec3::Z)),
                grab: held.map(|g| g.1.clone()),
            }
        };
        AvatarState {
            head: Pose { p: self.head_p.quantized(), q: head_q },
            left: hand(Handedness::Left, &self.left),
            right: hand(Handedness::Right, &self.right),
            tick,
        }
    }
}

impl Bot {
    pub fn new(script: BotScript) -> Self {
        Bot {
            script,
            next_action: 0,
            status: BotStatus::Connecting,
            seq: 0,
            pose_tick: 0,
            last_pose_ms: None,
            hello_sent: false,
            left: false,
            quiet: false,
            seated: None,
            last_snapshot: None,
            snapshots: 0,
        }
    }

    pub fn script(&self) -> &BotScript {
        &self.script
    }

    pub fn status(&self) -> &BotStatus {
        &self.status
    }

    pub fn client(&self) -> Option<ClientId> {
        self.seated.as_ref().map(|s| s.client)
    }

    pub fn seat(&self) -> Option<SeatIndex> {
        self.seated.as_ref().map(|s| s.seat)
    }

    pub fn last_snapshot(&self) -> Option<&Snapshot> {
        self.last_snapshot.as_ref()
    }

    /// Snapshots received so far.
    pub fn snapshots_received(&self) -> u64 {
        self.snapshots
    }

    /// Whether every scripted action has run.
    pub fn script_done(&self) -> bool {
        self.next_action >= self.script.actions.len()
    }

    /// This client's view computed from its last snapshot.
    pub fn render_model(&self) -> Option<Result<RenderModel, SessionError>> {
        let s = self.seated.as_ref()?;
        let snap = self.last_snapshot.as_ref()?;
        Some(render_model(s.client, &snap.avatars, s.condition, &s.frame, DEFAULT_SPLINE_SAMPLES))
    }

    /// Stops sending anything further except on [`Bot::leave`].
    pub fn quiesce(&mut self) {
        self.quiet = true;
    }

    fn envelope(&mut self, now: u64, body: Body) -> (Lane, String) {
        self.seq += 1;
        let lane = if matches!(body, Body::Pose(_)) { Lane::Unreliable } else { Lane::Reliable };
        (lane, encode(&Envelope::new(self.seq, now, body)))
    }

    /// Handles one message from the server.
    pub fn handle(&mut self, text: &str) {
        let Ok(env) = decode(text) else {
            self.status = BotStatus::Aborted { code: "malformed".into(), msg: "undecodable server message".into() };
            return;
        };
        match env.body {
            Body::Welcome(w) => {
                self.seated = Some(Seated::new(&w));
                if self.status == BotStatus::Connecting {
                    self.status = BotStatus::Active;
                }
            }
            Body::Snapshot(s) => {
                self.snapshots += 1;
                self.last_snapshot = Some(s);
            }
            Body::Error(e) => {
                if !self.left {
                    self.status = BotStatus::Aborted { code: e.code, msg: e.msg };
                }
            }
            _ => {}
        }
    }

    /// Sends a goodbye unless the bot already left.
    pub fn leave(&mut self, now: u64) -> Vec<(Lane, String)> {
        if !self.hello_sent || self.left {
            return Vec::new();
        }
        self.left = true;
        if !matches!(self.status, BotStatus::Aborted { .. }) {
            self.status = BotStatus::Left;
        }
        vec![self.envelope(now, Body::Bye)]
    }

    /// Advances the bot to `now` and returns what it sends.
    pub fn poll(&mut self, now: u64) -> Vec<(Lane, String)> {
        let mut out = Vec::new();
        if self.quiet {
            return out;
        }
        if !self.hello_sent {
            self.hello_sent = true;
            let hello = Hello { name: self.script.name.clone(), seat: self.script.seat, role: self.script.role };
            out.push(self.envelope(now, Body::Hello(hello)));
            return out;
        }
        match self.status {
            BotStatus::Active => {}
            BotStatus::Aborted { .. } => {
                out.extend(self.leave(now));
                return out;
            }
            BotStatus::Connecting | BotStatus::Left => return out,
        }
        while let Some(a) = self.script.actions.get(self.next_action) {
            if a.at_ms > now {
                break;
            }
            let action = a.action.clone();
            self.next_action += 1;
            if let Some(sent) = self.act(&action, now) {
                out.push(sent);
            }
            if self.left {
                return out;
            }
        }
        if self.last_pose_ms.is_none_or(|t| now >= t + POSE_INTERVAL_MS) {
            self.last_pose_ms = Some(now);
            self.pose_tick += 1;
            let avatar = self.seated.as_ref().expect("active bots are seated").avatar(now, self.pose_tick);
            out.push(self.envelope(now, Body::Pose(avatar)));
        }
        out
    }

    fn act(&mut self, action: &Action, now: u64) -> Option<(Lane, String)> {
        let snap = self.last_snapshot.clone();
        let s = self.seated.as_mut().expect("active bots are seated");
        match action {
            Action::Start => return Some(self.envelope(now, Body::Start)),
            Action::Point { aim, hand } => {
                let at = s.resolve(aim, snap.as_ref())?;
                let at = s.display(at);
                let raised = s.raised();
                let m = s.hand_mut(*hand);
                m.ray_at = Some(at);
                m.track.retarget(raised, now);
            }
            Action::Touch { aim, hand } => {
                let at = s.resolve(aim, snap.as_ref())?;
                let at = s.display(at);
                let m = s.hand_mut(*hand);
                m.ray_at = None;
                m.track.retarget(at, now);
            }
            Action::Lower { hand } => {
                let hands = hand.map_or(Handedness::BOTH.to_vec(), |h| vec![h]);
                for h in hands {
                    let m = s.hand_mut(h);
                    m.ray_at = None;
                    let rest = m.rest;
                    m.track.retarget(rest, now);
                }
            }
            Action::Gaze(g) => {
                let at = match g {
                    Gaze::Seat(k) => s.frame.seat_position(*k) + (s.head_p - s.frame.seat_position(s.seat)),
                    Gaze::Point(p) => s.display(*p),
                };
                s.gaze.retarget(at, now);
            }
            Action::Grab { piece, hand } => {
                if let Some(at) = s.resolve(&Aim::Piece(piece.clone()), snap.as_ref()) {
                    let at = s.display(at);
                    let m = s.hand_mut(*hand);
                    m.ray_at = None;
                    m.track.retarget(at, now);
                }
                let o = snap
                    .as_ref()
                    .and_then(|sn| sn.pieces.iter().find(|v| &v.id == piece))
                    .map_or(Orientation::IDENTITY, |v| v.o);
                s.held.push((*hand, piece.clone(), o));
                let body = Body::Grab(Grab { piece: piece.clone(), hand: *hand });
                return Some(self.envelope(now, body));
            }
            Action::Rotate(o) => {
                if let Some(last) = s.held.last_mut() {
                    last.2 = *o;
                }
            }
            Action::Release(at) => {
                let (hand, piece, held_o) = s.held.pop()?;
                let shape = s.pieces.shape(&piece)?.clone();
                let (p, q) = match at {
                    ReleaseAt::Cell { offset, orientation } => {
                        let placement = Placement {
                            piece: piece.clone(),
                            orientation: orientation.unwrap_or(held_o),
                            offset: *offset,
                        };
                        Snapped::InCube(placement).pose(&shape, &s.geom)
                    }
                    ReleaseAt::Table { p, orientation } => (*p, orientation.unwrap_or(held_o).rotation().to_quat()),
                };
                let p = s.display(p).quantized();
                let q = s.display_quat(q);
                let m = s.hand_mut(hand);
                m.ray_at = None;
                m.track.retarget(p, now);
                return Some(self.envelope(now, Body::Release(Release { p, q })));
            }
            Action::Idle => {}
            Action::Leave => {
                self.status = BotStatus::Left;
                self.left = true;
                return Some(self.envelope(now, Body::Bye));
            }
        }
        None
    }

    /// Canonical table geometry from the welcome message.
    pub fn table(&self) -> Option<TableInfo> {
        self.seated.as_ref().map(|s| TableInfo::new(&s.frame, &s.geom))
    }
}

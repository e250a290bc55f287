//! Distortion triggers and the per-viewer render model.
//!
//! Everything here is a pure function of snapshot data, so clients can
//! compute their own view from the canonical state the server publishes.

use serde::{Deserialize, Serialize};

use super::{AvatarEntry, ClientId, HandState, Pose, SessionError};
use crate::geometry::{
    arm_spline, from_canonical, from_canonical_dir, mirror_arm, point_in_box, ray_box, seat_angle, Aabb, Condition,
    Handedness, Quat, Ray, SeatIndex, SplineArm, TableFrame, Vec3,
};

/// Lateral distance from the head center to each shoulder.
pub const SHOULDER_LATERAL: f64 = 0.18;
/// Drop from the head center to the shoulders.
pub const SHOULDER_DROP: f64 = 0.25;
/// Radius of the head sphere used for gaze raycasts.
pub const HEAD_RADIUS: f64 = 0.12;

/// Shoulder position for `arm`, offset from the head in its yaw frame.
pub fn shoulder_anchor(head: &Pose, arm: Handedness) -> Vec3 {
    let f = head.forward().horizontal();
    let right = f.normalized().map(|f| Vec3::new(-f.z, 0.0, f.x)).unwrap_or(Vec3::X);
    let side = match arm {
        Handedness::Left => -SHOULDER_LATERAL,
        Handedness::Right => SHOULDER_LATERAL,
    };
    head.p + right * side - Vec3::Y * SHOULDER_DROP
}

/// Reference point for one hand (canonical frame), or `None` when its
/// distortion is inactive.
///
/// A ray that hits one of `targets` at a point inside the workspace wins;
/// otherwise a hand inside the workspace references its own position.
/// Always `None` under the veridical condition.
pub fn reference_point(hand: &HandState, condition: Condition, frame: &TableFrame, targets: &[Aabb]) -> Option<Vec3> {
    if condition == Condition::Veridical {
        return None;
    }
    if hand.ray {
        if let Ok(ray) = Ray::new(hand.p, hand.ray_dir) {
            let hit = targets
                .iter()
                .filter_map(|b| ray_box(&ray, b))
                .map(|t| ray.at(t))
                .filter(|p| point_in_box(*p, &frame.workspace_bounds))
                .min_by(|a, b| a.distance(hand.p).total_cmp(&b.distance(hand.p)));
            if hit.is_some() {
                return hit;
            }
        }
    }
    point_in_box(hand.p, &frame.workspace_bounds).then_some(hand.p)
}

/// Whether one hand's distortion is active.
pub fn distortion_trigger(hand: &HandState, condition: Condition, frame: &TableFrame, targets: &[Aabb]) -> bool {
    reference_point(hand, condition, frame, targets).is_some()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderedHand {
    /// The remote hand this describes.
    pub source: Handedness,
    /// The arm it is drawn on.
    pub arm: Handedness,
    /// Hand (or reference) position in the viewer's displayed frame.
    pub position: Vec3,
    pub q: Quat,
    /// Ray direction in the viewer's frame when the ray is on.
    pub ray: Option<Vec3>,
    pub distorted: bool,
    /// Stretched arm toward the reference point; absent when undistorted or degenerate.
    pub spline: Option<SplineArm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderedAvatar {
    pub client: ClientId,
    pub seat: SeatIndex,
    /// Head at the remote user's true seat.
    pub head: Pose,
    pub mirrored: bool,
    pub left: RenderedHand,
    pub right: RenderedHand,
}

impl RenderedAvatar {
    pub fn hand(&self, h: Handedness) -> &RenderedHand {
        match h {
            Handedness::Left => &self.left,
            Handedness::Right => &self.right,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderModel {
    pub viewer: ClientId,
    pub seat: SeatIndex,
    pub avatars: Vec<RenderedAvatar>,
}

fn rotate_quat(q: Quat, seat: SeatIndex, condition: Condition) -> Quat {
    match condition {
        Condition::Veridical => q,
        Condition::Sparc => seat_angle(seat).to_quat().compose(q),
    }
}

fn render_hand(
    entry: &AvatarEntry,
    source: Handedness,
    mirrored: bool,
    viewer_seat: SeatIndex,
    condition: Condition,
    frame: &TableFrame,
    samples: usize,
) -> RenderedHand {
    let hand = match source {
        Handedness::Left => &entry.left,
        Handedness::Right => &entry.right,
    };
    let arm = if mirrored { mirror_arm(source) } else { source };
    let (position, q, ray_dir) = match condition {
        Condition::Veridical => (hand.p, hand.q, hand.ray_dir),
        Condition::Sparc => (
            from_canonical(hand.p, entry.seat, condition, frame),
            rotate_quat(hand.q, entry.seat, condition),
            from_canonical_dir(hand.ray_dir, entry.seat, condition, frame),
        ),
    };
    let ray = hand.ray.then_some(ray_dir);
    match entry.refs.get(source).filter(|_| condition == Condition::Sparc) {
        Some(r) => {
            let target = from_canonical(r, viewer_seat, condition, frame);
            let spline = arm_spline(shoulder_anchor(&entry.head, arm), target, samples).ok();
            RenderedHand { source, arm, position: target, q, ray, distorted: true, spline }
        }
        None => RenderedHand { source, arm, position, q, ray, distorted: false, spline: None },
    }
}

/// What `viewer` should draw for every other participant.
pub fn render_model(
    viewer: ClientId,
    entries: &[AvatarEntry],
    condition: Condition,
    frame: &TableFrame,
    samples: usize,
) -> Result<RenderModel, SessionError> {
    let me = entries.iter().find(|e| e.client == viewer).ok_or(SessionError::UnknownClient(viewer))?;
    let avatars = entries
        .iter()
        .filter(|e| e.client != viewer)
        .map(|e| {
            let mirrored = condition == Condition::Sparc && e.refs.any();
            RenderedAvatar {
                client: e.client,
                seat: e.seat,
                head: e.head,
                mirrored,
                left: render_hand(e, Handedness::Left, mirrored, me.seat, condition, frame, samples),
                right: render_hand(e, Handedness::Right, mirrored, me.seat, condition, frame, samples),
            }
        })
        .collect();
    Ok(RenderModel { viewer, seat: me.seat, avatars })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DEFAULT_SPLINE_SAMPLES;
    use crate::session::{HandRefs, Role};

    fn hand(p: Vec3, ray: Option<Vec3>) -> HandState {
        HandState { p, q: Quat::IDENTITY, ray: ray.is_some(), ray_dir: ray.unwrap_or(Vec3::X), grab: None }
    }

    fn frame() -> TableFrame {
        TableFrame::default()
    }

    fn piece_box() -> Aabb {
        Aabb::new(Vec3::new(0.3, 0.75, -0.03), Vec3::new(0.36, 0.81, 0.03))
    }

    #[test]
    fn shoulders_sit_beside_and_below_the_head() {
        let head = Pose { p: Vec3::new(0.0, 1.2, 0.9), q: Quat::IDENTITY };
        assert_eq!(shoulder_anchor(&head, Handedness::Right), Vec3::new(0.18, 0.95, 0.9));
        assert_eq!(shoulder_anchor(&head, Handedness::Left), Vec3::new(-0.18, 0.95, 0.9));
        // turned to face +x: right side is +z
        let turned = Pose { p: head.p, q: Quat::from_yaw_deg(-90.0) };
        let r = shoulder_anchor(&turned, Handedness::Right);
        assert!((r - Vec3::new(0.0, 0.95, 1.08)).norm() < 1e-12, "{r:?}");
    }

    #[test]
    fn ray_hit_beats_hand_position() {
        let f = frame();
        let h = hand(Vec3::new(0.0, 0.78, 0.0), Some(Vec3::X));
        let r = reference_point(&h, Condition::Sparc, &f, &[piece_box()]).unwrap();
        assert!((r - Vec3::new(0.3, 0.78, 0.0)).norm() < 1e-12, "{r:?}");
    }

    #[test]
    fn veridical_never_triggers() {
        let h = hand(Vec3::new(0.0, 0.9, 0.0), Some(Vec3::X));
        assert!(!distortion_trigger(&h, Condition::Veridical, &frame(), &[piece_box()]));
    }

    fn entry(client: u32, seat: u8, refs: HandRefs) -> AvatarEntry {
        let f = frame();
        let s = SeatIndex::new(seat).unwrap();
        let p = f.seat_position(s) + Vec3::Y * 0.45;
        AvatarEntry {
            client: ClientId(client),
            name: format!("c{client}"),
            seat: s,
            role: if seat == 0 { Role::Assembler } else { Role::Instructor(seat) },
            tick: 0,
            head: Pose { p, q: Quat::looking_along(f.center - p) },
            left: hand(Vec3::new(0.7, 0.7, 0.2), None),
            right: hand(Vec3::new(0.7, 0.7, -0.2), None),
            refs,
        }
    }

    #[test]
    fn veridical_passes_states_through() {
        let f = frame();
        let es = [entry(1, 0, HandRefs::default()), entry(2, 4, HandRefs::default())];
        let m = render_model(ClientId(1), &es, Condition::Veridical, &f, DEFAULT_SPLINE_SAMPLES).unwrap();
        assert_eq!(m.avatars.len(), 1);
        let a = &m.avatars[0];
        assert!(!a.mirrored);
        assert_eq!(a.head, es[1].head);
        assert_eq!(a.left.position, es[1].left.p);
        assert_eq!(a.right.arm, Handedness::Right);
        assert!(a.left.spline.is_none() && a.right.spline.is_none());
    }

    #[test]
    fn opposite_seat_reference_uses_left_arm() {
        let f = frame();
        let q = Vec3::new(0.1, 0.8, 0.05);
        let es = [entry(1, 0, HandRefs::default()), entry(2, 4, HandRefs { left: None, right: Some(q) })];
        let m = render_model(ClientId(1), &es, Condition::Sparc, &f, DEFAULT_SPLINE_SAMPLES).unwrap();
        let a = &m.avatars[0];
        assert!(a.mirrored);
        assert_eq!(a.right.arm, Handedness::Left);
        assert_eq!(a.right.position, from_canonical(q, SeatIndex::ASSEMBLER, Condition::Sparc, &f));
        let spline = a.right.spline.as_ref().unwrap();
        assert_eq!(spline.shoulder, shoulder_anchor(&es[1].head, Handedness::Left));
        assert_eq!(*spline.samples.last().unwrap(), a.right.position);
        assert!(!a.left.distorted);
    }

    #[test]
    fn unknown_viewer() {
        let es = [entry(1, 0, HandRefs::default())];
        assert_eq!(
            render_model(ClientId(9), &es, Condition::Sparc, &frame(), 4),
            Err(SessionError::UnknownClient(ClientId(9)))
        );
    }
}

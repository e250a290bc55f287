mod common;

use proptest::prelude::*;

use common::*;
use sparc_core::geometry::{
    from_canonical, map_reference, seat_angle, to_canonical, to_canonical_dir, Condition, Handedness, Quat,
    RotationY, SeatIndex, TableFrame, Vec3,
};
use sparc_core::puzzle::{pose_for_placement, snap_pose, Orientation, Placement, Snapped};
use sparc_core::session::{replay, write_log, Session};

fn arb_seat() -> impl Strategy<Value = SeatIndex> {
    (0u8..8).prop_map(|i| SeatIndex::new(i).unwrap())
}

fn arb_condition() -> impl Strategy<Value = Condition> {
    prop_oneof![Just(Condition::Sparc), Just(Condition::Veridical)]
}

fn arb_point() -> impl Strategy<Value = Vec3> {
    (-2.0f64..2.0, 0.0f64..2.0, -2.0f64..2.0).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn arb_quat() -> impl Strategy<Value = Quat> {
    (arb_point(), -7.0f64..7.0).prop_map(|(axis, angle)| {
        Quat::from_axis_angle(axis.normalized().unwrap_or(Vec3::Y), angle)
    })
}

fn arb_frame() -> impl Strategy<Value = TableFrame> {
    (-1.0f64..1.0, 0.5f64..1.0, -1.0f64..1.0, 0.0f64..360.0).prop_map(|(x, y, z, yaw)| {
        let center = Vec3::new(x, y, z);
        let half = Vec3::new(0.6, 0.0, 0.6);
        let bounds = sparc_core::geometry::Aabb::new(center - half, center + half + Vec3::Y * 0.4);
        let dir = RotationY::from_degrees(yaw).rotate(Vec3::X);
        TableFrame::new(center, bounds, 0.9, Vec3::new(dir.x, 0.0, dir.z).normalized().unwrap()).unwrap()
    })
}

fn close(a: Vec3, b: Vec3, tol: f64) -> bool {
    (a - b).norm() <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn references_survive_remapping(q in arb_point(), ru in arb_seat(), lu in arb_seat(),
                                    c in arb_condition(), f in arb_frame()) {
        let shown_to_ru = from_canonical(q, ru, c, &f);
        let mapped = map_reference(shown_to_ru, ru, lu, c, &f);
        prop_assert!(close(mapped, from_canonical(q, lu, c, &f), 1e-9));
    }

    #[test]
    fn canonical_round_trip(p in arb_point(), s in arb_seat(), c in arb_condition(), f in arb_frame()) {
        prop_assert!(close(to_canonical(from_canonical(p, s, c, &f), s, c, &f), p, 1e-12));
        prop_assert!(close(from_canonical(to_canonical(p, s, c, &f), s, c, &f), p, 1e-12));
    }

    #[test]
    fn mapping_composes(p in arb_point(), a in arb_seat(), b in arb_seat(), d in arb_seat(), f in arb_frame()) {
        let c = Condition::Sparc;
        let two_steps = map_reference(map_reference(p, a, b, c, &f), b, d, c, &f);
        prop_assert!(close(two_steps, map_reference(p, a, d, c, &f), 1e-9));
        // and back again is the identity
        prop_assert!(close(map_reference(map_reference(p, a, b, c, &f), b, a, c, &f), p, 1e-9));
    }

    #[test]
    fn mapping_preserves_distances(p in arb_point(), r in arb_point(), a in arb_seat(), b in arb_seat(),
                                   f in arb_frame()) {
        let c = Condition::Sparc;
        let d0 = p.distance(r);
        let d1 = map_reference(p, a, b, c, &f).distance(map_reference(r, a, b, c, &f));
        prop_assert!((d0 - d1).abs() < 1e-9);
        prop_assert!((map_reference(p, a, b, c, &f).y - p.y).abs() < 1e-12);
    }

    #[test]
    fn every_seat_faces_the_assembler_side(s in arb_seat(), f in arb_frame()) {
        let own = f.seat_direction(s);
        prop_assert!(close(to_canonical_dir(own, s, Condition::Sparc, &f), f.assembler_dir, 1e-9));
    }

    #[test]
    fn seat_angles_add(a in arb_seat(), b in arb_seat(), p in arb_point()) {
        let sum = SeatIndex::new((a.index() + b.index()) % 8).unwrap();
        let composed = seat_angle(a).then(seat_angle(b)).rotate(p);
        prop_assert!(close(composed, seat_angle(sum).rotate(p), 1e-12));
        prop_assert!(close(seat_angle(a).inverse().rotate(seat_angle(a).rotate(p)), p, 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn snapping_is_idempotent(k in 0usize..13, p in arb_point(), q in arb_quat()) {
        let set = bedlam();
        let geom = session(Condition::Sparc).geometry().to_owned();
        let shape = &set.shapes()[k];
        let first = snap_pose(shape, p, q, &geom);
        let (p2, q2) = first.pose(shape, &geom);
        prop_assert_eq!(snap_pose(shape, p2, q2, &geom), first.clone());
        // a small nudge does not change the result either
        let nudged = snap_pose(shape, p2 + Vec3::new(0.01, -0.01, 0.012), Quat::from_yaw_deg(5.0).compose(q2), &geom);
        prop_assert_eq!(nudged, first);
    }

    #[test]
    fn placements_snap_to_themselves(k in 0usize..13, o in 0u8..24, x in 0i32..4, y in 0i32..4, z in 0i32..4) {
        let set = bedlam();
        let geom = session(Condition::Sparc).geometry().to_owned();
        let shape = &set.shapes()[k];
        let placement = Placement { piece: shape.id.clone(), orientation: Orientation::new(o).unwrap(), offset: [x, y, z] };
        let (p, q) = pose_for_placement(shape, &placement, &geom);
        let snapped = snap_pose(shape, p, q, &geom);
        let inside = placement.cells(shape).iter().all(|c| c.iter().all(|v| (0..4).contains(v)));
        match snapped {
            Snapped::InCube(got) => {
                prop_assert!(inside);
                let mut a = got.cells(shape);
                let mut b = placement.cells(shape);
                a.sort();
                b.sort();
                prop_assert_eq!(a, b);
            }
            Snapped::OnTable(_) => prop_assert!(!inside),
        }
    }
}

#[derive(Debug, Clone)]
enum Cmd {
    Grab(usize, bool),
    ReleaseTarget,
    ReleaseAt(Vec3, Quat),
    Pose(Vec3, bool),
    Gaze(u8),
    Tick(u64),
}

fn arb_cmd() -> impl Strategy<Value = Cmd> {
    prop_oneof![
        3 => (0usize..13, any::<bool>()).prop_map(|(k, left)| Cmd::Grab(k, left)),
        3 => Just(Cmd::ReleaseTarget),
        2 => (arb_point(), arb_quat()).prop_map(|(p, q)| Cmd::ReleaseAt(p, q)),
        2 => (arb_point(), any::<bool>()).prop_map(|(p, ray)| Cmd::Pose(p, ray)),
        1 => (0u8..3).prop_map(Cmd::Gaze),
        2 => (1u64..500).prop_map(Cmd::Tick),
    ]
}

fn run(cmds: &[Cmd], condition: Condition) -> Session {
    let mut s = trio(condition);
    let mut tick = 30;
    let mut clock = 1000;
    let mut pose_tick = 1;
    let clients = [ASSEMBLER, INSTR_A, INSTR_B];
    for (i, cmd) in cmds.iter().enumerate() {
        let who = clients[i % 3];
        match cmd {
            Cmd::Grab(k, left) => {
                let id = s.pieces().shapes()[*k].id.clone();
                let hand = if *left { Handedness::Left } else { Handedness::Right };
                let _ = s.grab(ASSEMBLER, &id, hand);
            }
            Cmd::ReleaseTarget => {
                if let Some(t) = s.target().cloned() {
                    let held = s.state().grabs.last().map(|g| g.2.clone());
                    if held.as_deref() == Some(t.piece.as_str()) {
                        let (p, q) = release_pose(&s, ASSEMBLER, &t);
                        let _ = s.release(ASSEMBLER, p, q);
                        continue;
                    }
                }
                let _ = s.release(ASSEMBLER, Vec3::new(0.0, 0.9, 0.0), Quat::IDENTITY);
            }
            Cmd::ReleaseAt(p, q) => {
                let _ = s.release(ASSEMBLER, *p, *q);
            }
            Cmd::Pose(p, ray) => {
                pose_tick += 1;
                let a = avatar_with(&s, who, pose_tick, |a| {
                    a.right.p = *p;
                    a.right.ray = *ray;
                    a.right.ray_dir = (s.frame().center - *p).normalized().unwrap_or(Vec3::X);
                });
                let _ = s.update_pose(who, a);
            }
            Cmd::Gaze(k) => {
                pose_tick += 1;
                let target = s.client(clients[*k as usize]).unwrap().seat;
                let at = s.frame().seat_position(target) + Vec3::Y * 0.45;
                let a = avatar_with(&s, who, pose_tick, |a| {
                    a.head.q = Quat::looking_along(at - a.head.p);
                });
                let _ = s.update_pose(who, a);
            }
            Cmd::Tick(dt) => {
                tick += 1;
                clock += dt;
                s.set_time(tick, clock);
                s.sample_eye_contact(*dt);
            }
        }
        let m = s.metrics();
        assert_eq!(m.total_moves, m.total_errors + m.attempts);
        assert!(m.correct_placements <= 13);
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counters_and_replay_hold_for_any_command_order(
        cmds in prop::collection::vec(arb_cmd(), 1..120),
        sparc in any::<bool>(),
    ) {
        let condition = if sparc { Condition::Sparc } else { Condition::Veridical };
        let s = run(&cmds, condition);
        let st = s.state();
        prop_assert_eq!(st.correct as usize, st.cursor);
        prop_assert_eq!(st.grid.filled(), st.sequence[..st.cursor].iter()
            .map(|p| s.pieces().shape(&p.piece).unwrap().len()).sum::<usize>());
        let log = write_log(s.log());
        let r = replay(&log).unwrap();
        prop_assert_eq!(r.metrics, s.metrics());
        prop_assert_eq!(write_log(r.session.log()), log);
    }
}

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use sparc_core::puzzle::{
    count_solutions, load_piece_set, orientations_of, piece_set_to_text, snap_pose, solve, PieceSet, PuzzleGeometry,
    Snapped, DEFAULT_CELL_SIZE,
};
use sparc_core::TableFrame;

fn load(name: &str) -> PieceSet {
    let path = format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"));
    load_piece_set(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn bedlam_structure() {
    let set = load("bedlam.txt");
    assert_eq!(set.len(), 13);
    assert_eq!(set.total_cells(), 64);
    assert_eq!(set.dim(), 4);
    // no two pieces are congruent under rotation
    let mut forms = BTreeSet::new();
    for s in set.shapes() {
        let canon = orientations_of(s).into_iter().map(|o| o.cells).min().unwrap();
        assert!(forms.insert(canon), "piece {} duplicates another", s.id);
    }
}

#[test]
fn bedlam_homes_rest_on_the_table() {
    let set = load("bedlam.txt");
    let frame = TableFrame::default();
    let geom = PuzzleGeometry::centered(&frame, 4, DEFAULT_CELL_SIZE);
    for s in set.shapes() {
        let home = set.home(&s.id).unwrap_or_else(|| panic!("piece {} has no home", s.id));
        let snapped = snap_pose(s, home.position, home.orientation.rotation().to_quat(), &geom);
        assert!(matches!(snapped, Snapped::OnTable(_)), "piece {} homes inside the frame", s.id);
        assert!(sparc_core::geometry::point_in_box(home.position, &frame.workspace_bounds));
    }
}

#[test]
fn text_round_trip_is_exact() {
    for name in ["bedlam.txt", "mini2.txt"] {
        let set = load(name);
        let again = load_piece_set(&piece_set_to_text(&set)).unwrap();
        assert_eq!(again, set);
        assert_eq!(piece_set_to_text(&again), piece_set_to_text(&set));
    }
}

#[test]
fn bedlam_first_tiling_within_a_minute() {
    let set = load("bedlam.txt");
    let t0 = Instant::now();
    let sols = solve(&set, 4, 1).unwrap();
    assert!(t0.elapsed() < Duration::from_secs(60));
    assert_eq!(sols.len(), 1);
    sols[0].validate(&set).unwrap();
    assert_eq!(sols[0].placements.len(), 13);
}

#[test]
fn mini_set_count() {
    assert_eq!(count_solutions(&load("mini2.txt"), 2).unwrap(), 6);
}

#[test]
#[ignore = "enumerates every tiling; long running"]
fn bedlam_has_many_tilings() {
    let n = count_solutions(&load("bedlam.txt"), 4).unwrap();
    println!("tilings: {n}");
    assert!(n > 19_000, "only {n} tilings");
}

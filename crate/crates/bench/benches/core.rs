use criterion::{black_box, criterion_group, criterion_main, Criterion};

use sparc_bench::{bedlam, header, running_session, snapshot_text};
use sparc_core::geometry::{from_canonical, map_reference, Condition, Quat, SeatIndex, TableFrame, Vec3};
use sparc_core::net::{decode, default_scripts, simulate, SimConfig};
use sparc_core::puzzle::{snap_pose, solve};
use sparc_core::session::{ClientId, Session};

fn geometry(c: &mut Criterion) {
    let frame = TableFrame::default();
    let seats: Vec<SeatIndex> = SeatIndex::all().collect();
    let p = Vec3::new(0.12, 0.9, -0.07);
    c.bench_function("map_reference 64 seat pairs", |b| {
        b.iter(|| {
            let mut acc = Vec3::ZERO;
            for &ru in &seats {
                for &lu in &seats {
                    acc = acc + map_reference(black_box(p), ru, lu, Condition::Sparc, &frame);
                }
            }
            acc
        })
    });
    c.bench_function("from_canonical", |b| {
        b.iter(|| from_canonical(black_box(p), seats[3], Condition::Sparc, &frame))
    });
}

fn puzzle(c: &mut Criterion) {
    let set = bedlam();
    c.bench_function("solve first tiling", |b| b.iter(|| solve(black_box(&set), 4, 1).unwrap()));
    let h = header(Condition::Sparc);
    let shape = &set.shapes()[5];
    let q = Quat::from_axis_angle(Vec3::new(0.3, 1.0, 0.2).normalized().unwrap(), 0.4);
    c.bench_function("snap_pose", |b| {
        b.iter(|| snap_pose(shape, black_box(Vec3::new(0.01, 0.8, 0.02)), q, &h.geometry))
    });
}

fn session(c: &mut Criterion) {
    let s = running_session(Condition::Sparc, 8);
    c.bench_function("render_model_for, 8 participants", |b| {
        b.iter(|| s.render_model_for(black_box(ClientId(2))).unwrap())
    });
    let mut s = running_session(Condition::Sparc, 8);
    c.bench_function("sample_eye_contact, 8 participants", |b| b.iter(|| s.sample_eye_contact(33)));
}

fn codec(c: &mut Criterion) {
    let text = snapshot_text(3);
    c.bench_function("decode snapshot", |b| b.iter(|| decode(black_box(&text)).unwrap()));
    let env = decode(&text).unwrap();
    c.bench_function("encode snapshot", |b| b.iter(|| sparc_core::net::encode(black_box(&env))));
}

fn sim(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulation");
    g.sample_size(10);
    g.bench_function("lossy trio to completion", |b| {
        b.iter(|| {
            let s = Session::new(header(Condition::Sparc)).unwrap();
            let scripts = default_scripts(&s.header().solution, 2);
            simulate(s, scripts, SimConfig::default())
        })
    });
    g.finish();
}

criterion_group!(benches, geometry, puzzle, session, codec, sim);
criterion_main!(benches);

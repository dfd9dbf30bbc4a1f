//! Exercises the crate strictly through its public surface.

use neargather_core::analysis::{build_graph, is_connected, GraphLabel};
use neargather_core::protocol::{aw, compute, gathering_compute};
use neargather_core::{
    AxisMode, ComputeOutcome, Point2, ProtocolParams, Snapshot, TieBreak,
};

fn params() -> ProtocolParams {
    ProtocolParams::derive(4.0, 3.5, 0.1, TieBreak::Horizontal, AxisMode::TwoAxes).unwrap()
}

#[test]
fn end_to_end_pair_converges_under_repeated_compute() {
    // Drive two robots by alternating full synchronous cycles using only
    // compute(); they must end within epsilon' without ever crossing.
    let p = params();
    let mut a = Point2::new(0.0, 0.0);
    let mut b = Point2::new(1.0, 0.0);
    for _ in 0..200 {
        let snap_a = Snapshot::new(vec![Point2::ORIGIN, b.sub(a)]);
        let snap_b = Snapshot::new(vec![Point2::ORIGIN, a.sub(b)]);
        let oa = compute(&snap_a, &p).unwrap();
        let ob = compute(&snap_b, &p).unwrap();
        let (da, db) = match (oa, ob) {
            (ComputeOutcome::Terminate, ComputeOutcome::Terminate) => break,
            (oa, ob) => (
                match oa {
                    ComputeOutcome::Move(d) => d,
                    _ => Point2::ORIGIN,
                },
                match ob {
                    ComputeOutcome::Move(d) => d,
                    _ => Point2::ORIGIN,
                },
            ),
        };
        a = a.add(da);
        b = b.add(db);
        assert!(a.x < b.x, "order preserved: {} vs {}", a.x, b.x);
        assert!(aw(a, b, &p));
    }
    assert!(b.sub(a).norm2() <= p.epsilon_prime);
    assert!(b.sub(a).norm2() > 0.0);
}

#[test]
fn graphs_over_a_moving_pair_stay_connected() {
    let p = params();
    let pts = [Point2::new(0.0, 0.0), Point2::new(3.4, 0.0)];
    assert!(is_connected(&build_graph(&pts, p.d, GraphLabel::J)));
    assert!(is_connected(&build_graph(
        &pts,
        p.v - p.rho / 2.0,
        GraphLabel::G
    )));
}

#[test]
fn gathering_keeps_moving_after_near_gather_would_stop() {
    let p = params();
    let snap = Snapshot::new(vec![Point2::ORIGIN, Point2::new(0.01, 0.02)]);
    assert_eq!(compute(&snap, &p).unwrap(), ComputeOutcome::Terminate);
    match gathering_compute(&snap, &p).unwrap() {
        ComputeOutcome::Move(d) => assert_eq!(d, Point2::new(0.01, 0.02)),
        other => panic!("unexpected {other:?}"),
    }
}

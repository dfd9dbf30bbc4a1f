//! Omniscient trace auditor: machine checks for every proved property of
//! the protocol, plus convergence metrics.
//!
//! The auditor is a pure function of the trace. Robot positions between a
//! robot's consecutive records are reconstructed by linear interpolation,
//! which is exact for single-leg moves (all non-scripted policies) and an
//! approximation across scripted pause legs.

use std::io::{self, Write};

use neargather_core::analysis::{build_graph, edges_connected, ell, is_connected, GraphLabel};
use neargather_core::geometry::{dist2, dist_inf, GEO_TOL_REL};
use neargather_core::protocol::ProtocolParams;
use neargather_core::Point2;
use serde::Serialize;
use thiserror::Error;

use crate::sim::{EventKind, ProtocolKind, TraceRecord};

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("malformed trace: {0}")]
    Malformed(String),
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub pass: bool,
    /// Index of the first offending trace record, when a check fails.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckResult {
    fn pass() -> Self {
        CheckResult {
            pass: true,
            witness: None,
            detail: None,
        }
    }

    fn not_applicable(reason: &str) -> Self {
        CheckResult {
            pass: true,
            witness: None,
            detail: Some(reason.into()),
        }
    }

    fn fail(&mut self, witness: usize, detail: String) {
        if self.pass {
            self.pass = false;
            self.witness = Some(witness);
            self.detail = Some(detail);
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AuditSummary {
    pub event_count: usize,
    pub all_terminated: bool,
    pub final_diameter: f64,
    /// Largest distance from a final position to the target corner `ell`
    /// (in the protocol's working frame).
    pub dist_to_ell: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AuditReport {
    /// (a) Minimum pairwise gap strictly positive over every interval.
    pub collision_free: CheckResult,
    /// (b) Intermediate distance graph G connected at every event time.
    pub g_connected: CheckResult,
    /// (c) Mutual awareness monotone, its graph connected, J contained at
    /// t = 0, and every mutually-aware pair within V - rho/2.
    pub mutual_awareness: CheckResult,
    /// (d) Per-robot coordinates non-decreasing; every move axis-aligned
    /// with displacement at most rho/4.
    pub coordinate_monotone: CheckResult,
    /// (e) Swarm-wide max-x and max-y constant; final positions inside the
    /// box with top-right corner ell.
    pub ell_constant: CheckResult,
    /// (f) Every terminating robot saw all n robots at its last Look.
    pub terminate_saw_all: CheckResult,
    /// (g) Final positions pairwise distinct inside a disk of radius
    /// epsilon (only meaningful when every robot terminated).
    pub final_disk: CheckResult,
    pub summary: AuditSummary,
}

impl AuditReport {
    pub fn all_pass(&self) -> bool {
        self.collision_free.pass
            && self.g_connected.pass
            && self.mutual_awareness.pass
            && self.coordinate_monotone.pass
            && self.ell_constant.pass
            && self.terminate_saw_all.pass
            && self.final_disk.pass
    }
}

/// Piecewise-linear position reconstruction per robot.
struct Timeline {
    /// (t, pos) knots per robot, starting with the initial position at 0.
    knots: Vec<Vec<(f64, Point2)>>,
}

impl Timeline {
    fn build(records: &[TraceRecord], initial: &[Point2]) -> Result<Self, AuditError> {
        let n = initial.len();
        let mut knots: Vec<Vec<(f64, Point2)>> =
            initial.iter().map(|&p| vec![(0.0, p)]).collect();
        let mut prev_t = 0.0;
        for (i, r) in records.iter().enumerate() {
            if r.robot >= n {
                return Err(AuditError::Malformed(format!(
                    "record {i} references unknown robot {}",
                    r.robot
                )));
            }
            if r.t < prev_t || !r.t.is_finite() {
                return Err(AuditError::Malformed(format!(
                    "record {i} breaks time ordering ({} after {prev_t})",
                    r.t
                )));
            }
            prev_t = r.t;
            knots[r.robot].push((r.t, Point2::new(r.pos[0], r.pos[1])));
        }
        Ok(Timeline { knots })
    }

    fn pos_at(&self, robot: usize, t: f64) -> Point2 {
        let ks = &self.knots[robot];
        // Index of the first knot strictly after t.
        let hi = ks.partition_point(|&(kt, _)| kt <= t);
        if hi == ks.len() {
            return ks[ks.len() - 1].1;
        }
        if hi == 0 {
            return ks[0].1;
        }
        let (t0, p0) = ks[hi - 1];
        let (t1, p1) = ks[hi];
        if t >= t1 || t1 == t0 {
            return p1;
        }
        let frac = (t - t0) / (t1 - t0);
        p0.add(p1.sub(p0).scale(frac))
    }

    fn positions_at(&self, t: f64) -> Vec<Point2> {
        (0..self.knots.len()).map(|r| self.pos_at(r, t)).collect()
    }

    fn final_positions(&self) -> Vec<Point2> {
        self.knots.iter().map(|ks| ks[ks.len() - 1].1).collect()
    }
}

/// Tolerant variant of the mutual-awareness relation used by the checker.
fn aw_tol(p: Point2, q: Point2, params: &ProtocolParams, tol: f64) -> bool {
    dist2(p, q) <= params.v - params.rho / 2.0 + tol
        && dist_inf(p, q) <= params.v - params.rho + tol
}

fn diameter(pts: &[Point2]) -> f64 {
    let mut max = 0.0f64;
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            max = max.max(dist2(*p, *q));
        }
    }
    max
}

fn circumcircle(a: Point2, b: Point2, c: Point2) -> Option<(Point2, f64)> {
    let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    if d == 0.0 {
        return None;
    }
    let a2 = a.norm2_sq();
    let b2 = b.norm2_sq();
    let c2 = c.norm2_sq();
    let ux = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
    let uy = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
    let center = Point2::new(ux, uy);
    Some((center, dist2(center, a)))
}

/// Radius of the smallest disk containing all points: brute force over
/// diametral pairs and circumcircles (n is small).
pub fn min_enclosing_radius(pts: &[Point2]) -> f64 {
    if pts.len() <= 1 {
        return 0.0;
    }
    // Boundary points of a candidate circle can round marginally outside
    // it; the slack is negligible against the epsilon acceptance bound.
    let slack = 1.0 + 1e-9;
    let contains_all = |center: Point2, radius: f64| {
        pts.iter().all(|p| dist2(center, *p) <= radius * slack)
    };
    let mut best = f64::INFINITY;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            let center = a.add(*b).scale(0.5);
            let radius = dist2(center, *a);
            if radius < best && contains_all(center, radius) {
                best = radius;
            }
        }
    }
    for (i, a) in pts.iter().enumerate() {
        for (j, b) in pts.iter().enumerate().skip(i + 1) {
            for c in &pts[j + 1..] {
                if let Some((center, radius)) = circumcircle(*a, *b, *c) {
                    if radius < best && contains_all(center, radius) {
                        best = radius;
                    }
                }
            }
        }
    }
    best
}

/// Audit a complete trace against every checkable property. For OneAxis
/// runs the frame-dependent checks (monotonicity, axis alignment, ell)
/// are performed in the protocol's rotated working frame.
pub fn audit_trace(
    records: &[TraceRecord],
    initial: &[Point2],
    params: &ProtocolParams,
    protocol: ProtocolKind,
) -> Result<AuditReport, AuditError> {
    let n = initial.len();
    let timeline = Timeline::build(records, initial)?;
    let tol = GEO_TOL_REL * params.v;
    // Collision criterion: strictly positive gap. A computed gap of zero
    // can only arise from bitwise-equal positions (the difference of
    // nearby doubles is exact), while correct runs can drive true gaps
    // below any fixed positive floor (a robot halving its distance to a
    // blocked neighbor while a far pair keeps the swarm active).
    let collision_floor = 0.0;
    let frame = |p: Point2| -> Point2 {
        if protocol == ProtocolKind::OneAxis {
            p.rotate_cw45()
        } else {
            p
        }
    };

    let mut collision_free = CheckResult::pass();
    let mut g_connected = CheckResult::pass();
    let mut mutual_awareness = CheckResult::pass();
    let mut coordinate_monotone = CheckResult::pass();
    let mut ell_constant = CheckResult::pass();
    let mut terminate_saw_all = CheckResult::pass();

    // Frame-dependent reference quantities from the initial configuration.
    let initial_f: Vec<Point2> = initial.iter().map(|&p| frame(p)).collect();
    let ell_f = ell(&initial_f);

    // Awareness ledger: directed flags, recomputed at each robot's Look.
    // The infinity-norm half of AW is frame-dependent, so the relation is
    // evaluated in the protocol's working frame.
    let mut aw_flags = vec![false; n * n];
    for r in 0..n {
        for s in 0..n {
            if r != s {
                aw_flags[r * n + s] = aw_tol(initial_f[r], initial_f[s], params, tol);
            }
        }
    }
    let mutual_edges = |flags: &[bool]| -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for r in 0..n {
            for s in r + 1..n {
                if flags[r * n + s] && flags[s * n + r] {
                    edges.push((r, s));
                }
            }
        }
        edges
    };
    let mut mutual_prev: Vec<(usize, usize)> = mutual_edges(&aw_flags);
    // J must be contained in the initial mutual-awareness graph.
    let j0 = build_graph(initial, params.d, GraphLabel::J);
    for &(r, s) in &j0.edges {
        if !mutual_prev.contains(&(r, s)) {
            mutual_awareness.fail(0, format!("J edge ({r},{s}) not mutually aware at t=0"));
        }
    }

    let mut last_pos_f: Vec<Point2> = initial_f.clone();
    let mut last_look_count: Vec<usize> = vec![n; n];
    let mut pending_move: Vec<Option<(Point2, Point2)>> = vec![None; n];
    let g_threshold = params.v - params.rho / 2.0 + tol;

    for (i, rec) in records.iter().enumerate() {
        // (a) interval gap monitor.
        if let Some(gap) = rec.min_pair_gap_since_last {
            if gap <= collision_floor {
                collision_free.fail(
                    i,
                    format!("gap {gap} at t={} (robots within the collision floor)", rec.t),
                );
            }
        }

        let positions = timeline.positions_at(rec.t);

        // (b) intermediate graph connectivity.
        if !is_connected(&build_graph(&positions, g_threshold, GraphLabel::G)) {
            g_connected.fail(i, format!("G disconnected at t={}", rec.t));
        }

        // (c) awareness ledger replay.
        if rec.event == EventKind::Look {
            let looker = rec.robot;
            let looker_f = frame(positions[looker]);
            for s in 0..n {
                if s != looker {
                    aw_flags[looker * n + s] = aw_tol(looker_f, frame(positions[s]), params, tol);
                }
            }
            let reach = params.v * (1.0 + GEO_TOL_REL);
            last_look_count[looker] = positions
                .iter()
                .filter(|p| dist2(**p, positions[looker]) <= reach)
                .count();
        }
        let mutual_now = mutual_edges(&aw_flags);
        // Both lists are lexicographically sorted by construction; check
        // mutual_prev is a subset with a merge walk.
        {
            let mut it = mutual_now.iter();
            for pair in &mutual_prev {
                if !it.any(|e| e == pair) {
                    mutual_awareness.fail(
                        i,
                        format!("pair {pair:?} lost mutual awareness at t={}", rec.t),
                    );
                    break;
                }
            }
        }
        if !edges_connected(n, &mutual_now) {
            mutual_awareness.fail(i, format!("awareness graph disconnected at t={}", rec.t));
        }
        for &(r, s) in &mutual_now {
            if dist2(positions[r], positions[s]) > params.v - params.rho / 2.0 + tol {
                mutual_awareness.fail(
                    i,
                    format!("mutually aware pair ({r},{s}) beyond V-rho/2 at t={}", rec.t),
                );
            }
        }
        mutual_prev = mutual_now;

        // (d) per-robot monotone coordinates and move geometry.
        let pos_f = frame(Point2::new(rec.pos[0], rec.pos[1]));
        let prev = last_pos_f[rec.robot];
        if pos_f.x < prev.x - tol || pos_f.y < prev.y - tol {
            coordinate_monotone.fail(
                i,
                format!("robot {} coordinate decreased at t={}", rec.robot, rec.t),
            );
        }
        last_pos_f[rec.robot] = pos_f;
        match rec.event {
            EventKind::MoveStart => {
                let dest = rec.dest.ok_or_else(|| {
                    AuditError::Malformed(format!("record {i}: MoveStart without dest"))
                })?;
                let dest_f = frame(Point2::new(dest[0], dest[1]));
                let dp = dest_f.sub(pos_f);
                if dp.x.abs().min(dp.y.abs()) > tol {
                    coordinate_monotone.fail(
                        i,
                        format!("robot {} move not axis-aligned at t={}", rec.robot, rec.t),
                    );
                }
                if dp.norm2() > params.rho / 4.0 + tol {
                    coordinate_monotone.fail(
                        i,
                        format!("robot {} move longer than rho/4 at t={}", rec.robot, rec.t),
                    );
                }
                pending_move[rec.robot] = Some((pos_f, dest_f));
            }
            EventKind::MoveEnd | EventKind::MoveInterrupt => {
                if let Some((start, dest)) = pending_move[rec.robot].take() {
                    // Landing must lie on the planned segment.
                    let lo = Point2::new(start.x.min(dest.x), start.y.min(dest.y));
                    let hi = Point2::new(start.x.max(dest.x), start.y.max(dest.y));
                    if pos_f.x < lo.x - tol
                        || pos_f.x > hi.x + tol
                        || pos_f.y < lo.y - tol
                        || pos_f.y > hi.y + tol
                    {
                        coordinate_monotone.fail(
                            i,
                            format!("robot {} landed off its segment at t={}", rec.robot, rec.t),
                        );
                    }
                }
            }
            EventKind::Terminate => {
                // (f) the terminating robot saw the whole swarm.
                if last_look_count[rec.robot] != n {
                    terminate_saw_all.fail(
                        i,
                        format!(
                            "robot {} terminated after seeing only {} of {n} robots",
                            rec.robot, last_look_count[rec.robot]
                        ),
                    );
                }
            }
            _ => {}
        }

        // (e) extrema constancy in the working frame.
        let swarm_f: Vec<Point2> = positions.iter().map(|&p| frame(p)).collect();
        let extrema = ell(&swarm_f);
        if (extrema.x - ell_f.x).abs() > tol || (extrema.y - ell_f.y).abs() > tol {
            ell_constant.fail(
                i,
                format!("swarm extrema drifted from ell at t={}", rec.t),
            );
        }
    }

    let final_positions = timeline.final_positions();
    let final_f: Vec<Point2> = final_positions.iter().map(|&p| frame(p)).collect();
    for (r, p) in final_f.iter().enumerate() {
        if p.x > ell_f.x + tol || p.y > ell_f.y + tol {
            ell_constant.fail(
                records.len().saturating_sub(1),
                format!("robot {r} ended outside the box with corner ell"),
            );
        }
    }

    let mut terminated = vec![false; n];
    for rec in records {
        if rec.event == EventKind::Terminate {
            terminated[rec.robot] = true;
        }
    }
    let all_terminated = terminated.iter().all(|&t| t);

    let final_disk = if all_terminated {
        let mut check = CheckResult::pass();
        for (r, p) in final_positions.iter().enumerate() {
            for (s, q) in final_positions.iter().enumerate().skip(r + 1) {
                if dist2(*p, *q) <= collision_floor {
                    check.fail(
                        records.len().saturating_sub(1),
                        format!("robots {r} and {s} coincide at the end"),
                    );
                }
            }
        }
        let radius = min_enclosing_radius(&final_positions);
        if radius > params.epsilon + tol {
            check.fail(
                records.len().saturating_sub(1),
                format!("final enclosing radius {radius} exceeds epsilon"),
            );
        }
        check
    } else {
        CheckResult::not_applicable("not all robots terminated")
    };

    let dist_to_ell = final_f
        .iter()
        .fold(0.0f64, |m, p| m.max(dist2(*p, ell_f)));

    Ok(AuditReport {
        collision_free,
        g_connected,
        mutual_awareness,
        coordinate_monotone,
        ell_constant,
        terminate_saw_all,
        final_disk,
        summary: AuditSummary {
            event_count: records.len(),
            all_terminated,
            final_diameter: diameter(&final_positions),
            dist_to_ell,
        },
    })
}

/// Convergence metrics sampled at every trace record:
/// `t,diameter,maxX,maxY,activeRobots`.
pub fn write_metrics_csv<W: Write>(
    records: &[TraceRecord],
    initial: &[Point2],
    mut w: W,
) -> Result<(), AuditError> {
    let timeline = Timeline::build(records, initial)?;
    let mut active = initial.len();
    writeln!(w, "t,diameter,maxX,maxY,activeRobots")?;
    for rec in records {
        if rec.event == EventKind::Terminate {
            active -= 1;
        }
        let positions = timeline.positions_at(rec.t);
        let corner = ell(&positions);
        writeln!(
            w,
            "{},{},{},{},{}",
            rec.t,
            diameter(&positions),
            corner.x,
            corner.y,
            active
        )?;
    }
    Ok(())
}

//! Event-driven execution of Look-Compute-Move cycles over continuous time.
//!
//! Looks are instantaneous; Compute and Move durations are chosen by the
//! scheduler policy. Motion is piecewise linear: a move is a list of legs,
//! which lets scripted schedules hold a robot mid-segment. Between any two
//! processed events every robot moves linearly, so the collision monitor can
//! use the closed-form pairwise minimum distance over each interval.

use std::io::{self, BufRead, Write};

use neargather_core::geometry::{dist2, min_dist_linear_motions, GEO_TOL_REL};
use neargather_core::protocol::{
    centroid_baseline, compute, compute_one_axis, gathering_compute, ComputeOutcome, ProtocolError,
    ProtocolParams, Snapshot,
};
use neargather_core::Point2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("delta must be positive")]
    InvalidDelta,
    #[error("fairnessBound must be positive")]
    InvalidFairness,
    #[error("maxEvents must be positive")]
    InvalidMaxEvents,
    #[error("initial positions must be pairwise distinct")]
    CoincidentInitialPositions,
    #[error("scripted policy needs exactly one script per robot")]
    ScriptArity,
    #[error("robot {robot}: script violation: {reason}")]
    ScriptViolation { robot: usize, reason: String },
    #[error("robot {robot}: scheduled idle gap exceeds the fairness bound")]
    FairnessViolation { robot: usize },
    #[error("robot {robot}: compute failed: {err}")]
    Protocol { robot: usize, err: ProtocolError },
}

/// Which Compute function drives the run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProtocolKind {
    NearGather,
    OneAxis,
    Gathering,
    Centroid,
}

impl ProtocolKind {
    fn outcome(
        self,
        snapshot: &Snapshot,
        params: &ProtocolParams,
    ) -> Result<ComputeOutcome, ProtocolError> {
        match self {
            ProtocolKind::NearGather => compute(snapshot, params),
            ProtocolKind::OneAxis => compute_one_axis(snapshot, params),
            ProtocolKind::Gathering => gathering_compute(snapshot, params),
            ProtocolKind::Centroid => Ok(ComputeOutcome::Move(centroid_baseline(snapshot))),
        }
    }
}

/// One leg of a scripted move: by absolute time `t_end` the robot has
/// covered `fraction` of the segment from the move's start to its
/// destination. Equal consecutive fractions hold the robot in place.
#[derive(Clone, Copy, Debug)]
pub struct ScriptLeg {
    pub t_end: f64,
    pub fraction: f64,
}

/// One scripted Look-Compute-Move cycle.
#[derive(Clone, Debug)]
pub struct ScriptCycle {
    pub look_at: f64,
    pub compute_duration: f64,
    /// Empty legs means: accept a null movement only (the cycle's outcome
    /// must not require motion). Non-empty legs describe the move.
    pub legs: Vec<ScriptLeg>,
}

#[derive(Clone, Debug)]
pub enum SchedulerPolicy {
    /// Rounds of length 3: all Look at 3k, ComputeEnd at 3k+1, MoveEnd at
    /// 3k+2, unit durations.
    FullySync,
    /// Same rounds, but each robot joins a round with probability 1/2,
    /// forced once the fairness bound would otherwise be exceeded.
    SemiSync,
    /// Idle U[0,0.5), compute U[0,0.2), move duration U[0.05,0.5);
    /// interruption with probability 1/4, always respecting delta.
    RandomAsync,
    /// Explicit per-robot cycle list; a robot with no cycles left idles
    /// forever and the run ends once nothing is pending.
    Scripted(Vec<Vec<ScriptCycle>>),
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub params: ProtocolParams,
    pub protocol: ProtocolKind,
    pub policy: SchedulerPolicy,
    /// Scheduler's minimum-progress constant; unknown to the protocol.
    pub delta: f64,
    pub seed: u64,
    pub max_events: u64,
    /// Longest a non-terminated robot may wait before starting a new cycle.
    pub fairness_bound: f64,
    /// Optional early stop once the swarm diameter drops to this value
    /// (used by gathering mode, which never terminates on its own).
    pub stop_diameter: Option<f64>,
}

impl SimConfig {
    /// Default delta: 0.05 * rho.
    pub fn default_delta(params: &ProtocolParams) -> f64 {
        0.05 * params.rho
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Look,
    ComputeEnd,
    MoveStart,
    MoveEnd,
    MoveInterrupt,
    Terminate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: f64,
    pub robot: usize,
    pub event: EventKind,
    pub pos: [f64; 2],
    pub dest: Option<[f64; 2]>,
    /// Minimum pairwise gap observed over the interval ending at `t`
    /// (instantaneous gap for the first record at a given instant).
    /// `None` when there are no pairs.
    #[serde(rename = "minPairGapSinceLast")]
    pub min_pair_gap_since_last: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    AllTerminated,
    MaxEventsReached,
    ScriptExhausted,
    DiameterFloorReached,
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub status: RunStatus,
    pub final_positions: Vec<Point2>,
}

struct Leg {
    t_end: f64,
    target: Point2,
}

struct MovingState {
    legs: Vec<Leg>,
    leg_idx: usize,
    leg_start_pos: Point2,
    leg_start_t: f64,
    /// Whether the final leg lands on `dest` (MoveEnd) or short of it
    /// (MoveInterrupt).
    complete: bool,
}

enum Phase {
    Idle { next_look: f64 },
    Computing { until: f64 },
    Moving(MovingState),
    Terminated,
}

struct Robot {
    pos: Point2,
    phase: Phase,
    snapshot: Option<Snapshot>,
    /// Index of the next unscheduled scripted cycle.
    script_cursor: usize,
    /// Index of the cycle currently in flight (scripted policy).
    current_cycle: usize,
}

struct World<'a> {
    config: &'a SimConfig,
    robots: Vec<Robot>,
    now: f64,
    rng: ChaCha8Rng,
    /// Running minimum pairwise gap since the last emitted record.
    pending_gap: f64,
    records: Vec<TraceRecord>,
}

/// Event ranks at equal times: Looks read a consistent pre-transition
/// world, then Compute commits, then motion lands.
const RANK_LOOK: u8 = 0;
const RANK_COMPUTE: u8 = 1;
const RANK_LEG: u8 = 3;

impl<'a> World<'a> {
    fn new(config: &'a SimConfig, initial: &[Point2]) -> Result<Self, SimError> {
        let mut world = World {
            config,
            robots: initial
                .iter()
                .map(|&pos| Robot {
                    pos,
                    phase: Phase::Idle {
                        next_look: f64::INFINITY,
                    },
                    snapshot: None,
                    script_cursor: 0,
                    current_cycle: 0,
                })
                .collect(),
            now: 0.0,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            pending_gap: f64::INFINITY,
            records: Vec::new(),
        };
        for id in 0..world.robots.len() {
            let next = world.next_look(id)?;
            world.robots[id].phase = Phase::Idle { next_look: next };
        }
        world.pending_gap = world.instant_min_gap();
        Ok(world)
    }

    fn instant_min_gap(&self) -> f64 {
        let mut min = f64::INFINITY;
        for i in 0..self.robots.len() {
            for j in i + 1..self.robots.len() {
                min = min.min(dist2(self.robots[i].pos, self.robots[j].pos));
            }
        }
        min
    }

    fn diameter(&self) -> f64 {
        let mut max = 0.0f64;
        for i in 0..self.robots.len() {
            for j in i + 1..self.robots.len() {
                max = max.max(dist2(self.robots[i].pos, self.robots[j].pos));
            }
        }
        max
    }

    /// Next scheduled Look instant for a robot entering Idle at `self.now`.
    fn next_look(&mut self, id: usize) -> Result<f64, SimError> {
        let now = self.now;
        match &self.config.policy {
            SchedulerPolicy::FullySync => Ok(round_start(now)),
            SchedulerPolicy::SemiSync => {
                let mut at = round_start(now);
                loop {
                    // Join the round unless the coin says skip; never skip
                    // past the fairness bound.
                    if self.rng.gen_bool(0.5) || at + 3.0 - now > self.config.fairness_bound {
                        return Ok(at);
                    }
                    at += 3.0;
                }
            }
            SchedulerPolicy::RandomAsync => Ok(now + self.rng.gen_range(0.0..0.5)),
            SchedulerPolicy::Scripted(scripts) => {
                let cursor = self.robots[id].script_cursor;
                match scripts[id].get(cursor) {
                    None => Ok(f64::INFINITY),
                    Some(cycle) => {
                        if cycle.look_at < now {
                            return Err(SimError::ScriptViolation {
                                robot: id,
                                reason: format!(
                                    "cycle {cursor} Look at {} precedes current time {now}",
                                    cycle.look_at
                                ),
                            });
                        }
                        if cycle.look_at - now > self.config.fairness_bound {
                            return Err(SimError::FairnessViolation { robot: id });
                        }
                        Ok(cycle.look_at)
                    }
                }
            }
        }
    }

    fn compute_duration(&mut self, id: usize) -> f64 {
        match &self.config.policy {
            SchedulerPolicy::FullySync | SchedulerPolicy::SemiSync => 1.0,
            SchedulerPolicy::RandomAsync => self.rng.gen_range(0.0..0.2),
            SchedulerPolicy::Scripted(scripts) => {
                scripts[id][self.robots[id].current_cycle].compute_duration
            }
        }
    }

    fn plan_move(&mut self, id: usize, start: Point2, dest: Point2) -> Result<MovingState, SimError> {
        let now = self.now;
        let len = dist2(start, dest);
        let delta = self.config.delta;
        let (legs, complete) = match &self.config.policy {
            SchedulerPolicy::FullySync | SchedulerPolicy::SemiSync => (
                vec![Leg {
                    t_end: now + 1.0,
                    target: dest,
                }],
                true,
            ),
            SchedulerPolicy::RandomAsync => {
                let duration = self.rng.gen_range(0.05..0.5);
                // Destinations closer than delta are always reached.
                if len > delta && self.rng.gen_bool(0.25) {
                    let frac = self.rng.gen_range(delta / len..1.0);
                    let target = start.add(dest.sub(start).scale(frac));
                    (
                        vec![Leg {
                            t_end: now + duration,
                            target,
                        }],
                        false,
                    )
                } else {
                    (
                        vec![Leg {
                            t_end: now + duration,
                            target: dest,
                        }],
                        true,
                    )
                }
            }
            SchedulerPolicy::Scripted(scripts) => {
                let cycle = &scripts[id][self.robots[id].current_cycle];
                if cycle.legs.is_empty() {
                    return Err(SimError::ScriptViolation {
                        robot: id,
                        reason: "cycle requires a move but has no legs".into(),
                    });
                }
                let mut legs = Vec::with_capacity(cycle.legs.len());
                let mut prev_t = now;
                let mut prev_frac = 0.0;
                for leg in &cycle.legs {
                    if leg.t_end <= prev_t {
                        return Err(SimError::ScriptViolation {
                            robot: id,
                            reason: format!("leg times must strictly increase (at {})", leg.t_end),
                        });
                    }
                    if !(0.0..=1.0).contains(&leg.fraction) || leg.fraction < prev_frac {
                        return Err(SimError::ScriptViolation {
                            robot: id,
                            reason: "leg fractions must be non-decreasing within [0, 1]".into(),
                        });
                    }
                    let target = if leg.fraction == 1.0 {
                        dest
                    } else {
                        start.add(dest.sub(start).scale(leg.fraction))
                    };
                    legs.push(Leg {
                        t_end: leg.t_end,
                        target,
                    });
                    prev_t = leg.t_end;
                    prev_frac = leg.fraction;
                }
                let complete = cycle.legs.last().unwrap().fraction == 1.0;
                (legs, complete)
            }
        };
        // Minimum-progress contract: a landed move covers at least
        // min(delta, planned length).
        let landing = legs.last().unwrap().target;
        let traveled = dist2(start, landing);
        if traveled + 1e-12 * self.config.params.v < len.min(delta) {
            return Err(SimError::ScriptViolation {
                robot: id,
                reason: format!("move lands after {traveled}, below the delta contract"),
            });
        }
        Ok(MovingState {
            legs,
            leg_idx: 0,
            leg_start_pos: start,
            leg_start_t: now,
            complete,
        })
    }

    /// The next due event as (time, rank, robot id), if any.
    fn next_event(&self) -> Option<(f64, u8, usize)> {
        let mut best: Option<(f64, u8, usize)> = None;
        for (id, robot) in self.robots.iter().enumerate() {
            let due = match &robot.phase {
                Phase::Idle { next_look } if next_look.is_finite() => (*next_look, RANK_LOOK),
                Phase::Computing { until } => (*until, RANK_COMPUTE),
                Phase::Moving(ms) => (ms.legs[ms.leg_idx].t_end, RANK_LEG),
                _ => continue,
            };
            let key = (due.0, due.1, id);
            if best.map_or(true, |b| key < b) {
                best = Some(key);
            }
        }
        best
    }

    /// Advance continuous motion to time `t`, accumulating the pairwise
    /// minimum-gap monitor over the interval.
    fn advance_to(&mut self, t: f64) {
        let dt = t - self.now;
        if dt > 0.0 {
            let vels: Vec<Point2> = self
                .robots
                .iter()
                .map(|r| match &r.phase {
                    Phase::Moving(ms) => {
                        let leg = &ms.legs[ms.leg_idx];
                        leg.target
                            .sub(ms.leg_start_pos)
                            .scale(1.0 / (leg.t_end - ms.leg_start_t))
                    }
                    _ => Point2::ORIGIN,
                })
                .collect();
            for i in 0..self.robots.len() {
                for j in i + 1..self.robots.len() {
                    let (gap, _) = min_dist_linear_motions(
                        self.robots[i].pos,
                        vels[i],
                        self.robots[j].pos,
                        vels[j],
                        dt,
                    );
                    self.pending_gap = self.pending_gap.min(gap);
                }
            }
            for robot in &mut self.robots {
                if let Phase::Moving(ms) = &robot.phase {
                    let leg = &ms.legs[ms.leg_idx];
                    robot.pos = if t >= leg.t_end {
                        leg.target
                    } else {
                        let frac = (t - ms.leg_start_t) / (leg.t_end - ms.leg_start_t);
                        ms.leg_start_pos.add(leg.target.sub(ms.leg_start_pos).scale(frac))
                    };
                }
            }
        }
        self.now = t;
    }

    fn emit(&mut self, robot: usize, event: EventKind, dest: Option<Point2>) {
        let gap = if self.pending_gap.is_finite() {
            Some(self.pending_gap)
        } else {
            None
        };
        let pos = self.robots[robot].pos;
        self.records.push(TraceRecord {
            t: self.now,
            robot,
            event,
            pos: [pos.x, pos.y],
            dest: dest.map(|d| [d.x, d.y]),
            min_pair_gap_since_last: gap,
        });
        self.pending_gap = self.instant_min_gap();
    }

    /// The Look result: relative positions of all robots within the closed
    /// visibility disk, observer at the origin. Coincident robots appear
    /// once (a snapshot is a set of points); Terminated robots remain
    /// visible.
    fn snapshot_of(&self, id: usize) -> Snapshot {
        let origin = self.robots[id].pos;
        let reach = self.config.params.v * (1.0 + GEO_TOL_REL);
        let mut points: Vec<Point2> = Vec::new();
        for robot in &self.robots {
            let rel = robot.pos.sub(origin);
            if rel.norm2() <= reach && !points.iter().any(|p| p.x == rel.x && p.y == rel.y) {
                points.push(rel);
            }
        }
        Snapshot::new(points)
    }

    fn process(&mut self, id: usize, rank: u8) -> Result<(), SimError> {
        match rank {
            RANK_LOOK => {
                self.robots[id].snapshot = Some(self.snapshot_of(id));
                self.robots[id].current_cycle = self.robots[id].script_cursor;
                self.robots[id].script_cursor += 1;
                let duration = self.compute_duration(id);
                self.robots[id].phase = Phase::Computing {
                    until: self.now + duration,
                };
                self.emit(id, EventKind::Look, None);
            }
            RANK_COMPUTE => {
                let snapshot = self.robots[id]
                    .snapshot
                    .take()
                    .expect("computing robot has a snapshot");
                let outcome = self
                    .config
                    .protocol
                    .outcome(&snapshot, &self.config.params)
                    .map_err(|err| SimError::Protocol { robot: id, err })?;
                match outcome {
                    ComputeOutcome::Terminate => {
                        self.emit(id, EventKind::ComputeEnd, None);
                        self.robots[id].phase = Phase::Terminated;
                        self.emit(id, EventKind::Terminate, None);
                    }
                    ComputeOutcome::Move(dp) if dp.x == 0.0 && dp.y == 0.0 => {
                        // Null movement: directly back to Idle.
                        self.emit(id, EventKind::ComputeEnd, None);
                        let next = self.next_look(id)?;
                        self.robots[id].phase = Phase::Idle { next_look: next };
                    }
                    ComputeOutcome::Move(dp) => {
                        let start = self.robots[id].pos;
                        let raw = start.add(dp);
                        let dest = Point2::new(
                            clamp_overshoot(start.x, dp.x, raw.x),
                            clamp_overshoot(start.y, dp.y, raw.y),
                        );
                        self.emit(id, EventKind::ComputeEnd, None);
                        let moving = self.plan_move(id, start, dest)?;
                        self.robots[id].phase = Phase::Moving(moving);
                        self.emit(id, EventKind::MoveStart, Some(dest));
                    }
                }
            }
            _ => {
                // A leg boundary: either an internal breakpoint or the
                // landing of the whole move.
                let (landed, kind) = {
                    let ms = match &mut self.robots[id].phase {
                        Phase::Moving(ms) => ms,
                        _ => unreachable!("leg event on non-moving robot"),
                    };
                    if ms.leg_idx + 1 < ms.legs.len() {
                        ms.leg_start_pos = ms.legs[ms.leg_idx].target;
                        ms.leg_start_t = ms.legs[ms.leg_idx].t_end;
                        ms.leg_idx += 1;
                        (false, EventKind::MoveEnd)
                    } else if ms.complete {
                        (true, EventKind::MoveEnd)
                    } else {
                        (true, EventKind::MoveInterrupt)
                    }
                };
                if landed {
                    let next = self.next_look(id)?;
                    self.robots[id].phase = Phase::Idle { next_look: next };
                    self.emit(id, kind, None);
                }
            }
        }
        Ok(())
    }
}

/// Rounding in `origin + dp` can overshoot the commanded displacement by
/// one ulp, which may land a robot bitwise-equal on a neighbor even though
/// the protocol's strict inequalities hold in the relative frame. Step the
/// destination back toward the origin until the effective displacement is
/// within the command.
fn clamp_overshoot(origin: f64, dp: f64, mut dest: f64) -> f64 {
    while (dest - origin).abs() > dp.abs() {
        dest = if dest > origin {
            dest.next_down()
        } else {
            dest.next_up()
        };
    }
    dest
}

/// Start of the first synchronous round at or after `t` (rounds have
/// length 3).
fn round_start(t: f64) -> f64 {
    (t / 3.0).ceil() * 3.0
}

/// Run a full simulation from distinct initial positions until every robot
/// has terminated, the event budget is exhausted, all scripts have run out,
/// or the diameter floor is reached.
pub fn run(config: &SimConfig, initial: &[Point2]) -> Result<Trace, SimError> {
    if !(config.delta > 0.0) {
        return Err(SimError::InvalidDelta);
    }
    if !(config.fairness_bound > 0.0) {
        return Err(SimError::InvalidFairness);
    }
    if config.max_events == 0 {
        return Err(SimError::InvalidMaxEvents);
    }
    for (i, p) in initial.iter().enumerate() {
        for q in &initial[i + 1..] {
            if p.x == q.x && p.y == q.y {
                return Err(SimError::CoincidentInitialPositions);
            }
        }
    }
    if let SchedulerPolicy::Scripted(scripts) = &config.policy {
        if scripts.len() != initial.len() {
            return Err(SimError::ScriptArity);
        }
    }

    let mut world = World::new(config, initial)?;
    let mut processed: u64 = 0;
    let status = loop {
        if world
            .robots
            .iter()
            .all(|r| matches!(r.phase, Phase::Terminated))
        {
            break RunStatus::AllTerminated;
        }
        if let Some(floor) = config.stop_diameter {
            if world.robots.len() > 1 && world.diameter() <= floor {
                break RunStatus::DiameterFloorReached;
            }
        }
        let (t, rank, id) = match world.next_event() {
            Some(e) => e,
            None => break RunStatus::ScriptExhausted,
        };
        if processed >= config.max_events {
            break RunStatus::MaxEventsReached;
        }
        processed += 1;
        world.advance_to(t);
        world.process(id, rank)?;
    };
    Ok(Trace {
        records: world.records,
        status,
        final_positions: world.robots.iter().map(|r| r.pos).collect(),
    })
}

/// The exact asynchronous interleaving that makes the half-way-to-centroid
/// baseline collide: robot 0 is held just past its start while robot 1 runs
/// five full cycles, then robot 0 finishes its stale move.
pub fn centroid_counterexample_script() -> Vec<Vec<ScriptCycle>> {
    let r = vec![ScriptCycle {
        look_at: 0.0,
        compute_duration: 0.5,
        legs: vec![
            ScriptLeg {
                t_end: 1.5,
                fraction: 52.0 / 781.0,
            },
            ScriptLeg {
                t_end: 100.0,
                fraction: 52.0 / 781.0,
            },
            ScriptLeg {
                t_end: 101.0,
                fraction: 1.0,
            },
        ],
    }];
    let s = (0..5)
        .map(|k| ScriptCycle {
            look_at: 2.0 + 3.0 * k as f64,
            compute_duration: 0.5,
            legs: vec![ScriptLeg {
                t_end: 3.5 + 3.0 * k as f64,
                fraction: 1.0,
            }],
        })
        .collect();
    vec![r, s]
}

pub fn write_trace_jsonl<W: Write>(trace: &Trace, mut w: W) -> io::Result<()> {
    for record in &trace.records {
        serde_json::to_writer(&mut w, record)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trace_jsonl<R: BufRead>(r: R) -> io::Result<Vec<TraceRecord>> {
    let mut records = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line)?);
    }
    Ok(records)
}

//! The Compute-phase function: termination test plus destination
//! computation, parameter derivation, the one-axis rotation wrapper, the
//! gathering-mode variant, and the half-way-to-centroid baseline.
//!
//! All functions here are pure functions of `(snapshot, params)`. Snapshots
//! are expressed in the observing robot's frame, with the observer at the
//! origin.

use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{dist2, dist_inf, ComputeRegions, GeometryError, Point2, GEO_TOL_REL};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TieBreak {
    Horizontal,
    Vertical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisMode {
    TwoAxes,
    OneAxisRotated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProtocolError {
    /// `D` must satisfy `0 < D < V`.
    InvalidThreshold,
    /// `epsilon` must be positive.
    InvalidEpsilon,
    /// The snapshot does not contain the observer at the origin exactly once.
    MissingSelf,
    /// A snapshot entry lies beyond the visibility radius or is not finite.
    EntryOutOfRange,
    /// Two snapshot entries coincide.
    DuplicateEntry,
    Geometry(GeometryError),
}

impl fmt::Display for ProtocolError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProtocolError::InvalidThreshold => write!(f, "D must satisfy 0 < D < V"),
            ProtocolError::InvalidEpsilon => write!(f, "epsilon must be positive"),
            ProtocolError::MissingSelf => {
                write!(f, "snapshot must contain the observer at the origin exactly once")
            }
            ProtocolError::EntryOutOfRange => {
                write!(f, "snapshot entry beyond visibility radius or not finite")
            }
            ProtocolError::DuplicateEntry => write!(f, "snapshot entries must be distinct"),
            ProtocolError::Geometry(e) => write!(f, "geometry error: {e}"),
        }
    }
}

impl From<GeometryError> for ProtocolError {
    fn from(e: GeometryError) -> Self {
        ProtocolError::Geometry(e)
    }
}

/// Protocol parameters: the visibility radius `V`, the strong-graph
/// threshold `D`, the target disk radius `epsilon`, and the derived
/// quantities `rho = min(V/4, V - D)` and `epsilon' = min(epsilon, rho/2)`.
#[derive(Clone, Copy, Debug)]
pub struct ProtocolParams {
    pub v: f64,
    pub d: f64,
    pub epsilon: f64,
    pub rho: f64,
    pub epsilon_prime: f64,
    pub tie_break: TieBreak,
    pub axis_mode: AxisMode,
}

impl ProtocolParams {
    pub fn derive(
        v: f64,
        d: f64,
        epsilon: f64,
        tie_break: TieBreak,
        axis_mode: AxisMode,
    ) -> Result<Self, ProtocolError> {
        if !(v > 0.0) || !(d > 0.0) || d >= v {
            return Err(ProtocolError::InvalidThreshold);
        }
        if !(epsilon > 0.0) {
            return Err(ProtocolError::InvalidEpsilon);
        }
        let rho = (v / 4.0).min(v - d);
        let epsilon_prime = epsilon.min(rho / 2.0);
        Ok(ProtocolParams {
            v,
            d,
            epsilon,
            rho,
            epsilon_prime,
            tie_break,
            axis_mode,
        })
    }

    pub fn regions(&self) -> ComputeRegions {
        // Parameters were validated in `derive`; rho is in (0, V/4].
        ComputeRegions::new(self.v, self.rho).expect("derived rho is valid")
    }
}

/// Robot-relative positions of all visible robots at a Look instant,
/// observer at the origin and included.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub positions: Vec<Point2>,
}

impl Snapshot {
    pub fn new(positions: Vec<Point2>) -> Self {
        Snapshot { positions }
    }

    pub fn validate(&self, params: &ProtocolParams) -> Result<(), ProtocolError> {
        let mut self_count = 0;
        for (i, p) in self.positions.iter().enumerate() {
            if !p.is_finite() {
                return Err(ProtocolError::EntryOutOfRange);
            }
            if p.x == 0.0 && p.y == 0.0 {
                self_count += 1;
            }
            if p.norm2() > params.v * (1.0 + GEO_TOL_REL) {
                return Err(ProtocolError::EntryOutOfRange);
            }
            for q in &self.positions[i + 1..] {
                if p.x == q.x && p.y == q.y {
                    return Err(ProtocolError::DuplicateEntry);
                }
            }
        }
        if self_count != 1 {
            return Err(ProtocolError::MissingSelf);
        }
        Ok(())
    }
}

/// Result of a Compute phase: terminate, or move to `dp` in the observer's
/// frame. A null movement is `Move((0, 0))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ComputeOutcome {
    Terminate,
    Move(Point2),
}

/// The pairwise-proximity relation preserved by the protocol:
/// `||p - q||_2 <= V - rho/2` and `||p - q||_inf <= V - rho`.
/// Equivalent to `q - p` lying in the region `R` of either observer.
pub fn aw(p: Point2, q: Point2, params: &ProtocolParams) -> bool {
    dist2(p, q) <= params.v - params.rho / 2.0 && dist_inf(p, q) <= params.v - params.rho
}

fn all_within(positions: &[Point2], eps: f64) -> bool {
    for (i, p) in positions.iter().enumerate() {
        for q in &positions[i + 1..] {
            if dist2(*p, *q) > eps {
                return false;
            }
        }
    }
    true
}

/// The near-gathering Compute function: terminate when every visible pair is
/// within `epsilon'`, otherwise move rightward or upward by the greatest
/// amount compatible with collision avoidance and awareness preservation.
pub fn compute(snapshot: &Snapshot, params: &ProtocolParams) -> Result<ComputeOutcome, ProtocolError> {
    snapshot.validate(params)?;
    if all_within(&snapshot.positions, params.epsilon_prime) {
        return Ok(ComputeOutcome::Terminate);
    }
    Ok(ComputeOutcome::Move(destination(snapshot, params)?))
}

fn destination(snapshot: &Snapshot, params: &ProtocolParams) -> Result<Point2, ProtocolError> {
    let regions = params.regions();
    let z = &snapshot.positions;

    let max_x = z.iter().fold(f64::NEG_INFINITY, |m, p| m.max(p.x));
    let max_y = z.iter().fold(f64::NEG_INFINITY, |m, p| m.max(p.y));
    // Empty minima impose no constraint.
    let min_se_x = z
        .iter()
        .filter(|p| regions.in_q2(**p))
        .fold(f64::INFINITY, |m, p| m.min(p.x));
    let min_nw_y = z
        .iter()
        .filter(|p| regions.in_q1(**p))
        .fold(f64::INFINITY, |m, p| m.min(p.y));

    let mut dp_x = min_se_x.min(max_x).min(params.rho / 2.0);
    let mut dp_y = min_nw_y.min(max_y).min(params.rho / 2.0);

    for p in z {
        if regions.in_h1(*p) {
            dp_x = 0.0;
        } else if regions.in_r(*p) {
            let s1 = regions.leftmost_in_r_minus_h1(p.y)?;
            dp_x = dp_x.min(p.x - s1.x);
        }
        if regions.in_h2(*p) {
            dp_y = 0.0;
        } else if regions.in_r(*p) {
            let s2 = regions.bottommost_in_r_minus_h2(p.x)?;
            dp_y = dp_y.min(p.y - s2.y);
        }
    }

    let horizontal = if dp_x > dp_y {
        true
    } else if dp_y > dp_x {
        false
    } else {
        params.tie_break == TieBreak::Horizontal
    };
    Ok(if horizontal {
        Point2::new(dp_x / 2.0, 0.0)
    } else {
        Point2::new(0.0, dp_y / 2.0)
    })
}

/// One-axis-agreement wrapper: rotate the snapshot clockwise by 45 degrees,
/// run [`compute`], and rotate a `Move` destination back.
pub fn compute_one_axis(
    snapshot: &Snapshot,
    params: &ProtocolParams,
) -> Result<ComputeOutcome, ProtocolError> {
    let rotated = Snapshot::new(snapshot.positions.iter().map(|p| p.rotate_cw45()).collect());
    match compute(&rotated, params)? {
        ComputeOutcome::Terminate => Ok(ComputeOutcome::Terminate),
        ComputeOutcome::Move(dp) => Ok(ComputeOutcome::Move(dp.rotate_ccw45())),
    }
}

/// Gathering-mode variant: identical to [`compute`], except that when the
/// termination clause fires the robot instead moves toward the top-right
/// corner of its visible set.
pub fn gathering_compute(
    snapshot: &Snapshot,
    params: &ProtocolParams,
) -> Result<ComputeOutcome, ProtocolError> {
    snapshot.validate(params)?;
    if all_within(&snapshot.positions, params.epsilon_prime) {
        let max_x = snapshot
            .positions
            .iter()
            .fold(f64::NEG_INFINITY, |m, p| m.max(p.x));
        let max_y = snapshot
            .positions
            .iter()
            .fold(f64::NEG_INFINITY, |m, p| m.max(p.y));
        return Ok(ComputeOutcome::Move(Point2::new(max_x, max_y)));
    }
    Ok(ComputeOutcome::Move(destination(snapshot, params)?))
}

/// Half-way-to-centroid baseline: move half-way toward the center of
/// gravity of the visible set. Not collision-free under async scheduling.
pub fn centroid_baseline(snapshot: &Snapshot) -> Point2 {
    let n = snapshot.positions.len() as f64;
    let sum = snapshot
        .positions
        .iter()
        .fold(Point2::ORIGIN, |acc, p| acc.add(*p));
    sum.scale(0.5 / n)
}

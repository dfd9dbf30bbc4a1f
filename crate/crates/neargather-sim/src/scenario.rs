//! Scenario construction and persistence: random configurations with a
//! connected strong distance graph, canned configurations, and the JSON
//! scenario file format.

use std::io;

use neargather_core::analysis::{build_graph, is_connected, GraphLabel};
use neargather_core::geometry::dist2;
use neargather_core::Point2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("need 0 < D < V")]
    BadThreshold,
    #[error("epsilon must be positive")]
    BadEpsilon,
    #[error("minSep must satisfy 0 < minSep < D")]
    BadMinSep,
    #[error("n must be at least 1")]
    BadCount,
    #[error("positions must be pairwise distinct")]
    DuplicatePositions,
    #[error("strong distance graph J is disconnected (Assumption 1)")]
    DisconnectedJ,
    #[error("could not place {placed} of {n} robots (overcrowded parameters)")]
    PlacementFailure { placed: usize, n: usize },
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("malformed scenario file: {0}")]
    Parse(#[from] serde_json::Error),
}

/// An initial configuration plus its protocol scale parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub positions: Vec<[f64; 2]>,
}

impl Scenario {
    pub fn points(&self) -> Vec<Point2> {
        self.positions.iter().map(|p| Point2::new(p[0], p[1])).collect()
    }

    /// Certify both invariants: pairwise-distinct positions and a connected
    /// strong distance graph J with threshold D.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.v > 0.0) || !(self.d > 0.0) || self.d >= self.v {
            return Err(ScenarioError::BadThreshold);
        }
        if !(self.epsilon > 0.0) {
            return Err(ScenarioError::BadEpsilon);
        }
        if self.positions.is_empty() {
            return Err(ScenarioError::BadCount);
        }
        let pts = self.points();
        for (i, p) in pts.iter().enumerate() {
            for q in &pts[i + 1..] {
                if p.x == q.x && p.y == q.y {
                    return Err(ScenarioError::DuplicatePositions);
                }
            }
        }
        let j = build_graph(&pts, self.d, GraphLabel::J);
        if !is_connected(&j) {
            return Err(ScenarioError::DisconnectedJ);
        }
        Ok(())
    }
}

/// Cluster growth: each new point is placed uniformly within distance D of
/// a uniformly chosen existing point and rejected if it lands closer than
/// `min_sep` to any point. Guarantees a connected J by construction; the
/// result is certified by `validate` anyway.
pub fn generate_connected(
    n: usize,
    v: f64,
    d: f64,
    epsilon: f64,
    min_sep: f64,
    seed: u64,
) -> Result<Scenario, ScenarioError> {
    if n == 0 {
        return Err(ScenarioError::BadCount);
    }
    if !(v > 0.0) || !(d > 0.0) || d >= v {
        return Err(ScenarioError::BadThreshold);
    }
    if !(epsilon > 0.0) {
        return Err(ScenarioError::BadEpsilon);
    }
    if !(min_sep > 0.0) || min_sep >= d {
        return Err(ScenarioError::BadMinSep);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = vec![Point2::ORIGIN];
    while pts.len() < n {
        let mut placed = false;
        for _ in 0..10_000 {
            let anchor = pts[rng.gen_range(0..pts.len())];
            // Uniform in the disk of radius D around the anchor.
            let r = d * rng.gen_range(0.0f64..1.0).sqrt();
            let theta = rng.gen_range(0.0..core::f64::consts::TAU);
            let cand = anchor.add(Point2::new(r * theta.cos(), r * theta.sin()));
            if pts.iter().all(|p| dist2(*p, cand) >= min_sep) {
                pts.push(cand);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(ScenarioError::PlacementFailure {
                placed: pts.len(),
                n,
            });
        }
    }
    let scenario = Scenario {
        name: format!("random-n{n}-seed{seed}"),
        v,
        d,
        epsilon,
        seed: Some(seed),
        positions: pts.iter().map(|p| [p.x, p.y]).collect(),
    };
    scenario.validate()?;
    Ok(scenario)
}

#[derive(Clone, Copy, Debug)]
pub enum CannedName {
    /// The two-robot configuration of the centroid counterexample, scaled
    /// so both robots are mutually visible.
    CentroidPair,
    /// n robots on a vertical line spaced exactly D apart.
    VerticalLine(usize),
    /// n vertices of a regular polygon with the given circumradius.
    RegularPolygon(usize, f64),
    /// k-by-k axis-aligned grid spaced exactly D apart.
    Grid(usize),
}

pub fn canned(name: CannedName) -> Result<Scenario, ScenarioError> {
    let scenario = match name {
        CannedName::CentroidPair => Scenario {
            name: "centroid-pair".into(),
            v: 4000.0,
            d: 3900.0,
            epsilon: 1.0,
            seed: None,
            positions: vec![[0.0, 0.0], [3124.0, 0.0]],
        },
        CannedName::VerticalLine(n) => {
            let d = 3.5;
            Scenario {
                name: format!("vertical-line-{n}"),
                v: 4.0,
                d,
                epsilon: 0.1,
                seed: None,
                positions: (0..n).map(|i| [0.0, i as f64 * d]).collect(),
            }
        }
        CannedName::RegularPolygon(n, radius) => Scenario {
            name: format!("regular-polygon-{n}"),
            v: 4.0,
            d: 3.5,
            epsilon: 0.1,
            seed: None,
            positions: (0..n)
                .map(|i| {
                    let theta = core::f64::consts::TAU * i as f64 / n as f64;
                    [radius * theta.cos(), radius * theta.sin()]
                })
                .collect(),
        },
        CannedName::Grid(k) => {
            let d = 3.5;
            Scenario {
                name: format!("grid-{k}x{k}"),
                v: 4.0,
                d,
                epsilon: 0.1,
                seed: None,
                positions: (0..k * k)
                    .map(|i| [(i % k) as f64 * d, (i / k) as f64 * d])
                    .collect(),
            }
        }
    };
    scenario.validate()?;
    Ok(scenario)
}

pub fn save_scenario(s: &Scenario) -> Result<Vec<u8>, ScenarioError> {
    s.validate()?;
    let mut bytes = serde_json::to_vec_pretty(s)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn load_scenario(bytes: &[u8]) -> Result<Scenario, ScenarioError> {
    let s: Scenario = serde_json::from_slice(bytes)?;
    s.validate()?;
    Ok(s)
}

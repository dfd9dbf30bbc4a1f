//! Distance graphs, the mutual-awareness ledger, and the small geometric
//! helpers used by the trace auditor.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{dist2, Point2};
use crate::protocol::{aw, ProtocolParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphLabel {
    /// Initial strong distance graph (threshold `D`).
    J,
    /// Intermediate distance graph (threshold `V - rho/2`).
    G,
    /// Visibility graph (threshold `V`).
    Visibility,
}

/// Thresholded closed-ball adjacency over robot positions.
#[derive(Clone, Debug)]
pub struct DistanceGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub threshold: f64,
    pub label: GraphLabel,
}

pub fn build_graph(positions: &[Point2], threshold: f64, label: GraphLabel) -> DistanceGraph {
    let n = positions.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if dist2(positions[i], positions[j]) <= threshold {
                edges.push((i, j));
            }
        }
    }
    DistanceGraph {
        n,
        edges,
        threshold,
        label,
    }
}

/// Connectivity of an undirected graph on `0..n` given by an edge list.
pub fn edges_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    if n <= 1 {
        return true;
    }
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == n
}

pub fn is_connected(graph: &DistanceGraph) -> bool {
    edges_connected(graph.n, &graph.edges)
}

/// Move space of a robot: the closed upper-right quadrant anchored at its
/// position.
pub fn move_space_contains(owner: Point2, p: Point2) -> bool {
    p.x >= owner.x && p.y >= owner.y
}

/// The swarm's convergence target: componentwise maximum of the initial
/// positions.
pub fn ell(initial_positions: &[Point2]) -> Point2 {
    let mut max_x = f64::NEG_INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    for p in initial_positions {
        max_x = max_x.max(p.x);
        max_y = max_y.max(p.y);
    }
    Point2::new(max_x, max_y)
}

/// Per-ordered-pair record of whether the proximity relation held at each
/// robot's most recent Look. A pair is mutually aware when both directed
/// flags hold.
#[derive(Clone, Debug)]
pub struct AwarenessLedger {
    n: usize,
    flags: Vec<bool>,
}

impl AwarenessLedger {
    /// Initialize from positions at time zero: before a robot's first Look
    /// its reference instant is time zero itself.
    pub fn init(positions: &[Point2], params: &ProtocolParams) -> Self {
        let n = positions.len();
        let mut flags = vec![false; n * n];
        for r in 0..n {
            for s in 0..n {
                if r != s {
                    flags[r * n + s] = aw(positions[r], positions[s], params);
                }
            }
        }
        AwarenessLedger { n, flags }
    }

    /// Recompute the looking robot's directed flags against the true
    /// positions at its Look instant. Flags of other robots are untouched.
    pub fn record_look(&mut self, looker: usize, positions: &[Point2], params: &ProtocolParams) {
        for s in 0..self.n {
            if s != looker {
                self.flags[looker * self.n + s] = aw(positions[looker], positions[s], params);
            }
        }
    }

    pub fn directed(&self, r: usize, s: usize) -> bool {
        self.flags[r * self.n + s]
    }

    pub fn mutually_aware(&self, r: usize, s: usize) -> bool {
        self.directed(r, s) && self.directed(s, r)
    }

    /// Edge list of the mutual awareness graph.
    pub fn mutual_edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for r in 0..self.n {
            for s in r + 1..self.n {
                if self.mutually_aware(r, s) {
                    edges.push((r, s));
                }
            }
        }
        edges
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{AxisMode, ProtocolParams, TieBreak};

    fn pts(raw: &[(f64, f64)]) -> Vec<Point2> {
        raw.iter().map(|&(x, y)| Point2::new(x, y)).collect()
    }

    fn params() -> ProtocolParams {
        ProtocolParams::derive(4.0, 3.5, 0.1, TieBreak::Horizontal, AxisMode::TwoAxes).unwrap()
    }

    #[test]
    fn build_graph_thresholds() {
        let g = build_graph(&pts(&[(0.0, 0.0)]), 3.5, GraphLabel::J);
        assert!(g.edges.is_empty());
        assert!(is_connected(&g));

        let g = build_graph(&pts(&[(0.0, 0.0), (3.5, 0.0)]), 3.5, GraphLabel::J);
        assert_eq!(g.edges, vec![(0, 1)]);

        let g = build_graph(&pts(&[(0.0, 0.0), (3.5, 0.0), (7.0, 0.0)]), 3.5, GraphLabel::J);
        assert_eq!(g.edges.len(), 2);
        assert!(is_connected(&g));

        let g = build_graph(&pts(&[(0.0, 0.0), (3.6, 0.0)]), 3.5, GraphLabel::J);
        assert!(!is_connected(&g));
    }

    #[test]
    fn move_space_examples() {
        assert!(move_space_contains(Point2::ORIGIN, Point2::new(1.0, 1.0)));
        assert!(!move_space_contains(Point2::ORIGIN, Point2::new(-1.0, 5.0)));
        assert!(move_space_contains(Point2::ORIGIN, Point2::ORIGIN));
    }

    #[test]
    fn ell_examples() {
        assert_eq!(ell(&pts(&[(0.0, 0.0)])), Point2::ORIGIN);
        assert_eq!(ell(&pts(&[(0.0, 0.0), (1.0, -1.0)])), Point2::new(1.0, 0.0));
        assert_eq!(
            ell(&pts(&[(3.0, 2.0), (1.0, 5.0), (0.0, 0.0)])),
            Point2::new(3.0, 5.0)
        );
    }

    #[test]
    fn ledger_initially_mutual_within_d() {
        let p = params();
        let positions = pts(&[(0.0, 0.0), (3.5, 0.0), (3.5, 3.4)]);
        let ledger = AwarenessLedger::init(&positions, &p);
        assert!(ledger.mutually_aware(0, 1));
        assert!(ledger.mutually_aware(1, 2));
        // 0 and 2 are at distance ~4.88 > V: not aware.
        assert!(!ledger.mutually_aware(0, 2));
        assert!(edges_connected(3, &ledger.mutual_edges()));
    }

    #[test]
    fn look_updates_only_looker() {
        let p = params();
        let mut positions = pts(&[(0.0, 0.0), (3.5, 0.0)]);
        let mut ledger = AwarenessLedger::init(&positions, &p);
        assert!(ledger.mutually_aware(0, 1));
        // Robot 1 drifts out of the awareness region; only a Look by 0
        // updates 0's directed flag.
        positions[1] = Point2::new(3.6, 0.0);
        let before = ledger.directed(1, 0);
        ledger.record_look(0, &positions, &p);
        assert!(!ledger.directed(0, 1));
        assert_eq!(ledger.directed(1, 0), before);
    }
}

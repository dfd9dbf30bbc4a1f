//! Pure planar geometry: norms, the protocol's region family
//! (`D0`, `D1`, `D2`, `S`, `R`, `Q1`, `Q2`, `H1`, `H2`), region-boundary
//! intersections, and closed-form minimum distance between linearly moving
//! points.
//!
//! All region math is centered at the origin; callers translate into the
//! computing robot's frame. Membership tests apply a conservative tolerance
//! of `1e-9 * V`: closed regions are grown by it and the halt zones are
//! inflated by it, so rounding can only make the protocol more cautious,
//! never less.

use core::fmt;

use libm::sqrt;

/// Relative tolerance applied to all boundary comparisons, scaled by `V`.
pub const GEO_TOL_REL: f64 = 1e-9;

/// A point (or vector) in the plane, in world units.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn add(self, other: Point2) -> Point2 {
        Point2::new(self.x + other.x, self.y + other.y)
    }

    pub fn sub(self, other: Point2) -> Point2 {
        Point2::new(self.x - other.x, self.y - other.y)
    }

    pub fn scale(self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }

    /// Euclidean norm.
    pub fn norm2(self) -> f64 {
        sqrt(self.x * self.x + self.y * self.y)
    }

    /// Squared Euclidean norm; avoids the square root in comparisons.
    pub fn norm2_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    /// Infinity norm, `max(|x|, |y|)`.
    pub fn norm_inf(self) -> f64 {
        let ax = if self.x < 0.0 { -self.x } else { self.x };
        let ay = if self.y < 0.0 { -self.y } else { self.y };
        if ax > ay {
            ax
        } else {
            ay
        }
    }

    /// Swap coordinates (reflection across the line `y = x`).
    pub fn transpose(self) -> Point2 {
        Point2::new(self.y, self.x)
    }

    /// Rotate clockwise by 45 degrees.
    pub fn rotate_cw45(self) -> Point2 {
        let c = core::f64::consts::FRAC_1_SQRT_2;
        Point2::new((self.x + self.y) * c, (self.y - self.x) * c)
    }

    /// Rotate counterclockwise by 45 degrees.
    pub fn rotate_ccw45(self) -> Point2 {
        let c = core::f64::consts::FRAC_1_SQRT_2;
        Point2::new((self.x - self.y) * c, (self.x + self.y) * c)
    }
}

/// Euclidean distance between two points.
pub fn dist2(p: Point2, q: Point2) -> f64 {
    p.sub(q).norm2()
}

/// Infinity-norm distance between two points.
pub fn dist_inf(p: Point2, q: Point2) -> f64 {
    p.sub(q).norm_inf()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeometryError {
    /// `rho` must satisfy `0 < rho <= V/4`.
    InvalidRho,
    /// The query line does not intersect the region; indicates a caller bug.
    LineMissesRegion,
    /// An argument fell outside the documented domain.
    DomainViolation,
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::InvalidRho => write!(f, "rho must satisfy 0 < rho <= V/4"),
            GeometryError::LineMissesRegion => write!(f, "line does not intersect region"),
            GeometryError::DomainViolation => write!(f, "argument outside domain"),
        }
    }
}

/// Identifier for the regions of the Compute phase, all centered at the
/// computing robot's origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionId {
    D0,
    D1,
    D2,
    S,
    R,
    Q1,
    Q2,
    H1,
    H2,
}

/// The region family used by the Compute phase, derived from `V` and `rho`.
///
/// `D0`, `D1`, `D2` are the closed disks of radii `V`, `V - rho/2` and
/// `V - rho`; `S` is the closed square circumscribed around `D2`;
/// `R = D1 ∩ S`. `p1` is the leftmost intersection of the `D1` circle with
/// the horizontal line at height `V - rho`, and `p2` its mirror image across
/// `y = x`.
#[derive(Clone, Copy, Debug)]
pub struct ComputeRegions {
    pub v: f64,
    pub rho: f64,
    pub radius0: f64,
    pub radius1: f64,
    pub radius2: f64,
    pub square_half_side: f64,
    pub p1: Point2,
    pub p2: Point2,
    tol: f64,
}

impl ComputeRegions {
    pub fn new(v: f64, rho: f64) -> Result<Self, GeometryError> {
        if !(v > 0.0) || !(rho > 0.0) || rho > v / 4.0 {
            return Err(GeometryError::InvalidRho);
        }
        let radius1 = v - rho / 2.0;
        let radius2 = v - rho;
        let off = sqrt(radius1 * radius1 - radius2 * radius2);
        Ok(ComputeRegions {
            v,
            rho,
            radius0: v,
            radius1,
            radius2,
            square_half_side: radius2,
            p1: Point2::new(-off, radius2),
            p2: Point2::new(radius2, -off),
            tol: GEO_TOL_REL * v,
        })
    }

    /// The conservative boundary tolerance, `1e-9 * V`.
    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    fn within_disk(&self, p: Point2, radius: f64) -> bool {
        let r = radius + self.tol;
        p.norm2_sq() <= r * r
    }

    /// Strictly outside the `D2` disk deflated by the tolerance; used by the
    /// halt zones so they are inflated rather than shrunk by rounding.
    fn outside_d2_inflated(&self, p: Point2) -> bool {
        let r = self.radius2 - self.tol;
        p.norm2_sq() > r * r
    }

    pub fn in_d0(&self, p: Point2) -> bool {
        self.within_disk(p, self.radius0)
    }

    pub fn in_d1(&self, p: Point2) -> bool {
        self.within_disk(p, self.radius1)
    }

    pub fn in_d2(&self, p: Point2) -> bool {
        self.within_disk(p, self.radius2)
    }

    pub fn in_square(&self, p: Point2) -> bool {
        let h = self.square_half_side + self.tol;
        p.x >= -h && p.x <= h && p.y >= -h && p.y <= h
    }

    pub fn in_r(&self, p: Point2) -> bool {
        self.in_d1(p) && self.in_square(p)
    }

    /// Upper-left quadrant of `D0`: positive `y`, non-positive `x`.
    /// The right border is included, the bottom border excluded.
    pub fn in_q1(&self, p: Point2) -> bool {
        self.in_d0(p) && p.y > 0.0 && p.x <= self.tol
    }

    /// Lower-right quadrant of `D0`: positive `x`, non-positive `y`.
    pub fn in_q2(&self, p: Point2) -> bool {
        self.in_d0(p) && p.x > 0.0 && p.y <= self.tol
    }

    /// Left halt zone: `(R \ D2) ∩ Q1` with `x < p1.x`, inflated by the
    /// tolerance.
    pub fn in_h1(&self, p: Point2) -> bool {
        self.in_r(p)
            && self.outside_d2_inflated(p)
            && p.y > 0.0
            && p.x <= self.tol
            && p.x < self.p1.x + self.tol
    }

    /// Bottom halt zone, mirror of `in_h1` across `y = x`.
    pub fn in_h2(&self, p: Point2) -> bool {
        self.in_r(p)
            && self.outside_d2_inflated(p)
            && p.x > 0.0
            && p.y <= self.tol
            && p.y < self.p2.y + self.tol
    }

    pub fn contains(&self, region: RegionId, p: Point2) -> bool {
        match region {
            RegionId::D0 => self.in_d0(p),
            RegionId::D1 => self.in_d1(p),
            RegionId::D2 => self.in_d2(p),
            RegionId::S => self.in_square(p),
            RegionId::R => self.in_r(p),
            RegionId::Q1 => self.in_q1(p),
            RegionId::Q2 => self.in_q2(p),
            RegionId::H1 => self.in_h1(p),
            RegionId::H2 => self.in_h2(p),
        }
    }

    /// Leftmost point of `R \ H1` on the horizontal line at height `y`.
    ///
    /// Closed-form case analysis: the left boundary of `R` is either the
    /// square edge or the `D1` arc; if that point falls in `H1`, the first
    /// escape to the right is the vertical line `x = p1.x` or the `D2` arc,
    /// whichever comes first.
    pub fn leftmost_in_r_minus_h1(&self, y: f64) -> Result<Point2, GeometryError> {
        if !y.is_finite() || y.abs() > self.square_half_side + self.tol {
            return Err(GeometryError::LineMissesRegion);
        }
        // Arc-derived abscissas are nudged inward so that recomposing
        // x^2 + y^2 cannot round onto the wrong side of the membership
        // boundary. The nudge is far below every stated tolerance.
        let nudge = 1e-13 * self.v;
        let r1 = self.radius1 + self.tol;
        let x_r = (-(self.square_half_side + self.tol)).max(-sqrt(r1 * r1 - y * y) + nudge);
        // The entry point is always in R and outside the deflated D2 disk,
        // so it lies in H1 exactly when the quadrant and p1 conditions hold.
        if !(y > 0.0 && x_r < self.p1.x + self.tol) {
            return Ok(Point2::new(x_r, y));
        }
        let mut x_star = self.p1.x + self.tol;
        let d2r = self.radius2 - self.tol;
        if y.abs() <= d2r {
            let xd2 = -sqrt(d2r * d2r - y * y) + nudge;
            if xd2 < x_star {
                x_star = xd2;
            }
        }
        Ok(Point2::new(x_star, y))
    }

    /// Bottommost point of `R \ H2` on the vertical line at abscissa `x`.
    /// Exact mirror of [`Self::leftmost_in_r_minus_h1`] under `x <-> y`.
    pub fn bottommost_in_r_minus_h2(&self, x: f64) -> Result<Point2, GeometryError> {
        let mirrored = self.leftmost_in_r_minus_h1(x)?;
        Ok(Point2::new(x, mirrored.x))
    }
}

/// Length gap between the `D1` and `D2` circles along the vertical chord at
/// abscissa `x`: `f(x) = sqrt((V-rho/2)^2 - x^2) - sqrt((V-rho)^2 - x^2)`.
///
/// `f(0) = rho/2` and `f` is monotonically increasing on `[0, V-rho]`, which
/// bounds from below the length of any segment crossing the annulus.
pub fn annulus_chord_gap(v: f64, rho: f64, x: f64) -> Result<f64, GeometryError> {
    if !(v > 0.0) || !(rho > 0.0) || rho > v / 4.0 {
        return Err(GeometryError::InvalidRho);
    }
    let r1 = v - rho / 2.0;
    let r2 = v - rho;
    if !x.is_finite() || x < 0.0 || x > r2 {
        return Err(GeometryError::DomainViolation);
    }
    let inner = (r2 * r2 - x * x).max(0.0);
    Ok(sqrt(r1 * r1 - x * x) - sqrt(inner))
}

/// Minimum Euclidean distance between two points moving linearly over
/// `[0, dt]`, and the time at which it is attained.
///
/// `p(t) = p0 + t*pv`, `q(t) = q0 + t*qv`; the minimizer of the relative
/// quadratic is clamped to the interval.
pub fn min_dist_linear_motions(
    p0: Point2,
    pv: Point2,
    q0: Point2,
    qv: Point2,
    dt: f64,
) -> (f64, f64) {
    let a = p0.sub(q0);
    let b = pv.sub(qv);
    let bb = b.norm2_sq();
    if bb == 0.0 || dt <= 0.0 {
        return (a.norm2(), 0.0);
    }
    let t = (-(a.x * b.x + a.y * b.y) / bb).clamp(0.0, dt);
    (a.add(b.scale(t)).norm2(), t)
}

#[cfg(test)]
mod tests {
    use super::*;

    const V: f64 = 4.0;
    const RHO: f64 = 0.5;

    fn regions() -> ComputeRegions {
        ComputeRegions::new(V, RHO).unwrap()
    }

    /// Independent 1-D bisection oracle: leftmost x with (x, y) in R \ H1,
    /// probing only the membership predicates.
    fn leftmost_oracle(reg: &ComputeRegions, y: f64) -> Option<f64> {
        let member = |x: f64| {
            let p = Point2::new(x, y);
            reg.in_r(p) && !reg.in_h1(p)
        };
        // Scan for any member to the right, then bisect the left boundary.
        let mut hi = f64::NAN;
        let steps = 100_000;
        for i in 0..=steps {
            let x = -reg.v + 2.0 * reg.v * (i as f64) / (steps as f64);
            if member(x) {
                hi = x;
                break;
            }
        }
        if hi.is_nan() {
            return None;
        }
        let mut lo = -reg.v;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if member(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(hi)
    }

    #[test]
    fn dist2_examples() {
        assert_eq!(dist2(Point2::ORIGIN, Point2::ORIGIN), 0.0);
        assert_eq!(dist2(Point2::ORIGIN, Point2::new(3.0, 4.0)), 5.0);
        assert_eq!(dist2(Point2::new(1.0, 1.0), Point2::new(-2.0, 5.0)), 5.0);
    }

    #[test]
    fn dist_inf_examples() {
        assert_eq!(dist_inf(Point2::ORIGIN, Point2::ORIGIN), 0.0);
        assert_eq!(dist_inf(Point2::ORIGIN, Point2::new(3.0, 4.0)), 4.0);
        assert_eq!(dist_inf(Point2::ORIGIN, Point2::new(-5.0, 2.0)), 5.0);
    }

    #[test]
    fn make_regions_fields() {
        let reg = regions();
        assert_eq!(reg.radius1, 3.75);
        assert_eq!(reg.radius2, 3.5);
        assert!((reg.p1.x - -f64::sqrt(1.8125)).abs() < 1e-12);
        assert_eq!(reg.p1.y, 3.5);
        // p1 lies on the D1 circle.
        assert!((reg.p1.norm2() - reg.radius1).abs() < 1e-12);
        // p2 mirrors p1 across y = x.
        assert_eq!(reg.p2, reg.p1.transpose());

        let big = ComputeRegions::new(16.0, 1.0).unwrap();
        assert_eq!(big.radius1, 15.5);
        assert_eq!(big.radius2, 15.0);
        assert_eq!(big.square_half_side, 15.0);
    }

    #[test]
    fn make_regions_rejects_bad_rho() {
        assert!(ComputeRegions::new(4.0, 0.0).is_err());
        assert!(ComputeRegions::new(4.0, -1.0).is_err());
        assert!(ComputeRegions::new(4.0, 1.1).is_err());
    }

    #[test]
    fn region_membership_examples() {
        let reg = regions();
        // (-2, 3.1): norm ~3.68918 in (3.5, 3.75], left of p1.x, in Q1.
        let p = Point2::new(-2.0, 3.1);
        assert!(reg.in_h1(p));
        assert!(reg.in_q1(p));
        assert!(reg.in_r(p));
        assert!(!reg.in_d2(p));

        let q = Point2::new(1.0, 0.0);
        assert!(reg.in_r(q));
        assert!(!reg.in_h1(q));
        assert!(!reg.in_h2(q));
        assert!(reg.in_q2(q)); // y = 0 is non-positive

        // The origin is in neither quadrant.
        assert!(!reg.in_q1(Point2::ORIGIN));
        assert!(!reg.in_q2(Point2::ORIGIN));
    }

    #[test]
    fn leftmost_square_edge_binds() {
        let reg = regions();
        let p = reg.leftmost_in_r_minus_h1(0.0).unwrap();
        assert!((p.x - -3.5).abs() < 1e-6);
        assert_eq!(p.y, 0.0);
    }

    #[test]
    fn leftmost_d2_arc_binds_at_y_3_1() {
        // At y = 3.1 the left boundary of R is in H1; the first escape is the
        // D2 arc at x = -sqrt(3.5^2 - 3.1^2), which lies left of p1.x.
        let reg = regions();
        let p = reg.leftmost_in_r_minus_h1(3.1).unwrap();
        let expect = -f64::sqrt(3.5 * 3.5 - 3.1 * 3.1);
        assert!((p.x - expect).abs() < 1e-6, "got {} want {}", p.x, expect);
    }

    #[test]
    fn leftmost_at_top_edge_is_p1() {
        let reg = regions();
        let p = reg.leftmost_in_r_minus_h1(3.5).unwrap();
        assert!((p.x - reg.p1.x).abs() < 1e-6);
    }

    #[test]
    fn leftmost_matches_bisection_oracle() {
        let reg = regions();
        let mut y = -3.6;
        while y <= 3.6 {
            let closed = reg.leftmost_in_r_minus_h1(y);
            let oracle = leftmost_oracle(&reg, y);
            match (closed, oracle) {
                (Ok(p), Some(x)) => {
                    assert!(
                        (p.x - x).abs() <= GEO_TOL_REL * V + 1e-10,
                        "y={y}: closed {} vs oracle {x}",
                        p.x
                    );
                }
                (Err(_), None) => {}
                (c, o) => panic!("y={y}: closed {c:?} vs oracle {o:?}"),
            }
            y += 0.0173;
        }
    }

    #[test]
    fn leftmost_output_is_boundary_tight() {
        let reg = regions();
        let tau = 1e-6 * V;
        let mut y = -3.4;
        while y <= 3.4 {
            let p = reg.leftmost_in_r_minus_h1(y).unwrap();
            assert!(reg.in_r(p) && !reg.in_h1(p), "y={y}");
            let left = Point2::new(p.x - tau, y);
            assert!(!(reg.in_r(left) && !reg.in_h1(left)), "y={y}");
            y += 0.0311;
        }
    }

    #[test]
    fn bottommost_examples_and_symmetry() {
        let reg = regions();
        // x = 1: the band above the square edge lies in H2, D2 arc binds.
        let p = reg.bottommost_in_r_minus_h2(1.0).unwrap();
        assert!((p.y - -f64::sqrt(11.25)).abs() < 1e-6);
        // x = -2: D1 arc binds, H2 empty at x <= 0.
        let q = reg.bottommost_in_r_minus_h2(-2.0).unwrap();
        assert!((q.y - -f64::sqrt(10.0625)).abs() < 1e-6);
        // Mirror property.
        let mut c = -3.4;
        while c <= 3.4 {
            let l = reg.leftmost_in_r_minus_h1(c).unwrap();
            let b = reg.bottommost_in_r_minus_h2(c).unwrap();
            assert_eq!(l.x, b.y);
            assert_eq!(l.y, b.x);
            c += 0.217;
        }
    }

    #[test]
    fn leftmost_rejects_missing_line() {
        let reg = regions();
        assert_eq!(
            reg.leftmost_in_r_minus_h1(3.8),
            Err(GeometryError::LineMissesRegion)
        );
    }

    #[test]
    fn annulus_chord_gap_examples() {
        assert!((annulus_chord_gap(4.0, 0.5, 0.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(
            (annulus_chord_gap(4.0, 0.5, 3.5).unwrap() - f64::sqrt(1.8125)).abs() < 1e-12
        );
        assert!((annulus_chord_gap(16.0, 1.0, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(annulus_chord_gap(4.0, 0.5, 3.6).is_err());
        assert!(annulus_chord_gap(4.0, 0.5, -0.1).is_err());
    }

    #[test]
    fn annulus_chord_gap_bounded_below() {
        // Proposition-style grid check: f >= rho/2 with minimum at x = 0.
        let n = 10_000;
        let mut min = f64::INFINITY;
        let mut argmin = 0.0;
        for i in 0..=n {
            let x = 3.5 * (i as f64) / (n as f64);
            let f = annulus_chord_gap(V, RHO, x).unwrap();
            assert!(f >= RHO / 2.0 - GEO_TOL_REL * V);
            if f < min {
                min = f;
                argmin = x;
            }
        }
        assert_eq!(argmin, 0.0);
        assert!((min - RHO / 2.0).abs() < 1e-12);
    }

    #[test]
    fn min_dist_examples() {
        let (d, t) = min_dist_linear_motions(
            Point2::ORIGIN,
            Point2::new(1.0, 0.0),
            Point2::new(0.5, 0.3),
            Point2::ORIGIN,
            1.0,
        );
        assert!((d - 0.3).abs() < 1e-12);
        assert!((t - 0.5).abs() < 1e-12);

        let (d, t) = min_dist_linear_motions(
            Point2::ORIGIN,
            Point2::new(0.7, 0.2),
            Point2::new(2.0, 0.0),
            Point2::new(0.7, 0.2),
            5.0,
        );
        assert_eq!(d, 2.0);
        assert_eq!(t, 0.0);

        let (d, t) = min_dist_linear_motions(
            Point2::ORIGIN,
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(-1.0, 0.0),
            1.0,
        );
        assert_eq!(d, 0.0);
        assert!((t - 0.5).abs() < 1e-12);
    }

    #[test]
    fn min_dist_matches_dense_sampling() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let r = |rng: &mut rand_chacha::ChaCha8Rng| rng.gen_range(-2.0..2.0);
            let p0 = Point2::new(r(&mut rng), r(&mut rng));
            let pv = Point2::new(r(&mut rng), r(&mut rng));
            let q0 = Point2::new(r(&mut rng), r(&mut rng));
            let qv = Point2::new(r(&mut rng), r(&mut rng));
            let dt = rng.gen_range(0.0..3.0);
            let (d, _) = min_dist_linear_motions(p0, pv, q0, qv, dt);
            let mut sampled = f64::INFINITY;
            let n = 10_000;
            for i in 0..=n {
                let t = dt * (i as f64) / (n as f64);
                let g = dist2(p0.add(pv.scale(t)), q0.add(qv.scale(t)));
                sampled = sampled.min(g);
            }
            assert!(d <= sampled + 1e-12);
            // The sampled minimum can sit above the true one by at most the
            // relative speed times half the grid step.
            let grid_err = pv.sub(qv).norm2() * dt / (n as f64) * 0.5 + 1e-12;
            assert!(
                sampled - d <= grid_err,
                "sampling gap too large: {}",
                sampled - d
            );
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_point() -> impl Strategy<Value = Point2> {
            (-4.2..4.2f64, -4.2..4.2f64).prop_map(|(x, y)| Point2::new(x, y))
        }

        proptest! {
            #[test]
            fn region_inclusions(p in arb_point()) {
                let reg = regions();
                if reg.in_h1(p) {
                    prop_assert!(reg.in_r(p));
                    prop_assert!(reg.in_q1(p));
                    prop_assert!(p.norm2() > reg.radius2 - reg.tolerance());
                }
                if reg.in_h2(p) {
                    prop_assert!(reg.in_r(p));
                    prop_assert!(reg.in_q2(p));
                }
                if reg.in_r(p) {
                    prop_assert!(reg.in_d1(p));
                }
                if reg.in_d1(p) {
                    prop_assert!(reg.in_d0(p));
                }
            }

            #[test]
            fn reflection_symmetry(p in arb_point()) {
                let reg = regions();
                let q = p.transpose();
                prop_assert_eq!(reg.in_d0(p), reg.in_d0(q));
                prop_assert_eq!(reg.in_r(p), reg.in_r(q));
                prop_assert_eq!(reg.in_q1(p), reg.in_q2(q));
                prop_assert_eq!(reg.in_h1(p), reg.in_h2(q));
            }

            #[test]
            fn norms_behave(p in arb_point(), q in arb_point()) {
                prop_assert!(dist2(p, q) >= 0.0);
                prop_assert!((dist2(p, q) - dist2(q, p)).abs() < 1e-12);
                prop_assert!(dist_inf(p, q) <= dist2(p, q) + 1e-12);
            }
        }
    }
}

//! Exact integer 3D predicates: orientation sign, general position, and
//! segment-triangle crossing.
//!
//! Coordinates are bounded by [`MAX_COORD`] so every determinant fits in
//! 128-bit signed intermediates with margin; the predicates are exact and
//! never fall back to floating point. Degenerate configurations (four
//! coplanar points among a predicate's arguments) are contract violations
//! for the boolean crossing predicates; callers filter them out via the
//! general-position checks first, or use [`segment_triangle_classify`]
//! which reports degeneracy explicitly.

use serde::{Deserialize, Serialize};

/// Magnitude bound on coordinates accepted by the exact predicates.
///
/// With |c| <= 2^19 the entries of the 3x3 difference matrix are below 2^20,
/// each 2x2 minor below 2^41, and the full determinant below 2^63, so i128
/// accumulation is exact with a wide margin.
pub const MAX_COORD: i64 = 1 << 19;

/// A point of the integer lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GridPoint {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl GridPoint {
    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        GridPoint { x, y, z }
    }

    /// True when every coordinate lies in `0..extent`.
    pub fn in_grid(&self, extent: i32) -> bool {
        (0..extent).contains(&self.x) && (0..extent).contains(&self.y) && (0..extent).contains(&self.z)
    }

    fn coords(&self) -> [i64; 3] {
        [self.x as i64, self.y as i64, self.z as i64]
    }
}

impl std::fmt::Display for GridPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.x, self.y, self.z)
    }
}

/// Sign of the orientation determinant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    Negative,
    Zero,
    Positive,
}

impl Orientation {
    pub fn is_zero(self) -> bool {
        self == Orientation::Zero
    }

    pub fn reversed(self) -> Self {
        match self {
            Orientation::Negative => Orientation::Positive,
            Orientation::Zero => Orientation::Zero,
            Orientation::Positive => Orientation::Negative,
        }
    }

    fn of(v: i128) -> Self {
        match v.cmp(&0) {
            std::cmp::Ordering::Less => Orientation::Negative,
            std::cmp::Ordering::Equal => Orientation::Zero,
            std::cmp::Ordering::Greater => Orientation::Positive,
        }
    }
}

fn check_contract(p: &GridPoint) {
    assert!(
        (p.x as i64).abs() <= MAX_COORD && (p.y as i64).abs() <= MAX_COORD && (p.z as i64).abs() <= MAX_COORD,
        "coordinate magnitude exceeds exactness contract (|c| <= 2^19): {p}"
    );
}

/// Sign of det[b-a; c-a; d-a], computed exactly.
///
/// Positive iff `d` lies on the side of plane(a,b,c) that makes
/// (b-a, c-a, d-a) a right-handed frame; zero iff the four points are
/// coplanar. Panics if any coordinate exceeds [`MAX_COORD`].
pub fn orient3d(a: GridPoint, b: GridPoint, c: GridPoint, d: GridPoint) -> Orientation {
    for p in [&a, &b, &c, &d] {
        check_contract(p);
    }
    let [ax, ay, az] = a.coords();
    let [ux, uy, uz] = [b.coords()[0] - ax, b.coords()[1] - ay, b.coords()[2] - az];
    let [vx, vy, vz] = [c.coords()[0] - ax, c.coords()[1] - ay, c.coords()[2] - az];
    let [wx, wy, wz] = [d.coords()[0] - ax, d.coords()[1] - ay, d.coords()[2] - az];
    let det = (ux as i128) * ((vy * wz - vz * wy) as i128)
        - (uy as i128) * ((vx * wz - vz * wx) as i128)
        + (uz as i128) * ((vx * wy - vy * wx) as i128);
    Orientation::of(det)
}

/// True iff a, b, c lie on a common line (including coincident points).
pub fn collinear(a: GridPoint, b: GridPoint, c: GridPoint) -> bool {
    for p in [&a, &b, &c] {
        check_contract(p);
    }
    let [ax, ay, az] = a.coords();
    let [ux, uy, uz] = [b.coords()[0] - ax, b.coords()[1] - ay, b.coords()[2] - az];
    let [vx, vy, vz] = [c.coords()[0] - ax, c.coords()[1] - ay, c.coords()[2] - az];
    uy * vz - uz * vy == 0 && uz * vx - ux * vz == 0 && ux * vy - uy * vx == 0
}

/// No four points coplanar (which also excludes three collinear points and
/// coincident pairs once four or more points are present; shorter lists are
/// checked directly for distinctness and collinearity).
pub fn in_general_position(points: &[GridPoint]) -> bool {
    let n = points.len();
    match n {
        0 | 1 => true,
        2 => points[0] != points[1],
        3 => {
            points[0] != points[1]
                && points[0] != points[2]
                && points[1] != points[2]
                && !collinear(points[0], points[1], points[2])
        }
        _ => {
            for i in 0..n {
                for j in i + 1..n {
                    for k in j + 1..n {
                        for l in k + 1..n {
                            if orient3d(points[i], points[j], points[k], points[l]).is_zero() {
                                return false;
                            }
                        }
                    }
                }
            }
            true
        }
    }
}

/// Incremental form of [`in_general_position`]: assuming `prefix` already
/// passes, decide whether `prefix + [p]` still does by testing only the
/// simplices that contain `p`.
pub fn extend_general_position(prefix: &[GridPoint], p: GridPoint) -> bool {
    let k = prefix.len();
    match k {
        0 => true,
        1 => prefix[0] != p,
        2 => prefix[0] != p && prefix[1] != p && !collinear(prefix[0], prefix[1], p),
        _ => {
            for i in 0..k {
                for j in i + 1..k {
                    for l in j + 1..k {
                        if orient3d(prefix[i], prefix[j], prefix[l], p).is_zero() {
                            return false;
                        }
                    }
                }
            }
            true
        }
    }
}

/// Outcome of classifying an open segment against an open triangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SegmentTriangle {
    Crossing,
    NoCrossing,
    /// Some quadruple among the five points is coplanar; the crossing
    /// question is outside the predicate's domain.
    Degenerate,
}

/// Classify whether the open segment `pq` meets the open triangle `abc`.
///
/// The five orient3d signs evaluated here are exactly the five quadruples of
/// the input points, so degeneracy (any coplanar quadruple) is detected as a
/// byproduct and reported instead of guessed at.
pub fn segment_triangle_classify(
    p: GridPoint,
    q: GridPoint,
    a: GridPoint,
    b: GridPoint,
    c: GridPoint,
) -> SegmentTriangle {
    let sp = orient3d(a, b, c, p);
    let sq = orient3d(a, b, c, q);
    if sp.is_zero() || sq.is_zero() {
        return SegmentTriangle::Degenerate;
    }
    if sp == sq {
        return SegmentTriangle::NoCrossing;
    }
    let s1 = orient3d(p, q, a, b);
    let s2 = orient3d(p, q, b, c);
    let s3 = orient3d(p, q, c, a);
    if s1.is_zero() || s2.is_zero() || s3.is_zero() {
        return SegmentTriangle::Degenerate;
    }
    if s1 == s2 && s2 == s3 {
        SegmentTriangle::Crossing
    } else {
        SegmentTriangle::NoCrossing
    }
}

/// True iff the open segment `pq` meets the open triangle `abc`.
///
/// Requires `{p,q}` disjoint from `{a,b,c}` and the five points in general
/// position; panics otherwise.
pub fn segment_triangle_crossing(
    p: GridPoint,
    q: GridPoint,
    a: GridPoint,
    b: GridPoint,
    c: GridPoint,
) -> bool {
    assert!(
        p != a && p != b && p != c && q != a && q != b && q != c && p != q,
        "segment and triangle must not share endpoints"
    );
    match segment_triangle_classify(p, q, a, b, c) {
        SegmentTriangle::Crossing => true,
        SegmentTriangle::NoCrossing => false,
        SegmentTriangle::Degenerate => {
            panic!("segment_triangle_crossing requires the five points in general position")
        }
    }
}

/// Improper-intersection test for two placed triangles.
///
/// `shared` is the number of vertex labels the triangles have in common;
/// shared labels must be placed at identical coordinates. In general
/// position two triangles sharing an edge meet exactly in that edge, and an
/// edge incident to a shared vertex can meet the other triangle only at the
/// vertex, so only edges with both endpoints outside the other triangle's
/// vertex set need the crossing predicate.
pub fn triangles_conflict(t1: [GridPoint; 3], t2: [GridPoint; 3], shared: usize) -> bool {
    assert!(shared <= 2, "two triangles share at most 2 vertices");
    if shared == 2 {
        return false;
    }
    let edge_crosses = |tri: [GridPoint; 3], other: [GridPoint; 3]| -> bool {
        for (i, j) in [(0, 1), (1, 2), (2, 0)] {
            let (p, q) = (tri[i], tri[j]);
            if other.contains(&p) || other.contains(&q) {
                continue;
            }
            if segment_triangle_crossing(p, q, other[0], other[1], other[2]) {
                return true;
            }
        }
        false
    };
    edge_crosses(t1, t2) || edge_crosses(t2, t1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gp(x: i32, y: i32, z: i32) -> GridPoint {
        GridPoint::new(x, y, z)
    }

    #[test]
    fn orient3d_unit_simplex() {
        assert_eq!(
            orient3d(gp(0, 0, 0), gp(1, 0, 0), gp(0, 1, 0), gp(0, 0, 1)),
            Orientation::Positive
        );
    }

    #[test]
    fn orient3d_coplanar() {
        assert_eq!(
            orient3d(gp(0, 0, 0), gp(1, 0, 0), gp(0, 1, 0), gp(3, 5, 0)),
            Orientation::Zero
        );
    }

    #[test]
    fn orient3d_antisymmetric() {
        let (a, b, c, d) = (gp(0, 0, 0), gp(2, 1, 0), gp(1, 3, 2), gp(0, 1, 4));
        assert_eq!(orient3d(a, b, c, d), orient3d(b, a, c, d).reversed());
        assert_eq!(orient3d(a, b, c, d), orient3d(a, c, b, d).reversed());
        assert_eq!(orient3d(a, b, c, d), orient3d(a, b, d, c).reversed());
        // even permutation
        assert_eq!(orient3d(a, b, c, d), orient3d(b, c, a, d));
    }

    #[test]
    #[should_panic(expected = "exactness contract")]
    fn orient3d_rejects_oversized_coordinates() {
        let big = (MAX_COORD + 1) as i32;
        orient3d(gp(big, 0, 0), gp(0, 0, 0), gp(0, 1, 0), gp(0, 0, 1));
    }

    #[test]
    fn general_position_basics() {
        let simplex = [gp(0, 0, 0), gp(1, 0, 0), gp(0, 1, 0), gp(0, 0, 1)];
        assert!(in_general_position(&simplex));
        // planar quadruple inside a 5-point set
        let bad = [gp(0, 0, 0), gp(1, 0, 0), gp(0, 1, 0), gp(2, 3, 0), gp(1, 1, 1)];
        assert!(!in_general_position(&bad));
        // three collinear points
        assert!(!in_general_position(&[gp(0, 0, 0), gp(1, 1, 1), gp(2, 2, 2)]));
        assert!(!in_general_position(&[gp(1, 2, 3), gp(1, 2, 3)]));
    }

    #[test]
    fn extend_matches_full_check() {
        let simplex = [gp(0, 0, 0), gp(1, 0, 0), gp(0, 1, 0), gp(0, 0, 1)];
        assert!(extend_general_position(&simplex, gp(1, 1, 1)));
        assert!(!extend_general_position(&simplex, gp(2, 0, 0)));
        assert!(!extend_general_position(&simplex[..2], gp(2, 0, 0)));
    }

    #[test]
    fn segment_pierces_triangle() {
        let (a, b, c) = (gp(0, 0, 0), gp(4, 0, 0), gp(0, 4, 0));
        assert!(segment_triangle_crossing(gp(1, 1, -1), gp(1, 1, 1), a, b, c));
        assert!(!segment_triangle_crossing(gp(9, 9, -1), gp(9, 9, 1), a, b, c));
        // both endpoints on the same side of the plane
        assert!(!segment_triangle_crossing(gp(1, 1, 1), gp(2, 1, 3), a, b, c));
    }

    #[test]
    fn segment_classify_degenerate() {
        let (a, b, c) = (gp(0, 0, 0), gp(4, 0, 0), gp(0, 4, 0));
        assert_eq!(
            segment_triangle_classify(gp(1, 1, 0), gp(2, 2, 1), a, b, c),
            SegmentTriangle::Degenerate
        );
    }

    #[test]
    fn triangle_conflicts() {
        let t2 = [gp(0, 0, 0), gp(4, 0, 0), gp(0, 4, 0)];
        assert!(triangles_conflict([gp(1, 1, -1), gp(1, 1, 1), gp(9, 9, 9)], t2, 0));
        // symmetric variant with all six points in general position
        let t1 = [gp(1, 1, -1), gp(1, 2, 2), gp(7, 6, 5)];
        assert!(triangles_conflict(t1, t2, 0));
        assert!(triangles_conflict(t2, t1, 0));
        let far = [gp(21, 27, 27), gp(27, 30, 26), gp(23, 21, 27)];
        assert!(!triangles_conflict(far, t2, 0));
        // sharing an edge never conflicts
        assert!(!triangles_conflict(
            [gp(0, 0, 0), gp(4, 0, 0), gp(0, 0, 5)],
            t2,
            2
        ));
    }
}

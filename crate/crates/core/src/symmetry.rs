//! The 48 lattice-preserving isometries of the cubic grid (axis permutations
//! combined with per-axis reflections), canonical forms for point sets, and
//! the lexicographic-minimality pruning rule used by the enumerator.

use serde::{Deserialize, Serialize};

use crate::geom::GridPoint;

const AXIS_PERMS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// One of the 48 symmetries of the grid `{0..extent-1}^3`: output axis `i`
/// reads input axis `perm[i]`, reflected (`c -> extent-1-c`) when `flips[i]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeIsometry {
    pub perm: [usize; 3],
    pub flips: [bool; 3],
    pub extent: i32,
}

impl CubeIsometry {
    pub fn identity(extent: i32) -> Self {
        CubeIsometry {
            perm: [0, 1, 2],
            flips: [false; 3],
            extent,
        }
    }

    /// Image of a grid point; panics if `p` lies outside the grid.
    pub fn apply(&self, p: GridPoint) -> GridPoint {
        assert!(p.in_grid(self.extent), "point {p} outside {0}^3 grid", self.extent);
        let input = [p.x, p.y, p.z];
        let mut out = [0i32; 3];
        for i in 0..3 {
            let c = input[self.perm[i]];
            out[i] = if self.flips[i] { self.extent - 1 - c } else { c };
        }
        GridPoint::new(out[0], out[1], out[2])
    }

    /// Sorted image of a point set.
    pub fn apply_set(&self, points: &[GridPoint]) -> Vec<GridPoint> {
        let mut image: Vec<GridPoint> = points.iter().map(|&p| self.apply(p)).collect();
        image.sort_unstable();
        image
    }

    /// True when the isometry reverses orientation (odd axis permutation
    /// composed with an odd number of reflections).
    pub fn reverses_orientation(&self) -> bool {
        let perm_odd = matches!(self.perm, [0, 2, 1] | [1, 0, 2] | [2, 1, 0]);
        let flips_odd = self.flips.iter().filter(|&&f| f).count() % 2 == 1;
        perm_odd != flips_odd
    }
}

/// All 48 isometries of the grid, in a fixed deterministic order with the
/// identity first.
pub fn all_isometries(extent: i32) -> Vec<CubeIsometry> {
    assert!(extent >= 1);
    let mut out = Vec::with_capacity(48);
    for perm in AXIS_PERMS {
        for bits in 0..8u8 {
            out.push(CubeIsometry {
                perm,
                flips: [bits & 1 != 0, bits & 2 != 0, bits & 4 != 0],
                extent,
            });
        }
    }
    out
}

/// The lexicographically least sequence among the sorted images of `points`
/// under all 48 isometries. A set is canonical iff it equals its canonical
/// form.
pub fn canonical_form(points: &[GridPoint], extent: i32) -> Vec<GridPoint> {
    let mut best: Option<Vec<GridPoint>> = None;
    for g in all_isometries(extent) {
        let image = g.apply_set(points);
        match &best {
            Some(b) if *b <= image => {}
            _ => best = Some(image),
        }
    }
    best.unwrap_or_default()
}

/// True iff the sorted `points` sequence equals its canonical form.
pub fn is_canonical(points: &[GridPoint], extent: i32) -> bool {
    canonical_form(points, extent) == points
}

/// Sound pruning rule for the enumerator, which grows point sets in strictly
/// increasing order: returns `false` iff some isometry maps the prefix to a
/// lexicographically smaller sorted sequence. In that case no extension of
/// the prefix by larger points can be canonical, because adding points can
/// only shrink each position of the sorted image, so the same witness beats
/// every extension.
pub fn prefix_can_be_lexmin(prefix: &[GridPoint], extent: i32) -> bool {
    debug_assert!(prefix.windows(2).all(|w| w[0] < w[1]), "prefix must be increasing");
    for g in all_isometries(extent) {
        if g.apply_set(prefix)[..] < *prefix {
            return false;
        }
    }
    true
}

/// Orbit size of a point set under the 48 isometries (divides 48).
pub fn orbit_size(points: &[GridPoint], extent: i32) -> usize {
    let mut images: Vec<Vec<GridPoint>> = all_isometries(extent)
        .iter()
        .map(|g| g.apply_set(points))
        .collect();
    images.sort_unstable();
    images.dedup();
    images.len()
}

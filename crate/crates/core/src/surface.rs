//! Abstract triangulated surfaces: validation of facet lists as closed
//! orientable 2-manifolds, Euler characteristic, genus, vertex links, and
//! the Heawood lower bound on vertex counts.
//!
//! Vertex labels are 1-based throughout, matching published facet lists.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A labeled abstract simplicial surface: a vertex count and a list of
/// triangles over labels `1..=vertex_count`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triangulation {
    name: String,
    vertex_count: usize,
    facets: Vec<[usize; 3]>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TriangulationError {
    #[error("facet #{index} has a repeated label: {facet:?}")]
    RepeatedLabel { index: usize, facet: [usize; 3] },
    #[error("facet #{index} label {label} outside 1..={max}")]
    LabelOutOfRange { index: usize, label: usize, max: usize },
    #[error("facets #{first} and #{second} are the same 3-set")]
    DuplicateFacet { first: usize, second: usize },
    #[error("label {label} occurs in no facet")]
    UnusedLabel { label: usize },
}

impl Triangulation {
    /// Build a triangulation, checking the simplicial-complex invariants:
    /// three distinct in-range labels per facet, no duplicate 3-sets, every
    /// label used. Facet order is preserved for reporting but carries no
    /// meaning.
    pub fn new(
        name: impl Into<String>,
        vertex_count: usize,
        facets: Vec<[usize; 3]>,
    ) -> Result<Self, TriangulationError> {
        let mut seen: BTreeMap<[usize; 3], usize> = BTreeMap::new();
        let mut used = vec![false; vertex_count + 1];
        for (index, facet) in facets.iter().enumerate() {
            for &label in facet {
                if label == 0 || label > vertex_count {
                    return Err(TriangulationError::LabelOutOfRange {
                        index,
                        label,
                        max: vertex_count,
                    });
                }
                used[label] = true;
            }
            let mut key = *facet;
            key.sort_unstable();
            if key[0] == key[1] || key[1] == key[2] {
                return Err(TriangulationError::RepeatedLabel { index, facet: *facet });
            }
            if let Some(&first) = seen.get(&key) {
                return Err(TriangulationError::DuplicateFacet { first, second: index });
            }
            seen.insert(key, index);
        }
        for label in 1..=vertex_count {
            if !used[label] {
                return Err(TriangulationError::UnusedLabel { label });
            }
        }
        Ok(Triangulation {
            name: name.into(),
            vertex_count,
            facets,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn facets(&self) -> &[[usize; 3]] {
        &self.facets
    }

    /// Every 2-subset of labels contained in at least one facet, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut set = BTreeSet::new();
        for facet in &self.facets {
            let mut f = *facet;
            f.sort_unstable();
            set.insert((f[0], f[1]));
            set.insert((f[0], f[2]));
            set.insert((f[1], f[2]));
        }
        set.into_iter().collect()
    }
}

/// Ways a facet list can fail to be a connected closed orientable surface.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SurfaceDefect {
    /// An edge lies in a number of facets other than 2.
    NonManifoldEdge { edge: (usize, usize), facet_count: usize },
    /// The link of a vertex is not a single closed cycle.
    DisconnectedVertexLink { vertex: usize },
    /// Orientation propagation across shared edges reached a contradiction.
    NonOrientable,
    /// The facet adjacency graph has more than one component.
    Disconnected,
}

impl std::fmt::Display for SurfaceDefect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SurfaceDefect::NonManifoldEdge { edge, facet_count } => {
                write!(f, "edge ({},{}) lies in {} facets", edge.0, edge.1, facet_count)
            }
            SurfaceDefect::DisconnectedVertexLink { vertex } => {
                write!(f, "link of vertex {vertex} is not a single cycle")
            }
            SurfaceDefect::NonOrientable => write!(f, "non-orientable"),
            SurfaceDefect::Disconnected => write!(f, "facet graph is disconnected"),
        }
    }
}

/// Topological summary of a facet list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyReport {
    pub vertices: usize,
    pub edges: usize,
    pub facets: usize,
    pub euler_characteristic: i64,
    pub is_closed_surface: bool,
    pub is_orientable: bool,
    /// Defined only for connected closed orientable surfaces.
    pub genus: Option<u64>,
    pub defects: Vec<SurfaceDefect>,
}

/// Check whether the facet list is a connected closed surface and compute
/// its invariants.
///
/// Closedness requires every edge in exactly 2 facets and every vertex link
/// a single cycle. Orientability is decided by picking an orientation for
/// one facet per component and propagating across shared edges, requiring
/// opposite induced edge directions; a contradiction means non-orientable.
pub fn validate_closed_surface(t: &Triangulation) -> TopologyReport {
    let v = t.vertex_count();
    let f = t.facets().len();
    let edge_list = t.edges();
    let e = edge_list.len();
    let chi = v as i64 - e as i64 + f as i64;

    let mut defects = Vec::new();

    let mut edge_facets: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (i, facet) in t.facets().iter().enumerate() {
        let mut fs = *facet;
        fs.sort_unstable();
        for edge in [(fs[0], fs[1]), (fs[0], fs[2]), (fs[1], fs[2])] {
            edge_facets.entry(edge).or_default().push(i);
        }
    }
    for (&edge, facets) in &edge_facets {
        if facets.len() != 2 {
            defects.push(SurfaceDefect::NonManifoldEdge {
                edge,
                facet_count: facets.len(),
            });
        }
    }

    let manifold_edges = defects.is_empty();
    if manifold_edges {
        for vertex in 1..=v {
            if assemble_link_cycle(t, vertex).is_none() {
                defects.push(SurfaceDefect::DisconnectedVertexLink { vertex });
            }
        }
    }

    let closed_locally = defects.is_empty();
    let mut connected = true;
    let mut orientable = false;
    if closed_locally {
        match orient_facets(t, &edge_facets) {
            OrientOutcome::Orientable { components } => {
                orientable = true;
                connected = components == 1;
            }
            OrientOutcome::NonOrientable => {
                defects.push(SurfaceDefect::NonOrientable);
            }
        }
        if !connected {
            defects.push(SurfaceDefect::Disconnected);
        }
    }

    let is_closed_surface = closed_locally && connected;
    let genus = if is_closed_surface && orientable {
        debug_assert_eq!(chi % 2, 0);
        Some(((2 - chi) / 2) as u64)
    } else {
        None
    };

    TopologyReport {
        vertices: v,
        edges: e,
        facets: f,
        euler_characteristic: chi,
        is_closed_surface,
        is_orientable: orientable,
        genus,
        defects,
    }
}

enum OrientOutcome {
    Orientable { components: usize },
    NonOrientable,
}

/// Coherently orient all facets (each facet as an ordered triple such that
/// every shared edge is traversed in opposite directions by its two facets).
/// Returns `None` when the surface is non-orientable. Assumes every edge
/// lies in exactly two facets.
pub fn coherent_orientation(t: &Triangulation) -> Option<Vec<[usize; 3]>> {
    let mut edge_facets: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (i, facet) in t.facets().iter().enumerate() {
        let mut fs = *facet;
        fs.sort_unstable();
        for edge in [(fs[0], fs[1]), (fs[0], fs[2]), (fs[1], fs[2])] {
            edge_facets.entry(edge).or_default().push(i);
        }
    }
    orient_facets_impl(t, &edge_facets).map(|(oriented, _)| oriented)
}

fn orient_facets(t: &Triangulation, edge_facets: &BTreeMap<(usize, usize), Vec<usize>>) -> OrientOutcome {
    match orient_facets_impl(t, edge_facets) {
        Some((_, components)) => OrientOutcome::Orientable { components },
        None => OrientOutcome::NonOrientable,
    }
}

fn orient_facets_impl(
    t: &Triangulation,
    edge_facets: &BTreeMap<(usize, usize), Vec<usize>>,
) -> Option<(Vec<[usize; 3]>, usize)> {
    let n = t.facets().len();
    // oriented[i]: ordered triple whose cyclic edge directions define the
    // chosen orientation of facet i
    let mut oriented: Vec<Option<[usize; 3]>> = vec![None; n];
    let mut components = 0;
    for start in 0..n {
        if oriented[start].is_some() {
            continue;
        }
        components += 1;
        oriented[start] = Some(t.facets()[start]);
        let mut queue = vec![start];
        while let Some(i) = queue.pop() {
            let tri = oriented[i].unwrap();
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let edge = (a.min(b), a.max(b));
                for &j in &edge_facets[&edge] {
                    if j == i {
                        continue;
                    }
                    // facet j must traverse the edge as (b, a)
                    let other = t.facets()[j];
                    let c = *other.iter().find(|&&x| x != a && x != b).unwrap();
                    let want = [b, a, c];
                    match oriented[j] {
                        None => {
                            oriented[j] = Some(want);
                            queue.push(j);
                        }
                        Some(existing) => {
                            if !same_cyclic(existing, want) {
                                return None;
                            }
                        }
                    }
                }
            }
        }
    }
    Some((oriented.into_iter().map(|o| o.unwrap()).collect(), components))
}

fn same_cyclic(a: [usize; 3], b: [usize; 3]) -> bool {
    a == b || a == [b[1], b[2], b[0]] || a == [b[2], b[0], b[1]]
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinkError {
    #[error("vertex {0} occurs in no facet")]
    IsolatedVertex(usize),
    #[error("link of vertex {0} is not a single cycle")]
    NotACycle(usize),
}

/// The cycle of neighbors of `v` induced by the facets containing it, in
/// canonical form: starts at the smallest neighbor label and proceeds toward
/// the smaller of its two link-neighbors.
pub fn vertex_link(t: &Triangulation, v: usize) -> Result<Vec<usize>, LinkError> {
    assemble_link_cycle(t, v).ok_or(LinkError::NotACycle(v))
}

/// Build the link of `v` as a cycle; `None` if it is not a single closed
/// cycle covering all neighbors.
fn assemble_link_cycle(t: &Triangulation, v: usize) -> Option<Vec<usize>> {
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for facet in t.facets() {
        if !facet.contains(&v) {
            continue;
        }
        let others: Vec<usize> = facet.iter().copied().filter(|&x| x != v).collect();
        adj.entry(others[0]).or_default().push(others[1]);
        adj.entry(others[1]).or_default().push(others[0]);
    }
    if adj.is_empty() {
        return None;
    }
    for nbrs in adj.values() {
        if nbrs.len() != 2 {
            return None;
        }
    }
    let start = *adj.keys().next().unwrap();
    let mut nbrs = adj[&start].clone();
    nbrs.sort_unstable();
    let mut cycle = vec![start, nbrs[0]];
    loop {
        let cur = *cycle.last().unwrap();
        let prev = cycle[cycle.len() - 2];
        let next = *adj[&cur].iter().find(|&&x| x != prev)?;
        if next == start {
            break;
        }
        if cycle.contains(&next) {
            return None; // revisits without closing: not a simple cycle
        }
        cycle.push(next);
    }
    if cycle.len() != adj.len() {
        return None; // closed early, leaving neighbors uncovered
    }
    Some(cycle)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HeawoodError {
    #[error("Euler characteristic {0} exceeds 2 (no surface has chi > 2)")]
    ChiTooLarge(i64),
}

/// Least integer n with n >= (7 + sqrt(49 - 24*chi)) / 2, computed with the
/// squared inequality in exact integer arithmetic.
pub fn heawood_bound(chi: i64) -> Result<u64, HeawoodError> {
    if chi > 2 {
        return Err(HeawoodError::ChiTooLarge(chi));
    }
    let discriminant = 49 - 24 * chi; // >= 1
    let mut n: i64 = 4; // 2n - 7 must be positive, so n >= 4
    while (2 * n - 7) * (2 * n - 7) < discriminant {
        n += 1;
    }
    Ok(n as u64)
}

/// The boundary of a tetrahedron: the minimal triangulation of the sphere.
pub fn tetrahedron() -> Triangulation {
    Triangulation::new(
        "tetrahedron",
        4,
        vec![[1, 2, 3], [1, 2, 4], [1, 3, 4], [2, 3, 4]],
    )
    .unwrap()
}

/// The boundary of an octahedron (6 vertices, 8 facets).
pub fn octahedron() -> Triangulation {
    // antipodal pairs: (1,6), (2,5), (3,4)
    Triangulation::new(
        "octahedron",
        6,
        vec![
            [1, 2, 3],
            [1, 3, 5],
            [1, 5, 4],
            [1, 4, 2],
            [6, 3, 2],
            [6, 5, 3],
            [6, 4, 5],
            [6, 2, 4],
        ],
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariant_checks_reject_bad_input() {
        assert!(matches!(
            Triangulation::new("x", 3, vec![[1, 2, 2]]),
            Err(TriangulationError::RepeatedLabel { .. })
        ));
        assert!(matches!(
            Triangulation::new("x", 3, vec![[1, 2, 4]]),
            Err(TriangulationError::LabelOutOfRange { .. })
        ));
        assert!(matches!(
            Triangulation::new("x", 3, vec![[1, 2, 3], [3, 2, 1]]),
            Err(TriangulationError::DuplicateFacet { .. })
        ));
        assert!(matches!(
            Triangulation::new("x", 4, vec![[1, 2, 3]]),
            Err(TriangulationError::UnusedLabel { label: 4 })
        ));
    }

    #[test]
    fn single_facet_edges() {
        let t = Triangulation::new("t", 3, vec![[1, 2, 3]]).unwrap();
        assert_eq!(t.edges(), vec![(1, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn tetrahedron_is_a_sphere() {
        let t = tetrahedron();
        assert_eq!(t.edges().len(), 6);
        let report = validate_closed_surface(&t);
        assert!(report.is_closed_surface);
        assert!(report.is_orientable);
        assert_eq!(report.vertices, 4);
        assert_eq!(report.edges, 6);
        assert_eq!(report.facets, 4);
        assert_eq!(report.euler_characteristic, 2);
        assert_eq!(report.genus, Some(0));
        assert!(report.defects.is_empty());
    }

    #[test]
    fn octahedron_is_a_sphere() {
        let report = validate_closed_surface(&octahedron());
        assert!(report.is_closed_surface && report.is_orientable);
        assert_eq!(report.genus, Some(0));
    }

    #[test]
    fn open_disk_is_not_closed() {
        let t = Triangulation::new("disk", 4, vec![[1, 2, 3], [1, 2, 4]]).unwrap();
        let report = validate_closed_surface(&t);
        assert!(!report.is_closed_surface);
        let boundary: Vec<_> = report
            .defects
            .iter()
            .filter_map(|d| match d {
                SurfaceDefect::NonManifoldEdge { edge, facet_count: 1 } => Some(*edge),
                _ => None,
            })
            .collect();
        assert_eq!(boundary, vec![(1, 3), (1, 4), (2, 3), (2, 4)]);
    }

    #[test]
    fn two_spheres_are_disconnected() {
        let mut facets = tetrahedron().facets().to_vec();
        facets.extend([[5, 6, 7], [5, 6, 8], [5, 7, 8], [6, 7, 8]]);
        let t = Triangulation::new("pair", 8, facets).unwrap();
        let report = validate_closed_surface(&t);
        assert!(!report.is_closed_surface);
        assert!(report.defects.contains(&SurfaceDefect::Disconnected));
    }

    #[test]
    fn links_are_canonical_cycles() {
        assert_eq!(vertex_link(&tetrahedron(), 1).unwrap(), vec![2, 3, 4]);
        let oct = octahedron();
        for v in 1..=6 {
            assert_eq!(vertex_link(&oct, v).unwrap().len(), 4);
        }
        // canonical start and direction
        let link = vertex_link(&oct, 1).unwrap();
        assert_eq!(link[0], 2);
        assert!(link[1] < *link.last().unwrap());
    }

    #[test]
    fn link_usage_counts_facets_three_times() {
        for t in [tetrahedron(), octahedron()] {
            let total: usize = (1..=t.vertex_count())
                .map(|v| vertex_link(&t, v).unwrap().len())
                .sum();
            assert_eq!(total, 3 * t.facets().len());
        }
    }

    #[test]
    fn heawood_values() {
        assert_eq!(heawood_bound(2).unwrap(), 4);
        assert_eq!(heawood_bound(0).unwrap(), 7);
        assert_eq!(heawood_bound(-4).unwrap(), 10);
        assert!(heawood_bound(3).is_err());
        // monotone in genus
        let mut last = 0;
        for g in 0..30i64 {
            let n = heawood_bound(2 - 2 * g).unwrap();
            assert!(n >= last);
            last = n;
        }
    }

    #[test]
    fn orientability_is_relabeling_invariant() {
        // relabel octahedron by the permutation 1->3->5->1, 2->4->6->2
        let perm = [0usize, 3, 4, 5, 6, 1, 2];
        let facets: Vec<[usize; 3]> = octahedron()
            .facets()
            .iter()
            .map(|f| [perm[f[0]], perm[f[1]], perm[f[2]]])
            .collect();
        let t = Triangulation::new("oct_relabeled", 6, facets).unwrap();
        let report = validate_closed_surface(&t);
        assert!(report.is_closed_surface && report.is_orientable);
    }
}

//! Deciding whether a (partial or full) coordinate assignment realizes a
//! triangulation as an embedded polyhedron, and the intersection-edge
//! energy used by the annealer.
//!
//! The verifier tests (edge, facet) pairs with disjoint label sets: in
//! general position an improper facet-facet intersection always shows up as
//! some disjoint-endpoint edge crossing a facet, so the pair sweep is both
//! sound and complete for embeddings.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::geom::{
    extend_general_position, in_general_position, segment_triangle_classify, GridPoint,
    SegmentTriangle,
};
use crate::surface::Triangulation;

/// A (partial) assignment of vertex labels to grid points.
#[derive(Clone, Debug)]
pub struct Realization<'t> {
    triangulation: &'t Triangulation,
    placement: BTreeMap<usize, GridPoint>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RealizeError {
    #[error("label {0} outside 1..={1}")]
    LabelOutOfRange(usize, usize),
    #[error("labels {0} and {1} are both placed at {2}")]
    NotInjective(usize, usize, GridPoint),
    #[error("placement is partial ({placed} of {total} labels); use partial_compatible")]
    PartialPlacement { placed: usize, total: usize },
}

/// One crossing: an edge (label pair) piercing a facet (label triple) with
/// disjoint labels.
pub type Conflict = ((usize, usize), [usize; 3]);

/// Outcome of verifying a total placement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub general_position_ok: bool,
    pub conflicts: Vec<Conflict>,
    pub is_valid_embedding: bool,
}

impl<'t> Realization<'t> {
    pub fn new(triangulation: &'t Triangulation) -> Self {
        Realization {
            triangulation,
            placement: BTreeMap::new(),
        }
    }

    pub fn with_placement(
        triangulation: &'t Triangulation,
        placement: impl IntoIterator<Item = (usize, GridPoint)>,
    ) -> Result<Self, RealizeError> {
        let mut r = Realization::new(triangulation);
        for (label, point) in placement {
            r.place(label, point)?;
        }
        Ok(r)
    }

    pub fn triangulation(&self) -> &'t Triangulation {
        self.triangulation
    }

    pub fn placement(&self) -> &BTreeMap<usize, GridPoint> {
        &self.placement
    }

    pub fn is_total(&self) -> bool {
        self.placement.len() == self.triangulation.vertex_count()
    }

    pub fn place(&mut self, label: usize, point: GridPoint) -> Result<(), RealizeError> {
        let n = self.triangulation.vertex_count();
        if label == 0 || label > n {
            return Err(RealizeError::LabelOutOfRange(label, n));
        }
        if let Some((&other, _)) = self.placement.iter().find(|&(&l, &p)| p == point && l != label) {
            return Err(RealizeError::NotInjective(other, label, point));
        }
        self.placement.insert(label, point);
        Ok(())
    }

    fn point(&self, label: usize) -> Option<GridPoint> {
        self.placement.get(&label).copied()
    }

    /// Full verification of a total placement: general position of all
    /// points plus an exhaustive, deterministically ordered sweep over all
    /// disjoint-label (edge, facet) pairs.
    pub fn verify(&self) -> Result<VerificationReport, RealizeError> {
        if !self.is_total() {
            return Err(RealizeError::PartialPlacement {
                placed: self.placement.len(),
                total: self.triangulation.vertex_count(),
            });
        }
        let points: Vec<GridPoint> = self.placement.values().copied().collect();
        let general_position_ok = in_general_position(&points);

        let mut conflicts = Vec::new();
        for edge in self.triangulation.edges() {
            for facet in self.triangulation.facets() {
                let mut facet = *facet;
                facet.sort_unstable();
                if facet.contains(&edge.0) || facet.contains(&edge.1) {
                    continue;
                }
                let p = self.point(edge.0).unwrap();
                let q = self.point(edge.1).unwrap();
                let tri = facet.map(|l| self.point(l).unwrap());
                match segment_triangle_classify(p, q, tri[0], tri[1], tri[2]) {
                    SegmentTriangle::Crossing => conflicts.push((edge, facet)),
                    SegmentTriangle::NoCrossing => {}
                    // only reachable when general position already failed
                    SegmentTriangle::Degenerate => debug_assert!(!general_position_ok),
                }
            }
        }
        conflicts.sort_unstable();
        conflicts.dedup();
        let is_valid_embedding = general_position_ok && conflicts.is_empty();
        Ok(VerificationReport {
            general_position_ok,
            conflicts,
            is_valid_embedding,
        })
    }

    /// Compatibility of a partial placement: placed points in general
    /// position and no crossing among fully placed disjoint-label
    /// (edge, facet) pairs. Monotone: extensions of an incompatible
    /// placement stay incompatible.
    pub fn partial_compatible(&self) -> bool {
        let points: Vec<GridPoint> = self.placement.values().copied().collect();
        if !in_general_position(&points) {
            return false;
        }
        for edge in self.triangulation.edges() {
            let (Some(p), Some(q)) = (self.point(edge.0), self.point(edge.1)) else {
                continue;
            };
            for facet in self.triangulation.facets() {
                if facet.contains(&edge.0) || facet.contains(&edge.1) {
                    continue;
                }
                let placed: Vec<GridPoint> = facet.iter().filter_map(|&l| self.point(l)).collect();
                if placed.len() < 3 {
                    continue;
                }
                if segment_triangle_classify(p, q, placed[0], placed[1], placed[2])
                    == SegmentTriangle::Crossing
                {
                    return false;
                }
            }
        }
        true
    }

    /// Check that additionally placing `label` at `point` keeps the
    /// placement compatible, examining only the pairs completed by the new
    /// vertex. The existing placement must already be compatible and
    /// `point` in general position with the placed points.
    pub fn extension_compatible(&self, label: usize, point: GridPoint) -> bool {
        debug_assert!(!self.placement.contains_key(&label));
        let lookup = |l: usize| -> Option<GridPoint> {
            if l == label {
                Some(point)
            } else {
                self.point(l)
            }
        };
        for edge in self.triangulation.edges() {
            let touches_edge = edge.0 == label || edge.1 == label;
            let (Some(p), Some(q)) = (lookup(edge.0), lookup(edge.1)) else {
                continue;
            };
            for facet in self.triangulation.facets() {
                if facet.contains(&edge.0) || facet.contains(&edge.1) {
                    continue;
                }
                let touches_facet = facet.contains(&label);
                if !touches_edge && !touches_facet {
                    continue; // pair unaffected by the new vertex
                }
                let placed: Vec<GridPoint> = facet.iter().filter_map(|&l| lookup(l)).collect();
                if placed.len() < 3 {
                    continue;
                }
                if segment_triangle_classify(p, q, placed[0], placed[1], placed[2])
                    == SegmentTriangle::Crossing
                {
                    return false;
                }
            }
        }
        true
    }

    /// The intersection-edge energy: number of crossing disjoint-label
    /// (edge, facet) pairs. Requires a total general-position placement.
    pub fn conflict_count(&self) -> Result<usize, RealizeError> {
        let report = self.verify()?;
        assert!(
            report.general_position_ok,
            "conflict_count requires a general-position placement"
        );
        Ok(report.conflicts.len())
    }
}

/// The tetrahedron boundary placed on the unit simplex; the smallest valid
/// embedding, used widely in tests.
pub fn unit_simplex_placement() -> Vec<(usize, GridPoint)> {
    vec![
        (1, GridPoint::new(0, 0, 0)),
        (2, GridPoint::new(1, 0, 0)),
        (3, GridPoint::new(0, 1, 0)),
        (4, GridPoint::new(0, 0, 1)),
    ]
}

/// All placed points in general position, checked incrementally against the
/// sorted point list (used by the enumerator's point-level filter).
pub fn points_extendable(prefix: &[GridPoint], p: GridPoint) -> bool {
    extend_general_position(prefix, p)
}

//! Precomputed per-triangulation tables shared by the enumerator's labeling
//! frontier and the annealer's energy bookkeeping.

use crate::geom::GridPoint;
use crate::surface::Triangulation;

/// Flattened triangulation data: edges, sorted facets, and the list of
/// disjoint-label (edge, facet) pairs, indexed by the labels they involve.
pub(crate) struct TriTables {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub facets: Vec<[usize; 3]>,
    /// Pairs (edge index, facet index) with disjoint label sets.
    pub disjoint_pairs: Vec<(usize, usize)>,
    /// For each label, indices into `disjoint_pairs` of the pairs whose five
    /// labels include it.
    pub pairs_by_label: Vec<Vec<usize>>,
}

impl TriTables {
    pub fn new(tri: &Triangulation) -> Self {
        let n = tri.vertex_count();
        let edges = tri.edges();
        let facets: Vec<[usize; 3]> = tri
            .facets()
            .iter()
            .map(|f| {
                let mut f = *f;
                f.sort_unstable();
                f
            })
            .collect();
        let mut disjoint_pairs = Vec::new();
        let mut pairs_by_label = vec![Vec::new(); n + 1];
        for (ei, &(a, b)) in edges.iter().enumerate() {
            for (fi, facet) in facets.iter().enumerate() {
                if facet.contains(&a) || facet.contains(&b) {
                    continue;
                }
                let pi = disjoint_pairs.len();
                disjoint_pairs.push((ei, fi));
                pairs_by_label[a].push(pi);
                pairs_by_label[b].push(pi);
                for &l in facet {
                    pairs_by_label[l].push(pi);
                }
            }
        }
        TriTables {
            n,
            edges,
            facets,
            disjoint_pairs,
            pairs_by_label,
        }
    }

    /// Points of a pair, `None` unless all five labels are placed.
    /// Order: segment endpoints then triangle corners.
    pub fn pair_points(
        &self,
        pair: usize,
        placement: &[Option<GridPoint>],
    ) -> Option<[GridPoint; 5]> {
        let (ei, fi) = self.disjoint_pairs[pair];
        let (a, b) = self.edges[ei];
        let f = self.facets[fi];
        Some([
            placement[a]?,
            placement[b]?,
            placement[f[0]]?,
            placement[f[1]]?,
            placement[f[2]]?,
        ])
    }
}

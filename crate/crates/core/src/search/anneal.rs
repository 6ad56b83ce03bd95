//! Simulated annealing over grid placements, minimizing the intersection
//! edge functional plus a degeneracy penalty.
//!
//! The energy of a total placement is
//! `conflict_weight * conflicts + lambda * degeneracies`, where `conflicts`
//! counts crossing disjoint-label (edge, facet) pairs and `degeneracies`
//! counts coincident pairs, collinear triples, and coplanar quadruples of
//! placed points. By default `lambda` exceeds the maximum possible conflict
//! count so every degenerate placement scores worse than any
//! general-position one; both weights are positive in every configuration,
//! so energy zero is exactly a valid embedding, which is re-verified before
//! being returned.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geom::{
    collinear, extend_general_position, orient3d, segment_triangle_classify, GridPoint,
    SegmentTriangle,
};
use crate::realize::Realization;
use crate::search::grid_points;
use crate::search::tables::TriTables;
use crate::surface::Triangulation;

#[derive(Clone, Debug)]
pub struct AnnealConfig {
    pub extent: i32,
    /// Initial temperature of the geometric cooling schedule.
    pub t0: f64,
    /// Multiplicative cooling factor applied after every move.
    pub cooling: f64,
    pub max_moves: u64,
    /// Restart from a fresh random placement after this many non-improving
    /// moves; `None` computes the default `50 * V * extent^3`.
    pub restart_interval: Option<u64>,
    /// Optional fixed starting placement (by label, 1-based slot 0 unused).
    pub initial: Option<Vec<GridPoint>>,
    /// Cross-check the incremental energy against a full recount every this
    /// many moves (testing aid; 0 disables).
    pub audit_every: u64,
    /// Degeneracy penalty weight; `None` uses the disjoint-pair count + 1,
    /// which makes every degenerate placement worse than any general-position
    /// one. Any value >= 1 keeps energy 0 equivalent to a valid embedding;
    /// small values let the walker cross degeneracy hyperplanes at low
    /// temperature instead of being confined to one orientation cell.
    pub lambda: Option<u64>,
    /// Probability that a move is proposed inside the Chebyshev ball of
    /// radius [`AnnealConfig::local_radius`] around the vertex's current
    /// point instead of uniformly over the grid. Local proposals keep most
    /// of the placement's structure intact, which is what resolves the last
    /// few conflicts once the walk is near a valid embedding; 0 keeps the
    /// pure uniform-jump move set.
    pub local_prob: f64,
    pub local_radius: i32,
    /// Weight of a crossing pair in the energy; together with `lambda` this
    /// sets the conflict/degeneracy exchange rate (effective penalty ratio
    /// lambda / conflict_weight) without leaving integer arithmetic.
    pub conflict_weight: u64,
    /// When the walk reaches a placement with at most this many total
    /// violations (crossing pairs + degenerate tuples), exhaustively try
    /// relocating one or two of the violating vertices anywhere on the grid
    /// and accept a relocation that is a valid embedding. This resolves
    /// "coordinated move" barriers that single Metropolis steps cannot
    /// cross; 0 disables the polish pass.
    pub polish_threshold: u64,
    /// Extent of the first phase of [`anneal_schedule`]: annealing starts in
    /// this larger cube, where valid embeddings are dense, and each
    /// subsequent phase clamps the best placement into the next smaller cube
    /// and re-anneals, down to `extent`. `None` (or a value <= `extent`)
    /// means a single phase at `extent`.
    pub start_extent: Option<i32>,
    /// Node budget for the exact completion pass of [`anneal_schedule`]:
    /// after clamping a valid embedding into a smaller cube, the vertices
    /// the clamp actually displaced are re-placed by exhaustive depth-first
    /// search over the whole grid (with general-position and crossing
    /// pruning) while the affinely-mapped remainder stays fixed. 0 disables
    /// the pass.
    pub completion_budget: u64,
    /// Weight of the coordinate-excess term: each coordinate unit by which a
    /// vertex sticks out of the `{0..pressure_extent-1}` box adds this much
    /// energy. With `pressure > 0` the walk is pushed to slide along the
    /// space of valid placements toward the target box, so energy 0 means a
    /// valid embedding that already fits the smaller box. 0 disables the
    /// term.
    pub pressure: u64,
    /// Box the pressure term measures against; `None` means the grid itself
    /// (making the term always zero). [`anneal_schedule`] sets this to the
    /// final extent in every phase.
    pub pressure_extent: Option<i32>,
    /// Extra drift-and-retry rounds per larger-extent phase of
    /// [`anneal_schedule`]: after a failed completion attempt, re-anneal for
    /// [`AnnealConfig::slide_moves`] moves starting from the phase's best
    /// placement (a cooler run that drifts along the space of valid
    /// placements under pressure) and try completion again. 0 disables.
    pub slide_rounds: u64,
    /// Moves per slide round.
    pub slide_moves: u64,
}

impl AnnealConfig {
    pub fn new(extent: i32) -> Self {
        AnnealConfig {
            extent,
            t0: 3.0,
            cooling: 0.999,
            max_moves: 1_000_000,
            restart_interval: None,
            initial: None,
            audit_every: 0,
            lambda: None,
            local_prob: 0.0,
            local_radius: 1,
            conflict_weight: 1,
            polish_threshold: 0,
            start_extent: None,
            completion_budget: 0,
            pressure: 0,
            pressure_extent: None,
            slide_rounds: 0,
            slide_moves: 1_000_000,
        }
    }
}

/// A point on the best-energy trace: move index, energy, temperature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePoint {
    pub mv: u64,
    pub energy: u64,
    pub temperature: f64,
}

#[derive(Clone, Debug)]
pub struct AnnealOutcome {
    /// Best placement seen, indexed by label (slot 0 unused).
    pub best_placement: Vec<GridPoint>,
    pub best_energy: u64,
    /// The walk's state when the run ended (equals the best placement on
    /// success); lateral equal-energy drift shows up here but not in the
    /// best.
    pub final_placement: Vec<GridPoint>,
    /// Crossing-pair and degenerate-tuple counts of the best placement.
    pub best_split: (u64, u64),
    pub moves: u64,
    pub restarts: u64,
    pub trace: Vec<TracePoint>,
    /// True iff energy 0 was reached and the verifier confirmed it.
    pub success: bool,
}

struct EnergyModel<'t> {
    tables: TriTables,
    lambda: u64,
    weight: u64,
    /// Weight per coordinate unit outside the `{0..=pressure_cap}` box.
    pressure: u64,
    pressure_cap: i32,
    _tri: &'t Triangulation,
}

impl<'t> EnergyModel<'t> {
    fn new(
        tri: &'t Triangulation,
        lambda: Option<u64>,
        weight: u64,
        pressure: u64,
        pressure_cap: i32,
    ) -> Self {
        let tables = TriTables::new(tri);
        let lambda = lambda
            .unwrap_or(tables.disjoint_pairs.len() as u64 + 1)
            .max(1);
        EnergyModel {
            tables,
            lambda,
            weight: weight.max(1),
            pressure,
            pressure_cap,
            _tri: tri,
        }
    }

    /// Coordinate units by which `p` sticks out of the pressure box.
    fn vertex_excess(&self, p: GridPoint) -> u64 {
        if self.pressure == 0 {
            return 0;
        }
        let cap = self.pressure_cap;
        ((p.x - cap).max(0) + (p.y - cap).max(0) + (p.z - cap).max(0)) as u64
    }

    fn n(&self) -> usize {
        self.tables.n
    }

    /// Full recount of the energy of a total placement.
    fn full_energy(&self, placement: &[GridPoint]) -> u64 {
        let (conflicts, degenerate) = self.split_energy(placement);
        let excess: u64 = placement[1..].iter().map(|&p| self.vertex_excess(p)).sum();
        self.weight * conflicts + self.lambda * degenerate + self.pressure * excess
    }

    /// (crossing pairs, degenerate tuples) of a total placement.
    fn split_energy(&self, placement: &[GridPoint]) -> (u64, u64) {
        let n = self.n();
        let mut degenerate = 0u64;
        for i in 1..=n {
            for j in i + 1..=n {
                if placement[i] == placement[j] {
                    degenerate += 1;
                }
                for k in j + 1..=n {
                    if collinear(placement[i], placement[j], placement[k]) {
                        degenerate += 1;
                    }
                    for l in k + 1..=n {
                        if orient3d(placement[i], placement[j], placement[k], placement[l]).is_zero() {
                            degenerate += 1;
                        }
                    }
                }
            }
        }
        let mut conflicts = 0u64;
        for &(ei, fi) in &self.tables.disjoint_pairs {
            let (a, b) = self.tables.edges[ei];
            let f = self.tables.facets[fi];
            if segment_triangle_classify(
                placement[a],
                placement[b],
                placement[f[0]],
                placement[f[1]],
                placement[f[2]],
            ) == SegmentTriangle::Crossing
            {
                conflicts += 1;
            }
        }
        (conflicts, degenerate)
    }

    /// True iff the placement has no degeneracy and no crossing; early-exit
    /// so that near-miss candidates fail fast.
    fn is_embedding(&self, placement: &[GridPoint]) -> bool {
        let n = self.n();
        for i in 1..=n {
            for j in i + 1..=n {
                if placement[i] == placement[j] {
                    return false;
                }
                for k in j + 1..=n {
                    if collinear(placement[i], placement[j], placement[k]) {
                        return false;
                    }
                    for l in k + 1..=n {
                        if orient3d(placement[i], placement[j], placement[k], placement[l]).is_zero() {
                            return false;
                        }
                    }
                }
            }
        }
        for &(ei, fi) in &self.tables.disjoint_pairs {
            let (a, b) = self.tables.edges[ei];
            let f = self.tables.facets[fi];
            if segment_triangle_classify(
                placement[a],
                placement[b],
                placement[f[0]],
                placement[f[1]],
                placement[f[2]],
            ) == SegmentTriangle::Crossing
            {
                return false;
            }
        }
        true
    }

    /// Labels involved in at least one violation of the placement.
    fn violating_vertices(&self, placement: &[GridPoint]) -> Vec<usize> {
        let n = self.n();
        let mut out = std::collections::BTreeSet::new();
        for i in 1..=n {
            for j in i + 1..=n {
                if placement[i] == placement[j] {
                    out.extend([i, j]);
                }
                for k in j + 1..=n {
                    if collinear(placement[i], placement[j], placement[k]) {
                        out.extend([i, j, k]);
                    }
                    for l in k + 1..=n {
                        if orient3d(placement[i], placement[j], placement[k], placement[l]).is_zero() {
                            out.extend([i, j, k, l]);
                        }
                    }
                }
            }
        }
        for &(ei, fi) in &self.tables.disjoint_pairs {
            let (a, b) = self.tables.edges[ei];
            let f = self.tables.facets[fi];
            if segment_triangle_classify(
                placement[a],
                placement[b],
                placement[f[0]],
                placement[f[1]],
                placement[f[2]],
            ) == SegmentTriangle::Crossing
            {
                out.extend([a, b, f[0], f[1], f[2]]);
            }
        }
        out.into_iter().collect()
    }

    /// True iff vertex `v` participates in no degeneracy, ignoring the
    /// vertex `skip`. Used to prune the outer loop of the pair repair.
    fn vertex_gp_excluding(&self, placement: &[GridPoint], v: usize, skip: usize) -> bool {
        let n = self.n();
        for i in 1..=n {
            if i == v || i == skip {
                continue;
            }
            if placement[i] == placement[v] {
                return false;
            }
            for j in i + 1..=n {
                if j == v || j == skip {
                    continue;
                }
                if collinear(placement[i], placement[j], placement[v]) {
                    return false;
                }
                for k in j + 1..=n {
                    if k == v || k == skip {
                        continue;
                    }
                    if orient3d(placement[i], placement[j], placement[k], placement[v]).is_zero() {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Exhaustive repair: try every relocation of one violating vertex, then
    /// of every pair of violating vertices, anywhere on the grid; rewrites
    /// `placement` and returns true on the first valid embedding found.
    fn try_polish(&self, placement: &mut [GridPoint], grid: &[GridPoint]) -> bool {
        let offenders = self.violating_vertices(placement);
        for &v in &offenders {
            let old = placement[v];
            for &p in grid {
                if p == old {
                    continue;
                }
                placement[v] = p;
                if self.is_embedding(placement) {
                    return true;
                }
            }
            placement[v] = old;
        }
        for a in 0..offenders.len() {
            for b in a + 1..offenders.len() {
                let (u, v) = (offenders[a], offenders[b]);
                let (old_u, old_v) = (placement[u], placement[v]);
                for &p in grid {
                    placement[u] = p;
                    // p must at least be degeneracy-free against the fixed
                    // vertices before the inner scan is worth running
                    if !self.vertex_gp_excluding(placement, u, v) {
                        continue;
                    }
                    for &q in grid {
                        placement[v] = q;
                        if self.is_embedding(placement) {
                            return true;
                        }
                    }
                    placement[v] = old_v;
                }
                placement[u] = old_u;
                placement[v] = old_v;
            }
        }
        false
    }

    /// Energy contributed by all simplices and pairs involving vertex `v`;
    /// moving `v` changes the total energy by exactly the change in this
    /// quantity.
    fn energy_at(&self, placement: &[GridPoint], v: usize) -> u64 {
        let n = self.n();
        let mut degenerate = 0u64;
        for i in 1..=n {
            if i == v {
                continue;
            }
            if placement[i] == placement[v] {
                degenerate += 1;
            }
            for j in i + 1..=n {
                if j == v {
                    continue;
                }
                if collinear(placement[i], placement[j], placement[v]) {
                    degenerate += 1;
                }
                for k in j + 1..=n {
                    if k == v {
                        continue;
                    }
                    if orient3d(placement[i], placement[j], placement[k], placement[v]).is_zero() {
                        degenerate += 1;
                    }
                }
            }
        }
        let mut conflicts = 0u64;
        for &pi in &self.tables.pairs_by_label[v] {
            let (ei, fi) = self.tables.disjoint_pairs[pi];
            let (a, b) = self.tables.edges[ei];
            let f = self.tables.facets[fi];
            if segment_triangle_classify(
                placement[a],
                placement[b],
                placement[f[0]],
                placement[f[1]],
                placement[f[2]],
            ) == SegmentTriangle::Crossing
            {
                conflicts += 1;
            }
        }
        self.weight * conflicts
            + self.lambda * degenerate
            + self.pressure * self.vertex_excess(placement[v])
    }
}

/// Stochastic search for a valid embedding; fully reproducible from `seed`.
pub fn anneal(tri: &Triangulation, config: &AnnealConfig, seed: u64) -> AnnealOutcome {
    let pressure_cap = config.pressure_extent.unwrap_or(config.extent) - 1;
    let model = EnergyModel::new(
        tri,
        config.lambda,
        config.conflict_weight,
        config.pressure,
        pressure_cap,
    );
    let n = model.n();
    let grid = grid_points(config.extent);
    assert!(grid.len() >= 2, "annealing needs extent >= 2");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let restart_interval = config
        .restart_interval
        .unwrap_or(50 * n as u64 * grid.len() as u64);

    let random_placement = |rng: &mut ChaCha8Rng| -> Vec<GridPoint> {
        // distinct random points; slot 0 unused
        let mut chosen: Vec<GridPoint> = Vec::with_capacity(n);
        while chosen.len() < n {
            let p = grid[rng.random_range(0..grid.len())];
            if !chosen.contains(&p) {
                chosen.push(p);
            }
        }
        let mut placement = vec![GridPoint::new(0, 0, 0); n + 1];
        placement[1..].copy_from_slice(&chosen);
        placement
    };

    let mut placement = match &config.initial {
        Some(p) => {
            assert_eq!(p.len(), n + 1, "initial placement must have n+1 slots");
            p.clone()
        }
        None => random_placement(&mut rng),
    };
    let mut energy = model.full_energy(&placement);
    let mut temperature = config.t0;
    let mut best_energy = energy;
    let mut best_placement = placement.clone();
    let mut trace = vec![TracePoint {
        mv: 0,
        energy,
        temperature,
    }];
    let mut non_improving = 0u64;
    let mut restarts = 0u64;
    let mut moves = 0u64;
    let mut window_best = energy;

    while energy > 0 && moves < config.max_moves {
        moves += 1;
        let v = rng.random_range(1..=n);
        let old = placement[v];
        let local = config.local_prob > 0.0 && rng.random::<f64>() < config.local_prob;
        let new = loop {
            let p = if local {
                let r = config.local_radius;
                GridPoint::new(
                    old.x + rng.random_range(-r..=r),
                    old.y + rng.random_range(-r..=r),
                    old.z + rng.random_range(-r..=r),
                )
            } else {
                grid[rng.random_range(0..grid.len())]
            };
            if p != old && p.in_grid(config.extent) {
                break p;
            }
        };
        let before = model.energy_at(&placement, v);
        placement[v] = new;
        let after = model.energy_at(&placement, v);
        // items containing v contribute `before <= energy`, so this cannot underflow
        let candidate = energy - before + after;
        let accept = if candidate <= energy {
            true
        } else {
            let delta = (candidate - energy) as f64;
            rng.random::<f64>() < (-delta / temperature).exp()
        };
        if accept {
            energy = candidate;
        } else {
            placement[v] = old;
        }
        temperature *= config.cooling;

        if config.audit_every > 0 && moves % config.audit_every == 0 {
            assert_eq!(
                energy,
                model.full_energy(&placement),
                "incremental energy drifted from full recount"
            );
        }

        if energy < best_energy {
            best_energy = energy;
            best_placement = placement.clone();
            non_improving = 0;
            trace.push(TracePoint {
                mv: moves,
                energy,
                temperature,
            });
        } else {
            non_improving += 1;
        }

        if config.polish_threshold > 0 && energy > 0 && energy < window_best {
            window_best = energy;
            let (conflicts, degenerate) = model.split_energy(&placement);
            if conflicts + degenerate <= config.polish_threshold
                && model.try_polish(&mut placement, &grid)
            {
                // polish certifies a valid embedding, which may still carry
                // coordinate-excess energy
                energy = model.full_energy(&placement);
            }
        }

        if energy > 0 && non_improving >= restart_interval && moves < config.max_moves {
            // with a fixed starting placement, a restart returns to it;
            // otherwise it draws a fresh random placement
            placement = match &config.initial {
                Some(p) => p.clone(),
                None => random_placement(&mut rng),
            };
            energy = model.full_energy(&placement);
            temperature = config.t0;
            non_improving = 0;
            window_best = energy;
            restarts += 1;
            if energy < best_energy {
                best_energy = energy;
                best_placement = placement.clone();
                trace.push(TracePoint {
                    mv: moves,
                    energy,
                    temperature,
                });
            }
        }
    }

    let success = if energy == 0 {
        best_energy = 0;
        best_placement = placement.clone();
        trace.push(TracePoint {
            mv: moves,
            energy: 0,
            temperature,
        });
        let r = Realization::with_placement(
            tri,
            (1..=n).map(|l| (l, best_placement[l])),
        )
        .expect("energy-zero placement must be injective");
        let report = r.verify().expect("total placement");
        assert!(
            report.is_valid_embedding,
            "energy 0 must coincide with a verified embedding"
        );
        true
    } else {
        false
    };

    let best_split = model.split_energy(&best_placement);
    AnnealOutcome {
        best_placement,
        best_energy,
        final_placement: placement,
        best_split,
        moves,
        restarts,
        trace,
        success,
    }
}

/// Squeeze a placement into the grid of `extent` with a per-axis choice:
/// `clamp_top[axis]` true clamps the top coordinate down, false shifts the
/// whole axis down by one and clamps at zero. Slot 0 is carried along
/// unchanged in meaning (it is unused). Also returns the labels the squeeze
/// actually displaced (relative to the per-axis translation applied to
/// everyone else): the undamaged remainder is the image of the original
/// placement under a translation, so it inherits the original's validity.
fn shrink_variant(
    placement: &[GridPoint],
    extent: i32,
    clamp_top: [bool; 3],
) -> (Vec<GridPoint>, Vec<usize>) {
    let cap = extent - 1;
    let mut out = placement.to_vec();
    let mut damaged = vec![false; out.len()];
    for axis in 0..3 {
        let get = |p: &GridPoint| match axis {
            0 => p.x,
            1 => p.y,
            _ => p.z,
        };
        for (label, p) in out.iter_mut().enumerate().skip(1) {
            let c = get(p);
            let c = if clamp_top[axis] {
                if c > cap {
                    damaged[label] = true;
                }
                c.min(cap)
            } else {
                if c == 0 {
                    damaged[label] = true;
                }
                (c - 1).clamp(0, cap)
            };
            match axis {
                0 => p.x = c,
                1 => p.y = c,
                _ => p.z = c,
            }
        }
    }
    let damaged = (1..out.len()).filter(|&l| damaged[l]).collect();
    (out, damaged)
}

/// Squeeze a placement into the grid of `extent`, choosing for each axis the
/// direction ([`shrink_variant`]) that displaces fewer points.
fn shrink_placement(placement: &[GridPoint], extent: i32) -> (Vec<GridPoint>, Vec<usize>) {
    let cap = extent - 1;
    let mut clamp_top = [true; 3];
    for (axis, mode) in clamp_top.iter_mut().enumerate() {
        let get = |p: &GridPoint| match axis {
            0 => p.x,
            1 => p.y,
            _ => p.z,
        };
        let at_top = placement[1..].iter().filter(|p| get(p) > cap).count();
        let at_bottom = placement[1..].iter().filter(|p| get(p) == 0).count();
        *mode = at_top <= at_bottom;
    }
    shrink_variant(placement, extent, clamp_top)
}

/// Exhaustively re-place `damaged` labels of a clamped placement over the
/// whole `extent` grid by depth-first search, keeping the remaining labels
/// fixed; candidate points must keep the partial point set in general
/// position and introduce no crossing pair (both checked exactly). Explores
/// candidate placements until `nodes` reaches `budget`; returns the first
/// completion whose full verification succeeds.
fn exact_completion(
    tri: &Triangulation,
    clamped: &[GridPoint],
    damaged: &[usize],
    extent: i32,
    nodes: &mut u64,
    budget: u64,
) -> Option<Vec<GridPoint>> {
    let n = tri.vertex_count();
    let fixed = Realization::with_placement(
        tri,
        (1..=n)
            .filter(|l| !damaged.contains(l))
            .map(|l| (l, clamped[l])),
    )
    .ok()?;
    if !fixed.partial_compatible() {
        return None;
    }
    let grid = grid_points(extent);

    fn dfs(
        partial: &Realization,
        damaged: &[usize],
        grid: &[GridPoint],
        nodes: &mut u64,
        budget: u64,
    ) -> Option<Vec<(usize, GridPoint)>> {
        let Some((&label, rest)) = damaged.split_first() else {
            unreachable!("dfs is not called with an empty label list");
        };
        let placed: Vec<GridPoint> = partial.placement().values().copied().collect();
        for &p in grid {
            if *nodes >= budget {
                return None;
            }
            *nodes += 1;
            if placed.contains(&p) || !extend_general_position(&placed, p) {
                continue;
            }
            if !partial.extension_compatible(label, p) {
                continue;
            }
            let mut next = partial.clone();
            next.place(label, p).expect("distinctness checked above");
            if rest.is_empty() {
                let report = next.verify().expect("total placement");
                if report.is_valid_embedding {
                    return Some(vec![(label, p)]);
                }
            } else if let Some(mut found) = dfs(&next, rest, grid, nodes, budget) {
                found.push((label, p));
                return Some(found);
            }
        }
        None
    }

    if damaged.is_empty() {
        return None;
    }
    let found = dfs(&fixed, damaged, &grid, nodes, budget)?;
    let mut out = clamped.to_vec();
    for (l, p) in found {
        out[l] = p;
    }
    Some(out)
}

/// Try to turn a valid embedding into a valid embedding one extent smaller
/// by clamping and exact completion. Each axis can be squeezed two ways
/// ([`shrink_variant`]), giving eight clamp variants with different damaged
/// sets; for each, besides re-placing the damaged labels themselves, up to
/// two additional vertices may be freed, which lets the search escape fixed
/// partial configurations that have no completion. Tasks run
/// fewest-freed-labels-first under the shared node `budget`.
/// All supersets of `base` obtained by freeing up to `extra_depth` of the
/// other labels in `1..=n`, sorted smallest first.
fn freed_sets(base: &[usize], n: usize, extra_depth: usize) -> Vec<Vec<usize>> {
    let free: Vec<usize> = (1..=n).filter(|l| !base.contains(l)).collect();
    let mut sets = vec![base.to_vec()];
    if extra_depth >= 1 {
        for (i, &u) in free.iter().enumerate() {
            let mut s = base.to_vec();
            s.push(u);
            s.sort_unstable();
            sets.push(s);
            if extra_depth >= 2 {
                for &v in &free[i + 1..] {
                    let mut s = base.to_vec();
                    s.push(u);
                    s.push(v);
                    s.sort_unstable();
                    sets.push(s);
                }
            }
        }
    }
    sets.sort_by_key(|s| s.len());
    sets
}

fn complete_after_clamp(
    tri: &Triangulation,
    placement: &[GridPoint],
    extent: i32,
    budget: u64,
) -> Option<Vec<GridPoint>> {
    let n = tri.vertex_count();
    let mut tasks: Vec<(Vec<GridPoint>, Vec<usize>)> = Vec::new();
    for bits in 0..8u8 {
        let (clamped, damaged) =
            shrink_variant(placement, extent, [bits & 1 != 0, bits & 2 != 0, bits & 4 != 0]);
        if damaged.is_empty() {
            continue;
        }
        for set in freed_sets(&damaged, n, 3) {
            if !tasks.iter().any(|(c, d)| *d == set && *c == clamped) {
                tasks.push((clamped.clone(), set));
            }
        }
    }
    tasks.sort_by_key(|(_, damaged)| damaged.len());
    let debug = std::env::var_os("REALIZER_DEBUG").is_some();
    let mut nodes = 0u64;
    for (clamped, damaged) in &tasks {
        if let Some(done) = exact_completion(tri, clamped, damaged, extent, &mut nodes, budget) {
            if debug {
                eprintln!("clamp-completion: hit freed={damaged:?} nodes={nodes}");
            }
            return Some(done);
        }
        if nodes >= budget {
            break;
        }
    }
    if debug {
        eprintln!(
            "clamp-completion: miss tasks={} nodes={nodes} budget={budget}",
            tasks.len()
        );
    }
    None
}

/// Multi-extent annealing schedule.
///
/// Valid embeddings are dense in large cubes and extremely sparse in the
/// smallest feasible ones, so direct annealing at the target extent stalls a
/// few violations short of zero. This runs [`anneal`] at
/// `config.start_extent` first, then repeatedly clamps the best placement
/// into the next smaller cube and re-anneals from it, down to
/// `config.extent`; the clamped placement keeps most of the embedding's
/// combinatorial structure, leaving only the squeezed boundary vertices to
/// repair. Each phase draws a deterministic seed from `seed`, so the whole
/// schedule is reproducible; with `start_extent` unset this is exactly
/// [`anneal`]. The returned outcome is the final phase's, with moves,
/// restarts, and trace accumulated over all phases.
pub fn anneal_schedule(tri: &Triangulation, config: &AnnealConfig, seed: u64) -> AnnealOutcome {
    let final_extent = config.extent;
    let start = config.start_extent.unwrap_or(final_extent).max(final_extent);
    let mut initial = config.initial.clone();
    let mut moves = 0u64;
    let mut restarts = 0u64;
    let mut trace = Vec::new();
    let mut last: Option<AnnealOutcome> = None;
    for (phase, extent) in (final_extent..=start).rev().enumerate() {
        let mut phase_config = config.clone();
        phase_config.extent = extent;
        phase_config.start_extent = None;
        phase_config.initial = initial.clone();
        phase_config.pressure_extent = Some(final_extent);
        let debug = std::env::var_os("REALIZER_DEBUG").is_some();
        let phase_seed = seed ^ (phase as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        let mut outcome = anneal(tri, &phase_config, phase_seed);
        if debug {
            eprintln!(
                "phase: extent={extent} best_energy={} split={:?} moves={} restarts={}",
                outcome.best_energy, outcome.best_split, outcome.moves, outcome.restarts
            );
        }
        moves += outcome.moves;
        restarts += outcome.restarts;
        trace.extend(outcome.trace.iter().copied());
        if extent > final_extent {
            // If the phase ended in a valid embedding, the clamp's undamaged
            // remainder is still valid, so try to finish the job exactly:
            // each axis can be squeezed two ways, giving eight clamp
            // variants; complete them fewest-damaged-first under a shared
            // node budget. On success the next phase starts at a complete
            // embedding and returns immediately. With pressure the phase's
            // best may be a valid embedding that still sticks out of the
            // target box; best_split == (0, 0) identifies validity either
            // way. On a miss, slide rounds drift along the space of valid
            // placements (a cooler re-anneal from the current best under
            // pressure) and retry.
            let model = EnergyModel::new(tri, config.lambda, config.conflict_weight, 0, i32::MAX);
            // completion is attempted on the walk's end state if it is a
            // valid embedding, falling back to the recorded best; the end
            // state carries the lateral drift that makes rounds distinct
            let try_complete = |o: &AnnealOutcome| -> Option<Vec<GridPoint>> {
                if config.completion_budget == 0 {
                    return None;
                }
                if model.is_embedding(&o.final_placement) {
                    if let Some(done) = complete_after_clamp(
                        tri,
                        &o.final_placement,
                        extent - 1,
                        config.completion_budget,
                    ) {
                        return Some(done);
                    }
                }
                if o.best_split == (0, 0) && o.best_placement != o.final_placement {
                    complete_after_clamp(tri, &o.best_placement, extent - 1, config.completion_budget)
                } else {
                    None
                }
            };
            let mut completed = try_complete(&outcome);
            // the anchor is the most recent valid embedding seen; slides
            // restart from it and it only advances to another valid state,
            // so one bad round cannot strand the walk off the manifold
            let mut anchor: Option<Vec<GridPoint>> =
                if model.is_embedding(&outcome.final_placement) {
                    Some(outcome.final_placement.clone())
                } else if outcome.best_split == (0, 0) {
                    Some(outcome.best_placement.clone())
                } else {
                    None
                };
            let mut round = 0u64;
            while completed.is_none()
                && round < config.slide_rounds
                && !outcome.success
                && anchor.is_some()
            {
                round += 1;
                let mut slide_config = phase_config.clone();
                slide_config.initial = anchor.clone();
                slide_config.max_moves = config.slide_moves;
                slide_config.t0 = config.t0 * 0.25;
                let slide_seed =
                    phase_seed ^ round.wrapping_mul(0xd1b5_4a32_d192_ed03);
                let slid = anneal(tri, &slide_config, slide_seed);
                moves += slid.moves;
                restarts += slid.restarts;
                let advanced = if model.is_embedding(&slid.final_placement) {
                    anchor = Some(slid.final_placement.clone());
                    true
                } else if slid.best_split == (0, 0)
                    && anchor.as_deref() != Some(&slid.best_placement[..])
                {
                    anchor = Some(slid.best_placement.clone());
                    true
                } else {
                    false
                };
                if debug {
                    eprintln!(
                        "slide: round={round} best_energy={} split={:?} advanced={advanced}",
                        slid.best_energy, slid.best_split
                    );
                }
                outcome = slid;
                if advanced {
                    if let Some(a) = &anchor {
                        if config.completion_budget > 0 {
                            completed = complete_after_clamp(
                                tri,
                                a,
                                extent - 1,
                                config.completion_budget,
                            );
                        }
                    }
                }
            }
            let shrink_base = anchor.as_deref().unwrap_or(&outcome.best_placement);
            let (least_damage, _) = shrink_placement(shrink_base, extent - 1);
            initial = Some(completed.unwrap_or(least_damage));
        }
        last = Some(outcome);
    }
    let mut out = last.expect("at least one phase");
    out.moves = moves;
    out.restarts = restarts;
    out.trace = trace;
    if !out.success && config.completion_budget > 0 {
        // Final-phase rescue: the walk typically freezes a few violations
        // short of zero. Free exactly the vertices involved in a violation
        // (plus up to one more) and re-place them by the exact DFS.
        let model = EnergyModel::new(tri, config.lambda, config.conflict_weight, 0, i32::MAX);
        let viol = model.violating_vertices(&out.best_placement);
        let debug = std::env::var_os("REALIZER_DEBUG").is_some();
        if debug {
            eprintln!("rescue: violating={viol:?}");
        }
        if !viol.is_empty() {
            // Subsets of the violating set, smallest first: a subset that
            // leaves some violation untouched dies immediately at the
            // partial-compatibility check, so this effectively walks the
            // hitting sets in order of how much of the placement is redone.
            let cap = viol.len().min(6);
            let mut sets: Vec<Vec<usize>> = (1u32..1 << viol.len())
                .filter(|m| (m.count_ones() as usize) <= cap)
                .map(|m| {
                    (0..viol.len())
                        .filter(|i| m & (1 << i) != 0)
                        .map(|i| viol[i])
                        .collect()
                })
                .collect();
            sets.sort_by_key(|s: &Vec<usize>| s.len());
            let mut nodes = 0u64;
            for set in sets {
                if let Some(done) = exact_completion(
                    tri,
                    &out.best_placement,
                    &set,
                    final_extent,
                    &mut nodes,
                    config.completion_budget,
                ) {
                    out.best_placement = done;
                    out.best_energy = 0;
                    out.best_split = (0, 0);
                    out.success = true;
                    break;
                }
                if nodes >= config.completion_budget {
                    break;
                }
            }
            if debug {
                eprintln!(
                    "rescue: done nodes={nodes} budget={} success={}",
                    config.completion_budget, out.success
                );
            }
        }
    }
    out
}

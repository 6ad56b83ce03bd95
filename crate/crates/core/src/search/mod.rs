//! Exhaustive symmetry-reduced enumeration of grid realizations, with
//! sharding and exact-continuation checkpoints, plus the simulated-annealing
//! heuristic in [`anneal`].
//!
//! The enumerator walks strictly increasing point sequences in depth-first
//! order. Each extension must (1) keep the points in general position,
//! (2) survive the lexicographic-minimality pruning rule, and (3) leave the
//! labeling frontier (the surviving partial assignments of triangulation
//! labels to the placed points) non-empty. At full depth the set's
//! canonicity is re-checked and one realization is emitted per surviving
//! total labeling that the verifier accepts, so every valid embedding on the
//! grid is the image of exactly one emitted realization under exactly one
//! cube isometry.

pub mod anneal;
mod tables;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{extend_general_position, segment_triangle_classify, GridPoint, SegmentTriangle};
use crate::realize::Realization;
use crate::surface::Triangulation;
use crate::symmetry::{is_canonical, prefix_can_be_lexmin};

use tables::TriTables;

/// Inclusive-lower / exclusive-upper bounds on the first `lower.len()`
/// points of the search sequence. `upper == None` means unbounded above.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardRange {
    pub lower: Vec<GridPoint>,
    pub upper: Option<Vec<GridPoint>>,
}

impl ShardRange {
    /// Whether a (partial) prefix can still reach a sequence inside the range.
    fn allows(&self, prefix: &[GridPoint]) -> bool {
        let d = self.lower.len();
        let k = prefix.len().min(d);
        let head = &prefix[..k];
        if head < &self.lower[..k] {
            return false;
        }
        if let Some(upper) = &self.upper {
            if head > &upper[..k] {
                return false;
            }
            if k == d && head == &upper[..] {
                return false;
            }
        }
        true
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub extent: i32,
    pub shard: Option<ShardRange>,
    /// Node budget: when exceeded the run stops with a resumable checkpoint.
    pub max_nodes: Option<u64>,
    /// Progress line on stderr every this many nodes (0 disables).
    pub report_interval: u64,
    /// Above this many surviving partial labelings the frontier is dropped
    /// and labelings are recovered by depth-first search at the leaves.
    pub frontier_cap: usize,
}

impl SearchConfig {
    pub fn new(extent: i32) -> Self {
        SearchConfig {
            extent,
            shard: None,
            max_nodes: None,
            report_interval: 0,
            frontier_cap: 200_000,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes_expanded: u64,
    pub gp_prefixes: u64,
    pub lexmin_survivors: u64,
    pub labeling_frontier_peak: u64,
    pub canonical_sets_tested: u64,
    pub realizations_found: u64,
}

impl SearchStats {
    pub fn merge(&mut self, other: &SearchStats) {
        self.nodes_expanded += other.nodes_expanded;
        self.gp_prefixes += other.gp_prefixes;
        self.lexmin_survivors += other.lexmin_survivors;
        self.labeling_frontier_peak = self.labeling_frontier_peak.max(other.labeling_frontier_peak);
        self.canonical_sets_tested += other.canonical_sets_tested;
        self.realizations_found += other.realizations_found;
    }
}

/// A canonical realization emitted by the enumerator: placement sorted by
/// label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoundRealization {
    pub placement: Vec<(usize, GridPoint)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct LevelState {
    point_idx: usize,
    child_next: usize,
    /// `None` once the frontier overflowed the cap.
    frontier: Option<Vec<Vec<u16>>>,
}

/// Resumable DFS state; resuming replays nothing and skips nothing.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub config_hash: u64,
    root_next: usize,
    stack: Vec<LevelState>,
    pub stats: SearchStats,
    pub done: bool,
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("checkpoint does not match this triangulation/config (hash {got:#x}, expected {want:#x})")]
    ConfigMismatch { got: u64, want: u64 },
}

pub enum StepOutcome {
    /// One node processed; any realizations found at a completed leaf.
    Emitted(Vec<FoundRealization>),
    /// Backtracked or pruned; nothing emitted.
    Progress,
    Done,
}

pub enum RunOutcome {
    Completed(SearchStats),
    BudgetExhausted(Checkpoint),
}

pub struct Enumerator<'t> {
    tri: &'t Triangulation,
    tables: TriTables,
    config: SearchConfig,
    grid: Vec<GridPoint>,
    root_next: usize,
    stack: Vec<LevelState>,
    stats: SearchStats,
    done: bool,
}

/// All grid points of `{0..extent-1}^3` in lexicographic (x, y, z) order.
pub fn grid_points(extent: i32) -> Vec<GridPoint> {
    let mut pts = Vec::with_capacity((extent * extent * extent) as usize);
    for x in 0..extent {
        for y in 0..extent {
            for z in 0..extent {
                pts.push(GridPoint::new(x, y, z));
            }
        }
    }
    pts
}

fn fnv64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Stable hash tying a checkpoint to its triangulation and config.
pub fn config_hash(tri: &Triangulation, config: &SearchConfig) -> u64 {
    let mut repr = format!("{}|{}|", tri.name(), tri.vertex_count());
    for f in tri.facets() {
        let mut f = *f;
        f.sort_unstable();
        repr.push_str(&format!("{},{},{};", f[0], f[1], f[2]));
    }
    repr.push_str(&format!("|extent={}|cap={}", config.extent, config.frontier_cap));
    if let Some(shard) = &config.shard {
        repr.push_str(&format!("|shard={:?}", shard));
    }
    fnv64(repr.as_bytes())
}

impl<'t> Enumerator<'t> {
    pub fn new(tri: &'t Triangulation, config: SearchConfig) -> Self {
        let grid = grid_points(config.extent);
        Enumerator {
            tables: TriTables::new(tri),
            tri,
            grid,
            config,
            root_next: 0,
            stack: Vec::new(),
            stats: SearchStats::default(),
            done: false,
        }
    }

    pub fn resume(
        tri: &'t Triangulation,
        config: SearchConfig,
        checkpoint: Checkpoint,
    ) -> Result<Self, SearchError> {
        let want = config_hash(tri, &config);
        if checkpoint.config_hash != want {
            return Err(SearchError::ConfigMismatch {
                got: checkpoint.config_hash,
                want,
            });
        }
        let mut e = Enumerator::new(tri, config);
        e.root_next = checkpoint.root_next;
        e.stack = checkpoint.stack;
        e.stats = checkpoint.stats;
        e.done = checkpoint.done;
        Ok(e)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            config_hash: config_hash(self.tri, &self.config),
            root_next: self.root_next,
            stack: self.stack.clone(),
            stats: self.stats,
            done: self.done,
        }
    }

    pub fn stats(&self) -> &SearchStats {
        &self.stats
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    fn prefix_points(&self) -> Vec<GridPoint> {
        self.stack.iter().map(|l| self.grid[l.point_idx]).collect()
    }

    /// Process one node (one candidate point, or one backtrack).
    pub fn step(&mut self) -> StepOutcome {
        if self.done {
            return StepOutcome::Done;
        }
        let depth = self.stack.len();
        let needed = self.tri.vertex_count() - depth;
        let child_next = match self.stack.last() {
            Some(level) => level.child_next,
            None => self.root_next,
        };
        // not enough points left to complete: exhaust this level
        let exhausted = child_next >= self.grid.len() || self.grid.len() - child_next < needed;
        if exhausted {
            match self.stack.pop() {
                Some(_) => return StepOutcome::Progress,
                None => {
                    self.done = true;
                    return StepOutcome::Done;
                }
            }
        }
        let idx = child_next;
        match self.stack.last_mut() {
            Some(level) => level.child_next += 1,
            None => self.root_next += 1,
        }
        self.stats.nodes_expanded += 1;

        let p = self.grid[idx];
        let mut prefix = self.prefix_points();
        prefix.push(p);

        if let Some(shard) = &self.config.shard {
            if !shard.allows(&prefix) {
                return StepOutcome::Progress;
            }
        }
        if !extend_general_position(&prefix[..depth], p) {
            return StepOutcome::Progress;
        }
        self.stats.gp_prefixes += 1;
        if !prefix_can_be_lexmin(&prefix, self.config.extent) {
            return StepOutcome::Progress;
        }
        self.stats.lexmin_survivors += 1;

        let parent_frontier = match self.stack.last() {
            Some(level) => level.frontier.clone(),
            None => Some(vec![Vec::new()]),
        };
        let frontier = match parent_frontier {
            None => None,
            Some(labelings) => {
                let extended = self.extend_frontier(&labelings, &prefix);
                if extended.is_empty() {
                    return StepOutcome::Progress; // no compatible labeling survives
                }
                self.stats.labeling_frontier_peak =
                    self.stats.labeling_frontier_peak.max(extended.len() as u64);
                if extended.len() > self.config.frontier_cap {
                    None
                } else {
                    Some(extended)
                }
            }
        };

        if prefix.len() == self.tri.vertex_count() {
            if !is_canonical(&prefix, self.config.extent) {
                return StepOutcome::Progress;
            }
            self.stats.canonical_sets_tested += 1;
            let labelings = match &frontier {
                Some(l) => l.clone(),
                None => self.leaf_labelings(&prefix),
            };
            let mut found = Vec::new();
            for labeling in labelings {
                let mut placement: Vec<(usize, GridPoint)> = labeling
                    .iter()
                    .zip(prefix.iter())
                    .map(|(&l, &pt)| (l as usize, pt))
                    .collect();
                placement.sort_unstable();
                let r = Realization::with_placement(self.tri, placement.iter().copied()).unwrap();
                if r.verify().unwrap().is_valid_embedding {
                    found.push(FoundRealization { placement });
                }
            }
            self.stats.realizations_found += found.len() as u64;
            return StepOutcome::Emitted(found);
        }

        self.stack.push(LevelState {
            point_idx: idx,
            child_next: idx + 1,
            frontier,
        });
        StepOutcome::Progress
    }

    /// Extend every surviving partial labeling by each unused label for the
    /// newly placed point, keeping those whose newly completed (edge, facet)
    /// pairs are crossing-free.
    fn extend_frontier(&self, labelings: &[Vec<u16>], prefix: &[GridPoint]) -> Vec<Vec<u16>> {
        let n = self.tables.n;
        let new_point = *prefix.last().unwrap();
        let mut out = Vec::new();
        let mut placement: Vec<Option<GridPoint>> = vec![None; n + 1];
        for labeling in labelings {
            for slot in placement.iter_mut() {
                *slot = None;
            }
            for (&l, &pt) in labeling.iter().zip(prefix.iter()) {
                placement[l as usize] = Some(pt);
            }
            for label in 1..=n as u16 {
                if labeling.contains(&label) {
                    continue;
                }
                placement[label as usize] = Some(new_point);
                if self.label_extension_ok(label as usize, &placement) {
                    let mut next = labeling.clone();
                    next.push(label);
                    out.push(next);
                }
                placement[label as usize] = None;
            }
        }
        out
    }

    /// Check the pairs completed by placing `label` (all other labels of the
    /// pair already placed).
    fn label_extension_ok(&self, label: usize, placement: &[Option<GridPoint>]) -> bool {
        for &pi in &self.tables.pairs_by_label[label] {
            if let Some([p, q, a, b, c]) = self.tables.pair_points(pi, placement) {
                if segment_triangle_classify(p, q, a, b, c) == SegmentTriangle::Crossing {
                    return false;
                }
            }
        }
        true
    }

    /// Depth-first recovery of surviving total labelings when the frontier
    /// overflowed; emits labelings in the same lexicographic order the
    /// materialized frontier would have produced.
    fn leaf_labelings(&self, prefix: &[GridPoint]) -> Vec<Vec<u16>> {
        let n = self.tables.n;
        let mut out = Vec::new();
        let mut labeling: Vec<u16> = Vec::with_capacity(n);
        let mut placement: Vec<Option<GridPoint>> = vec![None; n + 1];
        self.leaf_rec(prefix, &mut labeling, &mut placement, &mut out);
        out
    }

    fn leaf_rec(
        &self,
        prefix: &[GridPoint],
        labeling: &mut Vec<u16>,
        placement: &mut Vec<Option<GridPoint>>,
        out: &mut Vec<Vec<u16>>,
    ) {
        let k = labeling.len();
        if k == prefix.len() {
            out.push(labeling.clone());
            return;
        }
        for label in 1..=self.tables.n as u16 {
            if labeling.contains(&label) {
                continue;
            }
            placement[label as usize] = Some(prefix[k]);
            if self.label_extension_ok(label as usize, placement) {
                labeling.push(label);
                self.leaf_rec(prefix, labeling, placement, out);
                labeling.pop();
            }
            placement[label as usize] = None;
        }
    }

    /// Drive the search to completion or budget exhaustion, passing each
    /// found realization to `on_found`.
    pub fn run(&mut self, mut on_found: impl FnMut(&FoundRealization)) -> RunOutcome {
        let start_nodes = self.stats.nodes_expanded;
        let mut last_report = self.stats.nodes_expanded;
        loop {
            if let Some(budget) = self.config.max_nodes {
                if self.stats.nodes_expanded - start_nodes >= budget && !self.done {
                    return RunOutcome::BudgetExhausted(self.checkpoint());
                }
            }
            match self.step() {
                StepOutcome::Done => return RunOutcome::Completed(self.stats),
                StepOutcome::Progress => {}
                StepOutcome::Emitted(found) => {
                    for f in &found {
                        on_found(f);
                    }
                }
            }
            let interval = self.config.report_interval;
            if interval > 0 && self.stats.nodes_expanded - last_report >= interval {
                last_report = self.stats.nodes_expanded;
                eprintln!(
                    "progress: nodes={} gp={} lexmin={} canonical={} found={}",
                    self.stats.nodes_expanded,
                    self.stats.gp_prefixes,
                    self.stats.lexmin_survivors,
                    self.stats.canonical_sets_tested,
                    self.stats.realizations_found
                );
            }
        }
    }
}

/// Partition the search space by its viable depth-`d` prefixes: one shard
/// config per surviving prefix, with consecutive half-open ranges so the
/// union of the shard runs equals the unsharded run.
pub fn shard(tri: &Triangulation, config: &SearchConfig, depth: usize) -> Vec<SearchConfig> {
    assert!(depth >= 1 && depth < tri.vertex_count());
    let prefixes = viable_prefixes(tri, config, depth);
    let mut shards = Vec::with_capacity(prefixes.len());
    for (i, lower) in prefixes.iter().enumerate() {
        let upper = prefixes.get(i + 1).cloned();
        let mut cfg = config.clone();
        cfg.shard = Some(ShardRange {
            lower: lower.clone(),
            upper,
        });
        shards.push(cfg);
    }
    shards
}

/// Depth-`d` prefixes surviving the general-position, lexicographic, and
/// labeling-frontier filters, in lexicographic order.
fn viable_prefixes(tri: &Triangulation, config: &SearchConfig, depth: usize) -> Vec<Vec<GridPoint>> {
    let e = Enumerator::new(tri, config.clone());
    let mut out = Vec::new();
    let grid = &e.grid;
    let mut stack: Vec<(usize, Vec<Vec<u16>>)> = Vec::new(); // (point idx, frontier)
    let mut next: Vec<usize> = vec![0];
    let mut points: Vec<GridPoint> = Vec::new();
    loop {
        let k = points.len();
        let idx = next[k];
        if idx >= grid.len() {
            if k == 0 {
                break;
            }
            next.pop();
            points.pop();
            stack.pop();
            continue;
        }
        next[k] += 1;
        let p = grid[idx];
        points.push(p);
        let ok = extend_general_position(&points[..k], p)
            && prefix_can_be_lexmin(&points, config.extent)
            && config.shard.as_ref().map_or(true, |s| s.allows(&points));
        if !ok {
            points.pop();
            continue;
        }
        let parent: Vec<Vec<u16>> = match stack.last() {
            Some((_, f)) => f.clone(),
            None => vec![Vec::new()],
        };
        let frontier = e.extend_frontier(&parent, &points);
        if frontier.is_empty() {
            points.pop();
            continue;
        }
        if points.len() == depth {
            out.push(points.clone());
            points.pop();
            continue;
        }
        stack.push((idx, frontier));
        next.push(idx + 1);
    }
    out
}

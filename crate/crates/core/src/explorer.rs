//! Layered breadth-first construction of the parametric zone graph with
//! convex state merging.
//!
//! One exploration layer expands every queue state, records all transitions,
//! deduplicates successors against existing states by exact equality
//! (location plus point-set equality of zones), then hands the layer's new
//! states to the configured merging heuristic. Merging replaces two
//! same-location states whose zone union is convex by a single state
//! carrying the union, redirecting transitions onto the survivor.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::model::{LocId, Pta};
use crate::symbolic::{self, SymbolicError, SymbolicState};

/// Exploration-order serial number of a symbolic state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// How the graph structure is updated after a merge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateMode {
    /// Rebuild a copy of the reachable part of the graph.
    Reconstruct,
    /// Delete the absorbed state and rewrite its transitions in place.
    OnTheFly,
}

/// Where merge candidates are taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateSet {
    /// All visited states, including the current layer.
    Visited,
    /// Only the current layer.
    Queue,
    /// First the current layer, then all visited states.
    Ordered,
}

/// When structural updates are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateTiming {
    /// After every single merge.
    EachMerge,
    /// After a state's whole candidate list has been processed.
    AfterCandidates,
}

/// A decoded merging heuristic.
///
/// The letter codes are `[R|O][V|Q|O][M|C]` with an optional trailing `r`:
/// update mode, candidate set, update timing, restart. `Nomerge` disables
/// merging entirely.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeuristicConfig {
    pub enabled: bool,
    pub update_mode: UpdateMode,
    pub candidates: CandidateSet,
    pub timing: UpdateTiming,
    pub restart: bool,
}

impl HeuristicConfig {
    pub const NOMERGE: HeuristicConfig = HeuristicConfig {
        enabled: false,
        update_mode: UpdateMode::OnTheFly,
        candidates: CandidateSet::Queue,
        timing: UpdateTiming::EachMerge,
        restart: false,
    };

    /// Decodes a heuristic letter code, `"Nomerge"` included.
    pub fn parse(code: &str) -> Result<HeuristicConfig, ExploreError> {
        if code == "Nomerge" {
            return Ok(HeuristicConfig::NOMERGE);
        }
        let bad = || ExploreError::UnknownHeuristic(code.to_string());
        let chars: Vec<char> = code.chars().collect();
        if chars.len() < 3 || chars.len() > 4 {
            return Err(bad());
        }
        let update_mode = match chars[0] {
            'R' => UpdateMode::Reconstruct,
            'O' => UpdateMode::OnTheFly,
            _ => return Err(bad()),
        };
        let candidates = match chars[1] {
            'V' => CandidateSet::Visited,
            'Q' => CandidateSet::Queue,
            'O' => CandidateSet::Ordered,
            _ => return Err(bad()),
        };
        let timing = match chars[2] {
            'M' => UpdateTiming::EachMerge,
            'C' => UpdateTiming::AfterCandidates,
            _ => return Err(bad()),
        };
        let restart = match chars.get(3) {
            None => false,
            Some('r') => true,
            Some(_) => return Err(bad()),
        };
        Ok(HeuristicConfig {
            enabled: true,
            update_mode,
            candidates,
            timing,
            restart,
        })
    }

    /// All 24 merging letter codes plus `Nomerge`.
    pub fn all_codes() -> Vec<String> {
        let mut codes = vec!["Nomerge".to_string()];
        for u in ['R', 'O'] {
            for c in ['V', 'Q', 'O'] {
                for t in ['M', 'C'] {
                    for r in ["", "r"] {
                        codes.push(format!("{u}{c}{t}{r}"));
                    }
                }
            }
        }
        codes
    }
}

impl FromStr for HeuristicConfig {
    type Err = ExploreError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        HeuristicConfig::parse(s)
    }
}

impl fmt::Display for HeuristicConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.enabled {
            return f.write_str("Nomerge");
        }
        let u = match self.update_mode {
            UpdateMode::Reconstruct => 'R',
            UpdateMode::OnTheFly => 'O',
        };
        let c = match self.candidates {
            CandidateSet::Visited => 'V',
            CandidateSet::Queue => 'Q',
            CandidateSet::Ordered => 'O',
        };
        let t = match self.timing {
            UpdateTiming::EachMerge => 'M',
            UpdateTiming::AfterCandidates => 'C',
        };
        write!(f, "{u}{c}{t}{}", if self.restart { "r" } else { "" })
    }
}

/// Bounds on a single exploration run.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExplorationLimits {
    pub max_layers: Option<usize>,
    pub max_states: Option<usize>,
    pub wall_timeout: Option<Duration>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    LayerLimit,
    StateLimit,
    Timeout,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RunStatus::Completed => "Completed",
            RunStatus::LayerLimit => "LayerLimit",
            RunStatus::StateLimit => "StateLimit",
            RunStatus::Timeout => "Timeout",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct ExplorationStats {
    pub states_final: usize,
    pub transitions_final: usize,
    pub merges_performed: u64,
    pub mergeability_tests: u64,
    pub layers: usize,
    pub wall_time: Duration,
    pub status: RunStatus,
}

#[derive(Debug, Error)]
pub enum ExploreError {
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error("unrecognized heuristic code `{0}`")]
    UnknownHeuristic(String),
}

/// The mutable store of the parametric zone graph under construction.
///
/// States are stored by serial id and never renumbered; merged-away states
/// leave a hole. Transitions form a set keyed by (source, edge, target), so
/// duplicates produced by redirection collapse.
#[derive(Debug, Clone)]
pub struct ZoneGraph {
    states: Vec<Option<SymbolicState>>,
    by_loc: Vec<Vec<StateId>>,
    transitions: BTreeSet<(StateId, usize, StateId)>,
    initial: StateId,
    queue: Vec<StateId>,
}

impl ZoneGraph {
    pub fn new(initial: SymbolicState, num_locations: usize) -> ZoneGraph {
        let mut zg = ZoneGraph {
            states: Vec::new(),
            by_loc: vec![Vec::new(); num_locations],
            transitions: BTreeSet::new(),
            initial: StateId(0),
            queue: Vec::new(),
        };
        let id = zg.add_state(initial);
        zg.initial = id;
        zg.queue.push(id);
        zg
    }

    pub fn add_state(&mut self, state: SymbolicState) -> StateId {
        let id = StateId(self.states.len());
        self.by_loc[state.loc.0].push(id);
        self.states.push(Some(state));
        id
    }

    pub fn state(&self, id: StateId) -> Option<&SymbolicState> {
        self.states.get(id.0).and_then(|s| s.as_ref())
    }

    pub fn is_live(&self, id: StateId) -> bool {
        self.state(id).is_some()
    }

    /// Live state ids in exploration order.
    pub fn live_ids(&self) -> Vec<StateId> {
        (0..self.states.len())
            .map(StateId)
            .filter(|id| self.is_live(*id))
            .collect()
    }

    pub fn live_count(&self) -> usize {
        self.states.iter().filter(|s| s.is_some()).count()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn queue(&self) -> &[StateId] {
        &self.queue
    }

    pub fn set_queue(&mut self, queue: Vec<StateId>) {
        self.queue = queue;
    }

    pub fn add_transition(&mut self, source: StateId, edge: usize, target: StateId) {
        self.transitions.insert((source, edge, target));
    }

    pub fn transitions(&self) -> impl Iterator<Item = (StateId, usize, StateId)> + '_ {
        self.transitions.iter().copied()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    fn set_constr(&mut self, id: StateId, constr: crate::geometry::Polyhedron) {
        if let Some(s) = self.states[id.0].as_mut() {
            s.constr = constr;
        }
    }

    fn delete_state(&mut self, id: StateId) {
        if let Some(s) = self.states[id.0].take() {
            self.by_loc[s.loc.0].retain(|x| *x != id);
        }
        self.queue.retain(|x| *x != id);
    }

    /// Rewrites every transition endpoint equal to `from` into `to`.
    fn redirect(&mut self, from: StateId, to: StateId) {
        let affected: Vec<_> = self
            .transitions
            .iter()
            .filter(|(s, _, t)| *s == from || *t == from)
            .copied()
            .collect();
        for (s, e, t) in affected {
            self.transitions.remove(&(s, e, t));
            let s = if s == from { to } else { s };
            let t = if t == from { to } else { t };
            self.transitions.insert((s, e, t));
        }
    }

    /// Finds a live state with the same location and identical zone.
    ///
    /// Zones are kept in canonical minimized form, so duplicate detection
    /// compares those forms directly.
    pub fn find_equal(&self, state: &SymbolicState) -> Option<StateId> {
        for &id in &self.by_loc[state.loc.0] {
            let existing = self.state(id).expect("by_loc holds live states");
            if existing.constr == state.constr {
                return Some(id);
            }
        }
        None
    }

    /// A copy containing exactly the states reachable from the initial state
    /// via transitions, ids preserved, queue filtered to survivors.
    pub fn reconstruct_reachable(&self) -> ZoneGraph {
        let mut reachable = vec![false; self.states.len()];
        let mut stack = vec![self.initial];
        if self.is_live(self.initial) {
            reachable[self.initial.0] = true;
        }
        while let Some(s) = stack.pop() {
            for &(src, _, tgt) in self.transitions.iter() {
                if src == s && self.is_live(tgt) && !reachable[tgt.0] {
                    reachable[tgt.0] = true;
                    stack.push(tgt);
                }
            }
        }
        let mut out = self.clone();
        for (i, keep) in reachable.iter().enumerate() {
            if !keep && out.states[i].is_some() {
                out.delete_state(StateId(i));
            }
        }
        out.transitions
            .retain(|(s, _, t)| reachable[s.0] && reachable[t.0]);
        out
    }

    /// Deterministic graph-description text: one node per state labeled
    /// `loc | canonical constraint`, one arrow per transition labeled by its
    /// action, everything ordered by id.
    pub fn to_graph_text(&self, pta: &Pta) -> String {
        let mut out = String::from("digraph pzg {\n");
        for id in self.live_ids() {
            let s = self.state(id).expect("live");
            let marker = if id == self.initial {
                " peripheries=2"
            } else {
                ""
            };
            out.push_str(&format!(
                "  {} [label=\"{} | {}\"{}];\n",
                id,
                pta.location(s.loc).name,
                s.constr.render(),
                marker
            ));
        }
        for (src, edge, tgt) in self.transitions.iter() {
            out.push_str(&format!(
                "  {} -> {} [label=\"{}\"];\n",
                src,
                tgt,
                pta.edge(*edge).action
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// Builds the parametric zone graph of `pta` by BFS layers, merging after
/// each layer according to `config`. States at a goal location are recorded
/// but never expanded.
pub fn layer_bfs(
    pta: &Pta,
    config: HeuristicConfig,
    limits: ExplorationLimits,
    goal: &BTreeSet<LocId>,
) -> Result<(ZoneGraph, ExplorationStats), ExploreError> {
    let started = Instant::now();
    let deadline = limits.wall_timeout.map(|d| started + d);
    let init = symbolic::initial_state(pta)?;
    let mut zg = ZoneGraph::new(init, pta.locations().len());
    let mut stats = ExplorationStats {
        states_final: 0,
        transitions_final: 0,
        merges_performed: 0,
        mergeability_tests: 0,
        layers: 0,
        wall_time: Duration::ZERO,
        status: RunStatus::Completed,
    };

    'exploration: while !zg.queue().is_empty() {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            stats.status = RunStatus::Timeout;
            break;
        }
        if limits.max_states.is_some_and(|m| zg.live_count() >= m) {
            stats.status = RunStatus::StateLimit;
            break;
        }
        if limits.max_layers.is_some_and(|m| stats.layers >= m) {
            stats.status = RunStatus::LayerLimit;
            break;
        }
        let layer = zg.queue().to_vec();
        let mut qnew: Vec<StateId> = Vec::new();
        for sid in layer {
            if !zg.is_live(sid) {
                continue;
            }
            if deadline.is_some_and(|d| Instant::now() >= d) {
                stats.status = RunStatus::Timeout;
                break 'exploration;
            }
            let state = zg.state(sid).expect("live").clone();
            if goal.contains(&state.loc) {
                continue;
            }
            for (edge_idx, succ) in symbolic::succ_all(&state, pta) {
                match zg.find_equal(&succ) {
                    Some(existing) => zg.add_transition(sid, edge_idx, existing),
                    None => {
                        let new_id = zg.add_state(succ);
                        zg.add_transition(sid, edge_idx, new_id);
                        qnew.push(new_id);
                        if limits.max_states.is_some_and(|m| zg.live_count() > m) {
                            stats.status = RunStatus::StateLimit;
                            break 'exploration;
                        }
                    }
                }
            }
        }
        stats.layers += 1;
        if config.enabled {
            merge_sets(&mut zg, config, &qnew, &mut stats);
        }
        let queue: Vec<StateId> = qnew.into_iter().filter(|id| zg.is_live(*id)).collect();
        zg.set_queue(queue);
    }

    stats.states_final = zg.live_count();
    stats.transitions_final = zg.transition_count();
    stats.wall_time = started.elapsed();
    Ok((zg, stats))
}

/// Runs the merging pass over one layer's new states, per Question 1's
/// candidate choice. Each new state is merged against the layer, the visited
/// set, or both in that order.
pub fn merge_sets(
    zg: &mut ZoneGraph,
    config: HeuristicConfig,
    qnew: &[StateId],
    stats: &mut ExplorationStats,
) {
    debug_assert!(config.enabled);
    for &sid in qnew {
        if !zg.is_live(sid) {
            continue;
        }
        match config.candidates {
            CandidateSet::Queue => {
                merge_one_state(zg, sid, qnew, config, stats);
            }
            CandidateSet::Visited => {
                let pool = zg.live_ids();
                merge_one_state(zg, sid, &pool, config, stats);
            }
            CandidateSet::Ordered => {
                merge_one_state(zg, sid, qnew, config, stats);
                if zg.is_live(sid) {
                    let pool = zg.live_ids();
                    merge_one_state(zg, sid, &pool, config, stats);
                }
            }
        }
    }
}

/// Siblings of `s` within `pool`: live states at the same location,
/// excluding `s` itself, pool order preserved.
pub fn get_siblings(s: StateId, pool: &[StateId], zg: &ZoneGraph) -> Vec<StateId> {
    let Some(state) = zg.state(s) else {
        return Vec::new();
    };
    pool.iter()
        .copied()
        .filter(|&y| y != s && zg.state(y).is_some_and(|c| c.loc == state.loc))
        .collect()
}

/// Attempts to merge `s` with each of its siblings in `pool`, in order.
///
/// On a successful mergeability test the surviving state takes the union,
/// the other state is deleted and its transitions are redirected onto the
/// survivor (immediately or after the candidate list, per the timing
/// option). The survivor is `s` unless the union equals the candidate's own
/// zone, in which case the already-explored candidate stays and `s` is
/// absorbed into it. With `restart`, the scan over the candidate list starts
/// over after every merge. Returns whether at least one merge happened.
pub fn merge_one_state(
    zg: &mut ZoneGraph,
    s: StateId,
    pool: &[StateId],
    config: HeuristicConfig,
    stats: &mut ExplorationStats,
) -> bool {
    assert!(zg.is_live(s), "merge_one_state on a deleted state {s}");
    let mut merged_any = false;
    // Deferred structural updates: (absorbed state, survivor).
    let mut pending: Vec<(StateId, StateId)> = Vec::new();
    'scan: loop {
        let siblings = get_siblings(s, pool, zg);
        for y in siblings {
            if !zg.is_live(y) {
                continue;
            }
            stats.mergeability_tests += 1;
            let s_constr = &zg.state(s).expect("live").constr;
            let y_constr = &zg.state(y).expect("live").constr;
            let Some(merged) = s_constr
                .try_merge(y_constr)
                .expect("states share one space")
            else {
                continue;
            };
            stats.merges_performed += 1;
            merged_any = true;
            let union_is_candidate = y_constr.includes(&merged).expect("same space");
            if union_is_candidate {
                // The candidate already covers s; keep the explored candidate
                // and drop s so it is not expanded again.
                for (dead, into) in pending.drain(..) {
                    zg.redirect(dead, into);
                }
                zg.redirect(s, y);
                if zg.initial() == s {
                    zg.initial = y;
                }
                zg.delete_state(s);
                if config.update_mode == UpdateMode::Reconstruct
                    && config.timing == UpdateTiming::EachMerge
                {
                    *zg = zg.reconstruct_reachable();
                }
                finish_structural(zg, config, merged_any);
                return merged_any;
            }
            zg.set_constr(s, merged);
            if zg.initial() == y {
                zg.initial = s;
            }
            zg.delete_state(y);
            match config.timing {
                UpdateTiming::EachMerge => {
                    zg.redirect(y, s);
                    if config.update_mode == UpdateMode::Reconstruct {
                        *zg = zg.reconstruct_reachable();
                    }
                }
                UpdateTiming::AfterCandidates => pending.push((y, s)),
            }
            if config.restart {
                continue 'scan;
            }
        }
        break;
    }
    for (dead, into) in pending.drain(..) {
        zg.redirect(dead, into);
    }
    finish_structural(zg, config, merged_any);
    merged_any
}

fn finish_structural(zg: &mut ZoneGraph, config: HeuristicConfig, merged_any: bool) {
    if merged_any
        && config.update_mode == UpdateMode::Reconstruct
        && config.timing == UpdateTiming::AfterCandidates
    {
        *zg = zg.reconstruct_reachable();
    }
}

//! Reachability synthesis for parametric timed automata over an exact
//! rational polyhedra backend, with convex merging of symbolic states
//! during layered breadth-first exploration.

pub mod explorer;
pub mod geometry;
pub mod model;
pub mod symbolic;
pub mod synthesis;

pub use explorer::{
    layer_bfs, ExplorationLimits, ExplorationStats, HeuristicConfig, RunStatus, StateId, ZoneGraph,
};
pub use geometry::{parse_atom, Atom, GeometryError, LinTerm, Polyhedron, Rat, VarId, VarSpace};
pub use model::{parse_model, Diagnostic, Edge, LocId, ModelError, ParamValuation, Pta};
pub use symbolic::{initial_state, succ_all, successor, SymbolicError, SymbolicState};
pub use synthesis::{covers, ef_synth, result_equal, ParamConstraint, SynthesisResult};

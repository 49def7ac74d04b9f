//! Symbolic states of the parametric zone graph and their successor
//! relation.

use thiserror::Error;

use crate::geometry::Polyhedron;
use crate::model::{self, Edge, LocId, Pta};

/// A node of the parametric zone graph: a location together with a nonempty
/// parametric zone over clocks and parameters. Its exploration-order serial
/// number is the index it occupies in the zone graph store.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicState {
    pub loc: LocId,
    pub constr: Polyhedron,
}

#[derive(Debug, Error)]
pub enum SymbolicError {
    #[error("the initial zone is empty (unsatisfiable initial invariant)")]
    EmptyInitialZone,
}

/// The initial symbolic state: all clocks at zero and all parameters
/// nonnegative, delayed, intersected with the initial invariant.
pub fn initial_state(pta: &Pta) -> Result<SymbolicState, SymbolicError> {
    let space = pta.space();
    let mut atoms = model::clocks_zero(space);
    atoms.extend(model::params_nonneg(space));
    let origin = Polyhedron::universe(space.clone()).conjoin(atoms);
    let invariant = &pta.location(pta.initial()).invariant;
    let constr = origin
        .time_elapse()
        .meet(invariant)
        .expect("model and zone share one space")
        .minimize();
    if constr.is_empty() {
        return Err(SymbolicError::EmptyInitialZone);
    }
    Ok(SymbolicState {
        loc: pta.initial(),
        constr,
    })
}

/// The successor of `s` through `edge`:
/// guard, reset, target invariant, time elapse, target invariant again.
/// Returns `None` when the resulting zone is empty.
pub fn successor(s: &SymbolicState, edge: &Edge, pta: &Pta) -> Option<SymbolicState> {
    debug_assert_eq!(s.loc, edge.source);
    let guarded = s
        .constr
        .meet(&edge.guard)
        .expect("model and zone share one space");
    if guarded.is_empty() {
        return None;
    }
    let invariant = &pta.location(edge.target).invariant;
    let constr = guarded
        .reset(&edge.resets)
        .expect("resets were validated as clocks")
        .meet(invariant)
        .expect("model and zone share one space")
        .time_elapse()
        .meet(invariant)
        .expect("model and zone share one space")
        .minimize();
    if constr.is_empty() {
        return None;
    }
    Some(SymbolicState {
        loc: edge.target,
        constr,
    })
}

/// All non-empty successors of `s`, paired with the index of the edge that
/// produced them, in model edge order.
pub fn succ_all(s: &SymbolicState, pta: &Pta) -> Vec<(usize, SymbolicState)> {
    pta.edges_from(s.loc)
        .iter()
        .filter_map(|&idx| successor(s, pta.edge(idx), pta).map(|succ| (idx, succ)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{parse_atom, Atom, LinTerm, Polyhedron};
    use crate::model::parse_model;

    fn threshold() -> Pta {
        parse_model(crate::model::fixtures::THRESHOLD).unwrap()
    }

    fn drift() -> Pta {
        parse_model(crate::model::fixtures::DRIFT).unwrap()
    }

    fn zone(pta: &Pta, atoms: &[&str]) -> Polyhedron {
        Polyhedron::from_atoms(
            pta.space().clone(),
            atoms.iter().map(|t| parse_atom(t, pta.space()).unwrap()),
        )
    }

    #[test]
    fn threshold_initial_state_is_the_nonnegative_parameter() {
        let pta = threshold();
        let init = initial_state(&pta).unwrap();
        assert_eq!(init.loc, pta.initial());
        assert!(init.constr.equals(&zone(&pta, &["p >= 0"])).unwrap());
    }

    #[test]
    fn drift_initial_state_is_the_delayed_origin() {
        let pta = drift();
        let init = initial_state(&pta).unwrap();
        assert!(init
            .constr
            .equals(&zone(&pta, &["x = y", "x >= 0", "p >= 0", "q >= 0"]))
            .unwrap());
    }

    #[test]
    fn initial_invariant_is_applied() {
        let text = crate::model::fixtures::DRIFT.replace(
            r#"{"name": "l0"}"#,
            r#"{"name": "l0", "invariant": ["x <= p"]}"#,
        );
        let pta = parse_model(&text).unwrap();
        let init = initial_state(&pta).unwrap();
        assert!(init
            .constr
            .equals(&zone(&pta, &["x = y", "x >= 0", "x <= p", "q >= 0"]))
            .unwrap());
    }

    #[test]
    fn successors_of_the_threshold_initial_state() {
        let pta = threshold();
        let init = initial_state(&pta).unwrap();
        let succs = succ_all(&init, &pta);
        assert_eq!(succs.len(), 2);
        let (e_a, s_a) = &succs[0];
        assert_eq!(pta.edge(*e_a).action, "a");
        assert_eq!(s_a.loc, pta.loc_by_name("l1").unwrap());
        assert!(s_a
            .constr
            .equals(&zone(&pta, &["0 <= p", "p <= 1"]))
            .unwrap());
        let (e_b, s_b) = &succs[1];
        assert_eq!(pta.edge(*e_b).action, "b");
        assert_eq!(s_b.loc, pta.loc_by_name("l2").unwrap());
        assert!(s_b.constr.equals(&zone(&pta, &["p > 1"])).unwrap());
    }

    #[test]
    fn contradicted_guard_gives_no_successor() {
        let pta = threshold();
        let l2 = pta.loc_by_name("l2").unwrap();
        let state = SymbolicState {
            loc: l2,
            constr: zone(&pta, &["0 <= p", "p <= 1"]),
        };
        // the only edge out of l2 requires p > 1
        assert_eq!(succ_all(&state, &pta).len(), 0);
    }

    #[test]
    fn sink_location_has_no_successors() {
        let pta = threshold();
        let l4 = pta.loc_by_name("l4").unwrap();
        let state = SymbolicState {
            loc: l4,
            constr: zone(&pta, &["0 <= p", "p <= 1"]),
        };
        assert!(succ_all(&state, &pta).is_empty());
    }

    #[test]
    fn self_loop_with_reset_produces_a_successor() {
        let pta = drift();
        let init = initial_state(&pta).unwrap();
        let first = succ_all(&init, &pta);
        assert_eq!(first.len(), 2);
        let l1_state = &first[0].1;
        let loops = succ_all(l1_state, &pta);
        assert_eq!(loops.len(), 1);
        assert_eq!(pta.edge(loops[0].0).action, "loop");
        assert_eq!(loops[0].1.loc, l1_state.loc);
        assert!(!loops[0].1.constr.is_empty());
        // the loop resets x, so x = 0 stays satisfiable in the successor
        let x = pta.space().var("x").unwrap();
        let pinned = loops[0]
            .1
            .constr
            .conjoin([Atom::new(LinTerm::var(x), crate::geometry::Rel::Eq)]);
        assert!(!pinned.is_empty());
    }

    #[test]
    fn produced_states_satisfy_their_invariant() {
        let pta = drift();
        let init = initial_state(&pta).unwrap();
        for (_, s) in succ_all(&init, &pta) {
            let inv = &pta.location(s.loc).invariant;
            assert!(inv.includes(&s.constr).unwrap());
            assert!(!s.constr.is_empty());
        }
    }

    #[test]
    fn parameter_projection_never_grows() {
        let pta = drift();
        let init = initial_state(&pta).unwrap();
        let init_params = init.constr.project_params();
        for (_, s) in succ_all(&init, &pta) {
            let succ_params = s.constr.project_params();
            assert!(init_params.includes(&succ_params).unwrap());
        }
    }
}

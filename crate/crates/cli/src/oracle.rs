use std::collections::{BTreeMap, BTreeSet};

use zonemerge_core::explorer::{layer_bfs, ExplorationLimits, HeuristicConfig};
use zonemerge_core::geometry::{Rat, VarId};
use zonemerge_core::model::{LocId, ParamValuation, Pta};
use zonemerge_core::synthesis::ParamConstraint;
use zonemerge_core::SymbolicError;

use crate::gen::SplitMix64;
use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleOutcome {
    Reached,
    NotReachedWithinBound,
}

/// Ground truth by instantiation: substitutes the valuation into the model
/// and explores the resulting parameter-free automaton without merging, up
/// to `bound` states.
pub fn concrete_oracle(
    pta: &Pta,
    goal: &BTreeSet<LocId>,
    v: &ParamValuation,
    bound: usize,
) -> Result<OracleOutcome, HarnessError> {
    let instantiated = pta.instantiate(v)?;
    let limits = ExplorationLimits {
        max_states: Some(bound),
        ..Default::default()
    };
    let run = layer_bfs(&instantiated, HeuristicConfig::NOMERGE, limits, goal);
    let (zg, _stats) = match run {
        Ok(ok) => ok,
        // an unsatisfiable initial invariant reaches nothing
        Err(zonemerge_core::explorer::ExploreError::Symbolic(SymbolicError::EmptyInitialZone)) => {
            return Ok(OracleOutcome::NotReachedWithinBound)
        }
        Err(e) => return Err(e.into()),
    };
    let reached = zg
        .live_ids()
        .into_iter()
        .any(|id| goal.contains(&zg.state(id).expect("live").loc));
    Ok(if reached {
        OracleOutcome::Reached
    } else {
        OracleOutcome::NotReachedWithinBound
    })
}

/// Turns a parameter valuation into a total point over the model's space,
/// clocks pinned to zero (parameter constraints never mention clocks).
pub fn param_point(pta: &Pta, v: &ParamValuation) -> BTreeMap<VarId, Rat> {
    let space = pta.space();
    let mut point = BTreeMap::new();
    for c in space.clock_ids() {
        point.insert(c, Rat::from_integer(0.into()));
    }
    for p in space.param_ids() {
        let val = v
            .get(space.name(p))
            .cloned()
            .unwrap_or_else(|| Rat::from_integer(0.into()));
        point.insert(p, val);
    }
    point
}

/// Samples up to `want` parameter valuations lying inside (or outside) the
/// constraint, with denominators up to `max_denom` and values up to
/// `max_value`. Returns fewer when the region is too small to hit.
pub fn sample_valuations(
    result: &ParamConstraint,
    pta: &Pta,
    rng: &mut SplitMix64,
    want: usize,
    inside: bool,
    max_value: u64,
    max_denom: u64,
) -> Vec<ParamValuation> {
    let space = pta.space();
    let mut found = Vec::new();
    let attempts = 400 * want.max(1);
    for _ in 0..attempts {
        if found.len() >= want {
            break;
        }
        let mut values = BTreeMap::new();
        for p in space.param_names() {
            let den = 1 + rng.below(max_denom);
            let num = rng.below(max_value * den + 1);
            values.insert(
                p.clone(),
                Rat::new((num as i64).into(), (den as i64).into()),
            );
        }
        let v = ParamValuation::new(values).expect("nonnegative by construction");
        let point = param_point(pta, &v);
        let member = result.contains_point(&point).expect("total point");
        if member == inside && !found.contains(&v) {
            found.push(v);
        }
    }
    found
}

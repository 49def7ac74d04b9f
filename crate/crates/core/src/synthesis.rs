//! Reachability synthesis on top of the explorer: the set of parameter
//! valuations under which a goal location is reachable, as a disjunction of
//! parameter-only polyhedra, plus exact comparison of such disjunctions.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::explorer::{
    layer_bfs, ExplorationLimits, ExplorationStats, ExploreError, HeuristicConfig, RunStatus,
    ZoneGraph,
};
use crate::geometry::{check_same_space, GeometryError, Polyhedron, VarSpace};
use crate::model::{LocId, Pta};

/// A finite union of parameter-only polyhedra. No disjunct is empty and no
/// disjunct is included in another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamConstraint {
    space: Arc<VarSpace>,
    disjuncts: Vec<Polyhedron>,
}

impl ParamConstraint {
    pub fn new(
        space: Arc<VarSpace>,
        polys: impl IntoIterator<Item = Polyhedron>,
    ) -> ParamConstraint {
        let mut disjuncts: Vec<Polyhedron> = Vec::new();
        for p in polys {
            if p.is_empty() {
                continue;
            }
            if disjuncts
                .iter()
                .any(|kept| kept.includes(&p).expect("one space"))
            {
                continue;
            }
            disjuncts.retain(|kept| !p.includes(kept).expect("one space"));
            disjuncts.push(p);
        }
        disjuncts.sort_by(|a, b| a.atoms().cmp(b.atoms()));
        ParamConstraint { space, disjuncts }
    }

    pub fn empty(space: Arc<VarSpace>) -> ParamConstraint {
        ParamConstraint {
            space,
            disjuncts: Vec::new(),
        }
    }

    pub fn space(&self) -> &Arc<VarSpace> {
        &self.space
    }

    pub fn disjuncts(&self) -> &[Polyhedron] {
        &self.disjuncts
    }

    pub fn is_empty(&self) -> bool {
        self.disjuncts.is_empty()
    }

    /// Membership of a parameter point (clocks, if any, must be supplied by
    /// the caller; disjuncts only mention parameters).
    pub fn contains_point(
        &self,
        point: &std::collections::BTreeMap<crate::geometry::VarId, crate::geometry::Rat>,
    ) -> Result<bool, GeometryError> {
        for d in &self.disjuncts {
            if d.contains_point(point)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// `FALSE` for the empty union, otherwise canonical disjuncts joined by
    /// `OR`.
    pub fn render(&self) -> String {
        if self.disjuncts.is_empty() {
            return "FALSE".to_string();
        }
        self.disjuncts
            .iter()
            .map(|d| d.render())
            .collect::<Vec<_>>()
            .join(" OR ")
    }
}

/// Result of one synthesis run. When `complete` is false the constraint is
/// only a sound under-approximation.
#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub result: ParamConstraint,
    pub stats: ExplorationStats,
    pub complete: bool,
}

/// Reachability synthesis: explores the zone graph (goal states are not
/// expanded) and projects every goal state's zone onto the parameters.
pub fn ef_synth(
    pta: &Pta,
    goal: &BTreeSet<LocId>,
    config: HeuristicConfig,
    limits: ExplorationLimits,
) -> Result<SynthesisResult, ExploreError> {
    ef_synth_with_graph(pta, goal, config, limits).map(|(r, _)| r)
}

/// Like [`ef_synth`] but also returns the final zone graph.
pub fn ef_synth_with_graph(
    pta: &Pta,
    goal: &BTreeSet<LocId>,
    config: HeuristicConfig,
    limits: ExplorationLimits,
) -> Result<(SynthesisResult, ZoneGraph), ExploreError> {
    let (zg, stats) = layer_bfs(pta, config, limits, goal)?;
    let mut projections = Vec::new();
    for id in zg.live_ids() {
        let state = zg.state(id).expect("live");
        if goal.contains(&state.loc) {
            projections.push(state.constr.project_params());
        }
    }
    let result = ParamConstraint::new(pta.space().clone(), projections);
    let complete = stats.status == RunStatus::Completed;
    Ok((
        SynthesisResult {
            result,
            stats,
            complete,
        },
        zg,
    ))
}

/// True iff every disjunct of `b` is contained in the union of `a`'s
/// disjuncts. Decided by recursive region splitting: a region is covered by
/// `[d1, d2, ..]` iff each piece of it outside `d1` is covered by the rest.
pub fn covers(a: &ParamConstraint, b: &ParamConstraint) -> Result<bool, GeometryError> {
    check_same_space(&a.space, &b.space)?;
    for d in &b.disjuncts {
        if !covered_by(d, &a.disjuncts)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn covered_by(region: &Polyhedron, disjuncts: &[Polyhedron]) -> Result<bool, GeometryError> {
    if region.is_empty() {
        return Ok(true);
    }
    let Some((first, rest)) = disjuncts.split_first() else {
        return Ok(false);
    };
    if first.includes(region)? {
        return Ok(true);
    }
    if region.meet(first)?.is_empty() {
        return covered_by(region, rest);
    }
    // The pieces carved off by successive atom negations are disjoint and
    // together make up region \ first.
    let mut prefix = region.clone();
    for atom in first.atoms() {
        for neg in atom.negations() {
            let piece = prefix.conjoin([neg]);
            if !covered_by(&piece, rest)? {
                return Ok(false);
            }
        }
        prefix = prefix.conjoin([atom.clone()]);
    }
    Ok(true)
}

/// Mutual coverage: the two unions denote the same parameter set.
pub fn result_equal(a: &ParamConstraint, b: &ParamConstraint) -> Result<bool, GeometryError> {
    Ok(covers(a, b)? && covers(b, a)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{parse_atom, VarSpace};
    use crate::model::parse_model;

    fn pspace() -> Arc<VarSpace> {
        VarSpace::new(Vec::<&str>::new(), vec!["p"]).unwrap()
    }

    fn poly(space: &Arc<VarSpace>, atoms: &[&str]) -> Polyhedron {
        Polyhedron::from_atoms(
            space.clone(),
            atoms.iter().map(|t| parse_atom(t, space).unwrap()),
        )
    }

    fn pc(space: &Arc<VarSpace>, disjuncts: &[&[&str]]) -> ParamConstraint {
        ParamConstraint::new(space.clone(), disjuncts.iter().map(|d| poly(space, d)))
    }

    #[test]
    fn halfline_split_is_covered() {
        let s = pspace();
        let whole = pc(&s, &[&["p >= 0"]]);
        let split = pc(&s, &[&["p >= 0", "p <= 1"], &["p > 1"]]);
        assert!(covers(&whole, &split).unwrap());
        assert!(covers(&split, &whole).unwrap());
        assert!(result_equal(&whole, &split).unwrap());
    }

    #[test]
    fn smaller_interval_does_not_cover() {
        let s = pspace();
        let small = pc(&s, &[&["p <= 1"]]);
        let big = pc(&s, &[&["p >= 0"]]);
        assert!(!covers(&small, &big).unwrap());
    }

    #[test]
    fn empty_covers_empty() {
        let s = pspace();
        let none = ParamConstraint::empty(s.clone());
        assert!(covers(&none, &none).unwrap());
        assert!(result_equal(&none, &none).unwrap());
        let some = pc(&s, &[&["p >= 0"]]);
        assert!(covers(&some, &none).unwrap());
        assert!(!covers(&none, &some).unwrap());
    }

    #[test]
    fn strictness_matters_for_equality() {
        let s = pspace();
        let le = pc(&s, &[&["p <= 1"]]);
        let lt = pc(&s, &[&["p < 1"]]);
        assert!(covers(&le, &lt).unwrap());
        assert!(!result_equal(&le, &lt).unwrap());
        assert!(result_equal(&le, &le).unwrap());
    }

    #[test]
    fn normalization_drops_included_and_empty_disjuncts() {
        let s = pspace();
        let c = ParamConstraint::new(
            s.clone(),
            vec![
                poly(&s, &["p >= 0", "p <= 1"]),
                poly(&s, &["p >= 0"]),
                poly(&s, &["p > 1", "p < 1"]),
            ],
        );
        assert_eq!(c.disjuncts().len(), 1);
        assert_eq!(c.render(), "0 <= p");
    }

    #[test]
    fn threshold_synthesis_for_both_goals() {
        let pta = parse_model(crate::model::fixtures::THRESHOLD).unwrap();
        let space = pta.space();
        let expect_l4 = pc(space, &[&["p >= 0", "p <= 1"]]);
        let expect_l2 = pc(space, &[&["p >= 0"]]);
        for code in ["Nomerge", "OQM", "RVMr"] {
            let config = HeuristicConfig::parse(code).unwrap();
            let mut goal = BTreeSet::new();
            goal.insert(pta.loc_by_name("l4").unwrap());
            let got = ef_synth(&pta, &goal, config, ExplorationLimits::default()).unwrap();
            assert!(got.complete);
            assert!(result_equal(&got.result, &expect_l4).unwrap(), "{code}");

            let mut goal = BTreeSet::new();
            goal.insert(pta.loc_by_name("l2").unwrap());
            let got = ef_synth(&pta, &goal, config, ExplorationLimits::default()).unwrap();
            assert!(result_equal(&got.result, &expect_l2).unwrap(), "{code}");
        }
    }

    #[test]
    fn unreachable_goal_is_false() {
        let pta = parse_model(crate::model::fixtures::THRESHOLD).unwrap();
        // l0 has no incoming edges besides being initial; use a goal that
        // cannot be entered: add none, instead query a fresh sink by using
        // l4 with a contradictory-parameter variant. Simplest: goal = l4 on
        // the instantiated-impossible side is still reachable, so craft a
        // real unreachable location.
        let text = crate::model::fixtures::THRESHOLD
            .replace(r#"{"name": "l4"}"#, r#"{"name": "l4"}, {"name": "l5"}"#);
        let pta2 = parse_model(&text).unwrap();
        let mut goal = BTreeSet::new();
        goal.insert(pta2.loc_by_name("l5").unwrap());
        let got = ef_synth(
            &pta2,
            &goal,
            HeuristicConfig::NOMERGE,
            ExplorationLimits::default(),
        )
        .unwrap();
        assert!(got.complete);
        assert!(got.result.is_empty());
        assert_eq!(got.result.render(), "FALSE");
        drop(pta);
    }

    #[test]
    fn parameter_free_models_synthesize_to_true_or_false() {
        let text = r#"{
            "name": "concrete",
            "clocks": ["x"],
            "parameters": [],
            "initial": "l0",
            "locations": [
                {"name": "l0", "invariant": ["x <= 2"]},
                {"name": "near"},
                {"name": "far"}
            ],
            "edges": [
                {"from": "l0", "guard": ["x >= 1"], "action": "go", "resets": [], "to": "near"},
                {"from": "l0", "guard": ["x >= 5"], "action": "oops", "resets": [], "to": "far"}
            ]
        }"#;
        let pta = parse_model(text).unwrap();
        let reachable: BTreeSet<_> = [pta.loc_by_name("near").unwrap()].into();
        let got = ef_synth(
            &pta,
            &reachable,
            HeuristicConfig::NOMERGE,
            ExplorationLimits::default(),
        )
        .unwrap();
        assert_eq!(got.result.render(), "True");

        // the invariant x <= 2 forbids waiting until x >= 5
        let unreachable: BTreeSet<_> = [pta.loc_by_name("far").unwrap()].into();
        let got = ef_synth(
            &pta,
            &unreachable,
            HeuristicConfig::NOMERGE,
            ExplorationLimits::default(),
        )
        .unwrap();
        assert_eq!(got.result.render(), "FALSE");
    }

    #[test]
    fn truncated_runs_are_under_approximations() {
        let pta = parse_model(crate::model::fixtures::THRESHOLD).unwrap();
        let mut goal = BTreeSet::new();
        goal.insert(pta.loc_by_name("l2").unwrap());
        let full = ef_synth(
            &pta,
            &goal,
            HeuristicConfig::NOMERGE,
            ExplorationLimits::default(),
        )
        .unwrap();
        for layers in 0..5 {
            let truncated = ef_synth(
                &pta,
                &goal,
                HeuristicConfig::NOMERGE,
                ExplorationLimits {
                    max_layers: Some(layers),
                    ..Default::default()
                },
            )
            .unwrap();
            assert!(covers(&full.result, &truncated.result).unwrap(), "{layers}");
        }
    }
}

//! The parametric timed automaton data model, its textual document format,
//! validation and parameter instantiation.
//!
//! A model document is a single JSON object with guard and invariant atoms
//! written in the atom grammar:
//!
//! ```json
//! {
//!   "name": "gate",
//!   "clocks": ["x"],
//!   "parameters": ["p"],
//!   "initial": "l0",
//!   "locations": [
//!     { "name": "l0" },
//!     { "name": "l1", "invariant": ["x <= p"] }
//!   ],
//!   "edges": [
//!     { "from": "l0", "guard": ["x >= 1"], "action": "go", "resets": ["x"], "to": "l1" }
//!   ],
//!   "goal": ["l1"]
//! }
//! ```
//!
//! Absent `invariant`/`guard` fields mean the universe. The optional `goal`
//! field names target locations for the benchmark harness.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    parse_atom, Atom, GeometryError, LinTerm, Polyhedron, Rat, Rel, VarId, VarSpace,
};

/// Index of a location within its automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub name: String,
    pub invariant: Polyhedron,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub source: LocId,
    pub guard: Polyhedron,
    pub action: String,
    pub resets: Vec<VarId>,
    pub target: LocId,
}

/// A parametric timed automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pta {
    name: String,
    space: Arc<VarSpace>,
    locations: Vec<Location>,
    initial: LocId,
    edges: Vec<Edge>,
    edges_by_source: Vec<Vec<usize>>,
}

impl Pta {
    /// Assembles an automaton from raw parts without validation;
    /// see [`validate`].
    pub fn from_parts(
        name: String,
        space: Arc<VarSpace>,
        locations: Vec<Location>,
        initial: LocId,
        edges: Vec<Edge>,
    ) -> Pta {
        let mut edges_by_source = vec![Vec::new(); locations.len()];
        for (i, e) in edges.iter().enumerate() {
            if e.source.0 < edges_by_source.len() {
                edges_by_source[e.source.0].push(i);
            }
        }
        Pta {
            name,
            space,
            locations,
            initial,
            edges,
            edges_by_source,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &Arc<VarSpace> {
        &self.space
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn location(&self, l: LocId) -> &Location {
        &self.locations[l.0]
    }

    pub fn loc_by_name(&self, name: &str) -> Option<LocId> {
        self.locations
            .iter()
            .position(|l| l.name == name)
            .map(LocId)
    }

    pub fn initial(&self) -> LocId {
        self.initial
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, idx: usize) -> &Edge {
        &self.edges[idx]
    }

    /// Edge indices leaving `l`, in declaration order.
    pub fn edges_from(&self, l: LocId) -> &[usize] {
        &self.edges_by_source[l.0]
    }

    /// The action alphabet, collected from the edges.
    pub fn actions(&self) -> BTreeSet<&str> {
        self.edges.iter().map(|e| e.action.as_str()).collect()
    }

    /// Replaces every parameter by its value, folding constants into the
    /// atom constants. The result has an empty parameter list.
    pub fn instantiate(&self, v: &ParamValuation) -> Result<Pta, ModelError> {
        for p in self.space.param_names() {
            if v.get(p).is_none() {
                return Err(ModelError::MissingParameterValue(p.clone()));
            }
        }
        let new_space = VarSpace::new(self.space.clock_names().to_vec(), Vec::<String>::new())
            .expect("clock names were already unique");
        let subst = |poly: &Polyhedron| -> Polyhedron {
            let atoms: Vec<Atom> = poly
                .atoms()
                .iter()
                .map(|a| {
                    let mut term = LinTerm::constant(a.term().const_part().clone());
                    for (var, c) in a.term().coeffs() {
                        if self.space.is_param(var) {
                            let val = v.get(self.space.name(var)).expect("checked total");
                            term.add_to_const(&(c * val));
                        } else {
                            term.add_to_coeff(var, c);
                        }
                    }
                    Atom::new(term, a.rel())
                })
                .collect();
            Polyhedron::from_atoms(new_space.clone(), atoms)
        };
        let locations = self
            .locations
            .iter()
            .map(|l| Location {
                name: l.name.clone(),
                invariant: subst(&l.invariant),
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                source: e.source,
                guard: subst(&e.guard),
                action: e.action.clone(),
                resets: e.resets.clone(),
                target: e.target,
            })
            .collect();
        Ok(Pta::from_parts(
            self.name.clone(),
            new_space,
            locations,
            self.initial,
            edges,
        ))
    }

    /// Renders the automaton back into the document format, atoms in
    /// canonical form.
    pub fn serialize(&self) -> String {
        let doc = ModelDoc {
            name: self.name.clone(),
            clocks: self.space.clock_names().to_vec(),
            parameters: self.space.param_names().to_vec(),
            initial: self.locations[self.initial.0].name.clone(),
            locations: self
                .locations
                .iter()
                .map(|l| LocationDoc {
                    name: l.name.clone(),
                    invariant: if l.invariant.is_universe() {
                        None
                    } else {
                        Some(
                            l.invariant
                                .atoms()
                                .iter()
                                .map(|a| a.render(&self.space))
                                .collect(),
                        )
                    },
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    from: self.locations[e.source.0].name.clone(),
                    guard: if e.guard.is_universe() {
                        None
                    } else {
                        Some(
                            e.guard
                                .atoms()
                                .iter()
                                .map(|a| a.render(&self.space))
                                .collect(),
                        )
                    },
                    action: e.action.clone(),
                    resets: e
                        .resets
                        .iter()
                        .map(|r| self.space.name(*r).to_string())
                        .collect(),
                    to: self.locations[e.target.0].name.clone(),
                })
                .collect(),
            goal: None,
        };
        serde_json::to_string_pretty(&doc).expect("document serializes")
    }
}

/// Nonnegative rational values for every parameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamValuation(BTreeMap<String, Rat>);

impl ParamValuation {
    pub fn new(values: BTreeMap<String, Rat>) -> Result<ParamValuation, ModelError> {
        for (name, v) in &values {
            if v < &Rat::from_integer(0.into()) {
                return Err(ModelError::NegativeValuation(name.clone()));
            }
        }
        Ok(ParamValuation(values))
    }

    pub fn get(&self, name: &str) -> Option<&Rat> {
        self.0.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Rat)> {
        self.0.iter()
    }
}

/// Nonnegative rational values for every clock.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClockValuation(BTreeMap<String, Rat>);

impl ClockValuation {
    pub fn new(values: BTreeMap<String, Rat>) -> Result<ClockValuation, ModelError> {
        for (name, v) in &values {
            if v < &Rat::from_integer(0.into()) {
                return Err(ModelError::NegativeValuation(name.clone()));
            }
        }
        Ok(ClockValuation(values))
    }

    pub fn get(&self, name: &str) -> Option<&Rat> {
        self.0.get(name)
    }
}

/// Builds a total point over `space` from clock and parameter valuations.
pub fn point_of(
    space: &VarSpace,
    clocks: &ClockValuation,
    params: &ParamValuation,
) -> Result<BTreeMap<VarId, Rat>, ModelError> {
    let mut point = BTreeMap::new();
    for v in space.all_ids() {
        let name = space.name(v);
        let value = if space.is_clock(v) {
            clocks.get(name)
        } else {
            params.get(name)
        };
        match value {
            Some(r) => {
                point.insert(v, r.clone());
            }
            None => return Err(ModelError::MissingParameterValue(name.to_string())),
        }
    }
    Ok(point)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    name: String,
    clocks: Vec<String>,
    parameters: Vec<String>,
    initial: String,
    locations: Vec<LocationDoc>,
    edges: Vec<EdgeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    goal: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LocationDoc {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    invariant: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    from: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    guard: Option<Vec<String>>,
    action: String,
    #[serde(default)]
    resets: Vec<String>,
    to: String,
}

/// Machine-readable validation finding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticCode {
    UnknownLocation,
    DuplicateLocation,
    ResetNonClock,
    NoInitialLocation,
    SpaceMismatch,
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DiagnosticCode::UnknownLocation => "E_UNKNOWN_LOCATION",
            DiagnosticCode::DuplicateLocation => "E_DUPLICATE_LOCATION",
            DiagnosticCode::ResetNonClock => "E_RESET_NON_CLOCK",
            DiagnosticCode::NoInitialLocation => "E_NO_INITIAL_LOCATION",
            DiagnosticCode::SpaceMismatch => "E_SPACE_MISMATCH",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("document syntax error at line {line}, column {column}: {message}")]
    Document {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("in {context}: {source}")]
    Atom {
        context: String,
        source: GeometryError,
    },
    #[error("{0}")]
    Space(#[from] GeometryError),
    #[error("invalid model: {}", render_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("no value for parameter `{0}`")]
    MissingParameterValue(String),
    #[error("valuation assigns a negative value to `{0}`")]
    NegativeValuation(String),
}

fn render_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| format!("{}: {}", d.code, d.message))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Parses and validates a model document.
pub fn parse_model(text: &str) -> Result<Pta, ModelError> {
    parse_model_document(text).map(|(pta, _)| pta)
}

/// Parses a model document, returning the automaton and its declared goal
/// locations (empty when the `goal` field is absent).
pub fn parse_model_document(text: &str) -> Result<(Pta, Vec<LocId>), ModelError> {
    let doc: ModelDoc = serde_json::from_str(text).map_err(|e| ModelError::Document {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let space = VarSpace::new(doc.clocks.clone(), doc.parameters.clone())?;

    let mut diagnostics = Vec::new();
    let mut seen = BTreeSet::new();
    for l in &doc.locations {
        if !seen.insert(l.name.as_str()) {
            diagnostics.push(Diagnostic {
                code: DiagnosticCode::DuplicateLocation,
                message: format!("location `{}` is declared twice", l.name),
            });
        }
    }
    let loc_index = |name: &str| doc.locations.iter().position(|l| l.name == name);
    let initial = match loc_index(&doc.initial) {
        Some(i) => LocId(i),
        None => {
            diagnostics.push(Diagnostic {
                code: DiagnosticCode::NoInitialLocation,
                message: format!("initial location `{}` is not declared", doc.initial),
            });
            LocId(0)
        }
    };

    let parse_conj = |atoms: &Option<Vec<String>>, context: String| {
        let mut parsed = Vec::new();
        if let Some(texts) = atoms {
            for t in texts {
                parsed.push(parse_atom(t, &space).map_err(|e| ModelError::Atom {
                    context: context.clone(),
                    source: e,
                })?);
            }
        }
        Ok::<_, ModelError>(Polyhedron::from_atoms(space.clone(), parsed))
    };

    let mut locations = Vec::new();
    for l in &doc.locations {
        locations.push(Location {
            name: l.name.clone(),
            invariant: parse_conj(&l.invariant, format!("invariant of `{}`", l.name))?,
        });
    }

    let mut edges = Vec::new();
    for (i, e) in doc.edges.iter().enumerate() {
        let source = match loc_index(&e.from) {
            Some(s) => LocId(s),
            None => {
                diagnostics.push(Diagnostic {
                    code: DiagnosticCode::UnknownLocation,
                    message: format!("edge {} leaves unknown location `{}`", i, e.from),
                });
                LocId(0)
            }
        };
        let target = match loc_index(&e.to) {
            Some(t) => LocId(t),
            None => {
                diagnostics.push(Diagnostic {
                    code: DiagnosticCode::UnknownLocation,
                    message: format!("edge {} enters unknown location `{}`", i, e.to),
                });
                LocId(0)
            }
        };
        let mut resets = Vec::new();
        for r in &e.resets {
            match space.var(r) {
                Some(v) if space.is_clock(v) => resets.push(v),
                _ => diagnostics.push(Diagnostic {
                    code: DiagnosticCode::ResetNonClock,
                    message: format!("edge {i} resets `{r}`, which is not a clock"),
                }),
            }
        }
        resets.sort_unstable();
        resets.dedup();
        edges.push(Edge {
            source,
            guard: parse_conj(&e.guard, format!("guard of edge {i}"))?,
            action: e.action.clone(),
            resets,
            target,
        });
    }

    let mut goals = Vec::new();
    if let Some(goal_names) = &doc.goal {
        for g in goal_names {
            match loc_index(g) {
                Some(i) => goals.push(LocId(i)),
                None => diagnostics.push(Diagnostic {
                    code: DiagnosticCode::UnknownLocation,
                    message: format!("goal location `{g}` is not declared"),
                }),
            }
        }
    }

    if !diagnostics.is_empty() {
        return Err(ModelError::Invalid(diagnostics));
    }
    Ok((
        Pta::from_parts(doc.name, space, locations, initial, edges),
        goals,
    ))
}

/// Checks the structural invariants of an assembled automaton.
/// An empty list means the automaton is well formed.
pub fn validate(pta: &Pta) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let n = pta.locations.len();
    if pta.initial.0 >= n {
        diags.push(Diagnostic {
            code: DiagnosticCode::NoInitialLocation,
            message: format!("initial location index {} out of range", pta.initial.0),
        });
    }
    let mut seen = BTreeSet::new();
    for l in &pta.locations {
        if !seen.insert(l.name.as_str()) {
            diags.push(Diagnostic {
                code: DiagnosticCode::DuplicateLocation,
                message: format!("location `{}` is declared twice", l.name),
            });
        }
        if l.invariant.space() != &pta.space {
            diags.push(Diagnostic {
                code: DiagnosticCode::SpaceMismatch,
                message: format!("invariant of `{}` uses a foreign space", l.name),
            });
        }
    }
    for (i, e) in pta.edges.iter().enumerate() {
        if e.source.0 >= n || e.target.0 >= n {
            diags.push(Diagnostic {
                code: DiagnosticCode::UnknownLocation,
                message: format!("edge {i} references a missing location"),
            });
        }
        if e.guard.space() != &pta.space {
            diags.push(Diagnostic {
                code: DiagnosticCode::SpaceMismatch,
                message: format!("guard of edge {i} uses a foreign space"),
            });
        }
        for r in &e.resets {
            if r.0 >= pta.space.num_vars() || !pta.space.is_clock(*r) {
                diags.push(Diagnostic {
                    code: DiagnosticCode::ResetNonClock,
                    message: format!("edge {i} resets a non-clock"),
                });
            }
        }
    }
    diags
}

/// Guard atoms like `x = 0` for each clock, used by the initial state.
pub(crate) fn clocks_zero(space: &Arc<VarSpace>) -> Vec<Atom> {
    space
        .clock_ids()
        .map(|c| Atom::new(LinTerm::var(c), Rel::Eq))
        .collect()
}

/// `p >= 0` for each parameter.
pub(crate) fn params_nonneg(space: &Arc<VarSpace>) -> Vec<Atom> {
    space
        .param_ids()
        .map(|p| Atom::new(-LinTerm::var(p), Rel::Le))
        .collect()
}

/// Model documents shared across the crate's tests.
#[cfg(test)]
pub(crate) mod fixtures {
    pub(crate) const THRESHOLD: &str = r#"{
        "name": "threshold",
        "clocks": [],
        "parameters": ["p"],
        "initial": "l0",
        "locations": [
            {"name": "l0"}, {"name": "l1"}, {"name": "l2"}, {"name": "l3"}, {"name": "l4"}
        ],
        "edges": [
            {"from": "l0", "guard": ["p <= 1"], "action": "a", "resets": [], "to": "l1"},
            {"from": "l0", "guard": ["p > 1"], "action": "b", "resets": [], "to": "l2"},
            {"from": "l1", "action": "c", "resets": [], "to": "l3"},
            {"from": "l2", "guard": ["p > 1"], "action": "d", "resets": [], "to": "l3"},
            {"from": "l3", "guard": ["p <= 1"], "action": "f", "resets": [], "to": "l2"},
            {"from": "l3", "guard": ["p <= 1"], "action": "e", "resets": [], "to": "l4"}
        ],
        "goal": ["l4"]
    }"#;

    pub(crate) const DRIFT: &str = r#"{
        "name": "drift",
        "clocks": ["x", "y"],
        "parameters": ["p", "q"],
        "initial": "l0",
        "locations": [
            {"name": "l0"},
            {"name": "l1", "invariant": ["x <= p"]}
        ],
        "edges": [
            {"from": "l0", "guard": ["x <= p", "y <= p"], "action": "lo", "resets": [], "to": "l1"},
            {"from": "l0", "guard": ["x <= p", "y >= p"], "action": "hi", "resets": [], "to": "l1"},
            {"from": "l1", "guard": ["x >= q"], "action": "loop", "resets": ["x"], "to": "l1"}
        ],
        "goal": ["l1"]
    }"#;
}

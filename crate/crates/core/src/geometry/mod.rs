//! Exact rational, not-necessarily-closed convex polyhedra over a fixed
//! variable space of clocks and parameters.
//!
//! Polyhedra are stored as conjunctions of normalized linear atoms
//! `term ⋈ 0` with `⋈ ∈ {<, <=, =}`. All arithmetic is exact
//! (arbitrary-precision rationals); there is no floating point anywhere.

mod atom;
mod poly;
mod term;

pub use atom::{parse_atom, Atom, Rel};
pub use poly::Polyhedron;
pub use term::LinTerm;

use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Exact rational scalar used for every coefficient and constant.
pub type Rat = num_rational::BigRational;

/// Builds a `Rat` from an integer numerator and denominator.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(num.into(), den.into())
}

/// Index of a variable within its [`VarSpace`].
///
/// Clocks come first (`0..num_clocks`), parameters after them. Indices are
/// stable for the lifetime of the space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// The fixed, ordered set of clocks and parameters a model ranges over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarSpace {
    clocks: Vec<String>,
    params: Vec<String>,
}

impl VarSpace {
    /// Creates a space from ordered clock and parameter identifiers.
    /// Identifiers must be unique across both lists.
    pub fn new<S: Into<String>>(
        clocks: impl IntoIterator<Item = S>,
        params: impl IntoIterator<Item = S>,
    ) -> Result<Arc<VarSpace>, GeometryError> {
        let clocks: Vec<String> = clocks.into_iter().map(Into::into).collect();
        let params: Vec<String> = params.into_iter().map(Into::into).collect();
        let mut seen = std::collections::BTreeSet::new();
        for name in clocks.iter().chain(params.iter()) {
            if !seen.insert(name.as_str()) {
                return Err(GeometryError::DuplicateIdentifier(name.clone()));
            }
        }
        Ok(Arc::new(VarSpace { clocks, params }))
    }

    pub fn num_clocks(&self) -> usize {
        self.clocks.len()
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn num_vars(&self) -> usize {
        self.clocks.len() + self.params.len()
    }

    /// Looks an identifier up, clocks and parameters alike.
    pub fn var(&self, name: &str) -> Option<VarId> {
        if let Some(i) = self.clocks.iter().position(|c| c == name) {
            return Some(VarId(i));
        }
        self.params
            .iter()
            .position(|p| p == name)
            .map(|i| VarId(self.clocks.len() + i))
    }

    pub fn name(&self, v: VarId) -> &str {
        if v.0 < self.clocks.len() {
            &self.clocks[v.0]
        } else {
            &self.params[v.0 - self.clocks.len()]
        }
    }

    pub fn is_clock(&self, v: VarId) -> bool {
        v.0 < self.clocks.len()
    }

    pub fn is_param(&self, v: VarId) -> bool {
        v.0 >= self.clocks.len() && v.0 < self.num_vars()
    }

    pub fn clock_ids(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..self.clocks.len()).map(VarId)
    }

    pub fn param_ids(&self) -> impl Iterator<Item = VarId> + '_ {
        (self.clocks.len()..self.num_vars()).map(VarId)
    }

    pub fn all_ids(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..self.num_vars()).map(VarId)
    }

    pub fn clock_names(&self) -> &[String] {
        &self.clocks
    }

    pub fn param_names(&self) -> &[String] {
        &self.params
    }
}

/// Checks that two polyhedra live in the same space.
pub(crate) fn check_same_space(a: &Arc<VarSpace>, b: &Arc<VarSpace>) -> Result<(), GeometryError> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(GeometryError::SpaceMismatch)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("syntax error in `{text}`: {msg}")]
    AtomSyntax { text: String, msg: String },
    #[error("polyhedra belong to different variable spaces")]
    SpaceMismatch,
    #[error("duplicate identifier `{0}`")]
    DuplicateIdentifier(String),
    #[error("point does not assign variable `{0}`")]
    MissingAssignment(String),
    #[error("`{0}` is not a clock")]
    NotAClock(String),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn var_space_orders_clocks_before_params() {
        let space = VarSpace::new(vec!["x", "y"], vec!["p"]).unwrap();
        assert_eq!(space.var("x"), Some(VarId(0)));
        assert_eq!(space.var("y"), Some(VarId(1)));
        assert_eq!(space.var("p"), Some(VarId(2)));
        assert_eq!(space.var("q"), None);
        assert!(space.is_clock(VarId(1)));
        assert!(space.is_param(VarId(2)));
        assert_eq!(space.name(VarId(2)), "p");
    }

    #[test]
    fn var_space_rejects_duplicates() {
        assert_eq!(
            VarSpace::new(vec!["x"], vec!["x"]).unwrap_err(),
            GeometryError::DuplicateIdentifier("x".into())
        );
    }
}

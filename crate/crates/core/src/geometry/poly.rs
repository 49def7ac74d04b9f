use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use num_traits::{One, Zero};

use super::{check_same_space, Atom, GeometryError, LinTerm, Rat, Rel, VarId, VarSpace};

/// A not-necessarily-closed convex polyhedron: a finite conjunction of
/// normalized atoms over a fixed variable space.
///
/// The empty conjunction denotes the universe. Values are immutable after
/// construction; the emptiness memo is write-once and derived, so sharing
/// across threads is safe.
#[derive(Debug, Clone)]
pub struct Polyhedron {
    space: Arc<VarSpace>,
    atoms: Vec<Atom>,
    empty: OnceLock<bool>,
}

impl PartialEq for Polyhedron {
    /// Syntactic equality on the canonical atom list. Point-set equality is
    /// [`Polyhedron::equals`].
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms && *self.space == *other.space
    }
}

impl Eq for Polyhedron {}

impl Polyhedron {
    pub fn universe(space: Arc<VarSpace>) -> Polyhedron {
        Polyhedron {
            space,
            atoms: Vec::new(),
            empty: OnceLock::from(false),
        }
    }

    pub fn from_atoms(space: Arc<VarSpace>, atoms: impl IntoIterator<Item = Atom>) -> Polyhedron {
        let (atoms, known_empty) = canonicalize(atoms.into_iter().collect());
        let empty = OnceLock::new();
        if known_empty {
            let _ = empty.set(true);
        }
        Polyhedron {
            space,
            atoms,
            empty,
        }
    }

    fn empty_poly(space: Arc<VarSpace>) -> Polyhedron {
        Polyhedron::from_atoms(space, vec![false_atom()])
    }

    pub fn space(&self) -> &Arc<VarSpace> {
        &self.space
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_universe(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Conjunction with extra atoms over the same space.
    pub fn conjoin(&self, atoms: impl IntoIterator<Item = Atom>) -> Polyhedron {
        let mut all = self.atoms.clone();
        all.extend(atoms);
        let before = self.atoms.len().max(1);
        let mut out = Polyhedron::from_atoms(self.space.clone(), all);
        if out.atoms.len() > 2 * before {
            out = out.minimize();
        }
        out
    }

    /// Conjunction of two polyhedra.
    pub fn meet(&self, other: &Polyhedron) -> Result<Polyhedron, GeometryError> {
        check_same_space(&self.space, &other.space)?;
        Ok(self.conjoin(other.atoms.iter().cloned()))
    }

    /// Existential projection `∃v. self` by Fourier–Motzkin elimination.
    /// Equalities mentioning `v` are used for substitution first; a combined
    /// bound is strict iff either parent is strict.
    pub fn eliminate(&self, v: VarId) -> Polyhedron {
        let before = self.atoms.len().max(1);
        let atoms = eliminate_raw(self.atoms.clone(), v);
        let mut out = Polyhedron::from_atoms(self.space.clone(), atoms);
        if out.atoms.len() > 2 * before {
            out = out.minimize();
        }
        out
    }

    /// True iff no rational point satisfies all atoms. Decided by eliminating
    /// every variable and evaluating the residual constant atoms; memoized.
    pub fn is_empty(&self) -> bool {
        *self.empty.get_or_init(|| compute_empty(self.atoms.clone()))
    }

    /// True iff `other ⊆ self`: every atom of `self`, negated, is
    /// unsatisfiable together with `other`.
    pub fn includes(&self, other: &Polyhedron) -> Result<bool, GeometryError> {
        check_same_space(&self.space, &other.space)?;
        for atom in &self.atoms {
            if !atom_includes(atom, other) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Point-set equality (mutual inclusion).
    pub fn equals(&self, other: &Polyhedron) -> Result<bool, GeometryError> {
        check_same_space(&self.space, &other.space)?;
        if self.atoms == other.atoms {
            return Ok(true);
        }
        Ok(self.includes(other)? && other.includes(self)?)
    }

    /// Removes atoms implied by the remaining ones and turns inequalities
    /// that hold with equality everywhere into equality atoms. Same point
    /// set, deterministic atom order.
    pub fn minimize(&self) -> Polyhedron {
        if self.is_empty() {
            return Polyhedron::empty_poly(self.space.clone());
        }
        // Surface implied equalities so canonical forms coincide for
        // syntactic state deduplication.
        let strengthened: Vec<Atom> = self
            .atoms
            .iter()
            .map(|a| {
                if a.rel() != Rel::Le {
                    return a.clone();
                }
                let mut probe = self.atoms.clone();
                probe.push(Atom::new(a.term().clone(), Rel::Lt));
                if compute_empty(probe) {
                    Atom::new(a.term().clone(), Rel::Eq)
                } else {
                    a.clone()
                }
            })
            .collect();
        let (mut kept, _) = canonicalize(strengthened);
        let mut i = 0;
        while i < kept.len() {
            let candidate = kept[i].clone();
            let rest: Vec<Atom> = kept
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, a)| a.clone())
                .collect();
            let implied = candidate.negations().iter().all(|neg| {
                let mut probe = rest.clone();
                probe.push(neg.clone());
                compute_empty(probe)
            });
            if implied {
                kept.remove(i);
            } else {
                i += 1;
            }
        }
        let out = Polyhedron::from_atoms(self.space.clone(), kept);
        let _ = out.empty.set(false);
        out
    }

    /// The conjunction of each polyhedron's atoms that are valid for the
    /// other. Always a superset of the convex hull of the union.
    pub fn envelope(&self, other: &Polyhedron) -> Result<Polyhedron, GeometryError> {
        check_same_space(&self.space, &other.space)?;
        let mut atoms = Vec::new();
        for a in &self.atoms {
            if atom_includes(a, other) {
                atoms.push(a.clone());
            }
        }
        for a in &other.atoms {
            if atom_includes(a, self) {
                atoms.push(a.clone());
            }
        }
        Ok(Polyhedron::from_atoms(self.space.clone(), atoms))
    }

    /// If `self ∪ other` is convex, returns that union (which equals the
    /// envelope); otherwise `None`.
    ///
    /// The union is convex iff for every atom of `self` violated by `other`
    /// and every atom of `other` violated by `self`, the envelope minus both
    /// is empty.
    pub fn try_merge(&self, other: &Polyhedron) -> Result<Option<Polyhedron>, GeometryError> {
        check_same_space(&self.space, &other.space)?;
        if self.is_empty() || other.is_empty() {
            return Ok(None);
        }
        let mine_valid: Vec<bool> = self.atoms.iter().map(|a| atom_includes(a, other)).collect();
        let theirs_valid: Vec<bool> = other.atoms.iter().map(|a| atom_includes(a, self)).collect();
        let env_atoms: Vec<Atom> = self
            .atoms
            .iter()
            .zip(&mine_valid)
            .filter(|(_, ok)| **ok)
            .map(|(a, _)| a.clone())
            .chain(
                other
                    .atoms
                    .iter()
                    .zip(&theirs_valid)
                    .filter(|(_, ok)| **ok)
                    .map(|(a, _)| a.clone()),
            )
            .collect();
        for (c, _) in self.atoms.iter().zip(&mine_valid).filter(|(_, ok)| !**ok) {
            for (d, _) in other
                .atoms
                .iter()
                .zip(&theirs_valid)
                .filter(|(_, ok)| !**ok)
            {
                for nc in c.negations() {
                    for nd in d.negations() {
                        let mut probe = env_atoms.clone();
                        probe.push(nc.clone());
                        probe.push(nd);
                        if !compute_empty(probe) {
                            return Ok(None);
                        }
                    }
                }
            }
        }
        Ok(Some(
            Polyhedron::from_atoms(self.space.clone(), env_atoms).minimize(),
        ))
    }

    /// Future of the polyhedron under uniform clock delay: every clock is
    /// shifted by the same nonnegative amount, parameters stay constant.
    pub fn time_elapse(&self) -> Polyhedron {
        let delay = VarId(self.space.num_vars());
        let mut atoms: Vec<Atom> = self
            .atoms
            .iter()
            .map(|a| {
                let mut shift = Rat::from_integer(0.into());
                for (v, c) in a.term().coeffs() {
                    if self.space.is_clock(v) {
                        shift += c;
                    }
                }
                let mut term = a.term().clone();
                term.add_to_coeff(delay, &-shift);
                Atom::new(term, a.rel())
            })
            .collect();
        // delay >= 0
        atoms.push(Atom::new(-LinTerm::var(delay), Rel::Le));
        let atoms = eliminate_raw(atoms, delay);
        Polyhedron::from_atoms(self.space.clone(), atoms)
    }

    /// Resets the given clocks to zero, leaving everything else untouched.
    pub fn reset(&self, clocks: &[VarId]) -> Result<Polyhedron, GeometryError> {
        let mut sorted: Vec<VarId> = clocks.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        for &c in &sorted {
            if c.0 >= self.space.num_vars() || !self.space.is_clock(c) {
                let name = if c.0 < self.space.num_vars() {
                    self.space.name(c).to_string()
                } else {
                    format!("{c}")
                };
                return Err(GeometryError::NotAClock(name));
            }
        }
        let mut out = self.clone();
        for &c in &sorted {
            out = out.eliminate(c);
        }
        let zeros: Vec<Atom> = sorted
            .iter()
            .map(|&c| Atom::new(LinTerm::var(c), Rel::Eq))
            .collect();
        Ok(out.conjoin(zeros))
    }

    /// Projection onto the parameters: all clocks eliminated.
    pub fn project_params(&self) -> Polyhedron {
        let mut out = self.clone();
        for c in self.space.clock_ids() {
            out = out.eliminate(c);
        }
        out
    }

    /// Membership of a total rational point.
    pub fn contains_point(&self, point: &BTreeMap<VarId, Rat>) -> Result<bool, GeometryError> {
        for v in self.space.all_ids() {
            if !point.contains_key(&v) {
                return Err(GeometryError::MissingAssignment(
                    self.space.name(v).to_string(),
                ));
            }
        }
        for atom in &self.atoms {
            if !atom.eval(point).expect("point is total") {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Canonical textual form: normalized atoms in sorted order joined by
    /// `AND`; the universe renders as `True`.
    pub fn render(&self) -> String {
        if self.atoms.is_empty() {
            return "True".to_string();
        }
        self.atoms
            .iter()
            .map(|a| a.render(&self.space))
            .collect::<Vec<_>>()
            .join(" AND ")
    }
}

fn false_atom() -> Atom {
    Atom::new(LinTerm::constant(Rat::one()), Rel::Le)
}

/// Sorts, dedups, drops true constants and folds complementary inequality
/// pairs into equalities. Returns the atom list plus a definite-emptiness
/// flag from constant or complementary-strict contradictions.
fn canonicalize(mut atoms: Vec<Atom>) -> (Vec<Atom>, bool) {
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms.drain(..) {
        match a.const_truth() {
            Some(true) => continue,
            Some(false) => return (vec![false_atom()], true),
            None => out.push(a),
        }
    }
    out.sort();
    out.dedup();
    // t <= 0 together with -t <= 0 is t = 0; a strict counterpart is empty.
    let snapshot = out.clone();
    let mut replaced: Vec<Atom> = Vec::new();
    let mut dropped = vec![false; snapshot.len()];
    for (i, a) in snapshot.iter().enumerate() {
        if dropped[i] || a.rel() == Rel::Eq {
            continue;
        }
        let neg_le = Atom::new(-a.term().clone(), Rel::Le);
        let neg_lt = Atom::new(-a.term().clone(), Rel::Lt);
        let conflict = match a.rel() {
            Rel::Lt => snapshot.contains(&neg_le) || snapshot.contains(&neg_lt),
            Rel::Le => snapshot.contains(&neg_lt),
            Rel::Eq => false,
        };
        if conflict {
            return (vec![false_atom()], true);
        }
        if a.rel() == Rel::Le {
            if let Some(j) = snapshot.iter().position(|b| *b == neg_le) {
                if !dropped[j] && j != i {
                    dropped[i] = true;
                    dropped[j] = true;
                    replaced.push(Atom::new(a.term().clone(), Rel::Eq));
                }
            }
        }
    }
    if !replaced.is_empty() || dropped.iter().any(|d| *d) {
        let mut kept: Vec<Atom> = snapshot
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !dropped[*i])
            .map(|(_, a)| a)
            .collect();
        kept.extend(replaced);
        kept.sort();
        kept.dedup();
        return (kept, false);
    }
    (out, false)
}

/// One Fourier–Motzkin elimination step on a raw atom list. The variable may
/// be a scratch index outside the space.
fn eliminate_raw(mut atoms: Vec<Atom>, v: VarId) -> Vec<Atom> {
    // Substitute equalities first to avoid quadratic growth.
    while let Some(pos) = atoms
        .iter()
        .position(|a| a.rel() == Rel::Eq && a.mentions(v))
    {
        let eq = atoms.swap_remove(pos);
        let c = eq.term().coeff(v);
        // v = -(term - c*v) / c
        let mut rest = eq.term().clone();
        rest.set_coeff(v, Rat::from_integer(0.into()));
        let rep = rest.scaled(&(-Rat::one() / c));
        atoms = atoms
            .into_iter()
            .map(|a| {
                if a.mentions(v) {
                    Atom::new(a.term().substitute(v, &rep), a.rel())
                } else {
                    a
                }
            })
            .collect();
    }
    let mut kept = Vec::new();
    let mut uppers = Vec::new(); // positive coefficient on v
    let mut lowers = Vec::new(); // negative coefficient on v
    for a in atoms {
        let c = a.term().coeff(v);
        if c.is_zero() {
            kept.push(a);
        } else if c > Rat::from_integer(0.into()) {
            uppers.push(a);
        } else {
            lowers.push(a);
        }
    }
    for u in &uppers {
        let cu = u.term().coeff(v);
        let mut tu = u.term().clone();
        tu.set_coeff(v, Rat::from_integer(0.into()));
        for l in &lowers {
            let cl = l.term().coeff(v);
            let mut tl = l.term().clone();
            tl.set_coeff(v, Rat::from_integer(0.into()));
            // u: cu*v + tu <= 0, cu > 0   =>  v <= -tu/cu
            // l: cl*v + tl <= 0, cl < 0   =>  v >= -tl/cl
            // combined: tu/cu - tl/cl <= 0, strict iff either parent strict
            let term = tu.scaled(&(Rat::one() / &cu)) - tl.scaled(&(Rat::one() / &cl));
            let rel = if u.rel() == Rel::Lt || l.rel() == Rel::Lt {
                Rel::Lt
            } else {
                Rel::Le
            };
            kept.push(Atom::new(term, rel));
        }
    }
    kept
}

/// Full Fourier–Motzkin emptiness decision on a raw atom list.
fn compute_empty(atoms: Vec<Atom>) -> bool {
    let (mut atoms, known_empty) = canonicalize(atoms);
    if known_empty {
        return true;
    }
    loop {
        if atoms.is_empty() {
            return false;
        }
        let mut vars: Vec<VarId> = Vec::new();
        for a in &atoms {
            for v in a.term().vars() {
                if !vars.contains(&v) {
                    vars.push(v);
                }
            }
        }
        if vars.is_empty() {
            // Canonicalization already evaluated residual constants.
            return false;
        }
        vars.sort_unstable();
        // Prefer a variable pinned by an equality, else the one with the
        // smallest upper*lower product.
        let pick = vars
            .iter()
            .copied()
            .find(|v| atoms.iter().any(|a| a.rel() == Rel::Eq && a.mentions(*v)))
            .unwrap_or_else(|| {
                *vars
                    .iter()
                    .min_by_key(|v| {
                        let ups = atoms
                            .iter()
                            .filter(|a| a.term().coeff(**v) > Rat::from_integer(0.into()))
                            .count();
                        let downs = atoms
                            .iter()
                            .filter(|a| {
                                let c = a.term().coeff(**v);
                                !c.is_zero() && c < Rat::from_integer(0.into())
                            })
                            .count();
                        (ups * downs, v.0)
                    })
                    .expect("nonempty variable list")
            });
        let next = eliminate_raw(atoms, pick);
        let (next, known_empty) = canonicalize(next);
        if known_empty {
            return true;
        }
        atoms = next;
    }
}

/// True iff `poly ⊆ atom`, i.e. every negation piece is unsatisfiable
/// together with the polyhedron.
fn atom_includes(atom: &Atom, poly: &Polyhedron) -> bool {
    atom.negations().iter().all(|neg| {
        let mut probe = poly.atoms.clone();
        probe.push(neg.clone());
        compute_empty(probe)
    })
}

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{GeometryError, LinTerm, Rat, VarId, VarSpace};

/// Relation of an atom against zero. `>` and `>=` are stored negated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rel {
    Lt,
    Le,
    Eq,
}

/// A normalized constraint atom `term ⋈ 0`.
///
/// Normal form: coefficients and constant are integers with gcd 1; for
/// equalities the leading (lowest-id) coefficient is positive. Inequalities
/// keep their as-written sign.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    term: LinTerm,
    rel: Rel,
}

impl Atom {
    pub fn new(term: LinTerm, rel: Rel) -> Atom {
        let mut atom = Atom { term, rel };
        atom.normalize();
        atom
    }

    /// Convenience constructor for `lhs ⋈ rhs`.
    pub fn cmp(lhs: LinTerm, rel: Rel, rhs: LinTerm) -> Atom {
        Atom::new(lhs - rhs, rel)
    }

    pub fn term(&self) -> &LinTerm {
        &self.term
    }

    pub fn rel(&self) -> Rel {
        self.rel
    }

    fn normalize(&mut self) {
        // Scale to primitive integer coefficients.
        let mut lcm = BigInt::one();
        for (_, c) in self.term.coeffs() {
            lcm = lcm.lcm(c.denom());
        }
        lcm = lcm.lcm(self.term.const_part().denom());
        let mut gcd = BigInt::zero();
        let scaled: Vec<BigInt> = self
            .term
            .coeffs()
            .map(|(_, c)| c.numer() * &lcm / c.denom())
            .chain(std::iter::once(
                self.term.const_part().numer() * &lcm / self.term.const_part().denom(),
            ))
            .collect();
        for n in &scaled {
            gcd = gcd.gcd(n);
        }
        if !gcd.is_zero() {
            let factor = Rat::new(lcm, gcd);
            self.term = self.term.scaled(&factor);
        }
        // Equalities get a canonical sign.
        if self.rel == Rel::Eq {
            let negate = match self.term.coeffs().next() {
                Some((_, c)) => c.is_negative(),
                None => self.term.const_part().is_negative(),
            };
            if negate {
                self.term = self.term.clone().scaled(&Rat::from_integer((-1).into()));
            }
        }
    }

    pub fn mentions(&self, v: VarId) -> bool {
        self.term.mentions(v)
    }

    pub fn is_const(&self) -> bool {
        self.term.is_const()
    }

    /// Truth value of a variable-free atom.
    pub fn const_truth(&self) -> Option<bool> {
        if !self.is_const() {
            return None;
        }
        let c = self.term.const_part();
        Some(match self.rel {
            Rel::Lt => c.is_negative(),
            Rel::Le => !c.is_positive(),
            Rel::Eq => c.is_zero(),
        })
    }

    /// Atoms whose disjunction is the complement of `self`.
    /// Negation flips strictness; equalities split into two strict pieces.
    pub fn negations(&self) -> Vec<Atom> {
        match self.rel {
            Rel::Le => vec![Atom::new(-self.term.clone(), Rel::Lt)],
            Rel::Lt => vec![Atom::new(-self.term.clone(), Rel::Le)],
            Rel::Eq => vec![
                Atom::new(self.term.clone(), Rel::Lt),
                Atom::new(-self.term.clone(), Rel::Lt),
            ],
        }
    }

    pub fn eval(&self, point: &BTreeMap<VarId, Rat>) -> Option<bool> {
        let v = self.term.eval(point)?;
        Some(match self.rel {
            Rel::Lt => v.is_negative(),
            Rel::Le => !v.is_positive(),
            Rel::Eq => v.is_zero(),
        })
    }

    /// Renders the atom in the model grammar, positive part on the left.
    pub fn render(&self, space: &VarSpace) -> String {
        let mut left = Vec::new();
        let mut right = Vec::new();
        for (v, c) in self.term.coeffs() {
            let side = if c.is_positive() {
                &mut left
            } else {
                &mut right
            };
            let mag = c.numer().abs();
            if mag.is_one() {
                side.push(space.name(v).to_string());
            } else {
                side.push(format!("{}*{}", mag, space.name(v)));
            }
        }
        let k = self.term.const_part();
        if k.is_positive() {
            left.push(k.numer().to_string());
        } else if k.is_negative() {
            right.push(k.numer().abs().to_string());
        }
        let join = |parts: Vec<String>| {
            if parts.is_empty() {
                "0".to_string()
            } else {
                parts.join(" + ")
            }
        };
        let op = match self.rel {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
        };
        format!("{} {} {}", join(left), op, join(right))
    }
}

/// Parses `term REL term` over the given space.
///
/// Grammar: `term := ['-'] factor (('+'|'-') factor)*`,
/// `factor := INT | INT '*' ID | ID`, `REL ∈ {<, <=, =, >=, >}`.
pub fn parse_atom(text: &str, space: &VarSpace) -> Result<Atom, GeometryError> {
    Parser {
        text,
        rest: text,
        space,
    }
    .parse()
}

struct Parser<'a> {
    text: &'a str,
    rest: &'a str,
    space: &'a VarSpace,
}

impl<'a> Parser<'a> {
    fn error(&self, msg: impl Into<String>) -> GeometryError {
        GeometryError::AtomSyntax {
            text: self.text.to_string(),
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start();
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if let Some(r) = self.rest.strip_prefix(tok) {
            self.rest = r;
            true
        } else {
            false
        }
    }

    fn parse(mut self) -> Result<Atom, GeometryError> {
        let lhs = self.term()?;
        self.skip_ws();
        // Longest relations first.
        let rel = if self.eat("<=") {
            (Rel::Le, false)
        } else if self.eat(">=") {
            (Rel::Le, true)
        } else if self.eat("<") {
            (Rel::Lt, false)
        } else if self.eat(">") {
            (Rel::Lt, true)
        } else if self.eat("=") {
            (Rel::Eq, false)
        } else {
            return Err(self.error("expected a relation (<, <=, =, >=, >)"));
        };
        let rhs = self.term()?;
        self.skip_ws();
        if !self.rest.is_empty() {
            return Err(self.error(format!("trailing input `{}`", self.rest)));
        }
        let diff = if rel.1 { rhs - lhs } else { lhs - rhs };
        Ok(Atom::new(diff, rel.0))
    }

    fn term(&mut self) -> Result<LinTerm, GeometryError> {
        let mut acc = LinTerm::zero();
        let mut sign = if self.eat("-") { -1i64 } else { 1 };
        loop {
            let f = self.factor()?;
            acc = acc + f.scaled(&Rat::from_integer(sign.into()));
            self.skip_ws();
            if self.eat("+") {
                sign = 1;
            } else if self.eat("-") {
                sign = -1;
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<LinTerm, GeometryError> {
        self.skip_ws();
        let mut chars = self.rest.char_indices();
        match chars.next() {
            Some((_, c)) if c.is_ascii_digit() => {
                let end = self
                    .rest
                    .find(|c: char| !c.is_ascii_digit())
                    .unwrap_or(self.rest.len());
                let digits = &self.rest[..end];
                self.rest = &self.rest[end..];
                let n: BigInt = digits.parse().expect("digits parse as an integer");
                if self.eat("*") {
                    let id = self.ident()?;
                    let v = self.lookup(&id)?;
                    Ok(LinTerm::var(v).scaled(&Rat::from_integer(n)))
                } else {
                    Ok(LinTerm::constant(Rat::from_integer(n)))
                }
            }
            Some((_, c)) if c.is_ascii_alphabetic() || c == '_' => {
                let id = self.ident()?;
                let v = self.lookup(&id)?;
                Ok(LinTerm::var(v))
            }
            Some((_, c)) => Err(self.error(format!("unexpected character `{c}`"))),
            None => Err(self.error("empty term")),
        }
    }

    fn ident(&mut self) -> Result<String, GeometryError> {
        self.skip_ws();
        let end = self
            .rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(self.rest.len());
        if end == 0 {
            return Err(self.error("expected an identifier"));
        }
        let id = self.rest[..end].to_string();
        self.rest = &self.rest[end..];
        Ok(id)
    }

    fn lookup(&self, id: &str) -> Result<VarId, GeometryError> {
        self.space
            .var(id)
            .ok_or_else(|| GeometryError::UnknownIdentifier(id.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rat;

    fn space() -> std::sync::Arc<VarSpace> {
        VarSpace::new(vec!["x", "y"], vec!["p"]).unwrap()
    }

    #[test]
    fn scaling_normalizes_to_primitive_integers() {
        let s = space();
        // 2*x <= 4 normalizes to x - 2 <= 0
        let a = parse_atom("2*x <= 4", &s).unwrap();
        assert_eq!(a.rel(), Rel::Le);
        assert_eq!(a.term().coeff(VarId(0)), rat(1, 1));
        assert_eq!(*a.term().const_part(), rat(-2, 1));
        assert_eq!(a.render(&s), "x <= 2");
    }

    #[test]
    fn strict_lower_bound_is_stored_negated() {
        let s = space();
        // p > 1 becomes 1 - p < 0
        let a = parse_atom("p > 1", &s).unwrap();
        assert_eq!(a.rel(), Rel::Lt);
        assert_eq!(a.term().coeff(VarId(2)), rat(-1, 1));
        assert_eq!(*a.term().const_part(), rat(1, 1));
        assert_eq!(a.render(&s), "1 < p");
    }

    #[test]
    fn unknown_identifier_is_reported() {
        let s = space();
        let err = parse_atom("x = y + z", &s).unwrap_err();
        assert_eq!(err, GeometryError::UnknownIdentifier("z".into()));
    }

    #[test]
    fn equality_gets_a_leading_positive_sign() {
        let s = space();
        let a = parse_atom("0 = y - x", &s).unwrap();
        let b = parse_atom("x = y", &s).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.render(&s), "x = y");
    }

    #[test]
    fn negations_flip_strictness() {
        let s = space();
        let a = parse_atom("p <= 1", &s).unwrap();
        let negs = a.negations();
        assert_eq!(negs.len(), 1);
        assert_eq!(negs[0], parse_atom("p > 1", &s).unwrap());
        let eq = parse_atom("x = y", &s).unwrap();
        assert_eq!(eq.negations().len(), 2);
    }

    #[test]
    fn eval_respects_strictness() {
        let s = space();
        let le = parse_atom("p <= 1", &s).unwrap();
        let lt = parse_atom("p < 1", &s).unwrap();
        let at = |v: Rat| {
            let mut m = BTreeMap::new();
            m.insert(VarId(2), v);
            m
        };
        assert_eq!(le.eval(&at(rat(1, 1))), Some(true));
        assert_eq!(lt.eval(&at(rat(1, 1))), Some(false));
        assert_eq!(lt.eval(&at(rat(2, 3))), Some(true));
    }

    #[test]
    fn rejects_malformed_input() {
        let s = space();
        assert!(parse_atom("x <", &s).is_err());
        assert!(parse_atom("x * y <= 1", &s).is_err());
        assert!(parse_atom("<= 1", &s).is_err());
        assert!(parse_atom("x == 1", &s).is_err());
    }
}

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;

use super::{Rat, VarId};

/// A linear term `Σ cᵢ·vᵢ + d` with exact rational coefficients.
///
/// Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LinTerm {
    coeffs: BTreeMap<VarId, Rat>,
    constant: Rat,
}

impl LinTerm {
    pub fn zero() -> LinTerm {
        LinTerm::default()
    }

    pub fn constant(c: Rat) -> LinTerm {
        LinTerm {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(v: VarId) -> LinTerm {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(v, Rat::from_integer(1.into()));
        LinTerm {
            coeffs,
            constant: Rat::zero(),
        }
    }

    pub fn coeff(&self, v: VarId) -> Rat {
        self.coeffs.get(&v).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn set_coeff(&mut self, v: VarId, c: Rat) {
        if c.is_zero() {
            self.coeffs.remove(&v);
        } else {
            self.coeffs.insert(v, c);
        }
    }

    pub fn add_to_coeff(&mut self, v: VarId, c: &Rat) {
        let new = self.coeff(v) + c;
        self.set_coeff(v, new);
    }

    pub fn const_part(&self) -> &Rat {
        &self.constant
    }

    pub fn add_to_const(&mut self, c: &Rat) {
        self.constant += c;
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (VarId, &Rat)> {
        self.coeffs.iter().map(|(v, c)| (*v, c))
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn mentions(&self, v: VarId) -> bool {
        self.coeffs.contains_key(&v)
    }

    pub fn is_const(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scaled(&self, factor: &Rat) -> LinTerm {
        if factor.is_zero() {
            return LinTerm::zero();
        }
        LinTerm {
            coeffs: self.coeffs.iter().map(|(v, c)| (*v, c * factor)).collect(),
            constant: &self.constant * factor,
        }
    }

    /// Replaces `v` by the term `rep`, assuming `rep` does not mention `v`.
    pub fn substitute(&self, v: VarId, rep: &LinTerm) -> LinTerm {
        let c = self.coeff(v);
        if c.is_zero() {
            return self.clone();
        }
        let mut out = self.clone();
        out.coeffs.remove(&v);
        out = out + rep.scaled(&c);
        out
    }

    /// Evaluates the term at a total assignment.
    pub fn eval(&self, point: &BTreeMap<VarId, Rat>) -> Option<Rat> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            acc += c * point.get(v)?;
        }
        Some(acc)
    }
}

impl Add for LinTerm {
    type Output = LinTerm;
    fn add(mut self, rhs: LinTerm) -> LinTerm {
        for (v, c) in rhs.coeffs {
            self.add_to_coeff(v, &c);
        }
        self.constant += rhs.constant;
        self
    }
}

impl Sub for LinTerm {
    type Output = LinTerm;
    fn sub(self, rhs: LinTerm) -> LinTerm {
        self + (-rhs)
    }
}

impl Neg for LinTerm {
    type Output = LinTerm;
    fn neg(self) -> LinTerm {
        LinTerm {
            coeffs: self.coeffs.into_iter().map(|(v, c)| (v, -c)).collect(),
            constant: -self.constant,
        }
    }
}

impl Mul<Rat> for LinTerm {
    type Output = LinTerm;
    fn mul(self, rhs: Rat) -> LinTerm {
        self.scaled(&rhs)
    }
}

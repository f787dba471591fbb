//! Atoms and power products.
//!
//! An [`Atom`] is an indivisible symbol of the polynomial layer: the
//! independent variable, a jet variable, a parameter, a function symbol
//! applied to an argument expression, or an adjoined surd. Expressions are
//! quotients of polynomials in atoms, so the total order defined here fixes
//! the canonical form: x < jets < parameters < function applications < surds.

use std::cmp::Ordering;
use std::sync::Arc;

use crate::expr::Expr;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Atom {
    /// The independent variable x.
    X,
    /// Jet variable: k-th x-derivative of a dependent variable; order 0 is
    /// the variable itself.
    Jet { var: Arc<str>, order: u32 },
    /// Named constant parameter.
    Param(Arc<str>),
    /// Function symbol applied to a single argument.
    Func { name: Arc<str>, arg: Arc<Expr> },
    /// Adjoined algebraic symbol s with s^2 equal to its radicand.
    Surd(Arc<str>),
    /// Placeholder used only inside derivative/relation templates.
    Hole,
}

impl Atom {
    pub fn jet(var: impl Into<Arc<str>>, order: u32) -> Self {
        Atom::Jet {
            var: var.into(),
            order,
        }
    }

    pub fn param(name: impl Into<Arc<str>>) -> Self {
        Atom::Param(name.into())
    }

    fn rank(&self) -> u8 {
        match self {
            Atom::X => 0,
            Atom::Jet { .. } => 1,
            Atom::Param(_) => 2,
            Atom::Func { .. } => 3,
            Atom::Surd(_) => 4,
            Atom::Hole => 5,
        }
    }

    pub fn is_constrained_kind(&self) -> bool {
        matches!(self, Atom::Func { .. } | Atom::Surd(_))
    }
}

impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Atom::X, Atom::X) | (Atom::Hole, Atom::Hole) => Ordering::Equal,
            (
                Atom::Jet { var: a, order: i },
                Atom::Jet { var: b, order: j },
            ) => a.cmp(b).then(i.cmp(j)),
            (Atom::Param(a), Atom::Param(b)) => a.cmp(b),
            (
                Atom::Func { name: a, arg: x },
                Atom::Func { name: b, arg: y },
            ) => a.cmp(b).then_with(|| x.cmp(y)),
            (Atom::Surd(a), Atom::Surd(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A power product of atoms, kept sorted by atom with positive exponents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(pub Vec<(Atom, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn atom(a: Atom) -> Self {
        Monomial(vec![(a, 1)])
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| *e).sum()
    }

    pub fn degree_in(&self, a: &Atom) -> u32 {
        self.0
            .iter()
            .find(|(b, _)| b == a)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// Exact division; `None` when some exponent of `other` exceeds ours.
    pub fn try_div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut i = 0;
        for (b, e) in &other.0 {
            loop {
                if i >= self.0.len() {
                    return None;
                }
                match self.0[i].0.cmp(b) {
                    Ordering::Less => {
                        out.push(self.0[i].clone());
                        i += 1;
                    }
                    Ordering::Equal => {
                        let (a, f) = &self.0[i];
                        if f < e {
                            return None;
                        }
                        if f > e {
                            out.push((a.clone(), f - e));
                        }
                        i += 1;
                        break;
                    }
                    Ordering::Greater => return None,
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        Some(Monomial(out))
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1.min(other.0[j].1)));
                    i += 1;
                    j += 1;
                }
            }
        }
        Monomial(out)
    }

    pub fn pow(&self, e: u32) -> Monomial {
        if e == 0 {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|(a, f)| (a.clone(), f * e)).collect())
    }

    /// Strip one atom entirely, returning the remaining product.
    pub fn without(&self, a: &Atom) -> Monomial {
        Monomial(self.0.iter().filter(|(b, _)| b != a).cloned().collect())
    }
}

/// Lexicographic order on exponent vectors (atoms ascending, missing
/// exponents read as zero). This is multiplicative, so leading-term division
/// arguments go through.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.0.get(i), other.0.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((a, e)), Some((b, f))) => match a.cmp(b) {
                    // The side holding the smaller atom has a positive
                    // exponent where the other has zero.
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => {
                        match e.cmp(f) {
                            Ordering::Equal => {}
                            ord => return ord,
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(k: u32) -> Atom {
        Atom::jet("u", k)
    }

    #[test]
    fn atom_order_follows_kind_ranks() {
        let mut v = vec![
            Atom::Surd("s".into()),
            Atom::param("k"),
            u(1),
            Atom::X,
            u(0),
        ];
        v.sort();
        assert_eq!(
            v,
            vec![Atom::X, u(0), u(1), Atom::param("k"), Atom::Surd("s".into())]
        );
    }

    #[test]
    fn monomial_mul_div_roundtrip() {
        let m = Monomial::atom(u(1)).mul(&Monomial::atom(u(2)).pow(3));
        let d = Monomial::atom(u(2)).pow(2);
        let q = m.try_div(&d).unwrap();
        assert_eq!(q.mul(&d), m);
        assert!(d.try_div(&m).is_none());
    }

    #[test]
    fn monomial_order_is_multiplicative() {
        // a^2 vs ab with a < b, then both scaled by b.
        let a2 = Monomial::atom(u(0)).pow(2);
        let ab = Monomial::atom(u(0)).mul(&Monomial::atom(u(1)));
        assert!(a2 > ab);
        let b = Monomial::atom(u(1));
        assert!(a2.mul(&b) > ab.mul(&b));
    }
}

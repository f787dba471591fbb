//! Canonical expressions.
//!
//! An [`Expr`] is a reduced fraction of multivariate polynomials in atoms:
//! the numerator has degree at most one in every constrained atom (surds and
//! relation-bearing function symbols), the denominator is free of constrained
//! atoms and monic in the term order, and numerator/denominator share no
//! factor. Two expressions equal as functions on the jet space (modulo the
//! declared relations) therefore have identical representations, which makes
//! "residual = 0" a syntactic check.

use std::collections::BTreeSet;
use std::sync::Arc;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

use crate::atom::{Atom, Monomial};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::poly::{self, Poly};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Expr {
    num: Poly,
    den: Poly,
}

impl Expr {
    pub fn zero() -> Self {
        Expr {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        Expr {
            num: Poly::one(),
            den: Poly::one(),
        }
    }

    pub fn constant(c: BigRational) -> Self {
        Expr {
            num: Poly::constant(c),
            den: Poly::one(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Expr::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn atom(a: Atom) -> Self {
        Expr {
            num: Poly::atom(a),
            den: Poly::one(),
        }
    }

    pub fn hole() -> Self {
        Expr::atom(Atom::Hole)
    }

    pub(crate) fn from_parts_unchecked(num: Poly, den: Poly) -> Self {
        Expr { num, den }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        if !self.den.is_one() {
            return None;
        }
        if self.num.is_zero() {
            return Some(BigRational::zero());
        }
        self.num.as_constant().cloned()
    }

    /// All atoms of numerator and denominator (not recursing into function
    /// arguments).
    pub fn top_atoms(&self) -> BTreeSet<Atom> {
        let mut s = self.num.atoms();
        s.extend(self.den.atoms());
        s
    }

    pub fn any_atom(&self, pred: impl Fn(&Atom) -> bool + Copy) -> bool {
        self.num.any_atom(pred) || self.den.any_atom(pred)
    }

    pub fn contains_atom(&self, a: &Atom) -> bool {
        self.num.contains_atom(a) || self.den.contains_atom(a)
    }
}

impl Context {
    // -- atom constructors ---------------------------------------------------

    pub fn x(&self) -> Expr {
        Expr::atom(Atom::X)
    }

    pub fn jet(&self, var: &str, order: u32) -> Result<Expr> {
        let v = self.dep(var)?;
        if order > self.max_jet_order() {
            return Err(Error::JetOrderOverflow {
                order,
                max: self.max_jet_order(),
            });
        }
        Ok(Expr::atom(Atom::Jet { var: v, order }))
    }

    pub fn param(&self, name: &str) -> Result<Expr> {
        match self.param_binding(name) {
            None => Err(Error::UnknownSymbol(name.to_string())),
            Some(None) => Ok(Expr::atom(Atom::param(name))),
            Some(Some(v)) => Ok(Expr::constant(v.clone())),
        }
    }

    pub fn surd_expr(&self) -> Result<Expr> {
        let def = self
            .surd_def()
            .ok_or_else(|| Error::UnknownSymbol("(no surd declared)".into()))?;
        Ok(Expr::atom(Atom::Surd(def.name.clone())))
    }

    /// Function application with the exponential collapse: when the symbol is
    /// exponential over a log symbol, integer multiples of logs in the
    /// argument become powers of the log arguments.
    pub fn func(&self, name: &str, arg: &Expr) -> Result<Expr> {
        let def = self
            .func_def(name)
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
        if let Some(ln_name) = def.exp_of.clone() {
            if arg.den.is_one() {
                let mut product = Expr::one();
                let mut rest: Vec<(Monomial, BigRational)> = Vec::new();
                let mut collapsed = false;
                for (m, c) in arg.num.terms() {
                    let mut handled = false;
                    if let [(Atom::Func { name: n, arg: y }, 1)] = m.0.as_slice() {
                        if **n == *ln_name && c.is_integer() {
                            if let Some(k) = c.numer().to_i64() {
                                product = self.mul(&product, &self.pow(y, k)?)?;
                                handled = true;
                                collapsed = true;
                            }
                        }
                    }
                    if !handled {
                        rest.push((m.clone(), c.clone()));
                    }
                }
                if collapsed {
                    let rest_expr = Expr {
                        num: Poly::from_map(rest.into_iter().collect()),
                        den: Poly::one(),
                    };
                    let tail = if rest_expr.is_zero() {
                        Expr::one()
                    } else {
                        Expr::atom(Atom::Func {
                            name: def.name.clone(),
                            arg: Arc::new(rest_expr),
                        })
                    };
                    return self.mul(&product, &tail);
                }
            }
            if arg.is_zero() {
                return Ok(Expr::one());
            }
        }
        Ok(Expr::atom(Atom::Func {
            name: def.name.clone(),
            arg: Arc::new(arg.clone()),
        }))
    }

    // -- arithmetic ----------------------------------------------------------

    pub fn neg(&self, a: &Expr) -> Expr {
        Expr {
            num: a.num.neg(),
            den: a.den.clone(),
        }
    }

    pub fn add(&self, a: &Expr, b: &Expr) -> Expr {
        if a.is_zero() {
            return b.clone();
        }
        if b.is_zero() {
            return a.clone();
        }
        if a.den == b.den {
            let n = a.num.add(&b.num);
            return finish_reduced(n, a.den.clone());
        }
        let g = poly::gcd(&a.den, &b.den);
        if g.is_one() {
            let n = a.num.mul(&b.den).add(&b.num.mul(&a.den));
            return finish(n, a.den.mul(&b.den));
        }
        let ad = a.den.try_div_exact(&g).expect("gcd divides");
        let bd = b.den.try_div_exact(&g).expect("gcd divides");
        let n = a.num.mul(&bd).add(&b.num.mul(&ad));
        let e = poly::gcd(&n, &g);
        if e.is_one() || e.as_constant().is_some() {
            return finish(n, a.den.mul(&bd));
        }
        let n = n.try_div_exact(&e).expect("gcd divides");
        let gq = g.try_div_exact(&e).expect("gcd divides");
        finish(n, gq.mul(&ad).mul(&bd))
    }

    pub fn sub(&self, a: &Expr, b: &Expr) -> Expr {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Expr, b: &Expr) -> Result<Expr> {
        if a.is_zero() || b.is_zero() {
            return Ok(Expr::zero());
        }
        if a.is_one() {
            return Ok(b.clone());
        }
        if b.is_one() {
            return Ok(a.clone());
        }
        // If the two numerators share a constrained atom, their product can
        // exceed degree one and must pass through the relation rewriter.
        let shared_constrained = {
            let ca: Vec<Atom> = a
                .num
                .atoms()
                .into_iter()
                .filter(|at| self.is_constrained(at))
                .collect();
            !ca.is_empty() && ca.iter().any(|at| b.num.contains_atom(at))
        };
        if shared_constrained {
            return self.normalize(a.num.mul(&b.num), a.den.mul(&b.den));
        }
        let g1 = poly::gcd(&a.num, &b.den);
        let g2 = poly::gcd(&b.num, &a.den);
        let an = a.num.try_div_exact(&g1).expect("gcd divides");
        let bn = b.num.try_div_exact(&g2).expect("gcd divides");
        let ad = a.den.try_div_exact(&g2).expect("gcd divides");
        let bd = b.den.try_div_exact(&g1).expect("gcd divides");
        Ok(finish(an.mul(&bn), ad.mul(&bd)))
    }

    pub fn recip(&self, a: &Expr) -> Result<Expr> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        self.normalize(a.den.clone(), a.num.clone())
    }

    pub fn div(&self, a: &Expr, b: &Expr) -> Result<Expr> {
        self.mul(a, &self.recip(b)?)
    }

    pub fn pow(&self, a: &Expr, e: i64) -> Result<Expr> {
        if e == 0 {
            return Ok(Expr::one());
        }
        let base = if e < 0 { self.recip(a)? } else { a.clone() };
        let mut n = e.unsigned_abs();
        let mut acc = Expr::one();
        let mut b = base;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &b)?;
            }
            n >>= 1;
            if n > 0 {
                b = self.mul(&b, &b)?;
            }
        }
        Ok(acc)
    }

    /// Sum and product over iterators, for readability at call sites.
    pub fn sum<'a>(&self, items: impl IntoIterator<Item = &'a Expr>) -> Expr {
        let mut acc = Expr::zero();
        for e in items {
            acc = self.add(&acc, e);
        }
        acc
    }

    /// Rebuilds an expression through the full pipeline; idempotent on
    /// canonical inputs.
    pub fn canonicalize(&self, e: &Expr) -> Result<Expr> {
        self.normalize(e.num.clone(), e.den.clone())
    }

    /// The full canonicalization pipeline: rewrite powers of constrained
    /// atoms through their relations, clear constrained atoms out of the
    /// denominator by conjugation, reduce the fraction, and normalize the
    /// denominator to be monic.
    pub(crate) fn normalize(&self, num: Poly, den: Poly) -> Result<Expr> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (mut num, mut den) = (num, den);
        loop {
            if let Some((n2, extra_den)) = self.reduce_overflow(&num)? {
                num = n2;
                den = den.mul(&extra_den);
                continue;
            }
            if let Some((d2, extra_num)) = self.reduce_overflow(&den)? {
                den = d2;
                num = num.mul(&extra_num);
                continue;
            }
            match self.first_constrained(&den) {
                None => break,
                Some(alpha) => {
                    let conj = self.conjugate(&den, &alpha)?;
                    num = num.mul(&conj);
                    den = den.mul(&conj);
                    // Next iterations rewrite alpha^2 terms in both parts.
                }
            }
        }
        Ok(reduce_fraction(num, den))
    }

    /// Replaces one term carrying `atom^e` (e >= 2, atom constrained) using
    /// the atom's square rule; returns the new polynomial together with the
    /// denominator factor it acquired.
    fn reduce_overflow(&self, p: &Poly) -> Result<Option<(Poly, Poly)>> {
        let mut found: Option<(Monomial, BigRational, Atom, u32)> = None;
        'outer: for (m, c) in p.terms() {
            for (a, e) in &m.0 {
                if *e >= 2 && self.is_constrained(a) {
                    found = Some((m.clone(), c.clone(), a.clone(), *e));
                    break 'outer;
                }
            }
        }
        let (m, c, a, e) = match found {
            Some(f) => f,
            None => return Ok(None),
        };
        let rule = self.square_rule(&a)?;
        let rest = p.sub(&Poly::term(m.clone(), c.clone()));
        let lowered = m
            .without(&a)
            .mul(&Monomial::atom(a.clone()).pow(e - 2));
        let replaced = rule.num.mul_term(&lowered, &c);
        let new_p = rest.mul(&rule.den).add(&replaced);
        Ok(Some((new_p, rule.den.clone())))
    }

    fn first_constrained(&self, p: &Poly) -> Option<Atom> {
        for (m, _) in p.terms() {
            for (a, _) in &m.0 {
                if self.is_constrained(a) {
                    return Some(a.clone());
                }
            }
        }
        None
    }

    /// Conjugate factor eliminating `alpha` from `den` (degree <= 1 in
    /// alpha): with the relation written q*alpha^2 - p1*alpha - p0 = 0 and
    /// den = D0 + D1*alpha, the factor is (q*D0 + p1*D1) - q*D1*alpha.
    fn conjugate(&self, den: &Poly, alpha: &Atom) -> Result<Poly> {
        let rule = self.square_rule(alpha)?;
        let parts = rule.num.univar_in(alpha);
        let p0 = parts.first().cloned().unwrap_or_else(Poly::zero);
        let p1 = parts.get(1).cloned().unwrap_or_else(Poly::zero);
        let _ = p0;
        let q = rule.den.clone();
        let d = den.univar_in(alpha);
        let d0 = d.first().cloned().unwrap_or_else(Poly::zero);
        let d1 = d.get(1).cloned().unwrap_or_else(Poly::zero);
        debug_assert!(d.len() <= 2, "denominator not reduced in {alpha:?}");
        let x0 = q.mul(&d0).add(&p1.mul(&d1));
        let x1 = q.mul(&d1).neg();
        Ok(x0.add(&x1.mul(&Poly::atom(alpha.clone()))))
    }

    // -- structural queries --------------------------------------------------

    /// Highest jet order of `var` in `e`, looking through function arguments
    /// and the surd radicand.
    pub fn jet_order(&self, e: &Expr, var: &str) -> Option<u32> {
        let mut best: Option<u32> = None;
        self.visit_atoms(e, &mut |a| {
            if let Atom::Jet { var: v, order } = a {
                if &**v == var {
                    best = Some(best.map_or(*order, |b| b.max(*order)));
                }
            }
        });
        best
    }

    pub fn max_jet_order_any(&self, e: &Expr) -> Option<u32> {
        let mut best: Option<u32> = None;
        self.visit_atoms(e, &mut |a| {
            if let Atom::Jet { order, .. } = a {
                best = Some(best.map_or(*order, |b| b.max(*order)));
            }
        });
        best
    }

    pub fn contains_x(&self, e: &Expr) -> bool {
        let mut found = false;
        self.visit_atoms(e, &mut |a| {
            if matches!(a, Atom::X) {
                found = true;
            }
        });
        found
    }

    pub fn contains_jets_of(&self, e: &Expr, var: &str) -> bool {
        self.jet_order(e, var).is_some()
    }

    /// Dependent variables whose jets occur in `e` (through arguments and
    /// radicands).
    pub fn jet_vars(&self, e: &Expr) -> BTreeSet<Arc<str>> {
        let mut vars = BTreeSet::new();
        self.visit_atoms(e, &mut |a| {
            if let Atom::Jet { var, .. } = a {
                vars.insert(var.clone());
            }
        });
        vars
    }

    /// Walks every atom of `e`, recursing into function arguments and (once)
    /// into the surd radicand.
    pub fn visit_atoms(&self, e: &Expr, f: &mut impl FnMut(&Atom)) {
        let mut saw_surd = false;
        self.visit_inner(e, f, &mut saw_surd);
    }

    fn visit_inner(&self, e: &Expr, f: &mut impl FnMut(&Atom), saw_surd: &mut bool) {
        for p in [&e.num, &e.den] {
            for (m, _) in p.terms() {
                for (a, _) in &m.0 {
                    f(a);
                    match a {
                        Atom::Func { arg, .. } => self.visit_inner(arg, f, saw_surd),
                        Atom::Surd(_) if !*saw_surd => {
                            *saw_surd = true;
                            if let Some(s) = self.surd_def() {
                                self.visit_inner(&s.radicand, f, saw_surd);
                            }
                        }
                        _ => {}
                    }
                }
            }
        }
    }
}

/// Final fraction cleanup: full gcd reduction and monic denominator.
fn reduce_fraction(num: Poly, den: Poly) -> Expr {
    if num.is_zero() {
        return Expr::zero();
    }
    let g = poly::gcd(&num, &den);
    let (num, den) = if g.is_one() || g.as_constant().is_some() {
        (num, den)
    } else {
        (
            num.try_div_exact(&g).expect("gcd divides"),
            den.try_div_exact(&g).expect("gcd divides"),
        )
    };
    monicize(num, den)
}

/// Cheap path when the fraction is already known reduced.
fn finish_reduced(num: Poly, den: Poly) -> Expr {
    if num.is_zero() {
        return Expr::zero();
    }
    // A same-denominator sum can cancel against the denominator.
    reduce_fraction(num, den)
}

fn finish(num: Poly, den: Poly) -> Expr {
    if num.is_zero() {
        return Expr::zero();
    }
    monicize(num, den)
}

fn monicize(num: Poly, den: Poly) -> Expr {
    let lc = den.leading().expect("nonzero denominator").1.clone();
    if lc.is_one() {
        return Expr { num, den };
    }
    let inv = BigRational::one() / lc;
    Expr {
        num: num.mul_scalar(&inv),
        den: den.mul_scalar(&inv),
    }
}

#[allow(unused)]
fn is_negative(q: &BigRational) -> bool {
    q.is_negative()
}

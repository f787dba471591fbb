//! Sparse multivariate polynomials over exact rationals.
//!
//! Terms are kept sorted by the monomial order of [`crate::atom`]; all
//! coefficients are nonzero `BigRational`s. Fraction reduction in the
//! expression layer rests on the primitive-PRS gcd implemented here.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::collections::BTreeSet;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};

use crate::atom::{Atom, Monomial};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Poly {
    /// Sorted by monomial, ascending; the last term is the leading term.
    terms: Vec<(Monomial, BigRational)>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: vec![(Monomial::one(), c)],
        }
    }

    pub fn from_int(n: i64) -> Self {
        Poly::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn atom(a: Atom) -> Self {
        Poly {
            terms: vec![(Monomial::atom(a), BigRational::one())],
        }
    }

    pub fn term(m: Monomial, c: BigRational) -> Self {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: vec![(m, c)] }
    }

    pub(crate) fn from_sorted(terms: Vec<(Monomial, BigRational)>) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(terms.iter().all(|(_, c)| !c.is_zero()));
        Poly { terms }
    }

    pub fn from_map(map: BTreeMap<Monomial, BigRational>) -> Self {
        Poly {
            terms: map.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    pub fn as_constant(&self) -> Option<&BigRational> {
        match self.terms.as_slice() {
            [] => None, // zero handled by caller via is_zero
            [(m, c)] if m.is_one() => Some(c),
            _ => None,
        }
    }

    pub fn terms(&self) -> &[(Monomial, BigRational)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading(&self) -> Option<&(Monomial, BigRational)> {
        self.terms.last()
    }

    pub fn degree_in(&self, a: &Atom) -> u32 {
        self.terms
            .iter()
            .map(|(m, _)| m.degree_in(a))
            .max()
            .unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        for (m, _) in &self.terms {
            for (a, _) in &m.0 {
                out.insert(a.clone());
            }
        }
        out
    }

    pub fn contains_atom(&self, a: &Atom) -> bool {
        self.terms.iter().any(|(m, _)| m.degree_in(a) > 0)
    }

    pub fn any_atom(&self, pred: impl Fn(&Atom) -> bool) -> bool {
        self.terms
            .iter()
            .any(|(m, _)| m.0.iter().any(|(a, _)| pred(a)))
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            match self.terms[i].0.cmp(&other.terms[j].0) {
                Ordering::Less => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.terms[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = &self.terms[i].1 + &other.terms[j].1;
                    if !c.is_zero() {
                        out.push((self.terms[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&other.terms[j..]);
        Poly { terms: out }
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul_scalar(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul_term(&self, m: &Monomial, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(n, k)| (n.mul(m), k * c))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if self.terms.len() == 1 {
            let (m, c) = &self.terms[0];
            return other.mul_term(m, c);
        }
        if other.terms.len() == 1 {
            let (m, c) = &other.terms[0];
            return self.mul_term(m, c);
        }
        let (small, large) = if self.terms.len() <= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut acc: BTreeMap<Monomial, BigRational> = BTreeMap::new();
        for (m, c) in &small.terms {
            for (n, k) in &large.terms {
                let key = m.mul(n);
                let val = c * k;
                match acc.entry(key) {
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(val);
                    }
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        *e.get_mut() += val;
                        if e.get().is_zero() {
                            e.remove();
                        }
                    }
                }
            }
        }
        Poly {
            terms: acc.into_iter().collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Power-rule partial derivative with respect to one atom; no chain rule.
    pub fn diff_atom(&self, a: &Atom) -> Poly {
        let mut out: Vec<(Monomial, BigRational)> = Vec::new();
        for (m, c) in &self.terms {
            let e = m.degree_in(a);
            if e == 0 {
                continue;
            }
            let mut reduced = m.without(a);
            if e > 1 {
                reduced = reduced.mul(&Monomial::atom(a.clone()).pow(e - 1));
            }
            out.push((reduced, c * BigRational::from_integer(BigInt::from(e))));
        }
        out.sort_by(|x, y| x.0.cmp(&y.0));
        // Same atom stripped from distinct monomials can collide.
        let mut merged: Vec<(Monomial, BigRational)> = Vec::with_capacity(out.len());
        for (m, c) in out {
            match merged.last_mut() {
                Some((lm, lc)) if *lm == m => {
                    *lc += c;
                    if lc.is_zero() {
                        merged.pop();
                    }
                }
                _ => merged.push((m, c)),
            }
        }
        Poly { terms: merged }
    }

    /// Coefficients of this polynomial viewed as univariate in `a`, dense
    /// from degree 0 upward.
    pub fn univar_in(&self, a: &Atom) -> Vec<Poly> {
        let d = self.degree_in(a) as usize;
        let mut out = vec![Poly::zero(); d + 1];
        for (m, c) in &self.terms {
            let e = m.degree_in(a) as usize;
            let rest = m.without(a);
            out[e] = out[e].add(&Poly::term(rest, c.clone()));
        }
        out
    }

    pub fn from_univar(coeffs: Vec<Poly>, a: &Atom) -> Poly {
        let mut acc = Poly::zero();
        for (e, c) in coeffs.into_iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let m = Monomial::atom(a.clone()).pow(e as u32);
            acc = acc.add(&c.mul_term(&m, &BigRational::one()));
        }
        acc
    }

    /// Greatest common monomial factor of all terms.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.iter();
        let mut acc = match it.next() {
            Some((m, _)) => m.clone(),
            None => return Monomial::one(),
        };
        for (m, _) in it {
            if acc.is_one() {
                break;
            }
            acc = acc.gcd(m);
        }
        acc
    }

    pub fn div_monomial(&self, m: &Monomial) -> Poly {
        if m.is_one() {
            return self.clone();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(n, c)| (n.try_div(m).expect("monomial divides"), c.clone()))
                .collect(),
        }
    }

    /// Exact multivariate division; `None` when `d` does not divide `self`.
    pub fn try_div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if let Some(c) = d.as_constant() {
            return Some(self.mul_scalar(&(BigRational::one() / c)));
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let (dm, dc) = d.leading().unwrap();
        let mut rem = self.clone();
        let mut q: Vec<(Monomial, BigRational)> = Vec::new();
        while let Some((rm, rc)) = rem.leading() {
            let qm = rm.try_div(dm)?;
            let qc = rc / dc;
            q.push((qm.clone(), qc.clone()));
            rem = rem.sub(&d.mul_term(&qm, &qc));
        }
        q.reverse();
        // Quotient terms were produced with strictly decreasing leading
        // monomials, so the reversed list is sorted.
        Some(Poly::from_sorted(q))
    }

    /// Multiply by the lcm of coefficient denominators and divide by integer
    /// content; leading coefficient made positive. Zero maps to zero.
    pub fn int_primitive(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut den_lcm = BigInt::one();
        for (_, c) in &self.terms {
            den_lcm = den_lcm.lcm(c.denom());
        }
        let mut nums: Vec<BigInt> = self
            .terms
            .iter()
            .map(|(_, c)| c.numer() * (&den_lcm / c.denom()))
            .collect();
        let mut content = BigInt::zero();
        for n in &nums {
            content = content.gcd(n);
            if content.is_one() {
                break;
            }
        }
        if nums.last().map(|n| n.is_negative()).unwrap_or(false) {
            content = -content;
        }
        for n in &mut nums {
            *n = &*n / &content;
        }
        Poly {
            terms: self
                .terms
                .iter()
                .zip(nums)
                .map(|((m, _), n)| (m.clone(), BigRational::from_integer(n)))
                .collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// gcd
// ---------------------------------------------------------------------------

/// Primitive gcd of two polynomials over Q, treating every atom as a free
/// variable. The result is integer-primitive with positive leading
/// coefficient (constants collapse to 1).
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.int_primitive();
    }
    if b.is_zero() {
        return a.int_primitive();
    }
    let a = a.int_primitive();
    let b = b.int_primitive();
    if a == b {
        return a;
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let mg = ma.gcd(&mb);
    let a = a.div_monomial(&ma);
    let b = b.div_monomial(&mb);
    let stripped = gcd_primitive_parts(&a, &b);
    stripped.mul_term(&mg, &BigRational::one())
}

fn gcd_primitive_parts(a: &Poly, b: &Poly) -> Poly {
    if a.as_constant().is_some() || b.as_constant().is_some() {
        return Poly::one();
    }
    if a == b {
        return a.clone();
    }
    // Cheap exact-division probes cover the dominant fraction-reduction case.
    if a.total_degree() >= b.total_degree() && a.try_div_exact(b).is_some() {
        return b.clone();
    }
    if b.total_degree() > a.total_degree() && b.try_div_exact(a).is_some() {
        return a.clone();
    }
    let atoms_a = a.atoms();
    let atoms_b = b.atoms();
    let common: Vec<&Atom> = atoms_a.intersection(&atoms_b).collect();
    if common.is_empty() {
        return Poly::one();
    }
    // Main variable: smallest combined degree keeps the PRS short.
    let v = common
        .iter()
        .min_by_key(|at| a.degree_in(at) + b.degree_in(at))
        .unwrap();
    let ca = a.univar_in(v);
    let cb = b.univar_in(v);
    let cont_a = gcd_list(&ca);
    let cont_b = gcd_list(&cb);
    let pp_a: Vec<Poly> = ca
        .iter()
        .map(|c| c.try_div_exact(&cont_a).expect("content divides"))
        .collect();
    let pp_b: Vec<Poly> = cb
        .iter()
        .map(|c| c.try_div_exact(&cont_b).expect("content divides"))
        .collect();
    let g_cont = gcd(&cont_a, &cont_b);
    let g_pp = prs_gcd(pp_a, pp_b, v);
    g_cont.mul(&g_pp).int_primitive()
}

fn gcd_list(polys: &[Poly]) -> Poly {
    let mut acc = Poly::zero();
    for p in polys {
        if p.is_zero() {
            continue;
        }
        acc = gcd(&acc, p);
        if acc.is_one() {
            break;
        }
    }
    if acc.is_zero() {
        Poly::one()
    } else {
        acc
    }
}

fn uv_degree(p: &[Poly]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

fn uv_trim(mut p: Vec<Poly>) -> Vec<Poly> {
    while p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
    p
}

/// Pseudo-remainder of `a` by `b` (both dense univariate with polynomial
/// coefficients, b nonzero of degree >= 1).
fn uv_prem(a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    let db = uv_degree(b).expect("b nonzero");
    let lb = &b[db];
    let mut r: Vec<Poly> = a.to_vec();
    loop {
        let dr = match uv_degree(&r) {
            Some(d) => d,
            None => return Vec::new(),
        };
        if dr < db {
            return uv_trim(r);
        }
        let lr = r[dr].clone();
        // r = lb*r - lr * x^(dr-db) * b
        for c in r.iter_mut() {
            *c = c.mul(lb);
        }
        for (i, bc) in b.iter().enumerate() {
            let idx = dr - db + i;
            r[idx] = r[idx].sub(&bc.mul(&lr));
        }
        debug_assert!(uv_degree(&r).map(|d| d < dr).unwrap_or(true));
    }
}

fn uv_primitive(p: Vec<Poly>) -> Vec<Poly> {
    let p = uv_trim(p);
    if p.is_empty() {
        return p;
    }
    let cont = gcd_list(&p);
    if cont.is_one() {
        return p;
    }
    p.iter()
        .map(|c| c.try_div_exact(&cont).expect("content divides"))
        .collect()
}

fn prs_gcd(a: Vec<Poly>, b: Vec<Poly>, v: &Atom) -> Poly {
    let (mut a, mut b) = if uv_degree(&a) >= uv_degree(&b) {
        (a, b)
    } else {
        (b, a)
    };
    loop {
        match uv_degree(&b) {
            None => return Poly::from_univar(uv_primitive(a), v),
            Some(0) => return Poly::one(),
            Some(_) => {
                let r = uv_prem(&a, &b);
                a = b;
                b = uv_primitive(r);
            }
        }
    }
}

/// Least common multiple, normalized like [`gcd`]; zero if either input is.
pub fn lcm(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() || b.is_zero() {
        return Poly::zero();
    }
    let g = gcd(a, b);
    let q = a.try_div_exact(&g).expect("gcd divides");
    q.mul(b).int_primitive()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(k: u32) -> Poly {
        Poly::atom(Atom::jet("u", k))
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn arithmetic_basics() {
        let p = u(1).mul(&u(1)).add(&u(0).mul(&u(2)));
        let m = p.sub(&p);
        assert!(m.is_zero());
        let sq = u(0).add(&Poly::one()).pow(2);
        assert_eq!(
            sq,
            u(0).mul(&u(0))
                .add(&u(0).mul_scalar(&q(2, 1)))
                .add(&Poly::one())
        );
    }

    #[test]
    fn exact_division() {
        let a = u(0).add(&u(1));
        let b = u(0).sub(&u(1));
        let prod = a.mul(&b);
        assert_eq!(prod.try_div_exact(&a).unwrap(), b);
        assert!(prod.add(&Poly::one()).try_div_exact(&a).is_none());
    }

    #[test]
    fn gcd_of_products() {
        let a = u(0).add(&u(1));
        let b = u(1).add(&Poly::one());
        let c = u(2).sub(&u(0));
        let p = a.mul(&b);
        let r = a.mul(&c);
        assert_eq!(gcd(&p, &r), a.int_primitive());
        // Coprime pair.
        assert!(gcd(&b, &c).is_one());
    }

    #[test]
    fn gcd_with_monomial_content() {
        let m = u(1).pow(3).mul(&u(2));
        let p = m.mul(&u(0).add(&Poly::one()));
        let r = u(1).pow(2).mul(&u(0).add(&Poly::one())).mul_scalar(&q(6, 1));
        let g = gcd(&p, &r);
        assert_eq!(
            g,
            u(1).pow(2).mul(&u(0).add(&Poly::one())).int_primitive()
        );
    }

    #[test]
    fn gcd_multivariate_dense() {
        // (u+u1)^2 (u2-3) and (u+u1)(u2-3)^2 share (u+u1)(u2-3).
        let s = u(0).add(&u(1));
        let t = u(2).sub(&Poly::from_int(3));
        let a = s.pow(2).mul(&t);
        let b = s.mul(&t.pow(2));
        assert_eq!(gcd(&a, &b), s.mul(&t).int_primitive());
    }

    #[test]
    fn int_primitive_normalizes_sign_and_content() {
        let p = u(0).mul_scalar(&q(-4, 6)).sub(&Poly::constant(q(2, 3)));
        let n = p.int_primitive();
        // -2/3 u - 2/3 -> u + 1 up to sign: content -2/3 gives u + 1.
        assert_eq!(n, u(0).add(&Poly::one()));
    }

    #[test]
    fn lcm_divides_product() {
        let a = u(0).mul(&u(1));
        let b = u(1).mul(&u(2));
        let l = lcm(&a, &b);
        assert_eq!(l, u(0).mul(&u(1)).mul(&u(2)));
    }
}

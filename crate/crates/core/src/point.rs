//! Exact randomized zero testing.
//!
//! Expressions are evaluated at jet points whose coordinates live in Q or in
//! a single quadratic extension Q(sqrt(r)); no floating point enters the
//! verdict path. Constrained symbols are sampled consistently with their
//! relations: surd radicands are forced to rational squares by backsolving a
//! jet coordinate, Weierstrass pairs with known roots anchor the base value
//! so that both the pair and any dependent quadratic root land in the same
//! extension, and generic pairs claim the extension for themselves.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::atom::Atom;
use crate::context::{Context, SamplerKind};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::poly::Poly;
use crate::subst::instantiate;

/// Element a + b*sqrt(r) of the point's quadratic extension; b = 0 when the
/// point is purely rational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadExt {
    pub a: BigRational,
    pub b: BigRational,
}

impl QuadExt {
    pub fn rat(a: BigRational) -> Self {
        QuadExt {
            a,
            b: BigRational::zero(),
        }
    }

    pub fn zero() -> Self {
        QuadExt::rat(BigRational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    fn add(&self, o: &QuadExt) -> QuadExt {
        QuadExt {
            a: &self.a + &o.a,
            b: &self.b + &o.b,
        }
    }

    fn mul(&self, o: &QuadExt, r: &BigRational) -> QuadExt {
        QuadExt {
            a: &self.a * &o.a + &self.b * &o.b * r,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }

    fn scale(&self, c: &BigRational) -> QuadExt {
        QuadExt {
            a: &self.a * c,
            b: &self.b * c,
        }
    }

    fn inverse(&self, r: &BigRational) -> Option<QuadExt> {
        // 1/(a + b√r) = (a - b√r)/(a² - b²r); the norm vanishes only at zero
        // when r is not a rational square.
        let norm = &self.a * &self.a - &self.b * &self.b * r;
        if norm.is_zero() {
            return None;
        }
        let inv = BigRational::one() / norm;
        Some(QuadExt {
            a: &self.a * &inv,
            b: -(&self.b * &inv),
        })
    }

    fn pow(&self, e: u32, r: &BigRational) -> QuadExt {
        let mut acc = QuadExt::rat(BigRational::one());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, r);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, r);
            }
        }
        acc
    }
}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        if self.a.is_zero() {
            return write!(f, "{}*sqrt(r)", self.b);
        }
        write!(f, "{} + {}*sqrt(r)", self.a, self.b)
    }
}

/// Exact rational square root, if one exists.
pub fn sqrt_rational(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    if q.is_zero() {
        return Some(BigRational::zero());
    }
    let ns = q.numer().sqrt();
    let ds = q.denom().sqrt();
    if &(&ns * &ns) == q.numer() && &(&ds * &ds) == q.denom() {
        Some(BigRational::new(ns, ds))
    } else {
        None
    }
}

/// A sampled point on the jet space, consistent with every declared
/// relation.
#[derive(Debug, Clone, PartialEq)]
pub struct JetPoint {
    pub values: BTreeMap<Atom, QuadExt>,
    /// The radicand of the extension, when one was claimed.
    pub radicand: Option<BigRational>,
}

impl fmt::Display for JetPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for (a, v) in &self.values {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{}={}", crate::display::atom_str(a), v)?;
        }
        if let Some(r) = &self.radicand {
            write!(f, "; r={r}")?;
        }
        write!(f, "}}")
    }
}

/// Outcome of a zero test.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    /// The canonical form is literally zero.
    ProvenZero,
    /// Every exact evaluation vanished.
    LikelyZero { trials: u32 },
    /// A point where the expression does not vanish.
    NonZero { witness: JetPoint, value: QuadExt },
}

impl Verdict {
    pub fn is_zero_like(&self) -> bool {
        !matches!(self, Verdict::NonZero { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::ProvenZero => "ProvenZero",
            Verdict::LikelyZero { .. } => "LikelyZero",
            Verdict::NonZero { .. } => "NonZero",
        }
    }
}

const POINT_RETRIES: u32 = 64;

struct PointBuilder<'c> {
    ctx: &'c Context,
    rng: ChaCha8Rng,
    values: BTreeMap<Atom, QuadExt>,
    radicand: Option<BigRational>,
    depth: u32,
}

/// Soft failure inside one draw; the caller rerolls the whole point.
enum Draw {
    Degenerate(&'static str),
    Hard(Error),
}

type DrawResult<T> = std::result::Result<T, Draw>;

impl From<Error> for Draw {
    fn from(e: Error) -> Self {
        Draw::Hard(e)
    }
}

impl<'c> PointBuilder<'c> {
    fn new(ctx: &'c Context, rng: ChaCha8Rng) -> Self {
        PointBuilder {
            ctx,
            rng,
            values: BTreeMap::new(),
            radicand: None,
            depth: 0,
        }
    }

    fn small_rational(&mut self) -> BigRational {
        // Small nonzero rationals keep relation denominators benign while
        // staying generic enough to separate distinct functions.
        let num = loop {
            let n: i64 = self.rng.gen_range(-6..=6);
            if n != 0 {
                break n;
            }
        };
        let den: i64 = self.rng.gen_range(1..=3);
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn r(&self) -> BigRational {
        self.radicand.clone().unwrap_or_else(BigRational::zero)
    }

    /// sqrt of a rational value inside the point's field, claiming the
    /// extension when allowed.
    fn sqrt_value(&mut self, d: &BigRational) -> DrawResult<QuadExt> {
        if let Some(s) = sqrt_rational(d) {
            return Ok(QuadExt::rat(s));
        }
        if let Some(r) = &self.radicand {
            let ratio = d / r;
            if let Some(s) = sqrt_rational(&ratio) {
                return Ok(QuadExt {
                    a: BigRational::zero(),
                    b: s,
                });
            }
            return Err(Draw::Degenerate("second extension needed"));
        }
        self.radicand = Some(d.clone());
        Ok(QuadExt {
            a: BigRational::zero(),
            b: BigRational::one(),
        })
    }

    fn eval(&mut self, e: &Expr) -> DrawResult<QuadExt> {
        let n = self.eval_poly(e.num())?;
        if e.den().is_one() {
            return Ok(n);
        }
        let d = self.eval_poly(e.den())?;
        let r = self.r();
        let inv = d
            .inverse(&r)
            .ok_or(Draw::Degenerate("zero denominator at point"))?;
        Ok(n.mul(&inv, &r))
    }

    fn eval_poly(&mut self, p: &Poly) -> DrawResult<QuadExt> {
        let r = self.r();
        let mut acc = QuadExt::zero();
        for (m, c) in p.terms() {
            let mut term = QuadExt::rat(c.clone());
            for (a, e) in &m.0 {
                let v = self.atom_value(a)?;
                // The extension may have been claimed while valuing the atom.
                let r = self.r();
                term = term.mul(&v.pow(*e, &r), &r);
            }
            let r2 = self.r();
            let _ = r;
            acc = acc.add(&term);
            let _ = r2;
        }
        Ok(acc)
    }

    fn atom_value(&mut self, a: &Atom) -> DrawResult<QuadExt> {
        if let Some(v) = self.values.get(a) {
            return Ok(v.clone());
        }
        self.depth += 1;
        if self.depth > 64 {
            return Err(Draw::Hard(Error::DegenerateSampling(
                "sampling recursion too deep".into(),
            )));
        }
        let v = self.atom_value_fresh(a)?;
        self.depth -= 1;
        self.values.insert(a.clone(), v.clone());
        Ok(v)
    }

    fn atom_value_fresh(&mut self, a: &Atom) -> DrawResult<QuadExt> {
        match a {
            Atom::X | Atom::Jet { .. } | Atom::Param(_) => {
                Ok(QuadExt::rat(self.small_rational()))
            }
            Atom::Hole => Err(Draw::Hard(Error::BadArgument(
                "rule template reached the oracle".into(),
            ))),
            Atom::Surd(_) => self.sample_surd(a),
            Atom::Func { name, arg } => {
                let def = self
                    .ctx
                    .func_def(name)
                    .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
                match def.sampler.clone() {
                    SamplerKind::Free => Ok(QuadExt::rat(self.small_rational())),
                    SamplerKind::WeierstrassBase { prime, g2, g3, roots } => {
                        self.sample_weierstrass(a, arg, &prime, &g2, &g3, roots.as_ref())?;
                        Ok(self.values.get(a).expect("assigned").clone())
                    }
                    SamplerKind::WeierstrassPrime { base } => {
                        let base_atom = Atom::Func {
                            name: base.clone(),
                            arg: arg.clone(),
                        };
                        // Valuing the base assigns the prime as well.
                        self.atom_value(&base_atom)?;
                        self.values
                            .get(a)
                            .cloned()
                            .ok_or(Draw::Degenerate("pair sampling incomplete"))
                    }
                    SamplerKind::QuadraticRoot { a: qa, b: qb, c: qc } => {
                        self.sample_quadratic_root(a, arg, &qa, &qb, &qc)
                    }
                }
            }
        }
    }

    /// s = sqrt(R): force R to a rational square by backsolving a jet when R
    /// is u_j or u_j^2 + E; otherwise take the square root in the field.
    fn sample_surd(&mut self, s: &Atom) -> DrawResult<QuadExt> {
        let def = self
            .ctx
            .surd_def()
            .ok_or_else(|| Error::UnknownSymbol(format!("{s:?}")))?;
        let radicand = def.radicand.clone();
        // Highest jet of the radicand, if it is still free.
        if radicand.den().is_one() {
            if let Some(top) = self.top_free_jet(radicand.num()) {
                let coeffs = radicand.num().univar_in(&top);
                // u_j alone: set u_j = t^2.
                if coeffs.len() == 2 && coeffs[0].is_zero() && coeffs[1].is_one() {
                    let t = self.small_rational();
                    self.values
                        .insert(top.clone(), QuadExt::rat(&t * &t));
                    return Ok(QuadExt::rat(t.abs()));
                }
                // u_j^2 + E with E free of u_j.
                if coeffs.len() == 3 && coeffs[1].is_zero() && coeffs[2].is_one() {
                    let e_expr =
                        Expr::from_parts_unchecked(coeffs[0].clone(), Poly::one());
                    let e_val = self.eval(&e_expr)?;
                    if !e_val.is_rational() {
                        return Err(Draw::Degenerate("irrational radicand offset"));
                    }
                    let e = e_val.a;
                    // u_j = (t^2 - e)/(2t) gives u_j^2 + e = ((t^2 + e)/(2t))^2.
                    for _ in 0..8 {
                        let t = self.small_rational();
                        let two_t = &t + &t;
                        let t2 = &t * &t;
                        let uj = (&t2 - &e) / &two_t;
                        let sv = (&t2 + &e) / &two_t;
                        if uj.is_zero() || sv.is_zero() {
                            continue;
                        }
                        self.values.insert(top.clone(), QuadExt::rat(uj));
                        return Ok(QuadExt::rat(sv));
                    }
                    return Err(Draw::Degenerate("no usable backsolve draw"));
                }
            }
        }
        // General case: evaluate the radicand and take a square root.
        let v = self.eval(&radicand)?;
        if !v.is_rational() {
            return Err(Draw::Degenerate("radicand lands in the extension"));
        }
        if v.a.is_zero() {
            return Err(Draw::Degenerate("zero radicand at point"));
        }
        self.sqrt_value(&v.a)
    }

    /// The highest-order jet of `p` that has not been assigned a value yet.
    fn top_free_jet(&self, p: &Poly) -> Option<Atom> {
        let mut best: Option<(u32, Atom)> = None;
        for a in p.atoms() {
            if let Atom::Jet { order, .. } = &a {
                if self.values.contains_key(&a) {
                    continue;
                }
                if best.as_ref().map(|(o, _)| order > o).unwrap_or(true) {
                    best = Some((*order, a.clone()));
                }
            }
        }
        best.map(|(_, a)| a)
    }

    fn sample_weierstrass(
        &mut self,
        base_atom: &Atom,
        arg: &Arc<Expr>,
        prime: &Arc<str>,
        g2: &Expr,
        g3: &Expr,
        roots: Option<&[Expr; 3]>,
    ) -> DrawResult<()> {
        let g2v = self.eval_rational(g2)?;
        let g3v = self.eval_rational(g3)?;
        let prime_atom = Atom::Func {
            name: prime.clone(),
            arg: arg.clone(),
        };
        if let Some([e1, e2, e3]) = roots {
            // Anchor p - e1 to a square so that p' = 2t*sqrt((p-e2)(p-e3))
            // shares one extension with any dependent quadratic root.
            let e1 = self.eval_rational(e1)?;
            let e2 = self.eval_rational(e2)?;
            let e3 = self.eval_rational(e3)?;
            for _ in 0..8 {
                let t = self.small_rational();
                let p = &e1 + &t * &t;
                let rho = (&p - &e2) * (&p - &e3);
                if rho.is_zero() {
                    continue;
                }
                let sq = self.sqrt_value(&rho)?;
                let two_t = QuadExt::rat(&t + &t);
                let r = self.r();
                let q = two_t.mul(&sq, &r);
                self.values.insert(base_atom.clone(), QuadExt::rat(p));
                self.values.insert(prime_atom, q);
                return Ok(());
            }
            return Err(Draw::Degenerate("degenerate anchored draw"));
        }
        for _ in 0..8 {
            let w = self.small_rational();
            let w2 = &w * &w;
            let w3 = &w2 * &w;
            let r0 = BigRational::from_integer(BigInt::from(4)) * &w3 - &g2v * &w - &g3v;
            if r0.is_zero() {
                continue;
            }
            let q = self.sqrt_value(&r0)?;
            self.values.insert(base_atom.clone(), QuadExt::rat(w));
            self.values.insert(prime_atom, q);
            return Ok(());
        }
        Err(Draw::Degenerate("degenerate pair draw"))
    }

    fn sample_quadratic_root(
        &mut self,
        _atom: &Atom,
        arg: &Arc<Expr>,
        qa: &Expr,
        qb: &Expr,
        qc: &Expr,
    ) -> DrawResult<QuadExt> {
        let a = instantiate(self.ctx, qa, arg).map_err(Draw::Hard)?;
        let b = instantiate(self.ctx, qb, arg).map_err(Draw::Hard)?;
        let c = instantiate(self.ctx, qc, arg).map_err(Draw::Hard)?;
        let av = self.eval(&a)?;
        let bv = self.eval(&b)?;
        let cv = self.eval(&c)?;
        if av.is_zero() {
            return Err(Draw::Degenerate("degenerate quadratic relation"));
        }
        let r = self.r();
        let four_ac = av.mul(&cv, &r).scale(&BigRational::from_integer(BigInt::from(4)));
        let disc = bv.mul(&bv, &r).add(&four_ac.scale(&-BigRational::one()));
        if !disc.is_rational() {
            return Err(Draw::Degenerate("irrational discriminant"));
        }
        let y = self.sqrt_value(&disc.a)?;
        let r = self.r();
        let sign = if self.rng.gen_bool(0.5) {
            BigRational::one()
        } else {
            -BigRational::one()
        };
        let minus_b = bv.scale(&-BigRational::one());
        let num = minus_b.add(&y.scale(&sign));
        let two_a = av.scale(&BigRational::from_integer(BigInt::from(2)));
        let inv = two_a
            .inverse(&r)
            .ok_or(Draw::Degenerate("zero leading coefficient"))?;
        Ok(num.mul(&inv, &r))
    }

    fn eval_rational(&mut self, e: &Expr) -> DrawResult<BigRational> {
        let v = self.eval(e)?;
        if !v.is_rational() {
            return Err(Draw::Degenerate("expected a rational value"));
        }
        Ok(v.a)
    }

    fn snapshot(&self) -> JetPoint {
        JetPoint {
            values: self.values.clone(),
            radicand: self.radicand.clone(),
        }
    }
}

/// Evaluates `e` at a fresh point drawn from `rng`; reties degenerate draws.
fn eval_at_fresh_point(
    ctx: &Context,
    e: &Expr,
    rng: &mut ChaCha8Rng,
) -> Result<(JetPoint, QuadExt)> {
    let mut last = "exhausted retries";
    for _ in 0..POINT_RETRIES {
        let seed = rng.gen::<u64>();
        let mut builder = PointBuilder::new(ctx, ChaCha8Rng::seed_from_u64(seed));
        // Constrained atoms first, in a fixed order: surds (which consume jet
        // choices), then function relations.
        let mut pre: Result<()> = Ok(());
        let mut constrained: Vec<Atom> = Vec::new();
        ctx.visit_atoms(e, &mut |a| {
            if ctx.is_constrained(a) || matches!(a, Atom::Surd(_)) {
                constrained.push(a.clone());
            }
        });
        constrained.sort_by_key(|a| match a {
            Atom::Surd(_) => 0u8,
            _ => 1,
        });
        constrained.dedup();
        let mut degenerate = false;
        for a in &constrained {
            match builder.atom_value(a) {
                Ok(_) => {}
                Err(Draw::Degenerate(msg)) => {
                    last = msg;
                    degenerate = true;
                    break;
                }
                Err(Draw::Hard(err)) => {
                    pre = Err(err);
                    break;
                }
            }
        }
        pre?;
        if degenerate {
            continue;
        }
        match builder.eval(e) {
            Ok(v) => return Ok((builder.snapshot(), v)),
            Err(Draw::Degenerate(msg)) => {
                last = msg;
                continue;
            }
            Err(Draw::Hard(err)) => return Err(err),
        }
    }
    Err(Error::DegenerateSampling(last.to_string()))
}

/// Probabilistic zero oracle: canonical zero is proven; otherwise `trials`
/// independent exact evaluations either produce a nonzero witness or report
/// the expression as likely zero.
pub fn zero_test(ctx: &Context, e: &Expr, trials: u32, seed: u64) -> Result<Verdict> {
    if trials == 0 {
        return Err(Error::BadArgument("trials must be at least 1".into()));
    }
    if e.is_zero() {
        return Ok(Verdict::ProvenZero);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let (point, value) = eval_at_fresh_point(ctx, e, &mut rng)?;
        if !value.is_zero() {
            return Ok(Verdict::NonZero {
                witness: point,
                value,
            });
        }
    }
    Ok(Verdict::LikelyZero { trials })
}

/// Evaluate at one seeded point (used by property tests needing pointwise
/// checks rather than verdicts).
pub fn eval_at_point(ctx: &Context, e: &Expr, seed: u64) -> Result<(JetPoint, QuadExt)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    eval_at_fresh_point(ctx, e, &mut rng)
}

/// Evaluate several expressions at one shared point.
pub fn eval_many_at_point(
    ctx: &Context,
    exprs: &[&Expr],
    seed: u64,
) -> Result<(JetPoint, Vec<QuadExt>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last = "exhausted retries";
    'outer: for _ in 0..POINT_RETRIES {
        let draw_seed = rng.gen::<u64>();
        let mut builder = PointBuilder::new(ctx, ChaCha8Rng::seed_from_u64(draw_seed));
        let mut out = Vec::with_capacity(exprs.len());
        for e in exprs {
            let mut constrained: Vec<Atom> = Vec::new();
            ctx.visit_atoms(e, &mut |a| {
                if ctx.is_constrained(a) || matches!(a, Atom::Surd(_)) {
                    constrained.push(a.clone());
                }
            });
            constrained.sort_by_key(|a| match a {
                Atom::Surd(_) => 0u8,
                _ => 1,
            });
            for a in &constrained {
                match builder.atom_value(a) {
                    Ok(_) => {}
                    Err(Draw::Degenerate(msg)) => {
                        last = msg;
                        continue 'outer;
                    }
                    Err(Draw::Hard(err)) => return Err(err),
                }
            }
        }
        for e in exprs {
            match builder.eval(e) {
                Ok(v) => out.push(v),
                Err(Draw::Degenerate(msg)) => {
                    last = msg;
                    continue 'outer;
                }
                Err(Draw::Hard(err)) => return Err(err),
            }
        }
        return Ok((builder.snapshot(), out));
    }
    Err(Error::DegenerateSampling(last.to_string()))
}

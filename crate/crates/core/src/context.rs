//! Session symbol table.
//!
//! A [`Context`] fixes the dependent variables, parameters, function symbols
//! (with their derivative rules and algebraic relations) and the optional
//! adjoined surd. It is frozen once built: every kernel operation takes
//! `&Context` and all values are immutable, so sessions can be shared across
//! threads freely.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};

use crate::atom::Atom;
use crate::error::{Error, Result};
use crate::expr::Expr;

/// Oracle and cutoff settings shared by a verification session.
#[derive(Debug, Clone)]
pub struct SessionOpts {
    pub max_jet_order: u32,
    pub trials: u32,
    pub seed: u64,
}

impl Default for SessionOpts {
    fn default() -> Self {
        SessionOpts {
            max_jet_order: 12,
            trials: 20,
            seed: 0,
        }
    }
}

/// How a function symbol differentiates with respect to its argument.
#[derive(Debug, Clone)]
pub enum DerivRule {
    /// Derivative is another declared symbol applied to the same argument.
    Chain(Arc<str>),
    /// Derivative is a closed-form template over the argument hole.
    Closed(Expr),
    /// End of a fresh chain; differentiating further is an error.
    Terminal,
}

/// Strategy used by the zero-test oracle to draw exact values consistent
/// with the symbol's relation.
#[derive(Debug, Clone)]
pub enum SamplerKind {
    Free,
    WeierstrassBase {
        prime: Arc<str>,
        g2: Expr,
        g3: Expr,
        roots: Option<[Expr; 3]>,
    },
    WeierstrassPrime {
        base: Arc<str>,
    },
    /// Root of a*f^2 + b*f + c = 0; templates over the argument hole.
    QuadraticRoot {
        a: Expr,
        b: Expr,
        c: Expr,
    },
}

#[derive(Debug, Clone)]
pub struct FuncDef {
    pub name: Arc<str>,
    pub deriv: DerivRule,
    /// Template for f(@)^2 when the symbol is algebraically constrained;
    /// must have degree <= 1 in f(@) itself.
    pub square: Option<Expr>,
    pub sampler: SamplerKind,
    /// Set on exponential-style symbols: integer multiples of this log
    /// symbol in the argument collapse to powers of the log's argument.
    pub exp_of: Option<Arc<str>>,
}

#[derive(Debug, Clone)]
pub struct SurdDef {
    pub name: Arc<str>,
    pub radicand: Expr,
}

#[derive(Debug, Clone)]
pub struct Context {
    deps: Vec<Arc<str>>,
    params: BTreeMap<Arc<str>, Option<BigRational>>,
    funcs: BTreeMap<Arc<str>, FuncDef>,
    surd: Option<SurdDef>,
    opts: SessionOpts,
}

impl Context {
    pub fn builder() -> ContextBuilder {
        ContextBuilder::default()
    }

    pub fn opts(&self) -> &SessionOpts {
        &self.opts
    }

    pub fn max_jet_order(&self) -> u32 {
        self.opts.max_jet_order
    }

    pub fn trials(&self) -> u32 {
        self.opts.trials
    }

    pub fn seed(&self) -> u64 {
        self.opts.seed
    }

    pub fn with_opts(mut self, opts: SessionOpts) -> Self {
        self.opts = opts;
        self
    }

    pub fn deps(&self) -> &[Arc<str>] {
        &self.deps
    }

    pub fn has_dep(&self, name: &str) -> bool {
        self.deps.iter().any(|d| &**d == name)
    }

    pub fn dep(&self, name: &str) -> Result<Arc<str>> {
        self.deps
            .iter()
            .find(|d| &***d == name)
            .cloned()
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    pub fn params(&self) -> impl Iterator<Item = (&Arc<str>, &Option<BigRational>)> {
        self.params.iter()
    }

    pub fn param_binding(&self, name: &str) -> Option<&Option<BigRational>> {
        self.params.get(name)
    }

    pub fn func_def(&self, name: &str) -> Option<&FuncDef> {
        self.funcs.get(name)
    }

    pub fn funcs(&self) -> impl Iterator<Item = &FuncDef> {
        self.funcs.values()
    }

    pub fn surd_def(&self) -> Option<&SurdDef> {
        self.surd.as_ref()
    }

    /// Whether an atom carries an algebraic relation used during
    /// canonicalization.
    pub fn is_constrained(&self, a: &Atom) -> bool {
        match a {
            Atom::Surd(_) => true,
            Atom::Func { name, .. } => self
                .funcs
                .get(name)
                .map(|d| d.square.is_some())
                .unwrap_or(false),
            _ => false,
        }
    }

    /// The square rewrite for a constrained atom, instantiated at its
    /// argument: atom^2 canonicalizes to the returned expression.
    pub fn square_rule(&self, a: &Atom) -> Result<Expr> {
        match a {
            Atom::Surd(name) => {
                let def = self
                    .surd
                    .as_ref()
                    .filter(|s| s.name == *name)
                    .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
                Ok(def.radicand.clone())
            }
            Atom::Func { name, arg } => {
                let def = self
                    .funcs
                    .get(name)
                    .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
                let t = def
                    .square
                    .clone()
                    .ok_or_else(|| Error::BadArgument(format!("`{name}` has no relation")))?;
                crate::subst::instantiate(self, &t, arg)
            }
            _ => Err(Error::BadArgument("atom carries no relation".into())),
        }
    }

    /// Template (over the argument hole) for the derivative of a function
    /// symbol with respect to its argument.
    pub fn func_derivative_template(&self, name: &str) -> Result<Expr> {
        let def = self
            .funcs
            .get(name)
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
        match &def.deriv {
            DerivRule::Chain(next) => self.func(next, &Expr::hole()),
            DerivRule::Closed(t) => Ok(t.clone()),
            DerivRule::Terminal => Err(Error::ChainDepthExceeded(name.to_string())),
        }
    }

    /// f'(arg) for a declared symbol f.
    pub fn func_derivative(&self, name: &str, arg: &Expr) -> Result<Expr> {
        let t = self.func_derivative_template(name)?;
        crate::subst::instantiate(self, &t, arg)
    }
}

// ---------------------------------------------------------------------------
// builder
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum Decl {
    FreeChain {
        name: String,
        depth: u32,
    },
    Closed {
        name: String,
        deriv: String,
    },
    ExpLn {
        exp: String,
        ln: String,
    },
    WeierstrassPair {
        p: String,
        q: String,
        g2: String,
        g3: String,
        scale: BigRational,
        roots: Option<[String; 3]>,
    },
    QuadraticRoot {
        name: String,
        a: String,
        b: String,
        c: String,
    },
    Surd {
        name: String,
        radicand: String,
    },
}

#[derive(Default)]
pub struct ContextBuilder {
    deps: Vec<String>,
    params: Vec<(String, Option<BigRational>)>,
    decls: Vec<Decl>,
    opts: Option<SessionOpts>,
}

impl ContextBuilder {
    pub fn dependent(mut self, name: &str) -> Self {
        self.deps.push(name.to_string());
        self
    }

    pub fn param(mut self, name: &str) -> Self {
        self.params.push((name.to_string(), None));
        self
    }

    pub fn param_value(mut self, name: &str, value: BigRational) -> Self {
        self.params.push((name.to_string(), Some(value)));
        self
    }

    /// Parameter bound from text; `"free"` keeps it symbolic.
    pub fn param_text(self, name: &str, text: &str) -> Result<Self> {
        if text.trim() == "free" {
            return Ok(self.param(name));
        }
        Ok(self.param_value(name, parse_rational(text)?))
    }

    pub fn free_chain(mut self, name: &str, depth: u32) -> Self {
        self.decls.push(Decl::FreeChain {
            name: name.to_string(),
            depth,
        });
        self
    }

    pub fn closed_fn(mut self, name: &str, deriv_template: &str) -> Self {
        self.decls.push(Decl::Closed {
            name: name.to_string(),
            deriv: deriv_template.to_string(),
        });
        self
    }

    pub fn tan(self, name: &str) -> Self {
        let d = format!("1 + {name}(@)^2");
        self.closed_fn(name, &d)
    }

    pub fn tanh(self, name: &str) -> Self {
        let d = format!("1 - {name}(@)^2");
        self.closed_fn(name, &d)
    }

    pub fn exp_ln(mut self, exp: &str, ln: &str) -> Self {
        self.decls.push(Decl::ExpLn {
            exp: exp.to_string(),
            ln: ln.to_string(),
        });
        self
    }

    /// Weierstrass-style constrained pair: p' = scale*q, q' = scale*(6p^2 -
    /// g2/2), q^2 = 4p^3 - g2*p - g3. `roots` supplies e1, e2, e3 when known,
    /// which lets the oracle sample inside a single quadratic extension.
    pub fn weierstrass_pair(
        mut self,
        p: &str,
        q: &str,
        g2: &str,
        g3: &str,
        scale: BigRational,
        roots: Option<[&str; 3]>,
    ) -> Self {
        self.decls.push(Decl::WeierstrassPair {
            p: p.to_string(),
            q: q.to_string(),
            g2: g2.to_string(),
            g3: g3.to_string(),
            scale,
            roots: roots.map(|r| [r[0].to_string(), r[1].to_string(), r[2].to_string()]),
        });
        self
    }

    /// Symbol defined as a root of a*f^2 + b*f + c = 0 (templates over the
    /// argument hole).
    pub fn quadratic_root(mut self, name: &str, a: &str, b: &str, c: &str) -> Self {
        self.decls.push(Decl::QuadraticRoot {
            name: name.to_string(),
            a: a.to_string(),
            b: b.to_string(),
            c: c.to_string(),
        });
        self
    }

    pub fn surd(mut self, name: &str, radicand: &str) -> Self {
        self.decls.push(Decl::Surd {
            name: name.to_string(),
            radicand: radicand.to_string(),
        });
        self
    }

    pub fn opts(mut self, opts: SessionOpts) -> Self {
        self.opts = Some(opts);
        self
    }

    pub fn build(self) -> Result<Context> {
        let mut cx = Context {
            deps: self.deps.iter().map(|d| Arc::from(d.as_str())).collect(),
            params: self
                .params
                .into_iter()
                .map(|(n, v)| (Arc::from(n.as_str()), v))
                .collect(),
            funcs: BTreeMap::new(),
            surd: None,
            opts: self.opts.unwrap_or_default(),
        };
        for decl in &self.decls {
            install(&mut cx, decl)?;
        }
        validate_relations(&cx)?;
        Ok(cx)
    }
}

fn stub(cx: &mut Context, name: &str) {
    let name: Arc<str> = Arc::from(name);
    cx.funcs.insert(
        name.clone(),
        FuncDef {
            name,
            deriv: DerivRule::Terminal,
            square: None,
            sampler: SamplerKind::Free,
        exp_of: None,
        },
    );
}

fn parse_tpl(cx: &Context, text: &str) -> Result<Expr> {
    crate::parse::parse_template(cx, text)
}

fn install(cx: &mut Context, decl: &Decl) -> Result<()> {
    match decl {
        Decl::FreeChain { name, depth } => {
            let names: Vec<String> = (0..=*depth)
                .map(|i| format!("{}{}", name, "'".repeat(i as usize)))
                .collect();
            for (i, n) in names.iter().enumerate() {
                stub(cx, n);
                let deriv = if i + 1 < names.len() {
                    DerivRule::Chain(Arc::from(names[i + 1].as_str()))
                } else {
                    DerivRule::Terminal
                };
                cx.funcs.get_mut(n.as_str()).unwrap().deriv = deriv;
            }
        }
        Decl::Closed { name, deriv } => {
            stub(cx, name);
            let t = parse_tpl(cx, deriv)?;
            cx.funcs.get_mut(name.as_str()).unwrap().deriv = DerivRule::Closed(t);
        }
        Decl::ExpLn { exp, ln } => {
            stub(cx, ln);
            stub(cx, exp);
            let dln = parse_tpl(cx, "1/@")?;
            let dexp = parse_tpl(cx, &format!("{exp}(@)"))?;
            {
                let f = cx.funcs.get_mut(ln.as_str()).unwrap();
                f.deriv = DerivRule::Closed(dln);
            }
            {
                let f = cx.funcs.get_mut(exp.as_str()).unwrap();
                f.deriv = DerivRule::Closed(dexp);
                f.exp_of = Some(Arc::from(ln.as_str()));
            }
        }
        Decl::WeierstrassPair {
            p,
            q,
            g2,
            g3,
            scale,
            roots,
        } => {
            stub(cx, p);
            stub(cx, q);
            let g2e = parse_tpl(cx, g2)?;
            let g3e = parse_tpl(cx, g3)?;
            let scale_e = Expr::constant(scale.clone());
            // p' = scale*q(@)
            let dp = cx.mul(&scale_e, &cx.func(q, &Expr::hole())?)?;
            // q' = scale*(6 p(@)^2 - g2/2)
            let p_at = cx.func(p, &Expr::hole())?;
            let six_p2 = cx.mul(&Expr::from_int(6), &cx.pow(&p_at, 2)?)?;
            let dq = cx.mul(
                &scale_e,
                &cx.sub(&six_p2, &cx.div(&g2e, &Expr::from_int(2))?),
            )?;
            // q(@)^2 = 4 p(@)^3 - g2 p(@) - g3
            let square = {
                let four_p3 = cx.mul(&Expr::from_int(4), &cx.pow(&p_at, 3)?)?;
                cx.sub(&cx.sub(&four_p3, &cx.mul(&g2e, &p_at)?), &g3e)
            };
            let roots_e = match roots {
                Some([a, b, c]) => Some([
                    parse_tpl(cx, a)?,
                    parse_tpl(cx, b)?,
                    parse_tpl(cx, c)?,
                ]),
                None => None,
            };
            {
                let f = cx.funcs.get_mut(p.as_str()).unwrap();
                f.deriv = DerivRule::Closed(dp);
                f.sampler = SamplerKind::WeierstrassBase {
                    prime: Arc::from(q.as_str()),
                    g2: g2e.clone(),
                    g3: g3e.clone(),
                    roots: roots_e,
                };
            }
            {
                let f = cx.funcs.get_mut(q.as_str()).unwrap();
                f.deriv = DerivRule::Closed(dq);
                f.square = Some(square);
                f.sampler = SamplerKind::WeierstrassPrime {
                    base: Arc::from(p.as_str()),
                };
            }
        }
        Decl::QuadraticRoot { name, a, b, c } => {
            stub(cx, name);
            let ae = parse_tpl(cx, a)?;
            let be = parse_tpl(cx, b)?;
            let ce = parse_tpl(cx, c)?;
            if ae.is_zero() {
                return Err(Error::InconsistentRelations(format!(
                    "leading coefficient of the `{name}` relation is zero"
                )));
            }
            let f_at = cx.func(name, &Expr::hole())?;
            // f^2 = -(b f + c)/a
            let square = cx.div(
                &cx.neg(&cx.add(&cx.mul(&be, &f_at)?, &ce)),
                &ae,
            )?;
            cx.funcs.get_mut(name.as_str()).unwrap().square = Some(square);
            // Implicit differentiation: f' = -(a' f^2 + b' f + c')/(2 a f + b).
            let da = crate::derive::diff(cx, &ae, &Atom::Hole)?;
            let db = crate::derive::diff(cx, &be, &Atom::Hole)?;
            let dc = crate::derive::diff(cx, &ce, &Atom::Hole)?;
            let f2 = cx.pow(&f_at, 2)?;
            let numer = cx.add(
                &cx.add(&cx.mul(&da, &f2)?, &cx.mul(&db, &f_at)?),
                &dc,
            );
            let denom = cx.add(
                &cx.mul(&cx.mul(&Expr::from_int(2), &ae)?, &f_at)?,
                &be,
            );
            let deriv = cx.div(&cx.neg(&numer), &denom)?;
            {
                let f = cx.funcs.get_mut(name.as_str()).unwrap();
                f.deriv = DerivRule::Closed(deriv);
                f.sampler = SamplerKind::QuadraticRoot {
                    a: ae,
                    b: be,
                    c: ce,
                };
            }
        }
        Decl::Surd { name, radicand } => {
            if cx.surd.is_some() {
                return Err(Error::UnsupportedExtension(
                    "at most one surd per session".into(),
                ));
            }
            let r = parse_tpl(cx, radicand)?;
            if r.any_atom(|a| matches!(a, Atom::Surd(_))) {
                return Err(Error::UnsupportedExtension(
                    "nested surds are not supported".into(),
                ));
            }
            if r.is_zero() {
                return Err(Error::UnsupportedExtension("zero radicand".into()));
            }
            cx.surd = Some(SurdDef {
                name: Arc::from(name.as_str()),
                radicand: r,
            });
        }
    }
    Ok(())
}

/// Differentiates every declared relation along a probe argument and checks
/// that it reduces to zero modulo itself.
fn validate_relations(cx: &Context) -> Result<()> {
    let probe = match cx.deps.first() {
        Some(d) => crate::expr::Expr::atom(Atom::jet(d.clone(), 0)),
        None => return Ok(()),
    };
    let names: Vec<Arc<str>> = cx
        .funcs
        .values()
        .filter(|f| f.square.is_some())
        .map(|f| f.name.clone())
        .collect();
    for name in names {
        let f_at = cx.func(&name, &probe)?;
        let fp = cx.func_derivative(&name, &probe)?;
        let sq = cx.square_rule(&Atom::Func {
            name: name.clone(),
            arg: Arc::new(probe.clone()),
        })?;
        // D(f^2 - sq) along x: 2 f f' u1 - D(sq).
        let u1 = crate::derive::total_derivative(cx, &probe)?;
        let lhs = cx.mul(&cx.mul(&Expr::from_int(2), &f_at)?, &cx.mul(&fp, &u1)?)?;
        let rhs = crate::derive::total_derivative(cx, &sq)?;
        if !cx.sub(&lhs, &rhs).is_zero() {
            return Err(Error::InconsistentRelations(format!(
                "relation for `{name}` is inconsistent with its derivative rule"
            )));
        }
    }
    if let Some(s) = &cx.surd {
        // Same check for the surd: D(radicand) = 2 s Ds holds by the Ds rule,
        // so only well-formedness of the radicand matters here.
        let _ = crate::derive::total_derivative(cx, &s.radicand)?;
    }
    Ok(())
}

/// Parses `p`, `-p`, or `p/q` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let err = || Error::BadArgument(format!("`{t}` is not a rational number"));
    let (num_s, den_s) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num_s.parse().map_err(|_| err())?;
    let den: BigInt = den_s.parse().map_err(|_| err())?;
    if den.is_zero() {
        return Err(err());
    }
    Ok(BigRational::new(num, den))
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl std::fmt::Debug for ContextBuilder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ContextBuilder")
            .field("deps", &self.deps)
            .finish_non_exhaustive()
    }
}

#[allow(unused)]
fn one() -> BigRational {
    BigRational::one()
}

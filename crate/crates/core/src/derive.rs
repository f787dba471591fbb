//! Derivations on the jet space: partial derivatives, the total
//! x-derivative D, and the time derivative along an evolution equation.
//!
//! All three share the same Leibniz walk over the fraction; they differ only
//! in the rule applied to a single atom. Function symbols differentiate
//! through explicit occurrences of their argument by the chain rule, and the
//! surd s differentiates as Ds = D(radicand)/(2s).

use std::collections::HashMap;

use crate::atom::Atom;
use crate::context::Context;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::poly::Poly;

enum Mode {
    Partial(Atom),
    Total,
    /// Flow along u_t = F; `prolonged[k]` caches D^k F.
    Flow {
        var: std::sync::Arc<str>,
        prolonged: Vec<Expr>,
    },
}

struct Deriver<'c> {
    ctx: &'c Context,
    mode: Mode,
    cache: HashMap<Atom, Expr>,
}

impl<'c> Deriver<'c> {
    fn expr(&mut self, e: &Expr) -> Result<Expr> {
        let dn = self.poly(e.num())?;
        if e.den().is_one() {
            return Ok(dn);
        }
        let dd = self.poly(e.den())?;
        let den_e = Expr::from_parts_unchecked(e.den().clone(), Poly::one());
        if dd.is_zero() {
            return self.ctx.div(&dn, &den_e);
        }
        // (dn*den - num*dd)/den^2
        let num_e = Expr::from_parts_unchecked(e.num().clone(), Poly::one());
        let top = self
            .ctx
            .sub(&self.ctx.mul(&dn, &den_e)?, &self.ctx.mul(&num_e, &dd)?);
        self.ctx.div(&top, &self.ctx.pow(&den_e, 2)?)
    }

    fn poly(&mut self, p: &Poly) -> Result<Expr> {
        // Group by atom: d(p) = sum_a (dp/da) * d(a), with dp/da a plain
        // polynomial. This keeps the number of fraction operations at the
        // number of distinct atoms rather than the number of terms.
        let mut acc = Expr::zero();
        for a in p.atoms() {
            let da = self.atom(&a)?;
            if da.is_zero() {
                continue;
            }
            let pd = p.diff_atom(&a);
            if pd.is_zero() {
                continue;
            }
            let part = Expr::from_parts_unchecked(pd, Poly::one());
            acc = self.ctx.add(&acc, &self.ctx.mul(&part, &da)?);
        }
        Ok(acc)
    }

    fn atom(&mut self, a: &Atom) -> Result<Expr> {
        if let Some(hit) = self.cache.get(a) {
            return Ok(hit.clone());
        }
        let v = self.atom_uncached(a)?;
        self.cache.insert(a.clone(), v.clone());
        Ok(v)
    }

    fn atom_uncached(&mut self, a: &Atom) -> Result<Expr> {
        // Shared chain rule for function applications and the surd.
        match a {
            Atom::Func { name, arg } => {
                let name = name.clone();
                let arg = arg.clone();
                let darg = self.expr(&arg)?;
                if darg.is_zero() {
                    return Ok(Expr::zero());
                }
                let fp = self.ctx.func_derivative(&name, &arg)?;
                return self.ctx.mul(&fp, &darg);
            }
            Atom::Surd(_) => {
                let def = self
                    .ctx
                    .surd_def()
                    .ok_or_else(|| Error::UnknownSymbol(format!("{a:?}")))?;
                let radicand = def.radicand.clone();
                let dr = self.expr(&radicand)?;
                if dr.is_zero() {
                    return Ok(Expr::zero());
                }
                let s = Expr::atom(a.clone());
                let two_r = self.ctx.mul(&Expr::from_int(2), &radicand)?;
                return self.ctx.div(&self.ctx.mul(&dr, &s)?, &two_r);
            }
            _ => {}
        }
        match &self.mode {
            Mode::Partial(sym) => Ok(if a == sym { Expr::one() } else { Expr::zero() }),
            Mode::Total => match a {
                Atom::X => Ok(Expr::one()),
                Atom::Param(_) => Ok(Expr::zero()),
                Atom::Jet { var, order } => {
                    let (var, order) = (var.clone(), *order);
                    self.ctx.jet(&var, order + 1)
                }
                Atom::Hole => Err(Error::BadArgument(
                    "cannot apply the total derivative to a rule template".into(),
                )),
                _ => unreachable!(),
            },
            Mode::Flow { var, .. } => match a {
                Atom::X | Atom::Param(_) => Ok(Expr::zero()),
                Atom::Jet { var: v, order } => {
                    if v != var {
                        return Err(Error::BadArgument(format!(
                            "expression mentions jets of `{v}`, not the flow variable `{var}`"
                        )));
                    }
                    let order = *order as usize;
                    self.prolong_to(order)?;
                    match &self.mode {
                        Mode::Flow { prolonged, .. } => Ok(prolonged[order].clone()),
                        _ => unreachable!(),
                    }
                }
                Atom::Hole => Err(Error::BadArgument("cannot flow a rule template".into())),
                _ => unreachable!(),
            },
        }
    }

    fn prolong_to(&mut self, order: usize) -> Result<()> {
        let mut table = match &mut self.mode {
            Mode::Flow { prolonged, .. } => std::mem::take(prolonged),
            _ => unreachable!(),
        };
        let mut result = Ok(());
        while table.len() <= order {
            let last = table.last().expect("seeded with F");
            match total_derivative(self.ctx, last) {
                Ok(next) => table.push(next),
                Err(e) => {
                    result = Err(e);
                    break;
                }
            }
        }
        match &mut self.mode {
            Mode::Flow { prolonged, .. } => *prolonged = table,
            _ => unreachable!(),
        }
        result
    }
}

/// Partial derivative with respect to one named symbol or jet variable,
/// chaining through explicit occurrences inside function arguments.
pub fn diff(ctx: &Context, e: &Expr, sym: &Atom) -> Result<Expr> {
    match sym {
        Atom::Jet { var, .. } => {
            if !ctx.has_dep(var) {
                return Err(Error::UnknownSymbol(var.to_string()));
            }
        }
        Atom::Param(p) => {
            if ctx.param_binding(p).is_none() {
                return Err(Error::UnknownSymbol(p.to_string()));
            }
        }
        Atom::X | Atom::Hole => {}
        Atom::Func { .. } | Atom::Surd(_) => {
            return Err(Error::BadArgument(
                "partial derivatives are taken with respect to jets, parameters, or x".into(),
            ))
        }
    }
    let mut d = Deriver {
        ctx,
        mode: Mode::Partial(sym.clone()),
        cache: HashMap::new(),
    };
    d.expr(e)
}

/// The total x-derivative D.
pub fn total_derivative(ctx: &Context, e: &Expr) -> Result<Expr> {
    let mut d = Deriver {
        ctx,
        mode: Mode::Total,
        cache: HashMap::new(),
    };
    d.expr(e)
}

pub fn total_derivative_n(ctx: &Context, e: &Expr, n: u32) -> Result<Expr> {
    let mut out = e.clone();
    for _ in 0..n {
        out = total_derivative(ctx, &out)?;
    }
    Ok(out)
}

/// Time derivative of `e` along u_t = F: jets prolong as D_t u_k = D^k F.
pub fn dt_along(ctx: &Context, e: &Expr, var: &str, rhs: &Expr) -> Result<Expr> {
    let var = ctx.dep(var)?;
    let mut d = Deriver {
        ctx,
        mode: Mode::Flow {
            var,
            prolonged: vec![rhs.clone()],
        },
        cache: HashMap::new(),
    };
    d.expr(e)
}

//! Capture-free simultaneous substitution.

use std::collections::BTreeMap;
use std::collections::HashMap;

use crate::atom::Atom;
use crate::context::Context;
use crate::error::Result;
use crate::expr::Expr;
use crate::poly::Poly;

/// Replaces atoms by expressions, recursing into function arguments, then
/// canonicalizes. Keys are whole atoms: jet variables, parameters, x, the
/// surd, or specific function applications.
pub fn substitute(ctx: &Context, e: &Expr, bindings: &BTreeMap<Atom, Expr>) -> Result<Expr> {
    if bindings.is_empty() {
        return Ok(e.clone());
    }
    let mut pows: HashMap<(Atom, u32), Expr> = HashMap::new();
    let num = subst_poly(ctx, e.num(), bindings, &mut pows)?;
    if e.den().is_one() {
        return Ok(num);
    }
    let den = subst_poly(ctx, e.den(), bindings, &mut pows)?;
    ctx.div(&num, &den)
}

/// Whether an atom is touched by the substitution, directly or through its
/// argument.
fn affected(ctx: &Context, a: &Atom, bindings: &BTreeMap<Atom, Expr>) -> bool {
    if bindings.contains_key(a) {
        return true;
    }
    match a {
        Atom::Func { arg, .. } => {
            let mut hit = false;
            ctx.visit_atoms(arg, &mut |inner| {
                if bindings.contains_key(inner) {
                    hit = true;
                }
            });
            hit
        }
        _ => false,
    }
}

fn subst_poly(
    ctx: &Context,
    p: &Poly,
    bindings: &BTreeMap<Atom, Expr>,
    pows: &mut HashMap<(Atom, u32), Expr>,
) -> Result<Expr> {
    // Terms free of every bound atom pass through as one block.
    let mut untouched: Vec<(crate::atom::Monomial, num::BigRational)> = Vec::new();
    let mut acc = Expr::zero();
    for (m, c) in p.terms() {
        if m.0.iter().all(|(a, _)| !affected(ctx, a, bindings)) {
            untouched.push((m.clone(), c.clone()));
            continue;
        }
        let mut term = Expr::constant(c.clone());
        for (a, e) in &m.0 {
            let factor = if affected(ctx, a, bindings) {
                let key = (a.clone(), *e);
                if let Some(hit) = pows.get(&key) {
                    hit.clone()
                } else {
                    let replaced = subst_atom(ctx, a, bindings, pows)?;
                    let p = ctx.pow(&replaced, *e as i64)?;
                    pows.insert(key, p.clone());
                    p
                }
            } else {
                Expr::from_parts_unchecked(
                    Poly::term(
                        crate::atom::Monomial::atom(a.clone()).pow(*e),
                        num::BigRational::from_integer(1.into()),
                    ),
                    Poly::one(),
                )
            };
            term = ctx.mul(&term, &factor)?;
        }
        acc = ctx.add(&acc, &term);
    }
    if !untouched.is_empty() {
        untouched.sort_by(|x, y| x.0.cmp(&y.0));
        let block = Expr::from_parts_unchecked(
            Poly::from_map(untouched.into_iter().collect()),
            Poly::one(),
        );
        acc = ctx.add(&acc, &block);
    }
    Ok(acc)
}

fn subst_atom(
    ctx: &Context,
    a: &Atom,
    bindings: &BTreeMap<Atom, Expr>,
    pows: &mut HashMap<(Atom, u32), Expr>,
) -> Result<Expr> {
    if let Some(e) = bindings.get(a) {
        return Ok(e.clone());
    }
    match a {
        Atom::Func { name, arg } => {
            let mut inner_pows = HashMap::new();
            let num = subst_poly(ctx, arg.num(), bindings, &mut inner_pows)?;
            let new_arg = if arg.den().is_one() {
                num
            } else {
                let den = subst_poly(ctx, arg.den(), bindings, &mut inner_pows)?;
                ctx.div(&num, &den)?
            };
            let _ = pows;
            if new_arg == **arg {
                Ok(Expr::atom(a.clone()))
            } else {
                ctx.func(name, &new_arg)
            }
        }
        _ => Ok(Expr::atom(a.clone())),
    }
}

/// Fills the argument hole of a rule template.
pub fn instantiate(ctx: &Context, template: &Expr, arg: &Expr) -> Result<Expr> {
    let mut b = BTreeMap::new();
    b.insert(Atom::Hole, arg.clone());
    substitute(ctx, template, &b)
}

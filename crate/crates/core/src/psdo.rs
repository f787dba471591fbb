//! Formal pseudodifferential operators with D^{-1} terms, and formal
//! integration inside the differential ring.

use crate::atom::Atom;
use crate::context::Context;
use crate::derive::total_derivative;
use crate::diffalg::{euler_operator, DifferentialOperator};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::point::{zero_test, Verdict};
use crate::poly::Poly;

/// local + sum left_i * D^{-1} o inner_i.
#[derive(Debug, Clone)]
pub struct PseudoDiffOperator {
    pub local: DifferentialOperator,
    pub nonlocal: Vec<NonlocalTerm>,
}

#[derive(Debug, Clone)]
pub struct NonlocalTerm {
    pub left: Expr,
    pub inner: DifferentialOperator,
}

impl PseudoDiffOperator {
    pub fn local(op: DifferentialOperator) -> Self {
        PseudoDiffOperator {
            local: op,
            nonlocal: Vec::new(),
        }
    }
}

/// Euler test: an x-free expression is a total x-derivative exactly when its
/// variational derivative vanishes.
pub fn is_total_x_derivative(ctx: &Context, e: &Expr, var: &str) -> Result<Verdict> {
    let res = euler_operator(ctx, e, var)?;
    zero_test(ctx, &res, ctx.trials(), ctx.seed())
}

/// Formal antiderivative: returns Q with D(Q) = e, constant of integration
/// fixed to zero. Peels the highest jet (e must be affine in it), integrates
/// its coefficient with respect to the next-lower jet as a rational
/// function, subtracts D of the partial result, and recurses.
pub fn integrate_total(ctx: &Context, e: &Expr, var: &str) -> Result<Expr> {
    let var_arc = ctx.dep(var)?;
    let mut rest = e.clone();
    let mut acc = Expr::zero();
    loop {
        if rest.is_zero() {
            return Ok(acc);
        }
        let n = match ctx.jet_order(&rest, var) {
            None | Some(0) => {
                // No jets above order zero: integrable only when free of the
                // dependent variable entirely (then it is a polynomial in x).
                if ctx.contains_jets_of(&rest, var) {
                    return Err(Error::NotATotalDerivative);
                }
                let q = integrate_in_x(ctx, &rest)?;
                return Ok(ctx.add(&acc, &q));
            }
            Some(n) => n,
        };
        let top = Atom::jet(var_arc.clone(), n);
        if rest.den().contains_atom(&top) || rest.num().degree_in(&top) > 1 {
            return Err(Error::NotATotalDerivative);
        }
        let parts = rest.num().univar_in(&top);
        let c1 = parts.get(1).cloned().unwrap_or_else(Poly::zero);
        let coeff = ctx.div(
            &Expr::from_parts_unchecked(c1, Poly::one()),
            &Expr::from_parts_unchecked(rest.den().clone(), Poly::one()),
        )?;
        let below = Atom::jet(var_arc.clone(), n - 1);
        let partial = antiderivative_in(ctx, &coeff, &below)?;
        let dp = total_derivative(ctx, &partial)?;
        acc = ctx.add(&acc, &partial);
        rest = ctx.sub(&rest, &dp);
        if ctx.jet_order(&rest, var).map_or(false, |m| m >= n) {
            return Err(Error::NotATotalDerivative);
        }
    }
}

/// Antiderivative of a Laurent polynomial in `y` (denominator either free of
/// `y` or a pure power of `y` times a `y`-free factor); anything else needs
/// logarithms or partial fractions outside the rational class.
fn antiderivative_in(ctx: &Context, e: &Expr, y: &Atom) -> Result<Expr> {
    if e.is_zero() {
        return Ok(Expr::zero());
    }
    let den_parts = e.den().univar_in(y);
    let nonzero: Vec<usize> = den_parts
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.is_zero())
        .map(|(i, _)| i)
        .collect();
    let (m, den_rest) = match nonzero.as_slice() {
        [k] => (*k as i64, den_parts[*k].clone()),
        _ => {
            return Err(Error::IntegrandOutsideClass(format!(
                "denominator mixes `{}` with other factors",
                crate::display::atom_str(y)
            )))
        }
    };
    let den_rest_e = Expr::from_parts_unchecked(den_rest, Poly::one());
    let mut acc = Expr::zero();
    for (k, c) in e.num().univar_in(y).into_iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let exp = k as i64 - m;
        if exp == -1 {
            return Err(Error::IntegrandOutsideClass(format!(
                "a 1/{} term integrates to a logarithm",
                crate::display::atom_str(y)
            )));
        }
        let c_e = Expr::from_parts_unchecked(c, Poly::one());
        let y_pow = ctx.pow(&Expr::atom(y.clone()), exp + 1)?;
        let term = ctx.div(
            &ctx.mul(&c_e, &y_pow)?,
            &ctx.mul(&Expr::from_int(exp + 1), &den_rest_e)?,
        )?;
        acc = ctx.add(&acc, &term);
    }
    Ok(acc)
}

/// Antiderivative with respect to x of an expression free of all jets.
fn integrate_in_x(ctx: &Context, e: &Expr) -> Result<Expr> {
    antiderivative_in(ctx, e, &Atom::X)
}

/// Applies the operator: local part plus, for each nonlocal term,
/// left * D^{-1}(inner e). Each integrand must pass the Euler test.
pub fn apply_psdo(
    ctx: &Context,
    op: &PseudoDiffOperator,
    e: &Expr,
    var: &str,
) -> Result<Expr> {
    let mut acc = op.local.apply(ctx, e)?;
    for term in &op.nonlocal {
        let integrand = term.inner.apply(ctx, e)?;
        if let Verdict::NonZero { .. } = is_total_x_derivative(ctx, &integrand, var)? {
            return Err(Error::NotATotalDerivative);
        }
        let q = integrate_total(ctx, &integrand, var)?;
        acc = ctx.add(&acc, &ctx.mul(&term.left, &q)?);
    }
    Ok(acc)
}

//! Calculus on evolution equations: linearization, symmetry and
//! conserved-density residuals, the Euler operator, and an exact linear
//! ansatz solver for symmetry candidates.

use std::sync::Arc;

use crate::atom::Atom;
use crate::context::Context;
use crate::derive::{diff, dt_along, total_derivative};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::point::{zero_test, Verdict};

/// A scalar law u_t = F(x, u, u_1, ..., u_m).
#[derive(Debug, Clone)]
pub struct EvolutionEquation {
    var: Arc<str>,
    rhs: Expr,
    order: u32,
    x_dependent: bool,
}

impl EvolutionEquation {
    pub fn new(ctx: &Context, var: &str, rhs: Expr) -> Result<Self> {
        let var = ctx.dep(var)?;
        for v in ctx.jet_vars(&rhs) {
            if v != var {
                return Err(Error::BadArgument(format!(
                    "right-hand side mentions jets of `{v}`"
                )));
            }
        }
        let order = ctx.jet_order(&rhs, &var).unwrap_or(0);
        if order < 2 {
            return Err(Error::BadArgument(format!(
                "evolution order is {order}, expected at least 2"
            )));
        }
        let separant = diff(ctx, &rhs, &Atom::jet(var.clone(), order))?;
        if separant.is_zero() {
            return Err(Error::BadArgument("separant vanishes".into()));
        }
        let x_dependent = ctx.contains_x(&rhs);
        Ok(EvolutionEquation {
            var,
            rhs,
            order,
            x_dependent,
        })
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn rhs(&self) -> &Expr {
        &self.rhs
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_x_dependent(&self) -> bool {
        self.x_dependent
    }

    pub fn separant(&self, ctx: &Context) -> Result<Expr> {
        diff(ctx, &self.rhs, &Atom::jet(self.var.clone(), self.order))
    }

    /// Same law written in another dependent variable.
    pub fn renamed(&self, ctx: &Context, var: &str) -> Result<Self> {
        if &*self.var == var {
            return Ok(self.clone());
        }
        let mut bindings = std::collections::BTreeMap::new();
        for k in 0..=self.order {
            bindings.insert(
                Atom::jet(self.var.clone(), k),
                ctx.jet(var, k)?,
            );
        }
        let rhs = crate::subst::substitute(ctx, &self.rhs, &bindings)?;
        EvolutionEquation::new(ctx, var, rhs)
    }

    /// D_t e along this equation.
    pub fn dt(&self, ctx: &Context, e: &Expr) -> Result<Expr> {
        dt_along(ctx, e, &self.var, &self.rhs)
    }
}

/// A residual expression together with its oracle verdict.
#[derive(Debug, Clone)]
pub struct Residual {
    pub expr: Expr,
    pub verdict: Verdict,
}

impl Residual {
    pub fn of(ctx: &Context, expr: Expr) -> Result<Self> {
        let verdict = zero_test(ctx, &expr, ctx.trials(), ctx.seed())?;
        Ok(Residual { expr, verdict })
    }

    pub fn is_zero_like(&self) -> bool {
        self.verdict.is_zero_like()
    }
}

/// Finite sum of powers of the total derivative, sum c_i D^i.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferentialOperator {
    coeffs: Vec<Expr>,
}

impl DifferentialOperator {
    pub fn new(mut coeffs: Vec<Expr>) -> Self {
        while coeffs.last().map(Expr::is_zero).unwrap_or(false) {
            coeffs.pop();
        }
        DifferentialOperator { coeffs }
    }

    pub fn identity() -> Self {
        DifferentialOperator {
            coeffs: vec![Expr::one()],
        }
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    pub fn order(&self) -> Option<u32> {
        (!self.coeffs.is_empty()).then(|| self.coeffs.len() as u32 - 1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Applies the operator: sum c_i D^i e.
    pub fn apply(&self, ctx: &Context, e: &Expr) -> Result<Expr> {
        let mut acc = Expr::zero();
        let mut dk = e.clone();
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                dk = total_derivative(ctx, &dk)?;
            }
            if c.is_zero() {
                continue;
            }
            acc = ctx.add(&acc, &ctx.mul(c, &dk)?);
        }
        Ok(acc)
    }
}

/// Linearization (Fréchet derivative) with respect to `var`: coefficients
/// are the partials with respect to each jet.
pub fn frechet(ctx: &Context, e: &Expr, var: &str) -> Result<DifferentialOperator> {
    let var = ctx.dep(var)?;
    let order = ctx
        .jet_order(e, &var)
        .map(|n| n as usize)
        .map_or(0, |n| n + 1);
    let mut coeffs = Vec::with_capacity(order);
    for k in 0..order {
        coeffs.push(diff(ctx, e, &Atom::jet(var.clone(), k as u32))?);
    }
    Ok(DifferentialOperator::new(coeffs))
}

/// Residual of the symmetry condition D_t G = F_*(G) along the equation.
/// A zero verdict certifies G as a Lie-Bäcklund symmetry.
pub fn symmetry_residual(ctx: &Context, eq: &EvolutionEquation, g: &Expr) -> Result<Residual> {
    if !eq.is_x_dependent() && ctx.contains_x(g) {
        return Err(Error::BadArgument(
            "candidate depends on x but the equation does not".into(),
        ));
    }
    let dtg = eq.dt(ctx, g)?;
    let fstar = frechet(ctx, eq.rhs(), eq.var())?;
    let lin = fstar.apply(ctx, g)?;
    Residual::of(ctx, ctx.sub(&dtg, &lin))
}

/// Variational derivative sum_k (-D)^k d/du_k, with the chain rule applied
/// through function symbols of u.
pub fn euler_operator(ctx: &Context, e: &Expr, var: &str) -> Result<Expr> {
    let var = ctx.dep(var)?;
    let order = ctx.jet_order(e, &var).unwrap_or(0);
    let mut acc = Expr::zero();
    for k in 0..=order {
        let mut term = diff(ctx, e, &Atom::jet(var.clone(), k))?;
        for _ in 0..k {
            term = total_derivative(ctx, &term)?;
        }
        if k % 2 == 1 {
            term = ctx.neg(&term);
        }
        acc = ctx.add(&acc, &term);
    }
    Ok(acc)
}

/// Residual of the conservation condition: the Euler operator annihilates
/// D_t rho exactly when rho is a conserved density.
pub fn conserved_density_residual(
    ctx: &Context,
    eq: &EvolutionEquation,
    rho: &Expr,
) -> Result<Residual> {
    let dtr = eq.dt(ctx, rho)?;
    let res = euler_operator(ctx, &dtr, eq.var())?;
    Residual::of(ctx, res)
}

/// Exact solution space of the linear symmetry condition over a finite
/// basis: returns coefficient vectors c (as expressions in the free
/// parameters) with residual(sum c_i basis_i) identically zero.
pub fn solve_linear_ansatz(
    ctx: &Context,
    eq: &EvolutionEquation,
    basis: &[Expr],
) -> Result<Vec<Vec<Expr>>> {
    if basis.is_empty() {
        return Ok(Vec::new());
    }
    let mut residuals = Vec::with_capacity(basis.len());
    for b in basis {
        let dtb = eq.dt(ctx, b)?;
        let fstar = frechet(ctx, eq.rhs(), eq.var())?;
        let lin = fstar.apply(ctx, b)?;
        residuals.push(ctx.sub(&dtb, &lin));
    }
    // Clear denominators over a common multiple, then match coefficients of
    // every non-parameter monomial; entries live in Q(parameters).
    let mut den_lcm = crate::poly::Poly::one();
    for r in &residuals {
        den_lcm = crate::poly::lcm(&den_lcm, r.den());
    }
    let mut rows: std::collections::BTreeMap<crate::atom::Monomial, Vec<Expr>> =
        std::collections::BTreeMap::new();
    for (i, r) in residuals.iter().enumerate() {
        let scale = den_lcm.try_div_exact(r.den()).expect("lcm divides");
        let cleared = r.num().mul(&scale);
        for (m, c) in cleared.terms() {
            let mut param_part = crate::atom::Monomial::one();
            let mut rest = crate::atom::Monomial::one();
            for (a, e) in &m.0 {
                let piece = crate::atom::Monomial::atom(a.clone()).pow(*e);
                if matches!(a, Atom::Param(_)) {
                    param_part = param_part.mul(&piece);
                } else {
                    rest = rest.mul(&piece);
                }
            }
            let entry = rows
                .entry(rest)
                .or_insert_with(|| vec![Expr::zero(); basis.len()]);
            let coeff = Expr::from_parts_unchecked(
                crate::poly::Poly::term(param_part, c.clone()),
                crate::poly::Poly::one(),
            );
            entry[i] = ctx.add(&entry[i], &coeff);
        }
    }
    let matrix: Vec<Vec<Expr>> = rows.into_values().collect();
    kernel(ctx, matrix, basis.len())
}

/// Kernel of a matrix over the exact expression field via Gaussian
/// elimination.
fn kernel(ctx: &Context, mut rows: Vec<Vec<Expr>>, ncols: usize) -> Result<Vec<Vec<Expr>>> {
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut rank = 0usize;
    for col in 0..ncols {
        let pivot = (rank..rows.len()).find(|&r| !rows[r][col].is_zero());
        let Some(p) = pivot else { continue };
        rows.swap(rank, p);
        let inv = ctx.recip(&rows[rank][col])?;
        for c in col..ncols {
            rows[rank][c] = ctx.mul(&rows[rank][c], &inv)?;
        }
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let factor = rows[r][col].clone();
                for c in col..ncols {
                    let delta = ctx.mul(&factor, &rows[rank][c])?;
                    rows[r][c] = ctx.sub(&rows[r][c], &delta);
                }
            }
        }
        pivot_cols.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    let free_cols: Vec<usize> = (0..ncols).filter(|c| !pivot_cols.contains(c)).collect();
    let mut basis = Vec::with_capacity(free_cols.len());
    for &f in &free_cols {
        let mut v = vec![Expr::zero(); ncols];
        v[f] = Expr::one();
        for (r, &p) in pivot_cols.iter().enumerate() {
            v[p] = ctx.neg(&rows[r][f]);
        }
        basis.push(v);
    }
    Ok(basis)
}

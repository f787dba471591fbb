//! Verification of differential substitutions v = Phi(u, ..., u_n) between
//! evolution equations, point substitutions, and the invariance test for
//! implicit relations affine in one eliminable variable.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::atom::Atom;
use crate::context::Context;
use crate::derive::{diff, total_derivative};
use crate::diffalg::{frechet, EvolutionEquation, Residual};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::subst::substitute;

/// v = Phi(u, u_1, ..., u_n).
#[derive(Debug, Clone)]
pub struct Substitution {
    source_var: Arc<str>,
    target_var: Arc<str>,
    phi: Expr,
    order: u32,
}

impl Substitution {
    pub fn new(ctx: &Context, source_var: &str, target_var: &str, phi: Expr) -> Result<Self> {
        let sv = ctx.dep(source_var)?;
        let tv = ctx.dep(target_var)?;
        if ctx.contains_jets_of(&phi, &tv) {
            return Err(Error::BadArgument(
                "substitution body mentions the target variable".into(),
            ));
        }
        let order = ctx.jet_order(&phi, &sv).unwrap_or(0);
        let top = diff(ctx, &phi, &Atom::jet(sv.clone(), order))?;
        if top.is_zero() {
            return Err(Error::BadArgument(
                "substitution is degenerate in its top jet".into(),
            ));
        }
        Ok(Substitution {
            source_var: sv,
            target_var: tv,
            phi,
            order,
        })
    }

    pub fn source_var(&self) -> &str {
        &self.source_var
    }

    pub fn target_var(&self) -> &str {
        &self.target_var
    }

    pub fn phi(&self) -> &Expr {
        &self.phi
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// [Phi, D Phi, ..., D^m Phi]: the images of the target jets.
    pub fn prolonged_jets(&self, ctx: &Context, upto: u32) -> Result<Vec<Expr>> {
        let mut out = Vec::with_capacity(upto as usize + 1);
        out.push(self.phi.clone());
        for _ in 0..upto {
            let next = total_derivative(ctx, out.last().unwrap())?;
            out.push(next);
        }
        Ok(out)
    }
}

/// Residual of the statement "S maps solutions of `source` to solutions of
/// `target`": D_t Phi along the source minus the target's right side
/// evaluated on the prolonged jets.
pub fn pushforward_residual(
    ctx: &Context,
    s: &Substitution,
    source: &EvolutionEquation,
    target: &EvolutionEquation,
) -> Result<Residual> {
    if source.var() != s.source_var() {
        return Err(Error::BadArgument(format!(
            "substitution reads `{}`, source equation evolves `{}`",
            s.source_var(),
            source.var()
        )));
    }
    if target.var() != s.target_var() {
        return Err(Error::BadArgument(format!(
            "substitution writes `{}`, target equation evolves `{}`",
            s.target_var(),
            target.var()
        )));
    }
    let lhs = source.dt(ctx, s.phi())?;
    let jets = s.prolonged_jets(ctx, target.order())?;
    let mut bindings = BTreeMap::new();
    let tv = ctx.dep(s.target_var())?;
    for (k, img) in jets.iter().enumerate() {
        bindings.insert(Atom::jet(tv.clone(), k as u32), img.clone());
    }
    let rhs = substitute(ctx, target.rhs(), &bindings)?;
    Residual::of(ctx, ctx.sub(&lhs, &rhs))
}

/// Transforms an equation through an order-zero (point) substitution
/// v = phi(u), rewriting the result in the target jets. Fails with
/// `NotClosedForm` when the transformed right side still depends on the
/// source variable.
pub fn point_pushforward(
    ctx: &Context,
    s: &Substitution,
    source: &EvolutionEquation,
) -> Result<EvolutionEquation> {
    if s.order() != 0 {
        return Err(Error::BadArgument(
            "point pushforward needs an order-zero substitution".into(),
        ));
    }
    if source.var() != s.source_var() {
        return Err(Error::BadArgument(
            "substitution and source equation variables differ".into(),
        ));
    }
    let sv = ctx.dep(s.source_var())?;
    let tv = ctx.dep(s.target_var())?;
    let m = source.order();
    // Triangular solve of v_k = D^k phi for u_k, ascending.
    let jets = s.prolonged_jets(ctx, m)?;
    let mut bindings: BTreeMap<Atom, Expr> = BTreeMap::new();
    for k in 1..=m {
        let uk = Atom::jet(sv.clone(), k);
        let wk = &jets[k as usize];
        if wk.den().contains_atom(&uk) || wk.num().degree_in(&uk) > 1 {
            return Err(Error::NotClosedForm(format!(
                "prolonged jet of order {k} is not affine in the top source jet"
            )));
        }
        let a = diff(ctx, wk, &uk)?;
        if a.is_zero() {
            return Err(Error::BadArgument("degenerate point substitution".into()));
        }
        let b = ctx.sub(wk, &ctx.mul(&a, &Expr::atom(uk.clone()))?);
        // u_k = (v_k - B)/A, with lower solved jets substituted in.
        let raw = ctx.div(&ctx.sub(&ctx.jet(&tv, k)?, &b), &a)?;
        let solved = substitute(ctx, &raw, &bindings)?;
        bindings.insert(uk, solved);
    }
    // v_t = phi'(u) * F, pushed onto target jets.
    let phi_prime = diff(ctx, s.phi(), &Atom::jet(sv.clone(), 0))?;
    let vt = ctx.mul(&phi_prime, source.rhs())?;
    let mut h = substitute(ctx, &vt, &bindings)?;
    // Invert the map itself to clear remaining source dependence:
    // either phi is affine in a single function application of u, or it is
    // affine in bare u.
    let v0 = ctx.jet(&tv, 0)?;
    if let Some(inv) = invert_point_map(ctx, s.phi(), &sv, &v0)? {
        h = substitute(ctx, &h, &inv)?;
    }
    let leftover = leftover_source_atoms(ctx, &h, &sv);
    if !leftover.is_empty() {
        return Err(Error::NotClosedForm(format!(
            "residual dependence on {}",
            leftover.join(", ")
        )));
    }
    EvolutionEquation::new(ctx, &tv, h)
}

/// Inversion bindings for the order-zero map phi at value v0.
fn invert_point_map(
    ctx: &Context,
    phi: &Expr,
    sv: &Arc<str>,
    v0: &Expr,
) -> Result<Option<BTreeMap<Atom, Expr>>> {
    let u0 = Atom::jet(sv.clone(), 0);
    // Affine in one function application f(u): f(u) -> (v - B)/A.
    let func_atoms: Vec<Atom> = phi
        .top_atoms()
        .into_iter()
        .filter(|a| matches!(a, Atom::Func { .. }))
        .collect();
    if func_atoms.len() == 1 && phi.den().is_one() {
        let fa = &func_atoms[0];
        if phi.num().degree_in(fa) == 1 {
            let parts = phi.num().univar_in(fa);
            let b = Expr::from_parts_unchecked(parts[0].clone(), crate::poly::Poly::one());
            let a = Expr::from_parts_unchecked(parts[1].clone(), crate::poly::Poly::one());
            if !ctx.contains_jets_of(&a, sv) && !ctx.contains_jets_of(&b, sv) {
                let mut m = BTreeMap::new();
                m.insert(fa.clone(), ctx.div(&ctx.sub(v0, &b), &a)?);
                return Ok(Some(m));
            }
        }
    }
    // Affine in bare u with u-free coefficients: u -> (v - B)/A.
    if phi.den().is_one() && phi.num().degree_in(&u0) == 1 && func_atoms.is_empty() {
        let parts = phi.num().univar_in(&u0);
        let b = Expr::from_parts_unchecked(parts[0].clone(), crate::poly::Poly::one());
        let a = Expr::from_parts_unchecked(parts[1].clone(), crate::poly::Poly::one());
        if !ctx.contains_jets_of(&a, sv) && !ctx.contains_jets_of(&b, sv) {
            let mut m = BTreeMap::new();
            m.insert(u0, ctx.div(&ctx.sub(v0, &b), &a)?);
            return Ok(Some(m));
        }
    }
    Ok(None)
}

fn leftover_source_atoms(ctx: &Context, e: &Expr, sv: &Arc<str>) -> Vec<String> {
    let mut out = std::collections::BTreeSet::new();
    ctx.visit_atoms(e, &mut |a| match a {
        Atom::Jet { var, .. } if var == sv => {
            out.insert(crate::display::atom_str(a));
        }
        _ => {}
    });
    // Function applications whose argument mentions the source variable.
    for a in e.top_atoms() {
        if let Atom::Func { arg, .. } = &a {
            if ctx.contains_jets_of(arg, sv) {
                out.insert(crate::display::atom_str(&a));
            }
        }
    }
    out.into_iter().collect()
}

/// Phi(u, ...; v, ...) = 0, affine in one designated jet of the target
/// variable which is also its top target jet.
#[derive(Debug, Clone)]
pub struct ImplicitRelation {
    phi: Expr,
    designated: Atom,
}

impl ImplicitRelation {
    pub fn new(ctx: &Context, phi: Expr, designated: Atom) -> Result<Self> {
        let (var, order) = match &designated {
            Atom::Jet { var, order } => (var.clone(), *order),
            _ => {
                return Err(Error::NotAffine(
                    "designated symbol must be a jet variable".into(),
                ))
            }
        };
        ctx.dep(&var)?;
        let top = ctx.jet_order(&phi, &var).unwrap_or(0);
        if top > order {
            return Err(Error::NotAffine(format!(
                "relation contains jets of `{var}` above the designated order {order}"
            )));
        }
        if phi.num().degree_in(&designated) != 1 || phi.den().contains_atom(&designated) {
            return Err(Error::NotAffine(format!(
                "relation is not affine in {}",
                crate::display::atom_str(&designated)
            )));
        }
        Ok(ImplicitRelation { phi, designated })
    }

    pub fn phi(&self) -> &Expr {
        &self.phi
    }

    pub fn designated(&self) -> &Atom {
        &self.designated
    }

    /// From v = Phi(u,...): the relation v - Phi = 0 with v designated.
    pub fn from_substitution(ctx: &Context, s: &Substitution) -> Result<Self> {
        let v0 = ctx.jet(s.target_var(), 0)?;
        let phi = ctx.sub(&v0, s.phi());
        ImplicitRelation::new(ctx, phi, Atom::jet(ctx.dep(s.target_var())?, 0))
    }
}

/// The invariance test for the flow generated jointly by the two equations:
/// X Phi = Phi_*u(F) + Phi_*v(H), reduced on the manifold Phi = 0 by
/// eliminating the designated jet and its total derivatives.
pub fn implicit_invariance_residual(
    ctx: &Context,
    rel: &ImplicitRelation,
    source: &EvolutionEquation,
    target: &EvolutionEquation,
) -> Result<Residual> {
    let (tv, j) = match rel.designated() {
        Atom::Jet { var, order } => (var.clone(), *order),
        _ => unreachable!("validated at construction"),
    };
    if target.var() != &*tv {
        return Err(Error::BadArgument(
            "designated variable does not match the target equation".into(),
        ));
    }
    // X Phi = sum dPhi/du_i D^i F + sum dPhi/dv_i D^i H.
    let fu = frechet(ctx, rel.phi(), source.var())?;
    let fv = frechet(ctx, rel.phi(), target.var())?;
    let xphi = ctx.add(
        &fu.apply(ctx, source.rhs())?,
        &fv.apply(ctx, target.rhs())?,
    );
    // Solve the relation for the designated jet: v_j = E0.
    let parts = rel.phi().num().univar_in(rel.designated());
    let b = Expr::from_parts_unchecked(parts[0].clone(), crate::poly::Poly::one());
    let a = Expr::from_parts_unchecked(parts[1].clone(), crate::poly::Poly::one());
    let den = Expr::from_parts_unchecked(rel.phi().den().clone(), crate::poly::Poly::one());
    // phi = (a v_j + b)/den = 0  =>  v_j = -b/a.
    let _ = den;
    let e0 = ctx.div(&ctx.neg(&b), &a)?;
    // Prolong the solved jet: v_{j+k+1} = D(E_k) with earlier images
    // substituted back in.
    let needed = ctx
        .jet_order(&xphi, &tv)
        .map(|n| n.saturating_sub(j))
        .unwrap_or(0);
    let mut images: Vec<Expr> = vec![e0];
    let mut bindings: BTreeMap<Atom, Expr> = BTreeMap::new();
    bindings.insert(rel.designated().clone(), images[0].clone());
    for k in 0..needed {
        let d = total_derivative(ctx, &images[k as usize])?;
        let reduced = substitute(ctx, &d, &bindings)?;
        bindings.insert(Atom::jet(tv.clone(), j + k + 1), reduced.clone());
        images.push(reduced);
    }
    let residual = substitute(ctx, &xphi, &bindings)?;
    Residual::of(ctx, residual)
}

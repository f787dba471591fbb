//! Jet-calculus checks: total and time derivatives, linearization, symmetry
//! and density residuals, and the exact ansatz solver.

use jetsym_core::atom::Atom;
use jetsym_core::context::{int, rat, Context};
use jetsym_core::derive::{diff, dt_along, total_derivative, total_derivative_n};
use jetsym_core::diffalg::{
    conserved_density_residual, euler_operator, frechet, solve_linear_ansatz, symmetry_residual,
    DifferentialOperator, EvolutionEquation,
};
use jetsym_core::expr::Expr;
use jetsym_core::parse::parse;
use jetsym_core::point::Verdict;

fn plain_ctx() -> Context {
    Context::builder().dependent("u").build().unwrap()
}

fn kdv(ctx: &Context) -> EvolutionEquation {
    let rhs = parse(ctx, "u3 + u*u1").unwrap();
    EvolutionEquation::new(ctx, "u", rhs).unwrap()
}

#[test]
fn total_derivative_examples() {
    let ctx = plain_ctx();
    assert_eq!(
        total_derivative(&ctx, &parse(&ctx, "u*u1").unwrap()).unwrap(),
        parse(&ctx, "u1^2 + u*u2").unwrap()
    );
    let actx = Context::builder()
        .dependent("u")
        .free_chain("a", 4)
        .build()
        .unwrap();
    assert_eq!(
        total_derivative(&actx, &parse(&actx, "a(u)").unwrap()).unwrap(),
        parse(&actx, "a'(u)*u1").unwrap()
    );
}

#[test]
fn total_derivative_of_surd_quotient() {
    // z = u1/s with s = sqrt(u1^2 + alpha(u)); check D(s*z) = D(u1) = u2 and
    // that squaring is consistent: D(z^2) = 2 z Dz.
    let ctx = Context::builder()
        .dependent("u")
        .free_chain("alpha", 4)
        .surd("s", "u1^2 + alpha(u)")
        .build()
        .unwrap();
    let z = parse(&ctx, "u1/s").unwrap();
    let s = ctx.surd_expr().unwrap();
    let dz = total_derivative(&ctx, &z).unwrap();
    let ds = total_derivative(&ctx, &s).unwrap();
    let lhs = ctx.add(&ctx.mul(&ds, &z).unwrap(), &ctx.mul(&s, &dz).unwrap());
    assert_eq!(lhs, parse(&ctx, "u2").unwrap());
    let z2 = ctx.pow(&z, 2).unwrap();
    let d_z2 = total_derivative(&ctx, &z2).unwrap();
    let two_z_dz = ctx
        .mul(&ctx.mul(&Expr::from_int(2), &z).unwrap(), &dz)
        .unwrap();
    assert!(ctx.sub(&d_z2, &two_z_dz).is_zero());
}

#[test]
fn dt_examples() {
    let ctx = plain_ctx();
    let eq = kdv(&ctx);
    assert_eq!(
        eq.dt(&ctx, &parse(&ctx, "u").unwrap()).unwrap(),
        parse(&ctx, "u3 + u*u1").unwrap()
    );
    assert_eq!(
        eq.dt(&ctx, &parse(&ctx, "u1").unwrap()).unwrap(),
        parse(&ctx, "u4 + u1^2 + u*u2").unwrap()
    );
    assert!(eq.dt(&ctx, &Expr::from_int(7)).unwrap().is_zero());
}

#[test]
fn dt_matches_prolonged_rhs() {
    let ctx = plain_ctx();
    let eq = kdv(&ctx);
    for k in 0..=5u32 {
        let uk = ctx.jet("u", k).unwrap();
        let dt_uk = eq.dt(&ctx, &uk).unwrap();
        let dkf = total_derivative_n(&ctx, eq.rhs(), k).unwrap();
        assert!(ctx.sub(&dt_uk, &dkf).is_zero(), "k = {k}");
    }
}

#[test]
fn frechet_examples() {
    let ctx = plain_ctx();
    let f = frechet(&ctx, &parse(&ctx, "u*u1").unwrap(), "u").unwrap();
    assert_eq!(
        f.coeffs(),
        &[parse(&ctx, "u1").unwrap(), parse(&ctx, "u").unwrap()]
    );
    let f2 = frechet(&ctx, &parse(&ctx, "u3 + u*u1").unwrap(), "u").unwrap();
    assert_eq!(
        f2.coeffs(),
        &[
            parse(&ctx, "u1").unwrap(),
            parse(&ctx, "u").unwrap(),
            Expr::zero(),
            Expr::one()
        ]
    );
    let f3 = frechet(&ctx, &parse(&ctx, "u2^2").unwrap(), "u").unwrap();
    assert_eq!(
        f3.coeffs(),
        &[
            Expr::zero(),
            Expr::zero(),
            parse(&ctx, "2*u2").unwrap()
        ]
    );
}

#[test]
fn apply_operator_examples() {
    let ctx = plain_ctx();
    let d = DifferentialOperator::new(vec![Expr::zero(), Expr::one()]);
    assert_eq!(
        d.apply(&ctx, &parse(&ctx, "u2").unwrap()).unwrap(),
        parse(&ctx, "u3").unwrap()
    );
    let kdv_lin = DifferentialOperator::new(vec![
        parse(&ctx, "u1").unwrap(),
        parse(&ctx, "u").unwrap(),
        Expr::zero(),
        Expr::one(),
    ]);
    assert_eq!(
        kdv_lin.apply(&ctx, &parse(&ctx, "u2").unwrap()).unwrap(),
        parse(&ctx, "u5 + u*u3 + u1*u2").unwrap()
    );
    let e = parse(&ctx, "u1^2/u2").unwrap();
    assert_eq!(
        DifferentialOperator::identity().apply(&ctx, &e).unwrap(),
        e
    );
}

#[test]
fn symmetry_residual_examples() {
    let ctx = plain_ctx();
    let eq = kdv(&ctx);
    // x-translation and t-translation are symmetries of any fixture.
    let r1 = symmetry_residual(&ctx, &eq, &parse(&ctx, "u1").unwrap()).unwrap();
    assert_eq!(r1.verdict, Verdict::ProvenZero);
    let r2 = symmetry_residual(&ctx, &eq, eq.rhs()).unwrap();
    assert_eq!(r2.verdict, Verdict::ProvenZero);
    // u2 is not: the residual is exactly 2 u1 u2.
    let r3 = symmetry_residual(&ctx, &eq, &parse(&ctx, "u2").unwrap()).unwrap();
    assert_eq!(r3.expr, parse(&ctx, "2*u1*u2").unwrap());
    assert!(matches!(r3.verdict, Verdict::NonZero { .. }));
}

#[test]
fn euler_examples() {
    let ctx = plain_ctx();
    assert_eq!(
        euler_operator(&ctx, &parse(&ctx, "u1^2").unwrap(), "u").unwrap(),
        parse(&ctx, "-2*u2").unwrap()
    );
    assert!(euler_operator(&ctx, &parse(&ctx, "u*u2 + u1^2").unwrap(), "u")
        .unwrap()
        .is_zero());
    assert_eq!(
        euler_operator(&ctx, &parse(&ctx, "u2^2").unwrap(), "u").unwrap(),
        parse(&ctx, "2*u4").unwrap()
    );
}

#[test]
fn kdv_densities() {
    let ctx = plain_ctx();
    let eq = kdv(&ctx);
    let r_u = conserved_density_residual(&ctx, &eq, &parse(&ctx, "u").unwrap()).unwrap();
    assert_eq!(r_u.verdict, Verdict::ProvenZero);
    // rho = u^2: D_t(u^2) = D(2 u u2 - u1^2 + 2/3 u^3), so the Euler
    // operator kills it (independent antiderivative check below).
    let rho = parse(&ctx, "u^2").unwrap();
    let r_u2 = conserved_density_residual(&ctx, &eq, &rho).unwrap();
    assert_eq!(r_u2.verdict, Verdict::ProvenZero);
    let dt_rho = eq.dt(&ctx, &rho).unwrap();
    let anti = parse(&ctx, "2*u*u2 - u1^2 + 2/3*u^3").unwrap();
    assert!(ctx
        .sub(&dt_rho, &total_derivative(&ctx, &anti).unwrap())
        .is_zero());
}

#[test]
fn ansatz_recovers_fifth_order_kdv_flow() {
    let ctx = plain_ctx();
    let eq = kdv(&ctx);
    let basis = vec![
        parse(&ctx, "u5").unwrap(),
        parse(&ctx, "u*u3").unwrap(),
        parse(&ctx, "u1*u2").unwrap(),
        parse(&ctx, "u^2*u1").unwrap(),
    ];
    let sol = solve_linear_ansatz(&ctx, &eq, &basis).unwrap();
    assert_eq!(sol.len(), 1, "expected a one-dimensional solution space");
    let v = &sol[0];
    // Normalize to leading coefficient 1.
    let lead = v[0].clone();
    assert!(!lead.is_zero());
    let normed: Vec<Expr> = v.iter().map(|c| ctx.div(c, &lead).unwrap()).collect();
    assert_eq!(normed[0].as_rational().unwrap(), int(1));
    assert_eq!(normed[1].as_rational().unwrap(), rat(5, 3));
    assert_eq!(normed[2].as_rational().unwrap(), rat(10, 3));
    assert_eq!(normed[3].as_rational().unwrap(), rat(5, 6));
    // Confirm through the residual oracle.
    let g = {
        let mut acc = Expr::zero();
        for (c, b) in normed.iter().zip(&basis) {
            acc = ctx.add(&acc, &ctx.mul(c, b).unwrap());
        }
        acc
    };
    let res = symmetry_residual(&ctx, &eq, &g).unwrap();
    assert_eq!(res.verdict, Verdict::ProvenZero);
}

#[test]
fn ansatz_rejects_non_symmetry_and_keeps_translations() {
    let ctx = plain_ctx();
    let eq = kdv(&ctx);
    let only_u2 = solve_linear_ansatz(&ctx, &eq, &[parse(&ctx, "u2").unwrap()]).unwrap();
    assert!(only_u2.is_empty());
    let u1 = solve_linear_ansatz(&ctx, &eq, &[parse(&ctx, "u1").unwrap()]).unwrap();
    assert_eq!(u1.len(), 1);
}

#[test]
fn x_dependent_candidates_are_rejected_for_autonomous_equations() {
    let ctx = plain_ctx();
    let eq = kdv(&ctx);
    let g = parse(&ctx, "x*u1").unwrap();
    assert!(symmetry_residual(&ctx, &eq, &g).is_err());
}

#[test]
fn dt_rejects_foreign_jets() {
    let ctx = Context::builder()
        .dependent("u")
        .dependent("v")
        .build()
        .unwrap();
    let rhs = parse(&ctx, "u3 + u*u1").unwrap();
    let e = parse(&ctx, "v1").unwrap();
    assert!(dt_along(&ctx, &e, "u", &rhs).is_err());
}

#[test]
fn renamed_equation_matches_text_form() {
    let ctx = Context::builder()
        .dependent("u")
        .dependent("v")
        .build()
        .unwrap();
    let eq = EvolutionEquation::new(&ctx, "u", parse(&ctx, "u3 + u*u1").unwrap()).unwrap();
    let renamed = eq.renamed(&ctx, "v").unwrap();
    assert_eq!(renamed.rhs(), &parse(&ctx, "v3 + v*v1").unwrap());
}

#[test]
fn separant_example() {
    let ctx = plain_ctx();
    let eq = kdv(&ctx);
    assert!(eq.separant(&ctx).unwrap().is_one());
    assert_eq!(eq.order(), 3);
    // The Krichever-Novikov separant is 1 as well; a second-order sample:
    let actx = Context::builder()
        .dependent("u")
        .free_chain("a", 6)
        .free_chain("b", 6)
        .build()
        .unwrap();
    let rhs = parse(&actx, "u2/u1^2 - a''(u)/a'(u) + b(u)*u1").unwrap();
    let f1 = EvolutionEquation::new(&actx, "u", rhs).unwrap();
    assert_eq!(
        f1.separant(&actx).unwrap(),
        parse(&actx, "1/u1^2").unwrap()
    );
    // Partial with respect to a missing top jet would make the separant
    // vanish; such an equation is rejected.
    assert!(EvolutionEquation::new(&actx, "u", parse(&actx, "u1^2").unwrap()).is_err());
}

#[test]
fn diff_by_bound_parameter_is_rejected_only_when_undeclared() {
    let ctx = Context::builder()
        .dependent("u")
        .param("k")
        .build()
        .unwrap();
    let e = parse(&ctx, "k*u1").unwrap();
    assert_eq!(
        diff(&ctx, &e, &Atom::param("k")).unwrap(),
        parse(&ctx, "u1").unwrap()
    );
    assert!(diff(&ctx, &e, &Atom::param("zz")).is_err());
}

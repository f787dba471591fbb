//! Point pushforwards, the implicit invariance test, and agreement between
//! the explicit and implicit verification paths.

use jetsym_core::atom::Atom;
use jetsym_core::catalog::{map, Bindings};
use jetsym_core::context::Context;
use jetsym_core::derive::diff;
use jetsym_core::diffalg::EvolutionEquation;
use jetsym_core::error::Error;
use jetsym_core::parse::parse;
use jetsym_core::point::Verdict;
use jetsym_core::transform::{
    implicit_invariance_residual, point_pushforward, pushforward_residual, ImplicitRelation,
    Substitution,
};
use jetsym_core::SessionOpts;

fn uv_ctx() -> Context {
    Context::builder()
        .dependent("u")
        .dependent("v")
        .build()
        .unwrap()
}

#[test]
fn identity_point_map_keeps_the_equation() {
    let ctx = uv_ctx();
    let source =
        EvolutionEquation::new(&ctx, "u", parse(&ctx, "u3 + u*u1").unwrap()).unwrap();
    let s = Substitution::new(&ctx, "u", "v", parse(&ctx, "u").unwrap()).unwrap();
    let out = point_pushforward(&ctx, &s, &source).unwrap();
    assert_eq!(out.rhs(), &parse(&ctx, "v3 + v*v1").unwrap());
}

#[test]
fn affine_point_map_transforms_kdv() {
    let ctx = Context::builder()
        .dependent("u")
        .dependent("v")
        .param("lambda")
        .param("mu")
        .build()
        .unwrap();
    let source =
        EvolutionEquation::new(&ctx, "u", parse(&ctx, "u3 + u*u1").unwrap()).unwrap();
    let s = Substitution::new(&ctx, "u", "v", parse(&ctx, "lambda*u + mu").unwrap()).unwrap();
    let out = point_pushforward(&ctx, &s, &source).unwrap();
    // v = lambda u + mu: v_t = lambda(u3 + u u1) = v3 + ((v - mu)/lambda) v1.
    let expected = parse(&ctx, "v3 + (v - mu)*v1/lambda").unwrap();
    assert!(ctx.sub(out.rhs(), &expected).is_zero());
    // Cross-check through the residual path.
    let target = EvolutionEquation::new(&ctx, "v", expected).unwrap();
    let res = pushforward_residual(&ctx, &s, &source, &target).unwrap();
    assert_eq!(res.verdict, Verdict::ProvenZero);
}

#[test]
fn point_map_functoriality_on_affine_maps() {
    let ctx = Context::builder()
        .dependent("u")
        .dependent("v")
        .dependent("w")
        .param("a")
        .param("b")
        .param("c")
        .param("d")
        .build()
        .unwrap();
    let source =
        EvolutionEquation::new(&ctx, "u", parse(&ctx, "u3 + u*u1").unwrap()).unwrap();
    let phi = Substitution::new(&ctx, "u", "v", parse(&ctx, "a*u + b").unwrap()).unwrap();
    let mid = point_pushforward(&ctx, &phi, &source).unwrap();
    let chi = Substitution::new(&ctx, "v", "w", parse(&ctx, "c*v + d").unwrap()).unwrap();
    let twice = point_pushforward(&ctx, &chi, &mid).unwrap();
    let composed = Substitution::new(
        &ctx,
        "u",
        "w",
        parse(&ctx, "c*(a*u + b) + d").unwrap(),
    )
    .unwrap();
    let once = point_pushforward(&ctx, &composed, &source).unwrap();
    assert!(ctx.sub(once.rhs(), twice.rhs()).is_zero());
}

#[test]
fn generic_point_map_fails_closed_form() {
    // A fresh function symbol cannot close the transformed equation.
    let ctx = Context::builder()
        .dependent("u")
        .dependent("v")
        .free_chain("phi", 8)
        .build()
        .unwrap();
    let source =
        EvolutionEquation::new(&ctx, "u", parse(&ctx, "u3 + u*u1").unwrap()).unwrap();
    let s = Substitution::new(&ctx, "u", "v", parse(&ctx, "phi(u)").unwrap()).unwrap();
    match point_pushforward(&ctx, &s, &source) {
        Err(Error::NotClosedForm(_)) => {}
        other => panic!("expected NotClosedForm, got {other:?}"),
    }
}

#[test]
fn schwarzian_source_closes_onto_the_w_flow() {
    // For u_t = u3 - 3/2 u2^2/u1 - 3/2 f(u) u1^3 with
    // f = -(2/3)(phi'''/phi' - 3/2 (phi''/phi')^2), the point map w = phi(u)
    // lands exactly on w_t = w3 - 3/2 w2^2/w1.
    let ctx = Context::builder()
        .dependent("u")
        .dependent("w")
        .free_chain("phi", 8)
        .build()
        .unwrap();
    let f = parse(
        &ctx,
        "-2/3*(phi'''(u)/phi'(u) - 3/2*(phi''(u)/phi'(u))^2)",
    )
    .unwrap();
    let rhs = {
        let head = parse(&ctx, "u3 - 3/2*u2^2/u1").unwrap();
        let tail = ctx
            .mul(
                &ctx.mul(&parse(&ctx, "-3/2").unwrap(), &f).unwrap(),
                &parse(&ctx, "u1^3").unwrap(),
            )
            .unwrap();
        ctx.add(&head, &tail)
    };
    let source = EvolutionEquation::new(&ctx, "u", rhs).unwrap();
    let s = Substitution::new(&ctx, "u", "w", parse(&ctx, "phi(u)").unwrap()).unwrap();
    let out = point_pushforward(&ctx, &s, &source).unwrap();
    assert_eq!(out.rhs(), &parse(&ctx, "w3 - 3/2*w2^2/w1").unwrap());
    // And the residual path agrees.
    let target =
        EvolutionEquation::new(&ctx, "w", parse(&ctx, "w3 - 3/2*w2^2/w1").unwrap()).unwrap();
    let res = pushforward_residual(&ctx, &s, &source, &target).unwrap();
    assert_eq!(res.verdict, Verdict::ProvenZero);
}

#[test]
fn implicit_relation_requires_affineness() {
    let ctx = uv_ctx();
    let phi = parse(&ctx, "v^2 - u").unwrap();
    assert!(matches!(
        ImplicitRelation::new(&ctx, phi, Atom::jet(ctx.dep("v").unwrap(), 0)),
        Err(Error::NotAffine(_))
    ));
}

#[test]
fn explicit_and_implicit_paths_agree_on_simple_maps() {
    let ctx = Context::builder()
        .dependent("u")
        .dependent("v")
        .param("lambda")
        .build()
        .unwrap();
    let source =
        EvolutionEquation::new(&ctx, "u", parse(&ctx, "u3 + u*u1").unwrap()).unwrap();
    let target =
        EvolutionEquation::new(&ctx, "v", parse(&ctx, "v3 + v*v1/lambda").unwrap()).unwrap();
    let s = Substitution::new(&ctx, "u", "v", parse(&ctx, "lambda*u").unwrap()).unwrap();
    let rel = ImplicitRelation::from_substitution(&ctx, &s).unwrap();
    let ri = implicit_invariance_residual(&ctx, &rel, &source, &target).unwrap();
    assert_eq!(ri.verdict, Verdict::ProvenZero);

    // A wrong target is caught by both paths.
    let wrong = EvolutionEquation::new(&ctx, "v", parse(&ctx, "v3").unwrap()).unwrap();
    let r1 = pushforward_residual(&ctx, &s, &source, &wrong).unwrap();
    let r2 = implicit_invariance_residual(&ctx, &rel, &source, &wrong).unwrap();
    assert!(matches!(r1.verdict, Verdict::NonZero { .. }));
    assert!(matches!(r2.verdict, Verdict::NonZero { .. }));
    // The two residuals agree up to sign.
    assert!(ctx.add(&r1.expr, &r2.expr).is_zero() || ctx.sub(&r1.expr, &r2.expr).is_zero());
}

#[test]
fn explicit_and_implicit_paths_agree_on_catalog_maps() {
    let opts = SessionOpts::default();
    for name in ["order2_second", "order2_third", "kn_to_kdv_9a"] {
        let fix = map(name, &Bindings::new(), &opts).unwrap();
        let target = fix.target.as_ref().unwrap();
        let re = pushforward_residual(&fix.ctx, &fix.map, &fix.source, target).unwrap();
        let rel = ImplicitRelation::from_substitution(&fix.ctx, &fix.map).unwrap();
        let ri = implicit_invariance_residual(&fix.ctx, &rel, &fix.source, target).unwrap();
        assert_eq!(
            re.verdict.is_zero_like(),
            ri.verdict.is_zero_like(),
            "paths disagree on {name}"
        );
    }
}

#[test]
fn prolonged_jets_satisfy_the_chain() {
    let opts = SessionOpts::default();
    let fix = map("order2_second", &Bindings::new(), &opts).unwrap();
    let jets = fix.map.prolonged_jets(&fix.ctx, 4).unwrap();
    for k in 0..4 {
        let d = jetsym_core::derive::total_derivative(&fix.ctx, &jets[k]).unwrap();
        assert!(fix.ctx.sub(&d, &jets[k + 1]).is_zero(), "k = {k}");
    }
}

#[test]
fn substitution_validation() {
    let ctx = uv_ctx();
    // Body mentioning the target variable is rejected.
    assert!(Substitution::new(&ctx, "u", "v", parse(&ctx, "u1 + v").unwrap()).is_err());
    // Degenerate top jet is rejected: constant map.
    assert!(Substitution::new(&ctx, "u", "v", parse(&ctx, "3").unwrap()).is_err());
    let _ = diff; // keep import used in all cfg combinations
}

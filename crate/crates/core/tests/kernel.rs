//! Kernel-level checks: canonical forms, partial derivatives, substitution,
//! and the zero-test oracle.

use std::collections::BTreeMap;

use jetsym_core::atom::Atom;
use jetsym_core::context::{int, rat, Context};
use jetsym_core::derive::{diff, total_derivative};
use jetsym_core::expr::Expr;
use jetsym_core::parse::parse;
use jetsym_core::point::{zero_test, Verdict};
use jetsym_core::subst::substitute;

fn plain_ctx() -> Context {
    Context::builder().dependent("u").build().unwrap()
}

fn wp_ctx() -> Context {
    Context::builder()
        .dependent("u")
        .param("g2")
        .param("g3")
        .weierstrass_pair("wp", "wp'", "g2", "g3", int(1), None)
        .build()
        .unwrap()
}

#[test]
fn commutativity_cancels() {
    let ctx = plain_ctx();
    let e = parse(&ctx, "u*u1 - u1*u").unwrap();
    assert!(e.is_zero());
}

#[test]
fn wp_prime_square_rewrites() {
    let ctx = wp_ctx();
    let lhs = parse(&ctx, "wp'(u)^2").unwrap();
    let rhs = parse(&ctx, "4*wp(u)^3 - g2*wp(u) - g3").unwrap();
    assert_eq!(lhs, rhs);
    let residual = parse(&ctx, "wp'(u)^2 - 4*wp(u)^3 + g2*wp(u) + g3").unwrap();
    assert!(residual.is_zero());
}

#[test]
fn surd_relation_cancels() {
    let ctx = Context::builder()
        .dependent("u")
        .param("alpha")
        .surd("s", "u1^2 + alpha")
        .build()
        .unwrap();
    let e = parse(&ctx, "(u1^2 + alpha) - s^2").unwrap();
    assert!(e.is_zero());
    // 1/s rationalizes: s * (1/s) = 1.
    let s = ctx.surd_expr().unwrap();
    let inv = ctx.recip(&s).unwrap();
    assert!(ctx.mul(&s, &inv).unwrap().is_one());
}

#[test]
fn canonicalize_is_idempotent() {
    let ctx = wp_ctx();
    let e = parse(&ctx, "(u2 + wp'(u)*u1)^3/(u1^2 - wp(u))").unwrap();
    assert_eq!(ctx.canonicalize(&e).unwrap(), e);
}

#[test]
fn denominators_are_monic_and_reduced() {
    let ctx = plain_ctx();
    let e = parse(&ctx, "(2*u*u1)/(4*u)").unwrap();
    assert_eq!(e, parse(&ctx, "u1/2").unwrap());
    let f = parse(&ctx, "(u^2 - 1)/(u + 1)").unwrap();
    assert_eq!(f, parse(&ctx, "u - 1").unwrap());
}

#[test]
fn diff_examples() {
    let ctx = plain_ctx();
    let u1 = Atom::jet("u", 1);
    let u3 = Atom::jet("u", 3);
    let e = parse(&ctx, "u1^2*u2").unwrap();
    assert_eq!(
        diff(&ctx, &e, &u1).unwrap(),
        parse(&ctx, "2*u1*u2").unwrap()
    );
    // Separant of the KdV right side.
    let f = parse(&ctx, "u3 + u*u1").unwrap();
    assert!(diff(&ctx, &f, &u3).unwrap().is_one());
    // No explicit occurrence: d a(u)/d u1 = 0.
    let actx = Context::builder()
        .dependent("u")
        .free_chain("a", 4)
        .build()
        .unwrap();
    let a = parse(&actx, "a(u)").unwrap();
    assert!(diff(&actx, &a, &u1).unwrap().is_zero());
    // Chain rule through the argument.
    let u0 = Atom::jet("u", 0);
    assert_eq!(
        diff(&actx, &a, &u0).unwrap(),
        parse(&actx, "a'(u)").unwrap()
    );
}

#[test]
fn substitute_examples() {
    let ctx = plain_ctx();
    let e = parse(&ctx, "u2 + u^2").unwrap();
    let mut b = BTreeMap::new();
    b.insert(Atom::jet("u", 0), Expr::one());
    b.insert(Atom::jet("u", 2), Expr::zero());
    assert!(substitute(&ctx, &e, &b).unwrap().is_one());

    let ctx2 = Context::builder()
        .dependent("u")
        .dependent("v")
        .param("lambda")
        .build()
        .unwrap();
    let e2 = parse(&ctx2, "v*v1").unwrap();
    let mut b2 = BTreeMap::new();
    b2.insert(Atom::jet("v", 0), parse(&ctx2, "lambda*u").unwrap());
    b2.insert(Atom::jet("v", 1), parse(&ctx2, "lambda*u1").unwrap());
    assert_eq!(
        substitute(&ctx2, &e2, &b2).unwrap(),
        parse(&ctx2, "lambda^2*u*u1").unwrap()
    );

    // Argument shift: wp(u) with u -> u + c.
    let ctx3 = Context::builder()
        .dependent("u")
        .param("c")
        .param("g2")
        .param("g3")
        .weierstrass_pair("wp", "wp'", "g2", "g3", int(1), None)
        .build()
        .unwrap();
    let e3 = parse(&ctx3, "wp(u)").unwrap();
    let mut b3 = BTreeMap::new();
    b3.insert(Atom::jet("u", 0), parse(&ctx3, "u + c").unwrap());
    assert_eq!(
        substitute(&ctx3, &e3, &b3).unwrap(),
        parse(&ctx3, "wp(u + c)").unwrap()
    );
}

#[test]
fn zero_test_examples() {
    let ctx = plain_ctx();
    // D(u*u1) expansion differs from itself by zero.
    let d = total_derivative(&ctx, &parse(&ctx, "u*u1").unwrap()).unwrap();
    let res = ctx.sub(&d, &parse(&ctx, "u1^2 + u*u2").unwrap());
    assert_eq!(zero_test(&ctx, &res, 5, 0).unwrap(), Verdict::ProvenZero);

    // A visibly nonzero expression yields a witness.
    let e = parse(&ctx, "u2*u1").unwrap();
    match zero_test(&ctx, &e, 5, 0).unwrap() {
        Verdict::NonZero { value, .. } => assert!(!value.is_zero()),
        v => panic!("expected NonZero, got {v:?}"),
    }

    // Declared relation holds at sampled points even without canonical help.
    let ctx2 = wp_ctx();
    let e2 = parse(&ctx2, "wp'(u)^2 - 4*wp(u)^3 + g2*wp(u) + g3").unwrap();
    assert_eq!(zero_test(&ctx2, &e2, 8, 1).unwrap(), Verdict::ProvenZero);
}

#[test]
fn sampled_pair_values_satisfy_the_cubic() {
    // Evaluate wp' and the cubic at one shared point and compare the square
    // of the first against the second by hand, without canonical help.
    let ctx = wp_ctx();
    let wpp = parse(&ctx, "wp'(u)").unwrap();
    let rhs = parse(&ctx, "4*wp(u)^3 - g2*wp(u) - g3").unwrap();
    let (point, vals) =
        jetsym_core::point::eval_many_at_point(&ctx, &[&wpp, &rhs], 7).unwrap();
    let q = &vals[0];
    let cubic = &vals[1];
    assert!(cubic.is_rational());
    // (a + b*sqrt(r))^2 = a^2 + b^2 r + 2ab sqrt(r).
    let r = point.radicand.clone().unwrap_or_else(|| rat(0, 1));
    let sq_rat = &q.a * &q.a + &q.b * &q.b * &r;
    let sq_irr = &q.a * &q.b * rat(2, 1);
    assert_eq!(sq_rat, cubic.a, "rational part of wp'^2 mismatch");
    assert!(sq_irr == rat(0, 1) || q.a == rat(0, 1));
}

#[test]
fn parse_print_roundtrip() {
    let ctx = wp_ctx();
    for text in [
        "u3 + u*u1",
        "wp'(u)^2",
        "u_10 + 1/2",
        "(u2 - 1/6*u1^2)/(u1^2 + 2)",
        "-u^2",
        "2/3*wp(u)*u1 - g3",
    ] {
        let e = parse(&ctx, text).unwrap();
        let printed = format!("{e}");
        let back = parse(&ctx, &printed).unwrap();
        assert_eq!(e, back, "round trip failed for `{text}` -> `{printed}`");
        assert_eq!(format!("{back}"), printed);
    }
}

#[test]
fn power_binds_tighter_than_unary_minus() {
    let ctx = plain_ctx();
    let a = parse(&ctx, "-u^2").unwrap();
    let b = ctx.neg(&parse(&ctx, "u^2").unwrap());
    assert_eq!(a, b);
}

#[test]
fn jet_order_ten_parses_both_ways() {
    let ctx = Context::builder()
        .dependent("u")
        .opts(jetsym_core::SessionOpts {
            max_jet_order: 12,
            ..Default::default()
        })
        .build()
        .unwrap();
    assert_eq!(
        parse(&ctx, "u_10").unwrap(),
        ctx.jet("u", 10).unwrap()
    );
}

#[test]
fn unknown_symbol_is_rejected() {
    let ctx = plain_ctx();
    let err = parse(&ctx, "u1 + qq").unwrap_err();
    match err {
        jetsym_core::Error::Syntax { msg, .. } => assert!(msg.contains("qq")),
        other => panic!("unexpected error {other:?}"),
    }
}

#[test]
fn constrained_power_reduction_to_fourth_order() {
    let ctx = wp_ctx();
    for k in 1..=4u32 {
        let lhs = ctx
            .pow(&parse(&ctx, "wp'(u)").unwrap(), (2 * k) as i64)
            .unwrap();
        let rhs = ctx
            .pow(
                &parse(&ctx, "4*wp(u)^3 - g2*wp(u) - g3").unwrap(),
                k as i64,
            )
            .unwrap();
        assert_eq!(lhs, rhs, "failed at k = {k}");
        // Against a random monomial factor.
        let m = parse(&ctx, "u1^2*u2").unwrap();
        assert_eq!(
            ctx.mul(&lhs, &m).unwrap(),
            ctx.mul(&rhs, &m).unwrap()
        );
    }
}

#[test]
fn rational_constants_stay_reduced() {
    let ctx = plain_ctx();
    let e = parse(&ctx, "4/6").unwrap();
    assert_eq!(e.as_rational().unwrap(), rat(2, 3));
}

//! Verification of the catalog substitutions between evolution equations.

use jetsym_core::catalog::{map, Bindings};
use jetsym_core::point::Verdict;
use jetsym_core::transform::pushforward_residual;
use jetsym_core::SessionOpts;

fn check(name: &str, bindings: Bindings) -> Verdict {
    let opts = SessionOpts::default();
    let fix = map(name, &bindings, &opts).unwrap();
    let target = fix.target.as_ref().expect("map has a stored target");
    let res = pushforward_residual(&fix.ctx, &fix.map, &fix.source, target).unwrap();
    res.verdict
}

#[test]
fn order2_second_map_verifies() {
    assert_eq!(check("order2_second", Bindings::new()), Verdict::ProvenZero);
}

#[test]
fn order2_first_map_verifies_on_one_branch() {
    // The u1^(3/2) term leaves the square-root branch to the reader; exactly
    // one relative branch verifies.
    let plus = check("order2_first", Bindings::new().set("sign", "1"));
    let minus = check("order2_first", Bindings::new().set("sign", "-1"));
    assert_eq!(minus, Verdict::ProvenZero);
    assert!(matches!(plus, Verdict::NonZero { .. }));
}

#[test]
fn order2_third_map_verifies() {
    assert_eq!(check("order2_third", Bindings::new()), Verdict::ProvenZero);
}

#[test]
fn scaling_point_map_verifies() {
    // v = lambda u maps KdV onto v_t = v3 + (1/lambda) v v1.
    use jetsym_core::context::Context;
    use jetsym_core::diffalg::EvolutionEquation;
    use jetsym_core::parse::parse;
    use jetsym_core::transform::Substitution;
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
    let res = pushforward_residual(&ctx, &s, &source, &target).unwrap();
    assert_eq!(res.verdict, Verdict::ProvenZero);
}

#[test]
fn derivative_map_intertwines_linear_flows() {
    use jetsym_core::context::Context;
    use jetsym_core::diffalg::EvolutionEquation;
    use jetsym_core::parse::parse;
    use jetsym_core::transform::Substitution;
    let ctx = Context::builder()
        .dependent("u")
        .dependent("v")
        .build()
        .unwrap();
    let source = EvolutionEquation::new(&ctx, "u", parse(&ctx, "u3").unwrap()).unwrap();
    let target = EvolutionEquation::new(&ctx, "v", parse(&ctx, "v3").unwrap()).unwrap();
    let s = Substitution::new(&ctx, "u", "v", parse(&ctx, "u1").unwrap()).unwrap();
    let res = pushforward_residual(&ctx, &s, &source, &target).unwrap();
    assert_eq!(res.verdict, Verdict::ProvenZero);
}

#[test]
fn const_wp_map_verifies_for_some_sign() {
    let plus = check("kn_to_kdv_const_wp", Bindings::new().set("eps", "1"));
    let minus = check("kn_to_kdv_const_wp", Bindings::new().set("eps", "-1"));
    assert!(
        plus == Verdict::ProvenZero || minus == Verdict::ProvenZero,
        "neither sign branch verified: +1 -> {plus:?}, -1 -> {minus:?}"
    );
}

#[test]
fn wp_inverse_square_map_verifies() {
    assert_eq!(check("kn_to_kdv_9a", Bindings::new()), Verdict::ProvenZero);
}

#[test]
fn tangent_closure_map_verifies() {
    assert_eq!(check("kn_to_kdv_9b", Bindings::new()), Verdict::ProvenZero);
}

#[test]
fn hyperbolic_closure_map_verifies() {
    assert_eq!(check("kn_to_kdv_9c", Bindings::new()), Verdict::ProvenZero);
}

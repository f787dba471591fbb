//! Scratch exploration (removed before release).

use jetsym_core::catalog::{equation, map, symmetry_for, Bindings};
use jetsym_core::diffalg::symmetry_residual;
use jetsym_core::transform::pushforward_residual;
use jetsym_core::SessionOpts;

#[test]
#[ignore]
fn probe_kn_order5() {
    let t0 = std::time::Instant::now();
    let fix = equation("kn", &Bindings::new(), &SessionOpts::default()).unwrap();
    let g = symmetry_for("kn_order5", &fix).unwrap();
    let res = symmetry_residual(&fix.ctx, &fix.eq, &g).unwrap();
    println!(
        "kn_order5: verdict = {:?} in {:?}; residual zero = {}",
        res.verdict.label(),
        t0.elapsed(),
        res.expr.is_zero()
    );
    if !res.expr.is_zero() {
        let text = format!("{}", res.expr);
        println!("residual ({} chars): {}", text.len(), &text[..text.len().min(400)]);
    }
}

#[test]
#[ignore]
fn probe_kn_order5_ansatz() {
    use jetsym_core::parse::parse;
    let fix = equation("kn", &Bindings::new(), &SessionOpts::default()).unwrap();
    let ctx = &fix.ctx;
    let basis_texts = [
        "u5",
        "u2*u4/u1",
        "u3^2/u1",
        "u2^2*u3/u1^2",
        "u3/u1^2",
        "wp(u)*u1^2*u3",
        "u2^4/u1^3",
        "u2^2/u1^3",
        "wp(u)*u1*u2^2",
        "wp'(u)*u1^3*u2",
        "wp(u)^2*u1^5",
        "u1^5",
        "1/u1^3",
        "wp(u)*u1",
        "u1",
        "wp(u)*u1^3",
        "u2^2*u1",
        "u2*u3",
        "wp'(u)*u1*u2",
        "wp'(u)*u1^5",
    ];
    let basis: Vec<_> = basis_texts
        .iter()
        .map(|t| parse(ctx, t).unwrap())
        .collect();
    let t0 = std::time::Instant::now();
    let sols = jetsym_core::diffalg::solve_linear_ansatz(ctx, &fix.eq, &basis).unwrap();
    println!("solution space dim = {} in {:?}", sols.len(), t0.elapsed());
    for (si, sol) in sols.iter().enumerate() {
        for (c, t) in sol.iter().zip(basis_texts.iter()) {
            if !c.is_zero() {
                println!("  sol{si}: {t} * {c}");
            }
        }
    }
}

#[test]
#[ignore]
fn probe_cd_third_order() {
    let t0 = std::time::Instant::now();
    for sign in ["1", "-1"] {
        let fix = map(
            "cd_third_order",
            &Bindings::new().set("sign", sign),
            &SessionOpts::default(),
        )
        .unwrap();
        let res = pushforward_residual(
            &fix.ctx,
            &fix.map,
            &fix.source,
            fix.target.as_ref().unwrap(),
        )
        .unwrap();
        println!(
            "cd_third_order sign={sign}: zero={} in {:?}",
            res.expr.is_zero(),
            t0.elapsed()
        );
        if !res.expr.is_zero() {
            let text = format!("{}", res.expr);
            println!("residual ({} chars): {}", text.len(), &text[..text.len().min(400)]);
        }
    }
}

#[test]
#[ignore]
fn profile_cd_third_order() {
    use jetsym_core::derive::total_derivative;
    let t0 = std::time::Instant::now();
    let fix = map(
        "cd_third_order",
        &Bindings::new().set("sign", "1"),
        &SessionOpts::default(),
    )
    .unwrap();
    println!("fixture built in {:?}", t0.elapsed());
    println!(
        "phi size: num {} terms / den {} terms",
        fix.map.phi().num().len(),
        fix.map.phi().den().len()
    );
    let t = std::time::Instant::now();
    let d1 = total_derivative(&fix.ctx, fix.map.phi()).unwrap();
    println!(
        "D phi in {:?}: {} / {}",
        t.elapsed(),
        d1.num().len(),
        d1.den().len()
    );
    let t = std::time::Instant::now();
    let d2 = total_derivative(&fix.ctx, &d1).unwrap();
    println!(
        "D2 phi in {:?}: {} / {}",
        t.elapsed(),
        d2.num().len(),
        d2.den().len()
    );
    let t = std::time::Instant::now();
    let d3 = total_derivative(&fix.ctx, &d2).unwrap();
    println!(
        "D3 phi in {:?}: {} / {}",
        t.elapsed(),
        d3.num().len(),
        d3.den().len()
    );
    let t = std::time::Instant::now();
    let lhs = fix.source.dt(&fix.ctx, fix.map.phi()).unwrap();
    println!(
        "dt phi in {:?}: {} / {}",
        t.elapsed(),
        lhs.num().len(),
        lhs.den().len()
    );
    let t = std::time::Instant::now();
    let prod = fix.ctx.mul(fix.map.phi(), &d1).unwrap();
    println!(
        "phi*Dphi in {:?}: {} / {}",
        t.elapsed(),
        prod.num().len(),
        prod.den().len()
    );
    let t = std::time::Instant::now();
    let rhs = fix.ctx.add(&d3, &prod);
    println!(
        "d3 + phi*Dphi in {:?}: {} / {}",
        t.elapsed(),
        rhs.num().len(),
        rhs.den().len()
    );
    let t = std::time::Instant::now();
    let res = fix.ctx.sub(&lhs, &rhs);
    println!("residual in {:?}: zero = {}", t.elapsed(), res.is_zero());
    println!("total {:?}", t0.elapsed());
}

#[test]
#[ignore]
fn probe_psi_chain() {
    let t0 = std::time::Instant::now();
    let fix = map("psi_chain", &Bindings::new(), &SessionOpts::default()).unwrap();
    let res = pushforward_residual(
        &fix.ctx,
        &fix.map,
        &fix.source,
        fix.target.as_ref().unwrap(),
    )
    .unwrap();
    println!(
        "psi_chain: zero={} verdict={} in {:?}",
        res.expr.is_zero(),
        res.verdict.label(),
        t0.elapsed()
    );
    if !res.expr.is_zero() {
        let text = format!("{}", res.expr);
        println!("residual ({} chars): {}", text.len(), &text[..text.len().min(500)]);
    }
}

#[test]
#[ignore]
fn probe_half_wp() {
    use jetsym_core::transform::point_pushforward;
    let t0 = std::time::Instant::now();
    let fix = map("half_wp", &Bindings::new(), &SessionOpts::default()).unwrap();
    match point_pushforward(&fix.ctx, &fix.map, &fix.source) {
        Ok(eq) => println!("half_wp pushforward rhs = {}", eq.rhs()),
        Err(e) => println!("half_wp error: {e}"),
    }
    println!("elapsed {:?}", t0.elapsed());
}

#[test]
#[ignore]
fn probe_order2_first() {
    let opts = SessionOpts::default();
    // k = 0 isolates the surd-free part of the identity.
    for k in ["0", "1", "free"] {
        let fix = map("order2_first", &Bindings::new().set("k", k), &opts).unwrap();
        let res = pushforward_residual(
            &fix.ctx,
            &fix.map,
            &fix.source,
            fix.target.as_ref().unwrap(),
        )
        .unwrap();
        println!("k = {k}: residual = {}", res.expr);
    }
}

#[test]
#[ignore]
fn probe_order2_first_variants() {
    use jetsym_core::context::Context;
    use jetsym_core::diffalg::EvolutionEquation;
    use jetsym_core::parse::parse;
    use jetsym_core::transform::Substitution;
    // Independent constants in source and map, both sign branches of the
    // surd in the map, both signs of each k-term.
    for (src_k, map_k, map_s) in [
        ("- 2/3*ks*u1*s", "+ km*s", "u2/s"),
        ("- 2/3*ks*u1*s", "+ km*s", "-u2/s"),
        ("+ 2/3*ks*u1*s", "+ km*s", "u2/s"),
        ("- 2/3*ks*u1*s", "- km*s", "u2/s"),
    ] {
        let ctx = Context::builder()
            .dependent("u")
            .dependent("v")
            .param("ks")
            .param("km")
            .surd("s", "u1")
            .build()
            .unwrap();
        let rhs = parse(&ctx, &format!("u3 - 3/4*u2^2/u1 - 1/3*u1^2 {src_k}")).unwrap();
        let source = EvolutionEquation::new(&ctx, "u", rhs).unwrap();
        let phi = parse(&ctx, &format!("{map_s} - 2/3*u1 {map_k}")).unwrap();
        let sub = Substitution::new(&ctx, "u", "v", phi).unwrap();
        let target =
            EvolutionEquation::new(&ctx, "v", parse(&ctx, "v3 + v*v1").unwrap()).unwrap();
        let res = pushforward_residual(&ctx, &sub, &source, &target).unwrap();
        println!("src {src_k}, map {map_k}, {map_s}: residual = {}", res.expr);
    }
}

#[test]
#[ignore]
fn probe_9b() {
    let opts = SessionOpts::default();
    for k in ["0", "6", "-6", "free"] {
        let fix = map("kn_to_kdv_9b", &Bindings::new().set("k", k), &opts).unwrap();
        let res = pushforward_residual(
            &fix.ctx,
            &fix.map,
            &fix.source,
            fix.target.as_ref().unwrap(),
        )
        .unwrap();
        println!("9b k = {k}: residual = {}", res.expr);
    }
}

#[test]
#[ignore]
fn probe_closure_variants() {
    use jetsym_core::context::Context;
    use jetsym_core::derive::diff;
    use jetsym_core::diffalg::EvolutionEquation;
    use jetsym_core::parse::parse;
    use jetsym_core::transform::Substitution;
    let cases = [
        ("tan", "alpha^2/4*(2/3 + tan(alpha*u/2)^2)", "alpha*tan(alpha*u/2)"),
        ("tan", "alpha^2/4*(2/3 + tan(alpha*u/2)^2)", "-alpha*tan(alpha*u/2)"),
        ("tanh", "alpha^2/4*(-2/3 + tanh(alpha*u/2)^2)", "alpha*tanh(alpha*u/2)"),
        ("tanh", "alpha^2/4*(-2/3 + tanh(alpha*u/2)^2)", "-alpha*tanh(alpha*u/2)"),
    ];
    for (f, wp_text, eps_text) in cases {
        let b = Context::builder()
            .dependent("u")
            .dependent("v")
            .param_text("alpha", "2/3")
            .unwrap()
            .param_text("k", "6")
            .unwrap();
        let ctx = if f == "tan" {
            b.tan("tan").build().unwrap()
        } else {
            b.tanh("tanh").build().unwrap()
        };
        let wp = parse(&ctx, wp_text).unwrap();
        let eps = parse(&ctx, eps_text).unwrap();
        let u0 = jetsym_core::Atom::jet(ctx.dep("u").unwrap(), 0);
        let deps = diff(&ctx, &eps, &u0).unwrap();
        let rhs = {
            let head = parse(&ctx, "u3 - 3/2*u2^2/u1 + k/u1").unwrap();
            let tail = ctx
                .mul(
                    &ctx.mul(&parse(&ctx, "-3/2").unwrap(), &wp).unwrap(),
                    &parse(&ctx, "u1^3").unwrap(),
                )
                .unwrap();
            ctx.add(&head, &tail)
        };
        let source = EvolutionEquation::new(&ctx, "u", rhs).unwrap();
        let inner = ctx.sum([
            &parse(&ctx, "u3/u1 - 1/2*u2^2/u1^2 + 2/u1^2").unwrap(),
            &ctx.mul(&eps, &parse(&ctx, "u2").unwrap()).unwrap(),
            &ctx.mul(&deps, &parse(&ctx, "u1^2").unwrap()).unwrap(),
            &ctx.mul(
                &ctx.mul(&parse(&ctx, "3/2").unwrap(), &wp).unwrap(),
                &parse(&ctx, "u1^2").unwrap(),
            )
            .unwrap(),
        ]);
        let phi = ctx.mul(&parse(&ctx, "-3").unwrap(), &inner).unwrap();
        let map = Substitution::new(&ctx, "u", "v", phi).unwrap();
        let target =
            EvolutionEquation::new(&ctx, "v", parse(&ctx, "v3 + v*v1").unwrap()).unwrap();
        let res = pushforward_residual(&ctx, &map, &source, &target).unwrap();
        println!(
            "wp={wp_text} eps={eps_text}: zero={} residual={}",
            res.expr.is_zero(),
            if res.expr.is_zero() {
                "0".to_string()
            } else {
                format!("{}", res.expr).chars().take(120).collect::<String>()
            }
        );
    }
}

#[test]
#[ignore]
fn probe_9c() {
    let opts = SessionOpts::default();
    for k in ["0", "6", "-6", "free"] {
        let fix = map("kn_to_kdv_9c", &Bindings::new().set("k", k), &opts).unwrap();
        let res = pushforward_residual(
            &fix.ctx,
            &fix.map,
            &fix.source,
            fix.target.as_ref().unwrap(),
        )
        .unwrap();
        println!("9c k = {k}: residual = {}", res.expr);
    }
}

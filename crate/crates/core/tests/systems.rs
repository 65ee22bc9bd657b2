mod common;

use common::{omega2, rel, rng, smooth_coeffs};
use liesys::ermakov::{
    generalized_invariant, integrate_generalized, integrate_triple, triple_invariants, ErmakovState,
    GeneralizedErmakovSpec, PinneySpec, PinneySuperposition,
};
use liesys::exprfn::parse;
use liesys::numerics::{integrate_ode, IntegratorConfig, Trajectory};
use liesys::oscillator::{
    linear_superposition, partial_superposition_with, quartic_reduction_solve, wronskian_invariants, CubicHermite,
    OscillatorSpec, QuarticReduction,
};
use liesys::riccati::{reduce_with_particular, solve_bernoulli_reduced, solve_numeric, RiccatiProblem};
use liesys::sl2::{fundamental_solution, Sl2Coeffs};
use liesys::{linspace, Expr, Mat2f32};
use proptest::prelude::*;
use rand::Rng;

fn tight() -> IntegratorConfig<f64> {
    IntegratorConfig::with_tolerances(1e-11, 1e-13)
}

fn oscillator(w2: &Expr, s0: [f64; 2], times: &[f64]) -> Trajectory<f64> {
    let spec = OscillatorSpec::new(Expr::one(), w2.clone()).unwrap();
    let span = (times[0], *times.last().unwrap());
    integrate_ode(spec.hamilton_rhs(), &s0, span, times, &tight()).unwrap()
}

#[test]
fn linear_rule_and_wronskian() {
    let mut r = rng(11);
    let times = linspace(0.0, 10.0, 101);
    for _ in 0..5 {
        let w2 = omega2(&mut r);
        let a = oscillator(&w2, [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)], &times);
        let b = oscillator(&w2, [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)], &times);
        let w = wronskian_invariants(&a, &b).unwrap();
        assert!(w.iter().all(|&v| rel(v, w[0]) < 1e-8));
        let (k1, k2) = (r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
        let sum = linear_superposition(&a, &b, k1, k2).unwrap();
        let s0 = [sum.state(0)[0], sum.state(0)[1]];
        let direct = oscillator(&w2, s0, &times);
        for i in 0..times.len() {
            assert!(rel(sum.state(i)[0], direct.state(i)[0]) < 1e-8);
        }
    }
}

#[test]
fn partial_rule_from_an_interpolated_solution() {
    let mut r = rng(12);
    let times = linspace(0.0, 1.0, 401);
    for _ in 0..5 {
        let w2 = omega2(&mut r);
        // x1(0) = 1, x1'(0) = 0 keeps x1 positive on [0, 1]
        let x1 = oscillator(&w2, [1.0, 0.0], &times);
        let interp = CubicHermite::from_trajectory(&x1).unwrap();
        let (k, kp) = (r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
        // x2 = kp x1 + k x1 * integral, so x2(0) = kp and x2'(0) = k
        let direct = oscillator(&w2, [kp, k], &times);
        for i in (0..times.len()).step_by(20) {
            let t = times[i];
            let x2 = partial_superposition_with(|s| interp.eval(s), k, kp, 0.0, t, 1e-10).unwrap();
            assert!(
                rel(x2, direct.state(i)[0]) < 1e-5,
                "t = {t}: {x2} vs {}",
                direct.state(i)[0]
            );
        }
    }
}

#[test]
fn quartic_family_scaling() {
    // (c u0, c u1, c^2 w0) gives the same frequency w0^2 (u1 t + u0)^-4
    let times = linspace(0.0, 3.0, 31);
    let q = QuarticReduction::new(1.0, 0.5, 1.2).unwrap();
    for c in [0.5, 2.0, 3.0] {
        let s = QuarticReduction::new(c, 0.5 * c, 1.2 * c * c).unwrap();
        for &t in &times {
            let a = quartic_reduction_solve(&q, 0.7, -0.2, t, 1e-12).unwrap();
            let b = quartic_reduction_solve(&s, 0.7, -0.2, t, 1e-12).unwrap();
            assert!(rel(a, b) < 1e-10, "c = {c}, t = {t}: {a} vs {b}");
        }
    }
}

#[test]
fn generalized_invariant_is_conserved() {
    let mut r = rng(13);
    let times = linspace(0.0, 5.0, 101);
    for _ in 0..5 {
        let spec = GeneralizedErmakovSpec::new(Expr::one(), Expr::one(), omega2(&mut r)).unwrap();
        let st = ErmakovState::planar(
            r.gen_range(1.0..2.0),
            r.gen_range(-0.3..0.3),
            r.gen_range(1.0..2.0),
            0.0,
        );
        let tr = integrate_generalized(&spec, st, (0.0, 5.0), &times, &tight()).unwrap();
        assert_eq!(tr.len(), times.len(), "{:?}", tr.events());
        let i0 = generalized_invariant(&spec, &st, 1e-12).unwrap();
        for s in tr.states() {
            let i = generalized_invariant(&spec, &ErmakovState::from_slice(s).unwrap(), 1e-12).unwrap();
            assert!(rel(i, i0) < 1e-5, "{i} vs {i0}");
        }
    }
}

#[test]
fn triple_invariants_are_conserved_and_rule_solves_pinney() {
    let mut r = rng(14);
    let times = linspace(0.0, 10.0, 201);
    for _ in 0..5 {
        let w2 = omega2(&mut r);
        let k = r.gen_range(0.5..2.0);
        let spec = PinneySpec::new(k, w2.clone()).unwrap();
        let st =
            ErmakovState::from_slice(&[r.gen_range(0.5..2.0), r.gen_range(-1.0..1.0), 1.0, 0.0, 0.0, 1.0]).unwrap();
        let tr = integrate_triple(&spec, st, (0.0, 10.0), &times, &tight()).unwrap();
        assert_eq!(tr.len(), times.len());
        let inv0 = triple_invariants(&st, k).unwrap();
        for s in tr.states() {
            let inv = triple_invariants(&ErmakovState::from_slice(s).unwrap(), k).unwrap();
            assert!(rel(inv.i1, inv0.i1) < 1e-7 && rel(inv.i2, inv0.i2) < 1e-7 && rel(inv.w, inv0.w) < 1e-7);
        }
        // the superposed curve satisfies x'' = -w^2 x + k/x^3 by finite differences
        let rule = PinneySuperposition::from_initial(&st, k).unwrap();
        let seeds = |t: f64| {
            let y = oscillator(&w2, [1.0, 0.0], &[0.0, t]);
            let z = oscillator(&w2, [0.0, 1.0], &[0.0, t]);
            rule.eval(y.state(1)[0], z.state(1)[0]).unwrap()
        };
        let h = 1e-3;
        for t in [1.0, 4.0, 9.0] {
            let (xm, x, xp) = (seeds(t - h), seeds(t), seeds(t + h));
            let acc = (xp - 2.0 * x + xm) / (h * h);
            let w: f64 = w2.eval_t(t).unwrap();
            let res = acc + w * x - k / (x * x * x);
            assert!(res.abs() < 1e-4, "t = {t}: residual {res}");
        }
    }
}

#[test]
fn particular_solution_reduction_matches_numeric() {
    // x1 = t solves x' = b0 + b1 x + b2 x^2 with b0 = 1 - b1 t - b2 t^2
    let (b1, b2) = (parse("0.3*cos(t)").unwrap(), parse("-0.5 + 0.2*t").unwrap());
    let x1 = Expr::t();
    let b0 = Expr::one() - b1.clone() * x1.clone() - b2.clone() * x1.clone() * x1.clone();
    let c = Sl2Coeffs::new(b0, b1, b2).unwrap();
    let red = reduce_with_particular(&c, &x1, (0.0, 2.0)).unwrap();
    let times = linspace(0.0, 2.0, 21);
    let p = RiccatiProblem::new(c, 0.4, 0.0, 2.0).unwrap();
    let num = solve_numeric(&p, &times, &tight()).unwrap();
    for (i, &t) in times.iter().enumerate() {
        let z = solve_bernoulli_reduced(&red, 0.4, 0.0, t, 1e-12).unwrap();
        assert!(rel(z + t, num.state(i)[0]) < 1e-8);
    }
}

#[test]
fn single_precision_fundamental_solution() {
    let c = smooth_coeffs(&mut rng(15));
    let times: Vec<f32> = linspace(0.0, 1.0, 11);
    let phi = fundamental_solution(&c, (0.0, 1.0), &times, &IntegratorConfig::with_tolerances(1e-5, 1e-6)).unwrap();
    let wide = fundamental_solution(&c, (0.0, 1.0), &linspace(0.0, 1.0, 11), &tight()).unwrap();
    for (m, w) in phi.mats.iter().zip(&wide.mats) {
        let m: &Mat2f32 = m;
        assert!((m.det() - 1.0).abs() < 1e-4);
        assert!(m.cast::<f64>().max_abs_diff(w) < 1e-4);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fundamental_solution_is_unimodular(seed in any::<u64>()) {
        let c = smooth_coeffs(&mut rng(seed));
        let phi = fundamental_solution(&c, (0.0, 2.0), &linspace(0.0, 2.0, 21), &tight()).unwrap();
        for m in &phi.mats {
            prop_assert!((m.det() - 1.0).abs() < 1e-8);
        }
    }
}

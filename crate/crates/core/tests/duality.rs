use canondual::benchmarks::{gp_canonical_g, gp_g, thc_dual, thc_dual_by_elimination, ThcDual};
use canondual::oracle::univariate_global;
use canondual::polynomial::Rational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::*;

#[test]
fn g_dual_gradient_matches_finite_differences() {
    let pr = gp_canonical_g().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = |s: &[f64]| pr.dual_value(s).unwrap();
    for _ in 0..20 {
        let s = [-53.0 / 3.0 + rng.gen_range(0.5..40.0)];
        assert_gradient_matches(&f, &pr.dual_gradient(&s).unwrap(), &s);
    }
}

#[test]
fn planar_dual_gradient_matches_finite_differences() {
    let pr = planar_problem();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let f = |s: &[f64]| pr.dual_value(s).unwrap();
    for _ in 0..20 {
        let s = planar_feasible(&pr, &mut rng);
        assert_gradient_matches(&f, &pr.dual_gradient(&s).unwrap(), &s);
    }
}

#[test]
fn thc_dual_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = |s: &[f64]| ThcDual.value_unchecked(s[0], s[1]);
    for _ in 0..20 {
        let (s1, s2) = thc_feasible(&mut rng);
        let g = ThcDual.gradient(s1, s2).unwrap();
        assert_gradient_matches(&f, &g, &[s1, s2]);
    }
}

#[test]
fn g_dual_reproduces_closed_form() {
    let pr = gp_canonical_g().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let s = g_feasible(&mut rng);
        let d = pr.dual_value(&[s]).unwrap();
        let c = g_dual_closed_form(s);
        assert!((d - c).abs() <= 1e-10 * (1.0 + c.abs()), "{s}: {d} vs {c}");
    }
}

#[test]
fn thc_closed_form_matches_elimination() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let (s1, s2) = thc_feasible(&mut rng);
        let c = thc_dual(s1, s2).unwrap();
        let e = thc_dual_by_elimination(s1, s2).unwrap();
        assert!((c - e).abs() <= 1e-9 * (1.0 + c.abs()), "({s1}, {s2}): {c} vs {e}");
    }
}

#[test]
fn thc_feasible_set_is_the_parabola_region() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..2000 {
        let s1: f64 = rng.gen_range(-1.0..1.0);
        let s2: f64 = rng.gen_range(-5.0..25.0);
        let boundary = 25.0 * s1 * s1 - 2.6;
        if (s2 - boundary).abs() < 1e-9 {
            continue;
        }
        assert_eq!(ThcDual.is_feasible(s1, s2), ThcDual.margin(s1, s2) >= 0.0, "({s1}, {s2})");
    }
}

#[test]
fn duals_are_midpoint_concave() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pr = gp_canonical_g().unwrap();
    let g = |s: &[f64]| pr.dual_value(s).unwrap();
    let thc = |s: &[f64]| ThcDual.value_unchecked(s[0], s[1]);
    let planar = planar_problem();
    let p2 = |s: &[f64]| planar.dual_value(s).unwrap();
    for _ in 0..200 {
        let (a, b) = ([g_feasible(&mut rng)], [g_feasible(&mut rng)]);
        let gap = midpoint_gap(&g, &a, &b);
        assert!(gap >= -1e-9 * (1.0 + g(&a).abs() + g(&b).abs()), "g: {a:?} {b:?}");

        let (a, b) = (thc_feasible(&mut rng), thc_feasible(&mut rng));
        let (a, b) = ([a.0, a.1], [b.0, b.1]);
        let gap = midpoint_gap(&thc, &a, &b);
        assert!(gap >= -1e-9 * (1.0 + thc(&a).abs() + thc(&b).abs()), "thc: {a:?} {b:?}");

        let (a, b) = (planar_feasible(&planar, &mut rng), planar_feasible(&planar, &mut rng));
        let gap = midpoint_gap(&p2, &a, &b);
        assert!(gap >= -1e-9 * (1.0 + p2(&a).abs() + p2(&b).abs()), "planar: {a:?} {b:?}");
    }
}

#[test]
fn weak_duality_holds_on_samples() {
    let pr = gp_canonical_g().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let sigmas: Vec<f64> = (0..100).map(|_| g_feasible(&mut rng)).collect();
    let ts: Vec<f64> = (0..100).map(|_| rng.gen_range(-4.0..6.0)).collect();
    let primal: Vec<f64> = ts.iter().map(|&t| pr.primal_value(&[t]).unwrap()).collect();
    for &s in &sigmas {
        let d = pr.dual_value(&[s]).unwrap();
        for &p in &primal {
            assert!(d <= p + 1e-8, "Pd({s}) = {d} > {p}");
        }
    }
}

#[test]
fn other_critical_points_of_g_are_rejected() {
    let pr = gp_canonical_g().unwrap();
    let crit = univariate_global(&gp_g(), -10.0, 10.0).unwrap().critical;
    let ts: Vec<f64> = crit.iter().map(|c| c.x).collect();
    assert_eq!(ts.len(), 3);
    for (t, want) in ts.iter().zip([0.0, 1.0, 3.0]) {
        assert!((t - want).abs() < 1e-10);
    }

    let lambda = pr.operator_polynomial(0).unwrap();
    let a = pr.a().get(0, 0);
    let c = pr.operators()[0].c.get(0, 0);
    for (t, sigma_want, g_want) in [(0, -21, r(-20, 3)), (1, -31, r(-80, 3)), (3, -15, r(16, 3))] {
        let xi = lambda.eval_exact(&[Rational::from(t)]).unwrap();
        let sigma = pr.v().duality_map_exact(&[xi]).unwrap()[0];
        assert_eq!(sigma, Rational::from(sigma_want));
        let g = a.checked_add(&sigma.checked_mul(&c).unwrap()).unwrap();
        assert_eq!(g, g_want);
        let check = pr.in_positive_domain(&[sigma.to_f64()], 1e-9).unwrap();
        assert_eq!(check.psd, t == 3, "t = {t}");
    }
}

#[test]
fn complementary_dual_equality_on_planar_problem() {
    let pr = planar_problem();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let s = planar_feasible(&pr, &mut rng);
        let x = pr.recover_primal(&s).unwrap();
        let xi = pr.complementary_value(&x, &s).unwrap();
        let d = pr.dual_value(&s).unwrap();
        assert!((xi - d).abs() <= 1e-10 * (1.0 + d.abs()));
    }
}

#![allow(dead_code)]

use canondual::canonical::{CanonicalProblem, ConvexQuadV, QuadOperator, VComponent};
use canondual::polynomial::Rational;
use canondual::smallmat::SymMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn r(n: i128, d: i128) -> Rational {
    Rational::frac(n, d)
}

fn rational_matrix(rows: &[&[Rational]]) -> SymMatrix<Rational> {
    SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

/// A two-variable, two-operator instance with `G(0) = A` positive definite.
pub fn planar_problem() -> CanonicalProblem {
    let a = rational_matrix(&[&[r(2, 1), r(1, 2)], &[r(1, 2), r(3, 1)]]);
    let c1 = rational_matrix(&[&[r(1, 1), r(0, 1)], &[r(0, 1), r(-1, 2)]]);
    let c2 = rational_matrix(&[&[r(0, 1), r(1, 3)], &[r(1, 3), r(1, 1)]]);
    CanonicalProblem::new(
        a,
        vec![r(1, 1), r(-1, 1)],
        vec![
            QuadOperator::new(c1, vec![r(0, 1), r(1, 1)], r(-1, 1)),
            QuadOperator::new(c2, vec![r(1, 2), r(0, 1)], r(1, 4)),
        ],
        ConvexQuadV::new(vec![
            VComponent { a: r(1, 1), beta: r(0, 1) },
            VComponent { a: r(2, 1), beta: r(1, 1) },
        ])
        .unwrap(),
    )
    .unwrap()
}

/// Closed form of the scalar dual, written out by hand.
pub fn g_dual_closed_form(s: f64) -> f64 {
    (-s * s - 18.0 * s - 81.0) / 12.0 - (8.0 * s / 3.0 + 56.0).powi(2) / (4.0 * (s + 53.0 / 3.0)) - 2.0 * s
}

pub fn g_feasible(rng: &mut ChaCha8Rng) -> f64 {
    -53.0 / 3.0 + rng.gen_range(1e-2..60.0)
}

pub fn thc_feasible(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let s1 = rng.gen_range(-0.6..0.6);
    (s1, 25.0 * s1 * s1 - 2.6 + rng.gen_range(0.05..8.0))
}

pub fn planar_feasible(pr: &CanonicalProblem, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let s = vec![rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
        if pr.g_of(&s).unwrap().min_eigenvalue() > 0.2 {
            return s;
        }
    }
}

pub fn central_difference(f: &dyn Fn(&[f64]) -> f64, s: &[f64], k: usize) -> f64 {
    let h = 1e-6 * (1.0 + s[k].abs());
    let mut p = s.to_vec();
    let mut m = s.to_vec();
    p[k] += h;
    m[k] -= h;
    (f(&p) - f(&m)) / (2.0 * h)
}

/// Describes the first component where `grad` and central differences
/// differ by more than `1e-6` relative.
pub fn gradient_mismatch(f: &dyn Fn(&[f64]) -> f64, grad: &[f64], s: &[f64]) -> Option<String> {
    let scale = 1.0 + grad.iter().map(|g| g.abs()).fold(0.0, f64::max);
    grad.iter().enumerate().find_map(|(k, g)| {
        let fd = central_difference(f, s, k);
        ((g - fd).abs() > 1e-6 * scale).then(|| format!("at {s:?}, component {k}: {g} vs {fd}"))
    })
}

pub fn assert_gradient_matches(f: &dyn Fn(&[f64]) -> f64, grad: &[f64], s: &[f64]) {
    if let Some(msg) = gradient_mismatch(f, grad, s) {
        panic!("{msg}");
    }
}

pub fn midpoint_gap(f: &dyn Fn(&[f64]) -> f64, a: &[f64], b: &[f64]) -> f64 {
    let mid: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
    f(&mid) - 0.5 * (f(a) + f(b))
}

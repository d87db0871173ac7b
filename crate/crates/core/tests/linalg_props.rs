use canondual::smallmat::{dot, SymMatrix};
use proptest::prelude::*;

fn sym(n: usize) -> impl Strategy<Value = SymMatrix> {
    prop::collection::vec(-5.0f64..5.0, n * n).prop_map(move |v| SymMatrix::from_fn(n, |i, j| v[i * n + j]).unwrap())
}

fn any_sym() -> impl Strategy<Value = SymMatrix> {
    (1usize..=4).prop_flat_map(sym)
}

fn det(m: &SymMatrix) -> f64 {
    let n = m.dim();
    let mut a: Vec<Vec<f64>> = m.rows();
    let mut d = 1.0;
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        if a[p][k] == 0.0 {
            return 0.0;
        }
        if p != k {
            a.swap(p, k);
            d = -d;
        }
        d *= a[k][k];
        let pivot = a[k].clone();
        for row in a.iter_mut().skip(k + 1) {
            let f = row[k] / pivot[k];
            for (x, p) in row.iter_mut().zip(&pivot).skip(k) {
                *x -= f * p;
            }
        }
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn eigenvalues_match_trace_and_determinant(m in any_sym()) {
        let eig = m.eigenvalues();
        prop_assert_eq!(eig.len(), m.dim());
        prop_assert!(eig.windows(2).all(|w| w[0] <= w[1]));
        let scale = 1.0 + eig.iter().map(|e| e.abs()).fold(0.0, f64::max);
        prop_assert!((eig.iter().sum::<f64>() - m.trace()).abs() <= 1e-9 * scale);
        let prod: f64 = eig.iter().product();
        prop_assert!((prod - det(&m)).abs() <= 1e-8 * scale.powi(m.dim() as i32));
    }

    #[test]
    fn min_eigenvalue_bounds_the_rayleigh_quotient(m in any_sym(), v in prop::collection::vec(-1.0f64..1.0, 4)) {
        let v = &v[..m.dim()];
        let vv = dot(v, v);
        prop_assume!(vv > 1e-6);
        let rq = m.quad_form(v).unwrap() / vv;
        prop_assert!(rq >= m.min_eigenvalue() - 1e-9);
    }

    #[test]
    fn eigenvectors_diagonalize(m in any_sym()) {
        let (vals, vecs) = m.eigen();
        for (k, lam) in vals.iter().enumerate() {
            let v: Vec<f64> = vecs.iter().map(|row| row[k]).collect();
            prop_assert!((dot(&v, &v) - 1.0).abs() <= 1e-12);
            let mv = m.mul_vec(&v).unwrap();
            for (a, b) in mv.iter().zip(&v) {
                prop_assert!((a - lam * b).abs() <= 1e-8 * (1.0 + lam.abs()));
            }
        }
    }

    #[test]
    fn solve_recovers_the_right_hand_side(m in any_sym(), x in prop::collection::vec(-3.0f64..3.0, 4)) {
        let eig = m.eigenvalues();
        let smallest = eig.iter().map(|e| e.abs()).fold(f64::INFINITY, f64::min);
        prop_assume!(smallest > 1e-2);
        let x = &x[..m.dim()];
        let b = m.mul_vec(x).unwrap();
        let y = m.solve_sym(&b, 1e-9).unwrap();
        for (a, c) in x.iter().zip(&y) {
            prop_assert!((a - c).abs() <= 1e-6 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn gram_matrices_are_psd(v in prop::collection::vec(-3.0f64..3.0, 6)) {
        // B·Bᵀ with B 3×2
        let m = SymMatrix::from_fn(3, |i, j| v[2 * i] * v[2 * j] + v[2 * i + 1] * v[2 * j + 1]).unwrap();
        prop_assert!(m.is_psd(1e-9).psd);
    }
}

#[test]
fn known_small_matrix() {
    let m = SymMatrix::from_rows(&[vec![22.0 / 75.0, 0.5], vec![0.5, 1.0]]).unwrap();
    let eig = m.eigenvalues();
    assert!((eig[0] - 0.034_421_254_724_327_61).abs() < 1e-15);
    assert!((eig[1] - 1.258_912_078_609_006).abs() < 1e-15);
}

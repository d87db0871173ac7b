use super::{r, ri, BenchmarkError, IdentityCheck, OracleCheck, OracleSettings, SolveReport};
use crate::canonical::{scalar_problem, CanonicalProblem};
use crate::dual_solver::{solve_canonical, SolverConfig};
use crate::oracle::{cauchy_root_bound, univariate_global, CriticalPoint};
use crate::polynomial::{MultiPoly, PolyError, Rational};

/// `(s, t) = (x + y, 2x − 3y)`
pub fn gp_transform() -> [[Rational; 2]; 2] {
    [[ri(1), ri(1)], [ri(2), ri(-3)]]
}

/// `(x, y) = ((3s + t)/5, (2s − t)/5)`
pub fn gp_inverse_transform() -> [[Rational; 2]; 2] {
    [[r(3, 5), r(1, 5)], [r(2, 5), r(-1, 5)]]
}

/// Goldstein-Price in expanded form, built from its factored definition.
pub fn gp_objective() -> MultiPoly {
    build_gp().expect("fixed small coefficients cannot overflow")
}

fn build_gp() -> Result<MultiPoly, PolyError> {
    let x = MultiPoly::var(2, 0)?;
    let y = MultiPoly::var(2, 1)?;
    let lin = |a: i128, b: i128| -> Result<MultiPoly, PolyError> { x.scale(&ri(a))?.add(&y.scale(&ri(b))?) };
    let quad = |c: i128, cx: i128, cy: i128, cxx: i128, cxy: i128, cyy: i128| -> Result<MultiPoly, PolyError> {
        x.scale(&ri(cx))?
            .add(&y.scale(&ri(cy))?)?
            .add(&x.pow(2)?.scale(&ri(cxx))?)?
            .add(&x.mul(&y)?.scale(&ri(cxy))?)?
            .add(&y.pow(2)?.scale(&ri(cyy))?)?
            .add_constant(ri(c))
    };
    let first = lin(1, 1)?
        .add_constant(ri(1))?
        .pow(2)?
        .mul(&quad(19, -14, -14, 3, 6, 3)?)?
        .add_constant(ri(1))?;
    let second = lin(2, -3)?
        .pow(2)?
        .mul(&quad(18, -32, 48, 12, -36, 27)?)?
        .add_constant(ri(30))?;
    first.mul(&second)
}

/// `h(s) = 1 + (s + 1)²(19 − 14s + 3s²)`
pub fn gp_h() -> MultiPoly {
    (|| -> Result<MultiPoly, PolyError> {
        let s = MultiPoly::var(1, 0)?;
        let quad = MultiPoly::univariate(&[ri(19), ri(-14), ri(3)])?;
        s.add_constant(ri(1))?.pow(2)?.mul(&quad)?.add_constant(ri(1))
    })()
    .expect("fixed small coefficients cannot overflow")
}

/// `g(t) = 30 + t²(18 − 16t + 3t²)`
pub fn gp_g() -> MultiPoly {
    (|| -> Result<MultiPoly, PolyError> {
        let t = MultiPoly::var(1, 0)?;
        let quad = MultiPoly::univariate(&[ri(18), ri(-16), ri(3)])?;
        t.pow(2)?.mul(&quad)?.add_constant(ri(30))
    })()
    .expect("fixed small coefficients cannot overflow")
}

/// Interval guaranteed to contain every real critical point of `p`, and at
/// least `[−10, 10]`.
fn critical_interval(p: &MultiPoly) -> Result<(f64, f64), BenchmarkError> {
    let dp = p.partial_derivative(0)?;
    let b = cauchy_root_bound(&dp).unwrap_or(0.0).max(10.0);
    Ok((-b, b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpDecomposition {
    pub t: [[Rational; 2]; 2],
    pub t_inv: [[Rational; 2]; 2],
    pub h: MultiPoly,
    pub g: MultiPoly,
    /// Global minima of `h` and `g`, both verified positive.
    pub h_min: f64,
    pub g_min: f64,
}

fn to_rows(m: &[[Rational; 2]; 2]) -> Vec<Vec<Rational>> {
    m.iter().map(|row| row.to_vec()).collect()
}

/// `h(s)·g(t)` as a polynomial in `(s, t)`.
pub fn gp_product_st() -> Result<MultiPoly, BenchmarkError> {
    Ok(gp_h().embed(2, &[0])?.mul(&gp_g().embed(2, &[1])?)?)
}

/// Checks `h(x + y)·g(2x − 3y) = f1(x, y)` exactly.
pub fn gp_product_identity() -> Result<IdentityCheck, BenchmarkError> {
    let zero = vec![Rational::ZERO; 2];
    let composed = gp_product_st()?.substitute_linear(&to_rows(&gp_transform()), &zero)?;
    Ok(IdentityCheck::compare("h(s)g(t) = f1", &composed, &gp_objective()))
}

/// Checks `T⁻¹·T = I` exactly.
pub fn gp_inverse_identity() -> Result<bool, BenchmarkError> {
    let (t, ti) = (gp_transform(), gp_inverse_transform());
    for i in 0..2 {
        for j in 0..2 {
            let v = ti[i][0].checked_mul(&t[0][j])?.checked_add(&ti[i][1].checked_mul(&t[1][j])?)?;
            if v != if i == j { Rational::ONE } else { Rational::ZERO } {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Builds the decoupled form and runs its self-checks: the product identity,
/// the exact inverse, and strict positivity of both factor minima (without
/// which `min h·g = (min h)(min g)` does not follow).
pub fn gp_decompose() -> Result<GpDecomposition, BenchmarkError> {
    gp_product_identity()?.into_result()?;
    if !gp_inverse_identity()? {
        return Err(BenchmarkError::Decoupling("T⁻¹·T is not the identity".into()));
    }
    let (h, g) = (gp_h(), gp_g());
    let (hl, hh) = critical_interval(&h)?;
    let (gl, gh) = critical_interval(&g)?;
    let h_min = univariate_global(&h, hl, hh)?.value;
    let g_min = univariate_global(&g, gl, gh)?.value;
    if !(h_min > 0.0 && g_min > 0.0) {
        return Err(BenchmarkError::Decoupling(format!(
            "factor minima must be positive (min h = {h_min}, min g = {g_min})"
        )));
    }
    Ok(GpDecomposition {
        t: gp_transform(),
        t_inv: gp_inverse_transform(),
        h,
        g,
        h_min,
        g_min,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HMinimum {
    pub s_star: f64,
    pub h_star: f64,
    /// All critical points of `h`, ascending.
    pub critical: Vec<CriticalPoint>,
}

/// Minimizes `h` by enumerating every root of `h'`. There are three
/// (−1, 1, 2); the global minimum is at −1.
pub fn gp_solve_h() -> Result<HMinimum, BenchmarkError> {
    let h = gp_h();
    let (lo, hi) = critical_interval(&h)?;
    let m = univariate_global(&h, lo, hi)?;
    if let Some(bad) = m.critical.iter().find(|c| !(c.value > 0.0)) {
        return Err(BenchmarkError::Decoupling(format!(
            "h({}) = {} is not positive",
            bad.x, bad.value
        )));
    }
    Ok(HMinimum {
        s_star: m.x,
        h_star: m.value,
        critical: m.critical,
    })
}

/// `g(t) = V(Λ(t)) − U(t)` with `Λ(t) = t² − (8/3)t − 2`, `V(ξ) = 3ξ² − 9ξ`,
/// `U(t) = −(53/3)t² + 56t`. The canonical form is verified against `g`.
pub fn gp_canonical_g() -> Result<CanonicalProblem, BenchmarkError> {
    let pr = scalar_problem(r(106, 3), ri(56), ri(2), r(-8, 3), ri(-2), ri(3), ri(-9))?;
    IdentityCheck::compare("V(Λ(t)) − U(t) = g(t)", &pr.primal_polynomial()?, &gp_g()).into_result()?;
    Ok(pr)
}

pub fn gp_solve(cfg: &SolverConfig) -> Result<SolveReport, BenchmarkError> {
    gp_solve_with(cfg, Some(&OracleSettings::goldstein_price()))
}

pub fn gp_solve_with(cfg: &SolverConfig, oracle: Option<&OracleSettings>) -> Result<SolveReport, BenchmarkError> {
    let dec = gp_decompose()?;
    let hm = gp_solve_h()?;
    let g_problem = gp_canonical_g()?;
    let rep = solve_canonical(&g_problem, cfg)?;
    let (s, t) = (hm.s_star, rep.x_bar[0]);
    let ti = dec.t_inv;
    let x_star = vec![
        ti[0][0].to_f64() * s + ti[0][1].to_f64() * t,
        ti[1][0].to_f64() * s + ti[1][1].to_f64() * t,
    ];
    let value = dec.h.eval(&[s])? * dec.g.eval(&[t])?;
    let oracle = oracle
        .map(|o| OracleCheck::run(&gp_objective(), o, value))
        .transpose()?;
    Ok(SolveReport {
        problem_name: "gp",
        transformed_solution: vec![s, t],
        x_star,
        value,
        dual_report: rep,
        oracle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objective_values() {
        let f1 = gp_objective();
        assert_eq!(f1.eval_exact(&[ri(0), ri(-1)]).unwrap(), ri(3));
        assert_eq!(f1.eval(&[0.0, -1.0]).unwrap(), 3.0);
    }

    #[test]
    fn factor_expansions() {
        let h = MultiPoly::univariate(&[ri(20), ri(24), ri(-6), ri(-8), ri(3)]).unwrap();
        let g = MultiPoly::univariate(&[ri(30), ri(0), ri(18), ri(-16), ri(3)]).unwrap();
        assert_eq!(gp_h(), h);
        assert_eq!(gp_g(), g);
        assert_eq!(h.eval_exact(&[ri(-1)]).unwrap(), ri(1));
    }

    #[test]
    fn decomposition_checks_pass() {
        assert!(gp_product_identity().unwrap().holds);
        assert!(gp_inverse_identity().unwrap());
        let d = gp_decompose().unwrap();
        assert!((d.h_min - 1.0).abs() < 1e-12);
        assert!((d.g_min - 3.0).abs() < 1e-12);
    }

    #[test]
    fn h_has_three_critical_points() {
        let m = gp_solve_h().unwrap();
        let xs: Vec<f64> = m.critical.iter().map(|c| c.x).collect();
        assert_eq!(xs.len(), 3);
        for (got, want) in xs.iter().zip([-1.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-10);
        }
        for (c, want) in m.critical.iter().zip([1.0, 33.0, 28.0]) {
            assert!((c.value - want).abs() < 1e-9);
            assert!(c.derivative.abs() <= 1e-10);
        }
        assert!((m.s_star + 1.0).abs() <= 1e-10);
        assert!((m.h_star - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn canonical_g_problem() {
        let p = gp_canonical_g().unwrap();
        assert!((p.primal_value(&[3.0]).unwrap() - 3.0).abs() < 1e-12);
        assert!((p.dual_value(&[-15.0]).unwrap() - 3.0).abs() < 1e-12);
        let edge = p.in_positive_domain(&[-53.0 / 3.0], 1e-9).unwrap();
        assert!(edge.margin.abs() < 1e-9);
    }

    #[test]
    fn inverse_transform_of_reported_point() {
        let ti = gp_inverse_transform();
        let (s, t) = (ri(-1), ri(3));
        let x = ti[0][0].checked_mul(&s).unwrap().checked_add(&ti[0][1].checked_mul(&t).unwrap()).unwrap();
        let y = ti[1][0].checked_mul(&s).unwrap().checked_add(&ti[1][1].checked_mul(&t).unwrap()).unwrap();
        assert_eq!((x, y), (ri(0), ri(-1)));
    }

    #[test]
    fn full_pipeline() {
        let rep = gp_solve_with(&SolverConfig::default(), None).unwrap();
        assert!((rep.x_star[0]).abs() < 1e-8);
        assert!((rep.x_star[1] + 1.0).abs() < 1e-8);
        assert!((rep.value - 3.0).abs() < 1e-8);
        assert!((rep.dual_report.sigma_star[0] + 15.0).abs() < 1e-6);
    }
}

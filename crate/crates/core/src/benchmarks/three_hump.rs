use super::{r, ri, BenchmarkError, IdentityCheck, OracleCheck, OracleSettings, SolveReport};
use crate::dual_solver::{
    classify, find_interior_start, maximize_concave, AscentStatus, CriticalReport, Objective, SolverConfig,
    SolverError,
};
use crate::polynomial::{MultiPoly, PolyError, Rational};
use crate::smallmat::SymMatrix;

fn poly(arity: usize, terms: &[(Rational, &[u16])]) -> Result<MultiPoly, PolyError> {
    MultiPoly::from_terms(arity, terms.iter().map(|(c, e)| (*c, *e)))
}

/// `f2 = 2x² − (21/20)x⁴ + (1/6)x⁶ + xy + y²`
pub fn thc_objective() -> MultiPoly {
    poly(
        2,
        &[
            (ri(2), &[2, 0]),
            (r(-21, 20), &[4, 0]),
            (r(1, 6), &[6, 0]),
            (ri(1), &[1, 1]),
            (ri(1), &[0, 2]),
        ],
    )
    .expect("fixed small coefficients cannot overflow")
}

/// The two sides of a split `k·f = V(Λ) − U`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalSplit {
    pub scaled_objective: MultiPoly,
    pub v_of_lambda: MultiPoly,
    pub u: MultiPoly,
}

impl CanonicalSplit {
    pub fn check(&self, name: &'static str) -> Result<IdentityCheck, BenchmarkError> {
        let rhs = self.v_of_lambda.sub(&self.u)?;
        Ok(IdentityCheck::compare(name, &self.scaled_objective, &rhs))
    }
}

/// `Λ1 = x³ − (16/5)x` in `(x, y)`.
pub fn thc_lambda1() -> Result<MultiPoly, PolyError> {
    poly(2, &[(ri(1), &[3, 0]), (r(-16, 5), &[1, 0])])
}

/// `U1 = −(1/10)x⁴ − (44/25)x² − 6xy − 6y²`
pub fn thc_u1() -> Result<MultiPoly, PolyError> {
    poly(
        2,
        &[
            (r(-1, 10), &[4, 0]),
            (r(-44, 25), &[2, 0]),
            (ri(-6), &[1, 1]),
            (ri(-6), &[0, 2]),
        ],
    )
}

/// `6·f2 = Λ1² − U1` over `(x, y)`.
pub fn thc_level1_split() -> Result<CanonicalSplit, BenchmarkError> {
    Ok(CanonicalSplit {
        scaled_objective: thc_objective().scale(&ri(6))?,
        v_of_lambda: thc_lambda1()?.pow(2)?,
        u: thc_u1()?,
    })
}

pub fn thc_level1_identity() -> Result<IdentityCheck, BenchmarkError> {
    thc_level1_split()?.check("6·f2 = V1(Λ1) − U1")
}

/// First complementary function over `(x, y, ς1)`:
/// `(Λ1·ς1 − ς1²/4 − U1) / 6`.
pub fn thc_first_complementary() -> Result<MultiPoly, BenchmarkError> {
    let s1 = MultiPoly::var(3, 2)?;
    let lambda1 = thc_lambda1()?.embed(3, &[0, 1])?;
    let u1 = thc_u1()?.embed(3, &[0, 1])?;
    let inner = lambda1
        .mul(&s1)?
        .sub(&s1.pow(2)?.scale(&r(1, 4))?)?
        .sub(&u1)?;
    Ok(inner.scale(&r(1, 6))?)
}

/// `Λ2 = x² + 5ς1x` over `(x, y, ς1)`.
pub fn thc_lambda2() -> Result<MultiPoly, PolyError> {
    poly(3, &[(ri(1), &[2, 0, 0]), (ri(5), &[1, 0, 1])])
}

/// `U2 = (25ς1² − 88/5)x² + 32ς1x − 60xy − 60y² + (5/2)ς1²`
pub fn thc_u2() -> Result<MultiPoly, PolyError> {
    poly(
        3,
        &[
            (ri(25), &[2, 0, 2]),
            (r(-88, 5), &[2, 0, 0]),
            (ri(32), &[1, 0, 1]),
            (ri(-60), &[1, 1, 0]),
            (ri(-60), &[0, 2, 0]),
            (r(5, 2), &[0, 0, 2]),
        ],
    )
}

/// `60·f2(ς1, x, y) = Λ2² − U2` over `(x, y, ς1)`.
pub fn thc_level2_split() -> Result<CanonicalSplit, BenchmarkError> {
    Ok(CanonicalSplit {
        scaled_objective: thc_first_complementary()?.scale(&ri(60))?,
        v_of_lambda: thc_lambda2()?.pow(2)?,
        u: thc_u2()?,
    })
}

pub fn thc_level2_identity() -> Result<IdentityCheck, BenchmarkError> {
    thc_level2_split()?.check("60·f2(ς1, x, y) = V2(Λ2) − U2")
}

/// Final complementary function over `(x, y, ς1, ς2)`:
/// `q x² + y² + xy + (ς1ς2/12 − 8ς1/15)x − ς1²/24 − ς2²/240`
/// with `q = 22/75 − 5ς1²/12 + ς2/60`.
pub fn thc_complementary_poly() -> Result<MultiPoly, BenchmarkError> {
    Ok(poly(
        4,
        &[
            (r(22, 75), &[2, 0, 0, 0]),
            (r(-5, 12), &[2, 0, 2, 0]),
            (r(1, 60), &[2, 0, 0, 1]),
            (ri(1), &[0, 2, 0, 0]),
            (ri(1), &[1, 1, 0, 0]),
            (r(1, 12), &[1, 0, 1, 1]),
            (r(-8, 15), &[1, 0, 1, 0]),
            (r(-1, 24), &[0, 0, 2, 0]),
            (r(-1, 240), &[0, 0, 0, 2]),
        ],
    )?)
}

/// Checks the final complementary function against
/// `(Λ2·ς2 − ς2²/4 − U2) / 60`.
pub fn thc_complementary_identity() -> Result<IdentityCheck, BenchmarkError> {
    let s2 = MultiPoly::var(4, 3)?;
    let lambda2 = thc_lambda2()?.embed(4, &[0, 1, 2])?;
    let u2 = thc_u2()?.embed(4, &[0, 1, 2])?;
    let built = lambda2
        .mul(&s2)?
        .sub(&s2.pow(2)?.scale(&r(1, 4))?)?
        .sub(&u2)?
        .scale(&r(1, 60))?;
    Ok(IdentityCheck::compare(
        "Ξ = (Λ2ς2 − V2*(ς2) − U2)/60",
        &built,
        &thc_complementary_poly()?,
    ))
}

fn q(s1: f64, s2: f64) -> f64 {
    22.0 / 75.0 - 5.0 * s1 * s1 / 12.0 + s2 / 60.0
}

/// Closed-form dual of the Three-Hump problem.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ThcDual;

impl ThcDual {
    /// `[[q, 1/2], [1/2, 1]]`, half the Hessian of `Ξ` in `(x, y)`.
    pub fn feasibility_matrix(&self, s1: f64, s2: f64) -> SymMatrix {
        SymMatrix::from_rows(&[vec![q(s1, s2), 0.5], vec![0.5, 1.0]]).expect("2×2 symmetric")
    }

    pub fn margin(&self, s1: f64, s2: f64) -> f64 {
        self.feasibility_matrix(s1, s2).min_eigenvalue()
    }

    /// `ς2 ≥ 25ς1² − 13/5`
    pub fn is_feasible(&self, s1: f64, s2: f64) -> bool {
        s2 >= 25.0 * s1 * s1 - 13.0 / 5.0
    }

    pub fn value_unchecked(&self, s1: f64, s2: f64) -> f64 {
        let s1sq = s1 * s1;
        let num = -1250.0 * s1sq * s1sq - 50.0 * s1sq * (31.0 * s2 - 105.0) + s2 * s2 * (5.0 * s2 + 13.0);
        let den = 240.0 * (125.0 * s1sq - 5.0 * s2 - 13.0);
        num / den
    }

    /// Requires strict feasibility (negative denominator).
    pub fn value(&self, s1: f64, s2: f64) -> Result<f64, BenchmarkError> {
        if !(125.0 * s1 * s1 - 5.0 * s2 - 13.0 < 0.0) {
            return Err(BenchmarkError::Domain(s1, s2));
        }
        Ok(self.value_unchecked(s1, s2))
    }
}

impl ThcDual {
    /// `∂Ξ/∂ς` at the equilibrium `(x̄, ȳ)`, which equals the dual gradient.
    pub fn gradient(&self, s1: f64, s2: f64) -> Result<[f64; 2], BenchmarkError> {
        self.value(s1, s2)?;
        let (x, _) = thc_equilibrium(s1, s2)?;
        Ok([
            -5.0 * s1 * x * x / 6.0 + (s2 / 12.0 - 8.0 / 15.0) * x - s1 / 12.0,
            x * x / 60.0 + s1 * x / 12.0 - s2 / 120.0,
        ])
    }
}

pub fn thc_dual(s1: f64, s2: f64) -> Result<f64, BenchmarkError> {
    ThcDual.value(s1, s2)
}

/// Final complementary function evaluated in floating point.
pub fn thc_complementary(x: f64, y: f64, s1: f64, s2: f64) -> f64 {
    q(s1, s2) * x * x + y * y + x * y + (s1 * s2 / 12.0 - 8.0 * s1 / 15.0) * x
        - s1 * s1 / 24.0
        - s2 * s2 / 240.0
}

/// Solves `[[2q, 1], [1, 2]]·(x, y) = (8ς1/15 − ς1ς2/12, 0)`.
pub fn thc_equilibrium(s1: f64, s2: f64) -> Result<(f64, f64), BenchmarkError> {
    let det = 4.0 * q(s1, s2) - 1.0;
    if det.abs() <= 1e-14 {
        return Err(BenchmarkError::SingularSystem);
    }
    let rhs = 8.0 * s1 / 15.0 - s1 * s2 / 12.0;
    Ok((2.0 * rhs / det, -rhs / det))
}

/// The dual obtained by eliminating `(x, y)` numerically.
pub fn thc_dual_by_elimination(s1: f64, s2: f64) -> Result<f64, BenchmarkError> {
    let (x, y) = thc_equilibrium(s1, s2)?;
    Ok(thc_complementary(x, y, s1, s2))
}

pub fn thc_solve(cfg: &SolverConfig) -> Result<SolveReport, BenchmarkError> {
    thc_solve_with(cfg, Some(&OracleSettings::three_hump()))
}

pub fn thc_solve_with(cfg: &SolverConfig, oracle: Option<&OracleSettings>) -> Result<SolveReport, BenchmarkError> {
    thc_level1_identity()?.into_result()?;
    thc_level2_identity()?.into_result()?;
    thc_complementary_identity()?.into_result()?;

    let value = |s: &[f64]| ThcDual.value(s[0], s[1]).ok();
    let margin = |s: &[f64]| ThcDual.margin(s[0], s[1]);
    let start = find_interior_start(&value, &margin, 2, cfg.interior_margin)?;
    let obj = Objective {
        value: &value,
        gradient: None,
        margin: &margin,
    };
    let (ascent, converged) = match maximize_concave(&obj, &start, cfg) {
        Ok(a) => {
            let c = a.status == AscentStatus::Converged;
            (a, c)
        }
        Err(SolverError::LineSearchStalled { state }) => (*state, false),
        Err(e) => return Err(e.into()),
    };
    let (s1, s2) = (ascent.sigma[0], ascent.sigma[1]);
    let (x, y) = thc_equilibrium(s1, s2)?;
    let primal = thc_objective().eval(&[x, y])?;
    let complementary = thc_complementary(x, y, s1, s2);
    let dual = ascent.value;
    let gap = (primal - complementary).abs().max((complementary - dual).abs());
    let certificate = classify(converged, ascent.grad_norm, ascent.margin, gap, primal, cfg);
    let rep = CriticalReport {
        sigma_star: ascent.sigma.clone(),
        x_bar: vec![x, y],
        primal,
        complementary,
        dual,
        gap,
        grad_norm: ascent.grad_norm,
        psd_margin: ascent.margin,
        certificate,
        iterations: ascent.iterations,
    };
    let oracle = oracle
        .map(|o| OracleCheck::run(&thc_objective(), o, primal))
        .transpose()?;
    Ok(SolveReport {
        problem_name: "thc",
        transformed_solution: vec![s1, s2],
        x_star: vec![x, y],
        value: primal,
        dual_report: rep,
        oracle,
    })
}

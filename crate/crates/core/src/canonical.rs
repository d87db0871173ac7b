//! Canonical duality for quadratic geometric operators.
//!
//! The primal objective is
//!
//! ```text
//! P(x) = V(Λ(x)) − U(x),   U(x) = −½ xᵀA x + xᵀf,
//! Λ_k(x) = ½ xᵀC_k x + xᵀb_k + c_k,   V(ξ) = Σ_k a_k ξ_k² + β_k ξ_k
//! ```
//!
//! With `G(ς) = A + Σ ς_k C_k` and `F(ς) = f − Σ ς_k b_k` the dual function is
//!
//! ```text
//! Pᵈ(ς) = −½ Fᵀ G⁻¹ F + Σ ς_k c_k − V*(ς)
//! ```
//!
//! and any critical point of Pᵈ with `G(ς) ⪰ 0` recovers the global primal
//! minimizer `x̄ = G⁻¹F`.
//!
//! Problem data is held exactly as rationals; a float copy is cached at
//! construction for evaluation.

use thiserror::Error;

use crate::polynomial::{MultiPoly, PolyError, Rational};
use crate::smallmat::{dot, LinalgError, PsdCheck, SymMatrix, MAX_DIM};

/// Relative residual allowed when checking `F(ς) ∈ Col(G(ς))`.
pub const COLUMN_SPACE_TOL: f64 = 1e-9;

/// Relative bound on each leg of the complementary-dual equality.
pub const GAP_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CanonicalError {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("G(ς) is singular at this dual point")]
    SingularG,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<(), CanonicalError> {
    if expected != got {
        return Err(CanonicalError::Dimension {
            what,
            expected,
            got,
        });
    }
    Ok(())
}

/// `Λ_k(x) = ½ xᵀC x + xᵀb + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadOperator {
    pub c: SymMatrix<Rational>,
    pub b: Vec<Rational>,
    pub offset: Rational,
}

impl QuadOperator {
    pub fn new(c: SymMatrix<Rational>, b: Vec<Rational>, offset: Rational) -> Self {
        QuadOperator { c, b, offset }
    }
}

/// One diagonal component `a ξ² + β ξ` of the canonical function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VComponent {
    pub a: Rational,
    pub beta: Rational,
}

/// Separable strictly convex quadratic `V(ξ) = Σ a_k ξ_k² + β_k ξ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexQuadV {
    components: Vec<VComponent>,
    float: Vec<(f64, f64)>,
}

impl ConvexQuadV {
    pub fn new(components: Vec<VComponent>) -> Result<Self, CanonicalError> {
        if let Some(k) = components.iter().position(|c| !c.a.is_positive()) {
            return Err(CanonicalError::Invalid(format!("a[{k}] must be > 0")));
        }
        let float = components.iter().map(|c| (c.a.to_f64(), c.beta.to_f64())).collect();
        Ok(ConvexQuadV { components, float })
    }

    pub fn components(&self) -> &[VComponent] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn value(&self, xi: &[f64]) -> f64 {
        self.float.iter().zip(xi).map(|((a, b), x)| a * x * x + b * x).sum()
    }

    /// Duality mapping `ς = ∇V(ξ)`.
    pub fn duality_map(&self, xi: &[f64]) -> Vec<f64> {
        self.float.iter().zip(xi).map(|((a, b), x)| 2.0 * a * x + b).collect()
    }

    /// Legendre conjugate `V*(ς) = Σ (ς_k − β_k)² / (4 a_k)`.
    pub fn conjugate_value(&self, sigma: &[f64]) -> f64 {
        self.float
            .iter()
            .zip(sigma)
            .map(|((a, b), s)| (s - b).powi(2) / (4.0 * a))
            .sum()
    }

    /// `∇V*(ς)`, the inverse of the duality mapping.
    pub fn conjugate_gradient(&self, sigma: &[f64]) -> Vec<f64> {
        self.float
            .iter()
            .zip(sigma)
            .map(|((a, b), s)| (s - b) / (2.0 * a))
            .collect()
    }

    pub fn duality_map_exact(&self, xi: &[Rational]) -> Result<Vec<Rational>, PolyError> {
        self.components
            .iter()
            .zip(xi)
            .map(|(c, x)| Rational::integer(2).checked_mul(&c.a)?.checked_mul(x)?.checked_add(&c.beta))
            .collect()
    }

    pub fn conjugate_gradient_exact(&self, sigma: &[Rational]) -> Result<Vec<Rational>, PolyError> {
        self.components
            .iter()
            .zip(sigma)
            .map(|(c, s)| s.checked_sub(&c.beta)?.checked_div(&Rational::integer(2).checked_mul(&c.a)?))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct FloatOperator {
    c: SymMatrix<f64>,
    b: Vec<f64>,
    offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalProblem {
    n: usize,
    a: SymMatrix<Rational>,
    f: Vec<Rational>,
    ops: Vec<QuadOperator>,
    v: ConvexQuadV,
    a_float: SymMatrix<f64>,
    f_float: Vec<f64>,
    ops_float: Vec<FloatOperator>,
}

/// The two legs of the complementary-dual equality `P(x) = Ξ(x,ς) = Pᵈ(ς)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityGap {
    /// `|P(x) − Ξ(x, ς)|`
    pub primal_complementary: f64,
    /// `|Ξ(x, ς) − Pᵈ(ς)|`
    pub complementary_dual: f64,
}

impl DualityGap {
    pub fn max(&self) -> f64 {
        self.primal_complementary.max(self.complementary_dual)
    }
}

/// A dual vector together with the smallest eigenvalue of `G(ς)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPoint {
    pub sigma: Vec<f64>,
    pub g_margin: f64,
}

impl DualPoint {
    pub fn new(pr: &CanonicalProblem, sigma: Vec<f64>) -> Result<Self, CanonicalError> {
        let g_margin = pr.g_of(&sigma)?.min_eigenvalue();
        Ok(DualPoint { sigma, g_margin })
    }
}

impl CanonicalProblem {
    pub fn new(
        a: SymMatrix<Rational>,
        f: Vec<Rational>,
        ops: Vec<QuadOperator>,
        v: ConvexQuadV,
    ) -> Result<Self, CanonicalError> {
        let n = a.dim();
        if n == 0 {
            return Err(CanonicalError::Invalid("n must be >= 1".into()));
        }
        check_len("f", n, f.len())?;
        if ops.is_empty() {
            return Err(CanonicalError::Invalid("at least one operator is required".into()));
        }
        if ops.len() > MAX_DIM {
            return Err(CanonicalError::Invalid(format!(
                "at most {MAX_DIM} dual components are supported"
            )));
        }
        check_len("V components", ops.len(), v.len())?;
        for op in &ops {
            check_len("operator C", n, op.c.dim())?;
            check_len("operator b", n, op.b.len())?;
        }
        let ops_float = ops
            .iter()
            .map(|op| FloatOperator {
                c: op.c.map(|r| r.to_f64()),
                b: op.b.iter().map(Rational::to_f64).collect(),
                offset: op.offset.to_f64(),
            })
            .collect();
        Ok(CanonicalProblem {
            n,
            a_float: a.map(|r| r.to_f64()),
            f_float: f.iter().map(Rational::to_f64).collect(),
            a,
            f,
            ops,
            v,
            ops_float,
        })
    }

    /// Primal dimension `n`.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Dual dimension `m`.
    pub fn num_dual(&self) -> usize {
        self.ops.len()
    }

    pub fn a(&self) -> &SymMatrix<Rational> {
        &self.a
    }

    pub fn f(&self) -> &[Rational] {
        &self.f
    }

    pub fn operators(&self) -> &[QuadOperator] {
        &self.ops
    }

    pub fn v(&self) -> &ConvexQuadV {
        &self.v
    }

    fn check_x(&self, x: &[f64]) -> Result<(), CanonicalError> {
        check_len("x", self.n, x.len())
    }

    fn check_sigma(&self, sigma: &[f64]) -> Result<(), CanonicalError> {
        check_len("sigma", self.ops.len(), sigma.len())
    }

    /// `ξ = Λ(x)`.
    pub fn lambda_eval(&self, x: &[f64]) -> Result<Vec<f64>, CanonicalError> {
        self.check_x(x)?;
        self.ops_float
            .iter()
            .map(|op| Ok(0.5 * op.c.quad_form(x)? + dot(x, &op.b) + op.offset))
            .collect()
    }

    /// `U(x) = −½ xᵀA x + xᵀf`.
    pub fn u_value(&self, x: &[f64]) -> Result<f64, CanonicalError> {
        self.check_x(x)?;
        Ok(-0.5 * self.a_float.quad_form(x)? + dot(x, &self.f_float))
    }

    pub fn primal_value(&self, x: &[f64]) -> Result<f64, CanonicalError> {
        let xi = self.lambda_eval(x)?;
        Ok(self.v.value(&xi) - self.u_value(x)?)
    }

    pub fn g_of(&self, sigma: &[f64]) -> Result<SymMatrix<f64>, CanonicalError> {
        self.check_sigma(sigma)?;
        let mut g = self.a_float.clone();
        for (op, s) in self.ops_float.iter().zip(sigma) {
            g = g.add_scaled(&op.c, *s)?;
        }
        Ok(g)
    }

    pub fn f_of(&self, sigma: &[f64]) -> Result<Vec<f64>, CanonicalError> {
        self.check_sigma(sigma)?;
        let mut f = self.f_float.clone();
        for (op, s) in self.ops_float.iter().zip(sigma) {
            for (fi, bi) in f.iter_mut().zip(&op.b) {
                *fi -= s * bi;
            }
        }
        Ok(f)
    }

    /// `x̄(ς)` solving `G(ς) x = F(ς)`.
    pub fn recover_primal(&self, sigma: &[f64]) -> Result<Vec<f64>, CanonicalError> {
        let g = self.g_of(sigma)?;
        let f = self.f_of(sigma)?;
        Ok(g.solve_sym(&f, COLUMN_SPACE_TOL)?)
    }

    fn offset_term(&self, sigma: &[f64]) -> f64 {
        self.ops_float.iter().zip(sigma).map(|(op, s)| op.offset * s).sum()
    }

    /// `Pᵈ(ς)`; fails with a column-space violation outside `S_a`.
    pub fn dual_value(&self, sigma: &[f64]) -> Result<f64, CanonicalError> {
        let x = self.recover_primal(sigma)?;
        let f = self.f_of(sigma)?;
        Ok(-0.5 * dot(&f, &x) + self.offset_term(sigma) - self.v.conjugate_value(sigma))
    }

    /// `∇Pᵈ(ς)_k = Λ_k(x̄(ς)) − ∂V*/∂ς_k`. Requires nonsingular `G(ς)`.
    pub fn dual_gradient(&self, sigma: &[f64]) -> Result<Vec<f64>, CanonicalError> {
        let g = self.g_of(sigma)?;
        let eig = g.eigenvalues();
        let biggest = eig.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        let smallest = eig.iter().fold(f64::INFINITY, |m, l| m.min(l.abs()));
        if smallest <= 1e-12 * (1.0 + biggest) {
            return Err(CanonicalError::SingularG);
        }
        let x = g.solve_sym(&self.f_of(sigma)?, COLUMN_SPACE_TOL)?;
        let xi = self.lambda_eval(&x)?;
        let dv = self.v.conjugate_gradient(sigma);
        Ok(xi.iter().zip(&dv).map(|(a, b)| a - b).collect())
    }

    /// `Ξ(x, ς) = Λ(x)ᵀς − V*(ς) − U(x)`.
    pub fn complementary_value(&self, x: &[f64], sigma: &[f64]) -> Result<f64, CanonicalError> {
        self.check_sigma(sigma)?;
        let xi = self.lambda_eval(x)?;
        Ok(dot(&xi, sigma) - self.v.conjugate_value(sigma) - self.u_value(x)?)
    }

    /// PSD test of `G(ς)`; the margin is its smallest eigenvalue.
    pub fn in_positive_domain(&self, sigma: &[f64], tol: f64) -> Result<PsdCheck, CanonicalError> {
        Ok(self.g_of(sigma)?.is_psd(tol))
    }

    pub fn duality_gap(&self, x: &[f64], sigma: &[f64]) -> Result<DualityGap, CanonicalError> {
        let p = self.primal_value(x)?;
        let xi = self.complementary_value(x, sigma)?;
        let d = self.dual_value(sigma)?;
        Ok(DualityGap {
            primal_complementary: (p - xi).abs(),
            complementary_dual: (xi - d).abs(),
        })
    }

    /// `Λ_k` as an exact polynomial in `x`.
    pub fn operator_polynomial(&self, k: usize) -> Result<MultiPoly, CanonicalError> {
        let op = self.ops.get(k).ok_or_else(|| {
            CanonicalError::Invalid(format!("operator index {k} out of range"))
        })?;
        let half = Rational::frac(1, 2);
        let quad = quadratic_form_poly(&op.c, self.n)?.scale(&half)?;
        let lin = linear_form_poly(&op.b, self.n)?;
        Ok(quad.add(&lin)?.add_constant(op.offset)?)
    }

    /// The primal objective `V(Λ(x)) − U(x)` expanded exactly.
    pub fn primal_polynomial(&self) -> Result<MultiPoly, CanonicalError> {
        let n = self.n;
        let mut p = quadratic_form_poly(&self.a, n)?
            .scale(&Rational::frac(1, 2))?
            .sub(&linear_form_poly(&self.f, n)?)?;
        for (k, comp) in self.v.components().iter().enumerate() {
            let xi = self.operator_polynomial(k)?;
            let term = xi.pow(2)?.scale(&comp.a)?.add(&xi.scale(&comp.beta)?)?;
            p = p.add(&term)?;
        }
        Ok(p)
    }
}

fn quadratic_form_poly(m: &SymMatrix<Rational>, n: usize) -> Result<MultiPoly, PolyError> {
    let mut p = MultiPoly::zero(n)?;
    for i in 0..n {
        for j in 0..n {
            let c = m.get(i, j);
            if c.is_zero() {
                continue;
            }
            let xij = MultiPoly::var(n, i)?.mul(&MultiPoly::var(n, j)?)?;
            p = p.add(&xij.scale(&c)?)?;
        }
    }
    Ok(p)
}

fn linear_form_poly(v: &[Rational], n: usize) -> Result<MultiPoly, PolyError> {
    let mut p = MultiPoly::zero(n)?;
    for (i, c) in v.iter().enumerate() {
        p = p.add(&MultiPoly::var(n, i)?.scale(c)?)?;
    }
    Ok(p)
}

/// One-dimensional problem with one operator; handy for scalar instances.
pub fn scalar_problem(
    a: Rational,
    f: Rational,
    c: Rational,
    b: Rational,
    offset: Rational,
    va: Rational,
    vbeta: Rational,
) -> Result<CanonicalProblem, CanonicalError> {
    let am = SymMatrix::from_rows(&[vec![a]])?;
    let cm = SymMatrix::from_rows(&[vec![c]])?;
    CanonicalProblem::new(
        am,
        vec![f],
        vec![QuadOperator::new(cm, vec![b], offset)],
        ConvexQuadV::new(vec![VComponent { a: va, beta: vbeta }])?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i128, d: i128) -> Rational {
        Rational::frac(n, d)
    }

    /// g(t) = 30 + t²(18 − 16t + 3t²) in canonical form.
    fn g_problem() -> CanonicalProblem {
        scalar_problem(r(106, 3), r(56, 1), r(2, 1), r(-8, 3), r(-2, 1), r(3, 1), r(-9, 1)).unwrap()
    }

    fn zero_problem() -> CanonicalProblem {
        scalar_problem(r(0, 1), r(0, 1), r(0, 1), r(0, 1), r(0, 1), r(1, 1), r(0, 1)).unwrap()
    }

    /// Closed-form dual of the g instance, written out by hand.
    fn g_dual_closed(s: f64) -> f64 {
        (-s * s - 18.0 * s - 81.0) / 12.0
            - (8.0 * s / 3.0 + 56.0).powi(2) / (4.0 * (s + 53.0 / 3.0))
            - 2.0 * s
    }

    #[test]
    fn lambda_values() {
        let p = g_problem();
        assert!((p.lambda_eval(&[3.0]).unwrap()[0] + 1.0).abs() < 1e-14);
        assert!((p.lambda_eval(&[4.0 / 3.0]).unwrap()[0] + 34.0 / 9.0).abs() < 1e-14);
        let lvl2 = scalar_problem(r(0, 1), r(0, 1), r(2, 1), r(0, 1), r(0, 1), r(1, 1), r(0, 1)).unwrap();
        assert_eq!(lvl2.lambda_eval(&[0.0]).unwrap(), vec![0.0]);
        assert!(matches!(p.lambda_eval(&[1.0, 2.0]), Err(CanonicalError::Dimension { .. })));
    }

    #[test]
    fn primal_values_match_g() {
        let p = g_problem();
        for (t, want) in [(3.0, 3.0), (0.0, 30.0), (1.0, 35.0)] {
            assert!((p.primal_value(&[t]).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn conjugates() {
        let v = ConvexQuadV::new(vec![VComponent { a: r(3, 1), beta: r(-9, 1) }]).unwrap();
        assert!((v.conjugate_value(&[-15.0]) - 3.0).abs() < 1e-14);
        let unit = ConvexQuadV::new(vec![VComponent { a: r(1, 1), beta: r(0, 1) }]).unwrap();
        assert_eq!(unit.conjugate_value(&[0.0]), 0.0);
        assert_eq!(unit.conjugate_gradient(&[0.0]), vec![0.0]);
        assert_eq!(unit.conjugate_value(&[2.0]), 1.0);
        assert_eq!(unit.conjugate_gradient(&[2.0]), vec![1.0]);
        assert!(ConvexQuadV::new(vec![VComponent { a: r(0, 1), beta: r(0, 1) }]).is_err());
    }

    #[test]
    fn g_and_f() {
        let p = g_problem();
        let g = p.g_of(&[-15.0]).unwrap();
        assert!((g.get(0, 0) - 16.0 / 3.0).abs() < 1e-12);
        assert!((p.f_of(&[-15.0]).unwrap()[0] - 16.0).abs() < 1e-12);
        assert_eq!(p.g_of(&[0.0]).unwrap().get(0, 0), 106.0 / 3.0);
        assert_eq!(p.f_of(&[0.0]).unwrap(), vec![56.0]);
        assert!(p.g_of(&[-53.0 / 3.0]).unwrap().get(0, 0).abs() < 1e-12);
    }

    #[test]
    fn dual_values() {
        let p = g_problem();
        assert!((p.dual_value(&[-15.0]).unwrap() - 3.0).abs() < 1e-12);
        assert!((p.dual_value(&[-9.0]).unwrap() + 150.0 / 13.0).abs() < 1e-12);
        let trivial = scalar_problem(r(1, 1), r(0, 1), r(0, 1), r(0, 1), r(0, 1), r(1, 1), r(0, 1)).unwrap();
        assert_eq!(trivial.dual_value(&[1.0]).unwrap(), -0.25);
        for s in [-17.0, -15.0, -3.0, 0.0, 12.5] {
            let d = p.dual_value(&[s]).unwrap();
            assert!((d - g_dual_closed(s)).abs() <= 1e-10 * (1.0 + d.abs()));
        }
    }

    #[test]
    fn dual_value_fails_outside_column_space() {
        // G = 0 at ς = 0 while F = 1
        let p = scalar_problem(r(0, 1), r(1, 1), r(2, 1), r(0, 1), r(0, 1), r(1, 1), r(0, 1)).unwrap();
        assert!(matches!(
            p.dual_value(&[0.0]),
            Err(CanonicalError::Linalg(LinalgError::ColumnSpaceViolation { .. }))
        ));
    }

    #[test]
    fn dual_gradient_vanishes_at_critical_point() {
        let p = g_problem();
        assert!(p.dual_gradient(&[-15.0]).unwrap()[0].abs() < 1e-10);
        assert!(matches!(p.dual_gradient(&[-53.0 / 3.0]), Err(CanonicalError::SingularG)));
    }

    #[test]
    fn dual_gradient_at_zero_matches_finite_differences() {
        let p = g_problem();
        let h = 1e-5;
        let fd = (p.dual_value(&[h]).unwrap() - p.dual_value(&[-h]).unwrap()) / (2.0 * h);
        let an = p.dual_gradient(&[0.0]).unwrap()[0];
        assert!((an - fd).abs() <= 1e-6 * an.abs());
        // computer algebra: d/dς of the closed form at 0
        assert!((an + 5.214_489_142_043_432).abs() < 1e-12);
    }

    #[test]
    fn complementary_values() {
        let p = g_problem();
        let xi = p.complementary_value(&[3.0], &[-15.0]).unwrap();
        assert!((xi - 3.0).abs() < 1e-12);
        for s in [-15.0, 0.0, 4.0] {
            let want = -p.v().conjugate_value(&[s]) - 2.0 * s;
            assert!((p.complementary_value(&[0.0], &[s]).unwrap() - want).abs() < 1e-12);
        }
        assert_eq!(zero_problem().complementary_value(&[1.7], &[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn recovery() {
        let p = g_problem();
        assert!((p.recover_primal(&[-15.0]).unwrap()[0] - 3.0).abs() < 1e-12);
        assert!((p.recover_primal(&[0.0]).unwrap()[0] - 84.0 / 53.0).abs() < 1e-14);
        let lin = scalar_problem(r(1, 1), r(1, 1), r(0, 1), r(0, 1), r(0, 1), r(1, 1), r(0, 1)).unwrap();
        assert_eq!(lin.recover_primal(&[0.0]).unwrap(), vec![1.0]);
    }

    #[test]
    fn positive_domain() {
        let p = g_problem();
        let inside = p.in_positive_domain(&[-15.0], 1e-9).unwrap();
        assert!(inside.psd && (inside.margin - 16.0 / 3.0).abs() < 1e-12);
        assert!(!p.in_positive_domain(&[-20.0], 1e-9).unwrap().psd);
        let edge = p.in_positive_domain(&[-53.0 / 3.0], 1e-9).unwrap();
        assert!(edge.psd && edge.margin.abs() <= 1e-9);
    }

    #[test]
    fn gaps() {
        let p = g_problem();
        let at_crit = p.duality_gap(&[3.0], &[-15.0]).unwrap();
        assert!(at_crit.max() < 1e-10);
        let off = p.duality_gap(&[0.0], &[-15.0]).unwrap();
        let xi0 = p.complementary_value(&[0.0], &[-15.0]).unwrap();
        assert!((off.primal_complementary - (30.0 - xi0).abs()).abs() < 1e-12);
        assert!(off.primal_complementary > 0.0);
        let z = zero_problem().duality_gap(&[0.0], &[0.0]).unwrap();
        assert_eq!((z.primal_complementary, z.complementary_dual), (0.0, 0.0));
    }

    #[test]
    fn primal_polynomial_is_g() {
        let g = MultiPoly::univariate(&[r(30, 1), r(0, 1), r(18, 1), r(-16, 1), r(3, 1)]).unwrap();
        assert_eq!(g_problem().primal_polynomial().unwrap(), g);
    }

    #[test]
    fn legendre_relations_exact() {
        let v = ConvexQuadV::new(vec![
            VComponent { a: r(3, 1), beta: r(-9, 1) },
            VComponent { a: r(7, 5), beta: r(2, 3) },
        ])
        .unwrap();
        let sigma = vec![r(-15, 1), r(11, 7)];
        let xi = v.conjugate_gradient_exact(&sigma).unwrap();
        assert_eq!(v.duality_map_exact(&xi).unwrap(), sigma);
    }

    #[test]
    fn dual_point_records_margin() {
        let p = g_problem();
        let d = DualPoint::new(&p, vec![-15.0]).unwrap();
        assert!((d.g_margin - 16.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn construction_validates_dimensions() {
        let a = SymMatrix::from_rows(&[vec![r(1, 1)]]).unwrap();
        let v = ConvexQuadV::new(vec![VComponent { a: r(1, 1), beta: r(0, 1) }]).unwrap();
        assert!(CanonicalProblem::new(a.clone(), vec![r(0, 1)], vec![], v.clone()).is_err());
        let op = QuadOperator::new(a.clone(), vec![r(0, 1), r(0, 1)], r(0, 1));
        assert!(CanonicalProblem::new(a, vec![r(0, 1)], vec![op], v).is_err());
    }
}

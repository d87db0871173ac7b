//! Brute-force verification of global minima.
//!
//! Independent of the duality machinery: a lattice scan, Newton refinement
//! from seeded multistart points, and derivative-root isolation for
//! univariate polynomials.

use serde::Serialize;
use thiserror::Error;

use crate::par::{map_indexed, Execution};
use crate::polynomial::{CompiledPoly, MultiPoly, PolyError};
use crate::smallmat::{dot, norm, SymMatrix};

pub const REFINE_MAX_ITER: usize = 500;
pub const DEFAULT_REFINE_TOL: f64 = 1e-8;
const SCAN_INTERVALS: usize = 10_000;
const BISECT_WIDTH: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("dimension mismatch: polynomial arity {arity}, box dimension {dim}")]
    Dimension { arity: usize, dim: usize },
    #[error("oracle supports at most two variables, got {0}")]
    TooManyVariables(usize),
    #[error("invalid search box: {0}")]
    InvalidBox(String),
    #[error("need at least 2 nodes per axis, got {0}")]
    TooFewNodes(usize),
    #[error("local refinement did not converge in {iterations} iterations (|∇p| = {grad_norm:e})")]
    NotConverged { iterations: usize, grad_norm: f64 },
    #[error("could not bracket a derivative root near {near}")]
    RootIsolationFailure { near: f64 },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Axis-aligned search region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SearchBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, OracleError> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(OracleError::InvalidBox("bounds must have equal, nonzero length".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u) || !l.is_finite() || !u.is_finite()) {
            return Err(OracleError::InvalidBox("need lower < upper in every coordinate".into()));
        }
        Ok(SearchBox { lower, upper })
    }

    /// `[lo, hi]^dim`
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self, OracleError> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| *v >= *l && *v <= *u)
    }

    /// Node `i` of `n` evenly spaced nodes on axis `axis`, endpoints exact.
    pub fn node(&self, axis: usize, i: usize, n: usize) -> f64 {
        let (l, u) = (self.lower[axis], self.upper[axis]);
        if i + 1 == n {
            u
        } else {
            l + (u - l) * (i as f64) / ((n - 1) as f64)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub x_best: Vec<f64>,
    pub value: f64,
    pub n_evaluations: usize,
    pub refined: bool,
}

fn check_dims(p: &MultiPoly, bx: &SearchBox) -> Result<(), OracleError> {
    if p.arity() != bx.dim() {
        return Err(OracleError::Dimension {
            arity: p.arity(),
            dim: bx.dim(),
        });
    }
    if p.arity() > 2 {
        return Err(OracleError::TooManyVariables(p.arity()));
    }
    Ok(())
}

/// Scans the regular lattice with `n_per_axis` nodes per axis (endpoints
/// included). Ties go to the lexicographically smallest node.
pub fn grid_scan(
    p: &MultiPoly,
    bx: &SearchBox,
    n_per_axis: usize,
    exec: Execution,
) -> Result<OracleResult, OracleError> {
    check_dims(p, bx)?;
    if n_per_axis < 2 {
        return Err(OracleError::TooFewNodes(n_per_axis));
    }
    let f = p.compile();
    let n = n_per_axis;
    let result = if bx.dim() == 1 {
        let vals = map_indexed(n, exec, |i| f.eval(&[bx.node(0, i, n)]));
        let (i, v) = argmin(vals.into_iter());
        OracleResult {
            x_best: vec![bx.node(0, i, n)],
            value: v,
            n_evaluations: n,
            refined: false,
        }
    } else {
        let rows = map_indexed(n, exec, |i| {
            let x = bx.node(0, i, n);
            argmin((0..n).map(|j| f.eval(&[x, bx.node(1, j, n)])))
        });
        let (i, (j, v)) = rows
            .into_iter()
            .enumerate()
            .fold((0, (0, f64::INFINITY)), |best, (i, (j, v))| {
                if v < best.1 .1 {
                    (i, (j, v))
                } else {
                    best
                }
            });
        OracleResult {
            x_best: vec![bx.node(0, i, n), bx.node(1, j, n)],
            value: v,
            n_evaluations: n * n,
            refined: false,
        }
    };
    Ok(result)
}

/// First index of the smallest non-NaN value.
fn argmin(vals: impl Iterator<Item = f64>) -> (usize, f64) {
    vals.enumerate()
        .fold((0, f64::INFINITY), |best, (i, v)| if v < best.1 { (i, v) } else { best })
}

/// Exact gradient and Hessian polynomials, compiled for float evaluation.
pub struct Derivatives {
    f: CompiledPoly,
    grad: Vec<CompiledPoly>,
    hess: Vec<Vec<CompiledPoly>>,
}

impl Derivatives {
    pub fn new(p: &MultiPoly) -> Result<Self, OracleError> {
        let n = p.arity();
        let grad_polys = (0..n).map(|i| p.partial_derivative(i)).collect::<Result<Vec<_>, _>>()?;
        let hess = grad_polys
            .iter()
            .map(|g| (0..n).map(|j| g.partial_derivative(j).map(|h| h.compile())).collect())
            .collect::<Result<Vec<Vec<_>>, _>>()?;
        Ok(Derivatives {
            f: p.compile(),
            grad: grad_polys.iter().map(MultiPoly::compile).collect(),
            hess,
        })
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.f.eval(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.grad.iter().map(|g| g.eval(x)).collect()
    }

    pub fn hessian(&self, x: &[f64]) -> SymMatrix<f64> {
        SymMatrix::from_fn(self.grad.len(), |i, j| self.hess[i][j].eval(x))
            .expect("arity within smallmat limits")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Refined {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

/// Newton descent with exact derivatives and Armijo backtracking; steepest
/// descent whenever the Hessian is not positive definite. Stops once
/// `|∇p| <= tol`.
pub fn local_refine(p: &MultiPoly, start: &[f64], tol: f64) -> Result<Refined, OracleError> {
    if p.arity() > 2 {
        return Err(OracleError::TooManyVariables(p.arity()));
    }
    if start.len() != p.arity() {
        return Err(OracleError::Dimension {
            arity: p.arity(),
            dim: start.len(),
        });
    }
    refine_with(&Derivatives::new(p)?, start, tol)
}

pub fn refine_with(d: &Derivatives, start: &[f64], tol: f64) -> Result<Refined, OracleError> {
    let mut x = start.to_vec();
    let mut fx = d.value(&x);
    let mut evaluations = 1;
    for iter in 0..REFINE_MAX_ITER {
        let g = d.gradient(&x);
        let gn = norm(&g);
        if gn <= tol {
            return Ok(Refined {
                x,
                value: fx,
                iterations: iter,
                evaluations,
            });
        }
        let h = d.hessian(&x);
        let newton = (h.min_eigenvalue() > 0.0)
            .then(|| h.solve_sym(&g, 1e-9).ok())
            .flatten()
            .map(|s| s.iter().map(|v| -v).collect::<Vec<_>>());
        let dir = newton.unwrap_or_else(|| g.iter().map(|v| -v / gn).collect());
        let slope = dot(&g, &dir);
        let mut alpha = 1.0;
        let mut moved = false;
        while alpha > 1e-20 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + alpha * b).collect();
            let ft = d.value(&trial);
            evaluations += 1;
            if ft <= fx + 1e-4 * alpha * slope {
                moved = trial != x;
                x = trial;
                fx = ft;
                break;
            }
            alpha *= 0.5;
        }
        if !moved {
            // no representable decrease left: accept if stationary to working precision
            let scale = 1.0 + d.value(&x).abs();
            if gn <= 1e3 * tol * scale {
                return Ok(Refined {
                    x,
                    value: fx,
                    iterations: iter,
                    evaluations,
                });
            }
            return Err(OracleError::NotConverged {
                iterations: iter,
                grad_norm: gn,
            });
        }
    }
    Err(OracleError::NotConverged {
        iterations: REFINE_MAX_ITER,
        grad_norm: norm(&d.gradient(&x)),
    })
}

/// 64-bit linear congruential generator: multiplier 6364136223846793005,
/// increment 1442695040888963407, output the top 33 bits of the new state.
/// The state starts at the seed.
#[derive(Debug, Clone)]
pub struct Lcg {
    state: u64,
}

impl Lcg {
    pub const MULTIPLIER: u64 = 6_364_136_223_846_793_005;
    pub const INCREMENT: u64 = 1_442_695_040_888_963_407;

    pub fn new(seed: u64) -> Self {
        Lcg { state: seed }
    }

    pub fn next_u33(&mut self) -> u64 {
        self.state = self
            .state
            .wrapping_mul(Self::MULTIPLIER)
            .wrapping_add(Self::INCREMENT);
        self.state >> 31
    }

    /// Uniform in `[0, 1)`.
    pub fn next_unit(&mut self) -> f64 {
        self.next_u33() as f64 / (1u64 << 33) as f64
    }
}

/// Start points for [`multistart`]: start `i` takes draws `i*d .. i*d + d`.
pub fn multistart_points(bx: &SearchBox, k_starts: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = Lcg::new(seed);
    (0..k_starts)
        .map(|_| {
            bx.lower()
                .iter()
                .zip(bx.upper())
                .map(|(l, u)| l + (u - l) * rng.next_unit())
                .collect()
        })
        .collect()
}

/// Refines `k_starts` seeded points and keeps the best refined minimizer
/// inside the box; ties go to the lowest start index. Starts that fail to
/// converge or leave the box are skipped. If all fail, the best raw start is
/// returned with `refined = false`.
pub fn multistart(
    p: &MultiPoly,
    bx: &SearchBox,
    k_starts: usize,
    seed: u64,
    exec: Execution,
) -> Result<OracleResult, OracleError> {
    check_dims(p, bx)?;
    let d = Derivatives::new(p)?;
    let starts = multistart_points(bx, k_starts, seed);
    let outcomes = map_indexed(starts.len(), exec, |i| {
        refine_with(&d, &starts[i], DEFAULT_REFINE_TOL)
    });
    let mut evaluations = 0;
    let mut best: Option<Refined> = None;
    for r in outcomes.into_iter().flatten() {
        evaluations += r.evaluations;
        if !bx.contains(&r.x) {
            continue;
        }
        if best.as_ref().is_none_or(|b| r.value < b.value) {
            best = Some(r);
        }
    }
    Ok(match best {
        Some(b) => OracleResult {
            x_best: b.x,
            value: b.value,
            n_evaluations: evaluations,
            refined: true,
        },
        None => {
            let vals: Vec<f64> = starts.iter().map(|s| d.value(s)).collect();
            let (i, v) = argmin(vals.into_iter());
            OracleResult {
                x_best: starts.get(i).cloned().unwrap_or_default(),
                value: v,
                n_evaluations: evaluations + starts.len(),
                refined: false,
            }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub x: f64,
    pub value: f64,
    /// `p'(x)` after polishing.
    pub derivative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateMinimum {
    pub x: f64,
    pub value: f64,
    /// Every isolated root of `p'` in the interval, ascending.
    pub critical: Vec<CriticalPoint>,
    /// `max |p'|` over the scan nodes.
    pub derivative_scale: f64,
    pub n_evaluations: usize,
}

impl UnivariateMinimum {
    pub fn as_oracle_result(&self) -> OracleResult {
        OracleResult {
            x_best: vec![self.x],
            value: self.value,
            n_evaluations: self.n_evaluations,
            refined: true,
        }
    }
}

/// Global minimum of a univariate polynomial on `[lo, hi]` through the
/// roots of its derivative: sign-change scan at `(hi−lo)/10⁴`, bisection to
/// width 1e−13, Newton polish, then comparison with both endpoints.
pub fn univariate_global(p: &MultiPoly, lo: f64, hi: f64) -> Result<UnivariateMinimum, OracleError> {
    if p.arity() != 1 {
        return Err(OracleError::Dimension {
            arity: p.arity(),
            dim: 1,
        });
    }
    if !(lo < hi) {
        return Err(OracleError::InvalidBox("need lo < hi".into()));
    }
    let dp_poly = p.partial_derivative(0)?;
    let dp = dp_poly.compile();
    let ddp = dp_poly.partial_derivative(0)?.compile();
    let f = p.compile();
    let d1 = |x: f64| dp.eval(&[x]);

    let n = SCAN_INTERVALS;
    let nodes: Vec<f64> = (0..=n)
        .map(|i| if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 })
        .collect();
    let vals: Vec<f64> = nodes.iter().map(|&x| d1(x)).collect();
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut evaluations = nodes.len();

    let mut roots = Vec::new();
    scan_roots(&nodes, &vals, &d1, &mut roots);

    // even-multiplicity candidates: |p'| dips near zero without a sign change
    for i in 1..n {
        let (a, b, c) = (vals[i - 1], vals[i], vals[i + 1]);
        let tangent = b != 0.0
            && a.signum() == b.signum()
            && c.signum() == b.signum()
            && b.abs() <= a.abs()
            && b.abs() <= c.abs()
            // a quadratic dip reaching zero within about a cell
            && b.abs() <= (a - 2.0 * b + c).abs();
        if !tangent {
            continue;
        }
        let fine: Vec<f64> = (0..=20)
            .map(|k| nodes[i - 1] + (nodes[i + 1] - nodes[i - 1]) * k as f64 / 20.0)
            .collect();
        let fine_vals: Vec<f64> = fine.iter().map(|&x| d1(x)).collect();
        evaluations += fine.len();
        let before = roots.len();
        scan_roots(&fine, &fine_vals, &d1, &mut roots);
        if roots.len() == before {
            return Err(OracleError::RootIsolationFailure { near: nodes[i] });
        }
    }

    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));

    let critical: Vec<CriticalPoint> = roots
        .iter()
        .map(|&r| {
            let x = polish(r, &d1, &|x| ddp.eval(&[x]));
            CriticalPoint {
                x,
                value: f.eval(&[x]),
                derivative: d1(x),
            }
        })
        .collect();
    evaluations += 2 * critical.len();

    let mut candidates: Vec<(f64, f64)> = critical.iter().map(|c| (c.x, c.value)).collect();
    candidates.push((lo, f.eval(&[lo])));
    candidates.push((hi, f.eval(&[hi])));
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (x, value) = candidates
        .into_iter()
        .fold((f64::NAN, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best });
    Ok(UnivariateMinimum {
        x,
        value,
        critical,
        derivative_scale: scale,
        n_evaluations: evaluations,
    })
}

fn scan_roots(nodes: &[f64], vals: &[f64], d1: &dyn Fn(f64) -> f64, roots: &mut Vec<f64>) {
    for (i, (&x, &v)) in nodes.iter().zip(vals).enumerate() {
        if v == 0.0 {
            roots.push(x);
        } else if let Some(&next) = vals.get(i + 1) {
            if next != 0.0 && next.signum() != v.signum() {
                roots.push(bisect(x, nodes[i + 1], v, d1));
            }
        }
    }
}

fn bisect(mut a: f64, mut b: f64, mut fa: f64, d1: &dyn Fn(f64) -> f64) -> f64 {
    while b - a > BISECT_WIDTH {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = d1(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// A few Newton steps, kept only while |p'| shrinks.
fn polish(mut x: f64, d1: &dyn Fn(f64) -> f64, d2: &dyn Fn(f64) -> f64) -> f64 {
    let mut fx = d1(x);
    for _ in 0..5 {
        if fx == 0.0 {
            break;
        }
        let slope = d2(x);
        if slope == 0.0 {
            break;
        }
        let next = x - fx / slope;
        let fn_ = d1(next);
        if fn_.abs() >= fx.abs() {
            break;
        }
        x = next;
        fx = fn_;
    }
    x
}

/// Cauchy bound: every real root of `p` lies in `[-B, B]`.
pub fn cauchy_root_bound(p: &MultiPoly) -> Option<f64> {
    if p.arity() != 1 {
        return None;
    }
    let deg = p.degree()?;
    let lead = p.coeff(&[deg as u16]).to_f64().abs();
    let ratio = p
        .terms()
        .filter(|(m, _)| m.total_degree() < deg)
        .map(|(_, c)| c.to_f64().abs() / lead)
        .fold(0.0f64, f64::max);
    Some(1.0 + ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomial::Rational;

    fn r(n: i128) -> Rational {
        Rational::integer(n)
    }

    #[test]
    fn grid_scan_tiny() {
        let p = MultiPoly::univariate(&[r(0), r(0), r(1)]).unwrap();
        let bx = SearchBox::cube(1, -1.0, 1.0).unwrap();
        let res = grid_scan(&p, &bx, 3, Execution::Sequential).unwrap();
        assert_eq!(res.x_best, vec![0.0]);
        assert_eq!(res.value, 0.0);
        assert!(matches!(
            grid_scan(&p, &bx, 1, Execution::Sequential),
            Err(OracleError::TooFewNodes(1))
        ));
    }

    #[test]
    fn grid_ties_go_to_smallest_node() {
        // x² on [-1, 1] with 2 nodes: both endpoints give 1
        let p = MultiPoly::univariate(&[r(0), r(0), r(1)]).unwrap();
        let bx = SearchBox::cube(1, -1.0, 1.0).unwrap();
        let res = grid_scan(&p, &bx, 2, Execution::Parallel).unwrap();
        assert_eq!(res.x_best, vec![-1.0]);
    }

    #[test]
    fn refine_convex_bowl() {
        let x = MultiPoly::var(2, 0).unwrap();
        let y = MultiPoly::var(2, 1).unwrap();
        let p = x.pow(2).unwrap().add(&y.pow(2).unwrap()).unwrap();
        let res = local_refine(&p, &[1.0, 1.0], 1e-12).unwrap();
        assert_eq!(res.x, vec![0.0, 0.0]);
        assert!(res.iterations <= 2);
    }

    #[test]
    fn lcg_matches_reference_stream() {
        // state_1 = 0 * a + c; output top 33 bits
        let mut g = Lcg::new(0);
        assert_eq!(g.next_u33(), Lcg::INCREMENT >> 31);
        let mut g = Lcg::new(42);
        let s1 = 42u64.wrapping_mul(Lcg::MULTIPLIER).wrapping_add(Lcg::INCREMENT);
        assert_eq!(g.next_u33(), s1 >> 31);
        let u = g.next_unit();
        assert!((0.0..1.0).contains(&u));
    }

    #[test]
    fn multistart_constant() {
        let p = MultiPoly::constant(2, Rational::frac(7, 2)).unwrap();
        let bx = SearchBox::cube(2, -1.0, 1.0).unwrap();
        let res = multistart(&p, &bx, 4, 1, Execution::Sequential).unwrap();
        assert_eq!(res.value, 3.5);
        assert!(bx.contains(&res.x_best));
    }

    #[test]
    fn univariate_simple_square() {
        let p = MultiPoly::univariate(&[r(1), r(-2), r(1)]).unwrap();
        let m = univariate_global(&p, 0.0, 2.0).unwrap();
        assert!((m.x - 1.0).abs() < 1e-12);
        assert!(m.value.abs() < 1e-15);
    }

    #[test]
    fn tangent_derivative_root_fails_to_isolate() {
        // p' = 3(x-1)² touches zero at 1 without a sign change
        let p = MultiPoly::univariate(&[r(-1), r(3), r(-3), r(1)]).unwrap();
        // scan nodes avoid x = 1 exactly
        assert!(matches!(
            univariate_global(&p, -0.3, 2.0),
            Err(OracleError::RootIsolationFailure { .. })
        ));
    }

    #[test]
    fn cauchy_bound() {
        // 12s³ − 24s² − 12s + 24 → 1 + 2
        let dp = MultiPoly::univariate(&[r(24), r(-12), r(-24), r(12)]).unwrap();
        assert_eq!(cauchy_root_bound(&dp), Some(3.0));
    }

    #[test]
    fn box_validation() {
        assert!(SearchBox::new(vec![1.0], vec![0.0]).is_err());
        assert!(SearchBox::new(vec![0.0, 0.0], vec![1.0]).is_err());
    }
}

//! Concave maximization over the strict interior of a PSD-feasible region.
//!
//! Damped Newton ascent with a finite-difference Hessian. Steps are
//! backtracked until the trial point keeps a PSD margin of at least
//! `interior_margin` and satisfies the Armijo ascent condition. Infeasible
//! trials are rejected rather than penalized, so the dual objective itself is
//! never modified.

use serde::Serialize;
use thiserror::Error;

use crate::canonical::{CanonicalError, CanonicalProblem, GAP_TOL};
use crate::smallmat::{dot, norm, SymMatrix};

/// Margins below this are treated as "on the PSD boundary" when an ascent
/// ends without a certificate.
pub const BOUNDARY_BAND: f64 = 1e-6;

const MIN_STEP: f64 = 1e-16;
const NEG_DEF_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    pub grad_tol: f64,
    pub max_iter: usize,
    pub interior_margin: f64,
    pub fd_step: f64,
    pub armijo_c: f64,
    pub backtrack_ratio: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            grad_tol: 1e-10,
            max_iter: 200,
            interior_margin: 1e-9,
            fd_step: 1e-5,
            armijo_c: 1e-4,
            backtrack_ratio: 0.5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let positive = [
            ("grad_tol", self.grad_tol),
            ("interior_margin", self.interior_margin),
            ("fd_step", self.fd_step),
            ("armijo_c", self.armijo_c),
            ("backtrack_ratio", self.backtrack_ratio),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SolverError::Config(format!("{name} must be positive")));
            }
        }
        if self.backtrack_ratio >= 1.0 {
            return Err(SolverError::Config("backtrack_ratio must be < 1".into()));
        }
        if self.max_iter == 0 {
            return Err(SolverError::Config("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("no strictly feasible dual point found")]
    NoInteriorPoint,
    #[error("start point is not strictly feasible (margin {margin:e})")]
    InfeasibleStart { margin: f64 },
    #[error("objective undefined at {sigma:?}")]
    Undefined { sigma: Vec<f64> },
    #[error("line search stalled after {} iterations", .state.iterations)]
    LineSearchStalled { state: Box<Ascent> },
    #[error(transparent)]
    Canonical(#[from] CanonicalError),
}

/// Closures describing a concave objective on a PSD-feasible set.
///
/// `value` returns `None` where the objective is undefined. `margin` is the
/// smallest eigenvalue of the constraint matrix. Without `gradient`, central
/// differences of `value` are used.
pub struct Objective<'a> {
    pub value: &'a ValueFn<'a>,
    pub gradient: Option<&'a GradientFn<'a>>,
    pub margin: &'a MarginFn<'a>,
}

pub type ValueFn<'a> = dyn Fn(&[f64]) -> Option<f64> + Sync + 'a;
pub type GradientFn<'a> = dyn Fn(&[f64]) -> Option<Vec<f64>> + Sync + 'a;
pub type MarginFn<'a> = dyn Fn(&[f64]) -> f64 + Sync + 'a;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AscentStatus {
    Converged,
    MaxIterations,
}

/// One accepted iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct IterRecord {
    pub value: f64,
    pub margin: f64,
    pub step: f64,
    pub newton: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ascent {
    pub sigma: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub margin: f64,
    pub iterations: usize,
    pub status: AscentStatus,
    /// Entry 0 is the start point.
    pub trace: Vec<IterRecord>,
}

impl<'a> Objective<'a> {
    fn eval(&self, sigma: &[f64]) -> Result<f64, SolverError> {
        (self.value)(sigma)
            .filter(|v| v.is_finite())
            .ok_or_else(|| SolverError::Undefined {
                sigma: sigma.to_vec(),
            })
    }

    fn grad(&self, sigma: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>, SolverError> {
        match self.gradient {
            Some(g) => g(sigma)
                .filter(|v| v.iter().all(|x| x.is_finite()))
                .ok_or_else(|| SolverError::Undefined {
                    sigma: sigma.to_vec(),
                }),
            None => {
                let mut out = Vec::with_capacity(sigma.len());
                let mut probe = sigma.to_vec();
                for k in 0..sigma.len() {
                    let h = fd_step(cfg, sigma[k]);
                    probe[k] = sigma[k] + h;
                    let up = self.eval(&probe)?;
                    probe[k] = sigma[k] - h;
                    let down = self.eval(&probe)?;
                    probe[k] = sigma[k];
                    out.push((up - down) / (2.0 * h));
                }
                Ok(out)
            }
        }
    }

    /// Central differences of the gradient, symmetrized.
    fn hessian(&self, sigma: &[f64], cfg: &SolverConfig) -> Result<SymMatrix<f64>, SolverError> {
        let m = sigma.len();
        let mut cols = Vec::with_capacity(m);
        let mut probe = sigma.to_vec();
        for k in 0..m {
            let h = fd_step(cfg, sigma[k]);
            probe[k] = sigma[k] + h;
            let up = self.grad(&probe, cfg)?;
            probe[k] = sigma[k] - h;
            let down = self.grad(&probe, cfg)?;
            probe[k] = sigma[k];
            cols.push(up.iter().zip(&down).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<_>>());
        }
        SymMatrix::from_fn(m, |i, j| 0.5 * (cols[j][i] + cols[i][j]))
            .map_err(|e| SolverError::Config(e.to_string()))
    }
}

fn fd_step(cfg: &SolverConfig, s: f64) -> f64 {
    cfg.fd_step * (1.0 + s.abs())
}

/// Searches `ς = τ·u` over a geometric grid of `τ` (both signs), for `u`
/// each coordinate direction and the all-ones direction, starting at 0.
pub fn find_interior_start(
    value: &dyn Fn(&[f64]) -> Option<f64>,
    margin: &dyn Fn(&[f64]) -> f64,
    m: usize,
    interior_margin: f64,
) -> Result<Vec<f64>, SolverError> {
    let ok = |s: &[f64]| margin(s) >= interior_margin && value(s).is_some_and(f64::is_finite);
    let origin = vec![0.0; m];
    if ok(&origin) {
        return Ok(origin);
    }
    let mut directions: Vec<Vec<f64>> = (0..m)
        .map(|k| (0..m).map(|j| if j == k { 1.0 } else { 0.0 }).collect())
        .collect();
    if m > 1 {
        directions.push(vec![1.0; m]);
    }
    let mut tau = 1e-3;
    while tau <= 1e6 {
        for u in &directions {
            for sign in [1.0, -1.0] {
                let s: Vec<f64> = u.iter().map(|x| sign * tau * x).collect();
                if ok(&s) {
                    return Ok(s);
                }
            }
        }
        tau *= 2.0;
    }
    Err(SolverError::NoInteriorPoint)
}

/// Damped Newton ascent from a strictly feasible start.
pub fn maximize_concave(
    obj: &Objective<'_>,
    start: &[f64],
    cfg: &SolverConfig,
) -> Result<Ascent, SolverError> {
    cfg.validate()?;
    let start_margin = (obj.margin)(start);
    if !(start_margin >= cfg.interior_margin) {
        return Err(SolverError::InfeasibleStart {
            margin: start_margin,
        });
    }
    let mut sigma = start.to_vec();
    let mut value = obj.eval(&sigma)?;
    let mut margin = start_margin;
    let mut trace = vec![IterRecord {
        value,
        margin,
        step: 0.0,
        newton: false,
    }];
    let mut iterations = 0;
    loop {
        let g = obj.grad(&sigma, cfg)?;
        let grad_norm = norm(&g);
        let state = |status, trace: Vec<IterRecord>, sigma: Vec<f64>| Ascent {
            sigma,
            value,
            grad_norm,
            margin,
            iterations,
            status,
            trace,
        };
        if grad_norm <= cfg.grad_tol {
            return Ok(state(AscentStatus::Converged, trace, sigma));
        }
        if iterations >= cfg.max_iter {
            return Ok(state(AscentStatus::MaxIterations, trace, sigma));
        }

        let h = obj.hessian(&sigma, cfg)?;
        let newton_dir = {
            let eig = h.eigenvalues();
            if eig.last().is_some_and(|&top| top < -NEG_DEF_TOL) {
                h.scaled(-1.0).solve_sym(&g, 1e-9).ok()
            } else {
                None
            }
        };
        let newton = newton_dir.is_some();
        let dir = newton_dir.unwrap_or_else(|| g.clone());
        let slope = dot(&g, &dir);

        let mut alpha = 1.0;
        let accepted = loop {
            if alpha < MIN_STEP {
                break None;
            }
            let trial: Vec<f64> = sigma.iter().zip(&dir).map(|(s, d)| s + alpha * d).collect();
            let trial_margin = (obj.margin)(&trial);
            if trial_margin >= cfg.interior_margin {
                if let Some(v) = (obj.value)(&trial).filter(|v| v.is_finite()) {
                    let gain = v - value;
                    let wanted = cfg.armijo_c * alpha * slope;
                    // below rounding level the Armijo target cannot be resolved;
                    // monotone ascent is still required
                    let unresolved = wanted <= 4.0 * f64::EPSILON * (1.0 + value.abs());
                    if gain >= wanted || (unresolved && gain >= 0.0) {
                        break Some((trial, v, trial_margin));
                    }
                }
            }
            alpha *= cfg.backtrack_ratio;
        };
        match accepted {
            Some((trial, v, trial_margin)) => {
                sigma = trial;
                value = v;
                margin = trial_margin;
                iterations += 1;
                trace.push(IterRecord {
                    value,
                    margin,
                    step: alpha,
                    newton,
                });
            }
            None => {
                return Err(SolverError::LineSearchStalled {
                    state: Box::new(state(AscentStatus::MaxIterations, trace, sigma)),
                });
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Certificate {
    GlobalMinimumCertified,
    BoundaryCritical,
    NotConverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalReport {
    pub sigma_star: Vec<f64>,
    pub x_bar: Vec<f64>,
    pub primal: f64,
    /// `Ξ(x̄, ς*)`
    pub complementary: f64,
    pub dual: f64,
    /// Larger leg of the complementary-dual equality.
    pub gap: f64,
    pub grad_norm: f64,
    pub psd_margin: f64,
    pub certificate: Certificate,
    pub iterations: usize,
}

/// Assigns the certificate from the ascent outcome.
///
/// Certified needs a converged gradient, a strictly interior margin and a
/// closed gap. An uncertified run ending within [`BOUNDARY_BAND`] of the
/// PSD boundary is boundary-critical.
pub fn classify(
    converged: bool,
    grad_norm: f64,
    psd_margin: f64,
    gap: f64,
    primal: f64,
    cfg: &SolverConfig,
) -> Certificate {
    if converged
        && grad_norm <= cfg.grad_tol
        && psd_margin >= cfg.interior_margin
        && gap <= GAP_TOL * (1.0 + primal.abs())
    {
        Certificate::GlobalMinimumCertified
    } else if psd_margin < BOUNDARY_BAND {
        Certificate::BoundaryCritical
    } else {
        Certificate::NotConverged
    }
}

/// Solves the canonical dual, recovers `x̄ = G⁻¹F` and certifies it.
pub fn solve_canonical(pr: &CanonicalProblem, cfg: &SolverConfig) -> Result<CriticalReport, SolverError> {
    cfg.validate()?;
    let value = |s: &[f64]| pr.dual_value(s).ok();
    let gradient = |s: &[f64]| pr.dual_gradient(s).ok();
    let margin = |s: &[f64]| pr.g_of(s).map(|g| g.min_eigenvalue()).unwrap_or(f64::NEG_INFINITY);
    let start = find_interior_start(&value, &margin, pr.num_dual(), cfg.interior_margin)?;
    let obj = Objective {
        value: &value,
        gradient: Some(&gradient),
        margin: &margin,
    };
    let (ascent, converged) = match maximize_concave(&obj, &start, cfg) {
        Ok(a) => {
            let c = a.status == AscentStatus::Converged;
            (a, c)
        }
        Err(SolverError::LineSearchStalled { state }) => (*state, false),
        Err(e) => return Err(e),
    };
    let sigma = ascent.sigma;
    let x_bar = pr.recover_primal(&sigma)?;
    let primal = pr.primal_value(&x_bar)?;
    let complementary = pr.complementary_value(&x_bar, &sigma)?;
    let dual = ascent.value;
    let gap = (primal - complementary).abs().max((complementary - dual).abs());
    let certificate = classify(converged, ascent.grad_norm, ascent.margin, gap, primal, cfg);
    Ok(CriticalReport {
        sigma_star: sigma,
        x_bar,
        primal,
        complementary,
        dual,
        gap,
        grad_norm: ascent.grad_norm,
        psd_margin: ascent.margin,
        certificate,
        iterations: ascent.iterations,
    })
}

//! End-to-end pipelines for the Goldstein-Price and Three-Hump Camel Back
//! benchmarks.
//!
//! Every decomposition used here is checked as an exact polynomial identity
//! before any numbers are computed from it.

mod goldstein_price;
mod three_hump;

pub use goldstein_price::*;
pub use three_hump::*;

use serde::Serialize;
use thiserror::Error;

use crate::canonical::CanonicalError;
use crate::dual_solver::{CriticalReport, SolverError};
use crate::oracle::{multistart, OracleError, SearchBox};
use crate::par::Execution;
use crate::polynomial::{Monomial, MultiPoly, PolyError, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchmarkError {
    #[error("identity `{name}` fails at monomial {monomial:?}: {lhs:?} vs {rhs:?}")]
    IdentityViolation {
        name: &'static str,
        monomial: Monomial,
        lhs: Rational,
        rhs: Rational,
    },
    #[error("decoupling precondition failed: {0}")]
    Decoupling(String),
    #[error("dual point ({0}, {1}) is outside the feasible domain")]
    Domain(f64, f64),
    #[error("equilibrium system is singular")]
    SingularSystem,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Canonical(#[from] CanonicalError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Outcome of an exact identity check between two polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub holds: bool,
    /// Leading monomial where the sides differ, with both coefficients.
    pub mismatch: Option<(Monomial, Rational, Rational)>,
}

impl IdentityCheck {
    pub fn compare(name: &'static str, lhs: &MultiPoly, rhs: &MultiPoly) -> Self {
        let mismatch = lhs.first_difference(rhs);
        IdentityCheck {
            name,
            holds: mismatch.is_none(),
            mismatch,
        }
    }

    pub fn into_result(self) -> Result<(), BenchmarkError> {
        match self.mismatch {
            None => Ok(()),
            Some((monomial, lhs, rhs)) => Err(BenchmarkError::IdentityViolation {
                name: self.name,
                monomial,
                lhs,
                rhs,
            }),
        }
    }
}

/// Multistart cross-check parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSettings {
    #[serde(rename = "box")]
    pub search_box: SearchBox,
    pub starts: usize,
    pub seed: u64,
    #[serde(skip)]
    pub exec: Execution,
}

impl OracleSettings {
    pub fn square(lo: f64, hi: f64) -> Self {
        OracleSettings {
            search_box: SearchBox::cube(2, lo, hi).expect("lo < hi"),
            starts: 64,
            seed: 42,
            exec: Execution::default(),
        }
    }

    /// `[−2, 2]²`
    pub fn goldstein_price() -> Self {
        Self::square(-2.0, 2.0)
    }

    /// `[−5, 5]²`
    pub fn three_hump() -> Self {
        Self::square(-5.0, 5.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    pub value: f64,
    pub x: Vec<f64>,
    pub agreement: bool,
}

/// Relative agreement threshold between the dual pipeline and the oracle.
pub const ORACLE_AGREEMENT_TOL: f64 = 1e-4;

impl OracleCheck {
    pub fn run(p: &MultiPoly, settings: &OracleSettings, value: f64) -> Result<Self, BenchmarkError> {
        let res = multistart(p, &settings.search_box, settings.starts, settings.seed, settings.exec)?;
        Ok(OracleCheck {
            agreement: (value - res.value).abs() <= ORACLE_AGREEMENT_TOL * (1.0 + value.abs()),
            value: res.value,
            x: res.x_best,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub problem_name: &'static str,
    /// `(s*, t*)` for Goldstein-Price, `(ς1*, ς2*)` for Three-Hump.
    pub transformed_solution: Vec<f64>,
    pub x_star: Vec<f64>,
    pub value: f64,
    pub dual_report: CriticalReport,
    pub oracle: Option<OracleCheck>,
}

fn r(n: i128, d: i128) -> Rational {
    Rational::frac(n, d)
}

fn ri(n: i128) -> Rational {
    Rational::integer(n)
}

use std::fmt::Write as _;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::CliError;
use crate::benchmarks::{OracleCheck, SolveReport};
use crate::dual_solver::{Certificate, SolverConfig};
use crate::oracle::SearchBox;
use crate::par::{map_indexed, Execution};
use crate::polynomial::MultiPoly;

/// Machine-readable solve report. Every problem produces the same keys.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub problem: String,
    pub certificate: Certificate,
    pub sigma_star: Vec<f64>,
    pub x_star: Vec<f64>,
    pub transformed_solution: Vec<f64>,
    pub value: f64,
    pub primal_value: f64,
    pub complementary_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub psd_min_eig: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub oracle: Option<OracleCheck>,
    pub config: SolverConfig,
}

/// Folds `-0.0` into `0.0`.
fn unsigned_zero(x: f64) -> f64 {
    x + 0.0
}

fn unsigned_zeros(xs: &[f64]) -> Vec<f64> {
    xs.iter().copied().map(unsigned_zero).collect()
}

impl Report {
    pub fn new(problem: &str, rep: &SolveReport, cfg: &SolverConfig) -> Self {
        let d = &rep.dual_report;
        Report {
            problem: problem.to_string(),
            certificate: d.certificate,
            sigma_star: unsigned_zeros(&d.sigma_star),
            x_star: unsigned_zeros(&rep.x_star),
            transformed_solution: unsigned_zeros(&rep.transformed_solution),
            value: unsigned_zero(rep.value),
            primal_value: unsigned_zero(d.primal),
            complementary_value: unsigned_zero(d.complementary),
            dual_value: unsigned_zero(d.dual),
            gap: d.gap,
            psd_min_eig: d.psd_margin,
            gradient_norm: d.grad_norm,
            iterations: d.iterations,
            oracle: rep.oracle.clone().map(|o| OracleCheck {
                value: unsigned_zero(o.value),
                x: unsigned_zeros(&o.x),
                ..o
            }),
            config: *cfg,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let v = |xs: &[f64]| format!("{xs:?}");
        let _ = writeln!(s, "problem:              {}", self.problem);
        let _ = writeln!(s, "certificate:          {:?}", self.certificate);
        let _ = writeln!(s, "sigma*:               {}", v(&self.sigma_star));
        let _ = writeln!(s, "transformed solution: {}", v(&self.transformed_solution));
        let _ = writeln!(s, "x*:                   {}", v(&self.x_star));
        let _ = writeln!(s, "value:                {}", num(self.value));
        let _ = writeln!(s, "P(x)     = {}", num(self.primal_value));
        let _ = writeln!(s, "Xi(x, s) = {}", num(self.complementary_value));
        let _ = writeln!(s, "Pd(s)    = {}", num(self.dual_value));
        let _ = writeln!(s, "gap:                  {:e}", self.gap);
        let _ = writeln!(s, "min eig G:            {}", num(self.psd_min_eig));
        let _ = writeln!(s, "gradient norm:        {:e}", self.gradient_norm);
        let _ = writeln!(s, "iterations:           {}", self.iterations);
        match &self.oracle {
            Some(o) => {
                let _ = writeln!(
                    s,
                    "oracle:               {} at {} ({})",
                    num(o.value),
                    v(&o.x),
                    if o.agreement { "agrees" } else { "DISAGREES" }
                );
            }
            None => {
                let _ = writeln!(s, "oracle:               skipped");
            }
        }
        s
    }
}

/// Plain decimal for ordinary magnitudes, exponent form for tiny or huge ones.
pub(crate) fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Writes `x,y,f` rows on an `n × n` lattice, first coordinate outermost.
/// Univariate polynomials get `y = 0` and `n` rows.
pub fn write_grid_csv(p: &MultiPoly, bx: &SearchBox, n: usize, path: &Path) -> Result<(), CliError> {
    let arity = p.arity();
    if arity == 0 || arity > 2 || bx.dim() != arity {
        return Err(CliError::Usage(format!(
            "grid export needs a 1- or 2-variable polynomial and a matching box (arity {arity}, box dim {})",
            bx.dim()
        )));
    }
    if n < 2 {
        return Err(CliError::Usage("grid needs at least 2 nodes per axis".into()));
    }
    let cp = p.compile();
    let rows = map_indexed(n, Execution::default(), |i| {
        let x = bx.node(0, i, n);
        if arity == 1 {
            vec![(x, 0.0, cp.eval(&[x]))]
        } else {
            (0..n)
                .map(|j| {
                    let y = bx.node(1, j, n);
                    (x, y, cp.eval(&[x, y]))
                })
                .collect()
        }
    });
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "x,y,f").map_err(io)?;
    for (x, y, f) in rows.into_iter().flatten() {
        writeln!(w, "{x:.16e},{y:.16e},{f:.16e}").map_err(io)?;
    }
    w.flush().map_err(io)
}

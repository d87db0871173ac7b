//! JSON problem files. Rationals are written as `"p/q"` strings; plain JSON
//! numbers are also accepted and read exactly as written.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::CliError;
use crate::canonical::{CanonicalProblem, ConvexQuadV, QuadOperator, VComponent};
use crate::polynomial::Rational;
use crate::smallmat::SymMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exact(pub Rational);

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

struct ExactVisitor;

impl<'de> Visitor<'de> for ExactVisitor {
    type Value = Exact;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or a \"p/q\" string")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Exact, E> {
        Rational::from_str(v).map(Exact).map_err(E::custom)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Exact, E> {
        Ok(Exact(Rational::from(v)))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Exact, E> {
        Ok(Exact(Rational::integer(i128::from(v))))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Exact, E> {
        if !v.is_finite() {
            return Err(E::custom("non-finite number"));
        }
        // shortest round-trip decimal, read back exactly
        self.visit_str(&v.to_string())
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Exact, D::Error> {
        d.deserialize_any(ExactVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    #[serde(rename = "C")]
    pub c_matrix: Vec<Vec<Exact>>,
    pub b: Vec<Exact>,
    pub c: Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VSpec {
    pub a: Exact,
    pub beta: Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<Exact>>,
    pub f: Vec<Exact>,
    pub operators: Vec<OperatorSpec>,
    #[serde(rename = "V")]
    pub v: Vec<VSpec>,
}

fn unwrap_rows(rows: &[Vec<Exact>]) -> Vec<Vec<Rational>> {
    rows.iter().map(|r| unwrap_vec(r)).collect()
}

fn unwrap_vec(v: &[Exact]) -> Vec<Rational> {
    v.iter().map(|e| e.0).collect()
}

fn wrap_rows(m: &SymMatrix<Rational>) -> Vec<Vec<Exact>> {
    m.rows().into_iter().map(|r| wrap_vec(&r)).collect()
}

fn wrap_vec(v: &[Rational]) -> Vec<Exact> {
    v.iter().copied().map(Exact).collect()
}

fn square(what: &str, rows: &[Vec<Exact>], n: usize) -> Result<SymMatrix<Rational>, String> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(format!("{what} must be {n}×{n}"));
    }
    SymMatrix::from_rows(&unwrap_rows(rows)).map_err(|e| format!("{what}: {e}"))
}

impl ProblemFile {
    pub fn from_problem(pr: &CanonicalProblem) -> Self {
        ProblemFile {
            n: pr.dim(),
            m: pr.num_dual(),
            a: wrap_rows(pr.a()),
            f: wrap_vec(pr.f()),
            operators: pr
                .operators()
                .iter()
                .map(|op| OperatorSpec {
                    c_matrix: wrap_rows(&op.c),
                    b: wrap_vec(&op.b),
                    c: Exact(op.offset),
                })
                .collect(),
            v: pr
                .v()
                .components()
                .iter()
                .map(|c| VSpec {
                    a: Exact(c.a),
                    beta: Exact(c.beta),
                })
                .collect(),
        }
    }

    /// Validates the file contents and builds the problem.
    pub fn to_problem(&self) -> Result<CanonicalProblem, String> {
        let n = self.n;
        let a = square("A", &self.a, n)?;
        if self.f.len() != n {
            return Err(format!("f must have {n} entries, found {}", self.f.len()));
        }
        if self.operators.len() != self.m {
            return Err(format!("expected {} operators, found {}", self.m, self.operators.len()));
        }
        if self.v.len() != self.m {
            return Err(format!("expected {} V components, found {}", self.m, self.v.len()));
        }
        let ops = self
            .operators
            .iter()
            .enumerate()
            .map(|(k, op)| {
                let c = square(&format!("operators[{k}].C"), &op.c_matrix, n)?;
                if op.b.len() != n {
                    return Err(format!("operators[{k}].b must have {n} entries"));
                }
                Ok(QuadOperator::new(c, unwrap_vec(&op.b), op.c.0))
            })
            .collect::<Result<Vec<_>, String>>()?;
        let v = ConvexQuadV::new(
            self.v
                .iter()
                .map(|c| VComponent {
                    a: c.a.0,
                    beta: c.beta.0,
                })
                .collect(),
        )
        .map_err(|e| e.to_string())?;
        CanonicalProblem::new(a, unwrap_vec(&self.f), ops, v).map_err(|e| e.to_string())
    }
}

pub fn parse_problem(path: &Path, text: &str) -> Result<CanonicalProblem, CliError> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    file.to_problem().map_err(|msg| CliError::Invalid {
        path: path.to_path_buf(),
        msg,
    })
}

pub fn load_problem_file(path: &Path) -> Result<CanonicalProblem, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_problem(path, &text)
}

pub fn problem_to_json(pr: &CanonicalProblem) -> String {
    serde_json::to_string_pretty(&ProblemFile::from_problem(pr)).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::gp_canonical_g;

    #[test]
    fn round_trip_is_exact() {
        let pr = gp_canonical_g().unwrap();
        let text = problem_to_json(&pr);
        assert!(text.contains("\"106/3\""));
        let back = parse_problem(Path::new("mem"), &text).unwrap();
        assert_eq!(back, pr);
    }

    #[test]
    fn numbers_are_read_exactly() {
        let text = r#"{"n":1,"m":1,"A":[[0.1]],"f":[2],"operators":[{"C":[["1/2"]],"b":[-1e-1],"c":0}],
                       "V":[{"a":1,"beta":0}]}"#;
        let pr = parse_problem(Path::new("mem"), text).unwrap();
        assert_eq!(pr.a().get(0, 0), Rational::frac(1, 10));
        assert_eq!(pr.operators()[0].b[0], Rational::frac(-1, 10));
    }

    #[test]
    fn invalid_files() {
        let bad_a = r#"{"n":1,"m":1,"A":[[1]],"f":[0],"operators":[{"C":[[1]],"b":[0],"c":0}],"V":[{"a":0,"beta":0}]}"#;
        let err = parse_problem(Path::new("p.json"), bad_a).unwrap_err().to_string();
        assert!(err.contains("a[0] must be > 0"), "{err}");

        let asym = r#"{"n":2,"m":1,"A":[[1,2],[3,1]],"f":[0,0],"operators":[{"C":[[1,0],[0,1]],"b":[0,0],"c":0}],"V":[{"a":1,"beta":0}]}"#;
        let err = parse_problem(Path::new("p.json"), asym).unwrap_err().to_string();
        assert!(err.contains("symmetric"), "{err}");

        let bad_num = "{\"n\":1,\n\"m\":1,\n\"A\":[[\"1/0\"]]}";
        let err = parse_problem(Path::new("p.json"), bad_num).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }
}

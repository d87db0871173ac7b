//! Dense symmetric matrices of size at most 4.
//!
//! Storage is the upper triangle only, so symmetry holds structurally.
//! Eigenvalues use closed forms for n <= 2 and cyclic Jacobi otherwise.

use thiserror::Error;

pub const MAX_DIM: usize = 4;

/// Default PSD boundary tolerance.
pub const PSD_TOL: f64 = 1e-9;

const JACOBI_OFF_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension {0} exceeds the supported maximum of {MAX_DIM}")]
    TooLarge(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("right-hand side is outside the column space (residual {residual:e})")]
    ColumnSpaceViolation { residual: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T = f64> {
    n: usize,
    upper: Vec<T>,
}

#[inline]
fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl<T: Copy + Default + PartialEq> SymMatrix<T> {
    pub fn zeros(n: usize) -> Result<Self, LinalgError> {
        if n > MAX_DIM {
            return Err(LinalgError::TooLarge(n));
        }
        Ok(SymMatrix {
            n,
            upper: vec![T::default(); n * (n + 1) / 2],
        })
    }

    /// Builds from the entries with `i <= j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self, LinalgError> {
        let mut m = Self::zeros(n)?;
        for i in 0..n {
            for j in i..n {
                m.upper[packed_index(n, i, j)] = f(i, j);
            }
        }
        Ok(m)
    }

    /// Builds from full rows, rejecting any asymmetry.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        for row in rows {
            if row.len() != n {
                return Err(LinalgError::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if rows[i][j] != rows[j][i] {
                    return Err(LinalgError::NotSymmetric { row: i, col: j });
                }
            }
        }
        Self::from_fn(n, |i, j| rows[i][j])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.upper[packed_index(self.n, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let k = packed_index(self.n, i, j);
        self.upper[k] = v;
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn map<U: Copy + Default + PartialEq>(&self, f: impl Fn(T) -> U) -> SymMatrix<U> {
        SymMatrix {
            n: self.n,
            upper: self.upper.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Result of a PSD membership test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdCheck {
    pub psd: bool,
    /// Smallest eigenvalue.
    pub margin: f64,
}

impl SymMatrix<f64> {
    pub fn identity(n: usize) -> Result<Self, LinalgError> {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    /// `self + s * other`
    pub fn add_scaled(&self, other: &Self, s: f64) -> Result<Self, LinalgError> {
        if other.n != self.n {
            return Err(LinalgError::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        Ok(SymMatrix {
            n: self.n,
            upper: self
                .upper
                .iter()
                .zip(&other.upper)
                .map(|(a, b)| a + s * b)
                .collect(),
        })
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if v.len() != self.n {
            return Err(LinalgError::DimensionMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        Ok((0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum())
            .collect())
    }

    /// `vᵀ S v`
    pub fn quad_form(&self, v: &[f64]) -> Result<f64, LinalgError> {
        Ok(dot(v, &self.mul_vec(v)?))
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += self.get(i, j).powi(2);
            }
        }
        s.sqrt()
    }

    /// All eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut vals = match self.n {
            0 => Vec::new(),
            1 => vec![self.get(0, 0)],
            2 => {
                let (a, b, c) = (self.get(0, 0), self.get(0, 1), self.get(1, 1));
                let mean = 0.5 * (a + c);
                let rad = (0.5 * (a - c)).hypot(b);
                let det = a * c - b * b;
                // the root sharing the sign of the mean is cancellation-free;
                // recover the other from the determinant
                if mean > 0.0 {
                    let hi = mean + rad;
                    vec![det / hi, hi]
                } else if mean < 0.0 {
                    let lo = mean - rad;
                    vec![lo, det / lo]
                } else {
                    vec![-rad, rad]
                }
            }
            _ => self.jacobi(false).0,
        };
        vals.sort_by(f64::total_cmp);
        vals
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(f64::INFINITY)
    }

    /// Eigen-decomposition by cyclic Jacobi: eigenvalues (unsorted) and the
    /// eigenvectors as columns of a row-major matrix.
    pub fn eigen(&self) -> (Vec<f64>, Vec<Vec<f64>>) {
        let (vals, vecs) = self.jacobi(true);
        (vals, vecs.expect("vectors requested"))
    }

    fn jacobi(&self, want_vectors: bool) -> (Vec<f64>, Option<Vec<Vec<f64>>>) {
        let n = self.n;
        let mut a = self.rows();
        let mut v: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let scale = self.frobenius();
        for _ in 0..JACOBI_MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i][j] * a[i][j])
                .sum::<f64>()
                .sqrt();
            if off <= JACOBI_OFF_TOL * scale || off == 0.0 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q] == 0.0 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[k][p], a[k][q]);
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[p][k], a[q][k]);
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                    if want_vectors {
                        for row in v.iter_mut() {
                            let (vkp, vkq) = (row[p], row[q]);
                            row[p] = c * vkp - s * vkq;
                            row[q] = s * vkp + c * vkq;
                        }
                    }
                }
            }
        }
        let vals = (0..n).map(|i| a[i][i]).collect();
        (vals, want_vectors.then_some(v))
    }

    /// PSD test: passes iff the smallest eigenvalue is `>= -tol`.
    pub fn is_psd(&self, tol: f64) -> PsdCheck {
        let margin = self.min_eigenvalue();
        PsdCheck {
            psd: margin >= -tol,
            margin,
        }
    }

    /// Solves `S x = v` in the least-squares sense and verifies column-space
    /// membership: the residual must not exceed `residual_tol * (1 + |v|)`.
    pub fn solve_sym(&self, v: &[f64], residual_tol: f64) -> Result<Vec<f64>, LinalgError> {
        if v.len() != self.n {
            return Err(LinalgError::DimensionMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        let x = self.direct_solve(v).unwrap_or_else(|| self.pseudo_solve(v));
        let sx = self.mul_vec(&x)?;
        let residual = norm(&sx.iter().zip(v).map(|(a, b)| a - b).collect::<Vec<_>>());
        if !residual.is_finite() || residual > residual_tol * (1.0 + norm(v)) {
            return Err(LinalgError::ColumnSpaceViolation { residual });
        }
        Ok(x)
    }

    /// Nonsingular solve: closed form for n <= 2, partial pivoting otherwise.
    /// `None` when the matrix is numerically singular.
    fn direct_solve(&self, v: &[f64]) -> Option<Vec<f64>> {
        let scale = self.frobenius();
        let tiny = 1e-14 * scale;
        match self.n {
            0 => Some(Vec::new()),
            1 => {
                let a = self.get(0, 0);
                (a.abs() > tiny).then(|| vec![v[0] / a])
            }
            2 => {
                let (a, b, c) = (self.get(0, 0), self.get(0, 1), self.get(1, 1));
                let det = a * c - b * b;
                (det.abs() > tiny * scale)
                    .then(|| vec![(c * v[0] - b * v[1]) / det, (a * v[1] - b * v[0]) / det])
            }
            n => {
                let mut m = self.rows();
                let mut rhs = v.to_vec();
                for col in 0..n {
                    let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
                    if m[piv][col].abs() <= tiny {
                        return None;
                    }
                    m.swap(col, piv);
                    rhs.swap(col, piv);
                    for r in col + 1..n {
                        let f = m[r][col] / m[col][col];
                        for k in col..n {
                            m[r][k] -= f * m[col][k];
                        }
                        rhs[r] -= f * rhs[col];
                    }
                }
                let mut x = vec![0.0; n];
                for r in (0..n).rev() {
                    let s: f64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
                    x[r] = (rhs[r] - s) / m[r][r];
                }
                Some(x)
            }
        }
    }

    /// Minimum-norm least-squares solution through the eigen-decomposition.
    fn pseudo_solve(&self, v: &[f64]) -> Vec<f64> {
        let (vals, vecs) = self.eigen();
        let cutoff = 1e-12 * vals.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        let n = self.n;
        let mut x = vec![0.0; n];
        for (k, &lam) in vals.iter().enumerate() {
            if lam.abs() <= cutoff || lam == 0.0 {
                continue;
            }
            let proj: f64 = (0..n).map(|i| vecs[i][k] * v[i]).sum::<f64>() / lam;
            for (i, xi) in x.iter_mut().enumerate() {
                *xi += proj * vecs[i][k];
            }
        }
        x
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Up to [`MAX_ARITY`] variables. Terms are kept in a `BTreeMap` keyed by
//! [`Monomial`], whose ordering is graded lexicographic, so iteration and
//! text output are deterministic. Zero coefficients are never stored, which
//! makes structural equality the same as polynomial equality.

mod rational;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub use rational::Rational;

pub const MAX_ARITY: usize = 4;

/// Highest exponent served from the per-point power table in [`CompiledPoly`].
const POW_TABLE: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("arity {0} exceeds the supported maximum of {MAX_ARITY}")]
    ArityTooLarge(usize),
    #[error("variable index {index} out of range for arity {arity}")]
    VariableOutOfRange { index: usize, arity: usize },
    #[error("rational overflow")]
    Overflow,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("cannot parse `{0}`")]
    Parse(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Exponent tuple. Slots past the owning polynomial's arity are always zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Monomial([u16; MAX_ARITY]);

impl Monomial {
    pub fn new(exps: &[u16]) -> Result<Self, PolyError> {
        if exps.len() > MAX_ARITY {
            return Err(PolyError::ArityTooLarge(exps.len()));
        }
        let mut m = [0u16; MAX_ARITY];
        m[..exps.len()].copy_from_slice(exps);
        Ok(Monomial(m))
    }

    pub fn exponents(&self) -> &[u16; MAX_ARITY] {
        &self.0
    }

    pub fn exponent(&self, var: usize) -> u16 {
        self.0[var]
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    fn mul(&self, other: &Monomial) -> Result<Monomial, PolyError> {
        let mut out = [0u16; MAX_ARITY];
        for (o, (a, b)) in out.iter_mut().zip(self.0.iter().zip(other.0.iter())) {
            *o = a.checked_add(*b).ok_or(PolyError::Overflow)?;
        }
        Ok(Monomial(out))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Graded lexicographic: total degree first, then exponents left to right.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    arity: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl MultiPoly {
    pub fn zero(arity: usize) -> Result<Self, PolyError> {
        if arity > MAX_ARITY {
            return Err(PolyError::ArityTooLarge(arity));
        }
        Ok(MultiPoly {
            arity,
            terms: BTreeMap::new(),
        })
    }

    pub fn constant(arity: usize, c: Rational) -> Result<Self, PolyError> {
        let mut p = Self::zero(arity)?;
        p.insert(Monomial::default(), c)?;
        Ok(p)
    }

    /// The polynomial `x_var`.
    pub fn var(arity: usize, var: usize) -> Result<Self, PolyError> {
        if var >= arity {
            return Err(PolyError::VariableOutOfRange { index: var, arity });
        }
        let mut exps = [0u16; MAX_ARITY];
        exps[var] = 1;
        let mut p = Self::zero(arity)?;
        p.insert(Monomial(exps), Rational::ONE)?;
        Ok(p)
    }

    /// Builds a polynomial from `(coefficient, exponents)` pairs; repeated
    /// monomials are summed.
    pub fn from_terms<'a, I>(arity: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Rational, &'a [u16])>,
    {
        let mut p = Self::zero(arity)?;
        for (c, exps) in terms {
            if exps.len() != arity {
                return Err(PolyError::ArityMismatch {
                    expected: arity,
                    got: exps.len(),
                });
            }
            p.insert(Monomial::new(exps)?, c)?;
        }
        Ok(p)
    }

    /// Univariate polynomial from ascending coefficients `c0 + c1 x + ...`.
    pub fn univariate(coeffs: &[Rational]) -> Result<Self, PolyError> {
        let mut p = Self::zero(1)?;
        for (k, c) in coeffs.iter().enumerate() {
            let e = u16::try_from(k).map_err(|_| PolyError::Overflow)?;
            p.insert(Monomial::new(&[e])?, *c)?;
        }
        Ok(p)
    }

    fn insert(&mut self, m: Monomial, c: Rational) -> Result<(), PolyError> {
        if c.is_zero() {
            return Ok(());
        }
        let sum = match self.terms.get(&m) {
            Some(old) => old.checked_add(&c)?,
            None => c,
        };
        if sum.is_zero() {
            self.terms.remove(&m);
        } else {
            self.terms.insert(m, sum);
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u16]) -> Rational {
        Monomial::new(exps)
            .ok()
            .and_then(|m| self.terms.get(&m).copied())
            .unwrap_or(Rational::ZERO)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::total_degree).max()
    }

    pub fn degree_in(&self, var: usize) -> Option<u16> {
        self.terms.keys().map(|m| m.exponent(var)).max()
    }

    fn check_arity(&self, other: &MultiPoly) -> Result<(), PolyError> {
        if self.arity != other.arity {
            return Err(PolyError::ArityMismatch {
                expected: self.arity,
                got: other.arity,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.check_arity(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(*m, *c)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> MultiPoly {
        MultiPoly {
            arity: self.arity,
            terms: self.terms.iter().map(|(m, c)| (*m, c.neg())).collect(),
        }
    }

    pub fn scale(&self, r: &Rational) -> Result<MultiPoly, PolyError> {
        let mut out = MultiPoly::zero(self.arity)?;
        for (m, c) in &self.terms {
            out.insert(*m, c.checked_mul(r)?)?;
        }
        Ok(out)
    }

    pub fn mul(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.check_arity(other)?;
        let mut out = MultiPoly::zero(self.arity)?;
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.insert(ma.mul(mb)?, ca.checked_mul(cb)?)?;
            }
        }
        Ok(out)
    }

    pub fn pow(&self, exp: u32) -> Result<MultiPoly, PolyError> {
        let mut acc = MultiPoly::constant(self.arity, Rational::ONE)?;
        for _ in 0..exp {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn add_constant(&self, c: Rational) -> Result<MultiPoly, PolyError> {
        let mut out = self.clone();
        out.insert(Monomial::default(), c)?;
        Ok(out)
    }

    pub fn partial_derivative(&self, var: usize) -> Result<MultiPoly, PolyError> {
        if var >= self.arity {
            return Err(PolyError::VariableOutOfRange {
                index: var,
                arity: self.arity,
            });
        }
        let mut out = MultiPoly::zero(self.arity)?;
        for (m, c) in &self.terms {
            let e = m.exponent(var);
            if e == 0 {
                continue;
            }
            let mut dm = *m;
            dm.0[var] = e - 1;
            out.insert(dm, c.checked_mul(&Rational::integer(e as i128))?)?;
        }
        Ok(out)
    }

    /// Floating-point evaluation.
    pub fn eval(&self, point: &[f64]) -> Result<f64, PolyError> {
        if point.len() != self.arity {
            return Err(PolyError::ArityMismatch {
                expected: self.arity,
                got: point.len(),
            });
        }
        Ok(self.compile().eval(point))
    }

    /// Exact evaluation at a rational point.
    pub fn eval_exact(&self, point: &[Rational]) -> Result<Rational, PolyError> {
        if point.len() != self.arity {
            return Err(PolyError::ArityMismatch {
                expected: self.arity,
                got: point.len(),
            });
        }
        let mut acc = Rational::ZERO;
        for (m, c) in &self.terms {
            let mut term = *c;
            for (x, &e) in point.iter().zip(m.0.iter()) {
                term = term.checked_mul(&x.checked_pow(e as u32)?)?;
            }
            acc = acc.checked_add(&term)?;
        }
        Ok(acc)
    }

    /// Returns `p(M·u + d)` expanded in the new variables `u`.
    ///
    /// `m` has one row per variable of `self` and one column per new variable.
    pub fn substitute_linear(
        &self,
        m: &[Vec<Rational>],
        d: &[Rational],
    ) -> Result<MultiPoly, PolyError> {
        if m.len() != self.arity || d.len() != self.arity {
            return Err(PolyError::Shape(format!(
                "expected {} rows and offsets, got {} rows and {} offsets",
                self.arity,
                m.len(),
                d.len()
            )));
        }
        let new_arity = m.first().map_or(0, Vec::len);
        if m.iter().any(|row| row.len() != new_arity) {
            return Err(PolyError::Shape("ragged substitution matrix".into()));
        }
        // each old variable becomes an affine form in the new ones
        let mut images = Vec::with_capacity(self.arity);
        for (row, offset) in m.iter().zip(d) {
            let mut lin = MultiPoly::constant(new_arity, *offset)?;
            for (j, coef) in row.iter().enumerate() {
                lin = lin.add(&MultiPoly::var(new_arity, j)?.scale(coef)?)?;
            }
            images.push(lin);
        }
        // cache powers of each image as they are needed
        let mut powers: Vec<Vec<MultiPoly>> = images
            .iter()
            .map(|_| MultiPoly::constant(new_arity, Rational::ONE).map(|one| vec![one]))
            .collect::<Result<_, _>>()?;
        let mut out = MultiPoly::zero(new_arity)?;
        for (mono, c) in &self.terms {
            let mut term = MultiPoly::constant(new_arity, *c)?;
            for (var, cache) in powers.iter_mut().enumerate() {
                let e = mono.exponent(var) as usize;
                while cache.len() <= e {
                    let next = cache[cache.len() - 1].mul(&images[var])?;
                    cache.push(next);
                }
                if e > 0 {
                    term = term.mul(&cache[e])?;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Embeds into a larger arity, sending variable `i` to `mapping[i]`.
    pub fn embed(&self, new_arity: usize, mapping: &[usize]) -> Result<MultiPoly, PolyError> {
        if mapping.len() != self.arity {
            return Err(PolyError::Shape("embedding needs one target per variable".into()));
        }
        if let Some(&bad) = mapping.iter().find(|&&j| j >= new_arity) {
            return Err(PolyError::VariableOutOfRange {
                index: bad,
                arity: new_arity,
            });
        }
        let mut out = MultiPoly::zero(new_arity)?;
        for (m, c) in &self.terms {
            let mut exps = [0u16; MAX_ARITY];
            for (i, &j) in mapping.iter().enumerate() {
                exps[j] = exps[j].checked_add(m.0[i]).ok_or(PolyError::Overflow)?;
            }
            out.insert(Monomial(exps), *c)?;
        }
        Ok(out)
    }

    /// First monomial (descending graded-lex) where the two polynomials
    /// disagree, with both coefficients.
    pub fn first_difference(&self, other: &MultiPoly) -> Option<(Monomial, Rational, Rational)> {
        if self.arity != other.arity {
            return Some((Monomial::default(), Rational::ZERO, Rational::ZERO));
        }
        let mut keys: Vec<&Monomial> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter().rev().find_map(|m| {
            let a = self.terms.get(m).copied().unwrap_or(Rational::ZERO);
            let b = other.terms.get(m).copied().unwrap_or(Rational::ZERO);
            (a != b).then_some((*m, a, b))
        })
    }

    /// One term per line, `num/den e1 ... ek`, descending graded-lex order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (m, c) in self.terms.iter().rev() {
            s.push_str(&c.to_string());
            for e in &m.0[..self.arity] {
                s.push(' ');
                s.push_str(&e.to_string());
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(arity: usize, text: &str) -> Result<MultiPoly, PolyError> {
        let mut p = MultiPoly::zero(arity)?;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let mut fields = line.split_whitespace();
            let c: Rational = fields
                .next()
                .ok_or_else(|| PolyError::Parse(line.to_string()))?
                .parse()?;
            let exps = fields
                .map(|f| f.parse::<u16>().map_err(|_| PolyError::Parse(line.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            if exps.len() != arity {
                return Err(PolyError::ArityMismatch {
                    expected: arity,
                    got: exps.len(),
                });
            }
            p.insert(Monomial::new(&exps)?, c)?;
        }
        Ok(p)
    }

    /// Float copy of the terms for tight evaluation loops.
    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            arity: self.arity,
            max_exp: self.terms.keys().flat_map(|m| m.0).max().unwrap_or(0) as usize,
            terms: self.terms.iter().map(|(m, c)| (c.to_f64(), m.0)).collect(),
        }
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly[{}]{{", self.arity)?;
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:?}*{:?}", c, &m.0[..self.arity])?;
        }
        write!(f, "}}")
    }
}

/// Float-coefficient snapshot of a [`MultiPoly`]; evaluation skips the arity
/// check and is meant for oracle inner loops.
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    arity: usize,
    max_exp: usize,
    terms: Vec<(f64, [u16; MAX_ARITY])>,
}

impl CompiledPoly {
    pub fn arity(&self) -> usize {
        self.arity
    }

    #[inline]
    pub fn eval(&self, point: &[f64]) -> f64 {
        debug_assert_eq!(point.len(), self.arity);
        if self.max_exp >= POW_TABLE {
            return self
                .terms
                .iter()
                .map(|(c, exps)| {
                    point
                        .iter()
                        .zip(exps.iter())
                        .fold(*c, |acc, (x, &e)| acc * x.powi(i32::from(e)))
                })
                .sum();
        }
        let mut pw = [[1.0; POW_TABLE]; MAX_ARITY];
        for (row, &x) in pw.iter_mut().zip(point) {
            for e in 1..=self.max_exp {
                row[e] = row[e - 1] * x;
            }
        }
        self.terms
            .iter()
            .map(|(c, exps)| {
                exps[..self.arity]
                    .iter()
                    .zip(&pw)
                    .fold(*c, |acc, (&e, row)| acc * row[e as usize])
            })
            .sum()
    }
}

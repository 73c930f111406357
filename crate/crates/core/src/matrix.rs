//! Dense complex matrices and the deterministic initial conditions the
//! diffusion starts from.

use std::fmt::Write as _;
use std::str::FromStr;

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense `n × n` complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: Mat<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { inner: Mat::zeros(n, n) }
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self { inner: Mat::from_fn(n, n, f) }
    }

    /// Wraps a faer matrix; rejects non-square or non-finite input.
    pub fn from_mat(inner: Mat<Complex64>) -> Result<Self> {
        if inner.nrows() != inner.ncols() {
            return Err(Error::invalid(format!(
                "matrix must be square, got {}x{}",
                inner.nrows(),
                inner.ncols()
            )));
        }
        let m = Self { inner };
        if !m.is_finite() {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        Ok(m)
    }

    /// Row-major nested rows.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::invalid(format!(
                "row {i} has {} entries, expected {n}",
                r.len()
            )));
        }
        Self::from_mat(Mat::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn n(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.inner[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.inner[(i, j)] = v;
    }

    pub fn as_mat(&self) -> &Mat<Complex64> {
        &self.inner
    }

    pub fn into_mat(self) -> Mat<Complex64> {
        self.inner
    }

    pub fn is_finite(&self) -> bool {
        (0..self.n()).all(|j| (0..self.n()).all(|i| {
            let v = self.inner[(i, j)];
            v.re.is_finite() && v.im.is_finite()
        }))
    }

    pub fn adjoint(&self) -> Self {
        Self { inner: self.inner.adjoint().to_owned() }
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.inner.norm_l2()
    }

    /// `U X U†`.
    pub fn conjugate_by(&self, u: &Mat<Complex64>) -> Self {
        Self { inner: u * &self.inner * u.adjoint() }
    }

    /// Parses the explicit-matrix text format: first line `n`, then `n` lines
    /// of `2n` comma-separated numbers `re,im,re,im,...`.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::invalid("empty matrix file"))?;
        let n = usize::from_str(header.trim())
            .map_err(|e| Error::invalid(format!("line 1: bad dimension {header:?}: {e}")))?;
        if n == 0 {
            return Err(Error::invalid("line 1: dimension must be positive"));
        }
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| Error::invalid(format!("expected {n} rows, found {i}")))?;
            let nums = line
                .split(',')
                .map(|t| f64::from_str(t.trim()))
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::invalid(format!("row {}: {e}", i + 1)))?;
            if nums.len() != 2 * n {
                return Err(Error::invalid(format!(
                    "row {}: expected {} numbers, found {}",
                    i + 1,
                    2 * n,
                    nums.len()
                )));
            }
            rows.push(nums.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect());
        }
        if lines.next().is_some() {
            return Err(Error::invalid(format!("trailing data after {n} rows")));
        }
        Self::from_rows(&rows)
    }

    pub fn to_text(&self) -> String {
        let n = self.n();
        let mut out = format!("{n}\n");
        for i in 0..n {
            for j in 0..n {
                let v = self.get(i, j);
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{},{}", v.re, v.im);
            }
            out.push('\n');
        }
        out
    }
}

/// Deterministic description of `X0`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Zero,
    /// `diag(a, ..., a, -a, ..., -a)` with `n/2` copies of each sign.
    Spiric(Complex64),
    /// `alpha` on the first superdiagonal.
    Jordan(Complex64),
    Explicit(ComplexMatrix),
}

/// Realizes `X0` at dimension `n`.
pub fn build_initial(cond: &InitialCondition, n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::invalid("matrix dimension must be at least 1"));
    }
    match cond {
        InitialCondition::Zero => Ok(ComplexMatrix::zeros(n)),
        InitialCondition::Spiric(a) => {
            if !n.is_multiple_of(2) {
                return Err(Error::invalid(format!("spiric initial condition needs even n, got {n}")));
            }
            let a = *a;
            Ok(ComplexMatrix::from_fn(n, |i, j| match (i == j, i < n / 2) {
                (true, true) => a,
                (true, false) => -a,
                _ => Complex64::new(0.0, 0.0),
            }))
        }
        InitialCondition::Jordan(alpha) => {
            let alpha = *alpha;
            Ok(ComplexMatrix::from_fn(n, |i, j| {
                if j == i + 1 { alpha } else { Complex64::new(0.0, 0.0) }
            }))
        }
        InitialCondition::Explicit(m) => {
            if m.n() != n {
                return Err(Error::invalid(format!(
                    "explicit matrix is {}x{}, requested n = {n}",
                    m.n(),
                    m.n()
                )));
            }
            if !m.is_finite() {
                return Err(Error::invalid("explicit matrix has non-finite entries"));
            }
            Ok(m.clone())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn spiric_is_split_diagonal() {
        let x = build_initial(&InitialCondition::Spiric(c(1.0, 0.0)), 4).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| x.get(i, i).re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
        assert_eq!(x.get(0, 1), c(0.0, 0.0));
    }

    #[test]
    fn zero_and_jordan() {
        let z = build_initial(&InitialCondition::Zero, 3).unwrap();
        assert_eq!(z.norm(), 0.0);
        let j = build_initial(&InitialCondition::Jordan(c(1.0, 0.0)), 3).unwrap();
        for i in 0..3 {
            for k in 0..3 {
                let expect = if k == i + 1 { 1.0 } else { 0.0 };
                assert_eq!(j.get(i, k), c(expect, 0.0));
            }
        }
    }

    #[test]
    fn invalid_requests() {
        assert!(matches!(
            build_initial(&InitialCondition::Spiric(c(1.0, 0.0)), 3),
            Err(Error::InvalidArgument(_))
        ));
        assert!(build_initial(&InitialCondition::Zero, 0).is_err());
        let m = ComplexMatrix::zeros(2);
        assert!(build_initial(&InitialCondition::Explicit(m), 3).is_err());
        assert!(ComplexMatrix::from_rows(&[vec![c(1.0, 0.0)], vec![]]).is_err());
        assert!(ComplexMatrix::from_mat(Mat::zeros(2, 3)).is_err());
    }

    #[test]
    fn explicit_text_roundtrip() {
        let m = ComplexMatrix::from_fn(3, |i, j| c(i as f64 + 0.25, -(j as f64) * 1.5e-3));
        let back = ComplexMatrix::parse_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
        assert!(ComplexMatrix::parse_text("2\n1,0,2,0\n").is_err());
        assert!(ComplexMatrix::parse_text("1\n1,0,2\n").is_err());
        assert!(ComplexMatrix::parse_text("1\nnan,0\n").is_err());
    }
}

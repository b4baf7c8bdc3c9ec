//! Scalar and matrix Laurent polynomials on the torus.
//!
//! A [`LaurentPoly`] stores `m(z) = Σ coeffs[k] z^(min_deg + k)` with complex
//! double coefficients; a [`MatLaurentPoly`] stores `A(z) = Σ A_k z^(min_deg + k)`
//! with `n × n` coefficient matrices. Both are kept in canonical form: the
//! first and last stored coefficients have modulus at least [`COEFF_EPS`],
//! and the zero polynomial has no coefficients at all.
//!
//! When a polynomial is read as a function of an angle `t`, the point on the
//! torus is `z = e^{-it}` (see [`torus_point`]).

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense complex matrix used for coefficient matrices and torus samples.
pub type CMat = DMatrix<Complex64>;

/// Coefficients with modulus below this are stripped from the ends.
pub const COEFF_EPS: f64 = 1e-14;
/// Default number of equispaced torus samples.
pub const DEFAULT_GRID: usize = 1024;
/// Default tolerance for torus checks.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Below this modulus a function counts as vanishing on the torus.
pub const SINGULAR_EPS: f64 = 1e-9;

/// The point `e^{-it}` of the torus.
pub fn torus_point(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, -t)
}

/// `grid_size` equispaced torus points `e^{-2πik/G}`, `k = 0..G`.
pub fn torus_grid(grid_size: usize) -> Vec<Complex64> {
    (0..grid_size)
        .map(|k| torus_point(2.0 * PI * k as f64 / grid_size as f64))
        .collect()
}

/// Entrywise max modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, c| acc.max(c.norm()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawLaurent")]
pub struct LaurentPoly {
    min_deg: i32,
    coeffs: Vec<Complex64>,
}

#[derive(Deserialize)]
struct RawLaurent {
    min_deg: i32,
    coeffs: Vec<Complex64>,
}

impl From<RawLaurent> for LaurentPoly {
    fn from(raw: RawLaurent) -> Self {
        LaurentPoly::new(raw.min_deg, raw.coeffs)
    }
}

impl LaurentPoly {
    pub fn new(min_deg: i32, coeffs: Vec<Complex64>) -> Self {
        let mut p = LaurentPoly { min_deg, coeffs };
        p.strip(COEFF_EPS);
        p
    }

    pub fn from_real(min_deg: i32, coeffs: &[f64]) -> Self {
        Self::new(min_deg, coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        LaurentPoly { min_deg: 0, coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(0, vec![c])
    }

    /// `c · z^deg`
    pub fn monomial(c: Complex64, deg: i32) -> Self {
        Self::new(deg, vec![c])
    }

    fn strip(&mut self, tol: f64) {
        let first = self.coeffs.iter().position(|c| c.norm() >= tol);
        match first {
            None => {
                self.coeffs.clear();
                self.min_deg = 0;
            }
            Some(first) => {
                let last = self.coeffs.iter().rposition(|c| c.norm() >= tol).unwrap();
                self.coeffs.truncate(last + 1);
                self.coeffs.drain(..first);
                self.min_deg += first as i32;
            }
        }
    }

    /// Copy with end coefficients of modulus below `tol` removed.
    pub fn trimmed(&self, tol: f64) -> Self {
        let mut p = self.clone();
        p.strip(tol.max(COEFF_EPS));
        p
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest exponent; `0` for the zero polynomial.
    pub fn min_deg(&self) -> i32 {
        self.min_deg
    }

    /// Highest exponent; `min_deg - 1` for the zero polynomial.
    pub fn max_deg(&self) -> i32 {
        self.min_deg + self.coeffs.len() as i32 - 1
    }

    /// Number of stored coefficients.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `max_deg - min_deg`, or `None` for the zero polynomial.
    pub fn span(&self) -> Option<usize> {
        (!self.is_zero()).then(|| self.coeffs.len() - 1)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `z^deg` (zero outside the stored range).
    pub fn coeff(&self, deg: i32) -> Complex64 {
        let k = deg - self.min_deg;
        if k < 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs.get(k as usize).copied().unwrap_or_default()
    }

    /// Iterator over `(exponent, coefficient)` pairs.
    pub fn terms(&self) -> impl Iterator<Item = (i32, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(k, &c)| (self.min_deg + k as i32, c))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        let horner = self
            .coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
        horner * z.powi(self.min_deg)
    }

    /// `p*(z) = Σ conj(c_k) z^{-k}`, which equals `conj(p(z))` on the torus.
    pub fn adjoint(&self) -> Self {
        LaurentPoly {
            min_deg: -self.max_deg(),
            coeffs: self.coeffs.iter().rev().map(|c| c.conj()).collect(),
        }
        .canonical()
    }

    fn canonical(mut self) -> Self {
        if self.is_zero() {
            self.min_deg = 0;
        }
        self
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.min_deg, self.coeffs.iter().map(|&x| x * c).collect())
    }

    /// `z^k · p(z)`
    pub fn shift(&self, k: i32) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        LaurentPoly { min_deg: self.min_deg + k, coeffs: self.coeffs.clone() }
    }

    /// `p(z^n)` for `n >= 1`.
    pub fn dilate(&self, n: usize) -> Self {
        assert!(n >= 1, "dilation factor must be positive");
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); (self.coeffs.len() - 1) * n + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            coeffs[k * n] = c;
        }
        LaurentPoly { min_deg: self.min_deg * n as i32, coeffs }
    }

    /// Largest coefficient modulus.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, c| acc.max(c.norm()))
    }

    /// Largest coefficient modulus of `self - other`.
    pub fn distance(&self, other: &Self) -> f64 {
        (self - other).max_coeff()
    }

    /// Single-term polynomial check: `Some((coefficient, exponent))`.
    pub fn as_monomial(&self) -> Option<(Complex64, i32)> {
        (self.coeffs.len() == 1).then(|| (self.coeffs[0], self.min_deg))
    }

    /// Smallest modulus over `grid_size` torus samples.
    pub fn min_modulus_on_torus(&self, grid_size: usize) -> f64 {
        torus_grid(grid_size)
            .into_iter()
            .map(|z| self.eval(z).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

impl Default for LaurentPoly {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (deg, c) in self.terms() {
            if c.norm() == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            if deg != 0 {
                write!(f, "z^{deg}")?;
            }
        }
        Ok(())
    }
}

impl<'a> Add<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;

    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let lo = self.min_deg.min(rhs.min_deg);
        let hi = self.max_deg().max(rhs.max_deg());
        let coeffs = (lo..=hi).map(|d| self.coeff(d) + rhs.coeff(d)).collect();
        LaurentPoly::new(lo, coeffs)
    }
}

impl<'a> Sub<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;

    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self + &(-rhs)
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;

    fn neg(self) -> LaurentPoly {
        LaurentPoly { min_deg: self.min_deg, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl<'a> Mul<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;

    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() || rhs.is_zero() {
            return LaurentPoly::zero();
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        LaurentPoly::new(self.min_deg + rhs.min_deg, coeffs)
    }
}

macro_rules! forward_owned_binop {
    ($ty:ty, $tr:ident, $method:ident) => {
        impl $tr<$ty> for $ty {
            type Output = $ty;
            fn $method(self, rhs: $ty) -> $ty {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_owned_binop!(LaurentPoly, Add, add);
forward_owned_binop!(LaurentPoly, Sub, sub);
forward_owned_binop!(LaurentPoly, Mul, mul);

impl Neg for LaurentPoly {
    type Output = LaurentPoly;

    fn neg(self) -> LaurentPoly {
        -&self
    }
}

/// Square matrix whose entries are Laurent polynomials, stored as
/// `Σ_k coeffs[k] z^(min_deg + k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatLaurentPoly {
    n: usize,
    min_deg: i32,
    coeffs: Vec<CMat>,
}

impl MatLaurentPoly {
    pub fn new(n: usize, min_deg: i32, coeffs: Vec<CMat>) -> Result<Self> {
        if let Some(bad) = coeffs.iter().find(|c| c.nrows() != n || c.ncols() != n) {
            return Err(Error::InvalidOperand(format!(
                "coefficient matrix is {}x{}, expected {n}x{n}",
                bad.nrows(),
                bad.ncols()
            )));
        }
        let mut m = MatLaurentPoly { n, min_deg, coeffs };
        m.strip(COEFF_EPS);
        Ok(m)
    }

    fn strip(&mut self, tol: f64) {
        let first = self.coeffs.iter().position(|c| max_abs(c) >= tol);
        match first {
            None => {
                self.coeffs.clear();
                self.min_deg = 0;
            }
            Some(first) => {
                let last = self.coeffs.iter().rposition(|c| max_abs(c) >= tol).unwrap();
                self.coeffs.truncate(last + 1);
                self.coeffs.drain(..first);
                self.min_deg += first as i32;
            }
        }
    }

    pub fn zero(n: usize) -> Self {
        MatLaurentPoly { n, min_deg: 0, coeffs: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(CMat::identity(n, n))
    }

    pub fn constant(m: CMat) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "constant matrix must be square");
        let n = m.nrows();
        let mut p = MatLaurentPoly { n, min_deg: 0, coeffs: vec![m] };
        p.strip(COEFF_EPS);
        p
    }

    /// Builds the matrix from a row-major grid of scalar entries.
    pub fn from_entries(entries: &[Vec<LaurentPoly>]) -> Result<Self> {
        let n = entries.len();
        if entries.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidOperand("entry grid is not square".into()));
        }
        let nonzero = entries.iter().flatten().filter(|p| !p.is_zero());
        let lo = nonzero.clone().map(|p| p.min_deg()).min();
        let hi = nonzero.map(|p| p.max_deg()).max();
        let (Some(lo), Some(hi)) = (lo, hi) else {
            return Ok(Self::zero(n));
        };
        let coeffs = (lo..=hi)
            .map(|d| CMat::from_fn(n, n, |i, j| entries[i][j].coeff(d)))
            .collect();
        Self::new(n, lo, coeffs)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn min_deg(&self) -> i32 {
        self.min_deg
    }

    pub fn max_deg(&self) -> i32 {
        self.min_deg + self.coeffs.len() as i32 - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[CMat] {
        &self.coeffs
    }

    /// Coefficient matrix of `z^deg` (zero outside the stored range).
    pub fn coeff(&self, deg: i32) -> CMat {
        let k = deg - self.min_deg;
        if k < 0 || k as usize >= self.coeffs.len() {
            return CMat::zeros(self.n, self.n);
        }
        self.coeffs[k as usize].clone()
    }

    /// `max_deg - min_deg`, zero for the zero matrix.
    pub fn span(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn entry(&self, i: usize, j: usize) -> LaurentPoly {
        LaurentPoly::new(self.min_deg, self.coeffs.iter().map(|c| c[(i, j)]).collect())
    }

    pub fn entries(&self) -> Vec<Vec<LaurentPoly>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.entry(i, j)).collect()).collect()
    }

    pub fn eval(&self, z: Complex64) -> CMat {
        let mut acc = CMat::zeros(self.n, self.n);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        if self.coeffs.is_empty() {
            acc
        } else {
            acc * z.powi(self.min_deg)
        }
    }

    /// `A*(z) = Σ A_k^H z^{-k}`, equal to the conjugate transpose of `A(z)` on the torus.
    pub fn adjoint(&self) -> Self {
        if self.is_zero() {
            return Self::zero(self.n);
        }
        MatLaurentPoly {
            n: self.n,
            min_deg: -self.max_deg(),
            coeffs: self.coeffs.iter().rev().map(|c| c.adjoint()).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut m = MatLaurentPoly {
            n: self.n,
            min_deg: self.min_deg,
            coeffs: self.coeffs.iter().map(|m| m * c).collect(),
        };
        m.strip(COEFF_EPS);
        m
    }

    /// `z^k · A(z)`
    pub fn shift(&self, k: i32) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        MatLaurentPoly { n: self.n, min_deg: self.min_deg + k, coeffs: self.coeffs.clone() }
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self> {
        self.check_dim(rhs)?;
        if self.is_zero() {
            return Ok(rhs.clone());
        }
        if rhs.is_zero() {
            return Ok(self.clone());
        }
        let lo = self.min_deg.min(rhs.min_deg);
        let hi = self.max_deg().max(rhs.max_deg());
        let coeffs = (lo..=hi).map(|d| self.coeff(d) + rhs.coeff(d)).collect();
        Self::new(self.n, lo, coeffs)
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self> {
        self.checked_add(&rhs.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self> {
        self.check_dim(rhs)?;
        if self.is_zero() || rhs.is_zero() {
            return Ok(Self::zero(self.n));
        }
        let mut coeffs = vec![CMat::zeros(self.n, self.n); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self::new(self.n, self.min_deg + rhs.min_deg, coeffs)
    }

    fn check_dim(&self, rhs: &Self) -> Result<()> {
        if self.n != rhs.n {
            return Err(Error::InvalidOperand(format!(
                "dimension mismatch: {}x{} vs {}x{}",
                self.n, self.n, rhs.n, rhs.n
            )));
        }
        Ok(())
    }

    /// Largest coefficient modulus over all entries.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(max_abs).fold(0.0, f64::max)
    }

    /// Largest coefficient modulus of `self - other`; infinite on dimension mismatch.
    pub fn distance(&self, other: &Self) -> f64 {
        self.checked_sub(other).map(|d| d.max_coeff()).unwrap_or(f64::INFINITY)
    }

    /// Determinant by cofactor expansion over the Laurent polynomial ring.
    pub fn det(&self) -> LaurentPoly {
        det_entries(&self.entries())
    }

    /// Adjugate (transposed cofactor matrix): `A · adj(A) = det(A) · I`.
    pub fn adjugate(&self) -> Self {
        let e = self.entries();
        let n = self.n;
        if n == 1 {
            return Self::identity(1);
        }
        let mut adj = vec![vec![LaurentPoly::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let minor: Vec<Vec<LaurentPoly>> = (0..n)
                    .filter(|&r| r != i)
                    .map(|r| (0..n).filter(|&c| c != j).map(|c| e[r][c].clone()).collect())
                    .collect();
                let cof = det_entries(&minor);
                adj[j][i] = if (i + j) % 2 == 0 { cof } else { -cof };
            }
        }
        Self::from_entries(&adj).expect("adjugate is square")
    }
}

impl Mul for &MatLaurentPoly {
    type Output = MatLaurentPoly;

    /// Panics on dimension mismatch; see [`MatLaurentPoly::checked_mul`].
    fn mul(self, rhs: &MatLaurentPoly) -> MatLaurentPoly {
        self.checked_mul(rhs).expect("matrix dimension mismatch")
    }
}

impl Mul for MatLaurentPoly {
    type Output = MatLaurentPoly;

    fn mul(self, rhs: MatLaurentPoly) -> MatLaurentPoly {
        &self * &rhs
    }
}

fn det_entries(e: &[Vec<LaurentPoly>]) -> LaurentPoly {
    match e.len() {
        0 => LaurentPoly::one(),
        1 => e[0][0].clone(),
        2 => &(&e[0][0] * &e[1][1]) - &(&e[0][1] * &e[1][0]),
        n => {
            let mut acc = LaurentPoly::zero();
            for j in 0..n {
                if e[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<LaurentPoly>> = e[1..]
                    .iter()
                    .map(|row| (0..n).filter(|&c| c != j).map(|c| row[c].clone()).collect())
                    .collect();
                let term = &e[0][j] * &det_entries(&minor);
                acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawMatLaurent {
    n: usize,
    min_deg: i32,
    coeffs: Vec<Vec<Vec<Complex64>>>,
}

impl Serialize for MatLaurentPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawMatLaurent {
            n: self.n,
            min_deg: self.min_deg,
            coeffs: self
                .coeffs
                .iter()
                .map(|m| (0..self.n).map(|i| (0..self.n).map(|j| m[(i, j)]).collect()).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatLaurentPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawMatLaurent::deserialize(d)?;
        let n = raw.n;
        let mut coeffs = Vec::with_capacity(raw.coeffs.len());
        for rows in raw.coeffs {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(D::Error::custom(format!("coefficient matrix is not {n}x{n}")));
            }
            coeffs.push(CMat::from_fn(n, n, |i, j| rows[i][j]));
        }
        MatLaurentPoly::new(n, raw.min_deg, coeffs).map_err(D::Error::custom)
    }
}

/// Outcome of a torus unitarity test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitarityReport {
    pub unitary: bool,
    /// `max_z ‖A(z)*A(z) − I‖` in the entrywise max norm.
    pub max_residual: f64,
}

/// Samples `A*A − I` on the torus. The grid is raised to `2·span + 1` points if
/// `grid_size` is smaller.
pub fn is_unitary_on_torus(a: &MatLaurentPoly, grid_size: usize, tol: f64) -> UnitarityReport {
    let grid = grid_size.max(2 * a.span() + 1);
    let id = CMat::identity(a.dim(), a.dim());
    let max_residual = torus_grid(grid)
        .into_iter()
        .map(|z| {
            let m = a.eval(z);
            max_abs(&(m.adjoint() * &m - &id))
        })
        .fold(0.0, f64::max);
    UnitarityReport { unitary: max_residual <= tol, max_residual }
}

/// Largest refinement the winding computation will attempt.
const MAX_WINDING_GRID: usize = 1 << 22;

/// Winding number of `p` around the origin as `z` runs once counterclockwise
/// around the torus, from principal-branch phase increments. The grid is
/// refined by 4 while any single increment exceeds π/2.
///
/// The grid never starts below `8·(max(|min_deg|, |max_deg|) + 1)` points,
/// otherwise a monomial factor `z^d` could alias to a smaller winding.
pub fn winding_number(p: &LaurentPoly, grid_size: usize) -> Result<i32> {
    let reach = p.min_deg().unsigned_abs().max(p.max_deg().unsigned_abs()) as usize;
    let mut grid = grid_size.max(8 * (reach + 1));
    loop {
        let samples: Vec<Complex64> = (0..grid)
            .map(|k| p.eval(Complex64::from_polar(1.0, 2.0 * PI * k as f64 / grid as f64)))
            .collect();
        let min_modulus = samples.iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min);
        if min_modulus <= SINGULAR_EPS {
            return Err(Error::SingularOnTorus { min_modulus });
        }
        let mut total = 0.0;
        let mut max_step: f64 = 0.0;
        for k in 0..grid {
            let step = (samples[(k + 1) % grid] / samples[k]).arg();
            max_step = max_step.max(step.abs());
            total += step;
        }
        if max_step <= PI / 2.0 {
            return Ok((total / (2.0 * PI)).round() as i32);
        }
        if grid >= MAX_WINDING_GRID {
            return Err(Error::Numerical(format!(
                "phase increments stay above pi/2 at {grid} samples"
            )));
        }
        grid *= 4;
    }
}

/// K₁ class of a nonsingular matrix function: the winding number of `det A`.
pub fn k1_class(a: &MatLaurentPoly) -> Result<i32> {
    winding_number(&a.det(), DEFAULT_GRID)
}

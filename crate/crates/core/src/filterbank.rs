//! Subband filter systems and their polyphase matrices.
//!
//! Filters follow the `√N` convention: the low-pass filter satisfies
//! `m₀(1) = Σ aₙ = √N`. Coefficients in the Daubechies `h` convention
//! (`Σ hₙ = 2` for `N = 2`) convert with `aₙ = hₙ / √2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::{
    max_abs, torus_grid, CMat, LaurentPoly, MatLaurentPoly, SINGULAR_EPS,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBank", into = "RawBank")]
pub struct FilterBank {
    scale_n: usize,
    filters: Vec<LaurentPoly>,
}

#[derive(Serialize, Deserialize)]
struct RawBank {
    #[serde(rename = "N")]
    n: usize,
    filters: Vec<LaurentPoly>,
    #[serde(default = "default_convention")]
    convention: String,
}

fn default_convention() -> String {
    CONVENTION.to_string()
}

/// Normalization tag written into bank JSON.
pub const CONVENTION: &str = "sqrtN";

impl TryFrom<RawBank> for FilterBank {
    type Error = Error;

    fn try_from(raw: RawBank) -> Result<Self> {
        if raw.convention != CONVENTION {
            return Err(Error::Validation(format!(
                "unsupported coefficient convention {:?}, expected {CONVENTION:?}",
                raw.convention
            )));
        }
        FilterBank::new(raw.n, raw.filters)
    }
}

impl From<FilterBank> for RawBank {
    fn from(bank: FilterBank) -> Self {
        RawBank { n: bank.scale_n, filters: bank.filters, convention: default_convention() }
    }
}

impl FilterBank {
    pub fn new(scale_n: usize, filters: Vec<LaurentPoly>) -> Result<Self> {
        if scale_n < 2 {
            return Err(Error::Validation(format!("scale number must be >= 2, got {scale_n}")));
        }
        if filters.len() != scale_n {
            return Err(Error::Validation(format!(
                "expected {scale_n} filters, got {}",
                filters.len()
            )));
        }
        Ok(FilterBank { scale_n, filters })
    }

    /// `m₀ = (1 + z)/√2`, `m₁ = (1 − z)/√2`.
    pub fn haar() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        FilterBank {
            scale_n: 2,
            filters: vec![LaurentPoly::from_real(0, &[s, s]), LaurentPoly::from_real(0, &[s, -s])],
        }
    }

    /// Two-band bank from a low-pass filter, completed with
    /// `b_k = (−1)^k conj(a_{L−k})` where `L` is the odd number
    /// `min_deg + max_deg` (or one more than it when that sum is even).
    /// For `m₀ = a₀ + … + a_{2n+1} z^{2n+1}` this is `L = 2n + 1`.
    pub fn from_lowpass(m0: LaurentPoly) -> Self {
        let m1 = orthogonal_completion(&m0);
        FilterBank { scale_n: 2, filters: vec![m0, m1] }
    }

    pub fn scale_n(&self) -> usize {
        self.scale_n
    }

    pub fn filters(&self) -> &[LaurentPoly] {
        &self.filters
    }

    pub fn filter(&self, i: usize) -> &LaurentPoly {
        &self.filters[i]
    }

    pub fn lowpass(&self) -> &LaurentPoly {
        &self.filters[0]
    }

    /// `|m₀(1) − √N|`
    pub fn lowpass_defect(&self) -> f64 {
        (self.lowpass().eval(Complex64::new(1.0, 0.0)) - (self.scale_n as f64).sqrt()).norm()
    }

    /// Largest coefficient distance between corresponding filters.
    pub fn distance(&self, other: &FilterBank) -> f64 {
        if self.scale_n != other.scale_n {
            return f64::INFINITY;
        }
        self.filters
            .iter()
            .zip(&other.filters)
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max)
    }
}

/// The high-pass partner `b_k = (−1)^k conj(a_{L−k})` of a two-band low-pass filter.
pub fn orthogonal_completion(m0: &LaurentPoly) -> LaurentPoly {
    if m0.is_zero() {
        return LaurentPoly::zero();
    }
    let mut l = m0.min_deg() + m0.max_deg();
    if l.rem_euclid(2) == 0 {
        l += 1;
    }
    let lo = l - m0.max_deg();
    let hi = l - m0.min_deg();
    let coeffs = (lo..=hi)
        .map(|k| {
            let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            m0.coeff(l - k).conj() * sign
        })
        .collect();
    LaurentPoly::new(lo, coeffs)
}

/// Polyphase matrix: coefficient `a^{(i)}_{Nk+j}` of `m_i` becomes coefficient
/// `k` of entry `(i, j)`, i.e. `A_{ij}(z) = (1/N) Σ_{w^N=z} m_i(w) w^{−j}`.
pub fn polyphase_from_filters(bank: &FilterBank) -> MatLaurentPoly {
    let n = bank.scale_n;
    let nn = n as i32;
    let entries: Vec<Vec<LaurentPoly>> = bank
        .filters
        .iter()
        .map(|m| {
            (0..nn)
                .map(|j| {
                    if m.is_zero() {
                        return LaurentPoly::zero();
                    }
                    // k ranges over exponents with N k + j inside the support.
                    let k_lo = (m.min_deg() - j).div_euclid(nn);
                    let k_hi = (m.max_deg() - j).div_euclid(nn);
                    let coeffs = (k_lo..=k_hi).map(|k| m.coeff(nn * k + j)).collect();
                    LaurentPoly::new(k_lo, coeffs)
                })
                .collect()
        })
        .collect();
    MatLaurentPoly::from_entries(&entries).expect("polyphase grid is square")
}

/// Filters `m_i(z) = Σ_j z^j A_{ij}(z^N)`, the inverse of [`polyphase_from_filters`].
pub fn filters_from_polyphase(a: &MatLaurentPoly) -> Result<FilterBank> {
    let n = a.dim();
    let filters = (0..n)
        .map(|i| {
            (0..n).fold(LaurentPoly::zero(), |acc, j| {
                &acc + &a.entry(i, j).dilate(n).shift(j as i32)
            })
        })
        .collect();
    FilterBank::new(n, filters)
}

/// The `N` roots `w` of `w^N = e^{-it}`, namely `e^{-i(t + 2πr)/N}`.
pub(crate) fn nth_roots_of_torus_point(t: f64, n: usize) -> impl Iterator<Item = Complex64> {
    (0..n).map(move |r| {
        Complex64::from_polar(1.0, -(t + 2.0 * PI * r as f64) / n as f64)
    })
}

/// Gram matrix `G_{jk} = Σ_{w^N=z} conj(m_j(w)) m̃_k(w)` at `z = e^{-it}`.
fn torus_gram(primal: &FilterBank, dual: &FilterBank, t: f64) -> CMat {
    let n = primal.scale_n;
    let roots: Vec<Complex64> = nth_roots_of_torus_point(t, n).collect();
    let sample = |bank: &FilterBank| {
        CMat::from_fn(n, n, |i, r| bank.filters[i].eval(roots[r]))
    };
    let p = sample(primal);
    let d = sample(dual);
    p.conjugate() * d.transpose()
}

/// Outcome of the quadrature-mirror check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QmfReport {
    pub pass: bool,
    /// `max_z max_{j,k} |Σ_{w^N=z} conj(m_j(w)) m_k(w) − N δ_{jk}|`
    pub max_residual: f64,
    /// `|m₀(1) − √N| <= tol`
    pub lowpass_ok: bool,
}

/// Checks `Σ_{w^N=z} conj(m_j(w)) m_k(w) = N δ_{jk}` on `grid_size` torus points.
pub fn check_qmf(bank: &FilterBank, grid_size: usize, tol: f64) -> QmfReport {
    let n = bank.scale_n;
    let target = CMat::identity(n, n) * Complex64::new(n as f64, 0.0);
    let max_residual = (0..grid_size.max(1))
        .map(|k| {
            let t = 2.0 * PI * k as f64 / grid_size.max(1) as f64;
            max_abs(&(torus_gram(bank, bank, t) - &target))
        })
        .fold(0.0, f64::max);
    QmfReport {
        pass: max_residual <= tol,
        max_residual,
        lowpass_ok: bank.lowpass_defect() <= tol,
    }
}

/// Primal bank with its dual, `Ã = (A*)^{-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiorthPair {
    pub primal: FilterBank,
    pub dual: FilterBank,
}

impl BiorthPair {
    /// `max_z max_{i,j} |(1/N) Σ_{w^N=z} conj(m_i(w)) m̃_j(w) − δ_{ij}|`.
    ///
    /// The duality sum itself equals `N δ_{ij}`; it is divided by `N` here so the
    /// check reads as the operator identity `S_i* S̃_j = δ_{ij}`.
    pub fn duality_residual(&self, grid_size: usize) -> f64 {
        let n = self.primal.scale_n;
        let id = CMat::identity(n, n);
        let inv_n = Complex64::new(1.0 / n as f64, 0.0);
        (0..grid_size.max(1))
            .map(|k| {
                let t = 2.0 * PI * k as f64 / grid_size.max(1) as f64;
                max_abs(&(torus_gram(&self.primal, &self.dual, t) * inv_n - &id))
            })
            .fold(0.0, f64::max)
    }
}

/// Dual system for an invertible polyphase matrix whose determinant is a monomial
/// `c z^d`; then `(A*)^{-1} = (adj A / det A)*` is again a Laurent polynomial.
pub fn dual_filters(a: &MatLaurentPoly, grid_size: usize) -> Result<BiorthPair> {
    let det = a.det();
    let min_modulus = torus_grid(grid_size.max(1))
        .into_iter()
        .map(|z| det.eval(z).norm())
        .fold(f64::INFINITY, f64::min);
    if min_modulus <= SINGULAR_EPS {
        return Err(Error::SingularOnTorus { min_modulus });
    }
    // Tiny off-monomial terms are rounding from the cofactor expansion.
    let scale = det.max_coeff();
    let trimmed = det.trimmed(scale * 1e-12);
    let Some((c, d)) = trimmed.as_monomial() else {
        return Err(Error::NonPolynomialInverse { det });
    };
    let inverse = a.adjugate().shift(-d).scale(c.inv());
    let dual = inverse.adjoint();
    Ok(BiorthPair { primal: filters_from_polyphase(a)?, dual: filters_from_polyphase(&dual)? })
}

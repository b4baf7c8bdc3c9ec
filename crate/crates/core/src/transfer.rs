//! Transfer and subdivision operators for a Laurent weight `W`.
//!
//! `(R_W ξ)(z) = (1/N) Σ_{w^N = z} W(w) ξ(w)`, which on coefficients reads
//! `(R f)_n = Σ_k c_{Nn−k} f_k` where `W = Σ c_k z^k`. Its adjoint is
//! `(R* f)(z) = W*(z) f(z^N)`.
//!
//! If `W` has coefficient support inside `[−D, D]`, the trigonometric
//! polynomials with modes `|n| ≤ ⌈D/(N−1)⌉` form an invariant window: from
//! `|Nn − k| ≤ D` and `|k| ≤ m` we get `|n| ≤ (D + m)/N ≤ m` once
//! `m(N − 1) ≥ D`. The finite matrix on that window carries the spectral
//! information used by the Perron–Frobenius test.

use nalgebra::SVD;
use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::cascade::{fourier_infinite_product, DEFAULT_PRODUCT_TERMS};
use crate::error::{Error, Result};
use crate::filterbank::{nth_roots_of_torus_point, FilterBank};
use crate::laurent::{torus_point, CMat, LaurentPoly};

/// Eigenvalues with `|λ| ≥ 1 − tol` are peripheral.
pub const PERIPHERAL_TOL: f64 = 1e-7;
pub const DEFAULT_N_MAX: usize = 10_000;
pub const MIN_N_MAX: usize = 100;
/// Deviation from 1 accepted by [`per_check`] as "identically 1".
pub const PER_TOL: f64 = 1e-3;
pub const DEFAULT_T_GRID: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct TransferSpec {
    w: LaurentPoly,
    scale_n: usize,
    band_m: usize,
}

impl TransferSpec {
    pub fn new(w: LaurentPoly, scale_n: usize, band_m: usize) -> Result<Self> {
        if scale_n < 2 {
            return Err(Error::Validation(format!("scale number must be at least 2, got {scale_n}")));
        }
        let required = Self::required_band(&w, scale_n);
        if band_m < required {
            return Err(Error::BandTooSmall { required, given: band_m });
        }
        Ok(TransferSpec { w, scale_n, band_m })
    }

    /// Smallest invariant window, `max(⌈D/(N−1)⌉, 1)`.
    pub fn with_min_band(w: LaurentPoly, scale_n: usize) -> Result<Self> {
        let band = Self::required_band(&w, scale_n.max(2));
        Self::new(w, scale_n, band)
    }

    /// `W = |m₀|²` for the low-pass filter of `bank`, on the smallest window.
    pub fn from_bank(bank: &FilterBank) -> Result<Self> {
        let m0 = bank.lowpass();
        Self::with_min_band(m0 * &m0.adjoint(), bank.scale_n())
    }

    pub fn required_band(w: &LaurentPoly, scale_n: usize) -> usize {
        if w.is_zero() {
            return 1;
        }
        let d = w.min_deg().unsigned_abs().max(w.max_deg().unsigned_abs()) as usize;
        d.div_ceil(scale_n - 1).max(1)
    }

    pub fn weight(&self) -> &LaurentPoly {
        &self.w
    }

    pub fn scale_n(&self) -> usize {
        self.scale_n
    }

    pub fn band_m(&self) -> usize {
        self.band_m
    }

    /// Smallest real part of `W` on the torus grid minus the largest imaginary
    /// part; nonnegative weights give a value `≥ −1e-9`.
    pub fn min_on_torus(&self, grid_size: usize) -> f64 {
        crate::laurent::torus_grid(grid_size)
            .into_iter()
            .map(|z| {
                let v = self.w.eval(z);
                v.re - v.im.abs()
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_nonnegative(&self, grid_size: usize) -> bool {
        self.min_on_torus(grid_size) >= -1e-9
    }
}

/// `(R f)_n = Σ_k c_{Nn−k} f_k`
pub fn transfer_apply(spec: &TransferSpec, f: &LaurentPoly) -> LaurentPoly {
    let w = &spec.w;
    if f.is_zero() || w.is_zero() {
        return LaurentPoly::zero();
    }
    let n = spec.scale_n as i32;
    let lo = (f.min_deg() + w.min_deg()).div_euclid(n)
        + i32::from((f.min_deg() + w.min_deg()).rem_euclid(n) != 0);
    let hi = (f.max_deg() + w.max_deg()).div_euclid(n);
    if hi < lo {
        return LaurentPoly::zero();
    }
    let coeffs = (lo..=hi)
        .map(|m| f.terms().map(|(k, fk)| w.coeff(n * m - k) * fk).sum())
        .collect();
    LaurentPoly::new(lo, coeffs)
}

/// `(R* f)(z) = W*(z) f(z^N)`, i.e. `(R* f)_n = Σ_k conj(c_{Nk−n}) f_k`.
pub fn subdivision_apply(spec: &TransferSpec, f: &LaurentPoly) -> LaurentPoly {
    spec.w.adjoint() * f.dilate(spec.scale_n)
}

/// `(1/N) Σ_{w^N = z} W(w) f(w)` at `z = e^{−it}`.
pub fn transfer_at(w: &LaurentPoly, scale_n: usize, f: impl Fn(Complex64) -> Complex64, t: f64) -> Complex64 {
    nth_roots_of_torus_point(t, scale_n).map(|r| w.eval(r) * f(r)).sum::<Complex64>() / scale_n as f64
}

/// Matrix of `R` on modes `−band_m..=band_m`; entry `(n, k)` is `c_{Nn−k}`.
pub fn transfer_matrix(spec: &TransferSpec) -> CMat {
    let m = spec.band_m as i32;
    let size = 2 * spec.band_m + 1;
    let n = spec.scale_n as i32;
    CMat::from_fn(size, size, |r, c| spec.w.coeff(n * (r as i32 - m) - (c as i32 - m)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    /// Sorted by descending modulus.
    pub eigenvalues: Vec<Complex64>,
    pub peripheral: Vec<Complex64>,
    pub pf_holds: bool,
    /// Eigenvector for `λ = 1` on the mode window, scaled to equal 1 at `z = 1`
    /// when that value is nonzero; `None` when 1 is not an eigenvalue.
    pub fixed_vector: Option<LaurentPoly>,
}

impl Serialize for SpectrumReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("SpectrumReport", 3)?;
        st.serialize_field("eigenvalues", &self.eigenvalues)?;
        st.serialize_field("pf_holds", &self.pf_holds)?;
        st.serialize_field("peripheral", &self.peripheral)?;
        st.end()
    }
}

/// Eigenvalues of the truncated transfer matrix and the Perron–Frobenius test:
/// the peripheral spectrum is `{1}` and `1` is a simple eigenvalue.
pub fn spectrum(spec: &TransferSpec, tol: f64) -> Result<SpectrumReport> {
    let t = transfer_matrix(spec);
    let size = t.nrows();
    let schur = t
        .clone()
        .try_schur(1e-15, 100_000)
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    let (_, upper) = schur.unpack();
    let mut eigenvalues: Vec<Complex64> = (0..size).map(|i| upper[(i, i)]).collect();
    if eigenvalues.iter().any(|l| !l.is_finite()) {
        return Err(Error::Numerical("non-finite eigenvalue".into()));
    }
    eigenvalues.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.re.total_cmp(&a.re)));
    let peripheral: Vec<Complex64> =
        eigenvalues.iter().copied().filter(|l| l.norm() >= 1.0 - tol).collect();
    let near_one = eigenvalues.iter().filter(|l| (*l - 1.0).norm() <= tol).count();
    let pf_holds = near_one == 1 && peripheral.iter().all(|l| (*l - 1.0).norm() <= tol);
    let fixed_vector = if near_one >= 1 { Some(fixed_vector(&t, spec.band_m)?) } else { None };
    Ok(SpectrumReport { eigenvalues, peripheral, pf_holds, fixed_vector })
}

fn fixed_vector(t: &CMat, band_m: usize) -> Result<LaurentPoly> {
    let size = t.nrows();
    let shifted = t - CMat::identity(size, size);
    let svd = SVD::try_new(shifted, false, true, 1e-15, 100_000)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let v_t = svd.v_t.ok_or_else(|| Error::Numerical("SVD returned no right vectors".into()))?;
    let smallest = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let mut v: Vec<Complex64> = v_t.row(smallest).iter().map(|c| c.conj()).collect();
    let at_one: Complex64 = v.iter().sum();
    let scale = if at_one.norm() > 1e-12 {
        at_one.inv()
    } else {
        let big = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
        big.inv()
    };
    for c in &mut v {
        *c *= scale;
    }
    Ok(LaurentPoly::new(-(band_m as i32), v).trimmed(1e-13))
}

/// Samples of `PER(|φ̂|²)(t) = Σ_n |φ̂(t + 2πn)|²` on `t_m = 2π m / G`.
#[derive(Clone, Debug, PartialEq)]
pub struct PerSamples {
    pub t: Vec<f64>,
    /// Truncated sums over `|n| ≤ n_max` plus the tail estimate.
    pub values: Vec<f64>,
    /// Estimated contribution of `|n| > n_max` at each sample.
    pub tails: Vec<f64>,
    pub n_max: usize,
}

impl PerSamples {
    pub fn max_deviation(&self) -> f64 {
        self.values.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn max_tail(&self) -> f64 {
        self.tails.iter().copied().fold(0.0, f64::max)
    }
}

/// Evaluates the periodization on `grid_size` points using the truncated
/// infinite product for `φ̂`.
///
/// The remainder beyond `n_max` is estimated from the last two dyadic blocks
/// of the sum: with `S₁` over `n_max/2 < |n| ≤ n_max` and `S₂` over
/// `n_max/4 < |n| ≤ n_max/2`, the ratio `ρ = S₁/S₂` gives the geometric tail
/// `S₁ ρ / (1 − ρ)`. This is exact for `1/n²` decay and zero when the blocks
/// vanish.
pub fn per_samples(bank: &FilterBank, grid_size: usize, n_max: usize) -> Result<PerSamples> {
    if n_max < MIN_N_MAX {
        return Err(Error::Validation(format!("n_max must be at least {MIN_N_MAX}, got {n_max}")));
    }
    if grid_size == 0 {
        return Err(Error::Validation("t-grid must have at least one point".into()));
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let t: Vec<f64> = (0..grid_size).map(|m| two_pi * m as f64 / grid_size as f64).collect();
    let (mut values, mut tails) = (Vec::with_capacity(grid_size), Vec::with_capacity(grid_size));
    let (q1, q2) = (n_max / 2, n_max / 4);
    for &tm in &t {
        let term = |n: i64| fourier_infinite_product(bank, tm + two_pi * n as f64, DEFAULT_PRODUCT_TERMS).norm_sqr();
        let mut total = term(0);
        let (mut s1, mut s2) = (0.0, 0.0);
        for n in 1..=n_max {
            let pair = term(n as i64) + term(-(n as i64));
            total += pair;
            if n > q1 {
                s1 += pair;
            } else if n > q2 {
                s2 += pair;
            }
        }
        let tail = if s2 > 0.0 && s1 > 0.0 && s1 < s2 {
            let rho = s1 / s2;
            s1 * rho / (1.0 - rho)
        } else {
            0.0
        };
        values.push(total + tail);
        tails.push(tail);
    }
    Ok(PerSamples { t, values, tails, n_max })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerReport {
    pub max_dev_from_1: f64,
    pub is_constant_1: bool,
    /// Largest estimated truncation tail over the grid.
    pub tail_estimate: f64,
}

/// `max_t |PER(|φ̂|²)(t) − 1|`; orthonormal translates give 0.
pub fn per_check(bank: &FilterBank, grid_size: usize, n_max: usize) -> Result<PerReport> {
    Ok(per_report(&per_samples(bank, grid_size, n_max)?))
}

pub fn per_report(samples: &PerSamples) -> PerReport {
    let max_dev_from_1 = samples.max_deviation();
    PerReport { max_dev_from_1, is_constant_1: max_dev_from_1 <= PER_TOL, tail_estimate: samples.max_tail() }
}

/// `max |R_{|m₀|²} f − f|` for sampled `f = PER(|φ̂|²)`.
///
/// The grid size `G` must be divisible by `N`. At `s = t_{mN}` the roots
/// `w^N = e^{−is}` sit at grid indices `m + rG/N`, so the torus sum needs no
/// interpolation; the residual is taken over those `G/N` points.
pub fn fixed_point_check(bank: &FilterBank, samples: &PerSamples) -> Result<f64> {
    let g = samples.values.len();
    let n = bank.scale_n();
    if g == 0 || g % n != 0 {
        return Err(Error::Validation(format!("t-grid size {g} must be a positive multiple of {n}")));
    }
    let m0 = bank.lowpass();
    let stride = g / n;
    let mut worst: f64 = 0.0;
    for m in 0..stride {
        let rf: f64 = (0..n)
            .map(|r| {
                let idx = m + r * stride;
                m0.eval(torus_point(samples.t[idx])).norm_sqr() * samples.values[idx]
            })
            .sum::<f64>()
            / n as f64;
        worst = worst.max((rf - samples.values[(m * n) % g]).abs());
    }
    Ok(worst)
}

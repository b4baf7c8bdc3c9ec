//! Scaling and wavelet functions on a fixed dyadic grid.
//!
//! A [`GridFunction`] stores one value per cell `[p h, (p + 1) h)` with
//! `h = 2^{−J}`; sums and moments treat it as piecewise constant, so
//! positions are taken at cell midpoints.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::filterbank::FilterBank;
use crate::laurent::{torus_point, LaurentPoly};

pub const DEFAULT_LEVEL: u32 = 10;
pub const DEFAULT_ITERS: usize = 12;
pub const CONVERGENCE_TOL: f64 = 1e-6;
/// Consecutive increases of the successive difference that count as divergence.
pub const DIVERGENCE_RUN: usize = 3;
pub const DEFAULT_PRODUCT_TERMS: usize = 40;

#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    j_level: u32,
    support_lo: i64,
    values: Vec<Complex64>,
}

impl GridFunction {
    /// Values for cells `support_lo, support_lo + 1, …` at spacing `2^{−j_level}`.
    pub fn new(j_level: u32, support_lo: i64, values: Vec<Complex64>) -> Self {
        GridFunction { j_level, support_lo, values }
    }

    pub fn from_real(j_level: u32, support_lo: i64, values: &[f64]) -> Self {
        Self::new(j_level, support_lo, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Indicator of `[0, 1)`.
    pub fn unit_box(j_level: u32) -> Self {
        Self::new(j_level, 0, vec![Complex64::new(1.0, 0.0); 1 << j_level])
    }

    pub fn zero(j_level: u32) -> Self {
        Self::new(j_level, 0, Vec::new())
    }

    pub fn j_level(&self) -> u32 {
        self.j_level
    }

    pub fn step(&self) -> f64 {
        (-(self.j_level as f64)).exp2()
    }

    pub fn support_lo(&self) -> i64 {
        self.support_lo
    }

    /// Last stored cell index (inclusive); `support_lo − 1` when empty.
    pub fn support_hi(&self) -> i64 {
        self.support_lo + self.values.len() as i64 - 1
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Left endpoint of every stored cell.
    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.step();
        (0..self.values.len()).map(move |i| (self.support_lo + i as i64) as f64 * h)
    }

    pub fn at_index(&self, p: i64) -> Complex64 {
        if p < self.support_lo || p > self.support_hi() {
            return Complex64::new(0.0, 0.0);
        }
        self.values[(p - self.support_lo) as usize]
    }

    /// Value of the piecewise-constant function at `x`.
    pub fn at(&self, x: f64) -> Complex64 {
        self.at_index((x / self.step()).floor() as i64)
    }

    /// Smallest and largest `x` with a nonzero cell, as `[lo, hi)`.
    pub fn nonzero_hull(&self) -> Option<(f64, f64)> {
        let first = self.values.iter().position(|v| *v != Complex64::new(0.0, 0.0))?;
        let last = self.values.iter().rposition(|v| *v != Complex64::new(0.0, 0.0))?;
        let h = self.step();
        Some((
            (self.support_lo + first as i64) as f64 * h,
            (self.support_lo + last as i64 + 1) as f64 * h,
        ))
    }

    /// Riemann sum `Σ g · h`.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.step()
    }

    /// `∫ x^k g(x) dx` with `x` at cell midpoints.
    pub fn moment(&self, k: i32) -> Complex64 {
        let h = self.step();
        self.xs().zip(&self.values).map(|(x, v)| v * (x + h / 2.0).powi(k)).sum::<Complex64>() * h
    }

    /// `∫ g conj(other)`.
    pub fn inner(&self, other: &GridFunction) -> Complex64 {
        assert_eq!(self.j_level, other.j_level, "grid levels differ");
        let lo = self.support_lo.max(other.support_lo);
        let hi = self.support_hi().min(other.support_hi());
        (lo..=hi).map(|p| self.at_index(p) * other.at_index(p).conj()).sum::<Complex64>() * self.step()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.step()
    }

    /// Discrete `L²` distance `sqrt(Σ |f − g|² h)` over the union of supports.
    pub fn l2_distance(&self, other: &GridFunction) -> f64 {
        assert_eq!(self.j_level, other.j_level, "grid levels differ");
        if self.is_empty() && other.is_empty() {
            return 0.0;
        }
        let lo = self.support_lo.min(other.support_lo);
        let hi = self.support_hi().max(other.support_hi());
        let s: f64 = (lo..=hi).map(|p| (self.at_index(p) - other.at_index(p)).norm_sqr()).sum();
        (s * self.step()).sqrt()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.j_level, self.support_lo, self.values.iter().map(|v| v * c).collect())
    }

    /// `g(· − k)`
    pub fn translate(&self, k: i64) -> Self {
        Self::new(self.j_level, self.support_lo + (k << self.j_level), self.values.clone())
    }

    /// `∫ g(x) e^{−ixt} dx`, exact for the piecewise-constant function.
    pub fn fourier(&self, t: f64) -> Complex64 {
        let h = self.step();
        if t == 0.0 {
            return self.integral();
        }
        let cell = (Complex64::new(1.0, 0.0) - torus_point(h * t)) / Complex64::new(0.0, t);
        let ratio = torus_point(h * t);
        let mut phase = torus_point(self.support_lo as f64 * h * t);
        let mut acc = Complex64::new(0.0, 0.0);
        for v in &self.values {
            acc += v * phase;
            phase *= ratio;
        }
        acc * cell
    }
}

/// `√N Σ_n a_n g(N x − n)` on the grid of `g`, for an arbitrary filter.
pub fn refine(filter: &LaurentPoly, scale_n: usize, g: &GridFunction) -> GridFunction {
    if g.is_empty() || filter.is_zero() {
        return GridFunction::zero(g.j_level);
    }
    let n = scale_n as i64;
    let unit = 1i64 << g.j_level;
    // N p − a·2^J ∈ [lo, hi] for some tap a
    let lo = (g.support_lo + filter.min_deg() as i64 * unit).div_euclid(n)
        + i64::from((g.support_lo + filter.min_deg() as i64 * unit).rem_euclid(n) != 0);
    let hi = (g.support_hi() + filter.max_deg() as i64 * unit).div_euclid(n);
    let gain = (scale_n as f64).sqrt();
    let values = (lo..=hi)
        .map(|p| {
            filter
                .terms()
                .map(|(deg, a)| a * g.at_index(n * p - deg as i64 * unit))
                .sum::<Complex64>()
                * gain
        })
        .collect();
    GridFunction::new(g.j_level, lo, values)
}

/// One cascade step `M_a g` with the low-pass filter of `bank`.
pub fn cascade_step(bank: &FilterBank, g: &GridFunction) -> GridFunction {
    refine(bank.lowpass(), bank.scale_n(), g)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CascadeResult {
    pub phi: GridFunction,
    /// `L²` distance between iterate `i + 1` and iterate `i`.
    pub log: Vec<f64>,
    pub converged: bool,
    pub diverged: bool,
}

impl CascadeResult {
    pub fn iterations(&self) -> usize {
        self.log.len()
    }

    pub fn last_difference(&self) -> Option<f64> {
        self.log.last().copied()
    }
}

/// Cascade iteration from the unit box on the fixed grid `2^{−j_level}`.
///
/// Every iterate is rescaled so its Riemann sum is 1. Stops early once the
/// successive difference drops below [`CONVERGENCE_TOL`], or after
/// [`DIVERGENCE_RUN`] consecutive increases (reported, not an error).
pub fn scaling_function(bank: &FilterBank, j_level: u32, iters: usize) -> Result<CascadeResult> {
    if iters == 0 {
        return Err(Error::Validation("cascade needs at least one iteration".into()));
    }
    if j_level > 24 {
        return Err(Error::Validation(format!("grid level {j_level} too fine")));
    }
    let mut phi = GridFunction::unit_box(j_level);
    let mut log = Vec::with_capacity(iters);
    let mut rising = 0;
    for _ in 0..iters {
        let mut next = cascade_step(bank, &phi);
        let mass = next.integral();
        if mass.norm() > 0.0 {
            next = next.scale(mass.inv());
        }
        let diff = next.l2_distance(&phi);
        if log.last().is_some_and(|&prev| diff > prev) {
            rising += 1;
        } else {
            rising = 0;
        }
        log.push(diff);
        phi = next;
        if diff < CONVERGENCE_TOL {
            return Ok(CascadeResult { phi, log, converged: true, diverged: false });
        }
        if rising >= DIVERGENCE_RUN {
            return Ok(CascadeResult { phi, log, converged: false, diverged: true });
        }
    }
    Ok(CascadeResult { phi, log, converged: false, diverged: false })
}

/// `ψ_i(x) = √N Σ_n a^{(i)}_n φ(N x − n)` for `i = 1, …, N − 1`.
pub fn wavelet_from_scaling(bank: &FilterBank, phi: &GridFunction) -> Vec<GridFunction> {
    bank.filters()[1..].iter().map(|m| refine(m, bank.scale_n(), phi)).collect()
}

/// `Π_{k=1}^{K} m₀(e^{−i t N^{−k}}) / √N`, the truncated product for `φ̂(t)`.
pub fn fourier_infinite_product(bank: &FilterBank, t: f64, k_terms: usize) -> Complex64 {
    let n = bank.scale_n() as f64;
    let norm = n.sqrt().recip();
    let m0 = bank.lowpass();
    let mut s = t;
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..k_terms {
        s /= n;
        acc *= m0.eval(torus_point(s)) * norm;
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PositionReport {
    /// `∫ x |g|² / ∫ |g|²`
    pub position: f64,
    pub nearest_half_integer: f64,
    pub gap: f64,
}

/// Expected position of `|g|² / ‖g‖²`, with `x` at cell midpoints.
pub fn expected_position(g: &GridFunction) -> Result<PositionReport> {
    let h = g.step();
    let mass: f64 = g.values.iter().map(|v| v.norm_sqr()).sum();
    if mass == 0.0 {
        return Err(Error::ZeroFunction);
    }
    let first: f64 = g.xs().zip(&g.values).map(|(x, v)| (x + h / 2.0) * v.norm_sqr()).sum();
    let position = first / mass;
    let nearest_half_integer = (position - 0.5).round() + 0.5;
    Ok(PositionReport { position, nearest_half_integer, gap: (position - nearest_half_integer).abs() })
}

/// Haar father function, the indicator of `[0, 1)`.
pub fn haar_phi(x: f64) -> f64 {
    if (0.0..1.0).contains(&x) {
        1.0
    } else {
        0.0
    }
}

/// Haar mother function: `1` on `[0, ½)`, `−1` on `[½, 1)`.
pub fn haar_psi(x: f64) -> f64 {
    if (0.0..0.5).contains(&x) {
        1.0
    } else if (0.5..1.0).contains(&x) {
        -1.0
    } else {
        0.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Telescoping {
    /// `s_n = Σ_{k=1}^{n} 2^{−k} ψ(2^{−k} x)` for `n = 1, …, n_terms`.
    pub partial_sums: Vec<f64>,
    /// `2^{−n} φ(2^{−n} x)`, the closed form of the remainder after `n` terms.
    pub tails: Vec<f64>,
}

/// Partial sums of `Σ_{k≥1} 2^{−k} ψ(2^{−k} x)`, which converge to `φ(x)`.
pub fn haar_telescoping(x: f64, n_terms: usize) -> Telescoping {
    let mut partial_sums = Vec::with_capacity(n_terms);
    let mut tails = Vec::with_capacity(n_terms);
    let mut sum = 0.0;
    for k in 1..=n_terms {
        let w = (-(k as f64)).exp2();
        sum += w * haar_psi(w * x);
        partial_sums.push(sum);
        tails.push(w * haar_phi(w * x));
    }
    Telescoping { partial_sums, tails }
}

//! Constructive filter design.
//!
//! Orthogonal banks come from unitary polyphase matrices written as a constant
//! unitary times first-order factors `1 − Q + zQ` with `Q` a rank-one
//! orthogonal projection. For `N = 2` the constant is
//! `V = (1/√2)[[1, 1], [1, −1]]`; for larger `N` it is the normalized DFT
//! matrix, which reduces to `V` when `N = 2`.
//!
//! Biorthogonal two-band banks with `det A ≡ 1` factor into lifting steps,
//! `A = diag(K, K⁻¹) · L₁ · U₁ · L₂ · U₂ ⋯`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filterbank::{filters_from_polyphase, FilterBank};
use crate::laurent::{max_abs, CMat, LaurentPoly, MatLaurentPoly};

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `V = (1/√2)[[1, 1], [1, −1]]`
pub fn v_matrix() -> CMat {
    CMat::from_row_slice(2, 2, &[re(1.0), re(1.0), re(1.0), re(-1.0)]) * re(FRAC_1_SQRT_2)
}

/// `H_{kl} = e^{2πikl/N} / √N`
pub fn dft_matrix(n: usize) -> CMat {
    let s = 1.0 / (n as f64).sqrt();
    CMat::from_fn(n, n, |k, l| {
        Complex64::from_polar(s, 2.0 * PI * (k * l) as f64 / n as f64)
    })
}

/// Parameters of a rank-one projection in `M₂(ℂ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionParam {
    pub lambda: f64,
    pub theta: f64,
}

impl ProjectionParam {
    pub fn new(lambda: f64, theta: f64) -> Result<Self> {
        let p = ProjectionParam { lambda, theta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Validation(format!("lambda {} outside [0, 1]", self.lambda)));
        }
        if !(0.0..2.0 * PI).contains(&self.theta) {
            return Err(Error::Validation(format!("theta {} outside [0, 2pi)", self.theta)));
        }
        Ok(())
    }
}

/// `Q = [[λ, √(λ(1−λ)) e^{iθ}], [√(λ(1−λ)) e^{−iθ}, 1 − λ]]`
pub fn projection(param: &ProjectionParam) -> Result<CMat> {
    param.validate()?;
    let l = param.lambda;
    let off = (l * (1.0 - l)).sqrt();
    Ok(CMat::from_row_slice(
        2,
        2,
        &[
            re(l),
            Complex64::from_polar(off, param.theta),
            Complex64::from_polar(off, -param.theta),
            re(1.0 - l),
        ],
    ))
}

/// `U_P(z) = zP + (I − P)` for a rank-one orthogonal projection `P`.
pub fn general_factor(p: &CMat) -> Result<MatLaurentPoly> {
    if p.nrows() != p.ncols() {
        return Err(Error::InvalidOperand("projection must be square".into()));
    }
    let n = p.nrows();
    let idempotence = max_abs(&(p * p - p));
    let self_adjoint = max_abs(&(p - p.adjoint()));
    let trace = (p.trace() - re(1.0)).norm();
    if idempotence > 1e-12 || self_adjoint > 1e-12 || trace > 1e-12 {
        return Err(Error::NotAProjection { idempotence, self_adjoint, trace });
    }
    let id = CMat::identity(n, n);
    MatLaurentPoly::new(n, 0, vec![&id - p, p.clone()])
}

/// `A(z) = V · Π_j (1 − Q_j + z Q_j)`; unitary on the torus with
/// `det A(z) = −z^k`, so its K₁ class is `k`.
pub fn unitary_from_projections(params: &[ProjectionParam]) -> Result<MatLaurentPoly> {
    let factors = params.iter().map(projection).collect::<Result<Vec<_>>>()?;
    unitary_from_rank_one(&v_matrix(), &factors)
}

/// `A(z) = H · Π_j U_{P_j}(z)` for an arbitrary constant unitary `H`.
pub fn unitary_from_rank_one(h: &CMat, projections: &[CMat]) -> Result<MatLaurentPoly> {
    projections.iter().try_fold(MatLaurentPoly::constant(h.clone()), |acc, p| {
        acc.checked_mul(&general_factor(p)?)
    })
}

/// `N`-band design: normalized DFT matrix times first-order projection factors.
pub fn unitary_from_projections_n(n: usize, projections: &[CMat]) -> Result<MatLaurentPoly> {
    unitary_from_rank_one(&dft_matrix(n), projections)
}

/// Rank-one projection onto the span of `v` (which need not be normalized).
pub fn rank_one_projection(v: &[Complex64]) -> Result<CMat> {
    let norm2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    if norm2 == 0.0 {
        return Err(Error::Validation("projection vector is zero".into()));
    }
    let n = v.len();
    Ok(CMat::from_fn(n, n, |i, j| v[i] * v[j].conj() / norm2))
}

/// Daubechies four-tap coefficients in the `h` convention (`Σ hₙ = 2`),
/// indexed `0..=3` so that the scaling function lives on `[0, 3]`.
pub fn daubechies4_h() -> [f64; 4] {
    let s3 = 3f64.sqrt();
    [(1.0 + s3) / 4.0, (3.0 + s3) / 4.0, (3.0 - s3) / 4.0, (1.0 - s3) / 4.0]
}

/// Residuals of the four defining equations for `h`:
/// `Σ h = 2`, `h₃ − h₂ + h₁ − h₀ = 0`, `h₃ − 2h₂ + 3h₁ − 4h₀ = 0`, `h₁h₃ + h₀h₂ = 0`.
pub fn daubechies4_residuals(h: &[f64; 4]) -> [f64; 4] {
    [
        (h[0] + h[1] + h[2] + h[3] - 2.0).abs(),
        (h[3] - h[2] + h[1] - h[0]).abs(),
        (h[3] - 2.0 * h[2] + 3.0 * h[1] - 4.0 * h[0]).abs(),
        (h[1] * h[3] + h[0] * h[2]).abs(),
    ]
}

/// The D4 bank in the `√N` convention: `aₙ = hₙ / √2`, high-pass by
/// [`FilterBank::from_lowpass`].
pub fn daubechies4() -> FilterBank {
    let a: Vec<f64> = daubechies4_h().iter().map(|h| h / SQRT_2).collect();
    FilterBank::from_lowpass(LaurentPoly::from_real(0, &a))
}

/// `Q_θ = [[cos²θ, cosθ sinθ], [cosθ sinθ, sin²θ]]`
fn rotation_projection(theta: f64) -> CMat {
    let (s, c) = theta.sin_cos();
    CMat::from_row_slice(2, 2, &[re(c * c), re(c * s), re(c * s), re(s * s)])
}

/// `U_θ(z) = Q_θ^⊥ + z Q_θ` with `Q_θ^⊥ = Q_{θ+π/2}`.
fn rotation_factor(theta: f64) -> MatLaurentPoly {
    MatLaurentPoly::new(2, 0, vec![rotation_projection(theta + PI / 2.0), rotation_projection(theta)])
        .expect("2x2 factor")
}

/// Closed-form low-pass coefficients `a₀..a₅` of the two-angle family.
pub fn six_tap_coefficients(theta: f64, rho: f64) -> [f64; 6] {
    let e0 = FRAC_1_SQRT_2;
    let e1 = ((2.0 * theta).cos() + (2.0 * rho).cos()) / SQRT_2;
    let e2 = ((2.0 * theta).sin() + (2.0 * rho).sin()) / SQRT_2;
    let e3 = (2.0 * theta - 2.0 * rho).cos() / SQRT_2;
    let e4 = (2.0 * theta - 2.0 * rho).sin() / SQRT_2;
    [
        (e0 - e1 - e2 + e3 + e4) / 4.0,
        (e0 + e1 - e2 + e3 - e4) / 4.0,
        (e0 - e3 - e4) / 2.0,
        (e0 - e3 + e4) / 2.0,
        (e0 + e1 + e2 + e3 + e4) / 4.0,
        (e0 - e1 + e2 + e3 - e4) / 4.0,
    ]
}

/// `A(z) = V · U_θ(z) · U_ρ(z)`
pub fn six_tap_polyphase(theta: f64, rho: f64) -> MatLaurentPoly {
    let v = MatLaurentPoly::constant(v_matrix());
    &(&v * &rotation_factor(theta)) * &rotation_factor(rho)
}

/// Six-tap orthogonal bank from two rotation angles, built from the
/// polyphase product. [`six_tap_coefficients`] is the closed form of its
/// low-pass filter.
pub fn six_tap_from_angles(theta: f64, rho: f64) -> FilterBank {
    filters_from_polyphase(&six_tap_polyphase(theta, rho)).expect("2x2 polyphase")
}

/// Result of fitting the two-angle family to a target low-pass filter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngleFit {
    pub theta: f64,
    pub rho: f64,
    /// Euclidean distance between coefficient vectors `a₀..a₅`.
    pub distance: f64,
}

/// Grid search for the angles whose closed-form coefficients are nearest to
/// `target` (`a₀..a₅`, zero padded): a `grid × grid` sweep of `[0, 2π)²`
/// followed by one local sweep of ±1 cell at ten times the resolution.
pub fn fit_six_tap(target: &[f64; 6], grid: usize) -> AngleFit {
    let dist = |theta: f64, rho: f64| {
        six_tap_coefficients(theta, rho)
            .iter()
            .zip(target)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let step = 2.0 * PI / grid as f64;
    let mut best = AngleFit { theta: 0.0, rho: 0.0, distance: f64::INFINITY };
    for i in 0..grid {
        for j in 0..grid {
            let (theta, rho) = (i as f64 * step, j as f64 * step);
            let d = dist(theta, rho);
            if d < best.distance {
                best = AngleFit { theta, rho, distance: d };
            }
        }
    }
    let fine = step / 10.0;
    let (t0, r0) = (best.theta, best.rho);
    for i in -10..=10 {
        for j in -10..=10 {
            let (theta, rho) = (t0 + i as f64 * fine, r0 + j as f64 * fine);
            let d = dist(theta, rho);
            if d < best.distance {
                best = AngleFit {
                    theta: theta.rem_euclid(2.0 * PI),
                    rho: rho.rem_euclid(2.0 * PI),
                    distance: d,
                };
            }
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    Lower,
    Upper,
    Diag,
}

/// One factor of a lifting factorization: `[[1, 0], [l, 1]]`, `[[1, u], [0, 1]]`
/// or `diag(K, K⁻¹)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStep", into = "RawStep")]
pub enum LiftingStep {
    Lower(LaurentPoly),
    Upper(LaurentPoly),
    Diag(Complex64),
}

#[derive(Serialize, Deserialize)]
struct RawStep {
    kind: StepKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    poly: Option<LaurentPoly>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<Complex64>,
}

impl TryFrom<RawStep> for LiftingStep {
    type Error = Error;

    fn try_from(raw: RawStep) -> Result<Self> {
        match (raw.kind, raw.poly, raw.k) {
            (StepKind::Lower, Some(p), None) => Ok(LiftingStep::Lower(p)),
            (StepKind::Upper, Some(p), None) => Ok(LiftingStep::Upper(p)),
            (StepKind::Diag, None, Some(k)) if k.norm() > 0.0 => Ok(LiftingStep::Diag(k)),
            (StepKind::Diag, None, Some(_)) => Err(Error::Validation("diag constant must be nonzero".into())),
            (kind, _, _) => Err(Error::Validation(format!(
                "{kind:?} step needs exactly {}",
                if kind == StepKind::Diag { "a constant \"k\"" } else { "a polynomial \"poly\"" }
            ))),
        }
    }
}

impl From<LiftingStep> for RawStep {
    fn from(step: LiftingStep) -> Self {
        match step {
            LiftingStep::Lower(p) => RawStep { kind: StepKind::Lower, poly: Some(p), k: None },
            LiftingStep::Upper(p) => RawStep { kind: StepKind::Upper, poly: Some(p), k: None },
            LiftingStep::Diag(k) => RawStep { kind: StepKind::Diag, poly: None, k: Some(k) },
        }
    }
}

impl LiftingStep {
    pub fn kind(&self) -> StepKind {
        match self {
            LiftingStep::Lower(_) => StepKind::Lower,
            LiftingStep::Upper(_) => StepKind::Upper,
            LiftingStep::Diag(_) => StepKind::Diag,
        }
    }

    pub fn matrix(&self) -> MatLaurentPoly {
        let one = LaurentPoly::one;
        let zero = LaurentPoly::zero;
        let entries = match self {
            LiftingStep::Lower(l) => [[one(), zero()], [l.clone(), one()]],
            LiftingStep::Upper(u) => [[one(), u.clone()], [zero(), one()]],
            LiftingStep::Diag(k) => [
                [LaurentPoly::constant(*k), zero()],
                [zero(), LaurentPoly::constant(k.inv())],
            ],
        };
        MatLaurentPoly::from_entries(&entries.map(Vec::from)).expect("2x2 step")
    }

    /// The step whose matrix is the inverse of this one.
    pub fn inverse(&self) -> Self {
        match self {
            LiftingStep::Lower(l) => LiftingStep::Lower(-l),
            LiftingStep::Upper(u) => LiftingStep::Upper(-u),
            LiftingStep::Diag(k) => LiftingStep::Diag(k.inv()),
        }
    }
}

/// Ordered product of the step matrices; the identity for no steps.
pub fn lifting_recompose(steps: &[LiftingStep]) -> MatLaurentPoly {
    steps
        .iter()
        .fold(MatLaurentPoly::identity(2), |acc, s| &acc * &s.matrix())
}

/// Applies a step to a two-band bank through the filter relations:
/// a lower step `l` sends `m₁ ↦ m₁ + l(z²) m₀`, an upper step `u` sends
/// `m₀ ↦ m₀ + u(z²) m₁`, and `diag(K, K⁻¹)` scales `m₀` by `K` and `m₁` by `K⁻¹`.
/// The result is the bank of `S · A` where `A` is the polyphase matrix of `bank`.
pub fn lifting_step_on_filters(bank: &FilterBank, step: &LiftingStep) -> Result<FilterBank> {
    if bank.scale_n() != 2 {
        return Err(Error::Validation(format!(
            "lifting steps act on two-band banks, got N = {}",
            bank.scale_n()
        )));
    }
    let m0 = bank.filter(0);
    let m1 = bank.filter(1);
    let filters = match step {
        LiftingStep::Lower(l) => vec![m0.clone(), m1 + &(&l.dilate(2) * m0)],
        LiftingStep::Upper(u) => vec![m0 + &(&u.dilate(2) * m1), m1.clone()],
        LiftingStep::Diag(k) => vec![m0.scale(*k), m1.scale(k.inv())],
    };
    FilterBank::new(2, filters)
}

/// Iteration cap for the row reduction.
const MAX_REDUCTIONS: usize = 10_000;

/// Relative size below which coefficients produced by the reduction are rounding noise.
const LIFT_NOISE: f64 = 1e-11;

/// Tolerance on the coefficient-wise check `det A ≡ 1`.
const DET_TOL: f64 = 1e-10;

/// Least-squares sweeps over the step coefficients after the reduction.
const REFINE_SWEEPS: usize = 4;
const REFINE_TARGET: f64 = 1e-13;

/// Recomposition residual above which the factorization is reported as failed.
const RECOMPOSE_TOL: f64 = 1e-9;

/// Factors a `2 × 2` Laurent matrix with `det A ≡ 1` into lifting steps.
///
/// The first row `(a, b)` is reduced by Laurent division: the entry with the
/// larger degree span is replaced by its remainder modulo the other, each
/// quotient term chosen to cancel the current highest-degree term (on equal
/// spans the entry with the higher top exponent is reduced). A remainder step
/// on `a` is a column operation, i.e. right multiplication by a lower step, and
/// on `b` by an upper step. Once the row is `(K, 0)` with `K` constant, the
/// remaining lower-triangular factor is read off. The output is
/// `[diag(K), then alternating lower/upper steps]` with consecutive steps of
/// the same kind merged.
pub fn lifting_factorize(a: &MatLaurentPoly) -> Result<Vec<LiftingStep>> {
    if a.dim() != 2 {
        return Err(Error::InvalidOperand(format!("lifting needs a 2x2 matrix, got {0}x{0}", a.dim())));
    }
    let residual = a.det().distance(&LaurentPoly::one());
    if residual > DET_TOL {
        return Err(Error::DeterminantNotOne { residual });
    }
    let mut first_err = None;
    for view in [View::Plain, View::Transposed, View::Swapped, View::SwappedTransposed] {
        let attempt = reduce_first_row(&view.apply(a)).and_then(|steps| {
            let steps = diag_first(view.map_back(steps));
            let steps = merge_steps(steps, a.max_coeff().max(1.0) * LIFT_NOISE);
            check_recomposition(&steps, a).map(|()| steps)
        });
        match attempt {
            Ok(steps) => return Ok(steps),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.expect("at least one attempt"))
}

/// Equivalent problems: `A`, `Aᵀ`, `JAJ` and `(JAJ)ᵀ` with `J` the swap matrix.
/// All have determinant 1, and a factorization of any of them maps back to one
/// of `A`. Reducing a different row or column sometimes avoids a badly
/// conditioned division sequence.
#[derive(Clone, Copy)]
enum View {
    Plain,
    Transposed,
    Swapped,
    SwappedTransposed,
}

impl View {
    fn apply(self, a: &MatLaurentPoly) -> MatLaurentPoly {
        let e = a.entries();
        let pick = |i: usize, j: usize| e[i][j].clone();
        let entries = match self {
            View::Plain => return a.clone(),
            View::Transposed => [[pick(0, 0), pick(1, 0)], [pick(0, 1), pick(1, 1)]],
            View::Swapped => [[pick(1, 1), pick(1, 0)], [pick(0, 1), pick(0, 0)]],
            View::SwappedTransposed => [[pick(1, 1), pick(0, 1)], [pick(1, 0), pick(0, 0)]],
        };
        MatLaurentPoly::from_entries(&entries.map(Vec::from)).expect("2x2")
    }

    fn map_back(self, steps: Vec<LiftingStep>) -> Vec<LiftingStep> {
        let flip = |s: LiftingStep| match s {
            LiftingStep::Lower(p) => LiftingStep::Upper(p),
            LiftingStep::Upper(p) => LiftingStep::Lower(p),
            LiftingStep::Diag(k) => LiftingStep::Diag(k),
        };
        let swap = |s: LiftingStep| match s {
            LiftingStep::Diag(k) => LiftingStep::Diag(k.inv()),
            other => flip(other),
        };
        match self {
            View::Plain => steps,
            // (S₁⋯S_n)ᵀ = S_nᵀ⋯S₁ᵀ
            View::Transposed => steps.into_iter().rev().map(flip).collect(),
            View::Swapped => steps.into_iter().map(swap).collect(),
            View::SwappedTransposed => steps.into_iter().rev().map(|s| swap(flip(s))).collect(),
        }
    }
}

/// Moves every diag factor to the front: `S · D = D · (D⁻¹ S D)`, where
/// conjugation by `diag(K, K⁻¹)` scales a lower polynomial by `K²` and an
/// upper one by `K⁻²`.
fn diag_first(steps: Vec<LiftingStep>) -> Vec<LiftingStep> {
    let mut k_total = Complex64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(steps.len() + 1);
    for step in steps.into_iter().rev() {
        match step {
            LiftingStep::Diag(k) => k_total = k * k_total,
            LiftingStep::Lower(p) => out.push(LiftingStep::Lower(p.scale(k_total * k_total))),
            LiftingStep::Upper(p) => out.push(LiftingStep::Upper(p.scale((k_total * k_total).inv()))),
        }
    }
    out.push(LiftingStep::Diag(k_total));
    out.reverse();
    out
}

fn check_recomposition(steps: &[LiftingStep], a: &MatLaurentPoly) -> Result<()> {
    let recomposed = lifting_recompose(steps);
    let err = recomposed.distance(a);
    if err > RECOMPOSE_TOL {
        let residual = a.checked_sub(&recomposed)?;
        return Err(Error::FactorizationFailed {
            reason: format!("recomposition residual {err:.3e}"),
            residual: Box::new(residual),
        });
    }
    Ok(())
}

/// Euclidean reduction of the first row of `a`, followed by refinement.
fn reduce_first_row(a: &MatLaurentPoly) -> Result<Vec<LiftingStep>> {
    let noise = a.max_coeff().max(1.0) * LIFT_NOISE;

    // Right multiplications applied to A, recorded as the steps they undo.
    let mut undo: Vec<LiftingStep> = Vec::new();
    let mut cur = a.clone();
    let row = |m: &MatLaurentPoly| {
        let (x, y) = (m.entry(0, 0), m.entry(0, 1));
        let floor = noise.max(x.max_coeff().max(y.max_coeff()) * LIFT_NOISE);
        (x.trimmed(floor), y.trimmed(floor))
    };

    for _ in 0..MAX_REDUCTIONS {
        let (x, y) = row(&cur);
        match (x.is_zero(), y.is_zero()) {
            (true, true) => return Err(stalled("first row vanished", &cur)),
            (false, true) => {
                let Some((c, d)) = x.as_monomial() else {
                    return Err(stalled("row reduced to a non-unit entry", &cur));
                };
                if d == 0 {
                    break;
                }
                // (c z^d, 0) -> (c z^d, 1) -> (1, 1) -> (1, 0)
                let fixes = [
                    LiftingStep::Upper(LaurentPoly::monomial(c.inv(), -d)),
                    LiftingStep::Lower(&LaurentPoly::one() - &x),
                    LiftingStep::Upper(LaurentPoly::monomial(re(-1.0), 0)),
                ];
                for op in fixes {
                    cur = &cur * &op.matrix();
                    undo.push(op.inverse());
                }
                continue;
            }
            (true, false) => {
                let Some((c, d)) = y.as_monomial() else {
                    return Err(stalled("row reduced to a non-unit entry", &cur));
                };
                // (0, c z^d) -> (1, c z^d) -> (1, 0)
                let fixes = [
                    LiftingStep::Lower(LaurentPoly::monomial(c.inv(), -d)),
                    LiftingStep::Upper(-&y),
                ];
                for op in fixes {
                    cur = &cur * &op.matrix();
                    undo.push(op.inverse());
                }
                continue;
            }
            (false, false) => {}
        }
        let (sx, sy) = (x.span().unwrap(), y.span().unwrap());
        let (reduce_x, q) = if sx != sy {
            let reduce_x = sx > sy;
            let (num, den) = if reduce_x { (&x, &y) } else { (&y, &x) };
            (reduce_x, laurent_quotient(num, den, noise))
        } else {
            // equal spans: either entry may be reduced; keep the smaller quotient
            let qx = laurent_quotient(&x, &y, noise);
            let qy = laurent_quotient(&y, &x, noise);
            match qx.0.max_coeff().total_cmp(&qy.0.max_coeff()) {
                std::cmp::Ordering::Less => (true, qx),
                std::cmp::Ordering::Greater => (false, qy),
                std::cmp::Ordering::Equal if x.max_deg() >= y.max_deg() => (true, qx),
                std::cmp::Ordering::Equal => (false, qy),
            }
        };
        let (q, (lo, hi)) = q;
        if q.is_zero() {
            return Err(stalled("division made no progress", &cur));
        }
        // x <- x - q y is right multiplication by [[1, 0], [-q, 1]];
        // y <- y - q x is right multiplication by [[1, -q], [0, 1]].
        let op = if reduce_x { LiftingStep::Lower(-&q) } else { LiftingStep::Upper(-&q) };
        cur = &cur * &op.matrix();
        undo.push(op.inverse());
        let col = if reduce_x { 0 } else { 1 };
        let mut entries = cur.entries();
        entries[0][col] = restrict(&entries[0][col], lo, hi);
        cur = MatLaurentPoly::from_entries(&entries)?;
        let (nx, ny) = row(&cur);
        let reduced = if reduce_x { nx.span() } else { ny.span() };
        let divisor = if reduce_x { sy } else { sx };
        if reduced.is_some_and(|s| s >= divisor) {
            return Err(stalled("degree span failed to decrease", &cur));
        }
    }
    let (x, _) = row(&cur);
    let Some((k, 0)) = x.as_monomial() else {
        return Err(stalled("iteration cap reached", &cur));
    };
    // cur = [[K, 0], [c, K⁻¹]] = diag(K, K⁻¹) · [[1, 0], [K c, 1]]
    let lower = cur.entry(1, 0).scale(k).trimmed(noise);
    let mut steps = vec![LiftingStep::Diag(k), LiftingStep::Lower(lower)];
    steps.extend(undo.into_iter().rev());
    let mut steps = merge_steps(steps, noise);
    for _ in 0..REFINE_SWEEPS {
        if lifting_recompose(&steps).distance(a) <= REFINE_TARGET {
            break;
        }
        refine_steps(&mut steps, a);
    }

    check_recomposition(&steps, a)?;
    Ok(steps)
}

/// One sweep of coordinate-wise least squares on the recomposition residual.
///
/// With the other factors fixed the product is affine in the coefficients of
/// a lower or upper step: `L (I + p E) R = L R + p · L E R`. Each step's
/// coefficients (on its current support) are replaced by the least-squares
/// solution of `A ≈ L R + Σ_d p_d z^d L E R`, kept only if the residual
/// drops. Rounding that the reduction amplified through large quotients is
/// removed this way.
fn refine_steps(steps: &mut [LiftingStep], a: &MatLaurentPoly) {
    for i in 0..steps.len() {
        let (unit, support) = match &steps[i] {
            LiftingStep::Lower(p) => ((1, 0), (p.min_deg(), p.max_deg())),
            LiftingStep::Upper(p) => ((0, 1), (p.min_deg(), p.max_deg())),
            LiftingStep::Diag(_) => continue,
        };
        let left = lifting_recompose(&steps[..i]);
        let right = lifting_recompose(&steps[i + 1..]);
        let base = &left * &right;
        let basis: Vec<MatLaurentPoly> = (support.0..=support.1)
            .map(|d| {
                let mut e = vec![vec![LaurentPoly::zero(), LaurentPoly::zero()]; 2];
                e[unit.0][unit.1] = LaurentPoly::monomial(Complex64::new(1.0, 0.0), d);
                let e = MatLaurentPoly::from_entries(&e).expect("2x2");
                &(&left * &e) * &right
            })
            .collect();
        let lo = basis.iter().map(MatLaurentPoly::min_deg).chain([a.min_deg(), base.min_deg()]).min().unwrap();
        let hi = basis.iter().map(MatLaurentPoly::max_deg).chain([a.max_deg(), base.max_deg()]).max().unwrap();
        let flatten = |m: &MatLaurentPoly| -> Vec<Complex64> {
            (lo..=hi).flat_map(|d| m.coeff(d).iter().copied().collect::<Vec<_>>()).collect()
        };
        let rows = ((hi - lo + 1) * 4) as usize;
        let design = CMat::from_fn(rows, basis.len(), |r, c| flatten(&basis[c])[r]);
        let target = a.checked_sub(&base).expect("2x2");
        let rhs = CMat::from_column_slice(rows, 1, &flatten(&target));
        let Ok(sol) = design.svd(true, true).solve(&rhs, 1e-14) else {
            continue;
        };
        let p = LaurentPoly::new(support.0, sol.column(0).iter().copied().collect());
        let candidate = match steps[i] {
            LiftingStep::Lower(_) => LiftingStep::Lower(p),
            _ => LiftingStep::Upper(p),
        };
        let before = lifting_recompose(steps).distance(a);
        let previous = std::mem::replace(&mut steps[i], candidate);
        if lifting_recompose(steps).distance(a) >= before {
            steps[i] = previous;
        }
    }
}

fn stalled(reason: &str, cur: &MatLaurentPoly) -> Error {
    Error::FactorizationFailed { reason: reason.to_string(), residual: Box::new(cur.clone()) }
}

/// Quotient `q` with `span(num − q·den) < span(den)`.
///
/// Such a quotient has `span(num) − span(den) + 1` terms; any `k` of them may
/// cancel coefficients from the top of the running remainder and the rest from
/// the bottom. Every split is tried and the one with the smallest largest
/// quotient coefficient is kept, since large quotients amplify rounding in
/// later reductions. Ties go to the split with more terms from the top.
///
/// Returns the quotient with the degree window `[lo, hi]` that holds the
/// remainder; coefficients outside it cancel exactly.
fn laurent_quotient(num: &LaurentPoly, den: &LaurentPoly, noise: f64) -> (LaurentPoly, (i32, i32)) {
    let (sn, sd) = (num.span().unwrap_or(0), den.span().expect("nonzero divisor"));
    if num.is_zero() || sn < sd {
        return (LaurentPoly::zero(), (num.min_deg(), num.max_deg()));
    }
    let terms = sn - sd + 1;
    (0..=terms)
        .rev()
        .map(|k| {
            let window = (num.min_deg() + (terms - k) as i32, num.max_deg() - k as i32);
            (split_quotient(num, den, k, terms - k, noise), window)
        })
        .min_by(|a, b| a.0.max_coeff().total_cmp(&b.0.max_coeff()))
        .unwrap()
}

/// Coefficients of `p` with degree in `[lo, hi]`.
fn restrict(p: &LaurentPoly, lo: i32, hi: i32) -> LaurentPoly {
    if hi < lo {
        return LaurentPoly::zero();
    }
    LaurentPoly::new(lo, (lo..=hi).map(|d| p.coeff(d)).collect())
}

/// Cancels `top` coefficients from the top of `num`, then `bottom` from the bottom.
fn split_quotient(num: &LaurentPoly, den: &LaurentPoly, top: usize, bottom: usize, noise: f64) -> LaurentPoly {
    let (top_lead, bottom_lead) = (den.coeff(den.max_deg()), den.coeff(den.min_deg()));
    let mut hi = num.max_deg();
    let mut lo = num.min_deg();
    let mut r = num.clone();
    let mut q = LaurentPoly::zero();
    for _ in 0..top {
        let term = LaurentPoly::monomial(r.coeff(hi) / top_lead, hi - den.max_deg());
        r = &r - &(&term * den);
        q = &q + &term;
        hi -= 1;
    }
    for _ in 0..bottom {
        let term = LaurentPoly::monomial(r.coeff(lo) / bottom_lead, lo - den.min_deg());
        r = &r - &(&term * den);
        q = &q + &term;
        lo += 1;
    }
    q.trimmed(noise)
}

/// Merges neighbouring steps of the same kind and drops zero polynomials.
fn merge_steps(steps: Vec<LiftingStep>, noise: f64) -> Vec<LiftingStep> {
    let mut out: Vec<LiftingStep> = Vec::with_capacity(steps.len());
    for step in steps {
        let step = match step {
            LiftingStep::Lower(p) => LiftingStep::Lower(p.trimmed(noise)),
            LiftingStep::Upper(p) => LiftingStep::Upper(p.trimmed(noise)),
            d => d,
        };
        if matches!(&step, LiftingStep::Lower(p) | LiftingStep::Upper(p) if p.is_zero()) {
            continue;
        }
        match (out.last_mut(), &step) {
            (Some(LiftingStep::Lower(p)), LiftingStep::Lower(q))
            | (Some(LiftingStep::Upper(p)), LiftingStep::Upper(q)) => {
                *p = (&*p + q).trimmed(noise);
                if p.is_zero() {
                    out.pop();
                }
            }
            _ => out.push(step),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filterbank::{check_qmf, polyphase_from_filters};
    use crate::laurent::{is_unitary_on_torus, k1_class, DEFAULT_GRID, DEFAULT_TOL};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn projection_examples() {
        let q = projection(&ProjectionParam::new(1.0, 0.0).unwrap()).unwrap();
        assert_eq!(q, CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]));
        let q = projection(&ProjectionParam::new(0.0, 2.5).unwrap()).unwrap();
        assert!(max_abs(&(q - CMat::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(1.0)]))) < 1e-16);
        let q = projection(&ProjectionParam::new(0.5, 0.0).unwrap()).unwrap();
        assert!(max_abs(&(&q - CMat::from_element(2, 2, c(0.5)))) < 1e-16);
        assert!(max_abs(&(&q * &q - &q)) < 1e-14);
    }

    #[test]
    fn projection_is_idempotent_self_adjoint_trace_one() {
        for (l, t) in [(0.3, 1.0), (0.9, 5.5), (0.01, 3.0)] {
            let q = projection(&ProjectionParam::new(l, t).unwrap()).unwrap();
            assert!(max_abs(&(&q * &q - &q)) < 1e-14);
            assert!(max_abs(&(&q - q.adjoint())) < 1e-14);
            assert!((q.trace() - c(1.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn projection_param_bounds() {
        assert!(ProjectionParam::new(-0.1, 0.0).is_err());
        assert!(ProjectionParam::new(1.1, 0.0).is_err());
        assert!(ProjectionParam::new(0.5, 2.0 * PI).is_err());
        assert!(projection(&ProjectionParam { lambda: 2.0, theta: 0.0 }).is_err());
    }

    #[test]
    fn no_projections_gives_haar() {
        let a = unitary_from_projections(&[]).unwrap();
        let bank = filters_from_polyphase(&a).unwrap();
        assert!(bank.distance(&FilterBank::haar()) < 1e-16);
    }

    #[test]
    fn one_coordinate_projection_gives_shifted_haar() {
        let a = unitary_from_projections(&[ProjectionParam::new(1.0, 0.0).unwrap()]).unwrap();
        let bank = filters_from_polyphase(&a).unwrap();
        let s = FRAC_1_SQRT_2;
        assert!(bank.filter(0).distance(&LaurentPoly::from_real(1, &[s, s])) < 1e-16);
        assert!(check_qmf(&bank, DEFAULT_GRID, DEFAULT_TOL).pass);
        assert_eq!(k1_class(&a).unwrap(), 1);
    }

    #[test]
    fn general_factor_examples() {
        let e = |n: usize, i: usize| {
            let mut v = vec![c(0.0); n];
            v[i] = c(1.0);
            rank_one_projection(&v).unwrap()
        };
        let f = general_factor(&e(2, 0)).unwrap();
        assert_eq!(f.entry(0, 0), LaurentPoly::monomial(c(1.0), 1));
        assert_eq!(f.entry(1, 1), LaurentPoly::one());
        assert!(f.entry(0, 1).is_zero() && f.entry(1, 0).is_zero());

        let f = general_factor(&e(3, 1)).unwrap();
        assert_eq!(f.entry(0, 0), LaurentPoly::one());
        assert_eq!(f.entry(1, 1), LaurentPoly::monomial(c(1.0), 1));
        assert_eq!(f.entry(2, 2), LaurentPoly::one());

        let q = projection(&ProjectionParam::new(0.5, 0.0).unwrap()).unwrap();
        let f = general_factor(&q).unwrap();
        let half = |a: f64, b: f64| LaurentPoly::from_real(0, &[a, b]);
        assert!(f.entry(0, 0).distance(&half(0.5, 0.5)) < 1e-16);
        assert!(f.entry(0, 1).distance(&half(-0.5, 0.5)) < 1e-16);
        assert!(f.entry(1, 0).distance(&half(-0.5, 0.5)) < 1e-16);
        assert!(f.entry(1, 1).distance(&half(0.5, 0.5)) < 1e-16);
        assert!(is_unitary_on_torus(&f, DEFAULT_GRID, 1e-14).unitary);
    }

    #[test]
    fn general_factor_rejects_non_projection() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(0.0)]);
        match general_factor(&m) {
            Err(Error::NotAProjection { idempotence, self_adjoint, .. }) => {
                assert!(idempotence < 1e-15);
                assert!(self_adjoint > 0.5);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(general_factor(&CMat::identity(2, 2)).is_err());
    }

    #[test]
    fn d4_values() {
        let h = daubechies4_h();
        assert!((h[0] - 0.683_012_7).abs() < 1e-7);
        assert!((h.iter().sum::<f64>() - 2.0).abs() < 1e-15);
        assert!((h[1] * h[3] + h[0] * h[2]).abs() < 1e-15);
        assert!(daubechies4_residuals(&h).iter().all(|r| *r <= 1e-12));
        let bank = daubechies4();
        assert!(check_qmf(&bank, DEFAULT_GRID, DEFAULT_TOL).pass);
        assert!(bank.lowpass_defect() < 1e-15);
    }

    #[test]
    fn six_tap_zero_angles() {
        let a = six_tap_coefficients(0.0, 0.0);
        let s = FRAC_1_SQRT_2;
        let expected = [0.0, s, 0.0, 0.0, s, 0.0];
        for (x, y) in a.iter().zip(expected) {
            assert!((x - y).abs() < 1e-15);
        }
        let bank = six_tap_from_angles(0.0, 0.0);
        assert!(bank.filter(0).distance(&LaurentPoly::from_real(0, &expected)) < 1e-15);
    }

    #[test]
    fn six_tap_paths_agree() {
        for (t, r) in [(0.3, 1.1), (2.0, -0.7), (4.0, 6.0), (1e-3, 3.14)] {
            let closed = LaurentPoly::from_real(0, &six_tap_coefficients(t, r));
            let bank = six_tap_from_angles(t, r);
            assert!(bank.filter(0).distance(&closed) < 1e-12);
            assert!(check_qmf(&bank, DEFAULT_GRID, DEFAULT_TOL).pass);
        }
    }

    #[test]
    fn d4_sits_in_the_six_tap_family() {
        let a: Vec<f64> = daubechies4_h().iter().map(|h| h / SQRT_2).collect();
        let target = [a[0], a[1], a[2], a[3], 0.0, 0.0];
        let fit = fit_six_tap(&target, 360);
        assert!(fit.distance < 1e-3, "{fit:?}");
    }

    fn poly(lo: i32, c: &[f64]) -> LaurentPoly {
        LaurentPoly::from_real(lo, c)
    }

    #[test]
    fn recompose_basics() {
        assert_eq!(lifting_recompose(&[]), MatLaurentPoly::identity(2));
        let d = lifting_recompose(&[LiftingStep::Diag(c(2.0))]);
        assert_eq!(d.coeff(0), CMat::from_row_slice(2, 2, &[c(2.0), c(0.0), c(0.0), c(0.5)]));
    }

    #[test]
    fn factorize_single_upper() {
        let u = poly(-1, &[0.5, 0.0, 2.0]);
        let a = LiftingStep::Upper(u.clone()).matrix();
        let steps = lifting_factorize(&a).unwrap();
        assert_eq!(steps, vec![LiftingStep::Diag(c(1.0)), LiftingStep::Upper(u)]);
    }

    #[test]
    fn factorize_two_step_product() {
        let a = &LiftingStep::Lower(poly(1, &[1.0])).matrix() * &LiftingStep::Upper(poly(0, &[1.0, 1.0])).matrix();
        let steps = lifting_factorize(&a).unwrap();
        assert!(lifting_recompose(&steps).distance(&a) < 1e-12);
        assert_eq!(steps[0].kind(), StepKind::Diag);
        for w in steps[1..].windows(2) {
            assert_ne!(w[0].kind(), w[1].kind());
        }
    }

    #[test]
    fn factorize_monomial_diagonal() {
        // diag(z^2, z^-2) needs the unit-fixing steps
        let a = MatLaurentPoly::from_entries(&[
            vec![LaurentPoly::monomial(c(3.0), 2), LaurentPoly::zero()],
            vec![LaurentPoly::zero(), LaurentPoly::monomial(c(1.0 / 3.0), -2)],
        ])
        .unwrap();
        let steps = lifting_factorize(&a).unwrap();
        assert!(lifting_recompose(&steps).distance(&a) < 1e-12);
    }

    #[test]
    fn factorize_rejects_bad_determinant() {
        let a = MatLaurentPoly::constant(CMat::from_row_slice(2, 2, &[c(2.0), c(0.0), c(0.0), c(1.0)]));
        assert!(matches!(lifting_factorize(&a), Err(Error::DeterminantNotOne { .. })));
        assert!(matches!(lifting_factorize(&MatLaurentPoly::identity(3)), Err(Error::InvalidOperand(_))));
    }

    #[test]
    fn step_on_filters_examples() {
        let haar = FilterBank::haar();
        let same = lifting_step_on_filters(&haar, &LiftingStep::Lower(LaurentPoly::zero())).unwrap();
        assert_eq!(same, haar);

        let lifted = lifting_step_on_filters(&haar, &LiftingStep::Upper(LaurentPoly::one())).unwrap();
        // (1 + z)/√2 + (1 − z)/√2 = √2
        assert!(lifted.filter(0).distance(&LaurentPoly::constant(c(SQRT_2))) < 1e-15);
        assert_eq!(lifted.filter(1), haar.filter(1));
    }

    #[test]
    fn step_on_filters_matches_left_multiplication() {
        let bank = daubechies4();
        let a = polyphase_from_filters(&bank);
        for step in [
            LiftingStep::Lower(poly(-1, &[0.3, -1.0, 2.0])),
            LiftingStep::Upper(poly(2, &[1.5])),
            LiftingStep::Diag(Complex64::new(0.5, 0.25)),
        ] {
            let via_filters = lifting_step_on_filters(&bank, &step).unwrap();
            let via_matrix = filters_from_polyphase(&(&step.matrix() * &a)).unwrap();
            assert!(via_filters.distance(&via_matrix) < 1e-12);
        }
    }

    #[test]
    fn step_json_shapes() {
        let s = serde_json::to_string(&LiftingStep::Diag(c(2.0))).unwrap();
        assert_eq!(s, r#"{"kind":"diag","k":[2.0,0.0]}"#);
        let s = serde_json::to_string(&LiftingStep::Lower(poly(0, &[1.0]))).unwrap();
        assert_eq!(s, r#"{"kind":"lower","poly":{"min_deg":0,"coeffs":[[1.0,0.0]]}}"#);
        assert!(serde_json::from_str::<LiftingStep>(r#"{"kind":"upper","k":[1,0]}"#).is_err());
        assert!(serde_json::from_str::<LiftingStep>(r#"{"kind":"diag","k":[0,0]}"#).is_err());
    }

    #[test]
    fn dft_matrix_reduces_to_v() {
        assert!(max_abs(&(dft_matrix(2) - v_matrix())) < 1e-15);
        let h = dft_matrix(3);
        assert!(max_abs(&(h.adjoint() * &h - CMat::identity(3, 3))) < 1e-15);
    }
}

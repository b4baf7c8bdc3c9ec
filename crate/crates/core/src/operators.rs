//! Sequence-domain operators.
//!
//! Signals are finitely supported sequences on ℤ; nothing is periodized and
//! convolutions grow the support. With `S_j f(z) = m_j(z) f(z^N)` the
//! analysis map is `S_j*`, which on coefficients reads
//! `(S_j* c)_k = Σ_n conj(a^{(j)}_n) c_{Nk+n}`.
//!
//! Normalization: these operators are unitary-normalized, so the Haar split of
//! `(a, b)` is `((a + b)/√2, (a − b)/√2)`. Expansions in `φ(x/2)` without the
//! `2^{-1/2}` factor give `(a ± b)/2` instead; the two differ by exactly `√2`.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::filterbank::FilterBank;
use crate::laurent::{CMat, LaurentPoly};

/// Finite complex sequence whose first stored sample sits at index `offset`.
/// Leading and trailing exact zeros are trimmed.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    offset: i64,
    samples: Vec<Complex64>,
}

impl Signal {
    pub fn new(offset: i64, samples: Vec<Complex64>) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        let Some(first) = samples.iter().position(|c| *c != zero) else {
            return Self::zero();
        };
        let last = samples.iter().rposition(|c| *c != zero).unwrap();
        Signal { offset: offset + first as i64, samples: samples[first..=last].to_vec() }
    }

    pub fn from_real(offset: i64, samples: &[f64]) -> Self {
        Self::new(offset, samples.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Signal { offset: 0, samples: Vec::new() }
    }

    /// Unit impulse at `index`.
    pub fn impulse(index: i64) -> Self {
        Signal { offset: index, samples: vec![Complex64::new(1.0, 0.0)] }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// One past the last stored index.
    pub fn end(&self) -> i64 {
        self.offset + self.samples.len() as i64
    }

    pub fn get(&self, index: i64) -> Complex64 {
        if index < self.offset || index >= self.end() {
            return Complex64::new(0.0, 0.0);
        }
        self.samples[(index - self.offset) as usize]
    }

    /// `Σ |c_n|²`
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `⟨self, other⟩ = Σ self_n conj(other_n)`
    pub fn inner(&self, other: &Signal) -> Complex64 {
        let lo = self.offset.max(other.offset);
        let hi = self.end().min(other.end());
        (lo..hi).map(|i| self.get(i) * other.get(i).conj()).sum()
    }

    pub fn add(&self, other: &Signal) -> Signal {
        if self.is_empty() {
            return other.clone();
        }
        if other.is_empty() {
            return self.clone();
        }
        let lo = self.offset.min(other.offset);
        let hi = self.end().max(other.end());
        Signal::new(lo, (lo..hi).map(|i| self.get(i) + other.get(i)).collect())
    }

    /// `‖self − other‖₂`
    pub fn l2_distance(&self, other: &Signal) -> f64 {
        let neg = Signal {
            offset: other.offset,
            samples: other.samples.iter().map(|c| -c).collect(),
        };
        self.add(&neg).energy().sqrt()
    }

    /// `(m ∗ c)_n = Σ_k a_k c_{n−k}`, i.e. multiplication of generating functions.
    pub fn filter(&self, m: &LaurentPoly) -> Signal {
        if self.is_empty() || m.is_zero() {
            return Signal::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.len() + m.len() - 1];
        for (i, a) in m.coeffs().iter().enumerate() {
            for (j, c) in self.samples.iter().enumerate() {
                out[i + j] += a * c;
            }
        }
        Signal::new(self.offset + m.min_deg() as i64, out)
    }
}

/// Keeps the samples at multiples of `n`, re-indexed by `/ n`.
pub fn downsample(c: &Signal, n: usize) -> Signal {
    assert!(n >= 2, "sampling factor must be at least 2");
    if c.is_empty() {
        return Signal::zero();
    }
    let n = n as i64;
    let lo = c.offset.div_euclid(n) + i64::from(c.offset.rem_euclid(n) != 0);
    let hi = (c.end() - 1).div_euclid(n);
    if hi < lo {
        return Signal::zero();
    }
    Signal::new(lo, (lo..=hi).map(|k| c.get(k * n)).collect())
}

/// Inserts `n − 1` zeros between samples: index `k` moves to `k n`.
pub fn upsample(c: &Signal, n: usize) -> Signal {
    assert!(n >= 2, "sampling factor must be at least 2");
    if c.is_empty() {
        return Signal::zero();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); (c.len() - 1) * n + 1];
    for (k, s) in c.samples.iter().enumerate() {
        out[k * n] = *s;
    }
    Signal::new(c.offset * n as i64, out)
}

/// Band `j`: `S_j* c = downsample(m_j* ∗ c, N)`.
pub fn analyze_band(c: &Signal, bank: &FilterBank, j: usize) -> Signal {
    downsample(&c.filter(&bank.filter(j).adjoint()), bank.scale_n())
}

/// `S_j d = m_j ∗ upsample(d, N)`.
pub fn synthesize_band(d: &Signal, bank: &FilterBank, j: usize) -> Signal {
    upsample(d, bank.scale_n()).filter(bank.filter(j))
}

/// All `N` bands `S_0* c, …, S_{N−1}* c`.
pub fn analyze(c: &Signal, bank: &FilterBank) -> Vec<Signal> {
    (0..bank.scale_n()).map(|j| analyze_band(c, bank, j)).collect()
}

/// `Σ_j S_j band_j`
pub fn synthesize(bands: &[Signal], bank: &FilterBank) -> Result<Signal> {
    if bands.len() != bank.scale_n() {
        return Err(Error::Validation(format!(
            "expected {} bands, got {}",
            bank.scale_n(),
            bands.len()
        )));
    }
    Ok(bands
        .iter()
        .enumerate()
        .fold(Signal::zero(), |acc, (j, d)| acc.add(&synthesize_band(d, bank, j))))
}

/// Output of the pyramid algorithm: the final coarse band and, per level, the
/// `N − 1` detail bands (level 0 is the finest).
#[derive(Clone, Debug, PartialEq)]
pub struct Pyramid {
    pub coarse: Signal,
    pub details: Vec<Vec<Signal>>,
}

impl Pyramid {
    /// Total energy over the coarse band and every detail band.
    pub fn energy(&self) -> f64 {
        self.coarse.energy() + self.details.iter().flatten().map(Signal::energy).sum::<f64>()
    }
}

/// Repeatedly splits the coarse band only.
pub fn pyramid_decompose(c: &Signal, bank: &FilterBank, levels: usize) -> Result<Pyramid> {
    if levels == 0 {
        return Err(Error::Validation("pyramid needs at least one level".into()));
    }
    let mut coarse = c.clone();
    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        let mut bands = analyze(&coarse, bank);
        coarse = bands.remove(0);
        details.push(bands);
    }
    Ok(Pyramid { coarse, details })
}

pub fn pyramid_reconstruct(p: &Pyramid, bank: &FilterBank) -> Result<Signal> {
    p.details.iter().rev().try_fold(p.coarse.clone(), |coarse, detail| {
        let mut bands = Vec::with_capacity(bank.scale_n());
        bands.push(coarse);
        bands.extend(detail.iter().cloned());
        synthesize(&bands, bank)
    })
}

/// Leaves of a wavelet-packet tree.
///
/// Leaf `(k, n)` is the node reached after `k` analysis steps with digits
/// `i₁, …, i_k` (the first applied being `i₁`), labelled
/// `n = i₁ + i₂N + … + i_k N^{k−1}`. Its coefficients are `S*_{i_k} ⋯ S*_{i₁} c`.
///
/// For a tree of depth `d` (the largest `k`), a leaf covers the depth-`d`
/// positions `r·N^{d−k}, …, (r+1)·N^{d−k} − 1`, where `r` is `n` with its `k`
/// base-`N` digits reversed. A valid partition covers each of the `N^d`
/// positions exactly once. For `N = 2` these are the dyadic intervals
/// `I_{d−k, r}` of the Coifman–Wickerhauser construction. Leaves are kept
/// sorted by `(k, n)`.
///
/// With the Haar bank and the full depth-`d` partition the transform is the
/// Walsh–Hadamard matrix scaled by `2^{−d/2}`; the row for leaf `(d, n)` is row
/// `n` of the natural (Sylvester) ordering, with sign `(−1)^{popcount(n & j)}`
/// at column `j`, not sequency order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PacketPartition {
    leaves: BTreeSet<(usize, usize)>,
}

/// Largest tree depth accepted for two bands; higher `N` scale this down.
const MAX_PACKET_POSITIONS: usize = 1 << 20;

impl PacketPartition {
    pub fn new(leaves: impl IntoIterator<Item = (usize, usize)>) -> Self {
        PacketPartition { leaves: leaves.into_iter().collect() }
    }

    /// Every node at depth `depth`.
    pub fn full(depth: usize, n: usize) -> Self {
        Self::new((0..n.pow(depth as u32)).map(|i| (depth, i)))
    }

    /// Leaves of the ordinary pyramid: details at each level plus the final coarse band.
    pub fn pyramid(levels: usize, n: usize) -> Self {
        let mut leaves = Vec::new();
        for k in 1..=levels {
            for i in 1..n {
                leaves.push((k, i * n.pow(k as u32 - 1)));
            }
        }
        leaves.push((levels, 0));
        Self::new(leaves)
    }

    pub fn leaves(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.leaves.iter().copied()
    }

    pub fn contains(&self, leaf: (usize, usize)) -> bool {
        self.leaves.contains(&leaf)
    }

    pub fn depth(&self) -> usize {
        self.leaves.iter().map(|l| l.0).max().unwrap_or(0)
    }

    /// Checks the covering condition for `n`-band trees and returns the depth.
    pub fn validate(&self, n: usize) -> Result<usize> {
        if self.leaves.is_empty() {
            return Err(Error::Validation("partition has no leaves".into()));
        }
        let depth = self.depth();
        let positions = n
            .checked_pow(depth as u32)
            .filter(|&p| p <= MAX_PACKET_POSITIONS)
            .ok_or_else(|| Error::Validation(format!("packet depth {depth} too large")))?;
        let mut count = vec![0u32; positions];
        for &(k, label) in &self.leaves {
            let width = n.pow(k as u32);
            if label >= width {
                return Err(Error::Validation(format!(
                    "leaf ({k}, {label}) has label outside 0..{width}"
                )));
            }
            let r = reverse_digits(label, k, n);
            let span = n.pow((depth - k) as u32);
            for slot in &mut count[r * span..(r + 1) * span] {
                *slot += 1;
            }
        }
        let overlapping: Vec<usize> = (0..positions).filter(|&p| count[p] > 1).collect();
        let missing: Vec<usize> = (0..positions).filter(|&p| count[p] == 0).collect();
        if overlapping.is_empty() && missing.is_empty() {
            Ok(depth)
        } else {
            Err(Error::InvalidPartition { overlapping, missing })
        }
    }
}

fn reverse_digits(mut label: usize, digits: usize, n: usize) -> usize {
    let mut r = 0;
    for _ in 0..digits {
        r = r * n + label % n;
        label /= n;
    }
    r
}

/// Runs the packet tree down to every leaf of `partition`.
pub fn packet_decompose(
    c: &Signal,
    bank: &FilterBank,
    partition: &PacketPartition,
) -> Result<BTreeMap<(usize, usize), Signal>> {
    partition.validate(bank.scale_n())?;
    let mut out = BTreeMap::new();
    descend(c.clone(), (0, 0), bank, partition, &mut out);
    Ok(out)
}

fn descend(
    sig: Signal,
    node: (usize, usize),
    bank: &FilterBank,
    partition: &PacketPartition,
    out: &mut BTreeMap<(usize, usize), Signal>,
) {
    if partition.contains(node) {
        out.insert(node, sig);
        return;
    }
    let (k, label) = node;
    let stride = bank.scale_n().pow(k as u32);
    for (i, band) in analyze(&sig, bank).into_iter().enumerate() {
        descend(band, (k + 1, label + i * stride), bank, partition, out);
    }
}

/// Inverse of [`packet_decompose`]; the keys of `leaves` must form a valid partition.
pub fn packet_reconstruct(
    leaves: &BTreeMap<(usize, usize), Signal>,
    bank: &FilterBank,
) -> Result<Signal> {
    let partition = PacketPartition::new(leaves.keys().copied());
    partition.validate(bank.scale_n())?;
    ascend((0, 0), leaves, bank)
}

fn ascend(
    node: (usize, usize),
    leaves: &BTreeMap<(usize, usize), Signal>,
    bank: &FilterBank,
) -> Result<Signal> {
    if let Some(sig) = leaves.get(&node) {
        return Ok(sig.clone());
    }
    let (k, label) = node;
    let stride = bank.scale_n().pow(k as u32);
    let bands = (0..bank.scale_n())
        .map(|i| ascend((k + 1, label + i * stride), leaves, bank))
        .collect::<Result<Vec<_>>>()?;
    synthesize(&bands, bank)
}

/// The `2^{n+2} × 2^{n+2}` scalar wavelet matrix of a two-band bank with
/// `2n + 2` taps (`n ≥ 1`), assembled from the blocks
/// `A_k = [[a_{2k}, a_{2k+1}], [b_{2k}, b_{2k+1}]]`.
///
/// Block row `r` carries `a_j` (row `2r`) and `b_j` (row `2r + 1`) in column
/// `(2r + j − 1) mod 2^{n+2}`: the first row reads `a₁, A₁, …, A_n, 0, …, 0, a₀`
/// and later block rows shift cyclically by two columns.
pub fn build_big_unitary(bank: &FilterBank) -> Result<CMat> {
    if bank.scale_n() != 2 {
        return Err(Error::Validation("the wavelet matrix needs a two-band bank".into()));
    }
    let (m0, m1) = (bank.filter(0), bank.filter(1));
    if m0.is_zero() || m0.min_deg() < 0 || (!m1.is_zero() && m1.min_deg() < 0) {
        return Err(Error::Validation("filters must be causal polynomials a_0 + a_1 z + ...".into()));
    }
    let taps = (m0.max_deg() + 1) as usize;
    if taps < 4 || taps % 2 != 0 || m1.max_deg() + 1 > taps as i32 {
        return Err(Error::Validation(format!(
            "wavelet matrix needs 2n + 2 >= 4 taps, low-pass has {taps} (high-pass up to degree {})",
            m1.max_deg()
        )));
    }
    let n = taps / 2 - 1;
    let size = 1usize << (n + 2);
    let mut u = CMat::zeros(size, size);
    for r in 0..size / 2 {
        for j in 0..taps {
            let col = (2 * r + j + size - 1) % size;
            u[(2 * r, col)] += m0.coeff(j as i32);
            u[(2 * r + 1, col)] += m1.coeff(j as i32);
        }
    }
    Ok(u)
}

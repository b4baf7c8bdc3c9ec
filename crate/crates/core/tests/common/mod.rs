#![allow(dead_code)]

use std::f64::consts::PI;

use rand::rngs::StdRng;
use rand::Rng;
use wavebank::design::{unitary_from_projections, LiftingStep, ProjectionParam};
use wavebank::filterbank::filters_from_polyphase;
use wavebank::operators::Signal;
use wavebank::{Complex64, FilterBank, LaurentPoly, MatLaurentPoly};

pub fn random_params(rng: &mut StdRng, k: usize) -> Vec<ProjectionParam> {
    (0..k)
        .map(|_| ProjectionParam::new(rng.gen_range(0.0..=1.0), rng.gen_range(0.0..2.0 * PI)).unwrap())
        .collect()
}

/// Two-band orthogonal bank from `k` random projection factors.
pub fn designed_bank(rng: &mut StdRng, k: usize) -> FilterBank {
    filters_from_polyphase(&unitary_from_projections(&random_params(rng, k)).unwrap()).unwrap()
}

pub fn random_complex(rng: &mut StdRng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_signal(rng: &mut StdRng, offset: i64, len: usize) -> Signal {
    Signal::new(offset, (0..len).map(|_| random_complex(rng)).collect())
}

/// Random Laurent polynomial with `1..=len` terms starting at `lo`.
pub fn random_poly(rng: &mut StdRng, lo: i32, len: usize) -> LaurentPoly {
    LaurentPoly::new(lo, (0..len).map(|_| random_complex(rng)).collect())
}

pub fn random_step(rng: &mut StdRng, lower: bool, max_deg: i32) -> LiftingStep {
    let lo = rng.gen_range(-max_deg / 2..=0);
    let len = rng.gen_range(1..=(max_deg + 1) as usize);
    let p = random_poly(rng, lo, len);
    if lower {
        LiftingStep::Lower(p)
    } else {
        LiftingStep::Upper(p)
    }
}

/// Alternating lower/upper product, optionally closed by a constant diag step.
pub fn random_lifting_product(rng: &mut StdRng, steps: usize, max_deg: i32) -> (Vec<LiftingStep>, MatLaurentPoly) {
    let mut out = Vec::new();
    let mut lower = rng.gen_bool(0.5);
    for _ in 0..steps {
        out.push(random_step(rng, lower, max_deg));
        lower = !lower;
    }
    if rng.gen_bool(0.5) {
        out.push(LiftingStep::Diag(Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..2.0 * PI))));
    }
    let m = wavebank::design::lifting_recompose(&out);
    (out, m)
}

/// Random valid packet partition for `n` bands: the root is always split and
/// every other node splits with probability `p_split` until `max_depth`.
pub fn random_partition(rng: &mut StdRng, n: usize, max_depth: usize, p_split: f64) -> wavebank::operators::PacketPartition {
    fn grow(rng: &mut StdRng, node: (usize, usize), n: usize, max_depth: usize, p: f64, out: &mut Vec<(usize, usize)>) {
        let (k, label) = node;
        let split = k == 0 || (k < max_depth && rng.gen_bool(p));
        if !split {
            out.push(node);
            return;
        }
        let stride = n.pow(k as u32);
        for i in 0..n {
            grow(rng, (k + 1, label + i * stride), n, max_depth, p, out);
        }
    }
    let mut leaves = Vec::new();
    grow(rng, (0, 0), n, max_depth, p_split, &mut leaves);
    wavebank::operators::PacketPartition::new(leaves)
}

mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use common::{
    designed_bank, random_complex, random_lifting_product, random_partition, random_poly, random_signal, random_step,
};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use wavebank::cascade::{cascade_step, scaling_function, GridFunction};
use wavebank::design::{
    daubechies4, lifting_factorize, lifting_recompose, lifting_step_on_filters, rank_one_projection,
    unitary_from_projections_n, LiftingStep,
};
use wavebank::filterbank::{check_qmf, dual_filters, filters_from_polyphase, polyphase_from_filters};
use wavebank::laurent::{is_unitary_on_torus, torus_point, DEFAULT_GRID};
use wavebank::operators::{
    analyze, analyze_band, downsample, packet_decompose, packet_reconstruct, synthesize, synthesize_band, upsample,
    Signal,
};
use wavebank::transfer::{spectrum, subdivision_apply, transfer_apply, TransferSpec, PERIPHERAL_TOL};
use wavebank::{Complex64, FilterBank, LaurentPoly};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

/// Orthogonal bank with 2 or 3 bands from random projection factors.
fn random_bank(rng: &mut StdRng) -> FilterBank {
    if rng.gen_bool(0.5) {
        let k = rng.gen_range(0..=5);
        designed_bank(rng, k)
    } else {
        let k = rng.gen_range(0..=3);
        let projections: Vec<_> = (0..k)
            .map(|_| rank_one_projection(&[random_complex(rng), random_complex(rng), random_complex(rng)]).unwrap())
            .collect();
        filters_from_polyphase(&unitary_from_projections_n(3, &projections).unwrap()).unwrap()
    }
}

fn poly_inner(a: &LaurentPoly, b: &LaurentPoly) -> Complex64 {
    a.terms().map(|(k, c)| c * b.coeff(k).conj()).sum()
}

fn sorted_by_modulus(mut v: Vec<Complex64>) -> Vec<Complex64> {
    v.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(a.im.total_cmp(&b.im)).then(a.re.total_cmp(&b.re)));
    v
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn laurent_operations_match_pointwise_values(seed in any::<u64>(), t in 0.0..2.0 * PI, n in 1usize..4) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (lo_p, lo_q) = (rng.gen_range(-4..4), rng.gen_range(-4..4));
        let (len_p, len_q) = (rng.gen_range(1..6), rng.gen_range(1..6));
        let p = random_poly(&mut rng, lo_p, len_p);
        let q = random_poly(&mut rng, lo_q, len_q);
        let z = torus_point(t);
        prop_assert!(((&p * &q).eval(z) - p.eval(z) * q.eval(z)).norm() < 1e-12);
        prop_assert!(((&p + &q).eval(z) - p.eval(z) - q.eval(z)).norm() < 1e-12);
        prop_assert!((p.adjoint().eval(z) - p.eval(z).conj()).norm() < 1e-12);
        prop_assert!((p.dilate(n).eval(z) - p.eval(z.powu(n as u32))).norm() < 1e-12);
        prop_assert!(((&p * &q).distance(&(&q * &p))) < 1e-14);
    }

    #[test]
    fn polyphase_round_trip_is_identity(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let bank = random_bank(&mut rng);
        let back = filters_from_polyphase(&polyphase_from_filters(&bank)).unwrap();
        prop_assert!(back.distance(&bank) < 1e-14);
    }

    #[test]
    fn qmf_check_agrees_with_polyphase_unitarity(seed in any::<u64>(), corrupt in any::<bool>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut bank = random_bank(&mut rng);
        if corrupt {
            let mut filters = bank.filters().to_vec();
            let j = rng.gen_range(0..filters.len());
            let bump = LaurentPoly::monomial(Complex64::new(rng.gen_range(0.01..0.5), 0.0), rng.gen_range(-2..3));
            filters[j] = &filters[j] + &bump;
            bank = FilterBank::new(bank.scale_n(), filters).unwrap();
        }
        let qmf = check_qmf(&bank, DEFAULT_GRID, 1e-9);
        let unitary = is_unitary_on_torus(&polyphase_from_filters(&bank), DEFAULT_GRID, 1e-9);
        prop_assert_eq!(qmf.pass, unitary.unitary);
        prop_assert_eq!(qmf.pass, !corrupt);
    }

    #[test]
    fn analysis_is_adjoint_to_synthesis(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let bank = random_bank(&mut rng);
        let j = rng.gen_range(0..bank.scale_n());
        let lo = rng.gen_range(-10..10);
        let c = random_signal(&mut rng, lo, 40);
        let lo = rng.gen_range(-10..10);
        let d = random_signal(&mut rng, lo, 20);
        let lhs = analyze_band(&c, &bank, j).inner(&d);
        let rhs = c.inner(&synthesize_band(&d, &bank, j));
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn orthogonal_banks_reconstruct_and_keep_energy(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let bank = random_bank(&mut rng);
        let lo = rng.gen_range(-10..10);
        let len = rng.gen_range(1..80);
        let c = random_signal(&mut rng, lo, len);
        let bands = analyze(&c, &bank);
        let energy: f64 = bands.iter().map(Signal::energy).sum();
        prop_assert!((energy - c.energy()).abs() < 1e-11 * c.energy().max(1.0));
        prop_assert!(synthesize(&bands, &bank).unwrap().l2_distance(&c) < 1e-12);
    }

    #[test]
    fn downsampling_is_adjoint_to_upsampling(seed in any::<u64>(), n in 2usize..5) {
        let mut rng = StdRng::seed_from_u64(seed);
        let lo = rng.gen_range(-20..20);
        let c = random_signal(&mut rng, lo, 50);
        let lo = rng.gen_range(-10..10);
        let d = random_signal(&mut rng, lo, 15);
        let lhs = downsample(&c, n).inner(&d);
        let rhs = c.inner(&upsample(&d, n));
        prop_assert!((lhs - rhs).norm() < 1e-12);
        prop_assert_eq!(downsample(&upsample(&d, n), n), d);
    }

    #[test]
    fn transfer_is_adjoint_to_subdivision(seed in any::<u64>(), n in 2usize..4) {
        let mut rng = StdRng::seed_from_u64(seed);
        let w = random_poly(&mut rng, -3, 7);
        let spec = TransferSpec::with_min_band(w, n).unwrap();
        let lo = rng.gen_range(-6..2);
        let f = random_poly(&mut rng, lo, 8);
        let lo = rng.gen_range(-6..2);
        let g = random_poly(&mut rng, lo, 8);
        let lhs = poly_inner(&transfer_apply(&spec, &f), &g);
        let rhs = poly_inner(&f, &subdivision_apply(&spec, &g));
        prop_assert!((lhs - rhs).norm() < 1e-11);
    }

    #[test]
    fn transfer_of_qmf_weight_fixes_constants(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let bank = random_bank(&mut rng);
        let spec = TransferSpec::from_bank(&bank).unwrap();
        prop_assert!(transfer_apply(&spec, &LaurentPoly::one()).trimmed(1e-12).distance(&LaurentPoly::one()) < 1e-12);
    }

    #[test]
    fn spectrum_is_invariant_under_reflection(seed in any::<u64>(), n in 2usize..4) {
        let mut rng = StdRng::seed_from_u64(seed);
        let w = random_poly(&mut rng, -4, 9);
        let reflected = LaurentPoly::new(-w.max_deg(), w.coeffs().iter().rev().copied().collect());
        let a = spectrum(&TransferSpec::with_min_band(w, n).unwrap(), PERIPHERAL_TOL).unwrap();
        let b = spectrum(&TransferSpec::with_min_band(reflected, n).unwrap(), PERIPHERAL_TOL).unwrap();
        let (a, b) = (sorted_by_modulus(a.eigenvalues), sorted_by_modulus(b.eigenvalues));
        prop_assert_eq!(a.len(), b.len());
        let scale = a.first().map_or(1.0, |l| l.norm().max(1.0));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x.norm() - y.norm()).abs() < 1e-7 * scale);
        }
        let (sa, sb): (Complex64, Complex64) = (a.iter().sum(), b.iter().sum());
        prop_assert!((sa - sb).norm() < 1e-7 * scale * a.len() as f64);
    }

    #[test]
    fn lifting_on_filters_matches_matrix_product(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let k = rng.gen_range(0..=4);
        let bank = designed_bank(&mut rng, k);
        let step = match rng.gen_range(0..3) {
            0 => random_step(&mut rng, true, 4),
            1 => random_step(&mut rng, false, 4),
            _ => LiftingStep::Diag(random_complex(&mut rng) + 1.5),
        };
        let via_filters = polyphase_from_filters(&lifting_step_on_filters(&bank, &step).unwrap());
        let via_matrix = &step.matrix() * &polyphase_from_filters(&bank);
        prop_assert!(via_filters.distance(&via_matrix) < 1e-12);
    }

    #[test]
    fn lifting_factorization_recomposes(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let steps = rng.gen_range(1..=6);
        let (_, a) = random_lifting_product(&mut rng, steps, 4);
        let found = lifting_factorize(&a).unwrap();
        prop_assert!(lifting_recompose(&found).distance(&a) < 1e-9);
    }

    #[test]
    fn packets_keep_energy_and_reconstruct(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let bank = random_bank(&mut rng);
        let partition = random_partition(&mut rng, bank.scale_n(), 4, 0.5);
        let lo = rng.gen_range(-10..10);
        let c = random_signal(&mut rng, lo, 60);
        let leaves: BTreeMap<_, _> = packet_decompose(&c, &bank, &partition).unwrap();
        let energy: f64 = leaves.values().map(Signal::energy).sum();
        prop_assert!((energy - c.energy()).abs() < 1e-10 * c.energy().max(1.0));
        prop_assert!(packet_reconstruct(&leaves, &bank).unwrap().l2_distance(&c) < 1e-11);
    }

    #[test]
    fn dual_bank_reconstructs(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let steps = rng.gen_range(1..=4);
        let (_, a) = random_lifting_product(&mut rng, steps, 2);
        let pair = dual_filters(&a, DEFAULT_GRID).unwrap();
        prop_assert!(pair.duality_residual(DEFAULT_GRID) < 1e-9);
        let c = random_signal(&mut rng, -5, 50);
        let back = synthesize(&analyze(&c, &pair.dual), &pair.primal).unwrap();
        prop_assert!(back.l2_distance(&c) < 1e-9 * c.energy().sqrt().max(1.0));
    }
}

/// D4 scaling function after enough iterations for the cascade to settle.
fn d4_phi() -> GridFunction {
    scaling_function(&daubechies4(), 10, 40).unwrap().phi
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn cascade_iterates_form_a_partition_of_unity(seed in any::<u64>(), iters in 1usize..8, x in 0.0f64..1.0) {
        let mut rng = StdRng::seed_from_u64(seed);
        let k = rng.gen_range(1..=3);
        let bank = designed_bank(&mut rng, k);
        let phi = scaling_function(&bank, 8, iters).unwrap().phi;
        let sum: Complex64 = (-40..40).map(|n| phi.at(x + n as f64)).sum();
        prop_assert!((sum - 1.0).norm() < 1e-9);
    }
}

#[test]
fn cascade_settles_to_a_fixed_point() {
    let phi = d4_phi();
    let next = cascade_step(&daubechies4(), &phi);
    assert!(next.l2_distance(&phi) < 1e-6);
    assert!((phi.integral() - 1.0).norm() < 1e-12);
}

/// Orthonormal up to the error of sampling on cells of width `2^{-10}`.
#[test]
fn scaling_function_translates_are_orthonormal() {
    let phi = d4_phi();
    for k in -3..=3 {
        let g = phi.inner(&phi.translate(k));
        let expected = if k == 0 { 1.0 } else { 0.0 };
        assert!((g - expected).norm() < 1e-4, "shift {k}: {g}");
    }
}

//! Structural invariants checked across modules: exact anticommutation,
//! projector identities, unitarity of the bipartition basis map, oracle
//! comparisons for the Slater expansion, and the entropy identities that
//! tie the measures together.

mod common;

use nalgebra::{DMatrix, DVector};
use nonfree_core::{
    build_free_state, free_state_entropy_bits, fock::slater_amplitudes, fock::relabel_sign,
    models::random_orbital_frame, natural_spectrum, nonfreeness, nonfreeness_rank2, one_pdm,
    random_state, relative_entropy_bits, tol, von_neumann_entropy_bits, Bipartition,
    DensityOperator, ModeCount, NonfreenessOptions, Occupation, OnePdm, RandomKind, Sector,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{
    annihilator_matrix, car_residual, creator_matrix, int_mul, max_abs_diff, random_bipartition,
};

fn d(n: usize) -> ModeCount {
    ModeCount::new(n).unwrap()
}

#[test]
fn car_relations_are_integer_exact() {
    for modes in 1..=5 {
        assert_eq!(car_residual(d(modes)), 0, "CAR residual at d = {modes}");
    }
}

#[test]
fn subset_projectors_are_orthogonal_projectors() {
    // a†_s a_s is idempotent and symmetric for every subset s, exactly.
    let dm = d(4);
    let dim = dm.fock_dim();
    for subset in 0u32..16 {
        let modes: Vec<usize> = (0..4).filter(|m| subset & (1 << m) != 0).collect();
        // a_s = a_{s1} a_{s2} ... ; a†_s is its transpose.
        let mut ann = common::int_identity(dim);
        for &m in &modes {
            ann = int_mul(&ann, &annihilator_matrix(dm, m));
        }
        // a†_s = a†_{s_n} ... a†_{s_1}: left-multiply in ascending order.
        let mut cre = common::int_identity(dim);
        for &m in &modes {
            cre = int_mul(&creator_matrix(dm, m), &cre);
        }
        let proj = int_mul(&cre, &ann);
        assert_eq!(max_abs_diff(&int_mul(&proj, &proj), &proj), 0);
        for i in 0..dim {
            for j in 0..dim {
                assert_eq!(proj[i][j], proj[j][i]);
            }
        }
    }
}

#[test]
fn number_operator_counts_particles() {
    let dm = d(5);
    let dim = dm.fock_dim();
    let mut number = common::int_zeros(dim);
    for m in 0..5 {
        number = common::int_add(
            &number,
            &int_mul(&creator_matrix(dm, m), &annihilator_matrix(dm, m)),
        );
    }
    for bits in 0..dim {
        for j in 0..dim {
            let expect = if bits == j {
                (bits as u32).count_ones() as i64
            } else {
                0
            };
            assert_eq!(number[bits][j], expect);
        }
    }
}

#[test]
fn split_map_is_unitary_on_basis_labels() {
    // The induced linear map sends the orthonormal basis to a signed
    // orthonormal basis: a bijection on labels with signs of modulus one.
    let dm = d(6);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let b = random_bipartition(dm, &mut rng);
        let mut images = std::collections::HashSet::new();
        for bits in 0u32..64 {
            let split = b.split(Occupation::new(dm, bits).unwrap());
            assert_eq!(split.sign.abs(), 1);
            assert!(images.insert((split.part1.bits(), split.part2.bits())));
        }
        assert_eq!(images.len(), 64);
    }
}

/// Expands the creator product column by column through repeated
/// single-mode creator applications; the independent oracle for
/// `slater_amplitudes`.
fn creator_product_expansion(
    frame: &nonfree_core::OrbitalMatrix,
) -> (Sector, DVector<Complex64>) {
    let dm = frame.mode_count();
    let dims = dm.fock_dim();
    let mut fock: Vec<Complex64> = vec![Complex64::from(0.0); dims];
    fock[0] = Complex64::from(1.0);
    for col in 0..frame.orbital_count() {
        let mut next = vec![Complex64::from(0.0); dims];
        for bits in 0..dims as u32 {
            let coeff = fock[bits as usize];
            if coeff == Complex64::from(0.0) {
                continue;
            }
            let occ = Occupation::new(dm, bits).unwrap();
            for mode in 0..dm.get() {
                if let Some((res, sign)) = occ.create(mode) {
                    next[res.bits() as usize] +=
                        coeff * frame.matrix()[(mode, col)] * Complex64::from(sign as f64);
                }
            }
        }
        fock = next;
    }
    let sector = Sector::new(dm, frame.orbital_count());
    let mut amps = DVector::from_element(sector.dim(), Complex64::from(0.0));
    for (i, occ) in sector.states().iter().enumerate() {
        amps[i] = fock[occ.bits() as usize];
    }
    let norm = amps.norm();
    if norm > 0.0 {
        amps /= Complex64::from(norm);
    }
    (sector, amps)
}

#[test]
fn slater_amplitudes_match_the_creator_product_oracle() {
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modes = 2 + (seed as usize) % 4;
        let orbitals = 1 + (seed as usize) % modes;
        let frame = random_orbital_frame(d(modes), orbitals, &mut rng).unwrap();
        let (sector, minors) = slater_amplitudes(&frame);
        let (_, expanded) = creator_product_expansion(&frame);
        for i in 0..sector.dim() {
            assert!(
                (minors[i] - expanded[i]).norm() < 1e-12,
                "seed {seed}, state {i}: {} vs {}",
                minors[i],
                expanded[i]
            );
        }
    }
}

#[test]
fn slater_amplitudes_norm_and_sector() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let frame = random_orbital_frame(d(5), 3, &mut rng).unwrap();
        let (sector, amps) = slater_amplitudes(&frame);
        assert_eq!(sector.particles(), 3);
        assert!((amps.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn relabel_sign_is_an_involution_consistent_parity() {
    let dm = d(5);
    let perm = [3usize, 0, 4, 1, 2];
    let mut inverse = [0usize; 5];
    for (old, &new) in perm.iter().enumerate() {
        inverse[new] = old;
    }
    for bits in 0u32..32 {
        let occ = Occupation::new(dm, bits).unwrap();
        let image = nonfree_core::fock::relabel_occupation(occ, &perm);
        assert_eq!(
            relabel_sign(occ, &perm),
            relabel_sign(image, &inverse),
            "bits {bits:#b}"
        );
    }
}

#[test]
fn compression_identity_on_random_states() {
    // 1-PDM of a restriction equals the compressed 1-PDM of the whole.
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(400 + seed);
        let modes = 3 + (seed as usize) % 4;
        let (state, _) = random_state(RandomKind::Mixed, d(modes), 4000 + seed).unwrap();
        let b = random_bipartition(d(modes), &mut rng);
        let restricted = state.restrict(&b).unwrap();
        let compressed = one_pdm(&state).compress(b.part1()).unwrap();
        let direct = one_pdm(&restricted);
        assert!(
            (compressed.matrix() - direct.matrix()).norm() < 1e-10,
            "seed {seed}"
        );
    }
}

#[test]
fn restriction_outputs_satisfy_density_invariants() {
    for seed in 0..12 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
        let (state, _) = random_state(RandomKind::Mixed, d(5), 5000 + seed).unwrap();
        let b = random_bipartition(d(5), &mut rng);
        let restricted = state.restrict(&b).unwrap();
        restricted.validate().unwrap();
        assert!((restricted.trace() - 1.0).abs() < 1e-11);
    }
}

#[test]
fn product_recovery_from_both_sides() {
    for seed in 0..10 {
        let (left, _) = random_state(RandomKind::Mixed, d(3), 7000 + seed).unwrap();
        let (right, _) = random_state(RandomKind::Pure, d(2), 7100 + seed).unwrap();
        let prod = left.tensor_product(&right).unwrap();
        let cut = Bipartition::new(d(5), &[0, 1, 2]).unwrap();
        assert!(prod.restrict(&cut).unwrap().frobenius_distance(&left).unwrap() < 1e-12);
        assert!(
            prod.restrict(&cut.complement())
                .unwrap()
                .frobenius_distance(&right)
                .unwrap()
                < 1e-12
        );
    }
}

#[test]
fn trace_identity_expected_particles() {
    for seed in 0..10 {
        for kind in [RandomKind::Mixed, RandomKind::Pure, RandomKind::BlockIndependent] {
            let (state, _) = random_state(kind, d(5), 7700 + seed).unwrap();
            let gamma = one_pdm(&state);
            assert!((gamma.trace() - state.expected_particle_number()).abs() < tol::CMP);
        }
    }
}

#[test]
fn relative_entropy_separates_states() {
    let (a, _) = random_state(RandomKind::Mixed, d(3), 81).unwrap();
    let (b, _) = random_state(RandomKind::Mixed, d(3), 82).unwrap();
    assert!(relative_entropy_bits(&a, &a).unwrap() < 1e-10);
    let dist = a.frobenius_distance(&b).unwrap();
    assert!(dist > 1e-3, "the two seeds should give distinct states");
    assert!(relative_entropy_bits(&a, &b).unwrap() > 1e-6);
}

#[test]
fn zero_characterization_of_nonfreeness() {
    // Nonfreeness vanishes exactly on the states that equal their own free
    // reference.
    for seed in 0..8 {
        let (state, _) = random_state(RandomKind::Mixed, d(4), 900 + seed).unwrap();
        let gamma = one_pdm(&state);
        let free = build_free_state(&gamma).unwrap();
        let report = nonfreeness(&state, NonfreenessOptions::default()).unwrap();
        let dist = state.frobenius_distance(&free).unwrap();
        assert_eq!(report.nonfreeness <= 1e-9, dist <= 1e-8, "seed {seed}");

        let free_report = nonfreeness(&free, NonfreenessOptions::default()).unwrap();
        assert!(free_report.nonfreeness <= 1e-9);
    }
}

#[test]
fn entropy_bound_holds_on_random_states() {
    for seed in 0..12 {
        for kind in [RandomKind::Pure, RandomKind::Mixed, RandomKind::BlockIndependent] {
            let (state, _) = random_state(kind, d(5), 1200 + seed).unwrap();
            let report = nonfreeness(&state, NonfreenessOptions::default()).unwrap();
            assert!(
                von_neumann_entropy_bits(&state) <= report.entropy_free + tol::CMP,
                "seed {seed}"
            );
        }
    }
}

#[test]
fn blad_identity_relative_plus_state_entropy() {
    // S(D) + S(D|G) = -Tr(D log G) in the commuting diagonal case, where
    // the cross entropy has a closed form.
    let weights_d = [0.15, 0.25, 0.35, 0.25];
    let weights_g = [0.4, 0.1, 0.2, 0.3];
    let dm = d(2);
    let mk = |w: [f64; 4]| {
        let mut blocks = std::collections::BTreeMap::new();
        blocks.insert(0, DMatrix::from_element(1, 1, Complex64::from(w[0])));
        blocks.insert(
            1,
            DMatrix::from_diagonal(&DVector::from_vec(vec![
                Complex64::from(w[1]),
                Complex64::from(w[2]),
            ])),
        );
        blocks.insert(2, DMatrix::from_element(1, 1, Complex64::from(w[3])));
        DensityOperator::from_blocks(dm, blocks).unwrap()
    };
    let d_op = mk(weights_d);
    let g_op = mk(weights_g);
    let lhs = von_neumann_entropy_bits(&d_op) + relative_entropy_bits(&d_op, &g_op).unwrap();
    let cross: f64 = weights_d
        .iter()
        .zip(&weights_g)
        .map(|(&dw, &gw)| -dw * gw.log2())
        .sum();
    assert!((lhs - cross).abs() < 1e-8);
}

fn bounded_gamma(entries: &[(f64, f64)], dim: usize) -> OnePdm {
    let raw = DMatrix::from_fn(dim, dim, |i, j| {
        let (re, im) = entries[i * dim + j];
        Complex64::new(re, im)
    });
    let herm = (&raw + raw.adjoint()) * Complex64::from(0.5);
    let scale = herm.norm() + 1.0;
    let scaled = herm / Complex64::from(2.0 * scale);
    let shifted = scaled + DMatrix::from_diagonal_element(dim, dim, Complex64::from(0.5));
    OnePdm::new(shifted).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn free_entropy_is_particle_hole_symmetric_and_bounded(
        ps in prop::collection::vec(0.0f64..=1.0, 1..6)
    ) {
        let entropy = free_state_entropy_bits(&ps);
        // The complemented list only matches to rounding: 1 - (1 - p) need
        // not reproduce p bit for bit.
        let holes: Vec<f64> = ps.iter().map(|p| 1.0 - p).collect();
        prop_assert!((entropy - free_state_entropy_bits(&holes)).abs() < 1e-12);
        prop_assert!(entropy >= 0.0);
        prop_assert!(entropy <= ps.len() as f64 + 1e-12);
    }

    #[test]
    fn rank2_closed_form_matches_the_general_pipeline(
        p1 in 0.0f64..=1.0,
        p2 in 0.0f64..=1.0,
        frac in 0.0f64..=1.0,
    ) {
        let lo = (p1 + p2 - 1.0).max(0.0);
        let hi = p1.min(p2);
        let q = lo + frac * (hi - lo);
        let closed = nonfreeness_rank2(p1, p2, q).unwrap();

        let mut blocks = std::collections::BTreeMap::new();
        blocks.insert(0, DMatrix::from_element(1, 1, Complex64::from(1.0 - p1 - p2 + q)));
        blocks.insert(1, DMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::from(p1 - q),
            Complex64::from(p2 - q),
        ])));
        blocks.insert(2, DMatrix::from_element(1, 1, Complex64::from(q)));
        let state = DensityOperator::from_blocks(ModeCount::new(2).unwrap(), blocks).unwrap();
        let report = nonfreeness(&state, NonfreenessOptions::default()).unwrap();
        prop_assert!((closed - report.nonfreeness).abs() < 1e-10,
            "closed {} vs pipeline {}", closed, report.nonfreeness);
    }

    #[test]
    fn natural_spectrum_reconstructs_random_onepdm(
        entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16)
    ) {
        let gamma = bounded_gamma(&entries, 4);
        let spectrum = natural_spectrum(&gamma).unwrap();
        let mut rebuilt = DMatrix::from_element(4, 4, Complex64::from(0.0));
        for (k, &p) in spectrum.occupations.iter().enumerate() {
            let col = spectrum.orbitals.matrix().column(k);
            rebuilt += (col * col.adjoint()) * Complex64::from(p);
        }
        prop_assert!((rebuilt - gamma.matrix()).norm() < 1e-12);
        for w in spectrum.occupations.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
        for &p in &spectrum.occupations {
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn free_state_fixed_point_on_random_gammas(
        entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 9)
    ) {
        let gamma = bounded_gamma(&entries, 3);
        let free = build_free_state(&gamma).unwrap();
        let back = one_pdm(&free);
        prop_assert!((back.matrix() - gamma.matrix()).norm() < 1e-10);
        let report = nonfreeness(&free, NonfreenessOptions::default()).unwrap();
        prop_assert!(report.nonfreeness <= 1e-9);
    }
}

//! Property tests for the algebraic invariants the rest of the pipeline
//! leans on.  Case counts are kept modest; every property is exact algebra,
//! so a handful of random instances per shape is plenty.

mod common;

use common::{expm_series, max_abs};
use nalgebra::DMatrix;
use proptest::prelude::*;
use zenocode::code_search::Supervector;
use zenocode::error_model::{evolve_exact, few_body_generator, FieldProfile, GeneratorSet};
use zenocode::quantum::{
    expm_hermitian, fidelity, haar_unitary_from_rng, pauli_x, pauli_y, pauli_z, projector_onto,
    random_hermitian, SpectralDecomposition, StateVector,
};
use zenocode::records::{
    control_sequence_from_string, control_sequence_to_string, generator_set_from_string,
    generator_set_to_string,
};
use zenocode::rng::rng_from_seed;
use zenocode::{C64, Operator};

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cases(24))]

    #[test]
    fn evolution_is_a_unitary_semigroup(seed in 0u64..1000, dim in 2usize..6,
                                        t1 in -1.0f64..1.0, t2 in -1.0f64..1.0) {
        let mut rng = rng_from_seed(seed);
        let h = random_hermitian(dim, &mut rng).unwrap();
        let sd = SpectralDecomposition::new(&h).unwrap();
        let u1 = sd.evolution(t1).unwrap();
        let u2 = sd.evolution(t2).unwrap();
        let u12 = sd.evolution(t1 + t2).unwrap();
        let dev = max_abs(&(u1.matrix() * u2.matrix() - u12.matrix()));
        prop_assert!(dev < 1e-11, "semigroup deviation {dev}");

        let psi = StateVector::random_normalized(dim, &mut rng).unwrap();
        let out = sd.apply_evolution(&psi, t1).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_matches_the_series_oracle(seed in 0u64..1000, dim in 2usize..7,
                                             t in -2.0f64..2.0) {
        let mut rng = rng_from_seed(seed);
        let h = random_hermitian(dim, &mut rng).unwrap();
        let fast = expm_hermitian(&h, t).unwrap();
        let slow = expm_series(&h, t);
        let dev = max_abs(&(fast.matrix() - slow));
        prop_assert!(dev < 1e-10, "series deviation {dev}");
    }

    #[test]
    fn projectors_are_idempotent_and_hermitian(seed in 0u64..1000, dim in 2usize..7) {
        let mut rng = rng_from_seed(seed);
        let k = 1 + (seed as usize % dim.saturating_sub(1).max(1));
        let u = haar_unitary_from_rng(dim, &mut rng).unwrap();
        let basis: Vec<StateVector> = (0..k)
            .map(|c| StateVector::from_dvector(u.matrix().column(c).into_owned()).unwrap())
            .collect();
        let p = projector_onto(&basis).unwrap();
        let pp = p.compose(&p).unwrap();
        prop_assert!(max_abs(&(pp.matrix() - p.matrix())) < 1e-12);
        prop_assert!(p.hermitian_deviation() < 1e-12);
    }

    #[test]
    fn fidelity_is_bounded_and_unitarily_invariant(seed in 0u64..1000, dim in 2usize..7) {
        let mut rng = rng_from_seed(seed);
        let a = StateVector::random_normalized(dim, &mut rng).unwrap();
        let b = StateVector::random_normalized(dim, &mut rng).unwrap();
        let f = fidelity(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        let u = haar_unitary_from_rng(dim, &mut rng).unwrap();
        let fu = fidelity(&u.apply(&a).unwrap(), &u.apply(&b).unwrap()).unwrap();
        prop_assert!((f - fu).abs() < 1e-12, "fidelity moved {f} -> {fu}");
        prop_assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_few_body_terms_commute(seed in 0u64..1000) {
        // Two-qubit words on disjoint supports of a 4-qubit register.
        let paulis = [pauli_x(), pauli_y(), pauli_z()];
        let i = (seed % 3) as usize;
        let j = ((seed / 3) % 3) as usize;
        let a = few_body_generator(4, &[0, 1], &hermit(paulis[i].kron(&paulis[j]))).unwrap();
        let b = few_body_generator(4, &[2, 3], &hermit(paulis[j].kron(&paulis[i]))).unwrap();
        let ab = a.matrix() * b.matrix();
        let ba = b.matrix() * a.matrix();
        prop_assert!(max_abs(&(ab - ba)) < 1e-13);
    }

    #[test]
    fn block_normalization_gives_unit_blocks(seed in 0u64..1000, n in 2usize..6,
                                             blocks in 1usize..4) {
        let mut rng = rng_from_seed(seed);
        let states: Vec<StateVector> = (0..blocks)
            .map(|_| {
                let v = DMatrix::<C64>::from_fn(n, 1, |_, _| {
                    zenocode::rng::standard_complex(&mut rng)
                })
                .column(0)
                .into_owned();
                StateVector::from_dvector(v * C64::new(3.0, 0.0)).unwrap()
            })
            .collect();
        let sv = Supervector::from_states(&states).unwrap();
        let normed = sv.block_normalized().unwrap();
        for b in 0..blocks {
            prop_assert!((normed.block(b).norm() - 1.0).abs() < 1e-12);
        }
        prop_assert!(normed.is_block_normalized(1e-10));
    }

    #[test]
    fn generator_set_serialization_is_bitwise(seed in 0u64..1000, dim in 2usize..6,
                                              count in 1usize..4) {
        let gens = GeneratorSet::random_hermitian(dim, count, seed).unwrap();
        let text = generator_set_to_string(&gens);
        let back = generator_set_from_string(&text).unwrap();
        for (a, b) in gens.generators().iter().zip(back.generators()) {
            prop_assert_eq!(a.matrix(), b.matrix());
        }
        prop_assert_eq!(text, generator_set_to_string(&back));
    }

    #[test]
    fn control_sequence_serialization_is_bitwise(seed in 0u64..1000, dim in 2usize..5,
                                                 pulses in 1usize..7) {
        let ctrl = zenocode::control::ControlPair::random(dim, seed).unwrap();
        let mut rng = rng_from_seed(seed ^ 0xabcd);
        let tau = zenocode::control::TimingVector::random_in_range(pulses, (0.1, 2.0), &mut rng)
            .unwrap();
        let text = control_sequence_to_string(&ctrl, &tau);
        let (c2, t2) = control_sequence_from_string(&text).unwrap();
        prop_assert_eq!(ctrl.h_a().matrix(), c2.h_a().matrix());
        prop_assert_eq!(ctrl.h_b().matrix(), c2.h_b().matrix());
        prop_assert_eq!(tau.timings(), t2.timings());
    }

    #[test]
    fn constant_field_evolution_is_exact_at_any_substep(seed in 0u64..200,
                                                        substep in 1usize..5) {
        // With constant fields the integrator must not depend on dt at all.
        let gens = GeneratorSet::random_hermitian(4, 2, seed).unwrap();
        let fields = vec![
            FieldProfile::Constant { amplitude: 0.21 },
            FieldProfile::Constant { amplitude: -0.13 },
        ];
        let mut rng = rng_from_seed(seed);
        let psi = StateVector::random_normalized(4, &mut rng).unwrap();
        let coarse = evolve_exact(&psi, &gens, &fields, 0.0, 0.7, 0.7).unwrap();
        let fine = evolve_exact(&psi, &gens, &fields, 0.0, 0.7, 0.7 / substep as f64).unwrap();
        let dev = (coarse.amplitudes() - fine.amplitudes()).norm();
        prop_assert!(dev < 1e-12, "dt dependence {dev}");
    }
}

fn hermit(op: Operator) -> Operator {
    Operator::hermitian(op.matrix().clone()).unwrap()
}

#[test]
fn projector_complement_annihilates_the_basis() {
    let mut rng = rng_from_seed(17);
    let u = haar_unitary_from_rng(6, &mut rng).unwrap();
    let basis: Vec<StateVector> = (0..3)
        .map(|c| StateVector::from_dvector(u.matrix().column(c).into_owned()).unwrap())
        .collect();
    let p = projector_onto(&basis).unwrap();
    for b in &basis {
        let pb = p.apply(b).unwrap();
        assert!((pb.amplitudes() - b.amplitudes()).norm() < 1e-12);
    }
    let outside = StateVector::from_dvector(u.matrix().column(5).into_owned()).unwrap();
    assert!(p.apply(&outside).unwrap().norm() < 1e-12);
}

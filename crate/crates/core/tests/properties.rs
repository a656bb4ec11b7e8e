//! Cross-module invariants under random unitaries, states and channels.

use fidelium::channels::{random_channel, unitary_channel};
use fidelium::designs::exact_minimal;
use fidelium::fidelity::{
    avg_fidelity_design, avg_fidelity_entanglement, avg_fidelity_generators, avg_fidelity_povm_form,
};
use fidelium::haar::{sample_pure_state, sample_unitary, SampleStream};
use fidelium::su_basis::gell_mann_basis;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn adjoint_rep_is_a_rotation(d in 2usize..=5, seed in any::<u64>()) {
        let basis = gell_mann_basis(d).unwrap();
        let u = sample_unitary(&SampleStream::new(seed, 0, d));
        let v = sample_unitary(&SampleStream::new(seed, 1, d));
        let au = basis.adjoint_rep(&u).unwrap();
        let av = basis.adjoint_rep(&v).unwrap();
        prop_assert!(au.orthogonality_residual() < 1e-10);
        prop_assert!((au.determinant() - 1.0).abs() < 1e-9);
        let auv = basis.adjoint_rep(&u.matmul(&v).unwrap()).unwrap();
        let product = au.matmul(&av);
        for (x, y) in auv.entries().iter().zip(product.entries()) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn bloch_vectors_rotate_covariantly(d in 2usize..=5, seed in any::<u64>()) {
        let basis = gell_mann_basis(d).unwrap();
        let u = sample_unitary(&SampleStream::new(seed, 0, d));
        let psi = sample_pure_state(&SampleStream::new(seed, 1, d));
        let n = basis.bloch_of_state(&psi).unwrap();
        prop_assert!((n.norm() - 1.0).abs() < 1e-10);
        let rotated = basis.bloch_of_state(&psi.evolve(&u).unwrap()).unwrap();
        let predicted = basis.adjoint_rep(&u).unwrap().apply(&n).unwrap();
        for (x, y) in rotated.components().iter().zip(predicted.components()) {
            prop_assert!((x - y).abs() < 1e-10);
        }
        let back = basis.state_from_bloch(&n).unwrap();
        let direct = psi.density();
        prop_assert!((back.matrix() - direct.matrix()).max_abs() < 1e-10);
    }

    #[test]
    fn estimators_agree_and_stay_in_range(d in 2usize..=3, k in 1usize..=9, seed in any::<u64>()) {
        let basis = gell_mann_basis(d).unwrap();
        let design = exact_minimal(d).unwrap();
        let channel = random_channel(d, k, seed).unwrap();
        let g = avg_fidelity_generators(&channel, &basis).unwrap().value;
        let s = avg_fidelity_design(&channel, &design).unwrap().value;
        let p = avg_fidelity_povm_form(&channel, &design).unwrap().value;
        let e = avg_fidelity_entanglement(&channel).unwrap().value;
        prop_assert!((g - s).abs() < 1e-10);
        prop_assert!((s - p).abs() < 1e-14);
        prop_assert!((g - e).abs() < 1e-10);
        prop_assert!(g >= 1.0 / (d as f64 + 1.0) - 1e-12 && g <= 1.0 + 1e-12);
    }

    #[test]
    fn unitary_channels_have_the_same_fidelity_under_conjugation(d in 2usize..=4, seed in any::<u64>()) {
        let basis = gell_mann_basis(d).unwrap();
        let u = sample_unitary(&SampleStream::new(seed, 0, d));
        let w = sample_unitary(&SampleStream::new(seed, 1, d));
        let rotated = w.matmul(&u).unwrap().matmul(&w.dagger()).unwrap();
        let a = avg_fidelity_generators(&unitary_channel(&u).unwrap(), &basis).unwrap().value;
        let b = avg_fidelity_generators(&unitary_channel(&rotated).unwrap(), &basis).unwrap().value;
        prop_assert!((a - b).abs() < 1e-10);
    }
}

mod common;

use common::{occupations, random_acted, random_state};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qudit_teleport::antisym::{
    antisymmetric_state, laplace_partition, schmidt_spectrum, LambdaMatrix, PartitionSpec,
};
use qudit_teleport::fock::{inner_product, partial_trace, tensor, PureState, Register};
use qudit_teleport::optics::{
    apply_unitary, permanent, permanent_naive, random_unitary, transition_amplitude, ModeUnitary,
};
use qudit_teleport::teleport::{run_collective, run_single_qudit, Mode, QuditInput};

fn oam_counts(state: &PureState) -> Vec<Vec<u32>> {
    let reg = state.register();
    let mut seen: Vec<Vec<u32>> = state
        .terms()
        .map(|(occ, _)| {
            (0..reg.oams)
                .map(|l| {
                    (0..reg.paths)
                        .map(|p| occ.counts()[p * reg.oams + l] as u32)
                        .sum()
                })
                .collect()
        })
        .collect();
    seen.sort();
    seen.dedup();
    seen
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn evolution_matches_permanent_oracle(seed in any::<u64>(), paths in 1usize..=4, oams in 1usize..=2, photons in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reg = Register::new(paths, oams);
        let state = random_state(&mut rng, reg, photons, 3);
        let u = random_acted(&mut rng, paths);
        let evolved = apply_unitary(&u, &state).unwrap();
        for out in occupations(reg.modes(), photons) {
            let oracle: Complex64 = state
                .terms()
                .map(|(inp, a)| a * transition_amplitude(&u, reg, inp, &out))
                .sum();
            prop_assert!((evolved.amplitude(&out) - oracle).norm() < 1e-10);
        }
    }

    #[test]
    fn ryser_matches_naive(seed in any::<u64>(), n in 0usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        prop_assert!((permanent(&m).unwrap() - permanent_naive(&m).unwrap()).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evolution_preserves_norm_and_labels(seed in any::<u64>(), paths in 1usize..=4, oams in 1usize..=3, photons in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reg = Register::new(paths, oams);
        let state = random_state(&mut rng, reg, photons, 4);
        let u = random_acted(&mut rng, paths);
        let evolved = apply_unitary(&u, &state).unwrap();
        prop_assert!((evolved.recomputed_norm_sq() - 1.0).abs() < 1e-10);
        prop_assert_eq!(evolved.photon_number(), Some(photons));
        // every output term keeps a per-label photon count present in the input
        let before = oam_counts(&state);
        for counts in oam_counts(&evolved) {
            prop_assert!(before.contains(&counts));
        }
        let back = apply_unitary(&u.adjoint(), &evolved).unwrap();
        prop_assert!(back.max_abs_diff(&state) < 1e-10);
    }

    #[test]
    fn composition_acts_left_factor_first(seed in any::<u64>(), paths in 1usize..=3, photons in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reg = Register::new(paths, 2);
        let state = random_state(&mut rng, reg, photons, 3);
        let acted: Vec<usize> = (0..paths).collect();
        let u = ModeUnitary::new(random_unitary(&mut rng, paths), acted.clone()).unwrap();
        let v = ModeUnitary::new(random_unitary(&mut rng, paths), acted).unwrap();
        let joint = apply_unitary(&u.compose(&v).unwrap(), &state).unwrap();
        let stepwise = apply_unitary(&v, &apply_unitary(&u, &state).unwrap()).unwrap();
        prop_assert!(joint.max_abs_diff(&stepwise) < 1e-10);
    }

    #[test]
    fn partial_trace_is_a_density_operator(seed in any::<u64>(), paths in 2usize..=4, photons in 1usize..=3, keep_mask in 1u8..15) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reg = Register::new(paths, 2);
        let state = random_state(&mut rng, reg, photons, 5);
        let keep: Vec<usize> = (0..paths).filter(|p| keep_mask & (1 << p) != 0).collect();
        prop_assume!(!keep.is_empty() && keep.len() < paths);
        let rho = partial_trace(&state, &keep).unwrap();
        prop_assert!((rho.trace() - 1.0).abs() < 1e-10);
        prop_assert!(rho.hermiticity_error() < 1e-12);
        prop_assert!(rho.eigenvalues().iter().all(|&x| x > -1e-10));
    }

    #[test]
    fn tensor_is_associative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reg = Register::new(1, 2);
        let a = random_state(&mut rng, reg, 1, 2);
        let b = random_state(&mut rng, reg, 2, 2);
        let c = random_state(&mut rng, reg, 1, 2);
        let left = tensor(&tensor(&a, &b).unwrap(), &c).unwrap();
        let right = tensor(&a, &tensor(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left.register(), right.register());
        prop_assert!(left.max_abs_diff(&right) < 1e-14);
    }

    #[test]
    fn laplace_expansion_reconstructs(d in 2usize..=5, n_raw in 1usize..5, seed in any::<u64>()) {
        let n = 1 + (n_raw - 1) % (d - 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut paths: Vec<usize> = (0..d).collect();
        for i in (1..d).rev() {
            paths.swap(i, rng.random_range(0..=i));
        }
        let lambda = LambdaMatrix::standard(d).unwrap();
        let part = PartitionSpec::new(&lambda, paths[..n].to_vec(), paths[n..].to_vec()).unwrap();
        let expansion = laplace_partition(&lambda, &part).unwrap();
        let psi = antisymmetric_state(&lambda).unwrap();
        prop_assert!(expansion.reconstruct().unwrap().max_abs_diff(&psi) < 1e-12);
        let spectrum = schmidt_spectrum(&psi, part.side_a_paths()).unwrap();
        let k = expansion.len();
        for (i, s) in spectrum.iter().enumerate() {
            let expected = if i < k { 1.0 / (k as f64).sqrt() } else { 0.0 };
            prop_assert!((s - expected).abs() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn teleportation_is_linear(seed in any::<u64>(), d in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chi1 = QuditInput::random(&mut rng, d);
        let chi2 = QuditInput::random(&mut rng, d);
        let (alpha, beta) = (Complex64::new(0.6, 0.2), Complex64::new(-0.3, 0.7));
        let mixed: Vec<Complex64> = chi1.coefficients().iter().zip(chi2.coefficients()).map(|(a, b)| alpha * a + beta * b).collect();
        let norm = mixed.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let chi = QuditInput::new(mixed.iter().map(|a| a / norm).collect()).unwrap();
        let r = run_single_qudit(d, &chi, Mode::PhysicalFilter).unwrap();
        let r1 = run_single_qudit(d, &chi1, Mode::PhysicalFilter).unwrap();
        let r2 = run_single_qudit(d, &chi2, Mode::PhysicalFilter).unwrap();
        let combined = r1.final_state.scaled(alpha / norm).add(&r2.final_state.scaled(beta / norm)).unwrap();
        let phase = inner_product(&combined, &r.final_state).unwrap();
        prop_assert!((phase.norm() - combined.norm_sq()).abs() < 1e-10);
        let aligned = combined.scaled(phase / phase.norm());
        prop_assert!(aligned.max_abs_diff(&r.final_state) < 1e-10);
        prop_assert!((r.report.fidelity - 1.0).abs() < 1e-10);
    }

    #[test]
    fn modes_agree(seed in any::<u64>(), d in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chi = QuditInput::random(&mut rng, d);
        let phys = run_single_qudit(d, &chi, Mode::PhysicalFilter).unwrap();
        let ideal = run_single_qudit(d, &chi, Mode::IdealProjector).unwrap();
        prop_assert!((phys.report.success_probability - ideal.report.success_probability).abs() < 1e-10);
        prop_assert!(phys.bob.max_abs_diff(&ideal.bob).unwrap() < 1e-10);
        prop_assert!((phys.report.success_probability - 1.0 / (d * d) as f64).abs() < 1e-9);
    }

    #[test]
    fn collective_modes_agree_for_single_photon_alice(seed in any::<u64>(), d in 3usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chi = QuditInput::random(&mut rng, d);
        let phys = run_collective(d, 1, &chi, Mode::PhysicalFilter).unwrap();
        let ideal = run_collective(d, 1, &chi, Mode::IdealProjector).unwrap();
        prop_assert!((phys.report.success_probability - ideal.report.success_probability).abs() < 1e-10);
        prop_assert!(phys.bob.max_abs_diff(&ideal.bob).unwrap() < 1e-10);
        prop_assert!(phys.report.fidelity > 1.0 - 1e-9);
    }
}

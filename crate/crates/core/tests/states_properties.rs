use num_complex::Complex64;
use proptest::prelude::*;
use qvault_core::channels::PermutationUnitary;
use qvault_core::numerics::{self, ComplexMatrix, Subsystem};
use qvault_core::states::{self, DensityMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ginibre(seed: u64, dim: usize) -> DensityMatrix {
    states::sample_random_mixed(dim, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

/// `D·P` with `P` a permutation matrix and `D` diagonal phases.
fn phase_permutation(perm: Vec<usize>, phases: &[f64]) -> ComplexMatrix {
    let p = PermutationUnitary::new(perm).unwrap();
    ComplexMatrix::from_fn(4, 4, |i, j| p.matrix()[(i, j)] * Complex64::from_polar(1.0, phases[i]))
}

fn permutation_of(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn entropy_is_unitarily_invariant(
        seed in any::<u64>(),
        perm in permutation_of(4),
        phases in prop::collection::vec(0.0f64..6.3, 4),
    ) {
        let rho = ginibre(seed, 4);
        let u = phase_permutation(perm, &phases);
        let moved = DensityMatrix::new(&(&u * rho.matrix()) * &u.adjoint()).unwrap();
        let a = states::von_neumann_entropy(&rho).unwrap();
        let b = states::von_neumann_entropy(&moved).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn purification_reduces_to_the_state(seed in any::<u64>(), dim in 2usize..=5) {
        let rho = ginibre(seed, dim);
        let psi = states::purify(&rho).unwrap();
        let joint = psi.projector();
        let back = numerics::partial_trace(joint.matrix(), dim, dim, Subsystem::A).unwrap();
        prop_assert!(back.max_abs_diff(rho.matrix()) < 1e-9);
    }

    #[test]
    fn dephasing_is_idempotent_and_trace_preserving(seed in any::<u64>()) {
        let rho = ginibre(seed, 4);
        let once = states::dephase_diagonal(&rho);
        let twice = states::dephase_diagonal(&once);
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(once.matrix().trace(), Complex64::new(rho.matrix().diagonal().iter().map(|z| z.re).sum(), 0.0));
    }
}

#[test]
fn ginibre_mean_purity_matches_hilbert_schmidt_measure() {
    // E[tr ρ²] = 2d / (d² + 1) for square Ginibre matrices
    let d = 4;
    let expected = 2.0 * d as f64 / (d * d + 1) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 10_000;
    let samples: Vec<f64> = (0..n).map(|_| states::sample_random_mixed(d, &mut rng).unwrap().purity()).collect();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();
    assert!((mean - expected).abs() < 5.0 * se, "mean {mean} expected {expected} se {se}");
}

#[test]
fn entropy_of_diagonal_states_is_shannon() {
    let p = [0.5, 0.25, 0.125, 0.125];
    let rho = DensityMatrix::diagonal(&p).unwrap();
    let oracle: f64 = p.iter().map(|x| -x * x.log2()).sum();
    assert!((states::von_neumann_entropy(&rho).unwrap() - oracle).abs() < 1e-12);
    assert!((oracle - 1.75).abs() < 1e-15);
}

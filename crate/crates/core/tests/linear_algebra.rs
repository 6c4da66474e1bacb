use num_complex::Complex64;
use proptest::prelude::*;
use qvault_core::numerics::{self, ComplexMatrix, Subsystem};

fn hermitian(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
        let raw = ComplexMatrix::new(dim, dim, v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).unwrap();
        (&raw + &raw.adjoint()).scale_real(0.5)
    })
}

fn square(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
        ComplexMatrix::new(dim, dim, v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).unwrap()
    })
}

/// Faddeev-LeVerrier: coefficients `c_k` of `det(λ𝟙 - M) = Σ c_k λ^{n-k}`.
fn characteristic_coefficients(m: &ComplexMatrix) -> Vec<Complex64> {
    let n = m.rows();
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    let mut aux = ComplexMatrix::zeros(n, n);
    for k in 1..=n {
        let shifted = &aux + &ComplexMatrix::identity(n).scale(coeffs[k - 1]);
        aux = m * &shifted;
        coeffs.push(-aux.trace() / k as f64);
    }
    coeffs
}

/// Coefficients of `Π (λ - λ_i)`.
fn coefficients_from_roots(roots: &[f64]) -> Vec<f64> {
    let mut c = vec![1.0];
    for &r in roots {
        let mut next = vec![0.0; c.len() + 1];
        for (k, &x) in c.iter().enumerate() {
            next[k] += x;
            next[k + 1] -= r * x;
        }
        c = next;
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigenvalues_sum_to_trace(m in (2usize..=8).prop_flat_map(hermitian)) {
        let ev = numerics::hermitian_eigenvalues(&m, 1e-10).unwrap();
        prop_assert!((ev.iter().sum::<f64>() - m.trace().re).abs() < 1e-10);
    }

    #[test]
    fn eigenvalues_are_roots_of_characteristic_polynomial(m in (2usize..=6).prop_flat_map(hermitian)) {
        let ev = numerics::hermitian_eigenvalues(&m, 1e-10).unwrap();
        let expected = characteristic_coefficients(&m);
        let got = coefficients_from_roots(&ev);
        for (e, g) in expected.iter().zip(&got) {
            prop_assert!(e.im.abs() < 1e-9);
            prop_assert!((e.re - g).abs() < 1e-9, "{:?} vs {:?}", expected, got);
        }
    }

    #[test]
    fn eigenvectors_are_orthonormal_and_reconstruct(m in (2usize..=8).prop_flat_map(hermitian)) {
        let eig = numerics::hermitian_eig(&m, 1e-10).unwrap();
        let v = &eig.eigenvectors;
        let gram = &v.adjoint() * v;
        prop_assert!(gram.max_abs_diff(&ComplexMatrix::identity(m.rows())) < 1e-10);
        prop_assert!(eig.reconstruct().max_abs_diff(&m) < 1e-10);
    }

    #[test]
    fn partial_trace_of_product(
        (a, b) in (1usize..=4, 1usize..=4).prop_flat_map(|(da, db)| (square(da), square(db)))
    ) {
        let ab = numerics::kron(&a, &b).unwrap();
        let keep_a = numerics::partial_trace(&ab, a.rows(), b.rows(), Subsystem::A).unwrap();
        let keep_b = numerics::partial_trace(&ab, a.rows(), b.rows(), Subsystem::B).unwrap();
        prop_assert!(keep_a.max_abs_diff(&a.scale(b.trace())) < 1e-12);
        prop_assert!(keep_b.max_abs_diff(&b.scale(a.trace())) < 1e-12);
    }

    #[test]
    fn pseudo_inverse_satisfies_penrose_identity(m in (2usize..=6).prop_flat_map(square)) {
        let (p, rank) = numerics::pseudo_inverse(&m, 1e-10).unwrap();
        prop_assert!(rank <= m.rows());
        let mpm = &(&m * &p) * &m;
        prop_assert!(mpm.max_abs_diff(&m) < 1e-8);
    }
}

#[test]
fn defective_rank_is_detected() {
    // rank-one outer product embedded in 16x16, like a singular superoperator
    let u: Vec<Complex64> = (0..16).map(|k| Complex64::new(k as f64, 1.0)).collect();
    let m = ComplexMatrix::outer(&u, &u);
    let (_, rank) = numerics::pseudo_inverse(&m, 1e-10).unwrap();
    assert_eq!(rank, 1);
}

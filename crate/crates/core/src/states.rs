//! Qudit states: pure states, density matrices, entropies, purification,
//! fidelity and random sampling.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::numerics::{self, ComplexMatrix};
use crate::{Error, Result};

/// Bound on `max |ρ - ρ†|` for a valid density matrix.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Bound on `|tr ρ - 1|` for a valid density matrix.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues in `[-NEGATIVE_EIGENVALUE_TOL, 0)` are treated as rounding
/// noise and clamped to zero; anything below is an invalid state.
pub const NEGATIVE_EIGENVALUE_TOL: f64 = 1e-9;
/// Bound on `|Σ|ψ_i|² - 1|` for a valid pure state.
pub const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("empty amplitude vector"));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState("amplitudes are not normalized"));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if amplitudes.is_empty() || !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidState("cannot normalize a zero vector"));
        }
        Ok(Self { amplitudes: amplitudes.into_iter().map(|a| a / norm).collect() })
    }

    /// Computational basis ket `|k⟩`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::InvalidArgument("basis index out of range"));
        }
        let mut amplitudes = alloc::vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[k] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    pub(crate) fn from_unit_vector(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &PureState) -> Complex64 {
        numerics::inner(&self.amplitudes, &other.amplitudes)
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation(&self, rho: &DensityMatrix) -> Result<f64> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch("state and density matrix dimensions differ"));
        }
        let rv = rho.matrix().mul_vec(&self.amplitudes);
        Ok(numerics::inner(&self.amplitudes, &rv).re)
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix { matrix: ComplexMatrix::outer(&self.amplitudes, &self.amplitudes) }
    }
}

/// A Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NonSquare { rows: matrix.rows(), cols: matrix.cols() });
        }
        if matrix.hermiticity_deviation() > HERMITICITY_TOL {
            return Err(Error::InvalidState("matrix is not Hermitian"));
        }
        if (matrix.trace().re - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState("trace differs from one"));
        }
        let eig = numerics::hermitian_eigenvalues(&matrix, HERMITICITY_TOL)?;
        if eig.last().copied().unwrap_or(0.0) < -NEGATIVE_EIGENVALUE_TOL {
            return Err(Error::InvalidState("matrix has a negative eigenvalue"));
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix known to be a valid state by construction. The Hermitian
    /// part is stored so downstream eigensolvers see exact symmetry.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.hermiticity_deviation() < 1e-8);
        Self { matrix: matrix.hermitian_part() }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64) }
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_diagonal(probabilities))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn purity(&self) -> f64 {
        self.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    /// Eigenvalues in descending order with negative rounding noise clamped.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        psd_spectrum(&self.matrix)
    }
}

fn clamp_spectrum(mut eigenvalues: Vec<f64>) -> Result<Vec<f64>> {
    for l in eigenvalues.iter_mut() {
        if *l < -NEGATIVE_EIGENVALUE_TOL {
            return Err(Error::InvalidState("operator has a negative eigenvalue"));
        }
        if *l < 0.0 {
            *l = 0.0;
        }
    }
    Ok(eigenvalues)
}

/// Spectrum of a positive semidefinite operator, clamped.
pub fn psd_spectrum(m: &ComplexMatrix) -> Result<Vec<f64>> {
    clamp_spectrum(numerics::hermitian_eigenvalues(m, 1e-9)?)
}

/// `-Σ λ log₂ λ` with `0 log 0 = 0`.
pub fn shannon_entropy(probabilities: &[f64]) -> f64 {
    probabilities.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

/// Entropy in bits of a unit-trace positive semidefinite operator.
pub fn operator_entropy(m: &ComplexMatrix) -> Result<f64> {
    Ok(shannon_entropy(&psd_spectrum(m)?))
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    operator_entropy(rho.matrix())
}

/// `Σ_k √λ_k |v_k⟩ ⊗ |k⟩` on `H_A ⊗ H_R`, system first.
pub fn purify(rho: &DensityMatrix) -> Result<PureState> {
    let eig = numerics::hermitian_eig(rho.matrix(), HERMITICITY_TOL)?;
    let eigenvalues = clamp_spectrum(eig.eigenvalues)?;
    let d = rho.dim();
    let mut amplitudes = alloc::vec![Complex64::new(0.0, 0.0); d * d];
    for (k, &lambda) in eigenvalues.iter().enumerate() {
        let w = lambda.sqrt();
        if w == 0.0 {
            continue;
        }
        for i in 0..d {
            amplitudes[i * d + k] = eig.eigenvectors[(i, k)] * w;
        }
    }
    PureState::normalized(amplitudes)
}

/// `(tr √(√ρ σ √ρ))²`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch("fidelity of states with different dimensions"));
    }
    let sqrt = |m: &DensityMatrix| -> Result<ComplexMatrix> {
        let eig = numerics::hermitian_eig(m.matrix(), HERMITICITY_TOL)?;
        // eigenvalues at rounding level would otherwise contribute ~1e-8 after the root
        let floor = 64.0 * f64::EPSILON * eig.eigenvalues.iter().fold(0.0f64, |a, &x| a.max(x));
        Ok(eig.map_eigenvalues(|x| if x > floor { x.sqrt() } else { 0.0 }))
    };
    // tr|√σ √ρ| via singular values avoids square roots of rounding noise
    let product = &sqrt(sigma)? * &sqrt(rho)?;
    let root_trace: f64 = numerics::svd(&product)?.singular_values.iter().sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

/// Ginibre sample: `G G† / tr(G G†)` with i.i.d. standard complex Gaussian
/// entries, which induces the Hilbert-Schmidt measure.
pub fn sample_random_mixed<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DensityMatrix> {
    if dim < 2 {
        return Err(Error::InvalidArgument("random states need dim >= 2"));
    }
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    let ggd = &g * &g.adjoint();
    let tr = ggd.trace().re;
    Ok(DensityMatrix::from_trusted(ggd.scale_real(1.0 / tr)))
}

/// Equal-modulus pure state with the first amplitude real and the remaining
/// relative phases uniform on `[0, 2π)`.
pub fn sample_maximally_coherent<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<PureState> {
    if dim < 1 {
        return Err(Error::InvalidArgument("dimension must be positive"));
    }
    let a = 1.0 / (dim as f64).sqrt();
    let amplitudes = (0..dim)
        .map(|k| {
            if k == 0 {
                Complex64::new(a, 0.0)
            } else {
                Complex64::from_polar(a, rng.random::<f64>() * 2.0 * PI)
            }
        })
        .collect();
    Ok(PureState::from_unit_vector(amplitudes))
}

/// Zeroes every off-diagonal entry.
pub fn dephase_diagonal(rho: &DensityMatrix) -> DensityMatrix {
    let m = rho.matrix();
    DensityMatrix {
        matrix: ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| if i == j { m[(i, i)] } else { Complex64::new(0.0, 0.0) }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e2() -> PureState {
        let h = 0.5;
        PureState::new(alloc::vec![
            Complex64::new(h, 0.0),
            Complex64::new(0.0, h),
            Complex64::new(0.0, -h),
            Complex64::new(h, 0.0)
        ])
        .unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(von_neumann_entropy(&e2().projector()).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(von_neumann_entropy(&DensityMatrix::maximally_mixed(4)).unwrap(), 2.0, epsilon = 1e-12);
        let mix = DensityMatrix::diagonal(&[0.5, 0.25, 0.25, 0.0]).unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&mix).unwrap(), 1.5, epsilon = 1e-12);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::diagonal(&[0.5, 0.6]).is_err());
        assert!(DensityMatrix::diagonal(&[1.5, -0.5]).is_err());
        assert!(DensityMatrix::diagonal(&[1.0 + 5e-10, -5e-10]).is_ok());
        let non_herm = ComplexMatrix::from_real(2, 2, &[0.5, 0.1, 0.0, 0.5]).unwrap();
        assert!(DensityMatrix::new(non_herm).is_err());
    }

    #[test]
    fn purification_of_pure_and_mixed() {
        let p = purify(&e2().projector()).unwrap();
        let rho_ar = ComplexMatrix::outer(p.amplitudes(), p.amplitudes());
        let red_r = numerics::partial_trace(&rho_ar, 4, 4, numerics::Subsystem::B).unwrap();
        // pure input leaves the reference in a pure state
        assert_abs_diff_eq!(operator_entropy(&red_r).unwrap(), 0.0, epsilon = 1e-10);

        let p = purify(&DensityMatrix::maximally_mixed(4)).unwrap();
        let rho_ar = ComplexMatrix::outer(p.amplitudes(), p.amplitudes());
        let red_r = numerics::partial_trace(&rho_ar, 4, 4, numerics::Subsystem::B).unwrap();
        assert!(red_r.max_abs_diff(DensityMatrix::maximally_mixed(4).matrix()) < 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let rho = e2().projector();
        assert_abs_diff_eq!(fidelity(&rho, &rho).unwrap(), 1.0, epsilon = 1e-9);
        let a = PureState::basis(4, 0).unwrap().projector();
        let b = PureState::basis(4, 1).unwrap().projector();
        assert_abs_diff_eq!(fidelity(&a, &b).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity(&rho, &DensityMatrix::maximally_mixed(4)).unwrap(), 0.25, epsilon = 1e-9);
        assert!(fidelity(&rho, &DensityMatrix::maximally_mixed(2)).is_err());
    }

    #[test]
    fn ginibre_samples_are_states_and_deterministic() {
        let mut r1 = ChaCha8Rng::seed_from_u64(42);
        let mut r2 = ChaCha8Rng::seed_from_u64(42);
        let a = sample_random_mixed(4, &mut r1).unwrap();
        let b = sample_random_mixed(4, &mut r2).unwrap();
        assert_eq!(a, b);
        assert_abs_diff_eq!(a.matrix().trace().re, 1.0, epsilon = 1e-12);
        assert!(a.spectrum().unwrap().iter().all(|&l| l >= 0.0));
        assert!(DensityMatrix::new(a.into_matrix()).is_ok());
        assert!(sample_random_mixed(1, &mut r1).is_err());
    }

    #[test]
    fn dephasing_examples() {
        let d = dephase_diagonal(&e2().projector());
        assert!(d.matrix().max_abs_diff(DensityMatrix::maximally_mixed(4).matrix()) < 1e-15);
        let diag = DensityMatrix::diagonal(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(dephase_diagonal(&diag), diag);
    }

    #[test]
    fn maximally_coherent_samples_have_equal_moduli() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = sample_maximally_coherent(4, &mut rng).unwrap();
        assert!(s.amplitudes().iter().all(|a| (a.norm() - 0.5).abs() < 1e-15));
        assert_eq!(s.amplitudes()[0].im, 0.0);
    }
}

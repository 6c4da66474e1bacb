//! State tomography in `d = 4` with five mutually unbiased bases.
//!
//! Basis 0 is the computational (path) basis and basis 1 is the encoding basis
//! used by the vault; the other three complete the standard table whose
//! entries all have modulus `1/2` and phases in `{±1, ±i}`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};

use crate::numerics::ComplexMatrix;
use crate::states::{DensityMatrix, PureState};
use crate::{Error, Result};

/// Model probabilities are floored here before division and logarithms.
pub const PROBABILITY_FLOOR: f64 = 1e-15;

const UNBIASED_TOL: f64 = 1e-10;
const ORTHONORMAL_TOL: f64 = 1e-12;

/// Phase exponents `k` of `i^k` for bases 1..=4 (amplitudes are `i^k / 2`).
const PHASE_TABLE: [[[u8; 4]; 4]; 4] = [
    // encoding basis e₁..e₄
    [[0, 1, 1, 2], [0, 1, 3, 0], [0, 3, 3, 2], [0, 3, 1, 0]],
    [[0, 0, 0, 0], [0, 2, 0, 2], [0, 0, 2, 2], [0, 2, 2, 0]],
    [[0, 1, 0, 3], [0, 3, 2, 3], [0, 1, 2, 1], [0, 3, 0, 1]],
    [[0, 0, 1, 3], [0, 2, 3, 3], [0, 0, 3, 1], [0, 2, 1, 1]],
];

fn phase_state(exponents: &[u8; 4]) -> PureState {
    let amps = exponents
        .iter()
        .map(|k| match k % 4 {
            0 => Complex64::new(0.5, 0.0),
            1 => Complex64::new(0.0, 0.5),
            2 => Complex64::new(-0.5, 0.0),
            _ => Complex64::new(0.0, -0.5),
        })
        .collect();
    PureState::new(amps).expect("table rows are normalized")
}

/// The four equal-weight superpositions used to encode CMYK colors.
pub fn encoding_basis() -> [PureState; 4] {
    PHASE_TABLE[0].map(|row| phase_state(&row))
}

/// An ordered collection of orthonormal bases of equal dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct MubSet {
    dim: usize,
    bases: Vec<Vec<PureState>>,
}

impl MubSet {
    /// Checks orthonormality within each basis and `|⟨ψ|φ⟩|² = 1/d` across
    /// bases.
    pub fn new(bases: Vec<Vec<PureState>>) -> Result<Self> {
        let dim = bases.first().map_or(0, |b| b.len());
        if dim == 0 || bases.iter().any(|b| b.len() != dim || b.iter().any(|s| s.dim() != dim)) {
            return Err(Error::ConstructionFailure("bases must be complete and of equal dimension"));
        }
        let target = 1.0 / dim as f64;
        for (bi, basis) in bases.iter().enumerate() {
            for (i, a) in basis.iter().enumerate() {
                for (j, b) in basis.iter().enumerate() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    if (a.overlap(b).norm() - expected).abs() > ORTHONORMAL_TOL {
                        return Err(Error::ConstructionFailure("basis is not orthonormal"));
                    }
                }
                for other in &bases[bi + 1..] {
                    for b in other {
                        if (a.overlap(b).norm_sqr() - target).abs() > UNBIASED_TOL {
                            return Err(Error::ConstructionFailure("bases are not mutually unbiased"));
                        }
                    }
                }
            }
        }
        Ok(Self { dim, bases })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bases(&self) -> &[Vec<PureState>] {
        &self.bases
    }

    pub fn basis(&self, index: usize) -> &[PureState] {
        &self.bases[index]
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }
}

/// The complete set of five MUBs in `d = 4`.
pub fn build_mubs_d4() -> Result<MubSet> {
    let mut bases = vec![(0..4).map(|k| PureState::basis(4, k)).collect::<Result<Vec<_>>>()?];
    bases.extend(PHASE_TABLE.iter().map(|b| b.iter().map(phase_state).collect()));
    MubSet::new(bases)
}

/// `p_k = ⟨ψ_k|ρ|ψ_k⟩`, with negative rounding clamped to zero.
pub fn born_probabilities(rho: &DensityMatrix, basis: &[PureState]) -> Result<Vec<f64>> {
    basis.iter().map(|s| s.expectation(rho).map(|p| p.max(0.0))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseMode {
    /// Fixed number of shots per basis.
    Multinomial,
    /// Independent Poisson counts per outcome.
    Poisson,
}

/// Detection counts: one row per basis, one column per outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountRecord {
    pub shots_per_basis: u64,
    pub counts: Vec<Vec<u64>>,
    pub mode: NoiseMode,
}

impl CountRecord {
    pub fn new(shots_per_basis: u64, counts: Vec<Vec<u64>>, mode: NoiseMode) -> Result<Self> {
        if mode == NoiseMode::Multinomial && counts.iter().any(|row| row.iter().sum::<u64>() != shots_per_basis) {
            return Err(Error::InvalidArgument("multinomial rows must sum to shots_per_basis"));
        }
        Ok(Self { shots_per_basis, counts, mode })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    fn check_shape(&self, mubs: &MubSet) -> Result<()> {
        if self.counts.len() != mubs.len() || self.counts.iter().any(|r| r.len() != mubs.dim()) {
            return Err(Error::DimensionMismatch("count record shape differs from the basis set"));
        }
        Ok(())
    }
}

fn multinomial<R: Rng + ?Sized>(shots: u64, probs: &[f64], rng: &mut R) -> Vec<u64> {
    let mut out = vec![0; probs.len()];
    let mut remaining = shots;
    let mut mass: f64 = probs.iter().sum();
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k + 1 == probs.len() {
            out[k] = remaining;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let n = Binomial::new(remaining, q).expect("probability in [0, 1]").sample(rng);
        out[k] = n;
        remaining -= n;
        mass -= p;
    }
    out
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let x: f64 = Poisson::new(mean).expect("positive finite mean").sample(rng);
    x as u64
}

/// Simulated detection counts for every basis of `mubs`.
pub fn simulate_counts<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    mubs: &MubSet,
    shots_per_basis: u64,
    rng: &mut R,
    mode: NoiseMode,
) -> Result<CountRecord> {
    if shots_per_basis == 0 {
        return Err(Error::InvalidArgument("shots_per_basis must be positive"));
    }
    if rho.dim() != mubs.dim() {
        return Err(Error::DimensionMismatch("state and basis dimensions differ"));
    }
    let mut counts = Vec::with_capacity(mubs.len());
    for basis in mubs.bases() {
        let probs = born_probabilities(rho, basis)?;
        counts.push(match mode {
            NoiseMode::Multinomial => multinomial(shots_per_basis, &probs, rng),
            NoiseMode::Poisson => probs.iter().map(|&p| poisson(p * shots_per_basis as f64, rng)).collect(),
        });
    }
    Ok(CountRecord { shots_per_basis, counts, mode })
}

/// Counts `round(shots · p)` without sampling noise.
pub fn expected_counts(rho: &DensityMatrix, mubs: &MubSet, shots_per_basis: u64) -> Result<CountRecord> {
    let counts = mubs
        .bases()
        .iter()
        .map(|b| born_probabilities(rho, b).map(|p| p.iter().map(|&x| (x * shots_per_basis as f64).round() as u64).collect()))
        .collect::<Result<Vec<Vec<u64>>>>()?;
    Ok(CountRecord { shots_per_basis, counts, mode: NoiseMode::Poisson })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    pub max_iters: usize,
    /// Stop once the per-shot log-likelihood gain of an iteration drops below this.
    pub tol: f64,
    /// Keep the log-likelihood of every iterate in [`MleOutcome::history`].
    pub record_history: bool,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self { max_iters: 10_000, tol: 1e-10, record_history: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MleOutcome {
    pub state: DensityMatrix,
    pub iterations: usize,
    /// `Σ n_bk ln p_bk` at the returned state.
    pub log_likelihood: f64,
    pub converged: bool,
    /// Number of nonzero-count bins whose model probability hit the floor at
    /// the returned state.
    pub floored_bins: usize,
    /// Log-likelihood of the start point and of each accepted iterate, when
    /// requested.
    pub history: Vec<f64>,
}

struct Likelihood {
    projectors: Vec<ComplexMatrix>,
    vectors: Vec<Vec<Complex64>>,
    counts: Vec<f64>,
    total: f64,
}

impl Likelihood {
    fn probability(&self, k: usize, rho: &ComplexMatrix) -> f64 {
        let v = &self.vectors[k];
        let rv = rho.mul_vec(v);
        crate::numerics::inner(v, &rv).re.max(PROBABILITY_FLOOR)
    }

    fn log_likelihood(&self, rho: &ComplexMatrix) -> f64 {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0.0)
            .map(|(k, &n)| n * self.probability(k, rho).ln())
            .sum()
    }

    fn r_operator(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let d = rho.rows();
        let mut r = ComplexMatrix::zeros(d, d);
        for (k, &n) in self.counts.iter().enumerate() {
            if n > 0.0 {
                let w = n / self.total / self.probability(k, rho);
                r = &r + &self.projectors[k].scale_real(w);
            }
        }
        r
    }
}

fn sandwich(a: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    let m = &(a * rho) * a;
    let tr = m.trace().re;
    m.hermitian_part().scale_real(1.0 / tr)
}

/// Iterative `RρR` maximum-likelihood reconstruction starting from `𝟙/d`.
///
/// If a full `RρR` step would lower the likelihood, the step falls back to the
/// diluted update `(𝟙 + εR)ρ(𝟙 + εR)` with `ε` halved until the likelihood
/// does not decrease, so the likelihood is nondecreasing along the iteration.
pub fn mle_reconstruct(counts: &CountRecord, mubs: &MubSet, options: MleOptions) -> Result<MleOutcome> {
    counts.check_shape(mubs)?;
    let d = mubs.dim();
    let mut rho = DensityMatrix::maximally_mixed(d).into_matrix();
    let lik = Likelihood {
        projectors: mubs.bases().iter().flatten().map(|s| ComplexMatrix::outer(s.amplitudes(), s.amplitudes())).collect(),
        vectors: mubs.bases().iter().flatten().map(|s| s.amplitudes().to_vec()).collect(),
        counts: counts.counts.iter().flatten().map(|&n| n as f64).collect(),
        total: counts.total() as f64,
    };
    if lik.total == 0.0 {
        return Ok(MleOutcome { state: DensityMatrix::from_trusted(rho), iterations: 0, log_likelihood: 0.0, converged: true, floored_bins: 0, history: Vec::new() });
    }

    let identity = ComplexMatrix::identity(d);
    let mut ll = lik.log_likelihood(&rho);
    let mut history = Vec::new();
    if options.record_history {
        history.push(ll);
    }
    let mut iterations = 0;
    let mut converged = false;
    while iterations < options.max_iters {
        iterations += 1;
        let r = lik.r_operator(&rho);
        let mut candidate = sandwich(&r, &rho);
        let mut cand_ll = lik.log_likelihood(&candidate);
        let mut eps = 1.0;
        while cand_ll < ll && eps > 1e-12 {
            eps *= 0.5;
            let step = &identity + &r.scale_real(eps);
            candidate = sandwich(&step, &rho);
            cand_ll = lik.log_likelihood(&candidate);
        }
        if cand_ll < ll {
            // no ascent direction left at double precision
            converged = true;
            break;
        }
        let gain = (cand_ll - ll) / lik.total;
        rho = candidate;
        ll = cand_ll;
        if options.record_history {
            history.push(ll);
        }
        if gain < options.tol {
            converged = true;
            break;
        }
    }

    let floored_bins = lik
        .counts
        .iter()
        .enumerate()
        .filter(|(k, &n)| n > 0.0 && lik.probability(*k, &rho) <= PROBABILITY_FLOOR)
        .count();
    Ok(MleOutcome { state: DensityMatrix::from_trusted(rho), iterations, log_likelihood: ll, converged, floored_bins, history })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBar {
    pub mean: f64,
    /// Sample standard deviation of the ensemble.
    pub std: f64,
    pub reps: usize,
}

/// Resamples every count as `Poisson(observed)`, reconstructs each replica and
/// summarizes `statistic` over the ensemble.
///
/// Replica `k` draws from its own stream derived from one master seed taken
/// from `rng`, so results do not depend on evaluation order.
pub fn monte_carlo_errors<R, F>(
    counts: &CountRecord,
    mubs: &MubSet,
    reps: usize,
    rng: &mut R,
    options: MleOptions,
    statistic: F,
) -> Result<ErrorBar>
where
    R: Rng + ?Sized,
    F: Fn(&DensityMatrix) -> Result<f64>,
{
    if reps < 2 {
        return Err(Error::InvalidArgument("at least two repetitions are required"));
    }
    counts.check_shape(mubs)?;
    let master: u64 = rng.random();
    let mut values = Vec::with_capacity(reps);
    for rep in 0..reps {
        let mut stream = crate::stream_rng(master, rep as u64);
        let resampled: Vec<Vec<u64>> =
            counts.counts.iter().map(|row| row.iter().map(|&n| poisson(n as f64, &mut stream)).collect()).collect();
        let record = CountRecord { shots_per_basis: counts.shots_per_basis, counts: resampled, mode: NoiseMode::Poisson };
        let outcome = mle_reconstruct(&record, mubs, options)?;
        values.push(statistic(&outcome.state)?);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok(ErrorBar { mean, std: var.sqrt(), reps })
}

//! Information quantities of a channel acting on a given input, in bits.
//!
//! | kind | definition |
//! |------|------------|
//! | REC | `S(ρ_diag) - S(ρ)` evaluated on the channel output |
//! | entropy exchange | `S((Φ ⊗ 𝟙_R)(|Ψ_AR⟩⟨Ψ_AR|))` |
//! | QMI | `S(ρ) + S(Φ[ρ]) - S(ρ, Φ)` |
//! | coherent information | `S(Φ[ρ]) - S(ρ, Φ)` |
//! | loss | `S(ρ) + S(ρ, Φ) - S(Φ[ρ])` |

use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::channels::{KrausChannel, MapSchedule};
use crate::numerics::ComplexMatrix;
use crate::states::{self, DensityMatrix};
use crate::{Error, Result};

/// Default number of points of a `t` sweep.
pub const DEFAULT_GRID_POINTS: usize = 101;

/// Default ensemble size for [`extremize_over_states`].
pub const DEFAULT_ENSEMBLE_SIZE: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CapacityKind {
    Rec,
    EntropyExchange,
    Qmi,
    CoherentInfo,
    Loss,
}

impl CapacityKind {
    pub const ALL: [CapacityKind; 5] =
        [CapacityKind::Rec, CapacityKind::EntropyExchange, CapacityKind::Qmi, CapacityKind::CoherentInfo, CapacityKind::Loss];

    pub fn name(self) -> &'static str {
        match self {
            CapacityKind::Rec => "rec",
            CapacityKind::EntropyExchange => "exchange",
            CapacityKind::Qmi => "qmi",
            CapacityKind::CoherentInfo => "coherent",
            CapacityKind::Loss => "loss",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExchangeMethod {
    /// Entropy of the evolved system-reference purification.
    Purification,
    /// Entropy of `W_ij = tr(E_i ρ E_j†)`.
    WMatrix,
}

fn check_dims(rho: &DensityMatrix, channel: &KrausChannel) -> Result<()> {
    if rho.dim() != channel.dim() {
        return Err(Error::DimensionMismatch("state and channel dimensions differ"));
    }
    Ok(())
}

/// Relative entropy of coherence `S(ρ_diag) - S(ρ)`.
pub fn rec(rho: &DensityMatrix) -> Result<f64> {
    Ok(states::von_neumann_entropy(&states::dephase_diagonal(rho))? - states::von_neumann_entropy(rho)?)
}

/// `W_ij = tr(E_i ρ E_j†) = √(p_i p_j) tr(U_i ρ U_j†)`.
pub fn w_matrix(rho: &DensityMatrix, channel: &KrausChannel) -> Result<ComplexMatrix> {
    check_dims(rho, channel)?;
    let el = channel.elements();
    let n = el.len();
    let d = rho.dim();
    let m = rho.matrix();
    let mut w = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            // tr(U_i ρ U_j†) sums ρ[a, b] over pairs with π_i(a) = π_j(b)
            let (pi, pj) = (el[i].unitary.perm(), el[j].unitary.perm());
            let mut tr = Complex64::new(0.0, 0.0);
            for a in 0..d {
                for b in 0..d {
                    if pi[a] == pj[b] {
                        tr += m[(a, b)];
                    }
                }
            }
            w[(i, j)] = tr * (el[i].probability * el[j].probability).sqrt();
        }
    }
    Ok(w)
}

/// The evolved system-reference state `(Φ ⊗ 𝟙_R)(|Ψ_AR⟩⟨Ψ_AR|)`.
pub fn evolved_purification(rho: &DensityMatrix, channel: &KrausChannel) -> Result<ComplexMatrix> {
    check_dims(rho, channel)?;
    let d = rho.dim();
    let psi = states::purify(rho)?;
    let mut out = ComplexMatrix::zeros(d * d, d * d);
    for e in channel.elements() {
        let mut moved = alloc::vec![Complex64::new(0.0, 0.0); d * d];
        for (a, &pa) in e.unitary.perm().iter().enumerate() {
            for r in 0..d {
                moved[pa * d + r] = psi.amplitudes()[a * d + r];
            }
        }
        out = &out + &ComplexMatrix::outer(&moved, &moved).scale_real(e.probability);
    }
    Ok(out)
}

/// Entropy exchange `S(ρ, Φ)`.
pub fn entropy_exchange(rho: &DensityMatrix, channel: &KrausChannel, method: ExchangeMethod) -> Result<f64> {
    match method {
        ExchangeMethod::Purification => states::operator_entropy(&evolved_purification(rho, channel)?),
        ExchangeMethod::WMatrix => states::operator_entropy(&w_matrix(rho, channel)?),
    }
}

/// The entropies every capacity is assembled from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyBudget {
    pub input: f64,
    pub output: f64,
    pub exchange: f64,
}

impl EntropyBudget {
    pub fn compute(rho: &DensityMatrix, channel: &KrausChannel) -> Result<Self> {
        check_dims(rho, channel)?;
        Ok(Self {
            input: states::von_neumann_entropy(rho)?,
            output: states::von_neumann_entropy(&channel.apply(rho)?)?,
            exchange: entropy_exchange(rho, channel, ExchangeMethod::WMatrix)?,
        })
    }

    pub fn qmi(&self) -> f64 {
        self.input + self.output - self.exchange
    }

    pub fn coherent_info(&self) -> f64 {
        self.output - self.exchange
    }

    pub fn loss(&self) -> f64 {
        self.input + self.exchange - self.output
    }
}

/// Quantum mutual information `S(ρ) + S(Φ[ρ]) - S(ρ, Φ)`.
pub fn qmi(rho: &DensityMatrix, channel: &KrausChannel) -> Result<f64> {
    EntropyBudget::compute(rho, channel).map(|b| b.qmi())
}

/// Coherent information `S(Φ[ρ]) - S(ρ, Φ)`.
pub fn coherent_info(rho: &DensityMatrix, channel: &KrausChannel) -> Result<f64> {
    EntropyBudget::compute(rho, channel).map(|b| b.coherent_info())
}

/// Loss `S(ρ) + S(ρ, Φ) - S(Φ[ρ])`, the information leaked to the environment.
pub fn loss(rho: &DensityMatrix, channel: &KrausChannel) -> Result<f64> {
    EntropyBudget::compute(rho, channel).map(|b| b.loss())
}

/// One capacity of `channel` on `rho`. REC is taken on the channel output.
pub fn evaluate(kind: CapacityKind, rho: &DensityMatrix, channel: &KrausChannel) -> Result<f64> {
    match kind {
        CapacityKind::Rec => {
            check_dims(rho, channel)?;
            rec(&channel.apply(rho)?)
        }
        CapacityKind::EntropyExchange => entropy_exchange(rho, channel, ExchangeMethod::WMatrix),
        CapacityKind::Qmi => qmi(rho, channel),
        CapacityKind::CoherentInfo => coherent_info(rho, channel),
        CapacityKind::Loss => loss(rho, channel),
    }
}

/// `points` uniformly spaced values covering `[0, 1]`; a single point is `t = 0`.
pub fn uniform_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => alloc::vec![0.0],
        n => (0..n).map(|k| k as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityCurve {
    pub kind: CapacityKind,
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub input_descriptor: String,
}

impl CapacityCurve {
    /// Index of the first smallest value.
    pub fn argmin(&self) -> Option<usize> {
        self.values.iter().enumerate().fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
            Some((_, b)) if b <= v => best,
            _ => Some((i, v)),
        })
        .map(|(i, _)| i)
    }

    pub fn argmin_t(&self) -> Option<f64> {
        self.argmin().map(|i| self.t_grid[i])
    }

    pub fn min_value(&self) -> Option<f64> {
        self.argmin().map(|i| self.values[i])
    }
}

/// Evaluates `kind` along `grid` for a fixed input.
pub fn sweep(
    schedule: &MapSchedule,
    input: &DensityMatrix,
    input_descriptor: &str,
    kind: CapacityKind,
    grid: &[f64],
) -> Result<CapacityCurve> {
    let values = grid
        .iter()
        .map(|&t| evaluate(kind, input, &schedule.channel_at(t)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(CapacityCurve { kind, t_grid: grid.to_vec(), values, input_descriptor: String::from(input_descriptor) })
}

/// Random input family used by [`extremize_over_states`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ensemble {
    /// Hilbert-Schmidt (Ginibre) mixed states.
    Ginibre,
    /// Equal-modulus pure states with uniform relative phases.
    MaximallyCoherent,
}

impl Ensemble {
    /// Maximally coherent states for REC, Ginibre states otherwise.
    pub fn default_for(kind: CapacityKind) -> Self {
        match kind {
            CapacityKind::Rec => Ensemble::MaximallyCoherent,
            _ => Ensemble::Ginibre,
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, dim: usize, rng: &mut R) -> Result<DensityMatrix> {
        match self {
            Ensemble::Ginibre => states::sample_random_mixed(dim, rng),
            Ensemble::MaximallyCoherent => Ok(states::sample_maximally_coherent(dim, rng)?.projector()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumMode {
    Max,
    Min,
    Envelope,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extremum {
    Max(f64),
    Min(f64),
    Envelope { min: f64, max: f64 },
}

/// Extremum of a capacity at fixed `t` over `n_samples` random inputs drawn
/// sequentially from `rng` (so a longer run extends a shorter one with the
/// same seed).
pub fn extremize_over_states<R: Rng + ?Sized>(
    schedule: &MapSchedule,
    t: f64,
    n_samples: usize,
    kind: CapacityKind,
    ensemble: Ensemble,
    rng: &mut R,
    mode: ExtremumMode,
) -> Result<Extremum> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1"));
    }
    let channel = schedule.channel_at(t)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for _ in 0..n_samples {
        let rho = ensemble.sample(schedule.cores(), rng)?;
        let v = evaluate(kind, &rho, &channel)?;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok(match mode {
        ExtremumMode::Max => Extremum::Max(hi),
        ExtremumMode::Min => Extremum::Min(lo),
        ExtremumMode::Envelope => Extremum::Envelope { min: lo, max: hi },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::PureState;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e2() -> DensityMatrix {
        let h = 0.5;
        PureState::new(alloc::vec![
            Complex64::new(h, 0.0),
            Complex64::new(0.0, h),
            Complex64::new(0.0, -h),
            Complex64::new(h, 0.0)
        ])
        .unwrap()
        .projector()
    }

    #[test]
    fn rec_examples() {
        assert_abs_diff_eq!(rec(&e2()).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rec(&DensityMatrix::diagonal(&[0.1, 0.2, 0.3, 0.4]).unwrap()).unwrap(), 0.0, epsilon = 1e-12);
        let ch = MapSchedule::uniform(4, 2).unwrap().channel_at(0.75).unwrap();
        assert_abs_diff_eq!(evaluate(CapacityKind::Rec, &e2(), &ch).unwrap(), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn identity_channel_quantities() {
        let id = KrausChannel::identity(4);
        let mixed = DensityMatrix::maximally_mixed(4);
        for m in [ExchangeMethod::Purification, ExchangeMethod::WMatrix] {
            assert_abs_diff_eq!(entropy_exchange(&e2(), &id, m).unwrap(), 0.0, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(qmi(&mixed, &id).unwrap(), 4.0, epsilon = 1e-9);
        assert_abs_diff_eq!(coherent_info(&mixed, &id).unwrap(), 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(loss(&mixed, &id).unwrap(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn derived_values_uniform_and_simplified() {
        let mixed = DensityMatrix::maximally_mixed(4);
        let uni = MapSchedule::uniform(4, 2).unwrap().channel_at(0.75).unwrap();
        for m in [ExchangeMethod::Purification, ExchangeMethod::WMatrix] {
            assert_abs_diff_eq!(entropy_exchange(&mixed, &uni, m).unwrap(), 1.5, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(qmi(&mixed, &uni).unwrap(), 2.5, epsilon = 1e-9);
        assert_abs_diff_eq!(coherent_info(&mixed, &uni).unwrap(), 0.5, epsilon = 1e-9);

        let simp = MapSchedule::simplified().unwrap();
        let half = simp.channel_at(0.5).unwrap();
        assert_abs_diff_eq!(entropy_exchange(&mixed, &half, ExchangeMethod::Purification).unwrap(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(loss(&mixed, &half).unwrap(), 1.0, epsilon = 1e-9);
        let full = simp.channel_at(1.0).unwrap();
        assert_abs_diff_eq!(coherent_info(&mixed, &full).unwrap(), 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(loss(&mixed, &full).unwrap(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let ch = KrausChannel::identity(4);
        let small = DensityMatrix::maximally_mixed(2);
        assert!(matches!(qmi(&small, &ch), Err(Error::DimensionMismatch(_))));
        assert!(matches!(entropy_exchange(&small, &ch, ExchangeMethod::Purification), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn grid_and_sweep_basics() {
        assert_eq!(uniform_grid(1), alloc::vec![0.0]);
        let g = uniform_grid(101);
        assert_eq!(g[75], 0.75);
        assert_eq!(g[50], 0.5);
        assert_eq!(*g.last().unwrap(), 1.0);

        let simp = MapSchedule::simplified().unwrap();
        let curve = sweep(&simp, &e2(), "e2", CapacityKind::Rec, &g).unwrap();
        assert_eq!(curve.argmin_t(), Some(0.5));
        assert_abs_diff_eq!(curve.values[100], curve.values[0], epsilon = 1e-9);
        assert_abs_diff_eq!(curve.values[0], 2.0, epsilon = 1e-9);

        let one = sweep(&simp, &DensityMatrix::maximally_mixed(4), "chaotic", CapacityKind::Qmi, &uniform_grid(1)).unwrap();
        assert_abs_diff_eq!(one.values[0], 4.0, epsilon = 1e-9);
    }

    #[test]
    fn single_sample_extremum_equals_direct_evaluation() {
        let uni = MapSchedule::uniform(4, 2).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(5);
        let mut b = ChaCha8Rng::seed_from_u64(5);
        let ex = extremize_over_states(&uni, 0.3, 1, CapacityKind::Qmi, Ensemble::Ginibre, &mut a, ExtremumMode::Max).unwrap();
        let rho = Ensemble::Ginibre.sample(4, &mut b).unwrap();
        let direct = qmi(&rho, &uni.channel_at(0.3).unwrap()).unwrap();
        assert_eq!(ex, Extremum::Max(direct));
    }

    #[test]
    fn kind_names_round_trip() {
        for k in CapacityKind::ALL {
            assert_eq!(CapacityKind::from_name(k.name()), Some(k));
        }
        assert_eq!(CapacityKind::from_name("nope"), None);
    }
}

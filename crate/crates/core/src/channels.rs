//! Permutation unitaries, the map family `t ↦ Λ_t`, superoperators, Choi
//! matrices and CP-divisibility of intermediate maps.
//!
//! A permutation `π` acts on the path basis as `U|j⟩ = |π(j)⟩`, so
//! `U[i, j] = 1` iff `i == π(j)`. Superoperators use column-stacking
//! vectorization: `vec(X)[c·d + r] = X[r, c]`, hence `vec(A X B) =
//! (Bᵀ ⊗ A) vec(X)`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::numerics::{self, ComplexMatrix};
use crate::states::{DensityMatrix, PureState};
use crate::{Error, Result};

/// Largest permutation group [`enumerate_permutations`] will materialize (8!).
pub const MAX_PERMUTATIONS: u64 = 40_320;

/// Default relative singular-value cutoff for the pseudo-inverse in
/// [`intermediate_map`].
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Minimum Choi eigenvalue still accepted as completely positive.
pub const CP_TOL: f64 = 1e-9;

const PROBABILITY_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PermutationUnitary {
    perm: Vec<usize>,
    matrix: ComplexMatrix,
}

impl PermutationUnitary {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty permutation"));
        }
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(Error::InvalidArgument("not a permutation"));
            }
            seen[p] = true;
        }
        let matrix = ComplexMatrix::from_fn(n, n, |i, j| {
            if i == perm[j] {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Ok(Self { perm, matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self::new((0..n).collect()).expect("identity is a permutation")
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.dim()];
        for (j, &p) in self.perm.iter().enumerate() {
            inv[p] = j;
        }
        Self::new(inv).expect("inverse of a permutation")
    }

    /// The product `self · other` (apply `other` first).
    pub fn compose(&self, other: &PermutationUnitary) -> Self {
        assert_eq!(self.dim(), other.dim(), "permutation size mismatch");
        Self::new(other.perm.iter().map(|&j| self.perm[j]).collect()).expect("composition of permutations")
    }

    /// Number of fixed points, i.e. `tr U`.
    pub fn fixed_points(&self) -> usize {
        self.perm.iter().enumerate().filter(|(i, &p)| *i == p).count()
    }

    /// `U X U†`, computed by index relabelling (exact).
    pub fn conjugate(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                out[(self.perm[a], self.perm[b])] = x[(a, b)];
            }
        }
        out
    }

    pub fn apply_vector(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for (j, &p) in self.perm.iter().enumerate() {
            out[p] = v[j];
        }
        out
    }

    pub fn apply_state(&self, psi: &PureState) -> Result<PureState> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch("state and permutation dimensions differ"));
        }
        Ok(PureState::from_unit_vector(self.apply_vector(psi.amplitudes())))
    }
}

fn factorial(k: usize) -> Option<u64> {
    (1..=k as u64).try_fold(1u64, |acc, x| acc.checked_mul(x))
}

fn check_subset(n: usize, s: usize) -> Result<()> {
    if n == 0 || s == 0 || s > n {
        return Err(Error::InvalidSubsetSize { n, s });
    }
    Ok(())
}

/// `(s!)^m (N - ms)!` with `m = ⌊N/s⌋`.
pub fn permutation_count(n: usize, s: usize) -> Result<u64> {
    check_subset(n, s)?;
    let m = n / s;
    let block = factorial(s).ok_or(Error::DimensionOverflow(n))?;
    let rest = factorial(n - m * s).ok_or(Error::DimensionOverflow(n))?;
    (0..m)
        .try_fold(rest, |acc, _| acc.checked_mul(block))
        .ok_or(Error::DimensionOverflow(n))
}

/// Uniform weight `1 / ((s!)^m (N - ms)!)` at the capacity minimum.
pub fn p_min(n: usize, s: usize) -> Result<f64> {
    Ok(1.0 / permutation_count(n, s)? as f64)
}

/// Advances `v` to its next lexicographic permutation.
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn block_permutations(start: usize, len: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (start..start + len).collect();
    let mut all = vec![cur.clone()];
    while next_permutation(&mut cur) {
        all.push(cur.clone());
    }
    all
}

/// All permutations acting independently inside the consecutive blocks
/// `{0..s-1}, {s..2s-1}, …` and freely on the remainder, in lexicographic
/// order of the permutation vector (identity first).
pub fn enumerate_permutations(n: usize, s: usize) -> Result<Vec<PermutationUnitary>> {
    let count = permutation_count(n, s)?;
    if count > MAX_PERMUTATIONS {
        return Err(Error::DimensionOverflow(n));
    }
    let m = n / s;
    let mut blocks: Vec<Vec<Vec<usize>>> = (0..m).map(|k| block_permutations(k * s, s)).collect();
    if n > m * s {
        blocks.push(block_permutations(m * s, n - m * s));
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut digits = vec![0usize; blocks.len()];
    loop {
        let perm: Vec<usize> = digits.iter().zip(&blocks).flat_map(|(&d, b)| b[d].iter().copied()).collect();
        out.push(PermutationUnitary::new(perm)?);
        // odometer with the first block most significant
        let mut k = blocks.len();
        loop {
            if k == 0 {
                debug_assert_eq!(out.len() as u64, count);
                return Ok(out);
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < blocks[k].len() {
                break;
            }
            digits[k] = 0;
        }
    }
}

/// How the non-identity probability mass `t` is distributed.
#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    /// `p_i = t / (n_perm - 1)` for every non-identity permutation.
    Uniform,
    /// `N = 4, s = 2` with only the double swap `U₃` active: `p₁ = p₂ = 0`, `p₃ = t`.
    Simplified,
    /// `p_i = t · w_i` over the non-identity permutations.
    Custom(Vec<f64>),
}

/// A one-parameter family of permutation channels with `p₀(t) = 1 - t`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSchedule {
    cores: usize,
    subset: usize,
    scenario: Scenario,
    permutations: Vec<PermutationUnitary>,
}

impl MapSchedule {
    pub fn uniform(cores: usize, subset: usize) -> Result<Self> {
        Ok(Self { cores, subset, scenario: Scenario::Uniform, permutations: enumerate_permutations(cores, subset)? })
    }

    pub fn simplified() -> Result<Self> {
        Ok(Self { cores: 4, subset: 2, scenario: Scenario::Simplified, permutations: enumerate_permutations(4, 2)? })
    }

    /// `weights` covers the non-identity permutations in enumeration order and
    /// must be nonnegative and sum to one.
    pub fn custom(cores: usize, subset: usize, weights: Vec<f64>) -> Result<Self> {
        let permutations = enumerate_permutations(cores, subset)?;
        if weights.len() + 1 != permutations.len() {
            return Err(Error::InvalidSchedule("one weight per non-identity permutation is required"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidSchedule("weights must be finite and nonnegative"));
        }
        if (weights.iter().sum::<f64>() - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(Error::InvalidSchedule("weights must sum to one"));
        }
        Ok(Self { cores, subset, scenario: Scenario::Custom(weights), permutations })
    }

    pub fn cores(&self) -> usize {
        self.cores
    }

    pub fn subset(&self) -> usize {
        self.subset
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn permutations(&self) -> &[PermutationUnitary] {
        &self.permutations
    }

    pub fn index_of(&self, perm: &[usize]) -> Option<usize> {
        self.permutations.iter().position(|u| u.perm() == perm)
    }

    /// Probability of each permutation at `t`. With a trivial group (`s = 1`)
    /// the identity keeps all the weight for every `t`.
    pub fn probabilities(&self, t: f64) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutOfRangeT(t));
        }
        let n = self.permutations.len();
        if n == 1 {
            return Ok(vec![1.0]);
        }
        let mut p = vec![0.0; n];
        p[0] = 1.0 - t;
        match &self.scenario {
            Scenario::Uniform => p[1..].iter_mut().for_each(|x| *x = t / (n - 1) as f64),
            Scenario::Simplified => p[3] = t,
            Scenario::Custom(w) => p[1..].iter_mut().zip(w).for_each(|(x, w)| *x = t * w),
        }
        Ok(p)
    }

    /// Reciprocal of the number of permutations the schedule can reach; for
    /// the uniform scenario this is `1 / ((s!)^m (N - ms)!)`.
    pub fn p_min(&self) -> f64 {
        let reachable = match &self.scenario {
            Scenario::Uniform => self.permutations.len(),
            Scenario::Simplified => 2,
            Scenario::Custom(w) => 1 + w.iter().filter(|&&x| x > 0.0).count(),
        };
        1.0 / reachable as f64
    }

    /// `t = 1 - p_min`, where all reachable permutations are equally likely.
    pub fn minimum_location(&self) -> f64 {
        1.0 - self.p_min()
    }

    /// `Λ_t`, keeping only permutations with nonzero probability.
    pub fn channel_at(&self, t: f64) -> Result<KrausChannel> {
        let probs = self.probabilities(t)?;
        let elements = probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(label, &probability)| KrausElement { probability, label, unitary: self.permutations[label].clone() })
            .collect();
        KrausChannel::new(self.cores, elements)
    }
}

/// Kraus operator `√p · U` for a permutation `U`, tagged with its index in the
/// originating schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausElement {
    pub probability: f64,
    pub label: usize,
    pub unitary: PermutationUnitary,
}

impl KrausElement {
    pub fn operator(&self) -> ComplexMatrix {
        self.unitary.matrix().scale_real(self.probability.sqrt())
    }
}

/// Random-permutation channel `ρ ↦ Σ p_i U_i ρ U_i†`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim: usize,
    elements: Vec<KrausElement>,
}

impl KrausChannel {
    pub fn new(dim: usize, elements: Vec<KrausElement>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidChannel("no Kraus elements"));
        }
        if elements.iter().any(|e| e.unitary.dim() != dim) {
            return Err(Error::InvalidChannel("Kraus element dimension differs from the channel"));
        }
        if elements.iter().any(|e| !(0.0..=1.0).contains(&e.probability)) {
            return Err(Error::InvalidChannel("probabilities must lie in [0, 1]"));
        }
        let total: f64 = elements.iter().map(|e| e.probability).sum();
        if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(Error::InvalidChannel("probabilities must sum to one"));
        }
        Ok(Self { dim, elements })
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, elements: vec![KrausElement { probability: 1.0, label: 0, unitary: PermutationUnitary::identity(dim) }] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[KrausElement] {
        &self.elements
    }

    pub fn kraus_operators(&self) -> Vec<ComplexMatrix> {
        self.elements.iter().map(KrausElement::operator).collect()
    }

    /// `Σ p_i U_i ρ U_i†`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(DensityMatrix::from_trusted(self.apply_operator(rho.matrix())?))
    }

    /// The channel applied to an arbitrary `dim × dim` operator.
    pub fn apply_operator(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if !x.is_square() || x.rows() != self.dim {
            return Err(Error::DimensionMismatch("operator and channel dimensions differ"));
        }
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for e in &self.elements {
            out = &out + &e.unitary.conjugate(x).scale_real(e.probability);
        }
        Ok(out)
    }

    /// `Σ p_i conj(U_i) ⊗ U_i`, acting on column-stacked operators.
    pub fn superoperator(&self) -> ComplexMatrix {
        let d2 = self.dim * self.dim;
        let mut out = ComplexMatrix::zeros(d2, d2);
        for e in &self.elements {
            let u = e.unitary.matrix();
            let term = numerics::kron(&u.conj(), u).expect("d² is within the dimension bound");
            out = &out + &term.scale_real(e.probability);
        }
        out
    }

    pub fn choi(&self) -> ComplexMatrix {
        choi_from_superoperator(&self.superoperator(), self.dim).expect("superoperator has d² rows")
    }

    /// Draws the label of one Kraus element with probability `p_i`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for e in &self.elements {
            acc += e.probability;
            if u < acc {
                return e.label;
            }
        }
        self.elements.iter().rev().find(|e| e.probability > 0.0).map_or(self.elements[0].label, |e| e.label)
    }
}

/// Draws a unitary label from `channel` with probability `p_i`.
pub fn sample_unitary<R: Rng + ?Sized>(channel: &KrausChannel, rng: &mut R) -> usize {
    channel.sample(rng)
}

/// Column-stacking `vec(X)`.
pub fn vectorize(x: &ComplexMatrix) -> Vec<Complex64> {
    (0..x.cols()).flat_map(|c| (0..x.rows()).map(move |r| x[(r, c)])).collect()
}

pub fn unvectorize(v: &[Complex64], d: usize) -> Result<ComplexMatrix> {
    if v.len() != d * d {
        return Err(Error::DimensionMismatch("vector length is not d²"));
    }
    Ok(ComplexMatrix::from_fn(d, d, |r, c| v[c * d + r]))
}

/// Choi matrix `Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)` of the map with column-stacking
/// superoperator `s`; for a channel its trace is `d`.
pub fn choi_from_superoperator(s: &ComplexMatrix, d: usize) -> Result<ComplexMatrix> {
    if !s.is_square() || s.rows() != d * d {
        return Err(Error::DimensionMismatch("superoperator must be d² x d²"));
    }
    Ok(ComplexMatrix::from_fn(d * d, d * d, |row, col| {
        let (i, a) = (row / d, row % d);
        let (j, b) = (col / d, col % d);
        s[(b * d + a, j * d + i)]
    }))
}

/// Minimum eigenvalue of a (nominally Hermitian) Choi matrix.
pub fn min_choi_eigenvalue(choi: &ComplexMatrix) -> Result<f64> {
    let tol = 1e-8 * choi.max_abs().max(1.0);
    let eig = numerics::hermitian_eigenvalues(choi, tol)?;
    Ok(eig.last().copied().unwrap_or(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivisibilityVerdict {
    Cp,
    NotCp,
    /// `Λ_s` is not invertible, so `Φ_{t,s}` is not determined.
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntermediateMap {
    pub superoperator: ComplexMatrix,
    pub verdict: DivisibilityVerdict,
    pub min_choi_eigenvalue: f64,
    /// Numerical rank of the superoperator of `Λ_s`.
    pub rank: usize,
}

/// `Φ_{t,s} = M_t · pinv(M_s)` and its complete-positivity verdict.
pub fn intermediate_map(schedule: &MapSchedule, s_time: f64, t_time: f64, rank_tol: f64) -> Result<IntermediateMap> {
    for x in [s_time, t_time] {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfRangeT(x));
        }
    }
    if s_time >= t_time {
        return Err(Error::InvalidArgument("intermediate map needs s_time < t_time"));
    }
    let d = schedule.cores();
    let m_t = schedule.channel_at(t_time)?.superoperator();
    let m_s = schedule.channel_at(s_time)?.superoperator();
    let (m_s_inv, rank) = numerics::pseudo_inverse(&m_s, rank_tol)?;
    let superoperator = &m_t * &m_s_inv;
    let choi = choi_from_superoperator(&superoperator, d)?;
    let min_choi_eigenvalue = min_choi_eigenvalue(&choi)?;
    let verdict = if rank < d * d {
        DivisibilityVerdict::Indeterminate
    } else if min_choi_eigenvalue >= -CP_TOL {
        DivisibilityVerdict::Cp
    } else {
        DivisibilityVerdict::NotCp
    };
    Ok(IntermediateMap { superoperator, verdict, min_choi_eigenvalue, rank })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn block_swap() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    fn block_diag(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_fn(4, 4, |i, j| match (i < 2, j < 2) {
            (true, true) => a[(i, j)],
            (false, false) => b[(i - 2, j - 2)],
            _ => Complex64::new(0.0, 0.0),
        })
    }

    #[test]
    fn n4_s2_matches_block_matrices() {
        let x = block_swap();
        let id = ComplexMatrix::identity(2);
        let expected = [
            ComplexMatrix::identity(4),
            block_diag(&id, &x),
            block_diag(&x, &id),
            block_diag(&x, &x),
        ];
        let perms = enumerate_permutations(4, 2).unwrap();
        assert_eq!(perms.len(), 4);
        for (u, e) in perms.iter().zip(&expected) {
            assert_eq!(u.matrix(), e);
        }
    }

    #[test]
    fn permutation_counts() {
        assert_eq!(enumerate_permutations(4, 3).unwrap().len(), 6);
        assert_eq!(enumerate_permutations(4, 4).unwrap().len(), 24);
        let trivial = enumerate_permutations(4, 1).unwrap();
        assert_eq!(trivial.len(), 1);
        assert!(trivial[0].is_identity());
        assert_eq!(permutation_count(5, 2).unwrap(), 4);
        assert_eq!(permutation_count(7, 3).unwrap(), 36);
        assert_eq!(enumerate_permutations(7, 3).unwrap().len(), 36);
        assert!(matches!(enumerate_permutations(4, 5), Err(Error::InvalidSubsetSize { .. })));
        assert!(matches!(enumerate_permutations(4, 0), Err(Error::InvalidSubsetSize { .. })));
        assert!(matches!(enumerate_permutations(12, 12), Err(Error::DimensionOverflow(_))));
    }

    #[test]
    fn enumeration_is_lexicographic_with_identity_first() {
        let perms = enumerate_permutations(5, 3).unwrap();
        assert!(perms[0].is_identity());
        assert!(perms.windows(2).all(|w| w[0].perm() < w[1].perm()));
    }

    #[test]
    fn p_min_values() {
        assert_eq!(p_min(4, 2).unwrap(), 0.25);
        assert_eq!(p_min(4, 4).unwrap(), 1.0 / 24.0);
        assert_eq!(MapSchedule::simplified().unwrap().p_min(), 0.5);
        assert_eq!(MapSchedule::uniform(4, 2).unwrap().p_min(), 0.25);
        assert!(p_min(3, 4).is_err());
    }

    #[test]
    fn klein_group_closure() {
        let perms = enumerate_permutations(4, 2).unwrap();
        for a in &perms {
            assert!(a.compose(a).is_identity());
            assert_eq!(&a.inverse(), a);
            for b in &perms {
                let ab = a.compose(b);
                assert!(perms.contains(&ab));
            }
        }
    }

    #[test]
    fn channel_at_examples() {
        let uni = MapSchedule::uniform(4, 2).unwrap();
        let ch = uni.channel_at(0.0).unwrap();
        assert_eq!(ch.elements().len(), 1);
        assert!(ch.elements()[0].unitary.is_identity());
        let ch = uni.channel_at(0.75).unwrap();
        assert!(ch.elements().iter().all(|e| e.probability == 0.25));
        let simp = MapSchedule::simplified().unwrap();
        let ch = simp.channel_at(1.0).unwrap();
        assert_eq!(ch.elements().len(), 1);
        assert_eq!(ch.elements()[0].label, 3);
        assert!(matches!(uni.channel_at(1.5), Err(Error::OutOfRangeT(_))));
        assert!(matches!(uni.channel_at(-0.1), Err(Error::OutOfRangeT(_))));
    }

    #[test]
    fn custom_schedule_validation() {
        assert!(MapSchedule::custom(4, 2, vec![0.5, 0.5]).is_err());
        assert!(MapSchedule::custom(4, 2, vec![0.5, 0.5, 0.1]).is_err());
        let s = MapSchedule::custom(4, 2, vec![0.0, 0.5, 0.5]).unwrap();
        assert_eq!(s.probabilities(0.4).unwrap(), vec![0.6, 0.0, 0.2, 0.2]);
        assert!((s.p_min() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn markovian_schedule_is_identity_for_all_t() {
        let s = MapSchedule::uniform(4, 1).unwrap();
        let ch = s.channel_at(0.7).unwrap();
        assert_eq!(ch, KrausChannel::identity(4));
    }

    #[test]
    fn apply_examples() {
        let mixed = DensityMatrix::maximally_mixed(4);
        let ch = MapSchedule::uniform(4, 2).unwrap().channel_at(0.75).unwrap();
        assert!(ch.apply(&mixed).unwrap().matrix().max_abs_diff(mixed.matrix()) < 1e-15);

        let h = 0.5;
        let e1 = PureState::new(vec![
            Complex64::new(h, 0.0),
            Complex64::new(0.0, h),
            Complex64::new(0.0, h),
            Complex64::new(-h, 0.0),
        ])
        .unwrap();
        let e4 = PureState::new(vec![
            Complex64::new(h, 0.0),
            Complex64::new(0.0, -h),
            Complex64::new(0.0, h),
            Complex64::new(h, 0.0),
        ])
        .unwrap();
        let ch = MapSchedule::simplified().unwrap().channel_at(1.0).unwrap();
        let out = ch.apply(&e1.projector()).unwrap();
        assert!(out.matrix().max_abs_diff(e4.projector().matrix()) < 1e-15);
        // U₃|e₁⟩ = i|e₄⟩
        let moved = ch.elements()[0].unitary.apply_state(&e1).unwrap();
        assert_abs_diff_eq!(e4.overlap(&moved).im, 1.0, epsilon = 1e-15);

        assert!(KrausChannel::identity(4).apply(&DensityMatrix::maximally_mixed(2)).is_err());
    }

    #[test]
    fn superoperator_convention() {
        let id = KrausChannel::identity(3).superoperator();
        assert_eq!(id, ComplexMatrix::identity(9));
        let ch = MapSchedule::uniform(4, 3).unwrap().channel_at(0.4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho = crate::states::sample_random_mixed(4, &mut rng).unwrap();
        let via_super = ch.superoperator().mul_vec(&vectorize(rho.matrix()));
        let direct = ch.apply(&rho).unwrap();
        let back = unvectorize(&via_super, 4).unwrap();
        assert!(back.max_abs_diff(direct.matrix()) < 1e-14);
    }

    #[test]
    fn choi_examples() {
        let c = KrausChannel::identity(2).choi();
        let expected = ComplexMatrix::from_real(
            4,
            4,
            &[1., 0., 0., 1., 0., 0., 0., 0., 0., 0., 0., 0., 1., 0., 0., 1.],
        )
        .unwrap();
        assert_eq!(c, expected);
        assert_abs_diff_eq!(c.trace().re, 2.0);

        let ch = MapSchedule::simplified().unwrap().channel_at(0.5).unwrap();
        let eig = numerics::hermitian_eigenvalues(&ch.choi(), 1e-12).unwrap();
        assert_abs_diff_eq!(eig[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig[1], 2.0, epsilon = 1e-12);
        assert!(eig[2..].iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn intermediate_map_examples() {
        let simp = MapSchedule::simplified().unwrap();
        let m = intermediate_map(&simp, 0.0, 0.7, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(m.verdict, DivisibilityVerdict::Cp);
        assert!(m.superoperator.max_abs_diff(&simp.channel_at(0.7).unwrap().superoperator()) < 1e-14);

        let m = intermediate_map(&simp, 0.6, 0.9, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(m.verdict, DivisibilityVerdict::NotCp);
        // multiplier (1-2t)/(1-2s) = 4 on the odd sector: Choi eigenvalues 2(1±4)
        assert_abs_diff_eq!(m.min_choi_eigenvalue, -6.0, epsilon = 1e-9);

        for t in [0.6, 0.8, 1.0] {
            let m = intermediate_map(&simp, 0.5, t, DEFAULT_RANK_TOL).unwrap();
            assert_eq!(m.verdict, DivisibilityVerdict::Indeterminate);
            assert!(m.rank < 16);
        }
        assert!(intermediate_map(&simp, 0.7, 0.3, DEFAULT_RANK_TOL).is_err());
        assert!(matches!(intermediate_map(&simp, 0.1, 1.3, DEFAULT_RANK_TOL), Err(Error::OutOfRangeT(_))));
    }

    #[test]
    fn sampling_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let simp = MapSchedule::simplified().unwrap();
        let ch0 = simp.channel_at(0.0).unwrap();
        let ch1 = simp.channel_at(1.0).unwrap();
        for _ in 0..1000 {
            assert_eq!(sample_unitary(&ch0, &mut rng), 0);
            assert_eq!(sample_unitary(&ch1, &mut rng), 3);
        }
    }
}

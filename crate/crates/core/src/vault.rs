//! The quantum vault: CMYK images stored on qudits that evolve under `Λ_t`.
//!
//! Colors C, M, Y, K map onto the encoding basis states `e₁..e₄` in that
//! order. A pixel's mixture vector is the diagonal of its density matrix in
//! that basis. In sampled mode every pixel receives one permutation and the
//! choice is kept in a [`ClassicalRegister`]; whoever holds the register can
//! undo the noise and steer every pixel to a chosen target permutation.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::channels::{MapSchedule, PermutationUnitary};
use crate::numerics::ComplexMatrix;
use crate::states::{DensityMatrix, PureState};
use crate::tomography::encoding_basis;
use crate::{Error, Result};

/// Absolute slack within which two mixture weights count as tied.
pub const TIE_TOL: f64 = 1e-9;

/// Permutation vector of the swap acting on both core pairs at once.
pub const DOUBLE_SWAP: [usize; 4] = [1, 0, 3, 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    Cyan,
    Magenta,
    Yellow,
    Black,
}

impl Color {
    pub const ALL: [Color; 4] = [Color::Cyan, Color::Magenta, Color::Yellow, Color::Black];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Result<Self> {
        Self::ALL.get(index).copied().ok_or(Error::InvalidColorIndex(index))
    }

    pub fn letter(self) -> char {
        ['C', 'M', 'Y', 'K'][self.index()]
    }

    pub fn from_letter(c: char) -> Option<Self> {
        Self::ALL.into_iter().find(|col| col.letter() == c.to_ascii_uppercase())
    }

    pub fn rgb(self) -> [u8; 3] {
        match self {
            Color::Cyan => [0, 255, 255],
            Color::Magenta => [255, 0, 255],
            Color::Yellow => [255, 255, 0],
            Color::Black => [0, 0, 0],
        }
    }

    /// The color whose RGB triple is closest (Euclidean) to `rgb`; exact
    /// matches always win.
    pub fn nearest(rgb: [u8; 3]) -> Self {
        let dist = |c: Color| -> i32 {
            c.rgb().iter().zip(rgb).map(|(&a, b)| (a as i32 - b as i32).pow(2)).sum()
        };
        Self::ALL.into_iter().min_by_key(|&c| dist(c)).expect("four colors")
    }
}

/// Weighted blend of the four color triples, each channel rounded half-up.
pub fn mixture_to_rgb(weights: &[f64; 4]) -> [u8; 3] {
    let mut acc = [0.0f64; 3];
    for (w, c) in weights.iter().zip(Color::ALL) {
        for (a, v) in acc.iter_mut().zip(c.rgb()) {
            *a += w * v as f64;
        }
    }
    acc.map(|x| (x + 0.5).floor().clamp(0.0, 255.0) as u8)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pixel {
    Color(Color),
    /// Nonnegative CMYK weights summing to one.
    Mixture([f64; 4]),
}

impl Pixel {
    pub fn weights(&self) -> [f64; 4] {
        match *self {
            Pixel::Color(c) => {
                let mut w = [0.0; 4];
                w[c.index()] = 1.0;
                w
            }
            Pixel::Mixture(w) => w,
        }
    }

    pub fn rgb(&self) -> [u8; 3] {
        match self {
            Pixel::Color(c) => c.rgb(),
            Pixel::Mixture(w) => mixture_to_rgb(w),
        }
    }
}

/// Row-major grid of pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct VaultImage {
    width: usize,
    height: usize,
    pixels: Vec<Pixel>,
}

impl VaultImage {
    pub fn new(width: usize, height: usize, pixels: Vec<Pixel>) -> Result<Self> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(Error::DimensionMismatch("pixel count differs from width x height"));
        }
        for p in &pixels {
            if let Pixel::Mixture(w) = p {
                if w.iter().any(|x| !x.is_finite() || *x < 0.0) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidArgument("mixture weights must be nonnegative and sum to one"));
                }
            }
        }
        Ok(Self { width, height, pixels })
    }

    pub fn from_colors(width: usize, height: usize, colors: Vec<Color>) -> Result<Self> {
        Self::new(width, height, colors.into_iter().map(Pixel::Color).collect())
    }

    /// Diagonal stripes cycling C, M, Y, K; balanced whenever `width` or
    /// `height` is a multiple of four.
    pub fn balanced(width: usize, height: usize) -> Result<Self> {
        let colors = (0..height).flat_map(|y| (0..width).map(move |x| Color::ALL[(x + y) % 4])).collect();
        Self::from_colors(width, height, colors)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[Pixel] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> Pixel {
        self.pixels[y * self.width + x]
    }

    /// Color indices, if every pixel is a pure color.
    pub fn colors(&self) -> Option<Vec<Color>> {
        self.pixels
            .iter()
            .map(|p| match p {
                Pixel::Color(c) => Some(*c),
                Pixel::Mixture(_) => None,
            })
            .collect()
    }

    pub fn rgb(&self) -> Vec<[u8; 3]> {
        self.pixels.iter().map(Pixel::rgb).collect()
    }
}

/// Per-pixel label of the permutation applied in sampled mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalRegister {
    pub labels: Vec<usize>,
}

/// C, M, Y, K ↦ `e₁, e₂, e₃, e₄`.
pub fn encode_image(img: &VaultImage) -> Result<Vec<PureState>> {
    let basis = encoding_basis();
    img.pixels()
        .iter()
        .map(|p| match p {
            Pixel::Color(c) => Ok(basis[c.index()].clone()),
            Pixel::Mixture(_) => Err(Error::InvalidArgument("mixture pixels have no pure encoding")),
        })
        .collect()
}

/// `Σ_k w_k |e_k⟩⟨e_k|` for every pixel; pure colors give projectors.
pub fn encode_mixtures(img: &VaultImage) -> Vec<DensityMatrix> {
    let basis = encoding_basis();
    img.pixels()
        .iter()
        .map(|p| {
            let w = p.weights();
            let mut m = ComplexMatrix::zeros(4, 4);
            for (k, e) in basis.iter().enumerate() {
                if w[k] > 0.0 {
                    m = &m + &ComplexMatrix::outer(e.amplitudes(), e.amplitudes()).scale_real(w[k]);
                }
            }
            DensityMatrix::from_trusted(m)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvolutionMode {
    /// Every pixel receives the averaged channel `Λ_t`.
    ExactAverage,
    /// Every pixel receives one permutation drawn from `Λ_t`.
    Sampled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub states: Vec<DensityMatrix>,
    pub register: Option<ClassicalRegister>,
}

impl Evolution {
    /// Drops the register, leaving only what an outside observer holds.
    pub fn forget_register(mut self) -> Self {
        self.register = None;
        self
    }
}

/// Evolves each pixel independently. Sampled mode draws pixel `k` from its own
/// stream derived from one master seed taken from `rng`.
pub fn evolve_image<R: Rng + ?Sized>(
    states: &[DensityMatrix],
    schedule: &MapSchedule,
    t: f64,
    mode: EvolutionMode,
    rng: &mut R,
) -> Result<Evolution> {
    let channel = schedule.channel_at(t)?;
    match mode {
        EvolutionMode::ExactAverage => {
            let states = states.iter().map(|rho| channel.apply(rho)).collect::<Result<Vec<_>>>()?;
            Ok(Evolution { states, register: None })
        }
        EvolutionMode::Sampled => {
            let master: u64 = rng.random();
            let mut out = Vec::with_capacity(states.len());
            let mut labels = Vec::with_capacity(states.len());
            for (k, rho) in states.iter().enumerate() {
                if rho.dim() != schedule.cores() {
                    return Err(Error::DimensionMismatch("pixel state and schedule dimensions differ"));
                }
                let mut stream = crate::stream_rng(master, k as u64);
                let label = channel.sample(&mut stream);
                let u = &schedule.permutations()[label];
                out.push(DensityMatrix::from_trusted(u.conjugate(rho.matrix())));
                labels.push(label);
            }
            Ok(Evolution { states: out, register: Some(ClassicalRegister { labels }) })
        }
    }
}

/// Permutation the compensated evolution should amount to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompensationTarget {
    Identity,
    /// The double swap `U₃` of the `N = 4, s = 2` group.
    DoubleSwap,
}

impl CompensationTarget {
    pub fn unitary(self, dim: usize) -> Result<PermutationUnitary> {
        match self {
            CompensationTarget::Identity => Ok(PermutationUnitary::identity(dim)),
            CompensationTarget::DoubleSwap if dim == 4 => PermutationUnitary::new(DOUBLE_SWAP.to_vec()),
            CompensationTarget::DoubleSwap => Err(Error::InvalidArgument("the double swap needs four cores")),
        }
    }
}

/// Applies `U_c = U_target · U_i⁻¹` to each pixel using the register, so the
/// net evolution of every pixel is `U_target`.
pub fn compensate(
    states: &[DensityMatrix],
    register: Option<&ClassicalRegister>,
    schedule: &MapSchedule,
    target: CompensationTarget,
) -> Result<Vec<DensityMatrix>> {
    let register = register.ok_or(Error::MissingRegister)?;
    if register.labels.len() != states.len() {
        return Err(Error::DimensionMismatch("register length differs from pixel count"));
    }
    let target = target.unitary(schedule.cores())?;
    let perms = schedule.permutations();
    states
        .iter()
        .zip(&register.labels)
        .map(|(rho, &label)| {
            let applied = perms.get(label).ok_or(Error::InvalidArgument("register label outside the schedule"))?;
            let correction = target.compose(&applied.inverse());
            Ok(DensityMatrix::from_trusted(correction.conjugate(rho.matrix())))
        })
        .collect()
}

/// Map from stored color to the color expected after decoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColorRelabel(pub [Color; 4]);

impl ColorRelabel {
    pub fn identity() -> Self {
        Self(Color::ALL)
    }

    /// The relabelling `U` induces on the encoding basis, if `U` maps every
    /// basis state onto another one up to phase.
    pub fn induced_by(u: &PermutationUnitary) -> Option<Self> {
        let basis = encoding_basis();
        let mut map = Color::ALL;
        for (k, e) in basis.iter().enumerate() {
            let moved = u.apply_state(e).ok()?;
            let j = basis.iter().position(|f| (f.overlap(&moved).norm() - 1.0).abs() < 1e-12)?;
            map[k] = Color::ALL[j];
        }
        Some(Self(map))
    }

    pub fn apply(&self, c: Color) -> Color {
        self.0[c.index()]
    }
}

/// Diagonal of `ρ` in the encoding basis, clamped at zero.
pub fn mixture_weights(rho: &DensityMatrix) -> Result<[f64; 4]> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch("vault pixels are four-dimensional"));
    }
    let basis = encoding_basis();
    let mut w = [0.0; 4];
    for (k, e) in basis.iter().enumerate() {
        w[k] = e.expectation(rho)?.max(0.0);
    }
    Ok(w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeReport {
    pub decoded: VaultImage,
    /// What a measurement in the encoding basis sees, pixel by pixel.
    pub mixtures: VaultImage,
    pub accuracy: f64,
    pub tie_count: usize,
    /// Mean weight of the expected color, i.e. `⟨e_expected|ρ|e_expected⟩`.
    pub mean_fidelity: f64,
}

/// Decodes each pixel to its most likely color (ties go to the lowest index
/// and are counted) and scores it against `reference`, optionally relabelled.
pub fn decode_image(states: &[DensityMatrix], reference: &VaultImage, relabel: Option<&ColorRelabel>) -> Result<DecodeReport> {
    let stored = reference.colors().ok_or(Error::InvalidArgument("reference image must hold color indices"))?;
    if stored.len() != states.len() {
        return Err(Error::DimensionMismatch("state count differs from the reference image"));
    }
    let relabel = relabel.copied().unwrap_or_else(ColorRelabel::identity);
    let mut decoded = Vec::with_capacity(states.len());
    let mut mixtures = Vec::with_capacity(states.len());
    let (mut hits, mut ties, mut fid) = (0usize, 0usize, 0.0);
    for (rho, &color) in states.iter().zip(&stored) {
        let mut w = mixture_weights(rho)?;
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let best = w.iter().position(|&x| x >= max - TIE_TOL).expect("nonempty");
        if w.iter().filter(|&&x| x >= max - TIE_TOL).count() > 1 {
            ties += 1;
        }
        let guess = Color::ALL[best];
        let expected = relabel.apply(color);
        if guess == expected {
            hits += 1;
        }
        fid += w[expected.index()];
        decoded.push(Pixel::Color(guess));
        mixtures.push(Pixel::Mixture(w));
    }
    let n = states.len() as f64;
    Ok(DecodeReport {
        decoded: VaultImage::new(reference.width(), reference.height(), decoded)?,
        mixtures: VaultImage::new(reference.width(), reference.height(), mixtures)?,
        accuracy: hits as f64 / n,
        tie_count: ties,
        mean_fidelity: fid / n,
    })
}

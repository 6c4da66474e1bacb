//! The four pipelines behind the command-line tool. Each writes its artifacts
//! and a `manifest.json` into a run directory and returns a summary.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use qvault_core::capacities::{self, CapacityKind, Ensemble, Extremum, ExtremumMode};
use qvault_core::channels::{self, DivisibilityVerdict, MapSchedule};
use qvault_core::states::{self, DensityMatrix};
use qvault_core::tomography::{self, MleOptions, NoiseMode};
use qvault_core::vault::{self, ColorRelabel, CompensationTarget, EvolutionMode, VaultImage};

use crate::format::{self, fmt_num, FormatError};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: FormatError },
    #[error("numerical failure: {0}")]
    Numerical(#[from] qvault_core::Error),
    /// The run finished and wrote its artifacts, but the result is flagged.
    #[error("{0}")]
    Flagged(String),
}

impl RunError {
    /// 2 for usage and file problems, 1 for numerical ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) | RunError::File { .. } => 2,
            RunError::Numerical(_) | RunError::Flagged(_) => 1,
        }
    }
}

type Result<T> = std::result::Result<T, RunError>;

fn usage(msg: impl Into<String>) -> RunError {
    RunError::Usage(msg.into())
}

/// Metadata embedded in every artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunMeta {
    pub seed: u64,
    pub scenario: String,
    pub grid: String,
    pub version: String,
}

impl RunMeta {
    pub fn new(seed: u64, scenario: &str, grid: &str) -> Self {
        Self { seed, scenario: scenario.into(), grid: grid.into(), version: env!("CARGO_PKG_VERSION").into() }
    }

    pub fn pairs(&self) -> [(&'static str, String); 4] {
        [
            ("seed", self.seed.to_string()),
            ("scenario", self.scenario.clone()),
            ("grid", self.grid.clone()),
            ("version", self.version.clone()),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioChoice {
    /// All permutations of the `(4, subset)` group share the weight `t`.
    Uniform { subset: usize },
    Simplified,
    Custom { subset: usize, weights: Vec<f64> },
}

impl ScenarioChoice {
    /// `uniform` is `(4, 2)`; `s1`..`s4` pick the subset size (`markovian` is
    /// `s1`); `custom` needs weights for the non-identity permutations.
    pub fn parse(name: &str, subset: Option<usize>, weights: Option<Vec<f64>>) -> Result<Self> {
        let choice = match name {
            "uniform" => ScenarioChoice::Uniform { subset: subset.unwrap_or(2) },
            "simplified" => ScenarioChoice::Simplified,
            "markovian" | "s1" => ScenarioChoice::Uniform { subset: 1 },
            "s2" => ScenarioChoice::Uniform { subset: 2 },
            "s3" => ScenarioChoice::Uniform { subset: 3 },
            "s4" => ScenarioChoice::Uniform { subset: 4 },
            "custom" => ScenarioChoice::Custom {
                subset: subset.unwrap_or(2),
                weights: weights.ok_or_else(|| usage("the custom scenario needs --weights"))?,
            },
            other => return Err(usage(format!("unknown scenario {other:?}"))),
        };
        choice.schedule()?;
        Ok(choice)
    }

    pub fn schedule(&self) -> Result<MapSchedule> {
        let sched = match self {
            ScenarioChoice::Uniform { subset } => MapSchedule::uniform(4, *subset),
            ScenarioChoice::Simplified => MapSchedule::simplified(),
            ScenarioChoice::Custom { subset, weights } => MapSchedule::custom(4, *subset, weights.clone()),
        };
        sched.map_err(|e| usage(format!("invalid scenario: {e}")))
    }

    pub fn label(&self) -> String {
        match self {
            ScenarioChoice::Uniform { subset: 2 } => "uniform".into(),
            ScenarioChoice::Uniform { subset } => format!("s{subset}"),
            ScenarioChoice::Simplified => "simplified".into(),
            ScenarioChoice::Custom { subset, weights } => {
                let w: Vec<String> = weights.iter().map(|&x| fmt_num(x)).collect();
                format!("custom(s={subset};{})", w.join(";"))
            }
        }
    }
}

/// An input state: `e1`..`e4`, `chaotic` (`𝟙/4`) or a `row,col,re,im` CSV.
#[derive(Debug, Clone, PartialEq)]
pub enum InputChoice {
    Encoding(usize),
    Chaotic,
    File(PathBuf),
}

impl InputChoice {
    pub fn parse(s: &str) -> Self {
        match s {
            "e1" | "e2" | "e3" | "e4" => InputChoice::Encoding(s[1..].parse::<usize>().expect("digit") - 1),
            "chaotic" => InputChoice::Chaotic,
            path => InputChoice::File(PathBuf::from(path)),
        }
    }

    pub fn label(&self) -> String {
        match self {
            InputChoice::Encoding(k) => format!("e{}", k + 1),
            InputChoice::Chaotic => "chaotic".into(),
            InputChoice::File(p) => p.display().to_string(),
        }
    }

    pub fn load(&self) -> Result<DensityMatrix> {
        match self {
            InputChoice::Encoding(k) => Ok(tomography::encoding_basis()[*k].projector()),
            InputChoice::Chaotic => Ok(DensityMatrix::maximally_mixed(4)),
            InputChoice::File(path) => {
                let m = open(path).and_then(|r| format::read_matrix(r).map_err(|source| file_error(path, source)))?;
                let rho = DensityMatrix::new(m).map_err(|e| usage(format!("{}: not a density matrix: {e}", path.display())))?;
                if rho.dim() != 4 {
                    return Err(usage(format!("{}: input states must be 4 x 4", path.display())));
                }
                Ok(rho)
            }
        }
    }
}

fn file_error(path: &Path, source: FormatError) -> RunError {
    RunError::File { path: path.to_path_buf(), source }
}

fn open(path: &Path) -> Result<BufReader<fs::File>> {
    fs::File::open(path).map(BufReader::new).map_err(|e| file_error(path, e.into()))
}

fn check_t(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(usage(format!("t = {t} is outside [0, 1]")))
    }
}

/// Collects artifacts in a run directory and records them in the manifest.
struct RunDir {
    path: PathBuf,
    meta: RunMeta,
    files: Vec<String>,
}

impl RunDir {
    fn create(path: &Path, meta: RunMeta) -> Result<Self> {
        fs::create_dir_all(path).map_err(|e| file_error(path, e.into()))?;
        Ok(Self { path: path.to_path_buf(), meta, files: Vec::new() })
    }

    fn write(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>, &RunMeta) -> std::result::Result<(), FormatError>) -> Result<()> {
        let mut buf = Vec::new();
        let target = self.path.join(name);
        f(&mut buf, &self.meta).map_err(|e| file_error(&target, e))?;
        fs::write(&target, buf).map_err(|e| file_error(&target, e.into()))?;
        self.files.push(name.into());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write(name, |buf, _| {
            serde_json::to_writer_pretty(&mut *buf, value).map_err(|e| FormatError::Malformed(e.to_string()))?;
            buf.push(b'\n');
            Ok(())
        })
    }

    fn finish(mut self, command: &str) -> Result<()> {
        #[derive(Serialize)]
        struct Manifest<'a> {
            command: &'a str,
            meta: &'a RunMeta,
            files: &'a [String],
        }
        let files = std::mem::take(&mut self.files);
        let meta = self.meta.clone();
        self.write_json("manifest.json", &Manifest { command, meta: &meta, files: &files })
    }
}

fn linspace_label(points: usize) -> String {
    format!("linspace(0,1,{points})")
}

// ---------------------------------------------------------------- capacities

#[derive(Debug, Clone)]
pub struct CapacitiesConfig {
    pub seed: u64,
    pub scenario: ScenarioChoice,
    pub kinds: Vec<CapacityKind>,
    pub input: InputChoice,
    pub grid_points: usize,
    /// Random inputs per grid point for the envelope files; 0 disables them.
    pub envelope_samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveSummary {
    pub kind: &'static str,
    pub file: String,
    pub argmin_t: f64,
    pub min_value_bits: f64,
    pub value_at_start_bits: f64,
    pub value_at_end_bits: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CapacitiesSummary {
    pub meta: RunMeta,
    pub input: String,
    pub curves: Vec<CurveSummary>,
}

pub fn run_capacities(cfg: &CapacitiesConfig, out: &Path) -> Result<CapacitiesSummary> {
    if cfg.grid_points == 0 {
        return Err(usage("the grid needs at least one point"));
    }
    if cfg.kinds.is_empty() {
        return Err(usage("no capacity kind requested"));
    }
    let sched = cfg.scenario.schedule()?;
    let input = cfg.input.load()?;
    let grid = capacities::uniform_grid(cfg.grid_points);
    let meta = RunMeta::new(cfg.seed, &cfg.scenario.label(), &linspace_label(cfg.grid_points));
    let mut dir = RunDir::create(out, meta.clone())?;
    let mut curves = Vec::new();
    for &kind in &cfg.kinds {
        let curve = capacities::sweep(&sched, &input, &cfg.input.label(), kind, &grid)?;
        let file = format!("capacities_{}.csv", kind.name());
        let rows: Vec<Vec<f64>> = grid.iter().zip(&curve.values).map(|(&t, &v)| vec![t, v]).collect();
        dir.write(&file, |w, m| format::write_table(w, m, &["t", "value_bits"], &rows))?;
        let i = curve.argmin().expect("nonempty grid");
        curves.push(CurveSummary {
            kind: kind.name(),
            file,
            argmin_t: grid[i],
            min_value_bits: curve.values[i],
            value_at_start_bits: curve.values[0],
            value_at_end_bits: *curve.values.last().expect("nonempty grid"),
        });

        if cfg.envelope_samples > 0 {
            let ensemble = Ensemble::default_for(kind);
            let mut rows = Vec::with_capacity(grid.len());
            for (i, &t) in grid.iter().enumerate() {
                let mut rng = qvault_core::stream_rng(cfg.seed, i as u64);
                let env = capacities::extremize_over_states(&sched, t, cfg.envelope_samples, kind, ensemble, &mut rng, ExtremumMode::Envelope)?;
                if let Extremum::Envelope { min, max } = env {
                    rows.push(vec![t, min, max]);
                }
            }
            let file = format!("envelope_{}.csv", kind.name());
            dir.write(&file, |w, m| format::write_table(w, m, &["t", "min_bits", "max_bits"], &rows))?;
        }
    }
    let summary = CapacitiesSummary { meta, input: cfg.input.label(), curves };
    dir.write_json("capacities_summary.json", &summary)?;
    dir.finish("capacities")?;
    Ok(summary)
}

// --------------------------------------------------------------------- vault

#[derive(Debug, Clone, PartialEq)]
pub enum ImageSource {
    /// Diagonal CMYK stripes.
    Balanced { width: usize, height: usize },
    /// `.ppm` (P3) or `.csv` (`x,y,c,m,y,k`) holding pure colors.
    File(PathBuf),
}

impl ImageSource {
    pub fn load(&self) -> Result<VaultImage> {
        match self {
            ImageSource::Balanced { width, height } => {
                VaultImage::balanced(*width, *height).map_err(|e| usage(format!("invalid image size: {e}")))
            }
            ImageSource::File(path) => {
                let reader = open(path)?;
                let img = match path.extension().and_then(|e| e.to_str()) {
                    Some("csv") => format::read_cmyk_csv(reader),
                    _ => format::read_ppm(reader),
                }
                .map_err(|e| file_error(path, e))?;
                if img.colors().is_none() {
                    return Err(usage(format!("{}: the stored image must hold pure colors", path.display())));
                }
                Ok(img)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Compensation {
    None,
    Identity,
    DoubleSwap,
}

#[derive(Debug, Clone)]
pub struct VaultConfig {
    pub seed: u64,
    pub scenario: ScenarioChoice,
    pub image: ImageSource,
    pub mode: EvolutionMode,
    pub forget_register: bool,
    pub compensation: Compensation,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageReport {
    pub stage: &'static str,
    pub t: f64,
    pub scenario: String,
    pub accuracy: f64,
    pub tie_count: usize,
    pub mean_fidelity: f64,
    /// Expected colors for C, M, Y, K, when decoding is scored after a relabel.
    pub relabel: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VaultSummary {
    pub meta: RunMeta,
    pub width: usize,
    pub height: usize,
    pub mode: &'static str,
    pub register: bool,
    pub compensation: Compensation,
    pub stages: Vec<StageReport>,
}

/// Relabel implied by a `t` at which the channel is a single permutation.
fn deterministic_relabel(sched: &MapSchedule, t: f64) -> Result<Option<ColorRelabel>> {
    let ch = sched.channel_at(t)?;
    Ok(match ch.elements() {
        [only] if !only.unitary.is_identity() => ColorRelabel::induced_by(&only.unitary),
        _ => None,
    })
}

pub fn run_vault(cfg: &VaultConfig, out: &Path) -> Result<VaultSummary> {
    let keeps_register = cfg.mode == EvolutionMode::Sampled && !cfg.forget_register;
    if cfg.compensation != Compensation::None && !keeps_register {
        return Err(usage("compensation needs the classical register (sampled mode without --forget-register)"));
    }
    let sched = cfg.scenario.schedule()?;
    let img = cfg.image.load()?;
    let encoded: Vec<DensityMatrix> = vault::encode_image(&img)?.iter().map(|s| s.projector()).collect();
    let stages = [("input", 0.0), ("minimum", sched.minimum_location()), ("output", 1.0)];
    let grid: Vec<String> = stages.iter().map(|s| fmt_num(s.1)).collect();
    let meta = RunMeta::new(cfg.seed, &cfg.scenario.label(), &format!("stages({})", grid.join(",")));
    let mut dir = RunDir::create(out, meta.clone())?;

    let mut reports = Vec::new();
    for (index, &(stage, t)) in stages.iter().enumerate() {
        let mut rng = qvault_core::stream_rng(cfg.seed, index as u64);
        // without the register, the only description of a pixel is the channel average
        let mode = if cfg.forget_register { EvolutionMode::ExactAverage } else { cfg.mode };
        let ev = vault::evolve_image(&encoded, &sched, t, mode, &mut rng)?;
        let (states, relabel) = match cfg.compensation {
            Compensation::None => (ev.states, deterministic_relabel(&sched, t)?),
            Compensation::Identity => (vault::compensate(&ev.states, ev.register.as_ref(), &sched, CompensationTarget::Identity)?, None),
            Compensation::DoubleSwap => {
                let target = CompensationTarget::DoubleSwap;
                let states = vault::compensate(&ev.states, ev.register.as_ref(), &sched, target)?;
                (states, ColorRelabel::induced_by(&target.unitary(sched.cores())?))
            }
        };
        let report = vault::decode_image(&states, &img, relabel.as_ref())?;
        dir.write(&format!("stage_{stage}.ppm"), |w, m| format::write_ppm(w, m, &report.mixtures))?;
        dir.write(&format!("stage_{stage}.csv"), |w, m| format::write_cmyk_csv(w, m, &report.mixtures))?;
        reports.push(StageReport {
            stage,
            t,
            scenario: cfg.scenario.label(),
            accuracy: report.accuracy,
            tie_count: report.tie_count,
            mean_fidelity: report.mean_fidelity,
            relabel: relabel.map(|r| r.0.iter().map(|c| c.letter()).collect()),
        });
    }
    let summary = VaultSummary {
        meta,
        width: img.width(),
        height: img.height(),
        mode: match cfg.mode {
            EvolutionMode::ExactAverage => "exact",
            EvolutionMode::Sampled => "sampled",
        },
        register: keeps_register,
        compensation: cfg.compensation,
        stages: reports,
    };
    dir.write_json("decode_report.json", &summary)?;
    dir.finish("vault")?;
    Ok(summary)
}

// ---------------------------------------------------------------- tomography

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    /// Relative entropy of coherence of the reconstructed state.
    Rec,
    Entropy,
    Purity,
}

impl Statistic {
    pub fn name(self) -> &'static str {
        match self {
            Statistic::Rec => "rec",
            Statistic::Entropy => "entropy",
            Statistic::Purity => "purity",
        }
    }

    pub fn evaluate(self, rho: &DensityMatrix) -> qvault_core::Result<f64> {
        match self {
            Statistic::Rec => capacities::rec(rho),
            Statistic::Entropy => states::von_neumann_entropy(rho),
            Statistic::Purity => Ok(rho.purity()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TomographyConfig {
    pub seed: u64,
    pub scenario: ScenarioChoice,
    pub state: InputChoice,
    pub t: f64,
    pub shots_per_basis: u64,
    /// Bootstrap repetitions; 0 skips the error bars.
    pub reps: usize,
    pub noise: NoiseMode,
    pub statistics: Vec<Statistic>,
    pub mle: MleOptions,
}

#[derive(Debug, Clone, Serialize)]
pub struct StatisticReport {
    pub name: &'static str,
    pub point: f64,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub reps: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TomographySummary {
    pub meta: RunMeta,
    pub state: String,
    pub t: f64,
    pub shots_per_basis: u64,
    pub noise: &'static str,
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: f64,
    pub floored_bins: usize,
    pub fidelity: f64,
    pub statistics: Vec<StatisticReport>,
}

pub fn run_tomography(cfg: &TomographyConfig, out: &Path) -> Result<TomographySummary> {
    check_t(cfg.t)?;
    if cfg.shots_per_basis == 0 {
        return Err(usage("shots per basis must be positive"));
    }
    if cfg.reps == 1 {
        return Err(usage("error bars need at least two repetitions"));
    }
    let sched = cfg.scenario.schedule()?;
    let truth = sched.channel_at(cfg.t)?.apply(&cfg.state.load()?)?;
    let mubs = tomography::build_mubs_d4()?;
    let meta = RunMeta::new(cfg.seed, &cfg.scenario.label(), &format!("t={}", fmt_num(cfg.t)));
    let mut dir = RunDir::create(out, meta.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let counts = tomography::simulate_counts(&truth, &mubs, cfg.shots_per_basis, &mut rng, cfg.noise)?;
    let outcome = tomography::mle_reconstruct(&counts, &mubs, cfg.mle)?;
    dir.write("counts.csv", |w, m| format::write_counts(w, m, &counts))?;
    dir.write("mubs.csv", |w, m| format::write_mubs(w, m, &mubs))?;
    dir.write("truth.csv", |w, m| format::write_matrix(w, m, truth.matrix()))?;
    dir.write("rho_hat.csv", |w, m| format::write_matrix(w, m, outcome.state.matrix()))?;

    let mut statistics = Vec::new();
    for &stat in &cfg.statistics {
        let point = stat.evaluate(&outcome.state)?;
        let (mean, std) = if cfg.reps >= 2 {
            let bar = tomography::monte_carlo_errors(&counts, &mubs, cfg.reps, &mut rng, cfg.mle, |r| stat.evaluate(r))?;
            (Some(bar.mean), Some(bar.std))
        } else {
            (None, None)
        };
        statistics.push(StatisticReport { name: stat.name(), point, mean, std, reps: cfg.reps });
    }
    let summary = TomographySummary {
        meta,
        state: cfg.state.label(),
        t: cfg.t,
        shots_per_basis: cfg.shots_per_basis,
        noise: match cfg.noise {
            NoiseMode::Multinomial => "multinomial",
            NoiseMode::Poisson => "poisson",
        },
        iterations: outcome.iterations,
        converged: outcome.converged,
        log_likelihood: outcome.log_likelihood,
        floored_bins: outcome.floored_bins,
        fidelity: states::fidelity(&truth, &outcome.state)?,
        statistics,
    };
    dir.write_json("tomography.json", &summary)?;
    dir.finish("tomography")?;
    if !summary.converged {
        return Err(RunError::Flagged(format!("MLE did not converge within {} iterations", cfg.mle.max_iters)));
    }
    Ok(summary)
}

// -------------------------------------------------------------- divisibility

#[derive(Debug, Clone)]
pub struct DivisibilityConfig {
    pub seed: u64,
    pub scenario: ScenarioChoice,
    pub grid_points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    pub s_time: f64,
    pub t_time: f64,
    pub min_choi_eigenvalue: f64,
    pub rank: usize,
    pub verdict: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct DivisibilitySummary {
    pub meta: RunMeta,
    pub non_markovian: bool,
    pub cp: usize,
    pub not_cp: usize,
    pub indeterminate: usize,
    pub pairs: Vec<PairReport>,
}

pub fn run_divisibility(cfg: &DivisibilityConfig, out: &Path) -> Result<DivisibilitySummary> {
    if cfg.grid_points < 2 {
        return Err(usage("the divisibility grid needs at least two points"));
    }
    let sched = cfg.scenario.schedule()?;
    let grid = capacities::uniform_grid(cfg.grid_points);
    let meta = RunMeta::new(cfg.seed, &cfg.scenario.label(), &format!("pairs({})", linspace_label(cfg.grid_points)));
    let mut dir = RunDir::create(out, meta.clone())?;
    let mut pairs = Vec::new();
    for (i, &s) in grid.iter().enumerate() {
        for &t in &grid[i + 1..] {
            let map = channels::intermediate_map(&sched, s, t, channels::DEFAULT_RANK_TOL)?;
            pairs.push(PairReport {
                s_time: s,
                t_time: t,
                min_choi_eigenvalue: map.min_choi_eigenvalue,
                rank: map.rank,
                verdict: match map.verdict {
                    DivisibilityVerdict::Cp => "cp",
                    DivisibilityVerdict::NotCp => "not_cp",
                    DivisibilityVerdict::Indeterminate => "indeterminate",
                },
            });
        }
    }
    let count = |v: &str| pairs.iter().filter(|p| p.verdict == v).count();
    let (cp, not_cp, indeterminate) = (count("cp"), count("not_cp"), count("indeterminate"));
    let summary = DivisibilitySummary { meta, non_markovian: not_cp > 0, cp, not_cp, indeterminate, pairs };
    dir.write_json("divisibility.json", &summary)?;
    dir.finish("divisibility")?;
    if indeterminate == summary.pairs.len() {
        return Err(RunError::Flagged("every intermediate map is indeterminate".into()));
    }
    Ok(summary)
}

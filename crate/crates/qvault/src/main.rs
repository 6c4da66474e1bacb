use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qvault::run::{
    self, CapacitiesConfig, Compensation, DivisibilityConfig, ImageSource, InputChoice, RunError, ScenarioChoice,
    Statistic, TomographyConfig, VaultConfig,
};
use qvault_core::capacities::CapacityKind;
use qvault_core::tomography::{MleOptions, NoiseMode};
use qvault_core::vault::EvolutionMode;

/// Permutation-noise channels on four-core qudits: capacity curves, tomography,
/// divisibility witnesses and the quantum vault.
#[derive(Parser)]
#[command(name = "qvault", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario: uniform, simplified, markovian (s1), s2, s3, s4 or custom.
    #[arg(long, default_value = "uniform")]
    scenario: String,
    /// Subset size for uniform and custom scenarios.
    #[arg(long)]
    subset: Option<usize>,
    /// Comma-separated weights of the non-identity permutations (custom only).
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    #[arg(long, env = "QVAULT_SEED", default_value_t = 0)]
    seed: u64,
    /// Run directory receiving the artifacts and manifest.json.
    #[arg(long, default_value = "qvault-run")]
    out: PathBuf,
}

impl Common {
    fn scenario(&self) -> Result<ScenarioChoice, RunError> {
        ScenarioChoice::parse(&self.scenario, self.subset, self.weights.clone())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Capacity curves over a uniform t grid.
    Capacities {
        #[command(flatten)]
        common: Common,
        /// rec, exchange, qmi, coherent or loss; repeat or comma-separate.
        #[arg(long, value_delimiter = ',', default_values = ["rec", "qmi", "coherent"])]
        kind: Vec<String>,
        /// e1..e4, chaotic, or a row,col,re,im CSV.
        #[arg(long, default_value = "chaotic")]
        input: String,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        /// Random inputs per grid point for envelope files (0 = off).
        #[arg(long, default_value_t = 0)]
        envelope_samples: usize,
    },
    /// Store, evolve, optionally compensate and decode a CMYK image.
    Vault {
        #[command(flatten)]
        common: Common,
        /// P3 pixmap or x,y,c,m,y,k CSV; defaults to a balanced stripe image.
        #[arg(long)]
        image: Option<PathBuf>,
        /// Size of the generated image, WIDTHxHEIGHT.
        #[arg(long, default_value = "32x32")]
        size: String,
        #[arg(long, value_enum, default_value = "sampled")]
        mode: Mode,
        /// Discard the classical register (the eavesdropper's view).
        #[arg(long)]
        forget_register: bool,
        #[arg(long, value_enum, default_value = "none")]
        compensate: Target,
    },
    /// Simulated five-basis tomography with bootstrap error bars.
    Tomography {
        #[command(flatten)]
        common: Common,
        /// e1..e4, chaotic, or a row,col,re,im CSV.
        #[arg(long, default_value = "e2")]
        state: String,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        #[arg(long, default_value_t = 40_000)]
        shots: u64,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        #[arg(long, value_enum, default_value = "multinomial")]
        noise: Noise,
        /// rec, entropy or purity; repeat or comma-separate.
        #[arg(long, value_delimiter = ',', default_values = ["rec"])]
        statistic: Vec<String>,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// CP-divisibility verdicts for every pair s < t of a uniform grid.
    Divisibility {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 11)]
        grid: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Sampled,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    None,
    Identity,
    DoubleSwap,
}

#[derive(Clone, Copy, ValueEnum)]
enum Noise {
    Multinomial,
    Poisson,
}

fn parse_size(s: &str) -> Result<(usize, usize), RunError> {
    let bad = || RunError::Usage(format!("size must look like 32x32, got {s:?}"));
    let (w, h) = s.split_once('x').ok_or_else(bad)?;
    Ok((w.parse().map_err(|_| bad())?, h.parse().map_err(|_| bad())?))
}

fn parse_kinds(names: &[String]) -> Result<Vec<CapacityKind>, RunError> {
    names
        .iter()
        .map(|n| CapacityKind::from_name(n).ok_or_else(|| RunError::Usage(format!("unknown capacity kind {n:?}"))))
        .collect()
}

fn parse_statistics(names: &[String]) -> Result<Vec<Statistic>, RunError> {
    names
        .iter()
        .map(|n| match n.as_str() {
            "rec" => Ok(Statistic::Rec),
            "entropy" => Ok(Statistic::Entropy),
            "purity" => Ok(Statistic::Purity),
            other => Err(RunError::Usage(format!("unknown statistic {other:?}"))),
        })
        .collect()
}

fn execute(cmd: Command) -> Result<String, RunError> {
    match cmd {
        Command::Capacities { common, kind, input, grid, envelope_samples } => {
            let cfg = CapacitiesConfig {
                seed: common.seed,
                scenario: common.scenario()?,
                kinds: parse_kinds(&kind)?,
                input: InputChoice::parse(&input),
                grid_points: grid,
                envelope_samples,
            };
            let s = run::run_capacities(&cfg, &common.out)?;
            let lines: Vec<String> = s
                .curves
                .iter()
                .map(|c| format!("{}: argmin t = {} ({} bits)", c.kind, c.argmin_t, c.min_value_bits))
                .collect();
            Ok(lines.join("\n"))
        }
        Command::Vault { common, image, size, mode, forget_register, compensate } => {
            let image = match image {
                Some(path) => ImageSource::File(path),
                None => {
                    let (width, height) = parse_size(&size)?;
                    ImageSource::Balanced { width, height }
                }
            };
            let cfg = VaultConfig {
                seed: common.seed,
                scenario: common.scenario()?,
                image,
                mode: match mode {
                    Mode::Exact => EvolutionMode::ExactAverage,
                    Mode::Sampled => EvolutionMode::Sampled,
                },
                forget_register,
                compensation: match compensate {
                    Target::None => Compensation::None,
                    Target::Identity => Compensation::Identity,
                    Target::DoubleSwap => Compensation::DoubleSwap,
                },
            };
            let s = run::run_vault(&cfg, &common.out)?;
            let lines: Vec<String> = s
                .stages
                .iter()
                .map(|r| format!("{} (t = {}): accuracy {} ties {}", r.stage, r.t, r.accuracy, r.tie_count))
                .collect();
            Ok(lines.join("\n"))
        }
        Command::Tomography { common, state, t, shots, reps, noise, statistic, max_iters, tol } => {
            let cfg = TomographyConfig {
                seed: common.seed,
                scenario: common.scenario()?,
                state: InputChoice::parse(&state),
                t,
                shots_per_basis: shots,
                reps,
                noise: match noise {
                    Noise::Multinomial => NoiseMode::Multinomial,
                    Noise::Poisson => NoiseMode::Poisson,
                },
                statistics: parse_statistics(&statistic)?,
                mle: MleOptions { max_iters, tol, record_history: false },
            };
            let s = run::run_tomography(&cfg, &common.out)?;
            let mut lines = vec![format!("fidelity {} after {} iterations", s.fidelity, s.iterations)];
            for st in &s.statistics {
                match (st.mean, st.std) {
                    (Some(m), Some(sd)) => lines.push(format!("{}: {} (bootstrap {} ± {})", st.name, st.point, m, sd)),
                    _ => lines.push(format!("{}: {}", st.name, st.point)),
                }
            }
            Ok(lines.join("\n"))
        }
        Command::Divisibility { common, grid } => {
            let cfg = DivisibilityConfig { seed: common.seed, scenario: common.scenario()?, grid_points: grid };
            let s = run::run_divisibility(&cfg, &common.out)?;
            Ok(format!(
                "non_markovian: {} (cp {}, not_cp {}, indeterminate {})",
                s.non_markovian, s.cp, s.not_cp, s.indeterminate
            ))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(report) => {
            println!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

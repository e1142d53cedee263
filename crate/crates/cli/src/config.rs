//! Run configuration: shared flag groups, the JSON config file, and the
//! flag-over-file-over-default resolution every subcommand uses.

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use ejcm_core::model::ModelParams;
use ejcm_core::partition::Picture;
use ejcm_core::trotter::{SliceIntegrator, TermOrdering};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PictureArg {
    Schrodinger,
    Interaction,
}

impl From<PictureArg> for Picture {
    fn from(p: PictureArg) -> Picture {
        match p {
            PictureArg::Schrodinger => Picture::Schrodinger,
            PictureArg::Interaction => Picture::Interaction,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingArg {
    Fixed,
    Randomized,
}

impl From<OrderingArg> for TermOrdering {
    fn from(o: OrderingArg) -> TermOrdering {
        match o {
            OrderingArg::Fixed => TermOrdering::Fixed,
            OrderingArg::Randomized => TermOrdering::Randomized,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorArg {
    Left,
    Midpoint,
}

impl From<IntegratorArg> for SliceIntegrator {
    fn from(i: IntegratorArg) -> SliceIntegrator {
        match i {
            IntegratorArg::Left => SliceIntegrator::Left,
            IntegratorArg::Midpoint => SliceIntegrator::Midpoint,
        }
    }
}

/// Flags every subcommand accepts.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON run-config file; explicit flags override its fields.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output directory. Without it the artifact goes to stdout.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Artifact format. Table subcommands default to csv, report
    /// subcommands emit json.
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,

    /// Base RNG seed for randomized term orderings.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Worker-pool size for sweep points; defaults to the available
    /// parallelism.
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// Model-instance flags. The defaults describe three modes of two qubits
/// each with unit frequencies and couplings.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// JSON file holding the model parameters.
    #[arg(long, value_name = "PATH")]
    pub params: Option<PathBuf>,

    /// Number of photon modes.
    #[arg(long)]
    pub modes: Option<usize>,

    /// Qubits per mode; the occupation cutoff is 2^bits - 1.
    #[arg(long)]
    pub trunc_bits: Option<u32>,

    /// Mode frequencies, comma separated; one value broadcasts to all modes.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub omega: Option<Vec<f64>>,

    /// Emitter transition frequency.
    #[arg(long)]
    pub atom_freq: Option<f64>,

    /// Mode-emitter couplings, comma separated; one value broadcasts.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub gamma: Option<Vec<f64>>,
}

impl ModelArgs {
    fn any_inline(&self) -> bool {
        self.modes.is_some()
            || self.trunc_bits.is_some()
            || self.omega.is_some()
            || self.atom_freq.is_some()
            || self.gamma.is_some()
    }
}

/// Sweep axes shared by the table subcommands.
#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Trotter step counts, comma separated.
    #[arg(long = "nt", value_delimiter = ',')]
    pub nt: Option<Vec<u64>>,

    /// Target accuracies, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,

    /// Evolution times, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub t: Option<Vec<f64>>,

    /// Seeds for randomized-ordering sweeps, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
}

/// The config-file form of a run: one flat record covering every
/// subcommand's knobs, all optional. Flags take precedence field by field.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<ModelParams>,
    pub model_file: Option<PathBuf>,

    pub nt: Option<Vec<u64>>,
    pub eps: Option<Vec<f64>>,
    pub t: Option<Vec<f64>>,
    pub seeds: Option<Vec<u64>>,

    pub order: Option<u8>,
    pub picture: Option<PictureArg>,
    pub ordering: Option<OrderingArg>,
    pub integrator: Option<IntegratorArg>,
    pub groups: Option<usize>,
    pub halved: Option<bool>,

    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,

    pub points: Option<usize>,
    pub t_max: Option<f64>,
    pub delta: Option<f64>,
    pub coupling: Option<f64>,
    pub atom_freq: Option<f64>,
    pub trunc_bits: Option<u32>,

    pub slices: Option<u64>,
    pub initial_mixture: Option<String>,

    pub n_rz: Option<u64>,
    pub volume: Option<f64>,
    pub storage: Option<u64>,
    pub eps_total: Option<f64>,
    pub p_phys: Option<f64>,
    pub overestimation: Option<f64>,
    pub patches_per_device: Option<u64>,
    pub compute_devices: Option<u64>,
    pub tocks_per_rotation: Option<f64>,
    pub tocks_per_t: Option<f64>,
    pub t_per_precision_bit: Option<f64>,
}

impl FileConfig {
    pub fn load(common: &CommonArgs) -> Result<FileConfig, CliError> {
        let Some(path) = &common.config else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }
}

/// Flag value if present, else the config-file value, else the default.
pub fn pick<T: Clone>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// As [`pick`] without a default.
pub fn pick_opt<T: Clone>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

fn broadcast(values: Vec<f64>, n_modes: usize, what: &str) -> Result<Vec<f64>, CliError> {
    if values.len() == 1 && n_modes > 1 {
        return Ok(vec![values[0]; n_modes]);
    }
    if values.len() != n_modes {
        return Err(CliError::Config(format!(
            "{what}: expected 1 or {n_modes} values, got {}",
            values.len()
        )));
    }
    Ok(values)
}

/// Resolves the model instance. Precedence: `--params` file, then the
/// config file's `model_file`, then its inline `model`, then the inline
/// flags with their defaults. Mixing a config-file model with inline flags
/// is rejected rather than merged.
pub fn resolve_model(args: &ModelArgs, file: &FileConfig) -> Result<ModelParams, CliError> {
    if let Some(path) = &args.params {
        return load_model_file(path);
    }
    let file_model = file.model.clone();
    let file_model_path = file.model_file.clone();
    if (file_model.is_some() || file_model_path.is_some()) && args.any_inline() {
        return Err(CliError::Config(
            "model is set in the config file; drop the inline model flags or the config model"
                .into(),
        ));
    }
    if let Some(path) = file_model_path {
        return load_model_file(&path);
    }
    if let Some(model) = file_model {
        return Ok(model);
    }

    let modes = args.modes.unwrap_or(3);
    let trunc_bits = args.trunc_bits.unwrap_or(2);
    let atom_freq = args.atom_freq.unwrap_or(1.0);
    let omega = broadcast(args.omega.clone().unwrap_or_else(|| vec![1.0]), modes, "--omega")?;
    let gamma = broadcast(args.gamma.clone().unwrap_or_else(|| vec![1.0]), modes, "--gamma")?;
    ModelParams::new(modes, trunc_bits, omega, atom_freq, gamma)
        .map_err(|e| CliError::Config(format!("invalid model: {e}")))
}

fn load_model_file(path: &std::path::Path) -> Result<ModelParams, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    ModelParams::from_json(&text)
        .map_err(|e| CliError::Config(format!("invalid model {}: {e}", path.display())))
}

pub fn resolve_format(
    common: &CommonArgs,
    file: &FileConfig,
    default: OutputFormat,
) -> OutputFormat {
    pick(common.format, file.format, default)
}

pub fn resolve_seed(common: &CommonArgs, file: &FileConfig) -> u64 {
    pick(common.seed, file.seed, 0)
}

pub fn resolve_jobs(common: &CommonArgs, file: &FileConfig) -> Result<usize, CliError> {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    let jobs = pick(common.jobs, file.jobs, available);
    if jobs == 0 {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }
    Ok(jobs)
}

pub fn resolve_out(common: &CommonArgs, file: &FileConfig) -> Option<PathBuf> {
    pick_opt(common.out.clone(), file.out.clone())
}

/// Non-empty positive step-count axis.
pub fn resolve_nt_list(
    flag: &Option<Vec<u64>>,
    file: &FileConfig,
    default: &[u64],
) -> Result<Vec<u64>, CliError> {
    let nt = pick(flag.clone(), file.nt.clone(), default.to_vec());
    if nt.is_empty() {
        return Err(CliError::Config("step-count axis is empty".into()));
    }
    if nt.contains(&0) {
        return Err(CliError::Config("step counts must be positive".into()));
    }
    Ok(nt)
}

/// Non-empty positive accuracy axis.
pub fn resolve_eps_list(
    flag: &Option<Vec<f64>>,
    file: &FileConfig,
    default: &[f64],
) -> Result<Vec<f64>, CliError> {
    let eps = pick(flag.clone(), file.eps.clone(), default.to_vec());
    if eps.is_empty() {
        return Err(CliError::Config("accuracy axis is empty".into()));
    }
    if !eps.iter().all(|e| e.is_finite() && *e > 0.0) {
        return Err(CliError::Config(
            "target accuracies must be positive and finite".into(),
        ));
    }
    Ok(eps)
}

/// Non-empty, finite, non-negative time axis.
pub fn resolve_t_list(
    flag: &Option<Vec<f64>>,
    file: &FileConfig,
    default: &[f64],
) -> Result<Vec<f64>, CliError> {
    let t = pick(flag.clone(), file.t.clone(), default.to_vec());
    if t.is_empty() {
        return Err(CliError::Config("time axis is empty".into()));
    }
    if !t.iter().all(|x| x.is_finite() && *x >= 0.0) {
        return Err(CliError::Config(
            "evolution times must be finite and non-negative".into(),
        ));
    }
    Ok(t)
}

/// A single evolution time: the scalar flag, else the first entry of the
/// config file's time axis, else the default.
pub fn resolve_t_scalar(flag: Option<f64>, file: &FileConfig, default: f64) -> Result<f64, CliError> {
    let t = flag
        .or_else(|| file.t.as_ref().and_then(|v| v.first().copied()))
        .unwrap_or(default);
    if !t.is_finite() || t < 0.0 {
        return Err(CliError::Config(format!(
            "evolution time must be finite and non-negative, got {t}"
        )));
    }
    Ok(t)
}

/// Orders to run: the explicit choice, or both product-formula orders.
pub fn resolve_orders(flag: Option<u8>, file: &FileConfig) -> Result<Vec<u8>, CliError> {
    match pick_opt(flag, file.order) {
        None => Ok(vec![1, 2]),
        Some(o @ (1 | 2)) => Ok(vec![o]),
        Some(o) => Err(CliError::Config(format!(
            "product-formula order must be 1 or 2, got {o}"
        ))),
    }
}

/// Seeds axis for randomized sweeps: explicit list, else the single base
/// seed.
pub fn resolve_seeds(
    flag: &Option<Vec<u64>>,
    file: &FileConfig,
    base_seed: u64,
) -> Result<Vec<u64>, CliError> {
    let seeds = pick(flag.clone(), file.seeds.clone(), vec![base_seed]);
    if seeds.is_empty() {
        return Err(CliError::Config("seed axis is empty".into()));
    }
    Ok(seeds)
}

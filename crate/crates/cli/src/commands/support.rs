//! Helpers shared by the subcommand implementations: error mapping onto
//! exit-code classes, the bounded worker pool, and term dumps.

use serde::Serialize;

use ejcm_core::dense::DENSE_QUBIT_LIMIT;
use ejcm_core::mixed::MixedError;
use ejcm_core::model::ModelParams;
use ejcm_core::pauli::PauliSum;
use ejcm_core::resources::ResourceError;
use ejcm_core::sim::SimError;
use ejcm_core::trotter::TrotterError;

use crate::CliError;

/// Bounded worker pool; each sweep point runs single-threaded inside it.
pub fn worker_pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))
}

/// Rejects registers too large for explicit Pauli strings.
pub fn check_register(params: &ModelParams) -> Result<(), CliError> {
    let n = params.n_qubits();
    if n > 64 {
        return Err(CliError::Config(format!(
            "register of {n} qubits exceeds the 64-qubit string limit"
        )));
    }
    Ok(())
}

/// Rejects registers too large for dense simulation.
pub fn check_dense(params: &ModelParams) -> Result<(), CliError> {
    let n = params.n_qubits();
    if n > DENSE_QUBIT_LIMIT {
        return Err(CliError::Config(format!(
            "register of {n} qubits exceeds the dense simulation limit of {DENSE_QUBIT_LIMIT}"
        )));
    }
    Ok(())
}

/// Worst-case commuting-group count `4k`, the convention behind the
/// published bound tables. The structured partitioner often achieves `2k`;
/// pass `--groups` to use a different count.
pub fn default_groups(params: &ModelParams) -> usize {
    4 * params.trunc_bits() as usize
}

/// One Pauli term in wire form.
#[derive(Debug, Serialize)]
pub struct TermDump {
    pub label: String,
    pub re: f64,
    pub im: f64,
}

pub fn dump_terms(sum: &PauliSum) -> Vec<TermDump> {
    sum.terms()
        .iter()
        .map(|t| TermDump {
            label: t.string.label(),
            re: t.coeff.re,
            im: t.coeff.im,
        })
        .collect()
}

/// Synthesis problems are config-shaped except a broken partition, which
/// indicates a numeric defect in the grouping itself.
pub fn map_trotter(e: TrotterError) -> CliError {
    match e {
        TrotterError::InvalidPartition => CliError::Numeric(e.to_string()),
        _ => CliError::Config(e.to_string()),
    }
}

pub fn map_sim(e: SimError) -> CliError {
    match e {
        SimError::Synthesis(t) => map_trotter(t),
        _ => CliError::Numeric(e.to_string()),
    }
}

pub fn map_mixed(e: MixedError) -> CliError {
    match e {
        MixedError::ZeroNorm | MixedError::ZeroTrace(_) => CliError::Numeric(e.to_string()),
        MixedError::Synthesis(t) => map_trotter(t),
        MixedError::Simulation(s) => map_sim(s),
        _ => CliError::Config(e.to_string()),
    }
}

pub fn map_resource(e: ResourceError) -> CliError {
    match e {
        ResourceError::NonPositiveConfig(_)
        | ResourceError::BudgetTooLarge(_)
        | ResourceError::ZeroCount(_)
        | ResourceError::BadFactor(_)
        | ResourceError::PrecisionOutOfRange(_) => CliError::Config(e.to_string()),
        _ => CliError::Numeric(e.to_string()),
    }
}

/// Bound evaluation fails only on malformed requests.
pub fn map_bound(e: ejcm_core::bounds::BoundError) -> CliError {
    CliError::Config(e.to_string())
}

/// Prefixes an error with the sweep point it came from.
pub fn with_point(e: CliError, ctx: &str) -> CliError {
    match e {
        CliError::Config(m) => CliError::Config(format!("{ctx}: {m}")),
        CliError::Numeric(m) => CliError::Numeric(format!("{ctx}: {m}")),
    }
}

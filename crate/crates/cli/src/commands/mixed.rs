//! `ejcm mixed`: evolve a density matrix on the vectorized doubled
//! register and tabulate trace, purity, and populations along the way.

use clap::Args;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use ejcm_core::dense::{DenseOperator, DENSE_QUBIT_LIMIT};
use ejcm_core::mixed::{
    evolve_vectorized, trace_via_bell, unvectorize_raw, vectorize, MixedConfig, VecDensity,
};
use ejcm_core::model::ModelParams;
use ejcm_core::sim::mean_photon_operator;

use crate::config::{
    pick, resolve_format, resolve_jobs, resolve_model, resolve_out, resolve_seed,
    resolve_t_scalar, CommonArgs, FileConfig, IntegratorArg, ModelArgs, OrderingArg, OutputFormat,
    PictureArg,
};
use crate::output::{fmt_f64, CommandOutput, Delivery, Payload};
use crate::CliError;

use super::support::{map_mixed, with_point, worker_pool};

#[derive(Debug, Args)]
pub struct MixedArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub model: ModelArgs,

    /// Dynamical picture of the row-register schedule.
    #[arg(long, value_enum)]
    pub picture: Option<PictureArg>,

    /// Product-formula order.
    #[arg(long)]
    pub order: Option<u8>,

    /// Trotter steps per evolution (per slice in the rotating frame).
    #[arg(long)]
    pub nt: Option<u64>,

    /// Outer slices in the rotating frame.
    #[arg(long)]
    pub slices: Option<u64>,

    /// Quadrature rule for freezing rotating-frame slices.
    #[arg(long, value_enum)]
    pub integrator: Option<IntegratorArg>,

    /// Term ordering inside each step.
    #[arg(long, value_enum)]
    pub ordering: Option<OrderingArg>,

    /// Total evolution time of the trajectory.
    #[arg(long)]
    pub t: Option<f64>,

    /// Trajectory points after the initial one.
    #[arg(long)]
    pub points: Option<usize>,

    /// Diagonal initial mixture as `index:weight,...`; defaults to the
    /// pure vacuum-photon excited-emitter state.
    #[arg(long)]
    pub initial_mixture: Option<String>,
}

pub fn run(args: &MixedArgs) -> Result<(CommandOutput, Delivery), CliError> {
    let file = FileConfig::load(&args.common)?;
    let params = resolve_model(&args.model, &file)?;
    let n = params.n_qubits();
    if 2 * n > DENSE_QUBIT_LIMIT {
        return Err(CliError::Config(format!(
            "doubled register of {} qubits exceeds the dense simulation limit of {DENSE_QUBIT_LIMIT}",
            2 * n
        )));
    }
    let picture_arg = args.picture.or(file.picture).unwrap_or(PictureArg::Schrodinger);
    let order = pick(args.order, file.order, 1);
    if !(order == 1 || order == 2) {
        return Err(CliError::Config(format!(
            "product-formula order must be 1 or 2, got {order}"
        )));
    }
    let n_t = pick(args.nt, file.nt.as_ref().and_then(|v| v.first().copied()), 64);
    if n_t == 0 {
        return Err(CliError::Config("step count must be positive".into()));
    }
    let slices = pick(args.slices, file.slices, 16);
    if slices == 0 {
        return Err(CliError::Config("slice count must be positive".into()));
    }
    let integrator_arg = args.integrator.or(file.integrator).unwrap_or(IntegratorArg::Midpoint);
    let ordering_arg = args.ordering.or(file.ordering).unwrap_or(OrderingArg::Fixed);
    let seed = resolve_seed(&args.common, &file);
    let duration = resolve_t_scalar(args.t, &file, 1.0)?;
    let points = pick(args.points, file.points, 16);
    if points == 0 {
        return Err(CliError::Config("need at least 1 trajectory point".into()));
    }
    let mixture_text = args.initial_mixture.clone().or(file.initial_mixture.clone());
    let jobs = resolve_jobs(&args.common, &file)?;
    let format = resolve_format(&args.common, &file, OutputFormat::Csv);

    let rho0 = initial_density(&params, mixture_text.as_deref())?;
    let v0 = vectorize(&rho0).map_err(map_mixed)?;
    let number_dense = mean_photon_operator(&params).to_dense();

    let times: Vec<f64> = (0..=points)
        .map(|i| duration * i as f64 / points as f64)
        .collect();
    let pool = worker_pool(jobs)?;
    let rows = pool.install(|| {
        times
            .par_iter()
            .map(|&t| {
                let config = MixedConfig {
                    picture: picture_arg.into(),
                    order,
                    duration: t,
                    trotter_steps: n_t,
                    slices,
                    integrator: integrator_arg.into(),
                    ordering: ordering_arg.into(),
                    seed,
                };
                trajectory_row(&params, &config, &v0, &number_dense)
                    .map_err(|e| with_point(e, &format!("t={t}")))
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;

    let output = CommandOutput {
        name: "mixed",
        config: json!({
            "model": params,
            "picture": picture_arg,
            "order": order,
            "nt": n_t,
            "slices": slices,
            "integrator": integrator_arg,
            "ordering": ordering_arg,
            "seed": seed,
            "t": duration,
            "points": points,
            "initial_mixture": mixture_text,
            "jobs": jobs,
        }),
        payload: Payload::Table {
            header: vec![
                "t",
                "trace",
                "trace_imag_residual",
                "flagged_negative",
                "purity",
                "mean_photon",
                "excited_population",
            ],
            rows,
        },
    };
    let delivery = Delivery {
        out: resolve_out(&args.common, &file),
        format,
    };
    Ok((output, delivery))
}

fn trajectory_row(
    params: &ModelParams,
    config: &MixedConfig,
    v0: &VecDensity,
    number_dense: &DenseOperator,
) -> Result<Vec<String>, CliError> {
    let evolved = evolve_vectorized(params, config, v0).map_err(map_mixed)?;
    let estimate = trace_via_bell(&evolved);
    if estimate.value.abs() < 1e-9 {
        return Err(CliError::Numeric(format!(
            "trace estimate {:.3e} too small to normalize against",
            estimate.value
        )));
    }
    let rho = unvectorize_raw(&evolved);
    let trace = estimate.value;
    let purity = 1.0 / (trace * trace);
    let mean_photon = product_trace(number_dense, &rho) / trace;
    let excited = excited_population(&rho) / trace;
    Ok(vec![
        fmt_f64(config.duration),
        fmt_f64(trace),
        fmt_f64(estimate.imag_residual),
        estimate.flagged_negative.to_string(),
        fmt_f64(purity),
        fmt_f64(mean_photon),
        fmt_f64(excited),
    ])
}

/// `Re tr(A rho)` for a Frobenius-normalized density matrix.
fn product_trace(a: &DenseOperator, rho: &DenseOperator) -> f64 {
    let am = a.matrix();
    let rm = rho.matrix();
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..am.nrows() {
        for j in 0..am.ncols() {
            total += am[(i, j)] * rm[(j, i)];
        }
    }
    total.re
}

/// Population of the excited emitter: the emitter qubit is last, so it is
/// the least significant bit of the basis index.
fn excited_population(rho: &DenseOperator) -> f64 {
    let m = rho.matrix();
    (1..m.nrows()).step_by(2).map(|i| m[(i, i)].re).sum()
}

/// Parses `index:weight,...` into a diagonal density matrix; weights are
/// normalized to unit trace. Without a spec the initial state is the pure
/// vacuum-photon excited-emitter density.
fn initial_density(params: &ModelParams, text: Option<&str>) -> Result<DenseOperator, CliError> {
    let dim = 1usize << params.n_qubits();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    match text {
        None => {
            m[(1, 1)] = Complex64::new(1.0, 0.0);
        }
        Some(spec) => {
            let mut total = 0.0;
            for part in spec.split(',') {
                let (idx_text, w_text) = part.split_once(':').ok_or_else(|| {
                    CliError::Config(format!("mixture entry {part:?} is not index:weight"))
                })?;
                let idx: usize = idx_text.trim().parse().map_err(|e| {
                    CliError::Config(format!("mixture index {idx_text:?}: {e}"))
                })?;
                let w: f64 = w_text.trim().parse().map_err(|e| {
                    CliError::Config(format!("mixture weight {w_text:?}: {e}"))
                })?;
                if idx >= dim {
                    return Err(CliError::Config(format!(
                        "mixture index {idx} outside the {dim}-dimensional space"
                    )));
                }
                if !(w.is_finite() && w > 0.0) {
                    return Err(CliError::Config(format!(
                        "mixture weight {w} must be positive and finite"
                    )));
                }
                m[(idx, idx)] += Complex64::new(w, 0.0);
                total += w;
            }
            if total <= 0.0 {
                return Err(CliError::Config("mixture has no weight".into()));
            }
            m /= Complex64::new(total, 0.0);
        }
    }
    Ok(DenseOperator::from_matrix(m))
}

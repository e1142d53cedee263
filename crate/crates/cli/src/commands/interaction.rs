//! `ejcm interaction`: rotating-frame slice counts. For each accuracy
//! target the table gives the closed-form sufficient slice count next to
//! the smallest count that actually reaches the target against a converged
//! dense reference.

use clap::Args;
use rayon::prelude::*;
use serde_json::json;

use ejcm_core::bounds::time_slice_count_with;
use ejcm_core::dense::DenseOperator;
use ejcm_core::model::ModelParams;
use ejcm_core::sim::{reference_propagator_interaction, sliced_propagator_interaction};
use ejcm_core::trotter::SliceIntegrator;

use crate::config::{
    resolve_eps_list, resolve_format, resolve_jobs, resolve_model, resolve_out, resolve_t_list,
    CommonArgs, FileConfig, IntegratorArg, ModelArgs, OutputFormat, SweepArgs,
};
use crate::output::{fmt_f64, CommandOutput, Delivery, Payload};
use crate::CliError;

use super::support::{check_dense, map_bound, map_sim, with_point, worker_pool};

/// Hard ceiling on the searched slice count.
const SLICE_CAP: u64 = 1 << 20;

#[derive(Debug, Args)]
pub struct InteractionArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,

    /// Quadrature rule for freezing each slice.
    #[arg(long, value_enum)]
    pub integrator: Option<IntegratorArg>,

    /// Use the tighter first-order slice-count form.
    #[arg(long)]
    pub halved: bool,
}

pub fn run(args: &InteractionArgs) -> Result<(CommandOutput, Delivery), CliError> {
    let file = FileConfig::load(&args.common)?;
    let params = resolve_model(&args.model, &file)?;
    check_dense(&params)?;
    let integrator_arg = args.integrator.or(file.integrator).unwrap_or(IntegratorArg::Midpoint);
    let integrator: SliceIntegrator = integrator_arg.into();
    let halved = args.halved || file.halved.unwrap_or(false);
    let order: u8 = match integrator {
        SliceIntegrator::Left => 1,
        SliceIntegrator::Midpoint => 2,
    };
    if halved && order != 1 {
        return Err(CliError::Config(
            "--halved applies to the left integrator only".into(),
        ));
    }
    let t_list = resolve_t_list(&args.sweep.t, &file, &[1.0])?;
    let eps_list = resolve_eps_list(&args.sweep.eps, &file, &[0.1, 0.05, 0.025])?;
    let jobs = resolve_jobs(&args.common, &file)?;
    let format = resolve_format(&args.common, &file, OutputFormat::Csv);

    let min_eps = eps_list.iter().cloned().fold(f64::INFINITY, f64::min);
    let ref_tol = min_eps / 100.0;
    if ref_tol < 1e-10 {
        return Err(CliError::Config(format!(
            "accuracy {min_eps:e} is below what the dense reference can certify"
        )));
    }

    let references = t_list
        .iter()
        .map(|&t| reference_propagator_interaction(&params, t, ref_tol).map_err(map_sim))
        .collect::<Result<Vec<_>, _>>()?;

    let mut pairs = Vec::new();
    for (t_index, &t) in t_list.iter().enumerate() {
        for &eps in &eps_list {
            pairs.push((t_index, t, eps));
        }
    }

    let integrator_name = match integrator_arg {
        IntegratorArg::Left => "left",
        IntegratorArg::Midpoint => "midpoint",
    };
    let pool = worker_pool(jobs)?;
    let rows = pool.install(|| {
        pairs
            .par_iter()
            .map(|&(t_index, t, eps)| {
                let ctx = format!("t={t} eps={eps}");
                let l_theory = time_slice_count_with(&params, t, eps, order, halved)
                    .map_err(|e| with_point(map_bound(e), &ctx))?;
                let (l_num, err) =
                    minimal_slices(&params, t, eps, integrator, &references[t_index])
                        .map_err(|e| with_point(e, &ctx))?;
                Ok(vec![
                    fmt_f64(t),
                    fmt_f64(eps),
                    integrator_name.to_string(),
                    order.to_string(),
                    l_theory.to_string(),
                    l_num.to_string(),
                    fmt_f64(err),
                ])
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;

    let output = CommandOutput {
        name: "interaction",
        config: json!({
            "model": params,
            "t": t_list,
            "eps": eps_list,
            "integrator": integrator_arg,
            "halved": halved,
            "order": order,
            "reference_tol": ref_tol,
            "jobs": jobs,
        }),
        payload: Payload::Table {
            header: vec![
                "t",
                "eps",
                "integrator",
                "order",
                "l_theoretical",
                "l_numerical",
                "error_at_l_numerical",
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

/// Smallest slice count whose frozen-slice product reaches `eps` against
/// the reference, found by doubling then bisecting on the passing flank.
fn minimal_slices(
    params: &ModelParams,
    t: f64,
    eps: f64,
    integrator: SliceIntegrator,
    reference: &DenseOperator,
) -> Result<(u64, f64), CliError> {
    let err_at = |l: u64| {
        sliced_propagator_interaction(params, t, l, integrator)
            .sub(reference)
            .spectral_norm()
    };
    let mut l = 1u64;
    let mut err = err_at(l);
    if err <= eps {
        return Ok((l, err));
    }
    while err > eps {
        if l >= SLICE_CAP {
            return Err(CliError::Numeric(format!(
                "slice search exceeded {SLICE_CAP} slices"
            )));
        }
        l *= 2;
        err = err_at(l);
    }
    let mut lo = l / 2;
    let mut hi = l;
    let mut err_hi = err;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let err_mid = err_at(mid);
        if err_mid <= eps {
            hi = mid;
            err_hi = err_mid;
        } else {
            lo = mid;
        }
    }
    Ok((hi, err_hi))
}

//! `ejcm simulate`: desk-scale product-formula runs against the dense
//! propagator, with the matching theoretical bound per row.

use clap::Args;
use rayon::prelude::*;
use serde_json::json;

use ejcm_core::bounds::{first_order_bound_schrodinger, second_order_bound_schrodinger};
use ejcm_core::dense::DenseOperator;
use ejcm_core::hamiltonian::{build_schrodinger, HamiltonianParts};
use ejcm_core::model::ModelParams;
use ejcm_core::partition::{partition_structured, CommutingPartition, Picture};
use ejcm_core::sim::{error_metrics, exact_unitary, jc_initial_state, StateVector};
use ejcm_core::trotter::{schedule_first_order, schedule_second_order, TermOrdering};

use crate::config::{
    resolve_format, resolve_jobs, resolve_model, resolve_nt_list, resolve_orders, resolve_out,
    resolve_seed, resolve_seeds, resolve_t_list, CommonArgs, FileConfig, ModelArgs, OrderingArg,
    OutputFormat, PictureArg, SweepArgs,
};
use crate::output::{fmt_f64, CommandOutput, Delivery, Payload};
use crate::CliError;

use super::support::{
    check_dense, default_groups, map_bound, map_sim, map_trotter, with_point, worker_pool,
};

const DEFAULT_NT: [u64; 8] = [1, 2, 4, 8, 16, 32, 64, 128];

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,

    /// Product-formula order; both orders when omitted.
    #[arg(long)]
    pub order: Option<u8>,

    /// Term ordering inside each step.
    #[arg(long, value_enum)]
    pub ordering: Option<OrderingArg>,

    /// Dynamical picture; only the fixed frame is simulated here.
    #[arg(long, value_enum)]
    pub picture: Option<PictureArg>,

    /// Commuting-group count entering the bound column; defaults to the
    /// worst case 4k.
    #[arg(long)]
    pub groups: Option<usize>,
}

struct Point {
    t_index: usize,
    t: f64,
    order: u8,
    n_t: u64,
    seed: u64,
}

struct Shared<'a> {
    params: &'a ModelParams,
    parts: &'a HamiltonianParts,
    partition: &'a CommutingPartition,
    psi0: &'a StateVector,
    exacts: &'a [DenseOperator],
    ordering: TermOrdering,
    ordering_name: &'a str,
    g: usize,
}

pub fn run(args: &SimulateArgs) -> Result<(CommandOutput, Delivery), CliError> {
    let file = FileConfig::load(&args.common)?;
    let params = resolve_model(&args.model, &file)?;
    check_dense(&params)?;
    let picture_arg = args.picture.or(file.picture).unwrap_or(PictureArg::Schrodinger);
    if picture_arg == PictureArg::Interaction {
        return Err(CliError::Config(
            "simulate runs in the fixed frame; use the interaction subcommand".into(),
        ));
    }
    let orders = resolve_orders(args.order, &file)?;
    let t_list = resolve_t_list(&args.sweep.t, &file, &[1.0])?;
    let nt_list = resolve_nt_list(&args.sweep.nt, &file, &DEFAULT_NT)?;
    let ordering_arg = args.ordering.or(file.ordering).unwrap_or(OrderingArg::Fixed);
    let base_seed = resolve_seed(&args.common, &file);
    let seeds = match ordering_arg {
        OrderingArg::Fixed => vec![base_seed],
        OrderingArg::Randomized => resolve_seeds(&args.sweep.seeds, &file, base_seed)?,
    };
    let g = args.groups.or(file.groups).unwrap_or_else(|| default_groups(&params));
    let jobs = resolve_jobs(&args.common, &file)?;
    let format = resolve_format(&args.common, &file, OutputFormat::Csv);
    let ordering_name = match ordering_arg {
        OrderingArg::Fixed => "fixed",
        OrderingArg::Randomized => "randomized",
    };

    let parts = build_schrodinger(&params);
    let partition = partition_structured(&parts.h_int, &params, Picture::Schrodinger, 0.0);
    let psi0 = jc_initial_state(&params);
    let h_dense = parts.total().to_dense();
    let exacts = t_list
        .iter()
        .map(|&t| exact_unitary(&h_dense, t).map_err(map_sim))
        .collect::<Result<Vec<_>, _>>()?;

    let mut points = Vec::new();
    for (t_index, &t) in t_list.iter().enumerate() {
        for &order in &orders {
            for &n_t in &nt_list {
                for &seed in &seeds {
                    points.push(Point {
                        t_index,
                        t,
                        order,
                        n_t,
                        seed,
                    });
                }
            }
        }
    }

    let shared = Shared {
        params: &params,
        parts: &parts,
        partition: &partition,
        psi0: &psi0,
        exacts: &exacts,
        ordering: ordering_arg.into(),
        ordering_name,
        g,
    };
    let pool = worker_pool(jobs)?;
    let rows = pool.install(|| {
        points
            .par_iter()
            .map(|p| compute_row(&shared, p))
            .collect::<Result<Vec<_>, CliError>>()
    })?;

    let output = CommandOutput {
        name: "simulate",
        config: json!({
            "model": params,
            "orders": orders,
            "t": t_list,
            "nt": nt_list,
            "ordering": ordering_arg,
            "seeds": seeds,
            "groups": g,
            "jobs": jobs,
        }),
        payload: Payload::Table {
            header: vec![
                "order",
                "n_t",
                "t",
                "ordering",
                "seed",
                "theoretical_bound",
                "operator_error",
                "state_error",
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

fn compute_row(shared: &Shared<'_>, p: &Point) -> Result<Vec<String>, CliError> {
    let ctx = format!("t={} order={} n_t={} seed={}", p.t, p.order, p.n_t, p.seed);
    let schedule = match p.order {
        1 => schedule_first_order(
            shared.parts,
            shared.partition,
            p.t,
            p.n_t,
            shared.ordering,
            p.seed,
        ),
        _ => schedule_second_order(
            shared.parts,
            shared.partition,
            p.t,
            p.n_t,
            shared.ordering,
            p.seed,
        ),
    }
    .map_err(|e| with_point(map_trotter(e), &ctx))?;
    let metrics = error_metrics(&schedule, &shared.exacts[p.t_index], shared.psi0)
        .map_err(|e| with_point(map_sim(e), &ctx))?;
    let bound = match p.order {
        1 => first_order_bound_schrodinger(shared.params, shared.g, p.t, p.n_t),
        _ => second_order_bound_schrodinger(shared.params, shared.g, p.t, p.n_t),
    }
    .map_err(|e| with_point(map_bound(e), &ctx))?;
    Ok(vec![
        p.order.to_string(),
        p.n_t.to_string(),
        fmt_f64(p.t),
        shared.ordering_name.to_string(),
        p.seed.to_string(),
        fmt_f64(bound.epsilon_bound),
        fmt_f64(metrics.operator_error),
        fmt_f64(metrics.state_error),
    ])
}

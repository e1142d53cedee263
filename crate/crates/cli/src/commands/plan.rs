//! `ejcm plan`: optimal slice/step allocations for rotating-frame
//! simulation plus the fixed-frame gate costs at the same targets.

use clap::Args;
use serde::Serialize;
use serde_json::json;

use ejcm_core::bounds::{
    gate_cost_schrodinger, optimize_cost_first_order, optimize_cost_second_order,
    structured_group_count, CostPlan, GateCost,
};
use ejcm_core::partition::Picture;

use crate::config::{
    resolve_eps_list, resolve_format, resolve_model, resolve_orders, resolve_out, resolve_t_list,
    CommonArgs, FileConfig, ModelArgs, OutputFormat, SweepArgs,
};
use crate::output::{CommandOutput, Delivery, Payload};
use crate::CliError;

use super::support::{check_register, map_bound};

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,

    /// Product-formula order; both orders when omitted.
    #[arg(long)]
    pub order: Option<u8>,

    /// Commuting-group count entering the cost scalars; defaults to the
    /// structured partitioner's rotating-frame count.
    #[arg(long)]
    pub groups: Option<usize>,
}

#[derive(Debug, Serialize)]
struct PlanEntry {
    t: f64,
    eps: f64,
    order: u8,
    groups: usize,
    plan: CostPlan,
    schrodinger_gates: GateCost,
}

pub fn run(args: &PlanArgs) -> Result<(CommandOutput, Delivery), CliError> {
    let file = FileConfig::load(&args.common)?;
    let params = resolve_model(&args.model, &file)?;
    check_register(&params)?;
    let orders = resolve_orders(args.order, &file)?;
    let t_list = resolve_t_list(&args.sweep.t, &file, &[1.0])?;
    let eps_list = resolve_eps_list(&args.sweep.eps, &file, &[0.1])?;
    let groups_override = args.groups.or(file.groups);
    let format = resolve_format(&args.common, &file, OutputFormat::Json);

    let mut entries = Vec::new();
    for &t in &t_list {
        let g = groups_override
            .unwrap_or_else(|| structured_group_count(&params, Picture::Interaction, t));
        for &eps in &eps_list {
            for &order in &orders {
                let plan = match order {
                    1 => optimize_cost_first_order(&params, g, t, eps),
                    _ => optimize_cost_second_order(&params, g, t, eps),
                }
                .map_err(map_bound)?;
                let gates = gate_cost_schrodinger(&params, g, t, eps, order).map_err(map_bound)?;
                entries.push(PlanEntry {
                    t,
                    eps,
                    order,
                    groups: g,
                    plan,
                    schrodinger_gates: gates,
                });
            }
        }
    }

    let output = CommandOutput {
        name: "plan",
        config: json!({
            "model": params,
            "orders": orders,
            "t": t_list,
            "eps": eps_list,
            "groups": groups_override,
        }),
        payload: Payload::Report(json!(entries)),
    };
    let delivery = Delivery {
        out: resolve_out(&args.common, &file),
        format,
    };
    Ok((output, delivery))
}

//! `ejcm bound`: evaluate the closed-form product-formula error bounds
//! over a time-by-steps grid.

use clap::Args;
use serde_json::json;

use ejcm_core::bounds::{
    first_order_bound_interaction, first_order_bound_schrodinger, second_order_bound_schrodinger,
};
use ejcm_core::partition::Picture;

use crate::config::{
    resolve_format, resolve_model, resolve_nt_list, resolve_orders, resolve_out, resolve_t_list,
    CommonArgs, FileConfig, ModelArgs, OutputFormat, PictureArg, SweepArgs,
};
use crate::output::{CommandOutput, Delivery, Payload};
use crate::CliError;

use super::support::{check_register, default_groups, map_bound};

const DEFAULT_NT: [u64; 8] = [1, 2, 4, 8, 16, 32, 64, 128];

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,

    /// Product-formula order; both orders when omitted.
    #[arg(long)]
    pub order: Option<u8>,

    /// Dynamical picture the bound is evaluated in.
    #[arg(long, value_enum)]
    pub picture: Option<PictureArg>,

    /// Commuting-group count entering the bound; defaults to the
    /// worst case 4k.
    #[arg(long)]
    pub groups: Option<usize>,
}

pub fn run(args: &BoundArgs) -> Result<(CommandOutput, Delivery), CliError> {
    let file = FileConfig::load(&args.common)?;
    let params = resolve_model(&args.model, &file)?;
    check_register(&params)?;
    let picture_arg = args.picture.or(file.picture).unwrap_or(PictureArg::Schrodinger);
    let picture: Picture = picture_arg.into();
    let orders = resolve_orders(args.order, &file)?;
    let t_list = resolve_t_list(&args.sweep.t, &file, &[1.0])?;
    let nt_list = resolve_nt_list(&args.sweep.nt, &file, &DEFAULT_NT)?;
    let g = args.groups.or(file.groups).unwrap_or_else(|| default_groups(&params));
    let format = resolve_format(&args.common, &file, OutputFormat::Json);

    if picture == Picture::Interaction && orders.contains(&2) {
        return Err(CliError::Config(
            "the rotating-frame slice bound is first order; use --order 1 or plan".into(),
        ));
    }

    let mut reports = Vec::new();
    for &t in &t_list {
        for &order in &orders {
            for &n_t in &nt_list {
                let report = match (picture, order) {
                    (Picture::Schrodinger, 1) => {
                        first_order_bound_schrodinger(&params, g, t, n_t)
                    }
                    (Picture::Schrodinger, _) => {
                        second_order_bound_schrodinger(&params, g, t, n_t)
                    }
                    (Picture::Interaction, _) => {
                        first_order_bound_interaction(&params, g, t, n_t)
                    }
                }
                .map_err(map_bound)?;
                reports.push(report);
            }
        }
    }

    let output = CommandOutput {
        name: "bound",
        config: json!({
            "model": params,
            "picture": picture_arg,
            "orders": orders,
            "t": t_list,
            "nt": nt_list,
            "groups": g,
        }),
        payload: Payload::Report(json!(reports)),
    };
    let delivery = Delivery {
        out: resolve_out(&args.common, &file),
        format,
    };
    Ok((output, delivery))
}

//! `ejcm partition`: group the interaction terms into commuting families
//! and export the anticommutation graph.

use clap::Args;
use serde_json::json;

use ejcm_core::hamiltonian::{build_interaction, build_schrodinger};
use ejcm_core::partition::{frustration_graph, partition_structured, verify_partition, Picture};

use crate::config::{
    resolve_format, resolve_model, resolve_out, resolve_t_scalar, CommonArgs, FileConfig,
    ModelArgs, OutputFormat, PictureArg,
};
use crate::output::{CommandOutput, Delivery, Payload};
use crate::CliError;

use super::support::{check_register, dump_terms};

#[derive(Debug, Args)]
pub struct PartitionArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub model: ModelArgs,

    /// Dynamical picture the interaction sum is taken in.
    #[arg(long, value_enum)]
    pub picture: Option<PictureArg>,

    /// Freeze time for the rotating-frame sum.
    #[arg(long)]
    pub t: Option<f64>,
}

pub fn run(args: &PartitionArgs) -> Result<(CommandOutput, Delivery), CliError> {
    let file = FileConfig::load(&args.common)?;
    let params = resolve_model(&args.model, &file)?;
    check_register(&params)?;
    let picture_arg = args.picture.or(file.picture).unwrap_or(PictureArg::Schrodinger);
    let picture: Picture = picture_arg.into();
    let t = resolve_t_scalar(args.t, &file, 0.0)?;
    let format = resolve_format(&args.common, &file, OutputFormat::Json);

    let sum = match picture {
        Picture::Schrodinger => build_schrodinger(&params).h_int,
        Picture::Interaction => build_interaction(&params, t),
    };
    let partition = partition_structured(&sum, &params, picture, t);
    if !verify_partition(&sum, &partition) {
        return Err(CliError::Numeric(
            "partition failed pairwise-commutation verification".into(),
        ));
    }
    let edges = frustration_graph(&sum);

    let results = json!({
        "method": partition.method,
        "used_fallback": partition.used_fallback,
        "seed": partition.seed,
        "group_count": partition.group_count(),
        "groups": partition.groups,
        "terms": dump_terms(&sum),
        "graph_edges": edges,
    });

    let output = CommandOutput {
        name: "partition",
        config: json!({ "model": params, "picture": picture_arg, "t": t }),
        payload: Payload::Report(results),
    };
    let delivery = Delivery {
        out: resolve_out(&args.common, &file),
        format,
    };
    Ok((output, delivery))
}

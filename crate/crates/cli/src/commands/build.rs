//! `ejcm build`: assemble the Hamiltonian and dump every Pauli term along
//! with the closed-form term counts.

use clap::Args;
use serde_json::json;

use ejcm_core::hamiltonian::{build_interaction, build_schrodinger, term_counts};

use crate::config::{
    resolve_format, resolve_model, resolve_out, resolve_t_scalar, CommonArgs, FileConfig,
    ModelArgs, OutputFormat,
};
use crate::output::{CommandOutput, Delivery, Payload};
use crate::CliError;

use super::support::{check_register, dump_terms};

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub model: ModelArgs,

    /// Freeze time for the rotating-frame dump.
    #[arg(long)]
    pub t: Option<f64>,
}

pub fn run(args: &BuildArgs) -> Result<(CommandOutput, Delivery), CliError> {
    let file = FileConfig::load(&args.common)?;
    let params = resolve_model(&args.model, &file)?;
    check_register(&params)?;
    let t = resolve_t_scalar(args.t, &file, 0.0)?;
    let format = resolve_format(&args.common, &file, OutputFormat::Json);

    let parts = build_schrodinger(&params);
    let frozen = build_interaction(&params, t);
    let counts = term_counts(&params);

    let results = json!({
        "n_qubits": params.n_qubits(),
        "identity_shift": parts.identity_shift,
        "counts": counts,
        "h_photon": dump_terms(&parts.h_photon),
        "h_atom": dump_terms(&parts.h_atom),
        "h_int": dump_terms(&parts.h_int),
        "h_interaction_frozen": dump_terms(&frozen),
    });

    let output = CommandOutput {
        name: "build",
        config: json!({ "model": params, "t": t }),
        payload: Payload::Report(results),
    };
    let delivery = Delivery {
        out: resolve_out(&args.common, &file),
        format,
    };
    Ok((output, delivery))
}

//! `ejcm jc`: Rabi oscillation of the single-mode model measured on a
//! first-order schedule against the closed-form survival probability.

use clap::Args;
use rayon::prelude::*;
use serde_json::json;

use ejcm_core::model::ModelParams;
use ejcm_core::sim::{jc_survival, jc_survival_simulated};

use crate::config::{
    pick, resolve_format, resolve_jobs, resolve_nt_list, resolve_out, CommonArgs, FileConfig,
    OutputFormat,
};
use crate::output::{fmt_f64, CommandOutput, Delivery, Payload};
use crate::CliError;

use super::support::{check_dense, map_sim, with_point, worker_pool};

#[derive(Debug, Args)]
pub struct JcArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Detuning of the mode from the emitter.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,

    /// Mode-emitter coupling.
    #[arg(long, allow_hyphen_values = true)]
    pub coupling: Option<f64>,

    /// Emitter transition frequency.
    #[arg(long)]
    pub atom_freq: Option<f64>,

    /// Qubits for the single mode.
    #[arg(long)]
    pub trunc_bits: Option<u32>,

    /// Number of time points on the inclusive grid.
    #[arg(long)]
    pub points: Option<usize>,

    /// End of the time grid.
    #[arg(long)]
    pub t_max: Option<f64>,

    /// Trotter step counts, comma separated.
    #[arg(long = "nt", value_delimiter = ',')]
    pub nt: Option<Vec<u64>>,
}

pub fn run(args: &JcArgs) -> Result<(CommandOutput, Delivery), CliError> {
    let file = FileConfig::load(&args.common)?;
    let delta = pick(args.delta, file.delta, 0.0);
    let coupling = pick(args.coupling, file.coupling, 1.0);
    let atom_freq = pick(args.atom_freq, file.atom_freq, 1.0);
    let trunc_bits = pick(args.trunc_bits, file.trunc_bits, 1);
    let points = pick(args.points, file.points, 64);
    let t_max = pick(args.t_max, file.t_max, std::f64::consts::TAU);
    let nt_list = resolve_nt_list(&args.nt, &file, &[512])?;
    let jobs = resolve_jobs(&args.common, &file)?;
    let format = resolve_format(&args.common, &file, OutputFormat::Csv);

    if points < 2 {
        return Err(CliError::Config("need at least 2 time points".into()));
    }
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(CliError::Config(format!(
            "t_max must be positive and finite, got {t_max}"
        )));
    }

    let params = ModelParams::new(
        1,
        trunc_bits,
        vec![atom_freq + delta],
        atom_freq,
        vec![coupling],
    )
    .map_err(|e| CliError::Config(format!("invalid model: {e}")))?;
    check_dense(&params)?;

    let mut grid_points = Vec::new();
    for &n_t in &nt_list {
        for i in 0..points {
            let t = t_max * i as f64 / (points - 1) as f64;
            grid_points.push((n_t, t));
        }
    }

    let pool = worker_pool(jobs)?;
    let rows = pool.install(|| {
        grid_points
            .par_iter()
            .map(|&(n_t, t)| {
                let ctx = format!("t={t} n_t={n_t}");
                let p_sim = jc_survival_simulated(&params, t, n_t)
                    .map_err(|e| with_point(map_sim(e), &ctx))?;
                let p_exact = jc_survival(coupling, delta, t);
                Ok(vec![
                    fmt_f64(t),
                    n_t.to_string(),
                    fmt_f64(p_sim),
                    fmt_f64(p_exact),
                    fmt_f64((p_sim - p_exact).abs()),
                ])
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;

    let output = CommandOutput {
        name: "jc",
        config: json!({
            "delta": delta,
            "coupling": coupling,
            "atom_freq": atom_freq,
            "trunc_bits": trunc_bits,
            "points": points,
            "t_max": t_max,
            "nt": nt_list,
            "model": params,
            "jobs": jobs,
        }),
        payload: Payload::Table {
            header: vec!["t", "n_t", "p_simulated", "p_analytic", "abs_error"],
            rows,
        },
    };
    let delivery = Delivery {
        out: resolve_out(&args.common, &file),
        format,
    };
    Ok((output, delivery))
}

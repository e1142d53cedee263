//! `ejcm resources`: fault-tolerant budget report. The rotation count can
//! be given directly or derived from the second-order cost optimizer, and
//! the space-time volume can be given directly or derived from the layout
//! model's tock count.

use clap::Args;
use serde_json::json;

use ejcm_core::bounds::{optimize_cost_second_order, structured_group_count, CostPlan};
use ejcm_core::partition::Picture;
use ejcm_core::resources::{
    allocate_budget, apply_overestimation, resource_report, rz_precision_bits, BudgetConfig,
    LayoutModel,
};

use crate::config::{
    pick, pick_opt, resolve_format, resolve_model, resolve_out, resolve_t_scalar, CommonArgs,
    FileConfig, ModelArgs, OutputFormat,
};
use crate::output::{CommandOutput, Delivery, Payload};
use crate::CliError;

use super::support::{check_register, map_bound, map_resource};

#[derive(Debug, Args)]
pub struct ResourcesArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub model: ModelArgs,

    /// Rotation count; derived from the cost optimizer when omitted.
    #[arg(long)]
    pub n_rz: Option<u64>,

    /// Space-time volume in patch-tocks; derived from the layout model
    /// when omitted.
    #[arg(long)]
    pub volume: Option<f64>,

    /// Storage devices alongside the compute devices.
    #[arg(long)]
    pub storage: Option<u64>,

    /// Total logical error budget.
    #[arg(long)]
    pub eps_total: Option<f64>,

    /// Physical error rate.
    #[arg(long)]
    pub p_phys: Option<f64>,

    /// Derating factor between analytic bounds and observed error.
    #[arg(long)]
    pub overestimation: Option<f64>,

    /// Evolution time for the derived rotation count.
    #[arg(long)]
    pub t: Option<f64>,

    /// Trotter accuracy target for the derived rotation count.
    #[arg(long)]
    pub eps: Option<f64>,

    /// Logical patches per device.
    #[arg(long)]
    pub patches_per_device: Option<u64>,

    /// Compute devices in the pipeline.
    #[arg(long)]
    pub compute_devices: Option<u64>,

    /// Tocks per synthesized rotation.
    #[arg(long)]
    pub tocks_per_rotation: Option<f64>,

    /// Tocks per T gate.
    #[arg(long)]
    pub tocks_per_t: Option<f64>,

    /// T gates per rotation per precision bit.
    #[arg(long)]
    pub t_per_precision_bit: Option<f64>,
}

pub fn run(args: &ResourcesArgs) -> Result<(CommandOutput, Delivery), CliError> {
    let file = FileConfig::load(&args.common)?;
    let params = resolve_model(&args.model, &file)?;
    check_register(&params)?;
    let defaults = BudgetConfig::default();
    let cfg = BudgetConfig {
        eps_total: pick(args.eps_total, file.eps_total, defaults.eps_total),
        p_phys: pick(args.p_phys, file.p_phys, defaults.p_phys),
        overestimation_factor: pick(
            args.overestimation,
            file.overestimation,
            defaults.overestimation_factor,
        ),
        ..defaults
    };
    cfg.validate().map_err(map_resource)?;
    let layout_defaults = LayoutModel::default();
    let layout = LayoutModel {
        patches_per_device: pick(
            args.patches_per_device,
            file.patches_per_device,
            layout_defaults.patches_per_device,
        ),
        compute_devices: pick(
            args.compute_devices,
            file.compute_devices,
            layout_defaults.compute_devices,
        ),
        tocks_per_rotation: pick(
            args.tocks_per_rotation,
            file.tocks_per_rotation,
            layout_defaults.tocks_per_rotation,
        ),
        tocks_per_t: pick(args.tocks_per_t, file.tocks_per_t, layout_defaults.tocks_per_t),
        t_per_precision_bit: pick(
            args.t_per_precision_bit,
            file.t_per_precision_bit,
            layout_defaults.t_per_precision_bit,
        ),
    };
    let storage = pick(args.storage, file.storage, 1);
    let t = resolve_t_scalar(args.t, &file, 1.0)?;
    let eps = pick(
        args.eps,
        file.eps.as_ref().and_then(|v| v.first().copied()),
        0.1,
    );
    let format = resolve_format(&args.common, &file, OutputFormat::Json);

    let mut plan: Option<CostPlan> = None;
    let (n_rz, n_rz_source) = match pick_opt(args.n_rz, file.n_rz) {
        Some(provided) => (provided, "provided"),
        None => {
            let g = structured_group_count(&params, Picture::Interaction, t);
            let optimized =
                optimize_cost_second_order(&params, g, t, eps).map_err(map_bound)?;
            let raw = optimized.total_cost.ceil() as u64;
            let derated =
                apply_overestimation(raw, cfg.overestimation_factor).map_err(map_resource)?;
            plan = Some(optimized);
            (derated, "derived_from_plan")
        }
    };

    let (volume, volume_source) = match pick_opt(args.volume, file.volume) {
        Some(provided) => (provided, "provided"),
        None => (
            derived_volume(n_rz, storage, &cfg, &layout)?,
            "derived_from_tocks",
        ),
    };

    let report =
        resource_report(n_rz, volume, storage, &cfg, &layout).map_err(map_resource)?;
    let budgets_hold = report.budgets_hold(&cfg);

    let output = CommandOutput {
        name: "resources",
        config: json!({
            "model": params,
            "budget": cfg,
            "layout": layout,
            "storage": storage,
            "t": t,
            "eps": eps,
            "n_rz_source": n_rz_source,
            "volume_source": volume_source,
        }),
        payload: Payload::Report(json!({
            "plan": plan,
            "report": report,
            "budgets_hold": budgets_hold,
        })),
    };
    let delivery = Delivery {
        out: resolve_out(&args.common, &file),
        format,
    };
    Ok((output, delivery))
}

/// Volume implied by the layout model: every device contributes its patch
/// grid for the full tock count of the rotation sequence.
fn derived_volume(
    n_rz: u64,
    storage: u64,
    cfg: &BudgetConfig,
    layout: &LayoutModel,
) -> Result<f64, CliError> {
    if n_rz == 0 {
        return Err(CliError::Config(
            "cannot derive a volume for zero rotations; pass --volume".into(),
        ));
    }
    let alloc = allocate_budget(cfg, n_rz, 1).map_err(map_resource)?;
    let bits = rz_precision_bits(alloc.eps_rz).map_err(map_resource)?.bits;
    let t_per_rotation = layout.t_per_precision_bit * bits as f64;
    let n_t_gates = (n_rz as f64 * t_per_rotation).ceil();
    let tocks = n_rz as f64 * layout.tocks_per_rotation + n_t_gates * layout.tocks_per_t;
    let patches = (layout.compute_devices + storage) * layout.patches_per_device;
    Ok(tocks * patches as f64)
}

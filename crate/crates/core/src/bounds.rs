//! Closed-form Trotter error bounds, time-discretization slice counts, and
//! the cost-allocation optimizers that balance slicing against product-
//! formula stepping in the interaction picture.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::hamiltonian::term_counts;
use crate::model::ModelParams;
use crate::partition::Picture;

#[derive(Debug, Error, PartialEq)]
pub enum BoundError {
    #[error("group count must be at least 1")]
    ZeroGroups,
    #[error("step count must be at least 1")]
    ZeroSteps,
    #[error("tolerance must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("duration must be non-negative, got {0}")]
    NegativeDuration(f64),
    #[error("product-formula order must be 1 or 2, got {0}")]
    UnsupportedOrder(u8),
}

/// One evaluated error bound together with the scalars that entered it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub picture: Picture,
    pub order: u8,
    /// The bound value; an upper estimate on the operator error.
    pub epsilon_bound: f64,
    /// Total evolution time (Schroedinger) or slice width (interaction).
    pub duration: f64,
    pub n_t: u64,
    pub g: usize,
    /// Intermediate quantities for auditing, keyed by name.
    pub scalars: BTreeMap<String, f64>,
}

/// Norm bounds on the time derivative of the interaction-picture
/// Hamiltonian and related commutator quantities.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DerivativeNorms {
    /// Bound on the derivative norm.
    pub a: f64,
    /// Bound on the second-derivative norm.
    pub hpp: f64,
    /// Bound on the derivative-commutator norm.
    pub comm: f64,
}

/// A slicing/stepping allocation with its cost accounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostPlan {
    pub order: u8,
    /// Optimal split of the error budget toward time discretization;
    /// zero on the degenerate (time-independent) path.
    pub x_opt: f64,
    /// Number of time slices.
    pub l: u64,
    /// Product-formula steps per slice.
    pub n_t: u64,
    /// Pauli exponentials per slice step.
    pub per_step_exponentials: u64,
    /// `l * n_t * per_step_exponentials`.
    pub total_cost: f64,
    /// The continuous-valued cost bound before any ceiling.
    pub continuous_cost: f64,
    pub degenerate: bool,
    pub scalars: BTreeMap<String, f64>,
}

/// Rotation-count record for Schroedinger-picture product formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateCost {
    pub order: u8,
    pub n_t: u64,
    /// Rotations per step: `N_Z + N_P` (order 1) or `2 (N_Z + N_P)`
    /// (order 2).
    pub per_step: u64,
    pub cost: u64,
}

fn check_common(g: usize, duration: f64, n_t: u64) -> Result<(), BoundError> {
    if g == 0 {
        return Err(BoundError::ZeroGroups);
    }
    if n_t == 0 {
        return Err(BoundError::ZeroSteps);
    }
    if duration < 0.0 {
        return Err(BoundError::NegativeDuration(duration));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<(), BoundError> {
    if eps > 0.0 {
        Ok(())
    } else {
        Err(BoundError::NonPositiveEpsilon(eps))
    }
}

fn ceil_at_least_one(x: f64) -> u64 {
    (x.ceil() as u64).max(1)
}

struct FirstOrderParts {
    intra: f64,
    cross_half: f64,
    cross_heavy: f64,
}

impl FirstOrderParts {
    fn total(&self) -> f64 {
        self.intra + self.cross_half + self.cross_heavy
    }
}

fn first_order_parts(params: &ModelParams, g: usize) -> FirstOrderParts {
    let d = params.derive();
    let nf = params.n_modes() as f64;
    let k = params.trunc_bits() as f64;
    let n = d.n as f64;
    let gf = g as f64;
    FirstOrderParts {
        intra: d.gamma_max.powi(2) * d.lambda_k.powi(2) * nf.powi(2) * k.powi(2) * (gf - 1.0)
            / (72.0 * gf),
        cross_half: 0.5 * nf * d.omega_max * d.gamma_max * n.sqrt(),
        cross_heavy: nf * d.omega_max * d.gamma_max * n.powf(1.5),
    }
}

struct SecondOrderParts {
    intra: f64,
    cross: f64,
}

impl SecondOrderParts {
    fn total(&self) -> f64 {
        self.intra + self.cross
    }
}

fn second_order_parts(params: &ModelParams, g: usize) -> SecondOrderParts {
    let d = params.derive();
    let nf = params.n_modes() as f64;
    let k = params.trunc_bits() as f64;
    let n = d.n as f64;
    let gf = g as f64;
    SecondOrderParts {
        intra: d.gamma_max.powi(3)
            * 2.0
            * d.lambda_k.powi(3)
            * nf.powi(3)
            * k.powi(3)
            * (gf - 1.0)
            * (gf - 2.0)
            / (12.0 * 324.0 * gf * gf),
        cross: (1.0 + 2.0 * n)
            * n.sqrt()
            * nf
            * d.omega_max
            * d.gamma_max
            * (2.0 * n.sqrt() * nf * d.gamma_max + 0.5 * (1.0 + 2.0 * n * nf) * d.omega_max)
            / 12.0,
    }
}

fn interaction_prefactor(params: &ModelParams, g: usize) -> f64 {
    let d = params.derive();
    let nf = params.n_modes() as f64;
    let k = params.trunc_bits() as f64;
    let gf = g as f64;
    d.gamma_max.powi(2) * d.lambda_k.powi(2) * nf.powi(2) * k.powi(2) * (gf - 1.0) / (18.0 * gf)
}

fn base_scalars(params: &ModelParams, g: usize) -> BTreeMap<String, f64> {
    let d = params.derive();
    let mut s = BTreeMap::new();
    s.insert("lambda_k".into(), d.lambda_k);
    s.insert("gamma_max".into(), d.gamma_max);
    s.insert("omega_max".into(), d.omega_max);
    s.insert("delta_max".into(), d.delta_max);
    s.insert("n".into(), d.n as f64);
    s.insert("g".into(), g as f64);
    s
}

/// First-order Schroedinger-picture bound: `(T^2 / N_T) * B` with `B` the
/// sum of an intra-group commutator part and two free/interaction cross
/// parts.
pub fn first_order_bound_schrodinger(
    params: &ModelParams,
    g: usize,
    t_total: f64,
    n_t: u64,
) -> Result<BoundReport, BoundError> {
    check_common(g, t_total, n_t)?;
    let parts = first_order_parts(params, g);
    let b = parts.total();
    let mut scalars = base_scalars(params, g);
    scalars.insert("B".into(), b);
    scalars.insert("B_intra".into(), parts.intra);
    scalars.insert("B_cross_half".into(), parts.cross_half);
    scalars.insert("B_cross_heavy".into(), parts.cross_heavy);
    Ok(BoundReport {
        picture: Picture::Schrodinger,
        order: 1,
        epsilon_bound: t_total * t_total / n_t as f64 * b,
        duration: t_total,
        n_t,
        g,
        scalars,
    })
}

/// Second-order Schroedinger-picture bound: `(T^3 / N_T^2) * C`.
pub fn second_order_bound_schrodinger(
    params: &ModelParams,
    g: usize,
    t_total: f64,
    n_t: u64,
) -> Result<BoundReport, BoundError> {
    check_common(g, t_total, n_t)?;
    let parts = second_order_parts(params, g);
    let c = parts.total();
    let mut scalars = base_scalars(params, g);
    scalars.insert("C".into(), c);
    scalars.insert("C_intra".into(), parts.intra);
    scalars.insert("C_cross".into(), parts.cross);
    Ok(BoundReport {
        picture: Picture::Schrodinger,
        order: 2,
        epsilon_bound: t_total.powi(3) / (n_t as f64).powi(2) * c,
        duration: t_total,
        n_t,
        g,
        scalars,
    })
}

/// First-order bound for one frozen interaction-picture slice of width
/// `dt`: `(dt^2 / N_T) * gamma_max^2 Lambda_k^2 N_F^2 k^2 (G-1) / (18 G)`.
pub fn first_order_bound_interaction(
    params: &ModelParams,
    g: usize,
    dt: f64,
    n_t: u64,
) -> Result<BoundReport, BoundError> {
    check_common(g, dt, n_t)?;
    let pref = interaction_prefactor(params, g);
    let mut scalars = base_scalars(params, g);
    scalars.insert("B_interaction".into(), pref);
    Ok(BoundReport {
        picture: Picture::Interaction,
        order: 1,
        epsilon_bound: dt * dt / n_t as f64 * pref,
        duration: dt,
        n_t,
        g,
        scalars,
    })
}

/// Norm bounds controlling the time discretization of the interaction
/// picture.
pub fn derivative_norm_bounds(params: &ModelParams) -> DerivativeNorms {
    let d = params.derive();
    let n = d.n as f64;
    let sum_gd: f64 = params
        .couplings()
        .iter()
        .zip(&d.delta)
        .map(|(g, dl)| (g * dl).abs())
        .sum();
    let sum_gd2: f64 = params
        .couplings()
        .iter()
        .zip(&d.delta)
        .map(|(g, dl)| g.abs() * dl * dl)
        .sum();
    let sum_g: f64 = params.couplings().iter().map(|g| g.abs()).sum();
    DerivativeNorms {
        a: 2.0 * n.sqrt() * sum_gd,
        hpp: 2.0 * n.sqrt() * sum_gd2,
        comm: 8.0 * n * sum_gd * sum_g,
    }
}

/// Number of slices needed to hold the time-discretization error of the
/// interaction picture below `eps`.
pub fn time_slice_count(params: &ModelParams, t: f64, eps: f64, order: u8) -> Result<u64, BoundError> {
    time_slice_count_with(params, t, eps, order, false)
}

/// As [`time_slice_count`]; `halved` selects the tighter `t^2 / (2 eps)`
/// first-order form instead of the default sufficient condition.
pub fn time_slice_count_with(
    params: &ModelParams,
    t: f64,
    eps: f64,
    order: u8,
    halved: bool,
) -> Result<u64, BoundError> {
    check_eps(eps)?;
    if t < 0.0 {
        return Err(BoundError::NegativeDuration(t));
    }
    let norms = derivative_norm_bounds(params);
    match order {
        1 => {
            let denom = if halved { 2.0 * eps } else { eps };
            Ok(ceil_at_least_one(norms.a * t * t / denom))
        }
        2 => {
            let k = norms.hpp / 24.0 + norms.comm / 12.0;
            Ok(ceil_at_least_one((k * t.powi(3) / eps).sqrt()))
        }
        other => Err(BoundError::UnsupportedOrder(other)),
    }
}

/// Optimal first-order allocation: splits the error budget between slicing
/// and stepping so that a single product-formula step per slice suffices.
pub fn optimize_cost_first_order(
    params: &ModelParams,
    g: usize,
    t: f64,
    eps: f64,
) -> Result<CostPlan, BoundError> {
    check_common(g, t, 1)?;
    check_eps(eps)?;
    let norms = derivative_norm_bounds(params);
    let b = interaction_prefactor(params, g);
    let n_i = term_counts(params).n_i_generic as u64;
    let mut scalars = base_scalars(params, g);
    scalars.insert("A".into(), norms.a);
    scalars.insert("B_interaction".into(), b);
    scalars.insert("N_I".into(), n_i as f64);

    if norms.a == 0.0 {
        let n_t = ceil_at_least_one(t * t * b / eps);
        return Ok(CostPlan {
            order: 1,
            x_opt: 0.0,
            l: 1,
            n_t,
            per_step_exponentials: n_i,
            total_cost: (n_t * n_i) as f64,
            continuous_cost: t * t * b * n_i as f64 / eps,
            degenerate: true,
            scalars,
        });
    }

    let s = norms.a + 2.0 * b;
    let l = ceil_at_least_one(s * t * t / (2.0 * eps));
    Ok(CostPlan {
        order: 1,
        x_opt: norms.a / s,
        l,
        n_t: 1,
        per_step_exponentials: n_i,
        total_cost: (l * n_i) as f64,
        continuous_cost: t * t * s * n_i as f64 / (2.0 * eps),
        degenerate: false,
        scalars,
    })
}

/// Optimal second-order allocation with midpoint slicing.
pub fn optimize_cost_second_order(
    params: &ModelParams,
    g: usize,
    t: f64,
    eps: f64,
) -> Result<CostPlan, BoundError> {
    check_common(g, t, 1)?;
    check_eps(eps)?;
    let d = params.derive();
    let n = d.n as f64;
    let nf = params.n_modes() as f64;
    let k_m = n.sqrt() * nf * d.gamma_max * d.delta_max.powi(2) / 12.0
        + 2.0 * n * nf.powi(2) * d.gamma_max.powi(2) * d.delta_max / 3.0;
    let c = second_order_parts(params, g).total();
    let n_i = term_counts(params).n_i_generic as u64;
    let m_s2 = 2 * n_i - 1;
    let mut scalars = base_scalars(params, g);
    scalars.insert("K_M".into(), k_m);
    scalars.insert("C".into(), c);
    scalars.insert("N_I".into(), n_i as f64);
    scalars.insert("M_S2".into(), m_s2 as f64);

    if d.delta_max == 0.0 {
        let n_t = ceil_at_least_one((c * t.powi(3) / eps).sqrt());
        return Ok(CostPlan {
            order: 2,
            x_opt: 0.0,
            l: 1,
            n_t,
            per_step_exponentials: m_s2,
            total_cost: (n_t * m_s2) as f64,
            continuous_cost: (c * t.powi(3) / eps).sqrt() * m_s2 as f64,
            degenerate: true,
            scalars,
        });
    }

    let l = ceil_at_least_one((k_m + c).sqrt() * t.powf(1.5) / eps.sqrt());
    Ok(CostPlan {
        order: 2,
        x_opt: k_m / (k_m + c),
        l,
        n_t: 1,
        per_step_exponentials: m_s2,
        total_cost: (l * m_s2) as f64,
        continuous_cost: t.powf(1.5) * (k_m + c).sqrt() * m_s2 as f64 / eps.sqrt(),
        degenerate: false,
        scalars,
    })
}

/// Rotation counts for a Schroedinger-picture simulation to accuracy `eps`.
pub fn gate_cost_schrodinger(
    params: &ModelParams,
    g: usize,
    t_total: f64,
    eps: f64,
    order: u8,
) -> Result<GateCost, BoundError> {
    check_common(g, t_total, 1)?;
    check_eps(eps)?;
    let counts = term_counts(params);
    let rotations = (counts.n_z + counts.n_p) as u64;
    match order {
        1 => {
            let b = first_order_parts(params, g).total();
            let n_t = ceil_at_least_one(t_total * t_total * b / eps);
            Ok(GateCost {
                order: 1,
                n_t,
                per_step: rotations,
                cost: rotations * n_t,
            })
        }
        2 => {
            let c = second_order_parts(params, g).total();
            let n_t = ceil_at_least_one(t_total.powf(1.5) * (c / eps).sqrt());
            Ok(GateCost {
                order: 2,
                n_t,
                per_step: 2 * rotations,
                cost: 2 * rotations * n_t,
            })
        }
        other => Err(BoundError::UnsupportedOrder(other)),
    }
}

/// Analytic group count of the structured partitioner, usable as the
/// default `G` without building the sum: 2k whenever the interaction
/// content is real-shaped (Schroedinger picture, zero time, or full
/// resonance) or there is a single mode; 4k otherwise.
pub fn structured_group_count(params: &ModelParams, picture: Picture, t: f64) -> usize {
    let k = params.trunc_bits() as usize;
    let real_shaped = matches!(picture, Picture::Schrodinger)
        || t == 0.0
        || params.derive().m0 == params.n_modes();
    if real_shaped || params.n_modes() == 1 {
        2 * k
    } else {
        4 * k
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_interaction, build_schrodinger};
    use crate::partition::partition_structured;

    fn table_instance() -> ModelParams {
        ModelParams::uniform(3, 2, 1.0, 1.0, 1.0).unwrap()
    }

    fn detuned_pair() -> ModelParams {
        ModelParams::new(2, 2, vec![2.0, 2.0], 1.0, vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn first_order_table_values() {
        let params = table_instance();
        let r1 = first_order_bound_schrodinger(&params, 8, 1.0, 1).unwrap();
        assert!((r1.epsilon_bound - 63.52873607791164).abs() < 1e-9);
        assert!((r1.scalars["B_intra"] - 45.342202598438426).abs() < 1e-9);
        assert!((r1.scalars["B_cross_half"] - 2.598076211353316).abs() < 1e-12);
        assert!((r1.scalars["B_cross_heavy"] - 15.588457268119896).abs() < 1e-12);

        let r2 = first_order_bound_schrodinger(&params, 8, 1.0, 2).unwrap();
        assert_eq!(r2.epsilon_bound, r1.epsilon_bound / 2.0);
        let r128 = first_order_bound_schrodinger(&params, 8, 1.0, 128).unwrap();
        assert!((r128.epsilon_bound - 0.4963182506086847).abs() < 1e-12);
    }

    #[test]
    fn second_order_table_values() {
        let params = table_instance();
        let r1 = second_order_bound_schrodinger(&params, 8, 1.0, 1).unwrap();
        assert!((r1.epsilon_bound - 137.2285169591561).abs() < 1e-9);
        assert!((r1.scalars["C_intra"] - 76.93317228332353).abs() < 1e-9);
        assert!((r1.scalars["C_cross"] - 60.29534467583259).abs() < 1e-9);

        let r4 = second_order_bound_schrodinger(&params, 8, 1.0, 4).unwrap();
        assert!((r4.epsilon_bound - 137.2285169591561 / 16.0).abs() < 1e-10);
        let r2 = second_order_bound_schrodinger(&params, 8, 1.0, 2).unwrap();
        assert_eq!(r2.epsilon_bound, r1.epsilon_bound / 4.0);
    }

    #[test]
    fn zero_time_gives_zero_bound() {
        let params = table_instance();
        assert_eq!(
            first_order_bound_schrodinger(&params, 8, 0.0, 1)
                .unwrap()
                .epsilon_bound,
            0.0
        );
        assert_eq!(
            second_order_bound_schrodinger(&params, 8, 0.0, 1)
                .unwrap()
                .epsilon_bound,
            0.0
        );
        assert_eq!(
            first_order_bound_interaction(&params, 8, 0.0, 1)
                .unwrap()
                .epsilon_bound,
            0.0
        );
    }

    #[test]
    fn single_group_drops_intra_part() {
        let params = table_instance();
        let r = first_order_bound_schrodinger(&params, 1, 1.0, 1).unwrap();
        assert_eq!(r.scalars["B_intra"], 0.0);
        assert!(
            (r.epsilon_bound - (2.598076211353316 + 15.588457268119896)).abs() < 1e-12
        );
        assert_eq!(
            first_order_bound_schrodinger(&params, 0, 1.0, 1),
            Err(BoundError::ZeroGroups)
        );
    }

    #[test]
    fn interaction_bound_is_four_times_intra_part() {
        let params = detuned_pair();
        let g = 8;
        let intra = first_order_parts(&params, g).intra;
        let r = first_order_bound_interaction(&params, g, 0.9, 1).unwrap();
        assert!((r.epsilon_bound - 4.0 * intra * 0.81).abs() < 1e-12 * r.epsilon_bound);
    }

    #[test]
    fn derivative_norms_match_definitions() {
        let resonant = ModelParams::uniform(2, 2, 1.0, 1.0, 0.7).unwrap();
        let n0 = derivative_norm_bounds(&resonant);
        assert_eq!((n0.a, n0.hpp, n0.comm), (0.0, 0.0, 0.0));

        let single = ModelParams::new(1, 2, vec![2.0], 1.0, vec![1.0]).unwrap();
        let n1 = derivative_norm_bounds(&single);
        assert!((n1.a - 2.0 * 3.0f64.sqrt()).abs() < 1e-12);
        assert!((n1.hpp - 2.0 * 3.0f64.sqrt()).abs() < 1e-12);
        assert!((n1.comm - 24.0).abs() < 1e-12);

        let mixed = ModelParams::new(2, 1, vec![1.5, 0.25], 1.0, vec![0.5, 2.0]).unwrap();
        let nm = derivative_norm_bounds(&mixed);
        let sum_g = 2.5;
        let n = 1.0f64;
        assert!(nm.comm <= 2.0 * nm.a * 2.0 * n.sqrt() * sum_g * (1.0 + 1e-12));
    }

    #[test]
    fn slice_counts_scale_with_tolerance() {
        let single = ModelParams::new(1, 2, vec![2.0], 1.0, vec![1.0]).unwrap();
        assert_eq!(time_slice_count(&single, 1.0, 0.3, 1).unwrap(), 12);
        assert_eq!(time_slice_count(&single, 1.0, 0.15, 1).unwrap(), 24);
        assert_eq!(
            time_slice_count_with(&single, 1.0, 0.3, 1, true).unwrap(),
            6
        );
        assert_eq!(time_slice_count(&single, 1.0, 0.1, 2).unwrap(), 5);
        assert_eq!(time_slice_count(&single, 1.0, 0.025, 2).unwrap(), 10);

        let resonant = ModelParams::uniform(2, 2, 1.0, 1.0, 0.7).unwrap();
        assert_eq!(time_slice_count(&resonant, 5.0, 1e-4, 1).unwrap(), 1);
        assert_eq!(time_slice_count(&resonant, 5.0, 1e-4, 2).unwrap(), 1);

        assert_eq!(
            time_slice_count(&single, 1.0, 0.0, 1),
            Err(BoundError::NonPositiveEpsilon(0.0))
        );
        assert_eq!(
            time_slice_count(&single, 1.0, 0.1, 3),
            Err(BoundError::UnsupportedOrder(3))
        );
    }

    #[test]
    fn first_order_plan_matches_hand_computation() {
        let params = detuned_pair();
        let plan = optimize_cost_first_order(&params, 8, 1.0, 0.1).unwrap();
        assert!(!plan.degenerate);
        assert_eq!(plan.n_t, 1);
        assert_eq!(plan.l, 841);
        assert_eq!(plan.per_step_exponentials, 32);
        assert_eq!(plan.total_cost, 26912.0);
        assert!((plan.x_opt - 0.041203760915016395).abs() < 1e-15);
        assert!((plan.scalars["A"] - 6.928203230275509).abs() < 1e-12);
        assert!((plan.scalars["B_interaction"] - 80.60836017500164).abs() < 1e-12);
        assert!((plan.continuous_cost - 26903.1877728446).abs() < 1e-6);
        assert!(plan.x_opt > 0.0 && plan.x_opt < 1.0);
    }

    #[test]
    fn first_order_plan_scales_quadratically_in_time() {
        let params = detuned_pair();
        let p1 = optimize_cost_first_order(&params, 8, 1.0, 0.1).unwrap();
        let p2 = optimize_cost_first_order(&params, 8, 2.0, 0.1).unwrap();
        assert!((p2.continuous_cost / p1.continuous_cost - 4.0).abs() < 1e-12);
    }

    #[test]
    fn resonant_first_order_plan_degenerates_to_stepping() {
        let params = ModelParams::uniform(2, 2, 1.0, 1.0, 1.0).unwrap();
        let plan = optimize_cost_first_order(&params, 8, 1.0, 0.1).unwrap();
        assert!(plan.degenerate);
        assert_eq!(plan.l, 1);
        assert_eq!(plan.x_opt, 0.0);
        assert_eq!(plan.n_t, 807);
        assert_eq!(plan.per_step_exponentials, 16);
        assert_eq!(plan.total_cost, 807.0 * 16.0);
    }

    #[test]
    fn second_order_plan_matches_hand_computation() {
        let params = detuned_pair();
        let plan = optimize_cost_second_order(&params, 8, 1.0, 0.1).unwrap();
        assert!(!plan.degenerate);
        assert_eq!(plan.n_t, 1);
        assert_eq!(plan.l, 34);
        assert_eq!(plan.per_step_exponentials, 63);
        assert_eq!(plan.total_cost, 34.0 * 63.0);
        assert!((plan.scalars["K_M"] - 8.288675134594813).abs() < 1e-12);
        assert!((plan.scalars["C"] - 103.33388850612957).abs() < 1e-9);
        assert!((plan.x_opt - 0.07425626920085154).abs() < 1e-12);
    }

    #[test]
    fn second_order_plan_tolerance_scaling() {
        let params = detuned_pair();
        let p1 = optimize_cost_second_order(&params, 8, 1.0, 0.1).unwrap();
        let p2 = optimize_cost_second_order(&params, 8, 1.0, 0.025).unwrap();
        assert!((p2.continuous_cost / p1.continuous_cost - 2.0).abs() < 1e-12);
        assert!(p2.l == 2 * p1.l || p2.l + 1 == 2 * p1.l);
    }

    #[test]
    fn resonant_second_order_plan_degenerates() {
        let params = ModelParams::uniform(2, 2, 1.0, 1.0, 1.0).unwrap();
        let plan = optimize_cost_second_order(&params, 8, 1.0, 0.1).unwrap();
        assert!(plan.degenerate);
        assert_eq!(plan.l, 1);
        let c = plan.scalars["C"];
        assert_eq!(plan.n_t, (c / 0.1).sqrt().ceil() as u64);
    }

    #[test]
    fn gate_costs_reproduce_table_steps() {
        let params = table_instance();
        let b = first_order_bound_schrodinger(&params, 8, 1.0, 128)
            .unwrap()
            .epsilon_bound;
        let gc = gate_cost_schrodinger(&params, 8, 1.0, b, 1).unwrap();
        assert_eq!(gc.n_t, 128);
        assert_eq!(gc.per_step, 31);
        assert_eq!(gc.cost, 31 * 128);

        let c = second_order_bound_schrodinger(&params, 8, 1.0, 4)
            .unwrap()
            .epsilon_bound;
        let gc2 = gate_cost_schrodinger(&params, 8, 1.0, c, 2).unwrap();
        assert_eq!(gc2.n_t, 4);
        assert_eq!(gc2.per_step, 62);
        assert_eq!(gc2.cost, 62 * 4);

        let loose = gate_cost_schrodinger(&params, 8, 1.0, 1e6, 1).unwrap();
        assert_eq!(loose.n_t, 1);
    }

    #[test]
    fn gate_cost_monotone_in_time_and_tolerance() {
        let params = table_instance();
        let base = gate_cost_schrodinger(&params, 8, 1.0, 0.1, 1).unwrap();
        let longer = gate_cost_schrodinger(&params, 8, 2.0, 0.1, 1).unwrap();
        let tighter = gate_cost_schrodinger(&params, 8, 1.0, 0.01, 1).unwrap();
        assert!(longer.cost >= base.cost);
        assert!(tighter.cost >= base.cost);
    }

    #[test]
    fn analytic_group_count_matches_partitioner() {
        for nf in 1..=3usize {
            for k in 1..=3u32 {
                let freqs: Vec<f64> = (0..nf).map(|m| 1.3 + 0.3 * m as f64).collect();
                let coups = vec![0.5; nf];
                let params = ModelParams::new(nf, k, freqs, 1.0, coups).unwrap();
                let parts = build_schrodinger(&params);
                for (picture, sum, t) in [
                    (Picture::Schrodinger, parts.h_int.clone(), 0.0),
                    (Picture::Interaction, build_interaction(&params, 0.7), 0.7),
                ] {
                    let actual = partition_structured(&sum, &params, picture, t).group_count();
                    assert_eq!(
                        structured_group_count(&params, picture, t),
                        actual,
                        "nf={nf} k={k} t={t}"
                    );
                }
            }
        }
        let resonant = ModelParams::uniform(2, 2, 1.0, 1.0, 0.4).unwrap();
        assert_eq!(
            structured_group_count(&resonant, Picture::Interaction, 0.7),
            4
        );
    }

    #[test]
    fn input_validation() {
        let params = table_instance();
        assert_eq!(
            first_order_bound_schrodinger(&params, 8, 1.0, 0),
            Err(BoundError::ZeroSteps)
        );
        assert_eq!(
            first_order_bound_schrodinger(&params, 8, -1.0, 1),
            Err(BoundError::NegativeDuration(-1.0))
        );
        assert!(matches!(
            optimize_cost_first_order(&params, 8, 1.0, -0.5),
            Err(BoundError::NonPositiveEpsilon(_))
        ));
        assert_eq!(
            gate_cost_schrodinger(&params, 8, 1.0, 0.1, 5),
            Err(BoundError::UnsupportedOrder(5))
        );
    }
}

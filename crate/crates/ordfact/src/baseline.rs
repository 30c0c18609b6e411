//! Fixed-schedule product-formula factorizations.
//!
//! First-order (Lie–Trotter) and second-order (Strang) schedules over the
//! Hamiltonian's own generators, emitted in the same ordered-factorization
//! format as the greedy search so both can be reported and compared alike.
//! Time-dependent coefficients are sampled at slice midpoints.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::HamiltonianSpec;
use crate::factorize::{OrderedFactorization, Step};
use crate::pulse::PulseParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrotterOrder {
    #[serde(rename = "1")]
    First,
    #[serde(rename = "2")]
    Second,
}

/// Product-formula schedule: `slices` uniform slices of [0, t_final], each
/// expanded into one sub-step per generator (order 1) or a symmetrized
/// forward-then-reverse half-step sweep (order 2). Sub-steps subdivide the
/// slice equally so the step list stays contiguous.
pub fn trotter(
    spec: &HamiltonianSpec,
    t_final: f64,
    slices: usize,
    order: TrotterOrder,
) -> Result<OrderedFactorization> {
    if slices < 1 {
        return Err(Error::InvalidSliceCount);
    }
    if !t_final.is_finite() || t_final <= 0.0 {
        return Err(Error::ParamOutOfBounds {
            reason: format!("t_final must be positive, got {t_final}"),
        });
    }
    let n_gens = spec.generators.len();
    let delta = t_final / slices as f64;

    // (generator_id, pulse area) per slice, in schedule order
    let schedule_for = |midpoint: f64| -> Result<Vec<(usize, f64)>> {
        let mut sweep = Vec::with_capacity(n_gens);
        for (n, coeff) in spec.coefficients.iter().enumerate() {
            sweep.push((n, coeff.eval(midpoint)?));
        }
        Ok(match order {
            TrotterOrder::First => sweep
                .iter()
                .map(|&(n, h)| (n, h * delta))
                .collect(),
            TrotterOrder::Second => sweep
                .iter()
                .map(|&(n, h)| (n, h * delta / 2.0))
                .chain(sweep.iter().rev().map(|&(n, h)| (n, h * delta / 2.0)))
                .collect(),
        })
    };

    let subs_per_slice = match order {
        TrotterOrder::First => n_gens,
        TrotterOrder::Second => 2 * n_gens,
    };
    let total = slices * subs_per_slice;
    let mut steps = Vec::with_capacity(total);
    for k in 0..slices {
        let midpoint = (k as f64 + 0.5) * delta;
        for (sub, (generator_id, area)) in schedule_for(midpoint)?.into_iter().enumerate() {
            let global = k * subs_per_slice + sub;
            let t_start = t_final * global as f64 / total as f64;
            let t_end = t_final * (global + 1) as f64 / total as f64;
            let sub_dt = t_end - t_start;
            let alpha = area / sub_dt;
            steps.push(Step {
                index: global + 1,
                generator_id,
                params: PulseParams { alpha, n: None },
                t_start,
                t_end,
                f_value: alpha * sub_dt,
            });
        }
    }
    Ok(OrderedFactorization {
        steps,
        t_final,
        dim: spec.dim,
    })
}

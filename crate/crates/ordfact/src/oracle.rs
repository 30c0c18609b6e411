//! Brute-force search references.
//!
//! Exhaustive grid enumeration over (end time, generator, amplitude)
//! triples, deliberately slow and simple, used to validate the greedy
//! search. Shipped behind the `verify` CLI mode so reported numbers can be
//! reproduced outside the test suite.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{target_at, PropagatorTable};
use crate::factorize::{partial_product, Step, TargetMode};
use crate::lie::LieBasis;
use crate::matrix::{herm_expm, score, MatchMetric, SquareMatrix};
use crate::pulse::{eval_pulse, PulseFamily};

const MAX_LEAVES: u64 = 10_000_000;

/// Argmax of a brute-force enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleChoice {
    pub t_end: f64,
    pub generator_id: usize,
    pub alpha: f64,
}

fn check_grids(t_grid: &[f64], alpha_grid: &[f64], candidates: &LieBasis) -> Result<()> {
    if t_grid.is_empty() || alpha_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    Ok(())
}

/// Exhaustive single-step search over all (t̃, generator, α) grid triples.
/// Returns the maximum score and the first-in-enumeration-order argmax
/// (generators outer, then times, then amplitudes).
#[allow(clippy::too_many_arguments)]
pub fn brute_force_step(
    table: &PropagatorTable,
    prior: &[Step],
    candidates: &LieBasis,
    family: &PulseFamily,
    metric: MatchMetric,
    target_mode: TargetMode,
    t_grid: &[f64],
    alpha_grid: &[f64],
) -> Result<(f64, OracleChoice)> {
    check_grids(t_grid, alpha_grid, candidates)?;
    let t_prev = prior.last().map_or(0.0, |s| s.t_end);
    let prior_product = partial_product(prior, &candidates.elements)?;
    let final_target = &table.unitaries[table.step_count];

    let mut best: Option<(f64, OracleChoice)> = None;
    for (gen_id, gen) in candidates.elements.iter().enumerate() {
        for &t_raw in t_grid {
            let (running_target, t_end) = target_at(table, t_raw)?;
            if t_end <= t_prev {
                continue;
            }
            let target = match target_mode {
                TargetMode::Running => running_target,
                TargetMode::Final => final_target,
            };
            let dt = t_end - t_prev;
            for &alpha in alpha_grid {
                let f = eval_pulse(family, &family.params(alpha), dt)?;
                let candidate = herm_expm(gen, f)?.mul(&prior_product);
                let s = score(target, &candidate, metric)?;
                if best.as_ref().is_none_or(|(b, _)| s > *b) {
                    best = Some((
                        s,
                        OracleChoice {
                            t_end,
                            generator_id: gen_id,
                            alpha,
                        },
                    ));
                }
            }
        }
    }
    best.ok_or(Error::EmptyGrid)
}

/// Best final score over ALL time-ordered sequences of at most `depth`
/// grid-discretized steps (strictly increasing end times).
#[allow(clippy::too_many_arguments)]
pub fn brute_force_sequence(
    table: &PropagatorTable,
    candidates: &LieBasis,
    family: &PulseFamily,
    metric: MatchMetric,
    target_mode: TargetMode,
    depth: usize,
    t_grid: &[f64],
    alpha_grid: &[f64],
) -> Result<f64> {
    check_grids(t_grid, alpha_grid, candidates)?;
    let per_level = (t_grid.len() * candidates.len() * alpha_grid.len()) as u64;
    let leaves = per_level.checked_pow(depth as u32).unwrap_or(u64::MAX);
    if leaves > MAX_LEAVES {
        return Err(Error::SearchSpaceTooLarge {
            leaves,
            limit: MAX_LEAVES,
        });
    }

    // Snap the time grid once; keep strictly increasing unique times.
    let mut times: Vec<f64> = Vec::new();
    for &t_raw in t_grid {
        let (_, t) = target_at(table, t_raw)?;
        if t > 0.0 && times.last().is_none_or(|&last| t > last) {
            times.push(t);
        }
    }
    if times.is_empty() {
        return Err(Error::EmptyGrid);
    }

    let final_target = &table.unitaries[table.step_count];
    let mut best = f64::NEG_INFINITY;

    struct Ctx<'a> {
        table: &'a PropagatorTable,
        candidates: &'a LieBasis,
        family: &'a PulseFamily,
        metric: MatchMetric,
        target_mode: TargetMode,
        times: Vec<f64>,
        final_target: &'a SquareMatrix,
        alpha_grid: &'a [f64],
    }

    fn recurse(
        ctx: &Ctx,
        product: &SquareMatrix,
        t_prev: f64,
        depth_left: usize,
        best: &mut f64,
    ) -> Result<()> {
        if depth_left == 0 {
            return Ok(());
        }
        for &t_end in &ctx.times {
            if t_end <= t_prev {
                continue;
            }
            let dt = t_end - t_prev;
            let (running_target, _) = target_at(ctx.table, t_end)?;
            let target = match ctx.target_mode {
                TargetMode::Running => running_target,
                TargetMode::Final => ctx.final_target,
            };
            for gen in &ctx.candidates.elements {
                for &alpha in ctx.alpha_grid {
                    let f = eval_pulse(ctx.family, &ctx.family.params(alpha), dt)?;
                    let extended = herm_expm(gen, f)?.mul(product);
                    let s = score(target, &extended, ctx.metric)?;
                    if s > *best {
                        *best = s;
                    }
                    recurse(ctx, &extended, t_end, depth_left - 1, best)?;
                }
            }
        }
        Ok(())
    }

    let ctx = Ctx {
        table,
        candidates,
        family,
        metric,
        target_mode,
        times,
        final_target,
        alpha_grid,
    };
    recurse(
        &ctx,
        &SquareMatrix::identity(table.dim()),
        0.0,
        depth,
        &mut best,
    )?;
    Ok(best)
}

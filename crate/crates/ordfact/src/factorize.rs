//! Greedy time-ordered factorization.
//!
//! Starting from the empty product, each round searches over (end time on
//! the propagator grid, candidate generator, pulse amplitude) for the
//! elementary exponential that best advances agreement with the target,
//! accepts it if the match score improved, and stops otherwise. The result
//! is a contiguous, time-ordered step list with its Δ trace and an outcome
//! classification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{target_at, PropagatorTable};
use crate::lie::LieBasis;
use crate::matrix::{frob_distance, score, HermEig, MatchMetric, SquareMatrix};
use crate::pulse::{eval_pulse, PulseFamily, PulseParams};

/// One elementary exponential exp(−i·F·G) over a contiguous time slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    /// 1-based position in the factorization.
    pub index: usize,
    /// Index into the candidate basis.
    pub generator_id: usize,
    pub params: PulseParams,
    pub t_start: f64,
    pub t_end: f64,
    /// F evaluated at the slice duration.
    pub f_value: f64,
}

/// Time-ordered step list: contiguous slices covering [0, last t_end].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderedFactorization {
    pub steps: Vec<Step>,
    pub t_final: f64,
    pub dim: usize,
}

/// Result of one round of the inner maximization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSearchResult {
    /// Best score Δ_m found this round, in [0, 1].
    pub delta: f64,
    pub t_end: f64,
    pub params: PulseParams,
    pub generator_id: usize,
    /// Slice at least `delta_t_min` long with a non-constant pulse (α ≠ 0).
    pub nontrivial_slice: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Success,
    Halt,
    BudgetExhausted,
}

/// Which target the growing product is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetMode {
    /// Compare against U at the candidate step's end time.
    Running,
    /// Always compare against U(t_final).
    Final,
}

/// Amplitude search strategy.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaSearch {
    /// 33-point coarse scan followed by golden-section refinement.
    GoldenRefined,
    /// Evaluate exactly these amplitudes; used when comparing against
    /// grid-enumeration oracles.
    Grid(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorizeConfig {
    pub max_steps: usize,
    pub tol_success: f64,
    /// Minimum slice duration for the nontrivial-slice flag; defaults to
    /// one grid spacing.
    pub delta_t_min: Option<f64>,
    pub target_mode: TargetMode,
    pub metric: MatchMetric,
    pub alpha_search: AlphaSearch,
}

impl Default for FactorizeConfig {
    fn default() -> Self {
        Self {
            max_steps: 16,
            tol_success: 1e-6,
            delta_t_min: None,
            target_mode: TargetMode::Running,
            metric: MatchMetric::Frobenius,
            alpha_search: AlphaSearch::GoldenRefined,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub factorization: OrderedFactorization,
    /// Δ_m for each accepted step, strictly increasing.
    pub delta_trace: Vec<f64>,
    pub outcome: Outcome,
    /// Frobenius distance between the assembled product and U(t_final).
    pub final_distance: f64,
    pub per_step: Vec<StepSearchResult>,
}

const COARSE_SCAN_POINTS: usize = 33;
const GOLDEN_XTOL: f64 = 1e-10;
/// Scores closer than this are treated as tied, so that tie-breaking (and
/// in particular the preference for later end times) is not decided by
/// refinement noise.
const TIE_EPS: f64 = 1e-9;

/// ∏_q exp(−i·F_q·G_{p_q}) with later steps applied on the left
/// (right-to-left time order); the empty list gives the identity.
pub fn partial_product(steps: &[Step], generators: &[SquareMatrix]) -> Result<SquareMatrix> {
    if generators.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let dim = generators[0].dim();
    let mut product = SquareMatrix::identity(dim);
    for step in steps {
        let gen = generators
            .get(step.generator_id)
            .ok_or(Error::BadGeneratorId {
                id: step.generator_id,
                len: generators.len(),
            })?;
        product = crate::matrix::herm_expm(gen, step.f_value)?.mul(&product);
    }
    Ok(product)
}

/// Golden-section maximization of `f` on [a, b] to an x-tolerance.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > xtol {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Maximize the score over α for one fixed (end time, generator) pair.
/// Returns (alpha, score). Refinement never returns less than the scan best.
fn maximize_alpha(
    objective: &impl Fn(f64) -> f64,
    family: &PulseFamily,
    search: &AlphaSearch,
) -> (f64, f64) {
    match search {
        AlphaSearch::Grid(values) => {
            let mut best = (values[0], objective(values[0]));
            for &alpha in &values[1..] {
                let s = objective(alpha);
                if s > best.1 || (s == best.1 && alpha.abs() < best.0.abs()) {
                    best = (alpha, s);
                }
            }
            best
        }
        AlphaSearch::GoldenRefined => {
            let (lo, hi) = (family.alpha_min, family.alpha_max);
            let span = hi - lo;
            let mut best = (lo, objective(lo));
            for i in 1..COARSE_SCAN_POINTS {
                let alpha = lo + span * i as f64 / (COARSE_SCAN_POINTS - 1) as f64;
                let s = objective(alpha);
                if s > best.1 || (s == best.1 && alpha.abs() < best.0.abs()) {
                    best = (alpha, s);
                }
            }
            let cell = span / (COARSE_SCAN_POINTS - 1) as f64;
            let a = (best.0 - cell).max(lo);
            let b = (best.0 + cell).min(hi);
            let (alpha, s) = golden_max(objective, a, b, GOLDEN_XTOL);
            if s > best.1 {
                (alpha, s)
            } else {
                best
            }
        }
    }
}

fn last_grid_index(table: &PropagatorTable, t: f64) -> usize {
    (t / table.spacing()).round() as usize
}

/// One round of the inner maximization over (t̃, generator, α).
///
/// Ties are broken by smallest generator index, then latest end time, then
/// smallest |α|, independently of evaluation order.
pub fn optimize_step(
    table: &PropagatorTable,
    prior: &[Step],
    candidates: &LieBasis,
    family: &PulseFamily,
    config: &FactorizeConfig,
) -> Result<StepSearchResult> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    family.validate()?;
    let t_prev = prior.last().map_or(0.0, |s| s.t_end);
    let idx_prev = last_grid_index(table, t_prev);
    if idx_prev >= table.step_count {
        return Err(Error::NoRemainingGrid);
    }
    let prior_product = partial_product(prior, &candidates.elements)?;
    let eigs: Vec<HermEig> = candidates
        .elements
        .iter()
        .map(|e| e.herm_eig())
        .collect::<Result<_>>()?;
    let delta_t_min = config.delta_t_min.unwrap_or_else(|| table.spacing());

    struct Best {
        delta: f64,
        generator_id: usize,
        t_idx: usize,
        alpha: f64,
    }
    let mut best: Option<Best> = None;

    for t_idx in (idx_prev + 1)..=table.step_count {
        let t_end = table.grid_time(t_idx);
        let dt = t_end - t_prev;
        let target = match config.target_mode {
            TargetMode::Running => &table.unitaries[t_idx],
            TargetMode::Final => &table.unitaries[table.step_count],
        };
        for (gen_id, eig) in eigs.iter().enumerate() {
            let objective = |alpha: f64| -> f64 {
                let f = eval_pulse(family, &family.params(alpha), dt)
                    .expect("alpha within bounds and dt >= 0");
                let candidate = eig.expm(f).mul(&prior_product);
                score(target, &candidate, config.metric)
                    .expect("grid unitaries and exponential products are unitary")
            };
            let (alpha, delta) = maximize_alpha(&objective, family, &config.alpha_search);
            // tie-break within the tie band: smaller generator index, then
            // later end time, then smaller |α|
            let better = match &best {
                None => true,
                Some(b) if delta > b.delta + TIE_EPS => true,
                Some(b) if delta + TIE_EPS < b.delta => false,
                Some(b) => {
                    gen_id < b.generator_id
                        || (gen_id == b.generator_id
                            && (t_idx > b.t_idx
                                || (t_idx == b.t_idx && alpha.abs() < b.alpha.abs())))
                }
            };
            if better {
                best = Some(Best {
                    delta,
                    generator_id: gen_id,
                    t_idx,
                    alpha,
                });
            }
        }
    }

    let best = best.expect("search space nonempty");
    let t_end = table.grid_time(best.t_idx);
    let dt = t_end - t_prev;
    Ok(StepSearchResult {
        delta: best.delta,
        t_end,
        params: family.params(best.alpha),
        generator_id: best.generator_id,
        nontrivial_slice: dt >= delta_t_min && best.alpha != 0.0,
    })
}

/// Run the full greedy protocol until success, the stopping rule, or the
/// step budget.
pub fn run(
    table: &PropagatorTable,
    candidates: &LieBasis,
    family: &PulseFamily,
    config: &FactorizeConfig,
) -> Result<DecompositionReport> {
    let identity = SquareMatrix::identity(table.dim());
    // Δ_0 = score(U(0), I) − 1, so the first round is always eligible.
    let mut delta_prev = score(&table.unitaries[0], &identity, config.metric)? - 1.0;

    let mut steps: Vec<Step> = Vec::new();
    let mut delta_trace: Vec<f64> = Vec::new();
    let mut per_step: Vec<StepSearchResult> = Vec::new();
    let mut outcome = Outcome::BudgetExhausted;

    while steps.len() < config.max_steps {
        let result = optimize_step(table, &steps, candidates, family, config)?;
        if result.delta <= delta_prev {
            // stopping rule: the non-improving step is discarded
            outcome = Outcome::Halt;
            break;
        }
        let t_start = steps.last().map_or(0.0, |s| s.t_end);
        let dt = result.t_end - t_start;
        let f_value = eval_pulse(family, &result.params, dt)?;
        steps.push(Step {
            index: steps.len() + 1,
            generator_id: result.generator_id,
            params: result.params,
            t_start,
            t_end: result.t_end,
            f_value,
        });
        delta_prev = result.delta;
        delta_trace.push(result.delta);
        let reached_end = last_grid_index(table, result.t_end) == table.step_count;
        per_step.push(result);
        if reached_end {
            outcome = if 1.0 - delta_prev <= config.tol_success {
                Outcome::Success
            } else {
                Outcome::Halt
            };
            break;
        }
    }

    let product = partial_product(&steps, &candidates.elements)?;
    let final_distance = frob_distance(&product, &table.unitaries[table.step_count])?;
    Ok(DecompositionReport {
        factorization: OrderedFactorization {
            steps,
            t_final: table.t_final,
            dim: table.dim(),
        },
        delta_trace,
        outcome,
        final_distance,
        per_step,
    })
}

/// Recompute, independently of the recorded Δ values, how far the
/// assembled product is from the target at the last accepted time.
pub fn reconstruct_error(
    report: &DecompositionReport,
    table: &PropagatorTable,
    candidates: &LieBasis,
) -> Result<f64> {
    let product = partial_product(&report.factorization.steps, &candidates.elements)?;
    let t_last = report
        .factorization
        .steps
        .last()
        .map_or(0.0, |s| s.t_end);
    let (target, _) = target_at(table, t_last)?;
    frob_distance(&product, target)
}

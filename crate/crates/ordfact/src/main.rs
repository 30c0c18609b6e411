use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use ordfact::baseline::trotter;
use ordfact::error::Result;
use ordfact::evolve::{propagate, target_at, PropagatorTable};
use ordfact::factorize::{
    optimize_step, run, AlphaSearch, DecompositionReport, FactorizeConfig, Outcome,
    OrderedFactorization, StepSearchResult, TargetMode,
};
use ordfact::lie::{closure, span_only, LieBasis};
use ordfact::matrix::{frob_distance, score, MatchMetric, SquareMatrix};
use ordfact::oracle::brute_force_step;
use ordfact::problem::{
    fmt_f64, parse_problem, write_csv, write_json, write_summary, CandidateSet, Mode,
    ProblemDocument,
};
use ordfact::pulse::PulseKind;

/// Factorize a time-ordered quantum propagator into elementary exponentials.
#[derive(Debug, Parser)]
#[command(name = "ordfact", version)]
struct Cli {
    /// Problem document (JSON).
    problem: PathBuf,
    /// Override the document's final time.
    #[arg(long)]
    t_final: Option<f64>,
    /// Override the propagator grid resolution K.
    #[arg(long)]
    grid: Option<usize>,
    /// Override the step budget.
    #[arg(long)]
    max_steps: Option<usize>,
    /// Override the match metric (frobenius | phase-invariant).
    #[arg(long)]
    metric: Option<String>,
    /// Override the pulse family kind (linear-rate | power | raised-cosine).
    #[arg(long)]
    pulse_family: Option<String>,
    /// Override the run mode (factorize | trotter | verify | closure).
    #[arg(long)]
    mode: Option<String>,
    /// Override the target mode (running | final).
    #[arg(long)]
    target_mode: Option<String>,
    /// Override the success tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Output prefix; writes <out>.json and <out>.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_choice<T: serde::de::DeserializeOwned>(flag: &str, value: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(value.to_string())).map_err(|_| {
        ordfact::Error::ParamOutOfBounds {
            reason: format!("invalid value '{value}' for --{flag}"),
        }
    })
}

fn apply_overrides(doc: &mut ProblemDocument, cli: &Cli) -> Result<()> {
    if let Some(t) = cli.t_final {
        doc.t_final = t;
    }
    if let Some(k) = cli.grid {
        doc.config.grid = k;
    }
    if let Some(n) = cli.max_steps {
        doc.config.max_steps = n;
    }
    if let Some(tol) = cli.tol {
        doc.config.tol_success = tol;
    }
    if let Some(metric) = &cli.metric {
        doc.config.metric = parse_choice::<MatchMetric>("metric", metric)?;
    }
    if let Some(mode) = &cli.mode {
        doc.config.mode = parse_choice::<Mode>("mode", mode)?;
    }
    if let Some(mode) = &cli.target_mode {
        doc.config.target_mode = parse_choice::<TargetMode>("target-mode", mode)?;
    }
    if let Some(kind) = &cli.pulse_family {
        doc.config.pulse_family.kind = match kind.as_str() {
            "linear-rate" => PulseKind::LinearRate,
            "raised-cosine" => PulseKind::RaisedCosine,
            "power" => match doc.config.pulse_family.kind {
                PulseKind::Power { n } => PulseKind::Power { n },
                _ => PulseKind::Power { n: 1 },
            },
            other => {
                return Err(ordfact::Error::UnknownPulseFamily {
                    name: other.to_string(),
                })
            }
        };
    }
    doc.validate()?;
    Ok(())
}

fn candidates_for(doc: &ProblemDocument) -> Result<LieBasis> {
    let raw: Vec<SquareMatrix> = doc.generators.iter().map(|g| g.matrix.clone()).collect();
    match doc.config.candidate_set {
        CandidateSet::Closure => closure(&raw, 1e-9, doc.dim * doc.dim),
        CandidateSet::Generators => span_only(&raw, 1e-9),
    }
}

fn candidate_labels(doc: &ProblemDocument, basis: &LieBasis) -> Vec<String> {
    let named = doc.labels();
    (0..basis.len())
        .map(|i| match basis.provenance[i] {
            Some((a, b)) => format!("comm(b{a},b{b})"),
            None => named.get(i).cloned().unwrap_or_else(|| format!("b{i}")),
        })
        .collect()
}

fn factorize_config(doc: &ProblemDocument) -> FactorizeConfig {
    FactorizeConfig {
        max_steps: doc.config.max_steps,
        tol_success: doc.config.tol_success,
        delta_t_min: None,
        target_mode: doc.config.target_mode,
        metric: doc.config.metric,
        alpha_search: AlphaSearch::GoldenRefined,
    }
}

fn emit(
    report: &DecompositionReport,
    labels: &[String],
    out: Option<&PathBuf>,
) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    write_summary(report, labels, &mut stdout)?;
    if let Some(prefix) = out {
        let mut json = fs::File::create(prefix.with_extension("json"))?;
        write_json(report, &mut json)?;
        let mut csv = fs::File::create(prefix.with_extension("csv"))?;
        write_csv(report, labels, &mut csv)?;
    }
    Ok(())
}

fn exit_code_for(outcome: Outcome) -> ExitCode {
    match outcome {
        Outcome::Success => ExitCode::from(0),
        Outcome::Halt => ExitCode::from(2),
        Outcome::BudgetExhausted => ExitCode::from(3),
    }
}

/// Wrap a fixed Trotter schedule in the same report shape as the greedy
/// search, scoring the cumulative product at each step's end time.
fn trotter_report(
    factorization: OrderedFactorization,
    spec_generators: &[SquareMatrix],
    table: &PropagatorTable,
    doc: &ProblemDocument,
) -> Result<DecompositionReport> {
    let mut delta_trace = Vec::with_capacity(factorization.steps.len());
    let mut per_step = Vec::with_capacity(factorization.steps.len());
    let mut product = SquareMatrix::identity(factorization.dim);
    for step in &factorization.steps {
        let gen = &spec_generators[step.generator_id];
        product = ordfact::herm_expm(gen, step.f_value)?.mul(&product);
        let (target, _) = target_at(table, step.t_end)?;
        let delta = score(target, &product, doc.config.metric)?;
        delta_trace.push(delta);
        per_step.push(StepSearchResult {
            delta,
            t_end: step.t_end,
            params: step.params,
            generator_id: step.generator_id,
            nontrivial_slice: step.t_end > step.t_start && step.params.alpha != 0.0,
        });
    }
    let final_delta = delta_trace.last().copied().unwrap_or(0.0);
    let final_distance = frob_distance(&product, &table.unitaries[table.step_count])?;
    Ok(DecompositionReport {
        factorization,
        delta_trace,
        outcome: if 1.0 - final_delta <= doc.config.tol_success {
            Outcome::Success
        } else {
            Outcome::Halt
        },
        final_distance,
        per_step,
    })
}

fn run_verify(
    doc: &ProblemDocument,
    table: &PropagatorTable,
    basis: &LieBasis,
) -> Result<()> {
    let config = factorize_config(doc);
    let main = optimize_step(table, &[], basis, &doc.config.pulse_family, &config)?;

    // coarse oracle grids: at most 16 end times, alpha resolution 1e-2
    let stride = (table.step_count / 16).max(1);
    let times: Vec<f64> = (1..=table.step_count)
        .step_by(stride)
        .map(|k| table.grid_time(k))
        .collect();
    let (lo, hi) = (
        doc.config.pulse_family.alpha_min,
        doc.config.pulse_family.alpha_max,
    );
    let n_alpha = (((hi - lo) / 1e-2).round() as usize).clamp(2, 4000);
    let alphas: Vec<f64> = (0..=n_alpha)
        .map(|i| lo + (hi - lo) * i as f64 / n_alpha as f64)
        .collect();
    let (oracle_delta, choice) = brute_force_step(
        table,
        &[],
        basis,
        &doc.config.pulse_family,
        doc.config.metric,
        doc.config.target_mode,
        &times,
        &alphas,
    )?;
    let agree = main.delta >= oracle_delta - 1e-9;
    println!(
        "verify step=1 main_delta={} oracle_delta={} main_t={} oracle_t={} agree={}",
        fmt_f64(main.delta),
        fmt_f64(oracle_delta),
        fmt_f64(main.t_end),
        fmt_f64(choice.t_end),
        if agree { "yes" } else { "no" },
    );
    Ok(())
}

fn execute(cli: &Cli) -> Result<ExitCode> {
    let text = fs::read_to_string(&cli.problem)?;
    let mut doc = parse_problem(&text)?;
    apply_overrides(&mut doc, cli)?;

    let spec = doc.to_hamiltonian()?;

    if doc.config.mode == Mode::Closure {
        let basis = candidates_for(&doc)?;
        println!(
            "closure dim_hilbert={} elements={} closed={} depth={}",
            basis.dim_hilbert,
            basis.len(),
            basis.closed,
            basis.depth
        );
        if let Some(prefix) = &cli.out {
            let mut file = fs::File::create(prefix.with_extension("json"))?;
            serde_json::to_writer_pretty(&mut file, &basis)?;
            writeln!(file)?;
        }
        return Ok(ExitCode::SUCCESS);
    }

    let table = propagate(&spec, doc.t_final, doc.config.grid)?;

    match doc.config.mode {
        Mode::Factorize => {
            let basis = candidates_for(&doc)?;
            let labels = candidate_labels(&doc, &basis);
            let config = factorize_config(&doc);
            let report = run(&table, &basis, &doc.config.pulse_family, &config)?;
            emit(&report, &labels, cli.out.as_ref())?;
            Ok(exit_code_for(report.outcome))
        }
        Mode::Trotter => {
            let fact = trotter(
                &spec,
                doc.t_final,
                doc.config.trotter_slices,
                doc.config.trotter_order,
            )?;
            let report = trotter_report(fact, &spec.generators, &table, &doc)?;
            emit(&report, &doc.labels(), cli.out.as_ref())?;
            Ok(exit_code_for(report.outcome))
        }
        Mode::Verify => {
            let basis = candidates_for(&doc)?;
            run_verify(&doc, &table, &basis)?;
            Ok(ExitCode::SUCCESS)
        }
        Mode::Closure => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

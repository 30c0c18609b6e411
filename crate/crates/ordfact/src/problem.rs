//! Problem-file parsing and report emission.
//!
//! Problems and reports are JSON documents; step traces are emitted as
//! RFC-4180-style CSV with floats at 17 significant digits.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::baseline::TrotterOrder;
use crate::error::{Error, Result};
use crate::evolve::{CoefficientFunction, HamiltonianSpec};
use crate::factorize::{DecompositionReport, TargetMode};
use crate::matrix::{MatchMetric, SquareMatrix};
use crate::pulse::PulseFamily;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledGenerator {
    pub label: String,
    pub matrix: SquareMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Factorize,
    Trotter,
    Verify,
    Closure,
}

/// Which candidate set greedy steps may draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateSet {
    /// The full commutator closure of the Hamiltonian generators.
    Closure,
    /// The raw Hamiltonian generators only (orthonormalized).
    Generators,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub metric: MatchMetric,
    pub pulse_family: PulseFamily,
    pub max_steps: usize,
    /// Requested propagator grid resolution K (the stored table doubles it).
    pub grid: usize,
    pub tol_success: f64,
    pub target_mode: TargetMode,
    pub mode: Mode,
    pub candidate_set: CandidateSet,
    pub trotter_slices: usize,
    pub trotter_order: TrotterOrder,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            metric: MatchMetric::Frobenius,
            pulse_family: PulseFamily {
                kind: crate::pulse::PulseKind::LinearRate,
                alpha_min: -2.0 * std::f64::consts::PI,
                alpha_max: 2.0 * std::f64::consts::PI,
            },
            max_steps: 16,
            grid: 1024,
            tol_success: 1e-6,
            target_mode: TargetMode::Running,
            mode: Mode::Factorize,
            candidate_set: CandidateSet::Closure,
            trotter_slices: 16,
            trotter_order: TrotterOrder::Second,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDocument {
    pub dim: usize,
    pub generators: Vec<LabeledGenerator>,
    pub coefficients: Vec<CoefficientFunction>,
    pub t_final: f64,
    #[serde(default)]
    pub config: RunConfig,
}

const KNOWN_PULSE_KINDS: &[&str] = &["linear-rate", "power", "raised-cosine"];

/// Parse and validate a problem document from JSON text.
pub fn parse_problem(text: &str) -> Result<ProblemDocument> {
    // Probe the pulse-family tag first so a bad family name is reported as
    // such rather than as a generic parse failure.
    if let Ok(value) = serde_json::from_str::<serde_json::Value>(text) {
        if let Some(kind) = value
            .pointer("/config/pulse_family/kind")
            .and_then(|k| k.as_str())
        {
            if !KNOWN_PULSE_KINDS.contains(&kind) {
                return Err(Error::UnknownPulseFamily { name: kind.into() });
            }
        }
    }
    let doc: ProblemDocument = serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        if let Some(rest) = msg.strip_prefix("missing field `") {
            if let Some(field) = rest.split('`').next() {
                return Error::MissingField {
                    field: field.to_string(),
                };
            }
        }
        Error::Syntax(e)
    })?;
    doc.validate()?;
    Ok(doc)
}

impl ProblemDocument {
    pub fn validate(&self) -> Result<()> {
        if self.generators.is_empty() {
            return Err(Error::EmptyGeneratorList);
        }
        if self.generators.len() != self.coefficients.len() {
            return Err(Error::DimensionMismatch {
                expected: self.generators.len(),
                found: self.coefficients.len(),
            });
        }
        if !self.t_final.is_finite() || self.t_final <= 0.0 {
            return Err(Error::ParamOutOfBounds {
                reason: format!("t_final must be finite and positive, got {}", self.t_final),
            });
        }
        for g in &self.generators {
            if g.matrix.dim() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: g.matrix.dim(),
                });
            }
            for r in 0..self.dim {
                for c in 0..self.dim {
                    let z = g.matrix.get(r, c);
                    if !z.re.is_finite() || !z.im.is_finite() {
                        return Err(Error::ParamOutOfBounds {
                            reason: format!("generator '{}' has a non-finite entry", g.label),
                        });
                    }
                }
            }
            let defect = g.matrix.herm_defect();
            if defect > 1e-8 {
                return Err(Error::NonHermitianGenerator {
                    label: g.label.clone(),
                    defect,
                });
            }
        }
        for c in &self.coefficients {
            c.validate()?;
        }
        self.config.pulse_family.validate()?;
        Ok(())
    }

    pub fn to_hamiltonian(&self) -> Result<HamiltonianSpec> {
        HamiltonianSpec::new(
            self.generators.iter().map(|g| g.matrix.clone()).collect(),
            self.coefficients.clone(),
        )
    }

    pub fn labels(&self) -> Vec<String> {
        self.generators.iter().map(|g| g.label.clone()).collect()
    }
}

/// 17 significant digits, enough to reproduce any f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn generator_label(labels: &[String], id: usize) -> String {
    labels.get(id).cloned().unwrap_or_else(|| format!("e{id}"))
}

/// Human-readable one-line outcome summary.
pub fn summary_line(report: &DecompositionReport) -> String {
    let delta = report.delta_trace.last().copied().unwrap_or(0.0);
    format!(
        "outcome={:?} steps={} delta={} final_distance={}",
        report.outcome,
        report.factorization.steps.len(),
        fmt_f64(delta),
        fmt_f64(report.final_distance),
    )
}

/// Write the per-step summary table after the outcome line.
pub fn write_summary(
    report: &DecompositionReport,
    labels: &[String],
    out: &mut dyn Write,
) -> Result<()> {
    writeln!(out, "{}", summary_line(report))?;
    writeln!(
        out,
        "{:>3} {:>10} {:>10} {:<12} {:>24} {:>24} {:>22}",
        "m", "t_start", "t_end", "generator", "alpha", "F", "delta"
    )?;
    for (step, result) in report
        .factorization
        .steps
        .iter()
        .zip(&report.per_step)
    {
        writeln!(
            out,
            "{:>3} {:>10.6} {:>10.6} {:<12} {:>24} {:>24} {:>22.16}",
            step.index,
            step.t_start,
            step.t_end,
            generator_label(labels, step.generator_id),
            fmt_f64(step.params.alpha),
            fmt_f64(step.f_value),
            result.delta,
        )?;
    }
    Ok(())
}

/// CSV step trace: one row per accepted step, CRLF-terminated.
pub fn write_csv(
    report: &DecompositionReport,
    labels: &[String],
    out: &mut dyn Write,
) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(out);
    let io_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::WriteFailure(io),
        other => Error::WriteFailure(std::io::Error::other(format!("{other:?}"))),
    };
    writer
        .write_record(["m", "t_start", "t_end", "generator_label", "alpha", "F", "delta"])
        .map_err(io_err)?;
    for (step, result) in report
        .factorization
        .steps
        .iter()
        .zip(&report.per_step)
    {
        writer
            .write_record([
                step.index.to_string(),
                fmt_f64(step.t_start),
                fmt_f64(step.t_end),
                generator_label(labels, step.generator_id),
                fmt_f64(step.params.alpha),
                fmt_f64(step.f_value),
                fmt_f64(result.delta),
            ])
            .map_err(io_err)?;
    }
    writer.flush()?;
    Ok(())
}

/// Machine-readable JSON mirror of the report.
pub fn write_json(report: &DecompositionReport, out: &mut dyn Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, report)?;
    writeln!(out)?;
    Ok(())
}

pub fn parse_report(text: &str) -> Result<DecompositionReport> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorize::{Outcome, OrderedFactorization, Step, StepSearchResult};
    use crate::pulse::PulseParams;

    fn sample_problem() -> String {
        serde_json::json!({
            "dim": 2,
            "generators": [
                {"label": "sx", "matrix": [[[0.0, 0.0], [1.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]]},
                {"label": "sz", "matrix": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]]]}
            ],
            "coefficients": [
                {"kind": "constant", "value": 0.7},
                {"kind": "sinusoid", "amplitude": 1.0, "frequency": 5.0, "phase": 0.0}
            ],
            "t_final": 1.0
        })
        .to_string()
    }

    #[test]
    fn parses_valid_document() {
        let doc = parse_problem(&sample_problem()).unwrap();
        assert_eq!(doc.dim, 2);
        assert_eq!(doc.generators.len(), 2);
        assert_eq!(doc.config.mode, Mode::Factorize);
        doc.to_hamiltonian().unwrap();
    }

    #[test]
    fn document_round_trips() {
        let doc = parse_problem(&sample_problem()).unwrap();
        let text = serde_json::to_string(&doc).unwrap();
        let again = parse_problem(&text).unwrap();
        assert_eq!(doc, again);
    }

    #[test]
    fn rejects_ragged_matrix() {
        let mut value: serde_json::Value = serde_json::from_str(&sample_problem()).unwrap();
        value["generators"][0]["matrix"] = serde_json::json!([
            [[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]],
            [[1.0, 0.0], [0.0, 0.0]]
        ]);
        assert!(parse_problem(&value.to_string()).is_err());
    }

    #[test]
    fn rejects_wrong_dimension() {
        let text = sample_problem().replace("\"dim\":2", "\"dim\":3");
        assert!(matches!(
            parse_problem(&text),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn reports_non_hermitian_generator_by_label() {
        let mut value: serde_json::Value = serde_json::from_str(&sample_problem()).unwrap();
        value["generators"][0]["matrix"] = serde_json::json!([
            [[0.0, 0.0], [1.0, 0.0]],
            [[0.5, 0.0], [0.0, 0.0]]
        ]);
        match parse_problem(&value.to_string()) {
            Err(Error::NonHermitianGenerator { label, .. }) => assert_eq!(label, "sx"),
            other => panic!("expected NonHermitianGenerator, got {other:?}"),
        }
    }

    #[test]
    fn reports_unknown_pulse_family() {
        let mut value: serde_json::Value = serde_json::from_str(&sample_problem()).unwrap();
        value["config"] = serde_json::json!({
            "pulse_family": {"kind": "sawtooth", "alpha_min": -1.0, "alpha_max": 1.0}
        });
        match parse_problem(&value.to_string()) {
            Err(Error::UnknownPulseFamily { name }) => assert_eq!(name, "sawtooth"),
            other => panic!("expected UnknownPulseFamily, got {other:?}"),
        }
    }

    #[test]
    fn reports_missing_field() {
        let text = sample_problem().replace("\"t_final\":1.0,", "");
        let text = text.replace(",\"t_final\":1.0", "");
        match parse_problem(&text) {
            Err(Error::MissingField { field }) => assert_eq!(field, "t_final"),
            other => panic!("expected MissingField, got {other:?}"),
        }
    }

    fn sample_report() -> DecompositionReport {
        DecompositionReport {
            factorization: OrderedFactorization {
                steps: vec![Step {
                    index: 1,
                    generator_id: 0,
                    params: PulseParams {
                        alpha: 0.99,
                        n: None,
                    },
                    t_start: 0.0,
                    t_end: 1.0,
                    f_value: 0.99,
                }],
                t_final: 1.0,
                dim: 2,
            },
            delta_trace: vec![0.9999999],
            outcome: Outcome::Success,
            final_distance: 1.2e-7,
            per_step: vec![StepSearchResult {
                delta: 0.9999999,
                t_end: 1.0,
                params: PulseParams {
                    alpha: 0.99,
                    n: None,
                },
                generator_id: 0,
                nontrivial_slice: true,
            }],
        }
    }

    #[test]
    fn summary_contains_outcome_and_steps() {
        let line = summary_line(&sample_report());
        assert!(line.starts_with("outcome=Success steps=1"));
    }

    #[test]
    fn report_json_round_trips() {
        let report = sample_report();
        let mut buf = Vec::new();
        write_json(&report, &mut buf).unwrap();
        let again = parse_report(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(report.factorization, again.factorization);
        assert_eq!(report.delta_trace, again.delta_trace);
        assert_eq!(report.outcome, again.outcome);
        assert_eq!(report.final_distance, again.final_distance);
        assert_eq!(report.per_step, again.per_step);
    }

    #[test]
    fn empty_report_csv_is_header_only() {
        let mut report = sample_report();
        report.factorization.steps.clear();
        report.per_step.clear();
        report.delta_trace.clear();
        let mut buf = Vec::new();
        write_csv(&report, &["sx".into()], &mut buf).unwrap();
        assert_eq!(
            std::str::from_utf8(&buf).unwrap(),
            "m,t_start,t_end,generator_label,alpha,F,delta\r\n"
        );
    }

    #[test]
    fn csv_rows_match_steps() {
        let mut buf = Vec::new();
        write_csv(&sample_report(), &["sx".into()], &mut buf).unwrap();
        let text = std::str::from_utf8(&buf).unwrap();
        let mut lines = text.split("\r\n");
        lines.next();
        let row = lines.next().unwrap();
        assert!(row.starts_with("1,"));
        assert!(row.contains(",sx,"));
    }
}

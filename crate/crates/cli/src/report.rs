//! Serializable report shapes and their JSON/CSV/human renderings. Field
//! order is fixed by the struct definitions, so reports are byte-identical
//! across runs with the same job and seed.

use serde::Serialize;

use hamsym::symmetry::{PredicateResult, RecoveredFunctionDescription};

use crate::job::OutputFormat;

/// The stable classification report shape consumed by the test harness.
#[derive(Debug, Serialize)]
pub struct ClassificationJson {
    pub geometry: String,
    pub n: usize,
    /// Chart coordinate names in their fixed order.
    pub coordinates: Vec<String>,
    pub hamiltonian: String,
    pub field: String,
    pub predicates: Vec<PredicateResult>,
    pub scaling_degree: Option<f64>,
    pub canonoid: CanonoidJson,
}

#[derive(Debug, Serialize)]
pub struct CanonoidJson {
    pub verdict: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub new_hamiltonian_of_bracket: Option<RecoveredFunctionDescription>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<RecoveredFunctionDescription>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_is_invariant_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub formula_residual: Option<f64>,
}

/// Report of one `verify` run.
#[derive(Debug, Serialize)]
pub struct VerifyJson {
    pub theorem: String,
    pub geometry: String,
    pub n: usize,
    /// Chart coordinate names in their fixed order.
    pub coordinates: Vec<String>,
    pub hamiltonian: String,
    pub pass: bool,
    pub checks: Vec<PredicateResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scaling_degree: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn finite_or_none(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Witness-free predicate row for quick construction.
pub fn check(name: &str, verdict: bool, residual: f64) -> PredicateResult {
    PredicateResult {
        name: name.to_string(),
        verdict,
        max_residual: finite_or_none(residual).unwrap_or(-1.0),
        witness: None,
    }
}

pub fn render_classification(report: &ClassificationJson, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => serde_json::to_string_pretty(report).expect("report serializes"),
        OutputFormat::Csv => {
            let mut out = String::from("predicate,verdict,max_residual\n");
            for p in &report.predicates {
                out.push_str(&format!("{},{},{:e}\n", p.name, p.verdict, p.max_residual));
            }
            out.push_str(&format!(
                "canonoid_generator,{},{:e}\n",
                report.canonoid.verdict,
                report.canonoid.formula_residual.unwrap_or(-1.0)
            ));
            out
        }
        OutputFormat::Human => {
            let mut out = format!(
                "{} chart, n = {}\nH = {}\nX = {}\n",
                report.geometry, report.n, report.hamiltonian, report.field
            );
            for p in &report.predicates {
                out.push_str(&render_check_line(p));
            }
            match report.scaling_degree {
                Some(d) => out.push_str(&format!("scaling degree: {d}\n")),
                None => out.push_str("scaling degree: none\n"),
            }
            out.push_str(&format!(
                "canonoid generator: {}\n",
                if report.canonoid.verdict { "yes" } else { "no" }
            ));
            out
        }
    }
}

pub fn render_verify(report: &VerifyJson, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => serde_json::to_string_pretty(report).expect("report serializes"),
        OutputFormat::Csv => {
            let mut out = String::from("check,verdict,max_residual\n");
            for p in &report.checks {
                out.push_str(&format!("{},{},{:e}\n", p.name, p.verdict, p.max_residual));
            }
            out
        }
        OutputFormat::Human => {
            let mut out = format!(
                "verify {} on {} chart (n = {}), H = {}\n",
                report.theorem, report.geometry, report.n, report.hamiltonian
            );
            for p in &report.checks {
                out.push_str(&render_check_line(p));
            }
            if let Some(d) = report.scaling_degree {
                out.push_str(&format!("scaling degree: {d}\n"));
            }
            if let Some(note) = &report.note {
                out.push_str(&format!("note: {note}\n"));
            }
            out.push_str(if report.pass { "PASS\n" } else { "FAIL\n" });
            out
        }
    }
}

fn render_check_line(p: &PredicateResult) -> String {
    let mut line = format!(
        "  {:<40} {}  (max residual {:.3e})",
        p.name,
        if p.verdict { "PASS" } else { "FAIL" },
        p.max_residual
    );
    if let Some(w) = &p.witness {
        line.push_str(&format!("  witness {w:?}"));
    }
    line.push('\n');
    line
}

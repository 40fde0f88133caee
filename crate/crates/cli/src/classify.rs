//! `classify`: run every field-level predicate against one system and field.

use hamsym::geometry::GeometryKind;
use hamsym::symmetry::{HamiltonianSystem, PredicateResult, RecoveredFunction};
use hamsym::VectorField;

use crate::job::{JobSpec, OutputFormat};
use crate::report::{check, CanonoidJson, ClassificationJson};
use crate::{input_err, runtime_err, CmdError, Outcome};

pub fn cmd_classify(spec: &JobSpec) -> Result<Outcome, CmdError> {
    let format = OutputFormat::from_spec(spec)?;
    if spec.fields.len() != 1 {
        return Err(input_err(format!(
            "classify needs exactly one --field, got {}",
            spec.fields.len()
        )));
    }
    let sys = spec.system()?;
    let field = sys
        .chart()
        .parse_vector_field(&spec.fields[0])
        .map_err(input_err)?;
    let report = classification_report(&sys, &field, &spec.fields[0]).map_err(runtime_err)?;
    Ok(Outcome {
        pass: true,
        output: render(report, format),
    })
}

fn render(report: ClassificationJson, format: OutputFormat) -> String {
    crate::report::render_classification(&report, format)
}

pub fn classification_report(
    sys: &HamiltonianSystem,
    field: &VectorField,
    field_text: &str,
) -> Result<ClassificationJson, hamsym::SymmetryError> {
    let mut predicates: Vec<PredicateResult> = Vec::new();

    let infinitesimal = sys.is_infinitesimal_symmetry(field)?;
    predicates.push(overall(
        "infinitesimal_symmetry",
        infinitesimal.verdict,
        &infinitesimal.conditions,
    ));
    predicates.extend(infinitesimal.conditions);

    let dynamical = sys.is_dynamical_symmetry(field)?;
    predicates.push(dynamical.commutator.clone());
    if let Some(p) = dynamical.commutes_with_hamiltonian_field {
        predicates.push(p);
    }
    if let Some(p) = dynamical.commutes_with_time_reeb {
        predicates.push(p);
    }

    let scaling = sys.scaling_degree(field)?;
    predicates.push(PredicateResult {
        name: "scaling_symmetry".to_string(),
        verdict: scaling.degree.is_some(),
        max_residual: if scaling.linear_residual.is_finite() {
            scaling.linear_residual
        } else {
            -1.0
        },
        witness: None,
    });

    let recognition = sys.is_hamiltonian_field(field)?;
    predicates.push(overall(
        "hamiltonian_field",
        recognition.hamiltonian,
        &recognition.checks,
    ));
    predicates.push(noether_symmetry_predicate(
        sys,
        &infinitesimal_verdict(&predicates),
        &recognition.generator,
        recognition.hamiltonian,
    )?);

    let canonoid = sys.is_canonoid_generator(field)?;
    let names = sys.chart().coord_names();
    let canonoid_json = CanonoidJson {
        verdict: canonoid.verdict,
        new_hamiltonian_of_bracket: canonoid
            .bracket_hamiltonian
            .as_ref()
            .map(|g| g.describe(names)),
        k: canonoid.k.as_ref().map(|k| k.describe(names)),
        k_is_invariant_residual: canonoid.k_invariance_residual,
        formula_residual: canonoid.formula_residual,
    };

    Ok(ClassificationJson {
        geometry: sys.kind().name().to_string(),
        n: sys.chart().dof(),
        coordinates: sys.chart().coord_names().to_vec(),
        hamiltonian: sys.chart().pretty(sys.hamiltonian()),
        field: field_text.to_string(),
        predicates,
        scaling_degree: scaling.degree,
        canonoid: canonoid_json,
    })
}

fn overall(name: &str, verdict: bool, checks: &[PredicateResult]) -> PredicateResult {
    PredicateResult {
        name: name.to_string(),
        verdict,
        max_residual: checks.iter().fold(0.0f64, |m, c| m.max(c.max_residual)),
        witness: checks.iter().find_map(|c| c.witness.clone()),
    }
}

fn infinitesimal_verdict(predicates: &[PredicateResult]) -> PredicateResult {
    predicates
        .iter()
        .find(|p| p.name == "infinitesimal_symmetry")
        .cloned()
        .expect("infinitesimal predicate present")
}

/// Noether-symmetry recognition for an arbitrary field. On symplectic and
/// cosymplectic charts this coincides with being an infinitesimal symmetry;
/// on contact/cocontact charts the field must be `X_g` with `{g, H} = 0`
/// (plus `R_t g` on cocontact).
fn noether_symmetry_predicate(
    sys: &HamiltonianSystem,
    infinitesimal: &PredicateResult,
    generator: &Option<RecoveredFunction>,
    hamiltonian: bool,
) -> Result<PredicateResult, hamsym::SymmetryError> {
    match sys.kind() {
        GeometryKind::Symplectic | GeometryKind::Cosymplectic => Ok(PredicateResult {
            name: "noether_symmetry".to_string(),
            ..infinitesimal.clone()
        }),
        GeometryKind::Contact | GeometryKind::Cocontact => {
            if !hamiltonian {
                return Ok(check("noether_symmetry", false, -1.0));
            }
            let g = match generator {
                Some(RecoveredFunction::Symbolic(g)) => g.clone(),
                _ => return Ok(check("noether_symmetry", false, -1.0)),
            };
            let mut condition = sys.chart().bracket(&g, sys.hamiltonian());
            if sys.kind() == GeometryKind::Cocontact {
                condition = condition.add(sys.reeb()[1].apply(&g));
            }
            let eq = hamsym::equal_on_samples(
                &condition,
                &hamsym::ScalarExpr::zero(),
                &sys.settings().domain,
                sys.settings().tol.exact,
            )?;
            Ok(PredicateResult {
                name: "noether_symmetry".to_string(),
                verdict: eq.verdict,
                max_residual: eq.max_residual,
                witness: eq.witness,
            })
        }
    }
}

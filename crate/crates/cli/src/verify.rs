//! `verify`: run one named theorem instance and exit 0 exactly when every
//! asserted identity passes.

use hamsym::equal_on_samples;
use hamsym::flow::{canonoid_flow_check, integrate, monitor, FlowCheckOptions, MonitorMode};
use hamsym::geometry::GeometryKind;
use hamsym::symmetry::{HamiltonianSystem, SymmetryError};
use hamsym::{ScalarExpr, VectorField};

use crate::job::{JobSpec, OutputFormat};
use crate::report::{check, VerifyJson};
use crate::{input_err, runtime_err, CmdError, Outcome};

/// Residual bound for the scaling commutator lemma `[X, X_H] = (Λ−1)X_H`.
const LEMMA_TOL: f64 = 1e-8;

pub fn cmd_verify(theorem: Option<&str>, spec: &JobSpec) -> Result<Outcome, CmdError> {
    let format = OutputFormat::from_spec(spec)?;
    let theorem = theorem
        .map(str::to_string)
        .or_else(|| spec.theorem.clone())
        .ok_or_else(|| input_err("missing theorem name (argument or job file `theorem`)"))?;
    let sys = spec.system()?;
    let mut report = VerifyJson {
        theorem: theorem.clone(),
        geometry: sys.kind().name().to_string(),
        n: sys.chart().dof(),
        coordinates: sys.chart().coord_names().to_vec(),
        hamiltonian: sys.chart().pretty(sys.hamiltonian()),
        pass: false,
        checks: Vec::new(),
        scaling_degree: None,
        note: None,
    };
    match theorem.as_str() {
        "noether" => verify_noether(&sys, spec, &mut report)?,
        "dissipation" => verify_dissipation(&sys, spec, &mut report)?,
        "scaling-commutator" => verify_scaling_commutator(&sys, spec, &mut report)?,
        "canonoid" => verify_canonoid(&sys, spec, &mut report)?,
        "primitive" => verify_primitive(&sys, spec, &mut report)?,
        "quotient" => verify_quotient(&sys, spec, &mut report)?,
        "flow-hamiltonian" => verify_flow_hamiltonian(&sys, spec, &mut report)?,
        other => {
            return Err(input_err(format!(
                "unknown theorem `{other}`; expected one of noether, dissipation, \
                 scaling-commutator, canonoid, primitive, quotient, flow-hamiltonian"
            )));
        }
    }
    Ok(Outcome {
        pass: report.pass,
        output: crate::report::render_verify(&report, format),
    })
}

fn one_function(sys: &HamiltonianSystem, spec: &JobSpec) -> Result<ScalarExpr, CmdError> {
    if spec.functions.len() != 1 {
        return Err(input_err(format!(
            "this theorem needs exactly one --function, got {}",
            spec.functions.len()
        )));
    }
    sys.chart()
        .parse_expr(&spec.functions[0])
        .map_err(input_err)
}

fn one_field(sys: &HamiltonianSystem, spec: &JobSpec) -> Result<VectorField, CmdError> {
    if spec.fields.len() != 1 {
        return Err(input_err(format!(
            "this theorem needs exactly one --field, got {}",
            spec.fields.len()
        )));
    }
    sys.chart()
        .parse_vector_field(&spec.fields[0])
        .map_err(input_err)
}

/// Input errors (wrong geometry, bad dimensions) exit 2; sampling and
/// integration failures exit 3.
fn sym_err(err: SymmetryError) -> CmdError {
    match err {
        SymmetryError::UnsupportedGeometry { .. }
        | SymmetryError::FieldDimension { .. }
        | SymmetryError::Geometry(_) => input_err(err),
        other => runtime_err(other),
    }
}

fn verify_noether(
    sys: &HamiltonianSystem,
    spec: &JobSpec,
    report: &mut VerifyJson,
) -> Result<(), CmdError> {
    let f = one_function(sys, spec)?;
    let noether = sys.noether_check(&f).map_err(sym_err)?;
    report.checks.push(noether.forward.clone());
    report.checks.push(noether.noether_condition.clone());
    report.checks.extend(noether.detail);
    report
        .checks
        .push(check("biconditional_agreement", noether.agree, 0.0));
    report.pass = noether.agree;
    Ok(())
}

fn verify_dissipation(
    sys: &HamiltonianSystem,
    spec: &JobSpec,
    report: &mut VerifyJson,
) -> Result<(), CmdError> {
    if !matches!(sys.kind(), GeometryKind::Contact | GeometryKind::Cocontact) {
        return Err(input_err(
            "the dissipation theorem needs a contact or cocontact chart",
        ));
    }
    verify_noether(sys, spec, report)
}

fn verify_scaling_commutator(
    sys: &HamiltonianSystem,
    spec: &JobSpec,
    report: &mut VerifyJson,
) -> Result<(), CmdError> {
    let x = one_field(sys, spec)?;
    let scaling = sys.scaling_degree(&x).map_err(sym_err)?;
    report.checks.extend(scaling.structural.clone());
    report.scaling_degree = scaling.degree;
    let Some(lambda) = scaling.degree else {
        report.checks.push(check("scaling_symmetry", false, -1.0));
        report.pass = false;
        return Ok(());
    };
    report
        .checks
        .push(check("scaling_symmetry", true, scaling.linear_residual));
    let commutator = x.lie_bracket(sys.hamiltonian_field());
    let expected = sys.hamiltonian_field().scale(lambda - 1.0);
    let eq = equal_on_samples(&commutator, &expected, &sys.settings().domain, LEMMA_TOL)
        .map_err(runtime_err)?;
    report.checks.push(check(
        "commutator_is_lambda_minus_one_xh",
        eq.verdict,
        eq.max_residual,
    ));
    report.pass = report.checks.iter().all(|c| c.verdict);
    Ok(())
}

fn verify_canonoid(
    sys: &HamiltonianSystem,
    spec: &JobSpec,
    report: &mut VerifyJson,
) -> Result<(), CmdError> {
    let x = one_field(sys, spec)?;
    let rep = sys.is_canonoid_generator(&x).map_err(sym_err)?;
    if let Some(side) = rep.side_condition.clone() {
        report.checks.push(side);
    }
    report.checks.extend(rep.recognition.checks.clone());
    if let Some(residual) = rep.formula_residual {
        report.checks.push(check(
            "bracket_hamiltonian_formula",
            residual <= sys.settings().tol.numeric,
            residual,
        ));
    }
    if let Some(residual) = rep.k_invariance_residual {
        let inv_tol = match sys.kind() {
            GeometryKind::Symplectic | GeometryKind::Cosymplectic => sys.settings().tol.numeric,
            _ => sys.settings().tol.exact,
        };
        report
            .checks
            .push(check("k_invariance", residual <= inv_tol, residual));
    }
    report.pass = rep.verdict;
    Ok(())
}

fn verify_primitive(
    sys: &HamiltonianSystem,
    spec: &JobSpec,
    report: &mut VerifyJson,
) -> Result<(), CmdError> {
    if sys.kind() != GeometryKind::Cosymplectic {
        return Err(input_err(
            "the primitive criterion applies to cosymplectic charts only",
        ));
    }
    if spec.fields.len() != 1 {
        return Err(input_err(
            "the primitive check needs the 1-form coefficients via --field",
        ));
    }
    let lambda_form = sys
        .chart()
        .parse_one_form(&spec.fields[0])
        .map_err(input_err)?;
    let degree = match spec.lambda {
        Some(d) => d,
        None => estimate_primitive_degree(sys, &lambda_form)?,
    };
    let rep = sys
        .check_scaling_primitive(&lambda_form, degree)
        .map_err(sym_err)?;
    report.checks.extend(rep.checks.clone());
    report.scaling_degree = rep.recovered_degree;
    report.note = Some(format!("degree checked: {degree}"));
    report.pass = rep.verdict;
    Ok(())
}

/// Without --lambda, estimate the degree from `X_H ⌟ λ = −ΛH` at samples.
fn estimate_primitive_degree(
    sys: &HamiltonianSystem,
    lambda_form: &hamsym::OneForm,
) -> Result<f64, CmdError> {
    let contraction = sys.hamiltonian_field().contract_one(lambda_form);
    let h = sys.hamiltonian();
    let dom = &sys.settings().domain;
    let cutoff = sys.settings().tol.h_cutoff;
    let mut ratios = Vec::new();
    let mut index = 0u64;
    while ratios.len() < dom.samples && index < 100 * dom.samples as u64 {
        let x = dom.point(index);
        index += 1;
        let (hv, cv) = match (
            h.eval_guarded(&x, dom.sing_threshold),
            contraction.eval_guarded(&x, dom.sing_threshold),
        ) {
            (Ok(hv), Ok(cv)) => (hv, cv),
            _ => continue,
        };
        if hv.abs() > cutoff {
            ratios.push(-cv / hv);
        }
    }
    if ratios.is_empty() {
        return Err(runtime_err(
            "cannot estimate Λ: |H| stays below the cutoff on the sample box",
        ));
    }
    Ok(ratios.iter().sum::<f64>() / ratios.len() as f64)
}

fn verify_quotient(
    sys: &HamiltonianSystem,
    spec: &JobSpec,
    report: &mut VerifyJson,
) -> Result<(), CmdError> {
    if spec.functions.len() != 2 {
        return Err(input_err(format!(
            "the quotient check needs exactly two --function entries, got {}",
            spec.functions.len()
        )));
    }
    let f = sys
        .chart()
        .parse_expr(&spec.functions[0])
        .map_err(input_err)?;
    let g = sys
        .chart()
        .parse_expr(&spec.functions[1])
        .map_err(input_err)?;
    let mut f_check = sys.is_dissipated_quantity(&f).map_err(sym_err)?;
    f_check.name = "numerator_dissipated".to_string();
    let mut g_check = sys.is_dissipated_quantity(&g).map_err(sym_err)?;
    g_check.name = "denominator_dissipated".to_string();
    report.checks.push(f_check);
    report.checks.push(g_check);

    // Pointwise: the quotient is a constant of motion wherever g is clear of
    // zero (the δ_sing guard on the denominator handles that).
    let quotient = f.div(g);
    let mut sampled = sys.is_constant_of_motion(&quotient).map_err(sym_err)?;
    sampled.name = "quotient_constant_on_samples".to_string();
    report.checks.push(sampled);

    // Along a trajectory: drift of f/g below the flow tolerance.
    let x0 = spec
        .x0
        .clone()
        .unwrap_or_else(|| vec![1.0; sys.chart().dim()]);
    if x0.len() != sys.chart().dim() {
        return Err(input_err(format!(
            "--x0 has {} coordinates, chart dimension is {}",
            x0.len(),
            sys.chart().dim()
        )));
    }
    let s = spec.s.first().copied().unwrap_or(3.0);
    let h = spec.h.unwrap_or(1e-3);
    let traj = integrate(sys.chart(), sys.dynamics(), &x0, s, h, None).map_err(runtime_err)?;
    if let Some(t) = traj.truncated() {
        return Err(runtime_err(format!("trajectory truncated: {t:?}")));
    }
    let drift = monitor(sys, &traj, &quotient, MonitorMode::Conserved)
        .map_err(runtime_err)?
        .drift;
    report.checks.push(check(
        "quotient_drift_along_trajectory",
        drift < sys.settings().tol.flow,
        drift,
    ));
    report.pass = report.checks.iter().all(|c| c.verdict);
    Ok(())
}

fn verify_flow_hamiltonian(
    sys: &HamiltonianSystem,
    spec: &JobSpec,
    report: &mut VerifyJson,
) -> Result<(), CmdError> {
    let x = one_field(sys, spec)?;
    // The K_s = φ_s*H statement is for dynamical symmetries with the kind's
    // side conditions; check those first.
    let dynamical = sys.is_dynamical_symmetry(&x).map_err(sym_err)?;
    report.checks.push(dynamical.commutator.clone());
    if let Some(p) = dynamical.commutes_with_time_reeb.clone() {
        report.checks.push(p);
    }
    let tol = sys.settings().tol.flow;
    let opts = FlowCheckOptions::default();
    for s in spec.flow_parameters() {
        let rep = canonoid_flow_check(sys, &x, s, &opts).map_err(runtime_err)?;
        report.checks.push(check(
            &format!("defining_equations_s_{s}"),
            rep.defining_residual < tol,
            rep.defining_residual,
        ));
        if let Some(eta) = rep.eta_residual {
            report
                .checks
                .push(check(&format!("eta_pullback_s_{s}"), eta < tol, eta));
        }
        report.checks.push(check(
            &format!("k_matches_pullback_hamiltonian_s_{s}"),
            rep.k_vs_flowed_h < tol,
            rep.k_vs_flowed_h,
        ));
        if rep.canonoid_warning {
            report.note = Some("field is not a canonoid generator".to_string());
        }
    }
    report.pass = report.checks.iter().all(|c| c.verdict);
    Ok(())
}

//! Hamiltonian-field recognition, canonoid-generator characterization and the
//! cosymplectic primitive criterion.
//!
//! A field `X` generates a one-parameter group of canonoid transformations
//! exactly when `[X, X_H]` is a Hamiltonian vector field, together with the
//! kind's side condition (`[X, R] = 0` cosymplectic, `[X, R_t] = 0`
//! cocontact). On success the bracket's Hamiltonian function is cross-checked
//! against the closed-form `L_X H − K`, with `K` recovered from
//! `X_H ⌟ L_X ω = dK` (and its cosymplectic/contact/cocontact analogues).

use crate::expr::{Components, ScalarExpr};
use crate::geometry::{
    differential, lie_derivative_one, lie_derivative_two, GeometryKind, OneForm, VectorField,
};

use super::recover::RecoveredFunction;
use super::{HamiltonianSystem, PredicateResult, SymmetryError};

/// Outcome of asking whether a field is `X_g` for some function `g`.
#[derive(Clone, Debug)]
pub struct HamiltonianRecognition {
    pub hamiltonian: bool,
    /// The recovered `g` (exact for contact/cocontact, a line-integral handle
    /// for symplectic/cosymplectic, normalized to vanish at the base point).
    pub generator: Option<RecoveredFunction>,
    pub checks: Vec<PredicateResult>,
}

impl HamiltonianRecognition {
    fn failed(checks: Vec<PredicateResult>) -> Self {
        HamiltonianRecognition {
            hamiltonian: false,
            generator: None,
            checks,
        }
    }
}

/// Report of the canonoid-generator characterization for one field.
#[derive(Clone, Debug)]
pub struct CanonoidReport {
    pub verdict: bool,
    /// `[X, R] = 0` resp. `[X, R_t] = 0` where the kind requires it.
    pub side_condition: Option<PredicateResult>,
    /// Recognition of `[X, X_H]` as a Hamiltonian field.
    pub recognition: HamiltonianRecognition,
    /// Hamiltonian function of `[X, X_H]` when recognized.
    pub bracket_hamiltonian: Option<RecoveredFunction>,
    /// Residual of the theorem's formula for that function
    /// (`L_X H − K`, resp. `L_X H + X_H ⌟ L_X θ`).
    pub formula_residual: Option<f64>,
    /// The canonoid function `K`.
    pub k: Option<RecoveredFunction>,
    /// Invariance residual of `K`: `X_H K = 0` for symplectic/cosymplectic;
    /// for contact/cocontact the residual of
    /// `X_H K + K·RH + H·((L_X R)H + RK) = 0` (with `R = R_z` on cocontact),
    /// which is what the finite-`s` canonoid equations linearize to.
    pub k_invariance_residual: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct PrimitiveReport {
    pub verdict: bool,
    pub checks: Vec<PredicateResult>,
    /// Field with `X ⌟ Ω + (X ⌟ η)η = λ`, present when all checks pass.
    pub reconstructed: Option<VectorField>,
    /// Degree recovered by running `scaling_degree` on the reconstruction.
    pub recovered_degree: Option<f64>,
}

impl HamiltonianSystem {
    /// Base point of line integrations: all coordinates equal to 1.
    fn base_point(&self) -> Vec<f64> {
        vec![1.0; self.chart().dim()]
    }

    /// Coordinate indices of the `(q, p)` block.
    fn qp_indices(&self) -> Vec<usize> {
        (0..2 * self.chart().dof()).collect()
    }

    fn line_integral(&self, form: OneForm, active: Vec<usize>) -> RecoveredFunction {
        RecoveredFunction::LineIntegral {
            form,
            base: self.base_point(),
            active,
            quad_tol: self.settings.quad_tol,
            sing_threshold: self.settings.domain.sing_threshold,
        }
    }

    /// Is `y = X_g` for some (possibly local) function `g`? Returns `g` on
    /// success. Symplectic charts test closedness of `y ⌟ ω` and integrate
    /// it; cosymplectic charts test `y ⌟ η = 0` plus closedness of the
    /// `(q, p)` block at fixed `t`; contact/cocontact charts read
    /// `g = −y ⌟ θ` off exactly and verify the remaining contractions.
    pub fn is_hamiltonian_field(
        &self,
        y: &VectorField,
    ) -> Result<HamiltonianRecognition, SymmetryError> {
        self.check_field_dim(y)?;
        let tol = &self.settings.tol;
        let dim = self.chart().dim();
        match self.kind() {
            GeometryKind::Symplectic => {
                let beta = y.contract_two(self.structure().two_form());
                let closed = self.equality(
                    "contraction_closed",
                    &beta.exterior_derivative(),
                    &crate::geometry::TwoForm::zero(dim),
                    tol.exact,
                )?;
                if !closed.verdict {
                    return Ok(HamiltonianRecognition::failed(vec![closed]));
                }
                let g = self.line_integral(beta.clone(), (0..dim).collect());
                let grad = self.verify_gradient(&g, &beta)?;
                let ok = grad.verdict;
                Ok(HamiltonianRecognition {
                    hamiltonian: ok,
                    generator: ok.then_some(g),
                    checks: vec![closed, grad],
                })
            }
            GeometryKind::Cosymplectic => {
                let eta = self.structure().time_form().unwrap();
                let horizontal = self.equality(
                    "annihilates_time_form",
                    &y.contract_one(eta),
                    &ScalarExpr::zero(),
                    tol.exact,
                )?;
                let beta = y.contract_two(self.structure().two_form());
                // Closedness of the (q, p) block at each fixed t.
                let qp = self.qp_indices();
                let mut curl = Vec::new();
                for (ai, &a) in qp.iter().enumerate() {
                    for &b in &qp[ai + 1..] {
                        curl.push(
                            beta.component(b)
                                .differentiate(a)
                                .sub(beta.component(a).differentiate(b)),
                        );
                    }
                }
                let zeros = vec![ScalarExpr::zero(); curl.len()];
                let curl_res = self.sampled_residual(&curl, &zeros)?;
                let closed =
                    PredicateResult::from_residual("slice_contraction_closed", curl_res, tol.exact);
                if !(horizontal.verdict && closed.verdict) {
                    return Ok(HamiltonianRecognition::failed(vec![horizontal, closed]));
                }
                let g = self.line_integral(beta, qp.clone());
                // X_g = y componentwise: ∂g/∂pᵢ = yᵠⁱ and ∂g/∂qᵢ = −yᵖⁱ.
                let guards = y.components();
                let probes = self.probe_points(&guards)?;
                let n = self.chart().dof();
                let mut residual = 0.0f64;
                for x in &probes {
                    for i in 0..n {
                        let gq = g.partial(x, self.chart().q(i), self.settings.stencil_step)?;
                        let gp = g.partial(x, self.chart().p(i), self.settings.stencil_step)?;
                        let yq = y.component(self.chart().q(i)).eval(x)?;
                        let yp = y.component(self.chart().p(i)).eval(x)?;
                        residual = residual.max((gp - yq).abs()).max((gq + yp).abs());
                    }
                }
                let grad = PredicateResult::from_residual("generates_field", residual, tol.numeric);
                let ok = grad.verdict;
                Ok(HamiltonianRecognition {
                    hamiltonian: ok,
                    generator: ok.then_some(g),
                    checks: vec![horizontal, closed, grad],
                })
            }
            GeometryKind::Contact => {
                let theta = self.structure().contact_form().unwrap();
                let g = y.contract_one(theta).neg();
                let r = self.contact_reeb();
                // y ⌟ dθ = dg − (Rg)θ
                let lhs = y.contract_two(self.structure().two_form());
                let rhs = differential(&g, dim).sub(&theta.scale_expr(&r.apply(&g)));
                let contraction = self.equality("contraction_identity", &lhs, &rhs, tol.exact)?;
                let ok = contraction.verdict;
                Ok(HamiltonianRecognition {
                    hamiltonian: ok,
                    generator: ok.then_some(RecoveredFunction::Symbolic(g)),
                    checks: vec![contraction],
                })
            }
            GeometryKind::Cocontact => {
                let theta = self.structure().contact_form().unwrap();
                let eta = self.structure().time_form().unwrap();
                let horizontal = self.equality(
                    "annihilates_time_form",
                    &y.contract_one(eta),
                    &ScalarExpr::zero(),
                    tol.exact,
                )?;
                let g = y.contract_one(theta).neg();
                // y ⌟ dθ = dg − (R_z g)θ − (R_t g)η
                let rz = self.contact_reeb();
                let rt = self.time_reeb();
                let lhs = y.contract_two(self.structure().two_form());
                let rhs = differential(&g, dim)
                    .sub(&theta.scale_expr(&rz.apply(&g)))
                    .sub(&eta.scale_expr(&rt.apply(&g)));
                let contraction = self.equality("contraction_identity", &lhs, &rhs, tol.exact)?;
                let ok = horizontal.verdict && contraction.verdict;
                Ok(HamiltonianRecognition {
                    hamiltonian: ok,
                    generator: ok.then_some(RecoveredFunction::Symbolic(g)),
                    checks: vec![horizontal, contraction],
                })
            }
        }
    }

    /// `dg = β` at probe points, differentiating the recovered handle.
    fn verify_gradient(
        &self,
        g: &RecoveredFunction,
        beta: &OneForm,
    ) -> Result<PredicateResult, SymmetryError> {
        let probes = self.probe_points(&beta.components())?;
        let mut residual = 0.0f64;
        for x in &probes {
            for i in 0..beta.dim() {
                let dg = g.partial(x, i, self.settings.stencil_step)?;
                let bi = beta
                    .component(i)
                    .eval_guarded(x, self.settings.domain.sing_threshold)
                    .map_err(SymmetryError::IntegrationPath)?;
                residual = residual.max((dg - bi).abs());
            }
        }
        Ok(PredicateResult::from_residual(
            "gradient_matches_contraction",
            residual,
            self.settings.tol.numeric,
        ))
    }

    /// Characterize `x` as the infinitesimal generator of a one-parameter
    /// group of canonoid transformations: the kind's side condition plus
    /// `[X, X_H]` being a Hamiltonian field, with the theorem's formula for
    /// its Hamiltonian function and the invariance of `K` cross-checked.
    pub fn is_canonoid_generator(&self, x: &VectorField) -> Result<CanonoidReport, SymmetryError> {
        self.check_field_dim(x)?;
        let tol = &self.settings.tol;
        let dim = self.chart().dim();
        let x_h = self.hamiltonian_field();
        let bracket = x.lie_bracket(x_h);

        let side_condition = match self.kind() {
            GeometryKind::Cosymplectic | GeometryKind::Cocontact => Some(self.equality(
                "commutes_with_time_reeb",
                &x.lie_bracket(self.time_reeb()),
                &VectorField::zero(dim),
                tol.exact,
            )?),
            _ => None,
        };
        if let Some(side) = &side_condition {
            if !side.verdict {
                return Ok(CanonoidReport {
                    verdict: false,
                    side_condition,
                    recognition: HamiltonianRecognition::failed(vec![]),
                    bracket_hamiltonian: None,
                    formula_residual: None,
                    k: None,
                    k_invariance_residual: None,
                });
            }
        }

        let recognition = self.is_hamiltonian_field(&bracket)?;
        if !recognition.hamiltonian {
            return Ok(CanonoidReport {
                verdict: false,
                side_condition,
                recognition,
                bracket_hamiltonian: None,
                formula_residual: None,
                k: None,
                k_invariance_residual: None,
            });
        }
        let g = recognition.generator.clone().expect("recognized");
        let lxh = x.apply(self.hamiltonian());

        let (formula_residual, k, k_invariance) = match self.kind() {
            GeometryKind::Symplectic | GeometryKind::Cosymplectic => {
                // K from X_H ⌟ L_X ω = dK (− RK η), integrated over the same
                // block as g; both handles vanish on the base (slice), so the
                // theorem's g = L_X H − K is compared after subtracting the
                // base-point value of L_X H.
                let alpha = x_h.contract_two(&lie_derivative_two(x, self.structure().two_form()));
                let active = if self.kind() == GeometryKind::Symplectic {
                    (0..dim).collect::<Vec<_>>()
                } else {
                    self.qp_indices()
                };
                let k = self.line_integral(alpha.clone(), active.clone());
                let mut guards = alpha.components();
                guards.push(lxh.clone());
                let probes = self.probe_points(&guards)?;
                let mut formula = 0.0f64;
                let mut invariance = 0.0f64;
                for point in &probes {
                    let mut base = self.base_point();
                    if let Some(t) = self.chart().t() {
                        base[t] = point[t];
                    }
                    let gv = g.eval(point)?;
                    let kv = k.eval(point)?;
                    let lv = lxh.eval(point)? - lxh.eval(&base)?;
                    formula = formula.max((gv - (lv - kv)).abs());
                    // X_H K = 0 at probes.
                    let mut xhk = 0.0;
                    for i in 0..dim {
                        let xi = x_h.component(i).eval(point)?;
                        if xi != 0.0 {
                            xhk += xi * k.partial(point, i, self.settings.stencil_step)?;
                        }
                    }
                    invariance = invariance.max(xhk.abs());
                }
                (formula, k, (invariance, tol.numeric))
            }
            GeometryKind::Contact | GeometryKind::Cocontact => {
                // K = −X_H ⌟ L_X θ exactly; the theorem's Hamiltonian function
                // is L_X H + X_H ⌟ L_X θ = L_X H − K.
                let theta = self.structure().contact_form().unwrap();
                let l_theta = lie_derivative_one(x, theta);
                let k_expr = x_h.contract_one(&l_theta).neg();
                let formula_rhs = lxh.clone().sub(k_expr.clone());
                let g_expr = match &g {
                    RecoveredFunction::Symbolic(e) => e.clone(),
                    _ => unreachable!("contact recovery is symbolic"),
                };
                let formula = self.sampled_residual(&[g_expr], &[formula_rhs])?;
                // Linearized invariance: X_H K + K·RH + H·((L_X R)H + RK) = 0
                // with R the contact Reeb field (R_z on cocontact).
                let r = self.contact_reeb();
                let h = self.hamiltonian();
                let identity = x_h.apply(&k_expr).add(k_expr.clone().mul(r.apply(h))).add(
                    h.clone()
                        .mul(x.lie_bracket(r).apply(h).add(r.apply(&k_expr))),
                );
                let invariance = self.sampled_residual(&[identity], &[ScalarExpr::zero()])?;
                (
                    formula,
                    RecoveredFunction::Symbolic(k_expr),
                    (invariance, tol.exact),
                )
            }
        };
        let (k_invariance_residual, inv_tol) = k_invariance;
        let verdict = formula_residual <= tol.numeric && k_invariance_residual <= inv_tol;
        Ok(CanonoidReport {
            verdict,
            side_condition,
            recognition,
            bracket_hamiltonian: Some(g),
            formula_residual: Some(formula_residual),
            k: Some(k),
            k_invariance_residual: Some(k_invariance_residual),
        })
    }

    /// Cosymplectic scaling-symmetry criterion through a primitive of Ω:
    /// verifies `dλ = Ω`, `X_H ⌟ λ = −ΛH`, `R ⌟ λ = 0`, then reconstructs the
    /// field through the inverse of `X ↦ X⌟Ω + (X⌟η)η` and confirms its
    /// scaling degree.
    pub fn check_scaling_primitive(
        &self,
        lambda: &OneForm,
        degree: f64,
    ) -> Result<PrimitiveReport, SymmetryError> {
        if self.kind() != GeometryKind::Cosymplectic {
            return Err(SymmetryError::UnsupportedGeometry {
                expected: "cosymplectic",
                got: self.kind(),
            });
        }
        if lambda.dim() != self.chart().dim() {
            return Err(SymmetryError::FieldDimension {
                expected: self.chart().dim(),
                got: lambda.dim(),
            });
        }
        let tol = &self.settings.tol;
        let omega = self.structure().two_form();
        let mut checks = vec![self.equality(
            "primitive_of_two_form",
            &lambda.exterior_derivative(),
            omega,
            tol.exact,
        )?];
        checks.push(self.equality(
            "hamiltonian_contraction",
            &self.hamiltonian_field().contract_one(lambda),
            &self.hamiltonian().clone().scale(-degree),
            tol.exact,
        )?);
        checks.push(self.equality(
            "reeb_contraction",
            &self.time_reeb().contract_one(lambda),
            &ScalarExpr::zero(),
            tol.exact,
        )?);
        if !checks.iter().all(|c| c.verdict) {
            return Ok(PrimitiveReport {
                verdict: false,
                checks,
                reconstructed: None,
                recovered_degree: None,
            });
        }
        // Darboux-coordinate inverse of X ⌟ Ω + (X ⌟ η)η = λ:
        // X^{qᵢ} = λ_{pᵢ}, X^{pᵢ} = −λ_{qᵢ}, X^t = λ_t.
        let n = self.chart().dof();
        let t = self.chart().t().unwrap();
        let mut comps = vec![ScalarExpr::zero(); self.chart().dim()];
        for i in 0..n {
            comps[self.chart().q(i)] = lambda.component(self.chart().p(i)).clone();
            comps[self.chart().p(i)] = lambda.component(self.chart().q(i)).clone().neg();
        }
        comps[t] = lambda.component(t).clone();
        let reconstructed = VectorField::new(comps);
        let scaling = self.scaling_degree(&reconstructed)?;
        let recovered_degree = scaling.degree;
        let confirmed = recovered_degree.is_some_and(|found| (found - degree).abs() <= tol.numeric);
        checks.push(PredicateResult {
            name: "reconstruction_scales".to_string(),
            verdict: confirmed,
            max_residual: recovered_degree
                .map(|found| (found - degree).abs())
                .unwrap_or(f64::NAN),
            witness: None,
        });
        Ok(PrimitiveReport {
            verdict: confirmed,
            checks,
            reconstructed: Some(reconstructed),
            recovered_degree,
        })
    }
}

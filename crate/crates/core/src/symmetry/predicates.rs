//! Conservation, dissipation, Noether and symmetry predicates. Every verdict
//! is a sampled identity with an explicit residual.

use serde::Serialize;

use crate::expr::ScalarExpr;
use crate::geometry::{lie_derivative_one, lie_derivative_two, GeometryKind, VectorField};

use super::{HamiltonianSystem, PredicateResult, SymmetryError};

/// Both halves of the kind's Noether statement for one function `f`.
#[derive(Clone, Debug, Serialize)]
pub struct NoetherReport {
    /// Conservation/dissipation side: `f` is a constant of motion
    /// (symplectic; cosymplectic additionally `Rf = 0`) or a dissipated
    /// quantity (contact, cocontact).
    pub forward: PredicateResult,
    /// Noether-symmetry side evaluated on `X_f`.
    pub noether_condition: PredicateResult,
    /// Sub-checks behind `noether_condition`.
    pub detail: Vec<PredicateResult>,
    /// The two verdicts agree — the theorem's biconditional on this instance.
    pub agree: bool,
    /// `X_f`, the associated Hamiltonian vector field.
    #[serde(skip)]
    pub reverse_field: VectorField,
}

#[derive(Clone, Debug, Serialize)]
pub struct InfinitesimalReport {
    pub verdict: bool,
    pub conditions: Vec<PredicateResult>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DynamicalReport {
    pub verdict: bool,
    /// `[X, dynamics] = 0` where the dynamics field is `X_H` or `E_H`.
    pub commutator: PredicateResult,
    /// `[X, X_H] = 0` reported separately for cosymplectic/cocontact charts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub commutes_with_hamiltonian_field: Option<PredicateResult>,
    /// `[X, R] = 0` (resp. `[X, R_t] = 0`) for cosymplectic/cocontact charts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub commutes_with_time_reeb: Option<PredicateResult>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    /// Structural half: `L_X(structure) = structure` (+ `X⌟η = 0` where the
    /// kind carries η).
    pub structural: Vec<PredicateResult>,
    /// Recovered degree, present only when the full definition holds.
    pub degree: Option<f64>,
    /// Standard deviation of per-point `(L_X H)/H` estimates.
    pub degree_deviation: f64,
    /// Residual of `L_X H − Λ·H` at the accepted degree.
    pub linear_residual: f64,
}

impl ScalingReport {
    pub fn is_scaling(&self) -> bool {
        self.degree.is_some()
    }
}

impl HamiltonianSystem {
    /// `f` is a constant of motion: the dynamics field annihilates it.
    pub fn is_constant_of_motion(&self, f: &ScalarExpr) -> Result<PredicateResult, SymmetryError> {
        self.equality(
            "constant_of_motion",
            &self.dynamics().apply(f),
            &ScalarExpr::zero(),
            self.settings.tol.exact,
        )
    }

    /// `f` decays at the Hamiltonian's own rate: `X_H f = −f·RH` (contact)
    /// or `E_H f = −f·R_z H` (cocontact).
    pub fn is_dissipated_quantity(&self, f: &ScalarExpr) -> Result<PredicateResult, SymmetryError> {
        if !matches!(self.kind(), GeometryKind::Contact | GeometryKind::Cocontact) {
            return Err(SymmetryError::UnsupportedGeometry {
                expected: "contact or cocontact",
                got: self.kind(),
            });
        }
        let rate = self.contact_reeb().apply(self.hamiltonian());
        let lhs = self.dynamics().apply(f);
        let rhs = f.clone().mul(rate).neg();
        self.equality("dissipated_quantity", &lhs, &rhs, self.settings.tol.exact)
    }

    /// Both directions of the kind's Noether theorem for `f`: the
    /// conservation/dissipation statement and the Noether-symmetry condition
    /// on `X_f`, with the biconditional asserted.
    pub fn noether_check(&self, f: &ScalarExpr) -> Result<NoetherReport, SymmetryError> {
        let tol = self.settings.tol.exact;
        let x_f = self.chart.hamiltonian_vector_field(f);
        let (forward, detail) = match self.kind() {
            GeometryKind::Symplectic => {
                let forward = self.is_constant_of_motion(f)?;
                // X_f is an infinitesimal symmetry: L_{X_f}ω = L_{X_f}H = 0.
                let inf = self.is_infinitesimal_symmetry(&x_f)?;
                (forward, inf.conditions)
            }
            GeometryKind::Cosymplectic => {
                // Forward side: constant of motion with Rf = 0. The same
                // Rf = 0 rides along on the symmetry side so the biconditional
                // is exact for the given f (X_f only sees df through the
                // (q,p) block).
                let conserved = self.is_constant_of_motion(f)?;
                let rf = self.equality(
                    "time_reeb_annihilates_f",
                    &self.time_reeb().apply(f),
                    &ScalarExpr::zero(),
                    tol,
                )?;
                let forward = PredicateResult {
                    name: "constant_of_motion_with_rf_zero".to_string(),
                    verdict: conserved.verdict && rf.verdict,
                    max_residual: conserved.max_residual.max(rf.max_residual),
                    witness: conserved.witness.clone().or(rf.witness.clone()),
                };
                let inf = self.is_infinitesimal_symmetry(&x_f)?;
                let mut detail = inf.conditions;
                detail.push(rf);
                (forward, detail)
            }
            GeometryKind::Contact => {
                // Dissipated ⟺ {f, H} = 0.
                let forward = self.is_dissipated_quantity(f)?;
                let bracket = self.equality(
                    "jacobi_bracket_with_h",
                    &self.chart.bracket(f, self.hamiltonian()),
                    &ScalarExpr::zero(),
                    tol,
                )?;
                (forward, vec![bracket])
            }
            GeometryKind::Cocontact => {
                // Dissipated ⟺ {f, H} + R_t f = 0.
                let forward = self.is_dissipated_quantity(f)?;
                let lhs = self
                    .chart
                    .bracket(f, self.hamiltonian())
                    .add(self.time_reeb().apply(f));
                let bracket = self.equality(
                    "jacobi_bracket_with_h_plus_rtf",
                    &lhs,
                    &ScalarExpr::zero(),
                    tol,
                )?;
                (forward, vec![bracket])
            }
        };
        let verdict = detail.iter().all(|c| c.verdict);
        let max_residual = detail.iter().fold(0.0f64, |m, c| m.max(c.max_residual));
        let noether_condition = PredicateResult {
            name: "noether_symmetry".to_string(),
            verdict,
            max_residual,
            witness: detail.iter().find_map(|c| c.witness.clone()),
        };
        Ok(NoetherReport {
            agree: forward.verdict == noether_condition.verdict,
            forward,
            noether_condition,
            detail,
            reverse_field: x_f,
        })
    }

    /// The kind's infinitesimal-symmetry conditions: structure form(s) and
    /// `H` are preserved, plus `X⌟η = 0` where the chart carries η.
    pub fn is_infinitesimal_symmetry(
        &self,
        x: &VectorField,
    ) -> Result<InfinitesimalReport, SymmetryError> {
        self.check_field_dim(x)?;
        let tol = self.settings.tol.exact;
        let mut conditions = Vec::new();
        match self.kind() {
            GeometryKind::Symplectic | GeometryKind::Cosymplectic => {
                let omega = self.structure().two_form();
                conditions.push(self.equality(
                    "preserves_two_form",
                    &lie_derivative_two(x, omega),
                    &crate::geometry::TwoForm::zero(self.chart.dim()),
                    tol,
                )?);
            }
            GeometryKind::Contact | GeometryKind::Cocontact => {
                let theta = self.structure().contact_form().unwrap();
                conditions.push(self.equality(
                    "preserves_contact_form",
                    &lie_derivative_one(x, theta),
                    &crate::geometry::OneForm::zero(self.chart.dim()),
                    tol,
                )?);
            }
        }
        if let Some(eta) = self.structure().time_form() {
            conditions.push(self.equality(
                "annihilates_time_form",
                &x.contract_one(eta),
                &ScalarExpr::zero(),
                tol,
            )?);
        }
        conditions.push(self.equality(
            "preserves_hamiltonian",
            &x.apply(self.hamiltonian()),
            &ScalarExpr::zero(),
            tol,
        )?);
        Ok(InfinitesimalReport {
            verdict: conditions.iter().all(|c| c.verdict),
            conditions,
        })
    }

    /// `[X, dynamics] = 0`. For cosymplectic/cocontact charts the split
    /// `[X, X_H] = 0` and `[X, R] = 0` (resp. `[X, R_t] = 0`) flags are
    /// reported separately; not every dynamical symmetry satisfies them.
    pub fn is_dynamical_symmetry(&self, x: &VectorField) -> Result<DynamicalReport, SymmetryError> {
        self.check_field_dim(x)?;
        let tol = self.settings.tol.exact;
        let zero = VectorField::zero(self.chart.dim());
        let commutator = self.equality(
            "commutes_with_dynamics",
            &x.lie_bracket(self.dynamics()),
            &zero,
            tol,
        )?;
        let (xh_flag, reeb_flag) = match self.kind() {
            GeometryKind::Cosymplectic | GeometryKind::Cocontact => {
                let xh = self.equality(
                    "commutes_with_hamiltonian_field",
                    &x.lie_bracket(self.hamiltonian_field()),
                    &zero,
                    tol,
                )?;
                let rt = self.equality(
                    "commutes_with_time_reeb",
                    &x.lie_bracket(self.time_reeb()),
                    &zero,
                    tol,
                )?;
                (Some(xh), Some(rt))
            }
            _ => (None, None),
        };
        Ok(DynamicalReport {
            verdict: commutator.verdict,
            commutator,
            commutes_with_hamiltonian_field: xh_flag,
            commutes_with_time_reeb: reeb_flag,
        })
    }

    /// Scaling-symmetry test. Checks the structural half first
    /// (`L_X(structure) = structure`, `X⌟η = 0` where applicable), then
    /// estimates Λ as the sample mean of `(L_X H)/H` over points with
    /// `|H| > h_cutoff` and accepts when the estimates are consistent.
    pub fn scaling_degree(&self, x: &VectorField) -> Result<ScalingReport, SymmetryError> {
        self.check_field_dim(x)?;
        let tol = &self.settings.tol;
        let mut structural = Vec::new();
        match self.kind() {
            GeometryKind::Symplectic | GeometryKind::Cosymplectic => {
                let omega = self.structure().two_form();
                structural.push(self.equality(
                    "scales_two_form",
                    &lie_derivative_two(x, omega),
                    omega,
                    tol.exact,
                )?);
            }
            GeometryKind::Contact | GeometryKind::Cocontact => {
                let theta = self.structure().contact_form().unwrap();
                structural.push(self.equality(
                    "scales_contact_form",
                    &lie_derivative_one(x, theta),
                    theta,
                    tol.exact,
                )?);
            }
        }
        if let Some(eta) = self.structure().time_form() {
            structural.push(self.equality(
                "annihilates_time_form",
                &x.contract_one(eta),
                &ScalarExpr::zero(),
                tol.exact,
            )?);
        }
        if !structural.iter().all(|c| c.verdict) {
            return Ok(ScalingReport {
                structural,
                degree: None,
                degree_deviation: f64::NAN,
                linear_residual: f64::NAN,
            });
        }

        let lxh = x.apply(self.hamiltonian());
        let h = self.hamiltonian();
        // Per-point estimates Λᵢ = (L_X H)(xᵢ) / H(xᵢ) over |H| > cutoff.
        let dom = &self.settings.domain;
        let mut ratios = Vec::new();
        let limit = 100 * dom.samples as u64;
        let mut index = 0u64;
        while ratios.len() < dom.samples && index < limit {
            let point = dom.point(index);
            index += 1;
            let (hv, lv) = match (
                h.eval_guarded(&point, dom.sing_threshold),
                lxh.eval_guarded(&point, dom.sing_threshold),
            ) {
                (Ok(hv), Ok(lv)) => (hv, lv),
                _ => continue,
            };
            if hv.abs() <= tol.h_cutoff {
                continue;
            }
            ratios.push(lv / hv);
        }
        if ratios.is_empty() {
            return Err(SymmetryError::DegenerateHamiltonian {
                cutoff: tol.h_cutoff,
            });
        }
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let variance = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / ratios.len() as f64;
        let deviation = variance.sqrt();
        let linear_residual = self.sampled_residual(&[lxh], &[h.clone().scale(mean)])?;
        let accept = deviation < tol.lambda_dev && linear_residual <= tol.numeric;
        Ok(ScalingReport {
            structural,
            degree: accept.then_some(mean),
            degree_deviation: deviation,
            linear_residual,
        })
    }
}
